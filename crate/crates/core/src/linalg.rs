//! Dense matrices over small finite fields and the code-level operations built
//! on them: row reduction, systematic form, dual codes, exhaustive distance
//! computation, shortening and puncturing.
//!
//! Codes have at most [`MAX_COLUMNS`] coordinates so that supports and index
//! sets fit in a `u64` bit mask.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;

pub const MAX_COLUMNS: usize = 64;

/// Default cap on the number of vectors any exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// A subset of coordinate positions `0..64`, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(pub u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn full(n: usize) -> IndexSet {
        assert!(n <= MAX_COLUMNS);
        if n == 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> IndexSet {
        IndexSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> IndexSet {
        IndexSet(indices.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Lexicographic comparison of the sorted index lists of two masks.
pub fn lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let d = (a ^ b).trailing_zeros();
    let a_has = a >> d & 1 == 1;
    let without = if a_has { b } else { a };
    // The list holding d is smaller unless the other list stops before d.
    let holder_smaller = without >> d != 0;
    match (a_has, holder_smaller) {
        (true, true) | (false, false) => Ordering::Less,
        _ => Ordering::Greater,
    }
}

/// Ordering used for recovery sets everywhere: smaller sets first, then
/// lexicographic on indices.
pub fn set_order(a: u64, b: u64) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| lex_cmp(a, b))
}

/// Integer encoding of a vector, coordinate 0 least significant.
pub fn encode_vector(v: &[u8], q: usize) -> u64 {
    v.iter().rev().fold(0u64, |acc, &x| acc * q as u64 + x as u64)
}

pub fn decode_vector(mut code: u64, q: usize, len: usize) -> Vec<u8> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push((code % q as u64) as u8);
        code /= q as u64;
    }
    v
}

/// Scales `v` so its first nonzero entry is 1.
pub fn normalize(field: &Field, v: &[u8]) -> Vec<u8> {
    match v.iter().find(|&&x| x != 0) {
        None => v.to_vec(),
        Some(&lead) => {
            let s = field.inv(lead);
            v.iter().map(|&x| field.mul(s, x)).collect()
        }
    }
}

pub fn support(v: &[u8]) -> u64 {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .fold(0u64, |acc, (i, _)| acc | (1u64 << i))
}

fn checked_power(q: usize, m: usize) -> u128 {
    (q as u128).checked_pow(m as u32).unwrap_or(u128::MAX)
}

pub(crate) fn ensure_within_cap(q: usize, dim: usize, cap: u128) -> Result<()> {
    let size = checked_power(q, dim);
    if size > cap {
        Err(Error::CapExceeded { size, cap })
    } else {
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
    field: &'static Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row-echelon form with its rank and pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn new(field: &'static Field, rows: usize, cols: usize, data: Vec<u8>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| !field.contains(x as u32)) {
            return Err(Error::InvalidElement { value: bad as u32, q: field.order() });
        }
        Ok(Matrix { rows, cols, data, field })
    }

    pub fn zeros(field: &'static Field, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0; rows * cols], field }
    }

    pub fn identity(field: &'static Field, k: usize) -> Matrix {
        let mut m = Matrix::zeros(field, k, k);
        for i in 0..k {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows<R: AsRef<[u32]>>(field: &'static Field, rows: &[R]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for &x in row {
                if !field.contains(x) {
                    return Err(Error::InvalidElement { value: x, q: field.order() });
                }
                data.push(x as u8);
            }
        }
        Ok(Matrix { rows: rows.len(), cols, data, field })
    }

    /// Builds a `k x columns.len()` matrix from column vectors.
    pub fn from_columns(field: &'static Field, k: usize, columns: &[Vec<u8>]) -> Result<Matrix> {
        let mut m = Matrix::zeros(field, k, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != k {
                return Err(Error::Dimension(format!("column {j} has length {}", c.len())));
            }
            for (i, &x) in c.iter().enumerate() {
                if !field.contains(x as u32) {
                    return Err(Error::InvalidElement { value: x as u32, q: field.order() });
                }
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u8>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.add(out.get(r, c), f.mul(a, other.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: &[u8]) -> Vec<u8> {
        let f = self.field;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0u8, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, indices.len());
        for (j, &c) in indices.iter().enumerate() {
            for r in 0..self.rows {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn hconcat(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.rows != other.rows {
            return Err(Error::Dimension("row counts differ".into()));
        }
        let mut m = Matrix::zeros(self.field, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                m.set(r, self.cols + c, other.get(r, c));
            }
        }
        Ok(m)
    }

    fn with_rows(&self, rows: &[Vec<u8>]) -> Matrix {
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data: rows.concat(),
            field: self.field,
        }
    }

    /// Gauss-Jordan elimination: leftmost pivot per row, rows scanned top-down.
    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let (a, b) = (m.get(r, j), m.get(pr, j));
                    m.set(r, j, b);
                    m.set(pr, j, a);
                }
            }
            let s = f.inv(m.get(r, c));
            for j in 0..m.cols {
                let v = f.mul(s, m.get(r, j));
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                let factor = m.get(i, c);
                if i == r || factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { rank: pivots.len(), matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis (as rows) of `{x : M x = 0}`.
    pub fn null_space(&self) -> Matrix {
        let f = self.field;
        let Rref { matrix: r, pivots, .. } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let rows: Vec<Vec<u8>> = free
            .iter()
            .map(|&fc| {
                let mut x = vec![0u8; self.cols];
                x[fc] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    x[pc] = f.neg(r.get(i, fc));
                }
                x
            })
            .collect();
        if rows.is_empty() {
            Matrix::zeros(f, 0, self.cols)
        } else {
            self.with_rows(&rows)
        }
    }

    /// Independent rows spanning the same space (the nonzero rows of the rref).
    pub fn row_basis(&self) -> Matrix {
        let rr = self.rref();
        let rows: Vec<Vec<u8>> = (0..rr.rank).map(|i| rr.matrix.row(i).to_vec()).collect();
        if rows.is_empty() {
            Matrix::zeros(self.field, 0, self.cols)
        } else {
            self.with_rows(&rows)
        }
    }

    /// Coefficients `c` with `sum_j c_j * column(indices[j]) = target`, if any.
    pub fn solve_combination(&self, indices: &[usize], target: &[u8]) -> Option<Vec<u8>> {
        let f = self.field;
        let mut aug = self.select_columns(indices);
        let t = Matrix { rows: self.rows, cols: 1, data: target.to_vec(), field: f };
        aug = aug.hconcat(&t).ok()?;
        let rr = aug.rref();
        if rr.pivots.last() == Some(&indices.len()) {
            return None;
        }
        let mut coeffs = vec![0u8; indices.len()];
        for (i, &pc) in rr.pivots.iter().enumerate() {
            coeffs[pc] = rr.matrix.get(i, indices.len());
        }
        Some(coeffs)
    }
}

/// Calls `visit` on every vector in the row space of `basis`, zero included.
///
/// The rows are expanded into a basis over the prime field (row times `x^j`),
/// and an odometer over that basis touches each codeword with about one row
/// addition.
pub fn for_each_codeword(basis: &Matrix, mut visit: impl FnMut(&[u8])) {
    let f = basis.field();
    let n = basis.cols();
    let p = f.characteristic() as usize;
    let e = f.degree() as usize;
    let mut expanded: Vec<Vec<u8>> = Vec::with_capacity(basis.rows() * e);
    for r in 0..basis.rows() {
        let mut scale = 1u8;
        for _ in 0..e {
            expanded.push(basis.row(r).iter().map(|&x| f.mul(scale, x)).collect());
            scale = (scale as usize * p) as u8;
        }
    }
    let mut word = vec![0u8; n];
    let mut digits = vec![0usize; expanded.len()];
    visit(&word);
    loop {
        let mut d = 0;
        loop {
            if d == expanded.len() {
                return;
            }
            for (w, &x) in word.iter_mut().zip(&expanded[d]) {
                *w = f.add(*w, x);
            }
            digits[d] += 1;
            if digits[d] == p {
                digits[d] = 0;
                d += 1;
            } else {
                break;
            }
        }
        visit(&word);
    }
}

/// Supports of all codewords of the row space (zero word included).
pub fn codeword_supports(basis: &Matrix) -> Vec<u64> {
    let n = basis.cols();
    assert!(n <= MAX_COLUMNS);
    let f = basis.field();
    if f.order() == 2 {
        let rows: Vec<u64> = (0..basis.rows()).map(|r| support(basis.row(r))).collect();
        let mut out = Vec::with_capacity(1 << rows.len());
        let mut word = 0u64;
        out.push(word);
        for step in 1u64..(1u64 << rows.len()) {
            word ^= rows[step.trailing_zeros() as usize];
            out.push(word);
        }
        out
    } else {
        let mut out = Vec::new();
        for_each_codeword(basis, |w| out.push(support(w)));
        out
    }
}

/// Inclusion-minimal nonzero supports, ordered by [`set_order`].
pub fn minimal_supports(mut supports: Vec<u64>) -> Vec<u64> {
    supports.retain(|&s| s != 0);
    supports.sort_unstable_by(|&a, &b| set_order(a, b));
    supports.dedup();
    let mut minimal: Vec<u64> = Vec::new();
    for s in supports {
        if !minimal.iter().any(|&m| m & !s == 0) {
            minimal.push(s);
        }
    }
    minimal
}

/// Minimal codewords of the row space, one per support, scaled so the first
/// nonzero entry is 1, in lexicographic order of their entries.
pub fn minimal_codewords(basis: &Matrix) -> Vec<Vec<u8>> {
    let f = basis.field();
    let minimal = minimal_supports(codeword_supports(basis));
    let mut words: Vec<Option<Vec<u8>>> = vec![None; minimal.len()];
    for_each_codeword(basis, |w| {
        let s = support(w);
        if s == 0 || w.iter().find(|&&x| x != 0) != Some(&1) {
            return;
        }
        if let Some(pos) = minimal.iter().position(|&m| m == s) {
            words[pos].get_or_insert_with(|| normalize(f, w));
        }
    });
    let mut out: Vec<Vec<u8>> = words.into_iter().map(|w| w.expect("support seen")).collect();
    out.sort();
    out
}

/// Minimum Hamming weight of the nonzero vectors in the row space, `None` for
/// the zero space.
pub fn min_weight(basis: &Matrix, cap: u128) -> Result<Option<usize>> {
    let basis = basis.row_basis();
    if basis.rows() == 0 {
        return Ok(None);
    }
    ensure_within_cap(basis.field().order(), basis.rows(), cap)?;
    let best = codeword_supports(&basis)
        .into_iter()
        .filter(|&s| s != 0)
        .map(|s| s.count_ones() as usize)
        .min();
    Ok(best)
}

/// Basis of the subspace of the row space supported inside `within`.
pub fn shorten_space(basis: &Matrix, within: IndexSet) -> Matrix {
    let outside: Vec<usize> = (0..basis.cols()).filter(|&c| !within.contains(c)).collect();
    if outside.is_empty() {
        return basis.row_basis();
    }
    let restricted = basis.select_columns(&outside);
    let combos = restricted.transpose().null_space();
    if combos.rows() == 0 {
        return Matrix::zeros(basis.field(), 0, basis.cols());
    }
    combos.mul(basis).expect("shapes agree").row_basis()
}

/// Generator matrix with full row rank `k`.
#[derive(Clone, PartialEq, Eq)]
pub struct GeneratorMatrix(Matrix);

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug)]
pub struct SystematicForm {
    /// `(I_k | A)`.
    pub generator: GeneratorMatrix,
    /// Column `j` of the systematic form is column `permutation[j]` of `M G`.
    pub permutation: Vec<usize>,
    /// The invertible `M`.
    pub change_of_basis: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeMetrics {
    pub length: usize,
    pub dimension: usize,
    pub min_distance: usize,
    /// `None` when the dual code is zero.
    pub dual_min_distance: Option<usize>,
    pub distinct_columns: usize,
}

impl GeneratorMatrix {
    pub fn new(matrix: Matrix) -> Result<GeneratorMatrix> {
        if matrix.cols() > MAX_COLUMNS {
            return Err(Error::TooManyColumns { max: MAX_COLUMNS });
        }
        let rank = matrix.rank();
        if rank != matrix.rows() || matrix.rows() == 0 {
            return Err(Error::RankDeficient { rank, rows: matrix.rows() });
        }
        Ok(GeneratorMatrix(matrix))
    }

    pub fn from_rows<R: AsRef<[u32]>>(field: &'static Field, rows: &[R]) -> Result<GeneratorMatrix> {
        GeneratorMatrix::new(Matrix::from_rows(field, rows)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn field(&self) -> &'static Field {
        self.0.field()
    }

    pub fn k(&self) -> usize {
        self.0.rows()
    }

    pub fn n(&self) -> usize {
        self.0.cols()
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        self.0.column(j)
    }

    pub fn columns(&self) -> Vec<Vec<u8>> {
        self.0.columns()
    }

    /// Left multiplication by an invertible `k x k` matrix.
    pub fn left_multiply(&self, m: &Matrix) -> Result<GeneratorMatrix> {
        GeneratorMatrix::new(m.mul(&self.0)?)
    }

    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        self.0.select_columns(indices)
    }

    /// Brings the generator to `(I_k | A)`.
    ///
    /// If every unit vector already occurs as a column, only a permutation is
    /// applied (first occurrences moved to the front). Otherwise the rref
    /// pivots define the information set.
    pub fn systematic_form(&self) -> SystematicForm {
        let f = self.field();
        let k = self.k();
        let n = self.n();
        let cols = self.columns();
        let unit_positions: Option<Vec<usize>> = (0..k)
            .map(|i| {
                cols.iter().position(|c| c.iter().enumerate().all(|(r, &x)| x == u8::from(r == i)))
            })
            .collect();

        let (reduced, pivots, change) = match unit_positions {
            Some(pos) => (self.0.clone(), pos, Matrix::identity(f, k)),
            None => {
                let aug = self.0.hconcat(&Matrix::identity(f, k)).expect("same field");
                let rr = aug.rref();
                let left: Vec<usize> = (0..n).collect();
                let right: Vec<usize> = (n..n + k).collect();
                let pivots = rr.pivots.clone();
                debug_assert!(pivots.iter().all(|&p| p < n));
                (rr.matrix.select_columns(&left), pivots, rr.matrix.select_columns(&right))
            }
        };
        let mut permutation = pivots.clone();
        permutation.extend((0..n).filter(|c| !pivots.contains(c)));
        let generator = GeneratorMatrix(reduced.select_columns(&permutation));
        SystematicForm { generator, permutation, change_of_basis: change }
    }

    /// Parity-check matrix: an `(n-k) x n` basis of the dual code.
    pub fn dual_basis(&self) -> Matrix {
        self.0.null_space()
    }

    pub fn min_distance(&self) -> Result<usize> {
        self.min_distance_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn min_distance_with_cap(&self, cap: u128) -> Result<usize> {
        Ok(min_weight(&self.0, cap)?.expect("full-rank generator spans a nonzero code"))
    }

    /// Minimum distance of the dual code, `None` if the dual is zero.
    pub fn dual_min_distance(&self) -> Result<Option<usize>> {
        min_weight(&self.dual_basis(), DEFAULT_ENUMERATION_CAP)
    }

    /// Basis of the codewords supported inside `a`.
    pub fn shorten(&self, a: IndexSet) -> Matrix {
        shorten_space(&self.0, a)
    }

    /// Basis of the projection of the code onto the coordinates in `a`.
    pub fn puncture(&self, a: IndexSet) -> Result<Matrix> {
        if a.is_empty() {
            return Err(Error::InvalidParameters("puncturing onto an empty set".into()));
        }
        if let Some(i) = a.iter().find(|&i| i >= self.n()) {
            return Err(Error::IndexOutOfRange { index: i, len: self.n() });
        }
        Ok(self.0.select_columns(&a.to_vec()).row_basis())
    }

    /// Support-minimal dual codewords inside `within` whose support contains
    /// `i`, one per support (first nonzero entry 1).
    pub fn minimal_dual_codewords_through(&self, i: usize, within: IndexSet) -> Result<Vec<Vec<u8>>> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange { index: i, len: self.n() });
        }
        if !within.contains(i) {
            return Err(Error::InvalidParameters(format!("index {i} is not inside the given set")));
        }
        let shortened = shorten_space(&self.dual_basis(), within);
        if shortened.rows() == 0 {
            return Ok(Vec::new());
        }
        ensure_within_cap(self.field().order(), shortened.rows(), DEFAULT_ENUMERATION_CAP)?;
        Ok(minimal_codewords(&shortened)
            .into_iter()
            .filter(|w| w[i] != 0)
            .collect())
    }

    pub fn distinct_column_count(&self) -> usize {
        let mut cols = self.columns();
        cols.sort();
        cols.dedup();
        cols.len()
    }

    pub fn metrics(&self) -> Result<CodeMetrics> {
        Ok(CodeMetrics {
            length: self.n(),
            dimension: self.k(),
            min_distance: self.min_distance()?,
            dual_min_distance: self.dual_min_distance()?,
            distinct_columns: self.distinct_column_count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use rand::{Rng, SeedableRng};

    fn gf(q: u32) -> &'static Field {
        crate::field::field_of_order(q).unwrap()
    }

    fn simplex3() -> GeneratorMatrix {
        GeneratorMatrix::from_rows(
            gf(2),
            &[[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]],
        )
        .unwrap()
    }

    fn parity() -> GeneratorMatrix {
        GeneratorMatrix::from_rows(gf(2), &[[1, 0, 1], [0, 1, 1]]).unwrap()
    }

    fn random_full_rank(rng: &mut impl Rng, field: &'static Field, k: usize, n: usize) -> GeneratorMatrix {
        loop {
            let data = (0..k * n).map(|_| rng.gen_range(0..field.order() as u8)).collect();
            if let Ok(g) = GeneratorMatrix::new(Matrix::new(field, k, n, data).unwrap()) {
                return g;
            }
        }
    }

    #[test]
    fn rref_examples() {
        let i3 = Matrix::identity(gf(2), 3);
        let rr = i3.rref();
        assert_eq!(rr.matrix, i3);
        assert_eq!(rr.rank, 3);

        let z = Matrix::zeros(gf(2), 2, 3);
        let rr = z.rref();
        assert_eq!(rr.matrix, z);
        assert_eq!(rr.rank, 0);

        let m = Matrix::from_rows(gf(2), &[[1, 1], [1, 1]]).unwrap();
        let rr = m.rref();
        assert_eq!(rr.matrix, Matrix::from_rows(gf(2), &[[1, 1], [0, 0]]).unwrap());
        assert_eq!(rr.rank, 1);
        assert_eq!(rr.pivots, vec![0]);
    }

    #[test]
    fn systematic_form_examples() {
        let f = gf(2);
        let g = parity();
        let s = g.systematic_form();
        assert_eq!(s.generator, g);
        assert_eq!(s.permutation, vec![0, 1, 2]);

        // (A | I_2) with A = all-ones column
        let swapped = GeneratorMatrix::from_rows(f, &[[1, 1, 0], [1, 0, 1]]).unwrap();
        let s = swapped.systematic_form();
        assert_eq!(s.generator, g);
        assert_eq!(s.permutation, vec![1, 2, 0]);
        assert_eq!(s.change_of_basis, Matrix::identity(f, 2));

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_full_rank(&mut rng, f, 3, 5);
            let s = g.systematic_form();
            let lead = s.generator.select_columns(&[0, 1, 2]);
            assert_eq!(lead, Matrix::identity(f, 3));
            // M G P == S
            let mg = s.change_of_basis.mul(g.matrix()).unwrap();
            assert_eq!(mg.select_columns(&s.permutation), *s.generator.matrix());
        }
    }

    #[test]
    fn dual_basis_examples() {
        let h = parity().dual_basis();
        assert_eq!(h, Matrix::from_rows(gf(2), &[[1, 1, 1]]).unwrap());

        let ik = GeneratorMatrix::new(Matrix::identity(gf(3), 4)).unwrap();
        let h = ik.dual_basis();
        assert_eq!((h.rows(), h.cols()), (0, 4));

        let g = simplex3();
        let h = g.dual_basis();
        assert_eq!(h.rows(), 4);
        assert!(g.matrix().mul(&h.transpose()).unwrap().is_zero());
        let hamming = GeneratorMatrix::new(h).unwrap();
        assert_eq!(hamming.min_distance().unwrap(), 3);
    }

    #[test]
    fn dual_basis_is_orthogonal_complement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &q in &[2u32, 3, 4, 5, 8, 9] {
            for _ in 0..20 {
                let k = rng.gen_range(1..4);
                let n = rng.gen_range(k..8);
                let g = random_full_rank(&mut rng, gf(q), k, n);
                let h = g.dual_basis();
                assert_eq!(h.rank(), n - k);
                if h.rows() > 0 {
                    assert!(g.matrix().mul(&h.transpose()).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn min_distance_examples() {
        assert_eq!(simplex3().min_distance().unwrap(), 4);
        assert_eq!(simplex3().dual_min_distance().unwrap(), Some(3));

        // [7,3] Reed-Solomon over GF(8), evaluation points 0..7
        let f = gf(8);
        let mut rows = vec![vec![1u32; 7]];
        let xs: Vec<u8> = (0..7).collect();
        rows.push(xs.iter().map(|&x| x as u32).collect());
        rows.push(xs.iter().map(|&x| f.mul(x, x) as u32).collect());
        let rs = GeneratorMatrix::from_rows(f, &rows).unwrap();
        assert_eq!(rs.min_distance().unwrap(), 5);
    }

    #[test]
    fn min_distance_respects_cap() {
        let g = simplex3();
        assert!(matches!(g.min_distance_with_cap(4), Err(Error::CapExceeded { .. })));
    }

    /// Brute force over all q^k messages, independent of the odometer.
    fn brute_min_distance(g: &GeneratorMatrix) -> usize {
        let f = g.field();
        let q = f.order();
        let mut best = usize::MAX;
        for code in 1..(q as u64).pow(g.k() as u32) {
            let msg = decode_vector(code, q, g.k());
            let word = g.matrix().transpose().apply(&msg);
            best = best.min(word.iter().filter(|&&x| x != 0).count());
        }
        best
    }

    #[test]
    fn codeword_enumeration_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &q in &[2u32, 3, 4, 8, 9] {
            for _ in 0..10 {
                let g = random_full_rank(&mut rng, gf(q), 2, 5);
                assert_eq!(g.min_distance().unwrap(), brute_min_distance(&g));
                let mut seen = 0usize;
                for_each_codeword(g.matrix(), |_| seen += 1);
                assert_eq!(seen, (q as usize).pow(2));
            }
        }
    }

    #[test]
    fn singleton_bound_on_random_codes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for &q in &[2u32, 3, 5] {
            for _ in 0..30 {
                let k = rng.gen_range(1..4);
                let n = rng.gen_range(k..8);
                let g = random_full_rank(&mut rng, gf(q), k, n);
                let d = g.min_distance().unwrap();
                assert!(d >= 1 && d <= n - k + 1);
            }
        }
    }

    #[test]
    fn shorten_examples() {
        let g = parity();
        let full = g.shorten(IndexSet::full(3));
        assert_eq!(full.rank(), 2);
        assert_eq!(g.shorten(IndexSet::EMPTY).rows(), 0);
        // 110 is the only nonzero codeword supported on the first two coordinates
        let sub = g.shorten(IndexSet::from_indices([0, 1]));
        assert_eq!(sub, Matrix::from_rows(gf(2), &[[1, 1, 0]]).unwrap());
        assert_eq!(g.shorten(IndexSet::from_indices([0, 2])).rows(), 1);
        assert_eq!(g.shorten(IndexSet::from_indices([0])).rows(), 0);

        let s = simplex3();
        let a = IndexSet::from_indices([0, 1, 2, 3, 5]);
        let sub = s.shorten(a);
        for r in 0..sub.rows() {
            assert!(IndexSet(support(sub.row(r))).is_subset(a));
            // each row lies in the code
            let h = s.dual_basis();
            assert!(h.apply(sub.row(r)).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn puncture_examples() {
        let g = parity();
        assert_eq!(g.puncture(IndexSet::full(3)).unwrap().rank(), 2);
        let p = g.puncture(IndexSet::from_indices([0, 1])).unwrap();
        assert_eq!(p, Matrix::identity(gf(2), 2));
        assert!(g.puncture(IndexSet::EMPTY).is_err());

        let s = simplex3();
        let p = s.puncture(IndexSet::from_indices(0..6)).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 6));
    }

    #[test]
    fn minimal_dual_codewords_examples() {
        let g = parity();
        assert_eq!(
            g.minimal_dual_codewords_through(0, IndexSet::full(3)).unwrap(),
            vec![vec![1, 1, 1]]
        );

        let ik = GeneratorMatrix::new(Matrix::identity(gf(2), 3)).unwrap();
        assert!(ik.minimal_dual_codewords_through(1, IndexSet::full(3)).unwrap().is_empty());

        let s = simplex3();
        let words = s.minimal_dual_codewords_through(0, IndexSet::full(7)).unwrap();
        let weight3: Vec<_> = words.iter().filter(|w| support(w).count_ones() == 3).collect();
        assert_eq!(weight3.len(), 3);
        // Hamming [7,4]: minimal codewords have weight 3 or 4; each contains 0.
        assert!(words.iter().all(|w| w[0] == 1));
    }

    /// Minimality oracle: no proper sub-support carries a nonzero codeword.
    #[test]
    fn minimal_dual_codewords_are_minimal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for &q in &[2u32, 3, 4] {
            for _ in 0..15 {
                let k = rng.gen_range(1..4);
                let n = rng.gen_range(k + 1..9);
                let g = random_full_rank(&mut rng, gf(q), k, n);
                let within = IndexSet(rng.gen_range(1u64..(1 << n)) | 1);
                let words = g.minimal_dual_codewords_through(0, within).unwrap();
                let h = g.dual_basis();
                let mut all = Vec::new();
                for_each_codeword(&h, |w| all.push(w.to_vec()));
                for w in &words {
                    let s = support(w);
                    assert!(IndexSet(s).is_subset(within));
                    assert!(s & 1 == 1);
                    assert!(h.rows() > 0);
                    for other in &all {
                        let t = support(other);
                        assert!(t == 0 || t == s || t & !s != 0, "non-minimal support");
                    }
                }
                // completeness: every minimal support through 0 inside `within` is present
                let supports: Vec<u64> = all.iter().map(|w| support(w)).collect();
                for &s in &supports {
                    if s & 1 == 1 && IndexSet(s).is_subset(within) {
                        let minimal = supports.iter().all(|&t| t == 0 || t == s || t & !s != 0);
                        if minimal {
                            assert!(words.iter().any(|w| support(w) == s));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lex_order_of_sets() {
        let a = IndexSet::from_indices([0, 2]).0;
        let b = IndexSet::from_indices([0, 1, 5]).0;
        let c = IndexSet::from_indices([0]).0;
        let d = IndexSet::from_indices([1]).0;
        assert_eq!(lex_cmp(b, a), Ordering::Less);
        assert_eq!(lex_cmp(c, a), Ordering::Less);
        assert_eq!(lex_cmp(a, d), Ordering::Less);
        assert_eq!(lex_cmp(d, a), Ordering::Greater);
        assert_eq!(set_order(d, b), Ordering::Less);
    }

    #[test]
    fn solve_combination_recovers_targets() {
        let g = parity();
        let coeffs = g.matrix().solve_combination(&[1, 2], &[1, 0]).unwrap();
        assert_eq!(coeffs, vec![1, 1]);
        assert!(g.matrix().solve_combination(&[1], &[1, 0]).is_none());

        let f = make_field(3, 1).unwrap();
        let g = GeneratorMatrix::from_rows(f, &[[1, 0, 2], [0, 1, 2]]).unwrap();
        let coeffs = g.matrix().solve_combination(&[1, 2], &[1, 0]).unwrap();
        // 2*(0,1) + 2*(2,2) = (4,6) = (1,0)
        assert_eq!(coeffs, vec![2, 2]);
    }

    #[test]
    fn encoding_round_trip() {
        let v = vec![2, 0, 1];
        let code = encode_vector(&v, 3);
        assert_eq!(code, 2 + 9);
        assert_eq!(decode_vector(code, 3, 3), v);
    }
}
