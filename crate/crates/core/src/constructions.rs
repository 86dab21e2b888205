//! Generator matrix families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{field_of_order, Field};
use crate::linalg::{decode_vector, GeneratorMatrix, Matrix};
use crate::recovery::for_each_combination;

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidParameters(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn from_columns(field: &'static Field, k: usize, cols: &[Vec<u8>]) -> Result<GeneratorMatrix> {
    GeneratorMatrix::new(Matrix::from_columns(field, k, cols)?)
}

fn unit(k: usize, i: usize) -> Vec<u8> {
    (0..k).map(|j| u8::from(i == j)).collect()
}

pub fn identity(k: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    GeneratorMatrix::new(Matrix::identity(field_of_order(q)?, k))
}

/// `(I_k | c)` where every entry of `c` is `-1`, so all columns sum to zero.
pub fn identity_parity(k: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    let f = field_of_order(q)?;
    let mut cols: Vec<Vec<u8>> = (0..k).map(|i| unit(k, i)).collect();
    cols.push(vec![f.minus_one(); k]);
    from_columns(f, k, &cols)
}

/// `ceil(t/2)` copies of the identity followed by `floor(t/2)` all-one
/// columns: length `k*ceil(t/2) + floor(t/2)`.
pub fn lbub_upper(k: usize, t: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    positive("t", t)?;
    let f = field_of_order(q)?;
    let mut cols = Vec::new();
    for _ in 0..t.div_ceil(2) {
        cols.extend((0..k).map(|i| unit(k, i)));
    }
    for _ in 0..t / 2 {
        cols.push(vec![1; k]);
    }
    from_columns(f, k, &cols)
}

/// Smallest `r` with `r choose 2 >= k`, by integer scan.
pub fn weight_two_length(k: usize) -> usize {
    let mut r = 2;
    while r * (r - 1) / 2 < k {
        r += 1;
    }
    r
}

/// The first `k` weight-two support pairs of `{0..r-1}` in lexicographic order.
fn support_pairs(k: usize, r: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(k);
    for a in 0..r {
        for b in a + 1..r {
            if pairs.len() < k {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Whether the graph on `r` vertices with edges `pairs` has a proper
/// 3-colouring, by backtracking in vertex order.
fn three_colourable(pairs: &[(usize, usize)], r: usize) -> bool {
    fn go(v: usize, colour: &mut [u8], adj: &[Vec<usize>]) -> bool {
        if v == colour.len() {
            return true;
        }
        for c in 1..=3 {
            if adj[v].iter().all(|&u| colour[u] != c) {
                colour[v] = c;
                if go(v + 1, colour, adj) {
                    return true;
                }
            }
        }
        colour[v] = 0;
        false
    }
    let mut adj = vec![Vec::new(); r];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    go(0, &mut vec![0; r], &adj)
}

/// Support pairs for the `G'` block. The parity column of `G'` gets four
/// disjoint recovery sets in characteristic two exactly when the pairs,
/// read as edges on the `r` columns of `A`, form a 3-colourable graph. The
/// lexicographic pairs are kept when they already are; otherwise the first
/// `k` edges of the balanced complete tripartite graph (vertex `v` in part
/// `v mod 3`) are used if there are enough of them.
fn t4_support_pairs(k: usize) -> Vec<(usize, usize)> {
    let r = weight_two_length(k);
    let lex = support_pairs(k, r);
    if three_colourable(&lex, r) {
        return lex;
    }
    let cross: Vec<(usize, usize)> =
        (0..r).flat_map(|a| (a + 1..r).map(move |b| (a, b))).filter(|(a, b)| a % 3 != b % 3).take(k).collect();
    if cross.len() == k {
        cross
    } else {
        lex
    }
}

/// `k x r` block whose rows are distinct weight-two vectors with both nonzero
/// entries equal to `value`, supported on `pairs`.
fn weight_two_block(f: &'static Field, k: usize, value: u8) -> Vec<Vec<u8>> {
    block_from_pairs(f, &support_pairs(k, weight_two_length(k)), value)
}

fn block_from_pairs(f: &'static Field, pairs: &[(usize, usize)], value: u8) -> Vec<Vec<u8>> {
    let r = weight_two_length(pairs.len());
    (0..r)
        .map(|c| pairs.iter().map(|&(a, b)| if c == a || c == b { value } else { 0 }).collect())
        .inspect(|col: &Vec<u8>| debug_assert!(col.iter().all(|&x| f.contains(x as u32))))
        .collect()
}

/// `(I_k | A)` with the rows of `A` distinct binary weight-two vectors.
pub fn t3_construction(k: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    let f = field_of_order(q)?;
    let mut cols: Vec<Vec<u8>> = (0..k).map(|i| unit(k, i)).collect();
    cols.extend(weight_two_block(f, k, 1));
    from_columns(f, k, &cols)
}

/// `(I_k | A' | 1)` where `A'` is a weight-two block with entries `-1`; the
/// last column is the parity of all others. The rows of `A'` are those of the
/// `t = 3` construction unless a different choice lets the parity column
/// serve four copies; see `t4_support_pairs`.
pub fn t4_gprime(k: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    let f = field_of_order(q)?;
    let mut cols: Vec<Vec<u8>> = (0..k).map(|i| unit(k, i)).collect();
    cols.extend(block_from_pairs(f, &t4_support_pairs(k), f.minus_one()));
    let mut parity = vec![0u8; k];
    for c in &cols {
        for (p, &x) in parity.iter_mut().zip(c) {
            *p = f.sub(*p, x);
        }
    }
    debug_assert!(parity.iter().all(|&x| x == 1));
    cols.push(parity);
    from_columns(f, k, &cols)
}

/// `G'` with a second all-one column.
pub fn t4_gdoubleprime(k: usize, q: u32) -> Result<GeneratorMatrix> {
    let g = t4_gprime(k, q)?;
    let mut cols = g.columns();
    cols.push(vec![1; k]);
    from_columns(g.field(), k, &cols)
}

/// Vandermonde generator evaluating polynomials of degree `< k` at the first
/// `n` field elements in encoding order.
pub fn mds_rs(n: usize, k: usize, q: u32) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    let f = field_of_order(q)?;
    if n > f.order() || k > n {
        return Err(Error::InvalidParameters(format!("need k <= n <= q, got n={n}, k={k}, q={q}")));
    }
    let cols: Vec<Vec<u8>> = (0..n as u8)
        .map(|x| {
            let mut col = Vec::with_capacity(k);
            let mut power = 1u8;
            for _ in 0..k {
                col.push(power);
                power = f.mul(power, x);
            }
            col
        })
        .collect();
    let g = from_columns(f, k, &cols)?;
    if n <= 12 {
        let mut all_invertible = true;
        for_each_combination(n, k, |subset| {
            all_invertible &= g.select_columns(subset).rank() == k;
        });
        assert!(all_invertible, "Vandermonde columns must be MDS");
    }
    Ok(g)
}

pub const MAX_SIMPLEX_K: usize = 5;

/// Binary simplex generator: all nonzero vectors of `GF(2)^k` in increasing
/// encoding order.
pub fn simplex(k: usize) -> Result<GeneratorMatrix> {
    positive("k", k)?;
    if k > MAX_SIMPLEX_K {
        return Err(Error::InvalidParameters(format!("simplex codes are capped at k <= {MAX_SIMPLEX_K}")));
    }
    let cols: Vec<Vec<u8>> = (1..1u64 << k).map(|c| decode_vector(c, 2, k)).collect();
    from_columns(field_of_order(2)?, k, &cols)
}

pub fn block_diagonal(g1: &GeneratorMatrix, g2: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    if g1.field() != g2.field() {
        return Err(Error::FieldMismatch);
    }
    let k = g1.k() + g2.k();
    let mut cols = Vec::with_capacity(g1.n() + g2.n());
    for c in g1.columns() {
        let mut col = c;
        col.resize(k, 0);
        cols.push(col);
    }
    for c in g2.columns() {
        let mut col = vec![0u8; g1.k()];
        col.extend(c);
        cols.push(col);
    }
    from_columns(g1.field(), k, &cols)
}

/// `lambda` copies of `g` side by side.
pub fn replicate(g: &GeneratorMatrix, lambda: usize) -> Result<GeneratorMatrix> {
    positive("lambda", lambda)?;
    let cols = g.columns();
    let all: Vec<Vec<u8>> = (0..lambda).flat_map(|_| cols.iter().cloned()).collect();
    from_columns(g.field(), g.k(), &all)
}

/// A fixed set of small named matrices from every family, used for
/// corpus-wide checks. All have `n <= 12`.
pub fn corpus() -> Result<Vec<(String, GeneratorMatrix)>> {
    let mut out: Vec<(String, GeneratorMatrix)> = Vec::new();
    for q in [2, 3] {
        for k in 1..=3 {
            out.push((format!("identity k={k} q={q}"), identity(k, q)?));
            out.push((format!("identity_parity k={k} q={q}"), identity_parity(k, q)?));
        }
        for (k, t) in [(2, 2), (2, 3), (3, 3), (2, 4)] {
            out.push((format!("lbub_upper k={k} t={t} q={q}"), lbub_upper(k, t, q)?));
        }
        for k in 2..=4 {
            out.push((format!("t3 k={k} q={q}"), t3_construction(k, q)?));
        }
    }
    for k in 2..=5 {
        out.push((format!("t4_gprime k={k} q=2"), t4_gprime(k, 2)?));
    }
    out.push(("t4_gprime k=5 q=3".into(), t4_gprime(5, 3)?));
    out.push(("t4_gdoubleprime k=3 q=2".into(), t4_gdoubleprime(3, 2)?));
    for (n, k, q) in [(7, 3, 8), (5, 2, 5), (9, 4, 9), (6, 3, 7)] {
        out.push((format!("mds_rs n={n} k={k} q={q}"), mds_rs(n, k, q)?));
    }
    for k in 2..=3 {
        out.push((format!("simplex k={k}"), simplex(k)?));
    }
    out.push(("replicate simplex k=2 x2".into(), replicate(&simplex(2)?, 2)?));
    out.push((
        "block_diagonal parity+parity".into(),
        block_diagonal(&identity_parity(1, 2)?, &identity_parity(2, 2)?)?,
    ));
    for tag in [PaperExample::Gf3_5x10, PaperExample::Gf2_4x8] {
        out.push((tag.to_string(), paper_example(tag)));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaperExample {
    /// 5x10 ternary 4-all-symbol batch code.
    Gf3_5x10,
    /// 4x8 binary 3-all-symbol batch code with a repeated column.
    Gf2_4x8,
}

impl FromStr for PaperExample {
    type Err = Error;

    fn from_str(s: &str) -> Result<PaperExample> {
        match s {
            "gf3_5x10" => Ok(PaperExample::Gf3_5x10),
            "gf2_4x8" => Ok(PaperExample::Gf2_4x8),
            other => Err(Error::UnknownTag(other.to_string())),
        }
    }
}

impl fmt::Display for PaperExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaperExample::Gf3_5x10 => "gf3_5x10",
            PaperExample::Gf2_4x8 => "gf2_4x8",
        })
    }
}

pub fn paper_example(tag: PaperExample) -> GeneratorMatrix {
    match tag {
        PaperExample::Gf3_5x10 => GeneratorMatrix::from_rows(
            field_of_order(3).expect("GF(3)"),
            &[
                [1, 0, 0, 0, 0, 0, 2, 1, 0, 1],
                [0, 1, 0, 0, 0, 1, 0, 0, 1, 2],
                [0, 0, 1, 0, 0, 1, 0, 2, 0, 2],
                [0, 0, 0, 1, 0, 2, 1, 0, 2, 0],
                [0, 0, 0, 0, 1, 0, 2, 1, 1, 0],
            ],
        ),
        PaperExample::Gf2_4x8 => GeneratorMatrix::from_rows(
            field_of_order(2).expect("GF(2)"),
            &[
                [1, 0, 0, 0, 0, 1, 1, 1],
                [0, 1, 0, 0, 1, 1, 1, 1],
                [0, 0, 1, 0, 0, 0, 1, 1],
                [0, 0, 0, 1, 1, 0, 1, 1],
            ],
        ),
    }
    .expect("hardcoded matrix has full rank")
}

/// A family member addressed by tag and parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Identity { k: usize, q: u32 },
    IdentityParity { k: usize, q: u32 },
    LbubUpper { k: usize, t: usize, q: u32 },
    T3 { k: usize, q: u32 },
    T4Gprime { k: usize, q: u32 },
    T4Gdoubleprime { k: usize, q: u32 },
    MdsRs { n: usize, k: usize, q: u32 },
    Simplex { k: usize },
    PaperExample { tag: PaperExample },
}

/// Tags accepted by [`FamilySpec::from_tag`]. `replicate` and
/// `block_diagonal` act on existing matrices and are built directly.
pub const FAMILY_TAGS: [&str; 11] = [
    "identity",
    "identity_parity",
    "replicate",
    "block_diagonal",
    "t3",
    "t4_gprime",
    "t4_gdoubleprime",
    "mds_rs",
    "simplex",
    "lbub_upper",
    "paper_example",
];

/// Loose parameter bag used to resolve a tag.
#[derive(Clone, Debug, Default)]
pub struct FamilyParams {
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub q: Option<u32>,
    pub n: Option<usize>,
    pub example: Option<String>,
}

impl FamilySpec {
    pub fn from_tag(tag: &str, p: &FamilyParams) -> Result<FamilySpec> {
        let need_k = || p.k.ok_or_else(|| Error::InvalidParameters(format!("{tag} needs k")));
        let need_t = || p.t.ok_or_else(|| Error::InvalidParameters(format!("{tag} needs t")));
        let need_n = || p.n.ok_or_else(|| Error::InvalidParameters(format!("{tag} needs n")));
        let q = p.q.unwrap_or(2);
        Ok(match tag {
            "identity" => FamilySpec::Identity { k: need_k()?, q },
            "identity_parity" => FamilySpec::IdentityParity { k: need_k()?, q },
            "lbub_upper" => FamilySpec::LbubUpper { k: need_k()?, t: need_t()?, q },
            "t3" => FamilySpec::T3 { k: need_k()?, q },
            "t4_gprime" => FamilySpec::T4Gprime { k: need_k()?, q },
            "t4_gdoubleprime" => FamilySpec::T4Gdoubleprime { k: need_k()?, q },
            "mds_rs" => FamilySpec::MdsRs { n: need_n()?, k: need_k()?, q },
            "simplex" => {
                if p.q.is_some_and(|q| q != 2) {
                    return Err(Error::InvalidParameters("simplex codes are binary".into()));
                }
                FamilySpec::Simplex { k: need_k()? }
            }
            "paper_example" => {
                let name = p
                    .example
                    .as_deref()
                    .ok_or_else(|| Error::InvalidParameters("paper_example needs a tag".into()))?;
                FamilySpec::PaperExample { tag: name.parse()? }
            }
            "replicate" | "block_diagonal" => {
                return Err(Error::InvalidParameters(format!("{tag} is built from existing matrices")))
            }
            other => return Err(Error::UnknownTag(other.to_string())),
        })
    }

    pub fn build(&self) -> Result<GeneratorMatrix> {
        match *self {
            FamilySpec::Identity { k, q } => identity(k, q),
            FamilySpec::IdentityParity { k, q } => identity_parity(k, q),
            FamilySpec::LbubUpper { k, t, q } => lbub_upper(k, t, q),
            FamilySpec::T3 { k, q } => t3_construction(k, q),
            FamilySpec::T4Gprime { k, q } => t4_gprime(k, q),
            FamilySpec::T4Gdoubleprime { k, q } => t4_gdoubleprime(k, q),
            FamilySpec::MdsRs { n, k, q } => mds_rs(n, k, q),
            FamilySpec::Simplex { k } => simplex(k),
            FamilySpec::PaperExample { tag } => Ok(paper_example(tag)),
        }
    }

    /// Short human-readable label, used as the comment line of matrix files.
    pub fn label(&self) -> String {
        match self {
            FamilySpec::Identity { k, q } => format!("identity k={k} q={q}"),
            FamilySpec::IdentityParity { k, q } => format!("identity_parity k={k} q={q}"),
            FamilySpec::LbubUpper { k, t, q } => format!("lbub_upper k={k} t={t} q={q}"),
            FamilySpec::T3 { k, q } => format!("t3 k={k} q={q}"),
            FamilySpec::T4Gprime { k, q } => format!("t4_gprime k={k} q={q}"),
            FamilySpec::T4Gdoubleprime { k, q } => format!("t4_gdoubleprime k={k} q={q}"),
            FamilySpec::MdsRs { n, k, q } => format!("mds_rs n={n} k={k} q={q}"),
            FamilySpec::Simplex { k } => format!("simplex k={k}"),
            FamilySpec::PaperExample { tag } => format!("paper_example {tag}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(g: &GeneratorMatrix) -> Vec<Vec<u8>> {
        g.matrix().row_vecs()
    }

    #[test]
    fn identity_parity_examples() {
        assert_eq!(rows(&identity_parity(2, 2).unwrap()), vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(rows(&identity_parity(1, 3).unwrap()), vec![vec![1, 2]]);
        assert_eq!(identity_parity(3, 2).unwrap().n(), 4);
    }

    #[test]
    fn lbub_upper_examples() {
        let g = lbub_upper(2, 2, 2).unwrap();
        assert_eq!(g, identity_parity(2, 2).unwrap());
        assert_eq!(rows(&lbub_upper(1, 4, 3).unwrap()), vec![vec![1, 1, 1, 1]]);
        assert_eq!(lbub_upper(3, 3, 2).unwrap().n(), 7);
    }

    #[test]
    fn weight_two_length_scan() {
        for k in 1..200 {
            let r = weight_two_length(k);
            assert!((r - 1) * (r - 2) / 2 < k && k <= r * (r - 1) / 2);
        }
        assert_eq!(weight_two_length(1), 2);
        assert_eq!(weight_two_length(3), 3);
        assert_eq!(weight_two_length(4), 4);
        assert_eq!(weight_two_length(6), 4);
        assert_eq!(weight_two_length(7), 5);
    }

    #[test]
    fn t3_examples() {
        assert_eq!(t3_construction(3, 2).unwrap().n(), 6);
        assert_eq!(t3_construction(6, 2).unwrap().n(), 10);
        let g = t3_construction(1, 3).unwrap();
        assert_eq!(rows(&g), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn t4_examples_match_displayed_matrices() {
        let g = t4_gprime(5, 2).unwrap();
        let expected: Vec<Vec<u8>> = vec![
            vec![1, 0, 0, 0, 0, 1, 1, 0, 0, 1],
            vec![0, 1, 0, 0, 0, 1, 0, 1, 0, 1],
            vec![0, 0, 1, 0, 0, 1, 0, 0, 1, 1],
            vec![0, 0, 0, 1, 0, 0, 1, 1, 0, 1],
            vec![0, 0, 0, 0, 1, 0, 1, 0, 1, 1],
        ];
        assert_eq!(rows(&g), expected);

        let g = t4_gdoubleprime(6, 2).unwrap();
        let expected: Vec<Vec<u8>> = vec![
            vec![1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1],
            vec![0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 1, 1],
            vec![0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1],
            vec![0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1],
        ];
        assert_eq!(rows(&g), expected);

        let g = t4_gprime(5, 3).unwrap();
        assert_eq!(g.matrix().row(0), &[1, 0, 0, 0, 0, 2, 2, 0, 0, 1]);
        // columns sum to zero
        let f = g.field();
        for r in 0..5 {
            assert_eq!(g.matrix().row(r).iter().fold(0, |a, &x| f.add(a, x)), 0);
        }
    }

    #[test]
    fn t4_pairs_allow_three_classes_when_possible() {
        for k in 1..=20usize {
            let r = weight_two_length(k);
            let pairs = t4_support_pairs(k);
            assert_eq!(pairs.len(), k);
            let mut sorted = pairs.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), k);
            let members = [1, 2, 3, 4, 5, 7, 8, 11, 12, 16];
            assert_eq!(three_colourable(&pairs, r), members.contains(&k), "k={k}");
        }
        assert_eq!(t4_support_pairs(8), vec![(0, 1), (0, 2), (0, 4), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(t4_support_pairs(6), support_pairs(6, 4));
    }

    #[test]
    fn mds_examples() {
        let g = mds_rs(8, 8, 8).unwrap();
        assert_eq!(g.matrix().rank(), 8);
        let g = mds_rs(7, 3, 8).unwrap();
        assert_eq!(g.min_distance().unwrap(), 5);
        assert!(mds_rs(9, 3, 8).is_err());
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(rows(&simplex(2).unwrap()), vec![vec![1, 0, 1], vec![0, 1, 1]]);
        let g = simplex(3).unwrap();
        assert_eq!(g.n(), 7);
        assert_eq!(g.dual_min_distance().unwrap(), Some(3));
        assert!(simplex(6).is_err());
    }

    #[test]
    fn corpus_is_small() {
        let c = corpus().unwrap();
        assert!(c.len() > 30);
        assert!(c.iter().all(|(_, g)| g.n() <= 12));
    }

    #[test]
    fn compositions() {
        let g = identity_parity(2, 2).unwrap();
        assert_eq!(replicate(&g, 1).unwrap(), g);
        assert_eq!(replicate(&g, 3).unwrap().n(), 9);
        let b = block_diagonal(&g, &identity(1, 2).unwrap()).unwrap();
        assert_eq!(rows(&b), vec![vec![1, 0, 1, 0], vec![0, 1, 1, 0], vec![0, 0, 0, 1]]);
        assert!(block_diagonal(&g, &identity(1, 3).unwrap()).is_err());
    }

    #[test]
    fn family_tags() {
        let p = FamilyParams { k: Some(5), q: Some(2), ..Default::default() };
        let spec = FamilySpec::from_tag("t4_gprime", &p).unwrap();
        assert_eq!(spec.build().unwrap(), t4_gprime(5, 2).unwrap());
        assert!(FamilySpec::from_tag("bogus", &p).is_err());
        assert!(FamilySpec::from_tag("mds_rs", &p).is_err());
        let p = FamilyParams { example: Some("gf2_4x8".into()), ..Default::default() };
        assert_eq!(FamilySpec::from_tag("paper_example", &p).unwrap().build().unwrap().n(), 8);
    }
}
