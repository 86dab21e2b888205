//! Recovery sets and the exact serve decision.
//!
//! A recovery set for a target `v` is a set `R` of column indices with
//! `v` in the span of the columns in `R`. Only inclusion-minimal recovery sets
//! are ever enumerated: every recovery set contains a minimal one, and
//! shrinking a set never breaks pairwise disjointness, so a request is
//! servable exactly when it is servable with minimal sets.
//!
//! Minimal recovery sets correspond to minimal linear relations: appending
//! `-v` as an extra column, `R` is minimal iff `R + {extra}` is the support of
//! a minimal codeword of the relation space through the extra coordinate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, ensure_within_cap, minimal_supports, set_order, GeneratorMatrix, IndexSet, Matrix,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestItem {
    pub target: Vec<u8>,
    pub multiplicity: usize,
}

/// A multiset of target vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    items: Vec<RequestItem>,
}

impl Request {
    /// Builds a request; repeated targets are merged, keeping first-occurrence
    /// order.
    pub fn new(items: Vec<(Vec<u8>, usize)>) -> Result<Request> {
        let mut merged: Vec<RequestItem> = Vec::new();
        let dim = items.first().map(|(v, _)| v.len());
        for (target, multiplicity) in items {
            if multiplicity == 0 {
                return Err(Error::InvalidRequest("multiplicity must be positive".into()));
            }
            if Some(target.len()) != dim {
                return Err(Error::InvalidRequest("targets have different lengths".into()));
            }
            match merged.iter_mut().find(|it| it.target == target) {
                Some(it) => it.multiplicity += multiplicity,
                None => merged.push(RequestItem { target, multiplicity }),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidRequest("empty request".into()));
        }
        Ok(Request { items: merged })
    }

    pub fn from_units(units: Vec<Vec<u8>>) -> Result<Request> {
        Request::new(units.into_iter().map(|u| (u, 1)).collect())
    }

    pub fn single(target: Vec<u8>, multiplicity: usize) -> Result<Request> {
        Request::new(vec![(target, multiplicity)])
    }

    pub fn items(&self) -> &[RequestItem] {
        &self.items
    }

    pub fn t(&self) -> usize {
        self.items.iter().map(|it| it.multiplicity).sum()
    }

    pub fn dimension(&self) -> usize {
        self.items[0].target.len()
    }

    /// Targets with multiplicity, in item order.
    pub fn units(&self) -> Vec<&[u8]> {
        self.items
            .iter()
            .flat_map(|it| std::iter::repeat_n(it.target.as_slice(), it.multiplicity))
            .collect()
    }

    /// Returns a copy with one unit of `target` removed, or `None` when that
    /// would leave the request empty or the target is absent.
    pub fn without_unit(&self, target: &[u8]) -> Option<Request> {
        let mut items = self.items.clone();
        let pos = items.iter().position(|it| it.target == target)?;
        items[pos].multiplicity -= 1;
        if items[pos].multiplicity == 0 {
            items.remove(pos);
        }
        if items.is_empty() {
            None
        } else {
            Some(Request { items })
        }
    }

    fn validate_for(&self, g: &GeneratorMatrix) -> Result<()> {
        if self.dimension() != g.k() {
            return Err(Error::InvalidRequest(format!(
                "targets have length {}, matrix has {} rows",
                self.dimension(),
                g.k()
            )));
        }
        let f = g.field();
        for it in &self.items {
            if let Some(&bad) = it.target.iter().find(|&&x| !f.contains(x as u32)) {
                return Err(Error::InvalidElement { value: bad as u32, q: f.order() });
            }
        }
        Ok(())
    }
}

/// A recovery set with the coefficients expressing the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoverySet {
    pub indices: IndexSet,
    /// Aligned with `indices.iter()`.
    pub coefficients: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub target: Vec<u8>,
    /// Zero-based column indices, increasing.
    pub indices: Vec<usize>,
    /// `coefficients[j]` multiplies column `indices[j]`.
    pub coefficients: Vec<u8>,
}

/// One disjoint recovery set per requested unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryPlan {
    pub assignments: Vec<Assignment>,
}

/// Minimal supports through the last coordinate of the relation space of
/// `ext`, with that coordinate removed. Falls back to a subset scan over the
/// first `ext.cols() - 1` columns when the relation space is too large.
fn minimal_sets_with_extra_column(ext: &Matrix, max_size: usize, cap: u128) -> Result<Vec<u64>> {
    let m = ext.cols() - 1;
    let relations = ext.null_space();
    let last = 1u64 << m;
    if ensure_within_cap(ext.field().order(), relations.rows(), cap).is_ok() {
        let through: Vec<u64> = linalg::codeword_supports(&relations)
            .into_iter()
            .filter(|&s| s & last != 0 && (s.count_ones() as usize) <= max_size + 1)
            .collect();
        // Among supports through the extra coordinate, minimality within that
        // subfamily equals minimality in the whole relation space: a smaller
        // relation avoiding the coordinate could be subtracted to produce a
        // smaller one through it.
        return Ok(minimal_supports(through).into_iter().map(|s| s & !last).collect());
    }
    subset_scan(ext, max_size, cap)
}

/// Size-increasing scan over subsets of the first `m` columns of `ext`,
/// keeping those whose span contains the last column and which contain no
/// earlier hit.
fn subset_scan(ext: &Matrix, max_size: usize, cap: u128) -> Result<Vec<u64>> {
    let m = ext.cols() - 1;
    let mut total: u128 = 0;
    for s in 1..=max_size.min(m) {
        total = total.saturating_add(binomial(m as u64, s as u64));
    }
    if total > cap {
        return Err(Error::CapExceeded { size: total, cap });
    }
    let target = ext.column(m);
    let mut found: Vec<u64> = Vec::new();
    for s in 1..=max_size.min(m) {
        for_each_combination(m, s, |combo| {
            let mask = combo.iter().fold(0u64, |acc, &i| acc | 1 << i);
            if found.iter().any(|&f| f & !mask == 0) {
                return;
            }
            if ext.solve_combination(combo, &target).is_some() {
                found.push(mask);
            }
        });
    }
    found.sort_by(|&a, &b| set_order(a, b));
    Ok(found)
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `visit` with every `s`-subset of `0..m` as an increasing index list,
/// in lexicographic order.
pub(crate) fn for_each_combination(m: usize, s: usize, mut visit: impl FnMut(&[usize])) {
    if s > m {
        return;
    }
    let mut combo: Vec<usize> = (0..s).collect();
    loop {
        visit(&combo);
        let Some(pos) = (0..s).rev().find(|&i| combo[i] < m - s + i) else {
            return;
        };
        combo[pos] += 1;
        for j in pos + 1..s {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

fn ensure_available(g: &GeneratorMatrix, available: IndexSet) -> Result<()> {
    if let Some(i) = available.iter().find(|&i| i >= g.n()) {
        return Err(Error::IndexOutOfRange { index: i, len: g.n() });
    }
    Ok(())
}

/// Minimal recovery sets for `v` as bit masks, ordered by size then
/// lexicographically.
pub fn minimal_recovery_masks(
    g: &GeneratorMatrix,
    v: &[u8],
    available: IndexSet,
    max_size: usize,
) -> Result<Vec<u64>> {
    ensure_available(g, available)?;
    if v.len() != g.k() {
        return Err(Error::Dimension(format!("target of length {} for k = {}", v.len(), g.k())));
    }
    if v.iter().all(|&x| x == 0) {
        return Ok(vec![0]);
    }
    let cols = available.to_vec();
    if cols.len() + 1 > linalg::MAX_COLUMNS {
        return Err(Error::TooManyColumns { max: linalg::MAX_COLUMNS - 1 });
    }
    let f = g.field();
    let neg: Vec<u8> = v.iter().map(|&x| f.neg(x)).collect();
    let minus_v = Matrix::from_columns(f, g.k(), &[neg])?;
    let ext = g.select_columns(&cols).hconcat(&minus_v)?;
    let local = minimal_sets_with_extra_column(&ext, max_size, DEFAULT_ENUMERATION_CAP)?;
    let mut out: Vec<u64> = local
        .into_iter()
        .map(|s| IndexSet(s).iter().fold(0u64, |acc, j| acc | 1 << cols[j]))
        .collect();
    out.sort_by(|&a, &b| set_order(a, b));
    Ok(out)
}

/// All inclusion-minimal recovery sets for `v` inside `available` with at most
/// `max_size` elements, each with its (unique) coefficient vector.
pub fn minimal_recovery_sets(
    g: &GeneratorMatrix,
    v: &[u8],
    available: IndexSet,
    max_size: usize,
) -> Result<Vec<RecoverySet>> {
    minimal_recovery_masks(g, v, available, max_size)?
        .into_iter()
        .map(|mask| {
            let idx = IndexSet(mask).to_vec();
            let coefficients = g
                .matrix()
                .solve_combination(&idx, v)
                .ok_or_else(|| Error::Dimension("recovery set does not span the target".into()))?;
            Ok(RecoverySet { indices: IndexSet(mask), coefficients })
        })
        .collect()
}

/// Minimal recovery sets for every column value, from one pass over the dual
/// code: the family of column `i` is `{i}` together with `S - {i}` for every
/// minimal dual support `S` containing `i`.
pub fn column_families(g: &GeneratorMatrix, max_size: usize) -> Result<Vec<Vec<u64>>> {
    let dual = g.dual_basis();
    let supports = if dual.rows() == 0 {
        Vec::new()
    } else {
        ensure_within_cap(g.field().order(), dual.rows(), DEFAULT_ENUMERATION_CAP)?;
        minimal_supports(linalg::codeword_supports(&dual))
    };
    Ok(families_from_dual_supports(g.n(), &supports, max_size))
}

pub(crate) fn families_from_dual_supports(n: usize, supports: &[u64], max_size: usize) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| {
            let bit = 1u64 << i;
            let mut fam = vec![bit];
            fam.extend(
                supports
                    .iter()
                    .filter(|&&s| s & bit != 0 && s.count_ones() as usize <= max_size + 1)
                    .map(|&s| s & !bit),
            );
            fam.retain(|s| s.count_ones() as usize <= max_size);
            fam.sort_by(|&a, &b| set_order(a, b));
            fam
        })
        .collect()
}

/// Backtracking packer: chooses `demands[g]` pairwise disjoint sets from
/// `families[g]` for every group, all groups mutually disjoint.
///
/// Families must be sorted smallest first. Within one group the chosen set
/// positions increase, which removes the symmetric orderings of identical
/// units. At every node the group with the fewest usable sets is expanded,
/// and a node is cut when the cheapest completion needs more columns than are
/// left.
pub struct Packer {
    n_columns: u32,
    next: Vec<usize>,
    remaining: Vec<usize>,
    chosen: Vec<Vec<usize>>,
}

impl Packer {
    pub fn new(n_columns: usize) -> Packer {
        Packer { n_columns: n_columns as u32, next: Vec::new(), remaining: Vec::new(), chosen: Vec::new() }
    }

    /// Returns the chosen positions into each family, or `None`.
    pub fn pack(&mut self, families: &[&[u64]], demands: &[usize]) -> Option<Vec<Vec<usize>>> {
        self.next.clear();
        self.next.resize(families.len(), 0);
        self.remaining.clear();
        self.remaining.extend_from_slice(demands);
        self.chosen.clear();
        self.chosen.resize(families.len(), Vec::new());
        let total: usize = demands.iter().sum();
        if self.search(families, 0, total) {
            Some(std::mem::take(&mut self.chosen))
        } else {
            None
        }
    }

    pub fn feasible(&mut self, families: &[&[u64]], demands: &[usize]) -> bool {
        self.pack(families, demands).is_some()
    }

    fn search(&mut self, families: &[&[u64]], used: u64, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        let free = self.n_columns - used.count_ones();
        let mut best: Option<(usize, usize)> = None;
        let mut needed: u32 = 0;
        for (gi, fam) in families.iter().enumerate() {
            let want = self.remaining[gi];
            if want == 0 {
                continue;
            }
            let mut count = 0usize;
            for &s in &fam[self.next[gi]..] {
                if s & used == 0 {
                    if count < want {
                        needed += s.count_ones();
                    }
                    count += 1;
                }
            }
            if count < want {
                return false;
            }
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((gi, count));
            }
        }
        if needed > free {
            return false;
        }
        let (gi, _) = best.expect("some group has demand");
        let fam = families[gi];
        let start = self.next[gi];
        for pos in start..fam.len() {
            let s = fam[pos];
            if s & used != 0 {
                continue;
            }
            self.next[gi] = pos + 1;
            self.remaining[gi] -= 1;
            self.chosen[gi].push(pos);
            if self.search(families, used | s, left - 1) {
                return true;
            }
            self.chosen[gi].pop();
            self.remaining[gi] += 1;
        }
        self.next[gi] = start;
        false
    }
}

/// Decides servability for one matrix, memoizing recovery-set families per
/// target value.
pub struct Server<'g> {
    g: &'g GeneratorMatrix,
    max_size: usize,
    families: HashMap<Vec<u8>, Vec<u64>>,
}

impl<'g> Server<'g> {
    /// Unbounded recovery-set size.
    pub fn new(g: &'g GeneratorMatrix) -> Server<'g> {
        Server::bounded(g, g.n())
    }

    /// Only recovery sets with at most `max_size` columns are used.
    pub fn bounded(g: &'g GeneratorMatrix, max_size: usize) -> Server<'g> {
        Server { g, max_size, families: HashMap::new() }
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        self.g
    }

    /// Precomputes families for all column values from the dual code.
    pub fn prepare_columns(&mut self) -> Result<()> {
        let fams = column_families(self.g, self.max_size)?;
        for (i, fam) in fams.into_iter().enumerate() {
            self.families.entry(self.g.column(i)).or_insert(fam);
        }
        Ok(())
    }

    /// Precomputes families for the given targets.
    pub fn prepare<'a, I: IntoIterator<Item = &'a [u8]>>(&mut self, targets: I) -> Result<()> {
        for t in targets {
            if !self.families.contains_key(t) {
                let fam = minimal_recovery_masks(self.g, t, IndexSet::full(self.g.n()), self.max_size)?;
                self.families.insert(t.to_vec(), fam);
            }
        }
        Ok(())
    }

    /// Recovery-set family for a target, computing it when not prepared.
    pub fn family(&self, target: &[u8]) -> Result<std::borrow::Cow<'_, [u64]>> {
        match self.families.get(target) {
            Some(f) => Ok(std::borrow::Cow::Borrowed(f.as_slice())),
            None => Ok(std::borrow::Cow::Owned(minimal_recovery_masks(
                self.g,
                target,
                IndexSet::full(self.g.n()),
                self.max_size,
            )?)),
        }
    }

    /// A recovery plan, or `None` when the request cannot be served.
    pub fn serve(&self, req: &Request) -> Result<Option<RecoveryPlan>> {
        req.validate_for(self.g)?;
        let nonzero: Vec<&RequestItem> =
            req.items().iter().filter(|it| it.target.iter().any(|&x| x != 0)).collect();
        let fams = nonzero.iter().map(|it| self.family(&it.target)).collect::<Result<Vec<_>>>()?;
        let fam_refs: Vec<&[u64]> = fams.iter().map(|f| f.as_ref()).collect();
        let demands: Vec<usize> = nonzero.iter().map(|it| it.multiplicity).collect();
        let Some(chosen) = Packer::new(self.g.n()).pack(&fam_refs, &demands) else {
            return Ok(None);
        };
        let mut per_target: HashMap<&[u8], Vec<u64>> = HashMap::new();
        for (gi, positions) in chosen.iter().enumerate() {
            per_target.insert(&nonzero[gi].target, positions.iter().map(|&p| fam_refs[gi][p]).collect());
        }
        let mut assignments = Vec::with_capacity(req.t());
        for it in req.items() {
            for u in 0..it.multiplicity {
                let mask = per_target.get(it.target.as_slice()).map_or(0, |sets| sets[u]);
                let indices = IndexSet(mask).to_vec();
                let coefficients = if indices.is_empty() {
                    Vec::new()
                } else {
                    self.g
                        .matrix()
                        .solve_combination(&indices, &it.target)
                        .expect("recovery set spans its target")
                };
                assignments.push(Assignment { target: it.target.clone(), indices, coefficients });
            }
        }
        Ok(Some(RecoveryPlan { assignments }))
    }

    pub fn can_serve(&self, req: &Request) -> Result<bool> {
        req.validate_for(self.g)?;
        let nonzero: Vec<&RequestItem> =
            req.items().iter().filter(|it| it.target.iter().any(|&x| x != 0)).collect();
        let fams = nonzero.iter().map(|it| self.family(&it.target)).collect::<Result<Vec<_>>>()?;
        let fam_refs: Vec<&[u64]> = fams.iter().map(|f| f.as_ref()).collect();
        let demands: Vec<usize> = nonzero.iter().map(|it| it.multiplicity).collect();
        Ok(Packer::new(self.g.n()).feasible(&fam_refs, &demands))
    }

    /// Largest `t` such that `t` copies of `target` can be served.
    pub fn max_copies(&self, target: &[u8]) -> Result<usize> {
        if target.iter().all(|&x| x == 0) {
            return Err(Error::InvalidRequest("the zero target can be served any number of times".into()));
        }
        let fam = self.family(target)?;
        let mut packer = Packer::new(self.g.n());
        let mut t = 0;
        while t < self.g.n() && packer.feasible(&[fam.as_ref()], &[t + 1]) {
            t += 1;
        }
        Ok(t)
    }
}

/// Exact serve decision with unbounded recovery-set size.
pub fn serve(g: &GeneratorMatrix, req: &Request) -> Result<Option<RecoveryPlan>> {
    Server::new(g).serve(req)
}

/// Serve decision using only recovery sets of size at most `max_size`.
pub fn serve_bounded(g: &GeneratorMatrix, req: &Request, max_size: usize) -> Result<Option<RecoveryPlan>> {
    Server::bounded(g, max_size).serve(req)
}

/// Independent plan checker: disjointness, nonzero coefficients, exact
/// combinations, and the multiset of targets equal to the request.
pub fn verify_plan(g: &GeneratorMatrix, req: &Request, plan: &RecoveryPlan) -> bool {
    let f = g.field();
    let mut used = vec![false; g.n()];
    for a in &plan.assignments {
        if a.target.len() != g.k() || a.indices.len() != a.coefficients.len() {
            return false;
        }
        let mut acc = vec![0u8; g.k()];
        for (&j, &c) in a.indices.iter().zip(&a.coefficients) {
            if j >= g.n() || used[j] || c == 0 || !f.contains(c as u32) {
                return false;
            }
            used[j] = true;
            for (r, slot) in acc.iter_mut().enumerate() {
                *slot = f.add(*slot, f.mul(c, g.matrix().get(r, j)));
            }
        }
        if acc != a.target {
            return false;
        }
    }
    let mut requested: Vec<&[u8]> = req.units();
    let mut planned: Vec<&[u8]> = plan.assignments.iter().map(|a| a.target.as_slice()).collect();
    requested.sort();
    planned.sort();
    requested == planned
}
