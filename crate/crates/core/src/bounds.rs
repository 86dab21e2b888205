//! Closed-form length bounds, known reference values, and code-level upper
//! bounds on `t` derived from the dual code.
//!
//! All arithmetic is exact: ceilings use integer division and code-level
//! bounds are rationals.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::weight_two_length;
use crate::error::{Error, Result};
use crate::linalg::{min_weight, shorten_space, GeneratorMatrix, IndexSet, DEFAULT_ENUMERATION_CAP};
use crate::properties::PropertyKind;
use crate::recovery::for_each_combination;

/// Largest length for which the shortened-dual bound enumerates all subsets.
pub const SHORTENED_BOUND_MAX_N: usize = 12;

/// Dimensions `k` for which the parity column of `G'` has four disjoint
/// recovery sets in characteristic two.
pub const T4_EXACT_DIMENSIONS: [usize; 10] = [1, 2, 3, 4, 5, 7, 8, 11, 12, 16];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEntry {
    /// Minimal-length quantities the entry applies to.
    pub quantities: Vec<PropertyKind>,
    pub name: String,
    pub kind: BoundKind,
    pub value: u64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    fn push(&mut self, quantities: &[PropertyKind], name: &str, kind: BoundKind, value: u64, note: &str) {
        self.entries.push(BoundEntry {
            quantities: quantities.to_vec(),
            name: name.to_string(),
            kind,
            value,
            note: note.to_string(),
        });
    }

    fn values(&self, quantity: PropertyKind, kind: BoundKind) -> impl Iterator<Item = u64> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.kind == kind && e.quantities.contains(&quantity))
            .map(|e| e.value)
    }

    /// Best lower bound for `quantity`, counting exact values as bounds.
    pub fn lower(&self, quantity: PropertyKind) -> Option<u64> {
        self.values(quantity, BoundKind::Lower).chain(self.values(quantity, BoundKind::Exact)).max()
    }

    /// Best lower bound for `quantity` from `Lower` entries only.
    pub fn strict_lower(&self, quantity: PropertyKind) -> Option<u64> {
        self.values(quantity, BoundKind::Lower).max()
    }

    pub fn upper(&self, quantity: PropertyKind) -> Option<u64> {
        self.values(quantity, BoundKind::Upper).chain(self.values(quantity, BoundKind::Exact)).min()
    }

    pub fn exact(&self, quantity: PropertyKind) -> Option<u64> {
        self.values(quantity, BoundKind::Exact).next()
    }

    /// Every lower value is at most every exact value, which is at most every
    /// upper value, and all exact values agree.
    pub fn is_consistent(&self) -> bool {
        PropertyKind::ALL.iter().all(|&qty| {
            let lows: Vec<u64> = self.values(qty, BoundKind::Lower).collect();
            let ups: Vec<u64> = self.values(qty, BoundKind::Upper).collect();
            let exacts: Vec<u64> = self.values(qty, BoundKind::Exact).collect();
            let lo = lows.iter().chain(&exacts).max();
            let hi = ups.iter().chain(&exacts).min();
            let exacts_agree = exacts.windows(2).all(|w| w[0] == w[1]);
            exacts_agree && lo.zip(hi).is_none_or(|(l, h)| l <= h)
        })
    }
}

const AS: [PropertyKind; 2] = [PropertyKind::Aspir, PropertyKind::Asbatch];

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

fn is_power_of_two(q: u32) -> bool {
    q.is_power_of_two() && q >= 2
}

/// Bounds and exact values for the all-symbol minimal lengths.
pub fn length_bounds(k: usize, t: usize, q: u32) -> Result<BoundReport> {
    if k == 0 || t == 0 {
        return Err(Error::InvalidParameters("k and t must be at least 1".into()));
    }
    let (k64, t64) = (k as u64, t as u64);
    let r = weight_two_length(k) as u64;
    let mut rep = BoundReport { k, t, q, entries: Vec::new() };

    rep.push(&AS, "singleton", BoundKind::Lower, t64 + k64 - 1, "minimum distance is at least t");
    if k >= 2 {
        rep.push(
            &AS,
            "column multiplicity",
            BoundKind::Lower,
            ceil_div(2 * (k64 + 1) * t64, k64 + 2),
            "ceil(2(k+1)t/(k+2)); needs at least k+1 distinct columns, so k >= 2",
        );
    }
    let construction = k64 * t64.div_ceil(2) + t64 / 2;
    if t % 2 == 0 {
        rep.push(&AS, "replicated identity plus ones", BoundKind::Upper, ceil_div((k64 + 1) * t64, 2), "ceil((k+1)t/2)");
    } else {
        rep.push(
            &AS,
            "replicated identity plus ones",
            BoundKind::Upper,
            construction,
            "k*ceil(t/2) + floor(t/2), the length of the construction for odd t",
        );
    }

    if k == 1 {
        rep.push(&AS, "k = 1", BoundKind::Exact, t64, "t disjoint nonempty sets");
    }
    if t == 1 {
        rep.push(&AS, "t = 1", BoundKind::Exact, k64, "rank k");
    }
    if t == 2 {
        rep.push(&AS, "t = 2", BoundKind::Exact, k64 + 1, "identity with a parity column");
    }
    if k == 2 {
        rep.push(&AS, "k = 2", BoundKind::Exact, t64 + t64.div_ceil(2), "t + ceil(t/2)");
    }
    if t == 3 {
        rep.push(&AS, "t = 3", BoundKind::Exact, k64 + r, "k + r, r least with C(r,2) >= k");
    }
    if t == 4 {
        rep.push(&AS, "t = 4 lower", BoundKind::Lower, k64 + 1 + r, "k + 1 + r");
        rep.push(&AS, "t = 4 upper", BoundKind::Upper, k64 + 2 + r, "k + 2 + r, two parity columns");
        if is_power_of_two(q) && T4_EXACT_DIMENSIONS.contains(&k) {
            rep.push(&AS, "t = 4, even q", BoundKind::Exact, k64 + 1 + r, "one parity column suffices");
        }
        if (k, q) == (6, 2) {
            rep.push(&AS, "t = 4, k = 6, q = 2", BoundKind::Exact, 12, "computer search");
        }
    }
    Ok(rep)
}

/// Known values for the classical quantities P, B, FP, FB.
pub fn reference_lengths(k: usize, t: usize, q: u32) -> Result<BoundReport> {
    use PropertyKind::*;
    if k == 0 || t == 0 {
        return Err(Error::InvalidParameters("k and t must be at least 1".into()));
    }
    let (k64, t64) = (k as u64, t as u64);
    let r = weight_two_length(k) as u64;
    let mut rep = BoundReport { k, t, q, entries: Vec::new() };
    rep.push(&[Pir, Batch], "singleton", BoundKind::Lower, t64 + k64 - 1, "minimum distance is at least t");
    if t == 3 {
        rep.push(&[Pir, Batch], "t = 3", BoundKind::Exact, k64 + r, "k + r");
    }
    if t == 4 {
        rep.push(&[Pir, Batch], "t = 4", BoundKind::Exact, k64 + r + 1, "P(k,3,q) + 1");
    }
    if k == 2 && q == 2 {
        rep.push(&[Pir, Batch, Fpir, Fbatch], "k = 2, q = 2", BoundKind::Exact, t64 + t64.div_ceil(2), "t + ceil(t/2)");
    }
    if t == 3 && q == 2 && k >= 4 {
        let m = k64 / 2;
        if k % 2 == 0 {
            rep.push(&[Fpir], "functional PIR, t = 3, even k", BoundKind::Exact, 3 * m + 2, "3m + 2 for k = 2m");
        } else {
            rep.push(&[Fpir], "functional PIR, t = 3, odd k", BoundKind::Lower, 3 * m + 3, "3m + 3 for k = 2m + 1");
            rep.push(&[Fpir], "functional PIR, t = 3, odd k", BoundKind::Upper, 3 * m + 4, "3m + 4 for k = 2m + 1");
        }
    }
    Ok(rep)
}

/// Lower bound on the length usable to start a search for `kind`.
pub fn search_lower_bound(k: usize, t: usize, q: u32, kind: PropertyKind) -> Result<u64> {
    let lengths = length_bounds(k, t, q)?;
    let reference = reference_lengths(k, t, q)?;
    Ok(match kind {
        // functional quantities dominate the all-symbol ones
        PropertyKind::Aspir | PropertyKind::Fpir => lengths.strict_lower(PropertyKind::Aspir),
        PropertyKind::Asbatch | PropertyKind::Fbatch => lengths.strict_lower(PropertyKind::Asbatch),
        PropertyKind::Pir | PropertyKind::Batch => reference.strict_lower(kind),
    }
    .unwrap_or(k as u64)
    .max(k as u64))
}

/// `t <= (n-1)/(d_dual-1) + 1` for all-symbol PIR codes. A zero dual code
/// gives 1.
pub fn dual_distance_bound(g: &GeneratorMatrix) -> Result<Ratio<u64>> {
    match g.dual_min_distance()? {
        None => Ok(Ratio::from_integer(1)),
        Some(1) => Err(Error::InvalidParameters("dual distance is 1 (zero column present)".into())),
        Some(d) => Ok(Ratio::new(g.n() as u64 - 1, d as u64 - 1) + 1),
    }
}

/// `n >= ceil(2 gamma t / (gamma + 1))` for a `t`-all-symbol PIR code with
/// `gamma` distinct nonzero columns.
pub fn gamma_length_bound(gamma: usize, t: usize) -> u64 {
    ceil_div(2 * gamma as u64 * t as u64, gamma as u64 + 1)
}

pub fn distinct_nonzero_columns(g: &GeneratorMatrix) -> usize {
    let mut cols: Vec<Vec<u8>> = g.columns().into_iter().filter(|c| c.iter().any(|&x| x != 0)).collect();
    cols.sort();
    cols.dedup();
    cols.len()
}

/// `(n-s)/(max_S d(dual(S)) - 1) + s` over all `S` with `|S| = n-s+1`, where a
/// zero shortened code has infinite distance and contributes `s`.
pub fn shortened_dual_bound(g: &GeneratorMatrix, s: usize) -> Result<Ratio<u64>> {
    let n = g.n();
    if n > SHORTENED_BOUND_MAX_N {
        return Err(Error::InvalidParameters(format!("shortened bound needs n <= {SHORTENED_BOUND_MAX_N}")));
    }
    if s == 0 || s >= n {
        return Err(Error::InvalidParameters(format!("s must lie in 1..={}", n.saturating_sub(1))));
    }
    if g.dual_min_distance()? == Some(1) {
        return Err(Error::InvalidParameters("dual distance is 1 (zero column present)".into()));
    }
    let dual = g.dual_basis();
    let mut subsets: Vec<IndexSet> = Vec::new();
    for_each_combination(n, n - s + 1, |c| subsets.push(IndexSet::from_indices(c.iter().copied())));
    // None stands for the zero code, whose distance is infinite.
    let distances = subsets
        .par_iter()
        .map(|&set| min_weight(&shorten_space(&dual, set), DEFAULT_ENUMERATION_CAP))
        .collect::<Result<Vec<Option<usize>>>>()?;
    let worst = if distances.iter().any(|d| d.is_none()) { None } else { distances.into_iter().flatten().max() };
    Ok(match worst {
        None => Ratio::from_integer(s as u64),
        Some(d) => Ratio::new(n as u64 - s as u64, d as u64 - 1) + s as u64,
    })
}

/// The smallest shortened-dual bound over `s` in `1..n`, with its `s`.
pub fn min_shortened_dual_bound(g: &GeneratorMatrix) -> Result<Option<(usize, Ratio<u64>)>> {
    let mut best: Option<(usize, Ratio<u64>)> = None;
    for s in 1..g.n() {
        let b = shortened_dual_bound(g, s)?;
        if best.as_ref().is_none_or(|(_, v)| b < *v) {
            best = Some((s, b));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{identity_parity, mds_rs, simplex};

    #[test]
    fn length_bound_examples() {
        let r = length_bounds(2, 5, 3).unwrap();
        assert_eq!(r.exact(PropertyKind::Asbatch), Some(8));
        let r = length_bounds(4, 3, 2).unwrap();
        assert_eq!(r.exact(PropertyKind::Aspir), Some(8));
        let r = length_bounds(1, 1, 2).unwrap();
        assert_eq!(r.exact(PropertyKind::Aspir), Some(1));
        let r = length_bounds(1, 7, 2).unwrap();
        assert_eq!(r.exact(PropertyKind::Aspir), Some(7));
        let r = length_bounds(2, 3, 2).unwrap();
        assert_eq!(r.exact(PropertyKind::Aspir), Some(5));
    }

    #[test]
    fn k6_t4_q2_report() {
        let r = length_bounds(6, 4, 2).unwrap();
        let general: Vec<u64> = r
            .entries
            .iter()
            .filter(|e| e.kind == BoundKind::Lower && !e.name.starts_with("t = 4"))
            .map(|e| e.value)
            .collect();
        assert_eq!(general.iter().max(), Some(&9));
        assert_eq!(r.strict_lower(PropertyKind::Aspir), Some(11));
        assert_eq!(r.exact(PropertyKind::Aspir), Some(12));
        assert_eq!(r.upper(PropertyKind::Aspir), Some(12));
    }

    #[test]
    fn reports_are_consistent_on_a_grid() {
        for k in 1..=20 {
            for t in 1..=12 {
                for q in [2u32, 3, 4, 5, 8, 9] {
                    assert!(length_bounds(k, t, q).unwrap().is_consistent(), "k={k} t={t} q={q}");
                    assert!(reference_lengths(k, t, q).unwrap().is_consistent(), "k={k} t={t} q={q}");
                }
            }
        }
    }

    #[test]
    fn t3_value_matches_closed_form() {
        for k in 1..200usize {
            let r = length_bounds(k, 3, 2).unwrap().exact(PropertyKind::Aspir).unwrap();
            let root = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).ceil() as u64;
            assert_eq!(r, k as u64 + root, "k={k}");
        }
    }

    #[test]
    fn reference_examples() {
        assert_eq!(reference_lengths(4, 3, 2).unwrap().exact(PropertyKind::Pir), Some(8));
        assert_eq!(reference_lengths(4, 3, 2).unwrap().exact(PropertyKind::Fpir), Some(8));
        assert_eq!(reference_lengths(4, 4, 2).unwrap().exact(PropertyKind::Batch), Some(9));
        let odd = reference_lengths(5, 3, 2).unwrap();
        assert_eq!(odd.lower(PropertyKind::Fpir), Some(9));
        assert_eq!(odd.upper(PropertyKind::Fpir), Some(10));
        let unknown = reference_lengths(3, 5, 3).unwrap();
        assert_eq!(unknown.exact(PropertyKind::Batch), None);
        assert_eq!(unknown.upper(PropertyKind::Fbatch), None);
    }

    #[test]
    fn dual_distance_examples() {
        assert_eq!(dual_distance_bound(&simplex(3).unwrap()).unwrap(), Ratio::from_integer(4));
        assert_eq!(dual_distance_bound(&mds_rs(7, 3, 8).unwrap()).unwrap(), Ratio::from_integer(3));
        assert_eq!(dual_distance_bound(&identity_parity(2, 2).unwrap()).unwrap(), Ratio::from_integer(2));
    }

    #[test]
    fn shortened_bound_examples() {
        let s3 = simplex(3).unwrap();
        assert_eq!(shortened_dual_bound(&s3, 1).unwrap(), dual_distance_bound(&s3).unwrap());
        assert!(shortened_dual_bound(&s3, 2).unwrap() >= Ratio::from_integer(4));
        let p = identity_parity(2, 2).unwrap();
        assert!(shortened_dual_bound(&p, 2).unwrap() >= Ratio::from_integer(2));
        assert!(shortened_dual_bound(&p, 3).is_err());
    }

    #[test]
    fn gamma_bound() {
        assert_eq!(gamma_length_bound(3, 2), 3);
        assert_eq!(gamma_length_bound(7, 4), 7);
        assert_eq!(distinct_nonzero_columns(&simplex(3).unwrap()), 7);
    }
}
