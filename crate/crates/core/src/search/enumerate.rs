//! Canonical candidate matrices.
//!
//! Every property studied here survives
//! - column permutations (request indices are permuted along),
//! - left multiplication by an invertible `M` for the all-symbol and
//!   functional kinds (spans map bijectively and so do the request families),
//! - scaling a column by a nonzero constant (the span of any column set is
//!   unchanged, and a request for `a*g` has the same recovery sets as one
//!   for `g`),
//! - deleting zero columns (they only ever serve the zero target, which the
//!   empty set already serves).
//!
//! A column occurring more than `t` times can be dropped without losing a
//! property, because a minimal recovery set has independent columns and so
//! holds at most one copy of each value; a shortest code therefore never has
//! such a column. Conversely, duplicating a column never destroys a property,
//! so existence is monotone in the length as long as padding stays within
//! the multiplicity cap.
//!
//! Hence for the all-symbol and functional kinds it suffices to look at
//! `(I_k | A)` where `A` is a nondecreasing multiset of projective points
//! (first nonzero coordinate 1). The plain PIR and batch kinds are not
//! invariant under `M`, so their candidates are nondecreasing multisets of
//! `n` projective points of rank `k`.

use std::ops::ControlFlow;

use crate::field::Field;
use crate::linalg::{decode_vector, encode_vector, GeneratorMatrix, Matrix};
use crate::recovery::binomial;

/// Nonzero vectors of `GF(q)^k` whose first nonzero coordinate is 1, in
/// increasing encoding order.
pub fn projective_points(field: &Field, k: usize) -> Vec<Vec<u8>> {
    let q = field.order();
    let total = (q as u64).pow(k as u32);
    (1..total)
        .map(|c| decode_vector(c, q, k))
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
        .collect()
}

pub struct CandidateSpace {
    pub field: &'static Field,
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub systematic: bool,
    pub points: Vec<Vec<u8>>,
    /// Point index of each unit vector `e_i`.
    pub unit_ids: Vec<usize>,
    /// Number of free columns: `n - k` for systematic candidates, else `n`.
    pub free: usize,
    is_unit: Vec<bool>,
}

impl CandidateSpace {
    pub fn new(field: &'static Field, k: usize, n: usize, t: usize, systematic: bool) -> CandidateSpace {
        assert!(n >= k && k >= 1);
        let points = projective_points(field, k);
        let q = field.order();
        let unit_ids = (0..k)
            .map(|i| {
                let code = (q as u64).pow(i as u32);
                points
                    .binary_search_by_key(&code, |p| encode_vector(p, q))
                    .expect("unit vectors are projective points")
            })
            .collect();
        let free = if systematic { n - k } else { n };
        let mut is_unit = vec![false; points.len()];
        for &u in &unit_ids {
            is_unit[u] = true;
        }
        CandidateSpace { field, k, n, t, systematic, points, unit_ids, free, is_unit }
    }

    /// Number of nondecreasing tuples, before the multiplicity cap.
    pub fn size(&self) -> u128 {
        let p = self.points.len() as u64;
        binomial(p + self.free as u64 - 1, self.free as u64)
    }

    pub fn shard_count(&self) -> usize {
        if self.free == 0 {
            1
        } else {
            self.points.len()
        }
    }

    /// Tuples whose first entry is `shard`.
    pub fn shard_size(&self, shard: usize) -> u128 {
        if self.free == 0 {
            return 1;
        }
        let rest = (self.points.len() - shard) as u64;
        binomial(rest + self.free as u64 - 2, self.free as u64 - 1)
    }

    /// Visits the tuples of one shard in lexicographic order.
    pub fn for_each_in_shard<F>(&self, shard: usize, mut visit: F)
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if self.free == 0 {
            let _ = visit(&[]);
            return;
        }
        let last = self.points.len() - 1;
        let mut tuple = vec![shard; self.free];
        loop {
            if visit(&tuple).is_break() {
                return;
            }
            let Some(i) = (1..self.free).rev().find(|&i| tuple[i] < last) else {
                return;
            };
            let v = tuple[i] + 1;
            for slot in &mut tuple[i..] {
                *slot = v;
            }
        }
    }

    /// Column point ids of the candidate: unit vectors first when systematic.
    pub fn column_ids(&self, tuple: &[usize], out: &mut Vec<usize>) {
        out.clear();
        if self.systematic {
            out.extend_from_slice(&self.unit_ids);
        }
        out.extend_from_slice(tuple);
    }

    /// No value occurs more than `t` times (unit columns included).
    pub fn within_cap(&self, tuple: &[usize]) -> bool {
        let mut i = 0;
        while i < tuple.len() {
            let mut j = i;
            while j < tuple.len() && tuple[j] == tuple[i] {
                j += 1;
            }
            let extra = usize::from(self.systematic && self.is_unit[tuple[i]]);
            if j - i + extra > self.t {
                return false;
            }
            i = j;
        }
        true
    }

    pub fn matrix(&self, tuple: &[usize]) -> Matrix {
        let mut ids = Vec::new();
        self.column_ids(tuple, &mut ids);
        let cols: Vec<Vec<u8>> = ids.iter().map(|&i| self.points[i].clone()).collect();
        Matrix::from_columns(self.field, self.k, &cols).expect("points are valid columns")
    }

    /// The candidate as a generator matrix, or `None` when rank-deficient.
    pub fn generator(&self, tuple: &[usize]) -> Option<GeneratorMatrix> {
        GeneratorMatrix::new(self.matrix(tuple)).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_of_order;

    fn count(space: &CandidateSpace) -> (u128, u128) {
        let (mut all, mut capped) = (0u128, 0u128);
        for s in 0..space.shard_count() {
            let mut in_shard = 0u128;
            space.for_each_in_shard(s, |tup| {
                in_shard += 1;
                if space.within_cap(tup) {
                    capped += 1;
                }
                ControlFlow::Continue(())
            });
            assert_eq!(in_shard, space.shard_size(s));
            all += in_shard;
        }
        (all, capped)
    }

    #[test]
    fn projective_point_counts() {
        assert_eq!(projective_points(field_of_order(2).unwrap(), 6).len(), 63);
        assert_eq!(projective_points(field_of_order(3).unwrap(), 5).len(), 121);
        assert_eq!(projective_points(field_of_order(4).unwrap(), 2).len(), 5);
        assert_eq!(projective_points(field_of_order(3).unwrap(), 2), vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn candidate_counts() {
        let s = CandidateSpace::new(field_of_order(2).unwrap(), 2, 3, 2, true);
        assert_eq!(count(&s), (3, 3));
        let s = CandidateSpace::new(field_of_order(2).unwrap(), 6, 11, 4, true);
        assert_eq!(s.size(), 9_657_648);
        let s = CandidateSpace::new(field_of_order(3).unwrap(), 1, 4, 4, true);
        assert_eq!(count(&s), (1, 1));
        let s = CandidateSpace::new(field_of_order(3).unwrap(), 1, 5, 4, true);
        assert_eq!(count(&s), (1, 0));
    }

    #[test]
    fn shard_sizes_sum_to_space() {
        for (q, k, n) in [(2u32, 3usize, 7usize), (3, 2, 6), (4, 2, 5)] {
            let s = CandidateSpace::new(field_of_order(q).unwrap(), k, n, 3, true);
            let total: u128 = (0..s.shard_count()).map(|i| s.shard_size(i)).sum();
            assert_eq!(total, s.size());
            assert_eq!(count(&s).0, s.size());
        }
    }

    #[test]
    fn lex_order_within_shard() {
        let s = CandidateSpace::new(field_of_order(2).unwrap(), 2, 5, 3, true);
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for shard in 0..s.shard_count() {
            s.for_each_in_shard(shard, |t| {
                seen.push(t.to_vec());
                ControlFlow::Continue(())
            });
        }
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
        assert!(seen.iter().all(|t| t.windows(2).all(|w| w[0] <= w[1])));
    }
}
