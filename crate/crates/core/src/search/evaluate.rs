//! Per-candidate property evaluation with cheap necessary conditions first.
//!
//! Necessary conditions used (all six kinds):
//! - a target needing `t` disjoint sets, with only `c` columns equal to it up
//!   to scaling, needs `c + 2(t - c)` columns;
//! - every nonzero codeword has weight at least `t` (each recovery set of a
//!   target not orthogonal to the message meets the codeword's support), so
//!   in particular every row of `G` has weight at least `t`.
//!
//! The all-symbol kinds on systematic candidates then go through the dual
//! code: minimal dual supports give every column's recovery family at once.

use serde::{Deserialize, Serialize};

use super::enumerate::CandidateSpace;
use crate::linalg::{codeword_supports, minimal_supports, min_weight, Matrix};
use crate::properties::{check, ColexMultisets, PropertyKind};
use crate::recovery::{families_from_dual_supports, Packer};

/// Where a candidate was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Rank,
    Multiplicity,
    RowWeight,
    Distance,
    DualDistance,
    Aspir,
    Asbatch,
    Property,
    Accepted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub rank: u64,
    pub multiplicity: u64,
    pub row_weight: u64,
    pub distance: u64,
    pub dual_distance: u64,
    pub aspir: u64,
    pub asbatch: u64,
    pub property: u64,
    pub accepted: u64,
}

impl StageCounts {
    pub fn record(&mut self, stage: Stage) {
        let slot = match stage {
            Stage::Rank => &mut self.rank,
            Stage::Multiplicity => &mut self.multiplicity,
            Stage::RowWeight => &mut self.row_weight,
            Stage::Distance => &mut self.distance,
            Stage::DualDistance => &mut self.dual_distance,
            Stage::Aspir => &mut self.aspir,
            Stage::Asbatch => &mut self.asbatch,
            Stage::Property => &mut self.property,
            Stage::Accepted => &mut self.accepted,
        };
        *slot += 1;
    }

    pub fn merge(&mut self, o: &StageCounts) {
        self.rank += o.rank;
        self.multiplicity += o.multiplicity;
        self.row_weight += o.row_weight;
        self.distance += o.distance;
        self.dual_distance += o.dual_distance;
        self.aspir += o.aspir;
        self.asbatch += o.asbatch;
        self.property += o.property;
        self.accepted += o.accepted;
    }

    pub fn total(&self) -> u64 {
        self.rank
            + self.multiplicity
            + self.row_weight
            + self.distance
            + self.dual_distance
            + self.aspir
            + self.asbatch
            + self.property
            + self.accepted
    }
}

/// Both all-symbol verdicts for one candidate, used by the `t = 3` audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairVerdict {
    pub aspir: bool,
    pub asbatch: bool,
}

/// Per-space lookup tables shared by all evaluators of one length.
pub struct Tables {
    point_masks: Vec<u64>,
    /// Per point `p`, the bitset of projective messages `x` with
    /// `x . p != 0`, in `words` u64 words. Built when `P * P` is small.
    nonzero: Option<Vec<u64>>,
    words: usize,
}

impl Tables {
    pub fn new(space: &CandidateSpace) -> Tables {
        let point_masks = space
            .points
            .iter()
            .map(|p| p.iter().enumerate().filter(|(_, &x)| x != 0).fold(0u64, |m, (i, _)| m | 1 << i))
            .collect();
        let words = space.points.len().div_ceil(64);
        Tables { point_masks, nonzero: nonzero_table(space, words), words }
    }
}

pub struct Evaluator<'s> {
    space: &'s CandidateSpace,
    tables: &'s Tables,
    kind: PropertyKind,
    t: usize,
    binary: bool,
    ids: Vec<usize>,
    counts: Vec<usize>,
    planes: Vec<u64>,
    packer: Packer,
}

impl<'s> Evaluator<'s> {
    pub fn new(space: &'s CandidateSpace, tables: &'s Tables, kind: PropertyKind) -> Evaluator<'s> {
        Evaluator {
            space,
            tables,
            kind,
            t: space.t,
            binary: space.field.order() == 2,
            ids: Vec::with_capacity(space.n),
            counts: vec![0; space.points.len()],
            planes: Vec::new(),
            packer: Packer::new(space.n),
        }
    }

    /// Decides the configured property for one candidate.
    pub fn evaluate(&mut self, tuple: &[usize]) -> Stage {
        if let Some(stage) = self.filters(tuple) {
            return stage;
        }
        match self.kind {
            PropertyKind::Aspir | PropertyKind::Asbatch if self.space.systematic => {
                let want_batch = self.kind == PropertyKind::Asbatch;
                self.all_symbol(tuple, want_batch).0
            }
            _ => {
                let Some(g) = self.space.generator(tuple) else {
                    return Stage::Rank;
                };
                match check(&g, self.kind, self.t) {
                    Ok(v) if v.holds => Stage::Accepted,
                    Ok(_) => Stage::Property,
                    Err(e) => panic!("property check failed on a candidate: {e}"),
                }
            }
        }
    }

    /// Both all-symbol verdicts (the filters are necessary for both).
    pub fn evaluate_pair(&mut self, tuple: &[usize]) -> PairVerdict {
        assert!(self.space.systematic);
        if self.filters(tuple).is_some() {
            return PairVerdict { aspir: false, asbatch: false };
        }
        let (_, pair) = self.all_symbol(tuple, true);
        pair
    }

    fn filters(&mut self, tuple: &[usize]) -> Option<Stage> {
        let space = self.space;
        let (n, t, k) = (space.n, self.t, space.k);
        space.column_ids(tuple, &mut self.ids);

        for &id in &self.ids {
            self.counts[id] += 1;
        }
        let fewest = match self.kind {
            PropertyKind::Aspir | PropertyKind::Asbatch => self.ids.iter().map(|&id| self.counts[id]).min(),
            PropertyKind::Pir | PropertyKind::Batch => space.unit_ids.iter().map(|&id| self.counts[id]).min(),
            PropertyKind::Fpir | PropertyKind::Fbatch => self.counts.iter().copied().min(),
        }
        .unwrap_or(0)
        .min(t);
        for &id in &self.ids {
            self.counts[id] = 0;
        }
        if n < 2 * t - fewest {
            return Some(Stage::Multiplicity);
        }

        if self.binary {
            let mut rows = [0u64; 64];
            for (j, &id) in self.ids.iter().enumerate() {
                let mut m = self.tables.point_masks[id];
                while m != 0 {
                    let r = m.trailing_zeros() as usize;
                    rows[r] |= 1 << j;
                    m &= m - 1;
                }
            }
            let rows = &rows[..k];
            if rows.iter().any(|r| (r.count_ones() as usize) < t) {
                return Some(Stage::RowWeight);
            }
            if !space.systematic && rank_binary(rows) < k {
                return Some(Stage::Rank);
            }
            let mut word = 0u64;
            for step in 1u64..(1u64 << k) {
                word ^= rows[step.trailing_zeros() as usize];
                if (word.count_ones() as usize) < t {
                    return Some(Stage::Distance);
                }
            }
        } else {
            let mut weights = [0u8; 64];
            for &id in &self.ids {
                let mut m = self.tables.point_masks[id];
                while m != 0 {
                    weights[m.trailing_zeros() as usize] += 1;
                    m &= m - 1;
                }
            }
            if weights[..k].iter().any(|&w| usize::from(w) < t) {
                return Some(Stage::RowWeight);
            }
            if !space.systematic && space.matrix(tuple).rank() < k {
                return Some(Stage::Rank);
            }
            let distance_ok = match &self.tables.nonzero {
                Some(table) => self.all_weights_reach(table, t),
                None => min_weight(&space.matrix(tuple), u128::MAX).expect("no cap").unwrap_or(0) >= t,
            };
            if !distance_ok {
                return Some(Stage::Distance);
            }
        }
        None
    }

    /// Every projective message has at least `t` columns it is not
    /// orthogonal to. The per-message counts are kept bit-sliced: plane `b`
    /// holds bit `b` of every counter.
    fn all_weights_reach(&mut self, table: &[u64], t: usize) -> bool {
        let w = self.tables.words;
        let planes = (usize::BITS - self.space.n.leading_zeros()) as usize;
        self.planes.clear();
        self.planes.resize(planes * w, 0);
        for &id in &self.ids {
            let row = &table[id * w..(id + 1) * w];
            for (i, &bits) in row.iter().enumerate() {
                let mut carry = bits;
                for b in 0..planes {
                    if carry == 0 {
                        break;
                    }
                    let c = &mut self.planes[b * w + i];
                    let next = *c & carry;
                    *c ^= carry;
                    carry = next;
                }
            }
        }
        let p = self.space.points.len();
        (0..w).all(|i| {
            // counter < t, compared from the top bit down
            let (mut less, mut equal) = (0u64, !0u64);
            for b in (0..planes).rev() {
                let c = self.planes[b * w + i];
                if t >> b & 1 == 1 {
                    less |= equal & !c;
                    equal &= c;
                } else {
                    equal &= !c;
                }
            }
            if t >> planes != 0 {
                less = !0;
            }
            let valid = if i + 1 == w && p % 64 != 0 { (1u64 << (p % 64)) - 1 } else { !0 };
            less & valid == 0
        })
    }

    /// Minimal supports of the dual of a systematic candidate.
    fn dual_minimal_supports(&self, tuple: &[usize]) -> Vec<u64> {
        let space = self.space;
        let (k, m) = (space.k, space.free);
        if m == 0 {
            return Vec::new();
        }
        let words = if self.binary {
            let h: Vec<u64> = tuple
                .iter()
                .enumerate()
                .map(|(l, &id)| self.tables.point_masks[id] | 1 << (k + l))
                .collect();
            let mut out = Vec::with_capacity(1 << m);
            let mut word = 0u64;
            for step in 1u64..(1u64 << m) {
                word ^= h[step.trailing_zeros() as usize];
                out.push(word);
            }
            out
        } else {
            // H = (-A^T | I_m)
            let f = space.field;
            let mut h = Matrix::zeros(f, m, space.n);
            for (l, &id) in tuple.iter().enumerate() {
                for (j, &x) in space.points[id].iter().enumerate() {
                    h.set(l, j, f.neg(x));
                }
                h.set(l, k + l, 1);
            }
            codeword_supports(&h)
        };
        minimal_supports(words)
    }

    fn all_symbol(&mut self, tuple: &[usize], want_batch: bool) -> (Stage, PairVerdict) {
        let fail = |stage| (stage, PairVerdict { aspir: false, asbatch: false });
        let space = self.space;
        let (n, t) = (space.n, self.t);
        let supports = self.dual_minimal_supports(tuple);
        let dual_distance = supports.iter().map(|s| s.count_ones() as usize).min();
        let dual_ok = match dual_distance {
            None => t <= 1,
            Some(d) => (t - 1) * (d - 1) <= n - 1,
        };
        if !dual_ok {
            return fail(Stage::DualDistance);
        }
        let families = families_from_dual_supports(n, &supports, n);

        // one representative column per value, in first-occurrence order
        let mut reps: Vec<usize> = Vec::with_capacity(n);
        for (j, id) in self.ids.iter().enumerate() {
            if !self.ids[..j].contains(id) {
                reps.push(j);
            }
        }
        for &j in &reps {
            if !self.packer.feasible(&[&families[j]], &[t]) {
                return fail(Stage::Aspir);
            }
        }
        if !want_batch {
            return (Stage::Accepted, PairVerdict { aspir: true, asbatch: false });
        }
        let mut fams: Vec<&[u64]> = Vec::with_capacity(t);
        let mut demands: Vec<usize> = Vec::with_capacity(t);
        for tup in ColexMultisets::new(reps.len(), t) {
            fams.clear();
            demands.clear();
            for &i in &tup {
                let fam: &[u64] = &families[reps[i]];
                match fams.last() {
                    Some(last) if std::ptr::eq(*last, fam) => *demands.last_mut().expect("paired") += 1,
                    _ => {
                        fams.push(fam);
                        demands.push(1);
                    }
                }
            }
            if fams.len() > 1 && !self.packer.feasible(&fams, &demands) {
                return (Stage::Asbatch, PairVerdict { aspir: true, asbatch: false });
            }
        }
        (Stage::Accepted, PairVerdict { aspir: true, asbatch: true })
    }
}

/// Codewords up to scaling are `x G` for projective `x`, so the minimum
/// distance only needs one message per projective point.
fn nonzero_table(space: &CandidateSpace, words: usize) -> Option<Vec<u64>> {
    const MAX_ENTRIES: usize = 1 << 22;
    let p = space.points.len();
    if space.field.order() == 2 || p.saturating_mul(p) > MAX_ENTRIES {
        return None;
    }
    let f = space.field;
    let mut table = vec![0u64; p * words];
    for (pi, y) in space.points.iter().enumerate() {
        for (xi, x) in space.points.iter().enumerate() {
            let dot = x.iter().zip(y).fold(0u8, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
            if dot != 0 {
                table[pi * words + xi / 64] |= 1 << (xi % 64);
            }
        }
    }
    Some(table)
}

fn rank_binary(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_of_order;
    use crate::properties::check;
    use rand::{Rng, SeedableRng};
    use std::ops::ControlFlow;

    /// The fast all-symbol path agrees with the generic checker.
    #[test]
    fn fast_path_matches_generic_checker() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for &(q, k, n) in &[(2u32, 3usize, 7usize), (2, 4, 9), (3, 2, 6), (3, 3, 7), (4, 2, 6), (2, 2, 6)] {
            for t in 2..=4 {
                let space = CandidateSpace::new(field_of_order(q).unwrap(), k, n, t, true);
                let tables = Tables::new(&space);
                let mut tuples: Vec<Vec<usize>> = Vec::new();
                for s in 0..space.shard_count() {
                    space.for_each_in_shard(s, |tup| {
                        if space.within_cap(tup) {
                            tuples.push(tup.to_vec());
                        }
                        ControlFlow::Continue(())
                    });
                }
                for _ in 0..60 {
                    let tup = &tuples[rng.gen_range(0..tuples.len())];
                    let g = space.generator(tup).unwrap();
                    for kind in [PropertyKind::Aspir, PropertyKind::Asbatch] {
                        let mut ev = Evaluator::new(&space, &tables, kind);
                        let fast = ev.evaluate(tup) == Stage::Accepted;
                        let slow = check(&g, kind, t).unwrap().holds;
                        assert_eq!(fast, slow, "{kind} t={t} {g:?}");
                    }
                    let mut ev = Evaluator::new(&space, &tables, PropertyKind::Asbatch);
                    let pair = ev.evaluate_pair(tup);
                    assert_eq!(pair.aspir, check(&g, PropertyKind::Aspir, t).unwrap().holds);
                    assert_eq!(pair.asbatch, check(&g, PropertyKind::Asbatch, t).unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn non_systematic_filters_reject_rank_deficiency() {
        let space = CandidateSpace::new(field_of_order(2).unwrap(), 2, 3, 1, false);
        let tables = Tables::new(&space);
        let mut ev = Evaluator::new(&space, &tables, PropertyKind::Pir);
        assert_eq!(ev.evaluate(&[0, 0, 0]), Stage::RowWeight);
        assert_eq!(ev.evaluate(&[2, 2, 2]), Stage::Rank);
        assert_eq!(ev.evaluate(&[0, 1, 2]), Stage::Accepted);
    }

    #[test]
    fn bit_sliced_distance_matches_min_weight() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &(q, k, n) in &[(3u32, 3usize, 9usize), (4, 2, 7), (5, 3, 8), (3, 4, 12)] {
            let space = CandidateSpace::new(field_of_order(q).unwrap(), k, n, 1, true);
            let tables = Tables::new(&space);
            let table = tables.nonzero.as_ref().unwrap();
            let mut ev = Evaluator::new(&space, &tables, PropertyKind::Aspir);
            for _ in 0..200 {
                let mut tup: Vec<usize> = (0..space.free).map(|_| rng.gen_range(0..space.points.len())).collect();
                tup.sort();
                let d = min_weight(&space.matrix(&tup), u128::MAX).unwrap().unwrap();
                space.column_ids(&tup, &mut ev.ids);
                for t in 1..=n {
                    assert_eq!(ev.all_weights_reach(table, t), d >= t, "q={q} {tup:?} t={t}");
                }
            }
        }
    }

    #[test]
    fn binary_rank() {
        assert_eq!(rank_binary(&[0b011, 0b110, 0b101]), 2);
        assert_eq!(rank_binary(&[0b001, 0b010]), 2);
        assert_eq!(rank_binary(&[0, 0]), 0);
    }
}
