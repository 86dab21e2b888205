//! Minimal-length search over canonical candidates.
//!
//! Lengths are scanned upward. At each length the candidate stream is split
//! into shards by the first free column; shards run in parallel. Once a shard
//! finds a witness, later shards stop, but earlier shards keep going, so the
//! reported witness is always the lexicographically first one. A length with
//! no witness is only reported as exhausted after every shard finishes.

pub mod cache;
pub mod enumerate;
mod evaluate;

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{length_bounds, reference_lengths, search_lower_bound};
use crate::error::{Error, Result};
use crate::field::field_of_order;
use crate::linalg::GeneratorMatrix;
use crate::properties::{check, PropertyKind};

pub use enumerate::{projective_points, CandidateSpace};
pub use evaluate::{Evaluator, PairVerdict, Stage, StageCounts, Tables};

pub const STRATEGY_VERSION: &str = "systematic-v1";

/// Default limit on the candidate count of a single probed length.
pub const DEFAULT_CANDIDATE_CAP: u64 = 100_000_000;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub n_start: Option<usize>,
    pub n_end: Option<usize>,
    /// Stop after evaluating this many candidates in total.
    pub budget: Option<u64>,
    /// Limit on the candidates visited at one length. A length with more
    /// candidates may still be probed, but a search that would have to
    /// visit more than this many fails with `CapExceeded`.
    pub candidate_cap: u64,
    /// Evaluate both all-symbol properties on every candidate and exhaust
    /// every probed length. Only valid for the all-symbol kinds.
    pub audit: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { n_start: None, n_end: None, budget: None, audit: false, candidate_cap: DEFAULT_CANDIDATE_CAP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Found,
    BudgetExceeded,
    NotFoundInRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardRecord {
    pub shard: usize,
    pub size: u64,
    pub examined: u64,
    pub skipped_by_cap: u64,
    pub exhausted: bool,
    pub rejections: StageCounts,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub candidates: u64,
    pub aspir: u64,
    pub asbatch: u64,
    /// Candidates where exactly one of the two properties holds.
    pub disagreements: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub n: usize,
    /// Nondecreasing tuples before the multiplicity cap.
    pub space_size: u64,
    pub examined: u64,
    pub skipped_by_cap: u64,
    pub exhausted: bool,
    pub witness_found: bool,
    pub rejections: StageCounts,
    pub shards: Vec<ShardRecord>,
    pub audit: Option<AuditCounts>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub p: u32,
    pub e: u32,
    pub kind: PropertyKind,
    pub strategy: String,
    pub status: SearchStatus,
    pub min_length: Option<usize>,
    /// Every length below this value has no code with the property.
    pub certified_lower_bound: usize,
    /// Witness rows, when found.
    pub witness: Option<Vec<Vec<u32>>>,
    /// The witness passed the generic property checker.
    pub witness_verified: bool,
    pub start_length: usize,
    pub examined: u64,
    pub lengths: Vec<LengthRecord>,
    pub wall_time_ms: u64,
    pub from_cache: bool,
}

impl SearchOutcome {
    pub fn witness_matrix(&self) -> Result<Option<GeneratorMatrix>> {
        let field = field_of_order(self.q)?;
        self.witness.as_ref().map(|rows| GeneratorMatrix::from_rows(field, rows)).transpose()
    }
}

/// Progress sink and source for resumable searches.
pub trait Journal: Sync {
    /// A previously exhausted shard at length `n`.
    fn completed(&self, n: usize, shard: usize) -> Option<ShardRecord>;
    fn record(&self, n: usize, shard: &ShardRecord) -> Result<()>;
}

struct NoJournal;

impl Journal for NoJournal {
    fn completed(&self, _: usize, _: usize) -> Option<ShardRecord> {
        None
    }
    fn record(&self, _: usize, _: &ShardRecord) -> Result<()> {
        Ok(())
    }
}

struct ShardRun {
    record: ShardRecord,
    witness: Option<Vec<usize>>,
    audit: AuditCounts,
}

struct LengthRun {
    record: LengthRecord,
    witness: Option<Vec<usize>>,
    budget_hit: bool,
}

struct Budget {
    limit: Option<u64>,
    used: AtomicU64,
    hit: AtomicBool,
}

impl Budget {
    fn take(&self) -> bool {
        let used = self.used.fetch_add(1, Ordering::Relaxed);
        match self.limit {
            Some(limit) if used >= limit => {
                self.hit.store(true, Ordering::Relaxed);
                false
            }
            _ => true,
        }
    }
}

/// Runs one length. With `stop_at_witness`, later shards stop once a
/// witness is known.
fn run_length(
    space: &CandidateSpace,
    kind: PropertyKind,
    audit: bool,
    stop_at_witness: bool,
    budget: &Budget,
    journal: &dyn Journal,
    cap: u64,
) -> Result<LengthRun> {
    let n = space.n;
    // a length larger than the cap may still be probed for a witness, but
    // never enumerated past the cap
    let visits = Budget {
        limit: (space.size() > u128::from(cap)).then_some(cap),
        used: AtomicU64::new(0),
        hit: AtomicBool::new(false),
    };
    let found_at = AtomicUsize::new(usize::MAX);
    let tables = Tables::new(space);
    let runs: Vec<Result<ShardRun>> = (0..space.shard_count())
        .into_par_iter()
        .map(|shard| {
            let size = u64::try_from(space.shard_size(shard)).expect("shard size fits in u64");
            if let Some(done) = journal.completed(n, shard) {
                if done.size == size && done.exhausted && !audit {
                    return Ok(ShardRun { record: done, witness: None, audit: AuditCounts::default() });
                }
            }
            let mut record = ShardRecord {
                shard,
                size,
                examined: 0,
                skipped_by_cap: 0,
                exhausted: false,
                rejections: StageCounts::default(),
            };
            let mut counts = AuditCounts::default();
            let mut witness = None;
            let mut stopped = false;
            let mut ev = Evaluator::new(space, &tables, kind);
            space.for_each_in_shard(shard, |tuple| {
                if stop_at_witness && found_at.load(Ordering::Relaxed) < shard {
                    stopped = true;
                    return ControlFlow::Break(());
                }
                if !visits.take() {
                    stopped = true;
                    return ControlFlow::Break(());
                }
                if !space.within_cap(tuple) {
                    record.skipped_by_cap += 1;
                    return ControlFlow::Continue(());
                }
                if !budget.take() {
                    stopped = true;
                    return ControlFlow::Break(());
                }
                record.examined += 1;
                let accepted = if audit {
                    let pair = ev.evaluate_pair(tuple);
                    counts.candidates += 1;
                    counts.aspir += u64::from(pair.aspir);
                    counts.asbatch += u64::from(pair.asbatch);
                    counts.disagreements += u64::from(pair.aspir != pair.asbatch);
                    let holds = if kind == PropertyKind::Aspir { pair.aspir } else { pair.asbatch };
                    record.rejections.record(if holds { Stage::Accepted } else { Stage::Property });
                    holds
                } else {
                    let stage = ev.evaluate(tuple);
                    record.rejections.record(stage);
                    stage == Stage::Accepted
                };
                if accepted && witness.is_none() {
                    witness = Some(tuple.to_vec());
                    found_at.fetch_min(shard, Ordering::Relaxed);
                    if stop_at_witness {
                        stopped = true;
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            });
            record.exhausted = !stopped;
            if record.exhausted && witness.is_none() && !audit {
                journal.record(n, &record)?;
            }
            Ok(ShardRun { record, witness, audit: counts })
        })
        .collect();

    let mut record = LengthRecord {
        n,
        space_size: u64::try_from(space.size()).expect("checked in space_for"),
        examined: 0,
        skipped_by_cap: 0,
        exhausted: true,
        witness_found: false,
        rejections: StageCounts::default(),
        shards: Vec::with_capacity(runs.len()),
        audit: audit.then(AuditCounts::default),
    };
    let mut witness = None;
    for run in runs {
        let run = run?;
        record.examined += run.record.examined;
        record.skipped_by_cap += run.record.skipped_by_cap;
        record.exhausted &= run.record.exhausted;
        record.rejections.merge(&run.record.rejections);
        if let Some(a) = record.audit.as_mut() {
            a.candidates += run.audit.candidates;
            a.aspir += run.audit.aspir;
            a.asbatch += run.audit.asbatch;
            a.disagreements += run.audit.disagreements;
        }
        if witness.is_none() {
            witness = run.witness;
        }
        record.shards.push(run.record);
    }
    record.witness_found = witness.is_some();
    if witness.is_none() && visits.hit.load(Ordering::Relaxed) {
        return Err(Error::CapExceeded { size: space.size(), cap: u128::from(cap) });
    }
    let budget_hit = budget.hit.load(Ordering::Relaxed);
    Ok(LengthRun { record, witness, budget_hit })
}

fn validate(k: usize, t: usize, kind: PropertyKind, audit: bool) -> Result<()> {
    if k == 0 || t == 0 {
        return Err(Error::InvalidParameters("k and t must be positive".into()));
    }
    if audit && !kind.is_all_symbol() {
        return Err(Error::InvalidParameters("audit mode needs an all-symbol kind".into()));
    }
    Ok(())
}

fn space_for(q: u32, k: usize, n: usize, t: usize, kind: PropertyKind, cap: u64) -> Result<CandidateSpace> {
    let field = field_of_order(q)?;
    let systematic = kind.is_all_symbol() || kind.is_functional();
    let space = CandidateSpace::new(field, k, n, t, systematic);
    if u64::try_from(space.size()).is_err() {
        return Err(Error::CapExceeded { size: space.size(), cap: u128::from(cap) });
    }
    Ok(space)
}

fn witness_rows(space: &CandidateSpace, tuple: &[usize]) -> Vec<Vec<u32>> {
    let m = space.matrix(tuple);
    (0..m.rows()).map(|r| m.row(r).iter().map(|&x| u32::from(x)).collect()).collect()
}

/// Default first length: one below the best proven lower bound, so that the
/// length just below any reported minimum is always searched exhaustively.
pub fn default_start(k: usize, t: usize, q: u32, kind: PropertyKind) -> Result<usize> {
    let lb = search_lower_bound(k, t, q, kind)? as usize;
    Ok(lb.saturating_sub(1).max(k))
}

fn default_end(k: usize, t: usize, q: u32, kind: PropertyKind, start: usize) -> Result<usize> {
    let upper = match kind {
        PropertyKind::Pir | PropertyKind::Batch => reference_lengths(k, t, q)?.upper(kind),
        PropertyKind::Aspir | PropertyKind::Asbatch => length_bounds(k, t, q)?.upper(kind),
        PropertyKind::Fpir | PropertyKind::Fbatch => None,
    };
    Ok(upper.map_or(start + 2 * t + k, |u| u as usize).max(start))
}

/// Smallest length with a code having the property, scanning upward.
pub fn find_min_length(k: usize, t: usize, q: u32, kind: PropertyKind, opts: &SearchOptions) -> Result<SearchOutcome> {
    find_min_length_with(k, t, q, kind, opts, &NoJournal)
}

pub fn find_min_length_with(
    k: usize,
    t: usize,
    q: u32,
    kind: PropertyKind,
    opts: &SearchOptions,
    journal: &dyn Journal,
) -> Result<SearchOutcome> {
    validate(k, t, kind, opts.audit)?;
    let clock = Instant::now();
    let field = field_of_order(q)?;
    let start = match opts.n_start {
        Some(n) => n.max(k),
        None => default_start(k, t, q, kind)?,
    };
    let end = match opts.n_end {
        Some(n) => n,
        None => default_end(k, t, q, kind, start)?,
    };
    let budget = Budget { limit: opts.budget, used: AtomicU64::new(0), hit: AtomicBool::new(false) };
    let mut out = SearchOutcome {
        k,
        t,
        q,
        p: field.characteristic(),
        e: field.degree(),
        kind,
        strategy: STRATEGY_VERSION.to_string(),
        status: SearchStatus::NotFoundInRange,
        min_length: None,
        // no rank-k matrix is shorter than k
        certified_lower_bound: k,
        witness: None,
        witness_verified: false,
        start_length: start,
        examined: 0,
        lengths: Vec::new(),
        wall_time_ms: 0,
        from_cache: false,
    };
    let mut contiguous = start <= k;
    for n in start..=end {
        let space = space_for(q, k, n, t, kind, opts.candidate_cap)?;
        let run = run_length(&space, kind, opts.audit, !opts.audit, &budget, journal, opts.candidate_cap)?;
        out.examined += run.record.examined;
        let exhausted = run.record.exhausted;
        out.lengths.push(run.record);
        if let Some(tuple) = run.witness {
            let g = space.generator(&tuple).expect("witness has full rank");
            out.witness_verified = check(&g, kind, t)?.holds;
            out.witness = Some(witness_rows(&space, &tuple));
            out.min_length = Some(n);
            out.status = SearchStatus::Found;
            break;
        }
        if run.budget_hit || !exhausted {
            out.status = SearchStatus::BudgetExceeded;
            break;
        }
        // Exhausting n rules out every shorter length too, by padding with
        // duplicate columns, as long as padding fits under the cap.
        if contiguous || n <= k * t {
            out.certified_lower_bound = n + 1;
            contiguous = true;
        }
    }
    out.wall_time_ms = clock.elapsed().as_millis() as u64;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub t: usize,
    pub q: u32,
    pub kind: PropertyKind,
    pub claimed: usize,
    pub strategy: String,
    pub confirmed: bool,
    /// Candidates at `claimed`, up to and including the witness.
    pub upper: LengthRecord,
    /// Exhaustive record at `claimed - 1`; absent when `claimed - 1 < k`.
    pub lower: Option<LengthRecord>,
    pub witness: Option<Vec<Vec<u32>>>,
    pub witness_verified: bool,
    /// Nonexistence at `claimed - 1` extends to all shorter lengths: any
    /// shorter code has at least `k` distinct columns and pads to
    /// `claimed - 1` by duplicates within the multiplicity cap.
    pub monotone_padding_ok: bool,
    pub refutation: Option<String>,
    /// Code found at `claimed - 1`, when the claim is refuted from below.
    pub shorter_witness: Option<Vec<Vec<u32>>>,
}

/// Two-sided check that the optimal length is `claimed`.
pub fn verify_value(k: usize, t: usize, q: u32, kind: PropertyKind, claimed: usize, cap: u64) -> Result<Certificate> {
    validate(k, t, kind, false)?;
    if claimed < k {
        return Err(Error::InvalidParameters(format!("claimed length {claimed} is below k = {k}")));
    }
    let budget = Budget { limit: None, used: AtomicU64::new(0), hit: AtomicBool::new(false) };
    let space = space_for(q, k, claimed, t, kind, cap)?;
    let up = run_length(&space, kind, false, true, &budget, &NoJournal, cap)?;
    let mut cert = Certificate {
        k,
        t,
        q,
        kind,
        claimed,
        strategy: STRATEGY_VERSION.to_string(),
        confirmed: false,
        upper: up.record,
        lower: None,
        witness: None,
        witness_verified: false,
        monotone_padding_ok: claimed - 1 <= k * t,
        refutation: None,
        shorter_witness: None,
    };
    match up.witness {
        Some(tuple) => {
            let g = space.generator(&tuple).expect("witness has full rank");
            cert.witness_verified = check(&g, kind, t)?.holds;
            cert.witness = Some(witness_rows(&space, &tuple));
        }
        None => cert.refutation = Some(format!("no code of length {claimed} has the property")),
    }
    if claimed > k {
        let space = space_for(q, k, claimed - 1, t, kind, cap)?;
        // exhaust unless a witness turns up
        let down = run_length(&space, kind, false, true, &budget, &NoJournal, cap)?;
        if let Some(tuple) = down.witness {
            cert.shorter_witness = Some(witness_rows(&space, &tuple));
            cert.refutation = Some(format!("a code of length {} has the property", claimed - 1));
        }
        cert.lower = Some(down.record);
    }
    cert.confirmed = cert.refutation.is_none()
        && cert.witness_verified
        && cert.monotone_padding_ok
        && cert.lower.as_ref().map_or(true, |l| l.exhausted && l.examined + l.skipped_by_cap == l.space_size);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_len(k: usize, t: usize, q: u32, kind: PropertyKind) -> SearchOutcome {
        let out = find_min_length(k, t, q, kind, &SearchOptions::default()).unwrap();
        assert_eq!(out.status, SearchStatus::Found, "{k} {t} {q} {kind}");
        assert!(out.witness_verified);
        out
    }

    #[test]
    fn small_values() {
        assert_eq!(min_len(2, 4, 2, PropertyKind::Asbatch).min_length, Some(6));
        assert_eq!(min_len(3, 2, 3, PropertyKind::Aspir).min_length, Some(4));
        assert_eq!(min_len(3, 3, 2, PropertyKind::Asbatch).min_length, Some(6));
        assert_eq!(min_len(1, 5, 3, PropertyKind::Aspir).min_length, Some(5));
    }

    #[test]
    fn lower_length_is_exhausted() {
        let out = min_len(2, 3, 2, PropertyKind::Aspir);
        assert_eq!(out.min_length, Some(5));
        assert_eq!(out.certified_lower_bound, 5);
        let below = out.lengths.iter().find(|l| l.n == 4).unwrap();
        assert!(below.exhausted);
        assert_eq!(below.examined + below.skipped_by_cap, below.space_size);
        let per_shard: u64 = below.shards.iter().map(|s| s.size).sum();
        assert_eq!(per_shard, below.space_size);
    }

    #[test]
    fn plain_kinds_search_non_systematic() {
        // the identity already has one recovery set per unit vector
        assert_eq!(min_len(3, 1, 2, PropertyKind::Pir).min_length, Some(3));
        assert_eq!(min_len(2, 2, 2, PropertyKind::Batch).min_length, Some(3));
        assert_eq!(min_len(2, 2, 2, PropertyKind::Fpir).min_length, Some(3));
    }

    #[test]
    fn budget_is_reported() {
        let opts = SearchOptions { budget: Some(3), ..SearchOptions::default() };
        let out = find_min_length(4, 3, 2, PropertyKind::Asbatch, &opts).unwrap();
        assert_eq!(out.status, SearchStatus::BudgetExceeded);
        assert!(out.examined <= 3);
    }

    #[test]
    fn audit_counts_equivalence_at_three() {
        let opts = SearchOptions { audit: true, ..SearchOptions::default() };
        let out = find_min_length(3, 3, 2, PropertyKind::Asbatch, &opts).unwrap();
        assert_eq!(out.min_length, Some(6));
        let last = out.lengths.last().unwrap();
        assert!(last.exhausted);
        let a = last.audit.unwrap();
        assert_eq!(a.disagreements, 0);
        assert!(a.asbatch > 0);
        assert_eq!(a.candidates, last.examined);
    }

    #[test]
    fn verify_value_both_sides() {
        let c = verify_value(3, 3, 2, PropertyKind::Asbatch, 6, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(c.confirmed);
        let c = verify_value(2, 1, 3, PropertyKind::Asbatch, 2, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(c.confirmed);
        assert!(c.lower.is_none());
        let c = verify_value(3, 3, 2, PropertyKind::Asbatch, 7, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(!c.confirmed);
        assert!(c.shorter_witness.is_some());
        let c = verify_value(3, 3, 2, PropertyKind::Asbatch, 5, DEFAULT_CANDIDATE_CAP).unwrap();
        assert!(!c.confirmed);
        assert!(c.witness.is_none());
    }
}
