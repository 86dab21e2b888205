//! The six code properties and the largest `t` for which each holds.
//!
//! Every checker enumerates the request family of its kind in a fixed order
//! and asks the packer for disjoint recovery sets. Families are computed once
//! per target value before the (parallel) sweep over requests.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{decode_vector, GeneratorMatrix};
use crate::recovery::{binomial, for_each_combination, Packer, RecoveryPlan, Request, Server};

/// Largest request family any checker will enumerate.
pub const DEFAULT_REQUEST_CAP: u128 = 100_000_000;

const CHUNK: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Pir,
    Batch,
    Fpir,
    Fbatch,
    Aspir,
    Asbatch,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 6] = [
        PropertyKind::Pir,
        PropertyKind::Batch,
        PropertyKind::Fpir,
        PropertyKind::Fbatch,
        PropertyKind::Aspir,
        PropertyKind::Asbatch,
    ];

    /// PIR-type kinds request a single target `t` times.
    pub fn is_pir_type(self) -> bool {
        matches!(self, PropertyKind::Pir | PropertyKind::Fpir | PropertyKind::Aspir)
    }

    pub fn is_all_symbol(self) -> bool {
        matches!(self, PropertyKind::Aspir | PropertyKind::Asbatch)
    }

    pub fn is_functional(self) -> bool {
        matches!(self, PropertyKind::Fpir | PropertyKind::Fbatch)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyKind::Pir => "pir",
            PropertyKind::Batch => "batch",
            PropertyKind::Fpir => "fpir",
            PropertyKind::Fbatch => "fbatch",
            PropertyKind::Aspir => "aspir",
            PropertyKind::Asbatch => "asbatch",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<PropertyKind> {
        PropertyKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: PropertyKind,
    pub t: usize,
    pub holds: bool,
    pub requests_checked: u64,
    /// First unservable request in enumeration order.
    pub counterexample: Option<Request>,
    /// Request and plan for the last request of the family, when it holds.
    pub witness: Option<(Request, RecoveryPlan)>,
}

/// Distinct column values in first-occurrence order.
pub fn distinct_columns(g: &GeneratorMatrix) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::new();
    for c in g.columns() {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Targets the request family of `kind` is built from.
pub fn base_targets(g: &GeneratorMatrix, kind: PropertyKind) -> Result<Vec<Vec<u8>>> {
    let k = g.k();
    let q = g.field().order();
    Ok(match kind {
        PropertyKind::Pir | PropertyKind::Batch => (0..k)
            .map(|i| (0..k).map(|j| u8::from(i == j)).collect())
            .collect(),
        PropertyKind::Fpir | PropertyKind::Fbatch => {
            let size = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
            if size > DEFAULT_REQUEST_CAP {
                return Err(Error::CapExceeded { size, cap: DEFAULT_REQUEST_CAP });
            }
            (1..size as u64).map(|code| decode_vector(code, q, k)).collect()
        }
        PropertyKind::Aspir | PropertyKind::Asbatch => distinct_columns(g),
    })
}

/// Nondecreasing `t`-tuples over `0..d` in colexicographic order.
pub struct ColexMultisets {
    d: usize,
    cur: Vec<usize>,
    started: bool,
    done: bool,
}

impl ColexMultisets {
    pub fn new(d: usize, t: usize) -> ColexMultisets {
        ColexMultisets { d, cur: vec![0; t], started: false, done: d == 0 }
    }
}

impl Iterator for ColexMultisets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.cur.clone());
        }
        let t = self.cur.len();
        let j = (0..t).find(|&j| {
            let bound = if j + 1 < t { self.cur[j + 1] } else { self.d - 1 };
            self.cur[j] < bound
        });
        match j {
            None => {
                self.done = true;
                None
            }
            Some(j) => {
                self.cur[j] += 1;
                for slot in &mut self.cur[..j] {
                    *slot = 0;
                }
                Some(self.cur.clone())
            }
        }
    }
}

/// Run-length groups `(base index, multiplicity)` of a sorted tuple.
fn groups(tuple: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in tuple {
        match out.last_mut() {
            Some((j, m)) if *j == i => *m += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

fn request_of(base: &[Vec<u8>], grouped: &[(usize, usize)]) -> Request {
    Request::new(grouped.iter().map(|&(i, m)| (base[i].clone(), m)).collect()).expect("valid request")
}

struct Checker<'g> {
    server: Server<'g>,
    base: Vec<Vec<u8>>,
    /// Family per base target; `None` for the zero vector.
    families: Vec<Option<Vec<u64>>>,
    n: usize,
}

impl<'g> Checker<'g> {
    fn new(g: &'g GeneratorMatrix, kind: PropertyKind, max_size: usize) -> Result<Checker<'g>> {
        let base = base_targets(g, kind)?;
        let mut server = Server::bounded(g, max_size);
        if kind.is_all_symbol() {
            server.prepare_columns()?;
        } else {
            server.prepare(base.iter().map(|v| v.as_slice()))?;
        }
        let families = base
            .iter()
            .map(|v| {
                if v.iter().all(|&x| x == 0) {
                    Ok(None)
                } else {
                    server.family(v).map(|f| Some(f.into_owned()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Checker { server, base, families, n: g.n() })
    }

    fn servable(&self, packer: &mut Packer, grouped: &[(usize, usize)]) -> bool {
        let mut fams: Vec<&[u64]> = Vec::with_capacity(grouped.len());
        let mut demands: Vec<usize> = Vec::with_capacity(grouped.len());
        for &(i, m) in grouped {
            if let Some(f) = &self.families[i] {
                fams.push(f);
                demands.push(m);
            }
        }
        packer.feasible(&fams, &demands)
    }

    /// Index of the first unservable tuple in `chunk`.
    fn first_failure(&self, chunk: &[Vec<(usize, usize)>]) -> Option<usize> {
        let results: Vec<bool> = chunk
            .par_iter()
            .map_init(|| Packer::new(self.n), |p, grouped| self.servable(p, grouped))
            .collect();
        results.iter().position(|&ok| !ok)
    }
}

/// Decides property `kind` at level `t`.
pub fn check(g: &GeneratorMatrix, kind: PropertyKind, t: usize) -> Result<Verdict> {
    check_bounded(g, kind, t, g.n())
}

/// As [`check`], using only recovery sets of at most `max_size` columns.
pub fn check_bounded(g: &GeneratorMatrix, kind: PropertyKind, t: usize, max_size: usize) -> Result<Verdict> {
    if t == 0 {
        return Err(Error::InvalidParameters("t must be at least 1".into()));
    }
    let checker = Checker::new(g, kind, max_size)?;
    let d = checker.base.len();
    let total = if kind.is_pir_type() { d as u128 } else { binomial((d + t - 1) as u64, t as u64) };
    if total > DEFAULT_REQUEST_CAP {
        return Err(Error::CapExceeded { size: total, cap: DEFAULT_REQUEST_CAP });
    }

    let mut tuples: Box<dyn Iterator<Item = Vec<(usize, usize)>>> = if kind.is_pir_type() {
        Box::new((0..d).map(move |i| vec![(i, t)]))
    } else {
        Box::new(ColexMultisets::new(d, t).map(|tup| groups(&tup)))
    };
    let mut checked: u64 = 0;
    let mut last: Option<Vec<(usize, usize)>> = None;
    loop {
        let chunk: Vec<Vec<(usize, usize)>> = tuples.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        if let Some(pos) = checker.first_failure(&chunk) {
            checked += pos as u64 + 1;
            return Ok(Verdict {
                kind,
                t,
                holds: false,
                requests_checked: checked,
                counterexample: Some(request_of(&checker.base, &chunk[pos])),
                witness: None,
            });
        }
        checked += chunk.len() as u64;
        last = chunk.into_iter().last();
    }
    let witness = match last {
        Some(grouped) => {
            let req = request_of(&checker.base, &grouped);
            let plan = checker.server.serve(&req)?.expect("request was found servable");
            Some((req, plan))
        }
        None => None,
    };
    Ok(Verdict { kind, t, holds: true, requests_checked: checked, counterexample: None, witness })
}

/// Upper limit on `t` for the all-symbol kinds from the dual distance:
/// `t <= (n-1)/(d_dual-1) + 1`. `None` when a zero column makes it vacuous.
pub fn dual_distance_limit(g: &GeneratorMatrix) -> Result<Option<usize>> {
    Ok(match g.dual_min_distance()? {
        None => Some(1),
        Some(1) => None,
        Some(d) => Some((g.n() - 1) / (d - 1) + 1),
    })
}

/// Largest `t` for which `kind` holds. The scan runs upward from 1; a failure
/// at `t` implies failure at every larger `t` since the request families grow
/// by containment.
pub fn max_t(g: &GeneratorMatrix, kind: PropertyKind) -> Result<usize> {
    let mut limit = g.n();
    if kind.is_all_symbol() {
        if let Some(l) = dual_distance_limit(g)? {
            limit = limit.min(l);
        }
    }
    max_t_up_to(g, kind, limit)
}

/// Upward scan without the dual-distance shortcut, stopping at `limit`.
pub fn max_t_up_to(g: &GeneratorMatrix, kind: PropertyKind, limit: usize) -> Result<usize> {
    let mut best = 0;
    for t in 1..=limit {
        if !check(g, kind, t)?.holds {
            break;
        }
        best = t;
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependentListsReport {
    pub k: usize,
    pub lists: usize,
    pub lists_checked: u64,
    pub holds: bool,
    pub counterexample: Option<Request>,
}

/// Checks that every request `{v_1^{t_1}, ..., v_l^{t_l}}` with linearly
/// independent columns `v_i` of the binary simplex code and
/// `t_1 + ... + t_l = 2^(k-1)` (all `t_i >= 1`) is servable.
pub fn check_independent_lists(g: &GeneratorMatrix, lists: usize) -> Result<IndependentListsReport> {
    let k = g.k();
    if g.field().order() != 2 || k > 4 {
        return Err(Error::InvalidParameters("binary simplex codes with k <= 4 only".into()));
    }
    let mut cols = g.columns();
    cols.sort();
    let mut expected: Vec<Vec<u8>> = (1..1u64 << k).map(|c| decode_vector(c, 2, k)).collect();
    expected.sort();
    if cols != expected {
        return Err(Error::InvalidParameters("matrix is not a binary simplex generator".into()));
    }
    if lists == 0 || lists > k {
        return Err(Error::InvalidParameters(format!("list size must lie in 1..={k}")));
    }
    let total = 1usize << (k - 1);
    let mut server = Server::new(g);
    server.prepare_columns()?;
    let columns = g.columns();
    let mut compositions: Vec<Vec<usize>> = Vec::new();
    for_each_combination(total - 1, lists - 1, |cuts| {
        let mut parts = Vec::with_capacity(lists);
        let mut prev = 0;
        for &c in cuts {
            parts.push(c + 1 - prev);
            prev = c + 1;
        }
        parts.push(total - prev);
        compositions.push(parts);
    });

    let mut checked = 0u64;
    let mut failure: Option<Request> = None;
    let mut outcome: Result<()> = Ok(());
    for_each_combination(g.n(), lists, |subset| {
        if failure.is_some() || outcome.is_err() {
            return;
        }
        if g.select_columns(subset).rank() != lists {
            return;
        }
        for parts in &compositions {
            let req = Request::new(
                subset.iter().zip(parts).map(|(&j, &m)| (columns[j].clone(), m)).collect(),
            )
            .expect("valid request");
            checked += 1;
            match server.can_serve(&req) {
                Ok(true) => {}
                Ok(false) => {
                    failure = Some(req);
                    return;
                }
                Err(e) => {
                    outcome = Err(e);
                    return;
                }
            }
        }
    });
    outcome?;
    Ok(IndependentListsReport {
        k,
        lists,
        lists_checked: checked,
        holds: failure.is_none(),
        counterexample: failure,
    })
}
