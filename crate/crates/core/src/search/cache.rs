//! Append-only result cache, one JSON record per line.
//!
//! Two record types share a file: finished outcomes, and exhausted shards of
//! searches still in progress. The latter let an interrupted search resume
//! shard by shard.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{find_min_length_with, Journal, SearchOptions, SearchOutcome, SearchStatus, ShardRecord, STRATEGY_VERSION};
use crate::error::{Error, Result};
use crate::field::field_of_order;
use crate::properties::PropertyKind;

pub const CACHE_ENV: &str = "ASBPIR_CACHE";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub k: usize,
    pub t: usize,
    pub p: u32,
    pub e: u32,
    pub kind: PropertyKind,
    pub strategy: String,
}

impl CacheKey {
    pub fn new(k: usize, t: usize, q: u32, kind: PropertyKind) -> Result<CacheKey> {
        let f = field_of_order(q)?;
        Ok(CacheKey { k, t, p: f.characteristic(), e: f.degree(), kind, strategy: STRATEGY_VERSION.to_string() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Outcome { key: CacheKey, outcome: SearchOutcome },
    Progress { key: CacheKey, n: usize, shard: ShardRecord },
}

pub struct Cache {
    path: PathBuf,
    outcomes: HashMap<CacheKey, SearchOutcome>,
    progress: HashMap<(CacheKey, usize, usize), ShardRecord>,
    writer: Mutex<Option<File>>,
}

impl Cache {
    /// Loads the cache at `path`; a missing file is an empty cache. Torn
    /// records from interrupted writes are ignored.
    pub fn open(path: &Path) -> Result<Cache> {
        let mut cache = Cache {
            path: path.to_path_buf(),
            outcomes: HashMap::new(),
            progress: HashMap::new(),
            writer: Mutex::new(None),
        };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        let lines: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::Cache(e.to_string()))?;
        let last = lines.len().saturating_sub(1);
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Record>(line) {
                Ok(Record::Outcome { key, outcome }) => {
                    cache.outcomes.insert(key, outcome);
                }
                Ok(Record::Progress { key, n, shard }) => {
                    cache.progress.insert((key, n, shard.shard), shard);
                }
                // torn record from an interrupted write
                Err(e) if i == last || e.is_eof() => {}
                Err(e) => return Err(Error::Cache(format!("{}:{}: {e}", path.display(), i + 1))),
            }
        }
        Ok(cache)
    }

    /// Path from the environment, if set.
    pub fn from_env() -> Result<Option<Cache>> {
        match std::env::var_os(CACHE_ENV) {
            Some(p) if !p.is_empty() => Cache::open(Path::new(&p)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn outcome(&self, key: &CacheKey) -> Option<&SearchOutcome> {
        self.outcomes.get(key)
    }

    fn append(&self, record: &Record) -> Result<()> {
        let line = serde_json::to_string(record).map_err(|e| Error::Cache(e.to_string()))?;
        let mut guard = self.writer.lock().expect("cache writer poisoned");
        if guard.is_none() {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| Error::Cache(format!("{}: {e}", self.path.display())))?;
            // start on a fresh line after a torn record
            if f.metadata().map(|m| m.len() > 0).unwrap_or(false) && !ends_with_newline(&self.path) {
                writeln!(f).map_err(|e| Error::Cache(e.to_string()))?;
            }
            *guard = Some(f);
        }
        let f = guard.as_mut().expect("opened above");
        writeln!(f, "{line}").and_then(|_| f.flush()).map_err(|e| Error::Cache(e.to_string()))
    }

    pub fn store(&mut self, outcome: &SearchOutcome) -> Result<()> {
        let key = CacheKey::new(outcome.k, outcome.t, outcome.q, outcome.kind)?;
        self.append(&Record::Outcome { key: key.clone(), outcome: outcome.clone() })?;
        self.outcomes.insert(key, outcome.clone());
        Ok(())
    }

    /// Runs a search unless a finished outcome is cached. Only default
    /// searches (no explicit start, end or audit) use and fill the outcome
    /// cache; every search records and reuses exhausted shards.
    pub fn search(&mut self, k: usize, t: usize, q: u32, kind: PropertyKind, opts: &SearchOptions) -> Result<SearchOutcome> {
        let key = CacheKey::new(k, t, q, kind)?;
        let plain = opts.n_start.is_none() && opts.n_end.is_none() && !opts.audit;
        if plain {
            if let Some(hit) = self.outcomes.get(&key) {
                let mut hit = hit.clone();
                hit.from_cache = true;
                return Ok(hit);
            }
        }
        let journal = CacheJournal { cache: self, key: key.clone() };
        let outcome = find_min_length_with(k, t, q, kind, opts, &journal)?;
        if plain && outcome.status == SearchStatus::Found && outcome.witness_verified {
            self.store(&outcome)?;
        }
        Ok(outcome)
    }
}

fn ends_with_newline(path: &Path) -> bool {
    let Ok(mut f) = File::open(path) else { return true };
    let mut last = [0u8];
    f.seek(SeekFrom::End(-1)).and_then(|_| f.read_exact(&mut last)).map_or(true, |_| last[0] == b'\n')
}

struct CacheJournal<'c> {
    cache: &'c Cache,
    key: CacheKey,
}

impl Journal for CacheJournal<'_> {
    fn completed(&self, n: usize, shard: usize) -> Option<ShardRecord> {
        self.cache.progress.get(&(self.key.clone(), n, shard)).cloned()
    }

    fn record(&self, n: usize, shard: &ShardRecord) -> Result<()> {
        if self.completed(n, shard.shard).is_some() {
            return Ok(());
        }
        self.cache.append(&Record::Progress { key: self.key.clone(), n, shard: shard.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcomes_round_trip_and_hit() {
        let dir = std::env::temp_dir().join(format!("asbpir-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cache.jsonl");
        let _ = std::fs::remove_file(&path);

        let mut cache = Cache::open(&path).unwrap();
        let first = cache.search(2, 3, 2, PropertyKind::Asbatch, &SearchOptions::default()).unwrap();
        assert_eq!(first.min_length, Some(5));
        assert!(!first.from_cache);

        let mut reopened = Cache::open(&path).unwrap();
        let again = reopened.search(2, 3, 2, PropertyKind::Asbatch, &SearchOptions::default()).unwrap();
        assert!(again.from_cache);
        assert_eq!(again.witness, first.witness);
        assert!(!reopened.progress.is_empty());

        // a torn last line is tolerated
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "{{\"record\":\"outc").unwrap();
        drop(f);
        let mut torn = Cache::open(&path).unwrap();
        torn.store(&first).unwrap();
        assert!(Cache::open(&path).unwrap().outcome(&CacheKey::new(2, 3, 2, PropertyKind::Asbatch).unwrap()).is_some());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn progress_is_reused() {
        let dir = std::env::temp_dir().join(format!("asbpir-progress-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cache.jsonl");
        let _ = std::fs::remove_file(&path);
        let opts = SearchOptions { n_start: Some(5), n_end: Some(5), ..SearchOptions::default() };
        let mut cache = Cache::open(&path).unwrap();
        let a = cache.search(3, 3, 2, PropertyKind::Asbatch, &opts).unwrap();
        assert_eq!(a.status, SearchStatus::NotFoundInRange);
        let mut cache = Cache::open(&path).unwrap();
        let b = cache.search(3, 3, 2, PropertyKind::Asbatch, &opts).unwrap();
        assert_eq!(b.lengths[0].shards, a.lengths[0].shards);
        assert!(!cache.progress.is_empty());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
