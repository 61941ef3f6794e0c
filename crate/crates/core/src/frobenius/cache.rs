//! On-disk table of traces for one curve.
//!
//! `<dir>/<label>.traces.csv`:
//!
//! ```text
//! # curve=32a limit=100000 version=1
//! p,a_p
//! 3,0
//! 5,-2
//! ```
//!
//! Rows list every good prime up to `limit` in increasing order. Building to
//! a larger limit keeps the existing rows and appends the missing ones; the
//! file is replaced atomically through a temporary file. A `.lock` file
//! created with `create_new` keeps concurrent builders out.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{cm_ap, theta_of, FrobeniusRecord};
use crate::curves::CurveSpec;
use crate::error::{Error, Result};
use crate::quadratic_field::splitting_type;
use crate::sieve::primes_in_range;

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedTraces {
    pub label: String,
    pub limit: u64,
    pub rows: Vec<(u64, i64)>,
}

impl CachedTraces {
    pub fn records(&self, curve: &CurveSpec) -> Result<Vec<FrobeniusRecord>> {
        self.rows
            .iter()
            .map(|&(p, a_p)| {
                Ok(FrobeniusRecord {
                    p,
                    split: splitting_type(&curve.field, p),
                    a_p,
                    theta: theta_of(a_p, p)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub p: u64,
    pub cached: i64,
    pub actual: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub rows: usize,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone)]
pub struct TraceCache {
    dir: PathBuf,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

impl TraceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, label: &str) -> PathBuf {
        self.dir.join(format!("{label}.traces.csv"))
    }

    fn lock_path(&self, label: &str) -> PathBuf {
        self.dir.join(format!("{label}.traces.csv.lock"))
    }

    fn lock(&self, label: &str) -> Result<LockGuard> {
        let path = self.lock_path(label);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(LockGuard(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::CacheLocked(path))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Reads and checks a cache file. `Ok(None)` if there is none.
    pub fn read(&self, label: &str) -> Result<Option<CachedTraces>> {
        let path = self.path_for(label);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| Error::CorruptCache {
            path: path.clone(),
            reason,
        };
        let mut lines = BufReader::new(file).lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let limit = parse_header(&header, label).map_err(corrupt)?;
        if lines.next().transpose()?.as_deref() != Some("p,a_p") {
            return Err(corrupt("missing column header".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 3;
            let (p, a) = line
                .split_once(',')
                .ok_or_else(|| corrupt(format!("line {lineno}: expected p,a_p")))?;
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| corrupt(format!("line {lineno}: bad prime {p:?}")))?;
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|_| corrupt(format!("line {lineno}: bad trace {a:?}")))?;
            if rows.last().is_some_and(|&(q, _)| q >= p) {
                return Err(corrupt(format!("line {lineno}: primes not strictly increasing")));
            }
            if p > limit {
                return Err(corrupt(format!("line {lineno}: {p} above limit {limit}")));
            }
            if (a as i128) * (a as i128) > 4 * p as i128 {
                return Err(corrupt(format!("line {lineno}: a_p = {a} breaks the Hasse bound")));
            }
            rows.push((p, a));
        }
        Ok(Some(CachedTraces {
            label: label.to_string(),
            limit,
            rows,
        }))
    }

    /// Ensures the cache covers every good prime up to `limit`. Existing
    /// rows are kept as they are.
    pub fn build(&self, curve: &CurveSpec, limit: u64) -> Result<CachedTraces> {
        fs::create_dir_all(&self.dir)?;
        let _guard = self.lock(&curve.label)?;
        let existing = self.read(&curve.label)?;
        let (mut rows, from) = match existing {
            Some(c) if c.limit >= limit => return Ok(c),
            Some(c) => (c.rows, c.limit + 1),
            None => (Vec::new(), 2),
        };
        let primes: Vec<u64> = primes_in_range(from, limit)?
            .filter(|&p| !curve.is_bad(p))
            .collect();
        let fresh: Vec<(u64, i64)> = primes
            .par_iter()
            .map(|&p| cm_ap(curve, p).map(|a| (p, a)))
            .collect::<Result<_>>()?;
        rows.extend(fresh);
        let cached = CachedTraces {
            label: curve.label.clone(),
            limit,
            rows,
        };
        self.write(&cached)?;
        Ok(cached)
    }

    fn write(&self, c: &CachedTraces) -> Result<()> {
        let path = self.path_for(&c.label);
        let tmp = self.dir.join(format!("{}.traces.csv.tmp", c.label));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            writeln!(w, "# curve={} limit={} version={}", c.label, c.limit, CACHE_VERSION)?;
            writeln!(w, "p,a_p")?;
            for (p, a) in &c.rows {
                writeln!(w, "{p},{a}")?;
            }
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Reads the cache, building (or extending) it first if it does not
    /// reach `limit`.
    pub fn load_or_build(&self, curve: &CurveSpec, limit: u64) -> Result<CachedTraces> {
        match self.read(&curve.label)? {
            Some(c) if c.limit >= limit => Ok(c),
            _ => self.build(curve, limit),
        }
    }

    /// Recomputes a random `fraction` of the rows with [`cm_ap`]. Structure
    /// and the Hasse bound are checked on every row by [`TraceCache::read`].
    pub fn verify(&self, curve: &CurveSpec, fraction: f64, seed: u64) -> Result<VerifyReport> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidInput(format!("sample fraction {fraction} not in [0, 1]")));
        }
        let cached = self.read(&curve.label)?.ok_or_else(|| {
            Error::InvalidInput(format!("no cache for {} in {}", curve.label, self.dir.display()))
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample: Vec<(u64, i64)> = cached
            .rows
            .iter()
            .copied()
            .filter(|_| fraction >= 1.0 || rng.gen::<f64>() < fraction)
            .collect();
        let mut mismatches: Vec<Mismatch> = sample
            .par_iter()
            .map(|&(p, cached)| {
                let actual = cm_ap(curve, p)?;
                Ok((cached != actual).then_some(Mismatch { p, cached, actual }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        mismatches.sort_by_key(|m| m.p);
        Ok(VerifyReport {
            rows: cached.rows.len(),
            checked: sample.len(),
            mismatches,
        })
    }

    /// Removes the cache file; returns whether there was one.
    pub fn clear(&self, label: &str) -> Result<bool> {
        match fs::remove_file(self.path_for(label)) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(e.into()),
        }
    }
}

fn parse_header(line: &str, label: &str) -> std::result::Result<u64, String> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| "missing header line".to_string())?;
    let (mut curve, mut limit, mut version) = (None, None, None);
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("curve", v)) => curve = Some(v),
            Some(("limit", v)) => limit = v.parse::<u64>().ok(),
            Some(("version", v)) => version = v.parse::<u32>().ok(),
            _ => {}
        }
    }
    if curve != Some(label) {
        return Err(format!("header names curve {curve:?}, expected {label}"));
    }
    if version != Some(CACHE_VERSION) {
        return Err(format!("unsupported version {version:?}"));
    }
    limit.ok_or_else(|| "header has no limit".to_string())
}
