//! The table distribution under the null and the exact P-value.
//!
//! Each table gets a weight `h(x)`: the null likelihood integrated over the
//! nuisance parameters against a uniform prior. Normalizing `h` over the
//! design's space gives `Pr(x | H)`, and the exact P-value of an observed
//! table is the probability of all tables whose `λ` is no larger.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lrt::log_lambda_unchecked;
use crate::special::{log_factorial, LogSumExp};
use crate::table::{count_tables, enumerate_tables, ContingencyTable, Design, HypothesisSpec};

/// Default ceiling on the number of tables a distribution may enumerate.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// `ln h(x)` for the design in `spec`.
///
/// * homogeneity: `Π n_i! / Π x_ij! · Π n_.j! / (n + c - 1)!`
/// * independence: `n! / Π x_ij! · Π n_i. ! / (n + l - 1)! · Π n_.j! / (n + c - 1)!`
/// * Hardy–Weinberg: `n! / (x1! x2! x3!) · 2^x2 (2x1 + x2)! (2x3 + x2)! / (2n + 1)!`
pub fn log_h(table: &ContingencyTable, spec: &HypothesisSpec) -> Result<f64> {
    spec.check(table)?;
    Ok(log_h_unchecked(table, spec))
}

fn sum_log_fact(xs: &[u64]) -> f64 {
    xs.iter().map(|&x| log_factorial(x)).sum()
}

pub(crate) fn log_h_unchecked(table: &ContingencyTable, spec: &HypothesisSpec) -> f64 {
    let n = table.total();
    let cells = sum_log_fact(table.cells());
    match spec.design() {
        Design::Homogeneity { cols, .. } => {
            sum_log_fact(table.row_margins()) - cells + sum_log_fact(table.col_margins())
                - log_factorial(n + *cols as u64 - 1)
        }
        Design::Independence { rows, cols, .. } => {
            log_factorial(n) - cells + sum_log_fact(table.row_margins())
                - log_factorial(n + *rows as u64 - 1)
                + sum_log_fact(table.col_margins())
                - log_factorial(n + *cols as u64 - 1)
        }
        Design::HardyWeinberg { .. } => {
            let c = table.cells();
            log_factorial(n) - cells
                + c[1] as f64 * 2f64.ln()
                + log_factorial(2 * c[0] + c[1])
                + log_factorial(2 * c[2] + c[1])
                - log_factorial(2 * n + 1)
        }
    }
}

/// True when two `ln λ` values are treated as the same statistic.
pub fn lambda_ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= tie_tolerance(a)
}

#[inline]
fn tie_tolerance(log_lambda: f64) -> f64 {
    1e-9 * log_lambda.abs().max(1.0)
}

/// One table of the space, in enumeration order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactEntry {
    pub log_h: f64,
    pub log_prob: f64,
    pub log_lambda: f64,
}

/// The enumerated space with normalized probabilities and a `λ`-sorted
/// cumulative index.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    spec: HypothesisSpec,
    entries: Vec<ExactEntry>,
    log_norm: f64,
    sorted_log_lambda: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ExactDistribution {
    /// Enumerates the space of `spec` if it holds at most `budget` tables.
    pub fn build_with_budget(spec: &HypothesisSpec, budget: u128) -> Result<Self> {
        let count = count_tables(spec);
        if count > budget {
            return Err(Error::BudgetExceeded { count, budget });
        }
        let mut entries = Vec::with_capacity(count as usize);
        let mut norm = LogSumExp::default();
        for table in enumerate_tables(spec) {
            let log_h = log_h_unchecked(&table, spec);
            norm.push(log_h);
            entries.push(ExactEntry {
                log_h,
                log_prob: 0.0,
                log_lambda: log_lambda_unchecked(&table, spec),
            });
        }
        let log_norm = norm.value();
        for e in &mut entries {
            e.log_prob = e.log_h - log_norm;
        }
        Ok(Self::from_parts(spec.clone(), entries, log_norm))
    }

    fn from_parts(spec: HypothesisSpec, entries: Vec<ExactEntry>, log_norm: f64) -> Self {
        let mut order: Vec<(f64, f64)> = entries.iter().map(|e| (e.log_lambda, e.log_prob.exp())).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cumulative = Vec::with_capacity(order.len());
        // Neumaier-compensated running sum
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &(_, p) in &order {
            let t = sum + p;
            if sum.abs() >= p.abs() {
                comp += (sum - t) + p;
            } else {
                comp += (p - t) + sum;
            }
            sum = t;
            cumulative.push(sum + comp);
        }
        Self {
            spec,
            entries,
            log_norm,
            sorted_log_lambda: order.into_iter().map(|(l, _)| l).collect(),
            cumulative,
        }
    }

    pub fn spec(&self) -> &HypothesisSpec {
        &self.spec
    }

    /// Per-table values, aligned with [`enumerate_tables`] order.
    pub fn entries(&self) -> &[ExactEntry] {
        &self.entries
    }

    /// `ln Σ h` over the space.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `ln λ` values in nondecreasing order.
    pub fn sorted_log_lambda(&self) -> &[f64] {
        &self.sorted_log_lambda
    }

    /// Cumulative probabilities aligned with [`Self::sorted_log_lambda`].
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `Pr(ln λ(X) ≤ log_lambda | H)`, counting ties as included.
    pub fn p_value_for_log_lambda(&self, log_lambda: f64) -> f64 {
        let bound = log_lambda + tie_tolerance(log_lambda);
        let k = self.sorted_log_lambda.partition_point(|&l| l <= bound);
        if k == 0 {
            0.0
        } else if k == self.cumulative.len() {
            1.0
        } else {
            self.cumulative[k - 1].min(1.0)
        }
    }

    /// Exact P-value of an observed table of this space.
    pub fn p_value(&self, observed: &ContingencyTable) -> Result<f64> {
        self.spec.check(observed)?;
        Ok(self.p_value_for_log_lambda(log_lambda_unchecked(observed, &self.spec)))
    }

    /// Stable 64-bit key of the design.
    pub fn fingerprint(spec: &HypothesisSpec) -> u64 {
        let digest = Sha256::digest(spec.canonical().as_bytes());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(head)
    }

    /// File name used for this design inside a cache directory.
    pub fn cache_file_name(spec: &HypothesisSpec) -> String {
        format!("{:016x}.ctxd", Self::fingerprint(spec))
    }

    /// Writes the distribution in the binary cache format.
    ///
    /// Layout, all little-endian: magic `CTXD`, `u32` version, `u64`
    /// fingerprint, `u32` length plus the canonical design text, `u64` table
    /// count, `f64` log-normalizer, then per table in enumeration order the
    /// `f64` triple `(log_h, log_prob, log_lambda)`.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        let canonical = self.spec.canonical();
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&Self::fingerprint(&self.spec).to_le_bytes())?;
        w.write_all(&(canonical.len() as u32).to_le_bytes())?;
        w.write_all(canonical.as_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        w.write_all(&self.log_norm.to_le_bytes())?;
        for e in &self.entries {
            w.write_all(&e.log_h.to_le_bytes())?;
            w.write_all(&e.log_prob.to_le_bytes())?;
            w.write_all(&e.log_lambda.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache written for `spec`; rejects any other design.
    pub fn read_cache<R: Read>(spec: &HypothesisSpec, mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let fingerprint = read_u64(&mut r)?;
        let len = read_u32(&mut r)? as usize;
        let mut text = vec![0u8; len];
        r.read_exact(&mut text)?;
        if fingerprint != Self::fingerprint(spec) || text != spec.canonical().as_bytes() {
            return Err(Error::Cache(format!(
                "cache was written for {:?}, not {}",
                String::from_utf8_lossy(&text),
                spec
            )));
        }
        let count = read_u64(&mut r)?;
        if u128::from(count) != count_tables(spec) {
            return Err(Error::Cache(format!("cache holds {count} tables")));
        }
        let log_norm = read_f64(&mut r)?;
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            entries.push(ExactEntry {
                log_h: read_f64(&mut r)?,
                log_prob: read_f64(&mut r)?,
                log_lambda: read_f64(&mut r)?,
            });
        }
        Ok(Self::from_parts(spec.clone(), entries, log_norm))
    }

    /// Loads `spec`'s distribution from `dir`, building and storing it on a
    /// miss.
    pub fn cached(spec: &HypothesisSpec, dir: &Path, budget: u128) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(spec));
        if let Ok(file) = File::open(&path) {
            if let Ok(dist) = Self::read_cache(spec, BufReader::new(file)) {
                return Ok(dist);
            }
        }
        let dist = Self::build_with_budget(spec, budget)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        dist.write_cache(BufWriter::new(File::create(&tmp)?))?;
        std::fs::rename(&tmp, &path)?;
        Ok(dist)
    }
}

const CACHE_MAGIC: &[u8; 4] = b"CTXD";
const CACHE_VERSION: u32 = 1;

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Builds the distribution with the default budget.
pub fn build_distribution(spec: &HypothesisSpec) -> Result<ExactDistribution> {
    ExactDistribution::build_with_budget(spec, DEFAULT_BUDGET)
}

/// Exact P-value of `observed` under `dist`.
pub fn exact_p_value(dist: &ExactDistribution, observed: &ContingencyTable) -> Result<f64> {
    dist.p_value(observed)
}
