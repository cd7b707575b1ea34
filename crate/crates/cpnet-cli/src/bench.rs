//! Containment benchmark over a (n, r, r') grid.
//!
//! Each cell generates one instance from a seed derived from the cell
//! coordinates, then times [`cpnet::tcn_contains`] alone: generation,
//! parsing and I/O happen strictly outside the timed region. Cells run in
//! parallel (`CPNET_THREADS` caps the worker count) and the record order is
//! independent of scheduling.

use std::time::Instant;

use cpnet::{make_instance, tcn_contains, GenError, InstanceKind};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Inclusive arithmetic range used for each of the three grid axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub min: usize,
    pub max: usize,
    pub step: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<usize> {
        (self.min..=self.max).step_by(self.step.max(1)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    /// Axis shared by n, r and r'; cells keep only r' <= r.
    pub grid: GridSpec,
    /// Instances per (cell, kind).
    pub replicates: u64,
    pub base_seed: u64,
    /// Timed repetitions per instance; the median is recorded.
    pub runs: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid: GridSpec {
                min: 100,
                max: 1000,
                step: 100,
            },
            replicates: 2,
            base_seed: 0xbe7c_4a11,
            runs: 3,
        }
    }
}

/// One timed containment query.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub r: usize,
    pub r_prime: usize,
    pub kind: InstanceKindTag,
    pub result: bool,
    pub seconds: f64,
    pub seed: u64,
}

/// Serializable mirror of [`InstanceKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKindTag {
    Yes,
    No,
}

impl From<InstanceKind> for InstanceKindTag {
    fn from(k: InstanceKind) -> Self {
        match k {
            InstanceKind::Yes => InstanceKindTag::Yes,
            InstanceKind::No => InstanceKindTag::No,
        }
    }
}

impl std::fmt::Display for InstanceKindTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InstanceKindTag::Yes => "yes",
            InstanceKindTag::No => "no",
        })
    }
}

fn cells(cfg: &BenchConfig) -> Vec<(usize, usize, usize, InstanceKind, u64)> {
    let axis = cfg.grid.values();
    let mut out = Vec::new();
    for &n in &axis {
        for &r in &axis {
            for &r_prime in &axis {
                if r_prime > r {
                    continue;
                }
                for kind in [InstanceKind::Yes, InstanceKind::No] {
                    for rep in 0..cfg.replicates {
                        out.push((n, r, r_prime, kind, rep));
                    }
                }
            }
        }
    }
    out
}

fn run_cell(
    n: usize,
    r: usize,
    r_prime: usize,
    kind: InstanceKind,
    base_seed: u64,
    rep: u64,
    runs: u32,
) -> Result<BenchRecord, GenError> {
    let inst = make_instance(n, r, r_prime, kind, base_seed, rep)?;
    let mut times: Vec<f64> = Vec::with_capacity(runs.max(1) as usize);
    let mut result = false;
    for _ in 0..runs.max(1) {
        let start = Instant::now();
        let answer = tcn_contains(&inst.big, &inst.small).expect("generated instances satisfy the kernel preconditions");
        times.push(start.elapsed().as_secs_f64());
        result = answer;
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let seconds = times[times.len() / 2];
    Ok(BenchRecord {
        n,
        r,
        r_prime,
        kind: kind.into(),
        result,
        seconds,
        seed: inst.seed,
    })
}

/// Runs the whole grid. Returns the records in deterministic cell order
/// plus one message per failed cell; failures skip the row and the run
/// continues.
pub fn run_benchmark(cfg: &BenchConfig) -> (Vec<BenchRecord>, Vec<String>) {
    let work = cells(cfg);
    let pool = std::env::var("CPNET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .and_then(|t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .ok()
        });
    let run_all = || {
        work.par_iter()
            .map(|&(n, r, rp, kind, rep)| {
                run_cell(n, r, rp, kind, cfg.base_seed, rep, cfg.runs).map_err(|e| {
                    format!("cell n={n} r={r} r_prime={rp} kind={kind} replicate={rep}: {e}")
                })
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match &pool {
        Some(p) => p.install(run_all),
        None => run_all(),
    };
    let mut records = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(msg) => errors.push(msg),
        }
    }
    (records, errors)
}

/// CSV with the fixed header `n,r,r_prime,kind,result,seconds,seed`.
pub fn write_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("n,r,r_prime,kind,result,seconds,seed\n");
    for rec in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.9},{}\n",
            rec.n,
            rec.r,
            rec.r_prime,
            rec.kind,
            if rec.result { "yes" } else { "no" },
            rec.seconds,
            rec.seed
        ));
    }
    out
}

/// Which records a fit runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    All,
    Yes,
    No,
}

impl Split {
    fn keeps(self, rec: &BenchRecord) -> bool {
        match self {
            Split::All => true,
            Split::Yes => rec.kind == InstanceKindTag::Yes,
            Split::No => rec.kind == InstanceKindTag::No,
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::All => "all",
            Split::Yes => "yes",
            Split::No => "no",
        })
    }
}

/// Least-squares fit of `seconds = a*n + b*r + c*r_prime` forced through
/// the origin, with the matching zero-intercept R².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub split: Split,
    pub rows: usize,
    pub slope_leaves: f64,
    pub slope_r: f64,
    pub slope_r_prime: f64,
    pub r_squared: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("split {0} has {1} records; a three-predictor fit needs at least 3")]
    TooFewRecords(Split, usize),
    #[error("design matrix for split {0} is singular; the predictors do not vary independently")]
    Degenerate(Split),
}

pub fn fit(records: &[BenchRecord], split: Split) -> Result<FitReport, FitError> {
    let rows: Vec<&BenchRecord> = records.iter().filter(|r| split.keeps(r)).collect();
    if rows.len() < 3 {
        return Err(FitError::TooFewRecords(split, rows.len()));
    }
    // Normal equations (X^T X) beta = X^T y for the three predictors.
    let mut a = [[0f64; 3]; 3];
    let mut v = [0f64; 3];
    let mut y_sq = 0f64;
    for rec in &rows {
        let x = [rec.n as f64, rec.r as f64, rec.r_prime as f64];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += x[i] * x[j];
            }
            v[i] += x[i] * rec.seconds;
        }
        y_sq += rec.seconds * rec.seconds;
    }
    let beta = solve3(a, v).ok_or(FitError::Degenerate(split))?;
    let mut ss_res = 0f64;
    for rec in &rows {
        let pred =
            beta[0] * rec.n as f64 + beta[1] * rec.r as f64 + beta[2] * rec.r_prime as f64;
        let e = rec.seconds - pred;
        ss_res += e * e;
    }
    let r_squared = if y_sq > 0.0 { 1.0 - ss_res / y_sq } else { 1.0 };
    Ok(FitReport {
        split,
        rows: rows.len(),
        slope_leaves: beta[0],
        slope_r: beta[1],
        slope_r_prime: beta[2],
        r_squared,
    })
}

/// Gaussian elimination with partial pivoting on a 3x3 system; `None` when
/// the matrix is numerically singular.
fn solve3(mut a: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite")
        })?;
        if a[pivot][col].abs() < scale * 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut beta = [0f64; 3];
    for col in (0..3).rev() {
        let mut s = v[col];
        for k in col + 1..3 {
            s -= a[col][k] * beta[k];
        }
        beta[col] = s / a[col][col];
    }
    Some(beta)
}
