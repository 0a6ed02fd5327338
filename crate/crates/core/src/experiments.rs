//! Monte Carlo drivers: convergence of `mincut(nA, inf) / n` toward the
//! mu-length of `A`, deviation frequencies, and disjoint open paths.
//!
//! Every output is a pure function of the [`RunConfig`]. Instance fields use
//! the seed `derive_seed(master, [n, r])`; the time-constant pass uses a
//! separate stream so the two limit objects never share randomness.

use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{validate_for_theorems, CapacityField, DistributionSpec, DEFAULT_SCALE};
use crate::cutflow::{
    decompose, disjoint_paths_infinity, mincut_infinity_with, percolation_field, verify_flow, MaxFlowResult, DEFAULT_NMAX_FACTOR,
};
use crate::error::{CutError, ExperimentError};
use crate::fpp::{format_micro, MuTable};
use crate::geometry::{i_functional, ConvexPolygon};
use crate::lattice::{sites_in_scaled_polygon, SiteSet};
use crate::rational::{format_rational, to_f64, Rational};
use crate::stats::{mann_kendall, mean, sample_std, wilson_interval, TrendTest, Z95};

pub use crate::seed::derive_seed;

/// Label of the seed stream reserved for time-constant estimation.
pub const MU_STREAM: u64 = u64::MAX;

pub const DEFAULT_MU_N: u32 = 64;
pub const DEFAULT_MU_REPS: u32 = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec: DistributionSpec,
    pub polygon: ConvexPolygon,
    pub n_grid: Vec<u32>,
    pub reps: u32,
    pub master_seed: u64,
    pub epsilon: Rational,
    pub p_open: Rational,
    pub scale: u64,
    pub nmax_factor: i64,
    pub mu_n: u32,
    pub mu_reps: u32,
}

impl RunConfig {
    pub fn new(spec: DistributionSpec, polygon: ConvexPolygon, n_grid: Vec<u32>, reps: u32, master_seed: u64) -> Self {
        RunConfig {
            spec,
            polygon,
            n_grid,
            reps,
            master_seed,
            epsilon: Rational::new(1, 5),
            p_open: Rational::new(9, 10),
            scale: DEFAULT_SCALE,
            nmax_factor: DEFAULT_NMAX_FACTOR,
            mu_n: DEFAULT_MU_N,
            mu_reps: DEFAULT_MU_REPS,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("n grid must be nonempty, positive and strictly increasing");
        }
        if self.reps < 1 {
            return fail("need at least one replicate");
        }
        if self.epsilon <= Rational::zero() || self.epsilon >= Rational::one() {
            return fail("epsilon must lie in (0, 1)");
        }
        if self.p_open < Rational::zero() || self.p_open > Rational::one() {
            return fail("p must lie in [0, 1]");
        }
        if self.scale == 0 || self.nmax_factor < 1 {
            return fail("scale and nmax factor must be positive");
        }
        if !self.polygon.contains_origin_interior() {
            return fail("polygon must contain the origin in its interior");
        }
        Ok(())
    }

    /// Resolved configuration as a single JSON object with string-encoded rationals.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dist": self.spec.to_string(),
            "polygon": self.polygon.to_string(),
            "ngrid": self.n_grid,
            "reps": self.reps,
            "seed": self.master_seed,
            "eps": format_rational(&self.epsilon),
            "p": format_rational(&self.p_open),
            "scale": self.scale,
            "nmax_factor": self.nmax_factor,
            "mu_n": self.mu_n,
            "mu_reps": self.mu_reps,
        })
    }
}

/// Time-constant table for the sides of `polygon` and the resulting `I(polygon)`.
pub fn estimate_i_hat(
    spec: &DistributionSpec,
    polygon: &ConvexPolygon,
    cfg: &RunConfig,
) -> Result<(MuTable, Rational), ExperimentError> {
    let seed = derive_seed(cfg.master_seed, &[MU_STREAM]);
    let table = MuTable::estimate_for_directions(spec, &polygon.side_directions(), cfg.mu_n, cfg.mu_reps, seed, cfg.scale)?;
    let i_hat = i_functional(polygon, &table)?.value;
    Ok((table, i_hat))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: u32,
    pub replicate: u32,
    pub mincut_micro: u64,
    pub i_hat_micro: Rational,
    /// `mincut / (n * i_hat)`.
    pub ratio: f64,
    pub stabilized: bool,
    /// Wall time; excluded from equality.
    pub seconds: f64,
}

impl PartialEq for ConvergenceRecord {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n
            && self.replicate == o.replicate
            && self.mincut_micro == o.mincut_micro
            && self.i_hat_micro == o.i_hat_micro
            && self.ratio.to_bits() == o.ratio.to_bits()
            && self.stabilized == o.stabilized
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceRun {
    pub table: MuTable,
    pub i_hat: Rational,
    pub records: Vec<ConvergenceRecord>,
    pub warnings: Vec<String>,
}

fn theorem_warnings(spec: &DistributionSpec) -> Vec<String> {
    let report = validate_for_theorems(spec);
    let mut w = Vec::new();
    if !report.zero_mass_ok {
        w.push(format!("{spec}: mass at zero is at least 1/2, the limit may vanish"));
    }
    if !report.exp_moment_ok {
        w.push(format!("{spec}: no finite exponential moment"));
    }
    w
}

/// Keeps the best value of a run that hit the doubling budget.
fn settle(result: Result<MaxFlowResult, CutError>) -> Result<MaxFlowResult, CutError> {
    match result {
        Err(CutError::BudgetExceeded { best }) => Ok(*best),
        other => other,
    }
}

/// Every flow behind a reported value is checked for feasibility.
fn check_flow(
    field: &CapacityField,
    result: &MaxFlowResult,
    source: &SiteSet,
    n: u32,
    replicate: u32,
) -> Result<(), ExperimentError> {
    verify_flow(field, &result.flow, source).map_err(|v| ExperimentError::InfeasibleFlow {
        n,
        replicate,
        violation: format!("{v:?}"),
    })
}

fn ratio(value: u64, n: u32, i_hat: &Rational) -> f64 {
    let denom = i_hat * Rational::from_integer(n as i128);
    if denom.is_zero() {
        return f64::INFINITY;
    }
    to_f64(&(Rational::from_integer(value as i128) / denom))
}

fn grid(cfg: &RunConfig) -> Vec<(u32, u32)> {
    cfg.n_grid.iter().flat_map(|&n| (0..cfg.reps).map(move |r| (n, r))).collect()
}

/// Field of replicate `r` at scale `n`.
pub fn instance_field(cfg: &RunConfig, n: u32, r: u32) -> CapacityField {
    CapacityField::with_scale(cfg.spec.clone(), derive_seed(cfg.master_seed, &[n as u64, r as u64]), cfg.scale)
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceRun, ExperimentError> {
    cfg.validate()?;
    let warnings = theorem_warnings(&cfg.spec);
    let (table, i_hat) = estimate_i_hat(&cfg.spec, &cfg.polygon, cfg)?;
    let sources = cfg
        .n_grid
        .iter()
        .map(|&n| sites_in_scaled_polygon(&cfg.polygon, n).map(|s| (n, s)))
        .collect::<Result<std::collections::BTreeMap<_, _>, _>>()?;
    let records = grid(cfg)
        .into_par_iter()
        .map(|(n, r)| {
            let start = Instant::now();
            let field = instance_field(cfg, n, r);
            let result = settle(mincut_infinity_with(&field, &sources[&n], cfg.nmax_factor))?;
            check_flow(&field, &result, &sources[&n], n, r)?;
            Ok(ConvergenceRecord {
                n,
                replicate: r,
                mincut_micro: result.value,
                i_hat_micro: i_hat,
                ratio: ratio(result.value, n, &i_hat),
                stabilized: result.stabilized,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(ConvergenceRun { table, i_hat, records, warnings })
}

/// Per-`n` summary of ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: u32,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub deviation_frequency: f64,
    pub unstabilized: usize,
}

pub fn summarize(n_grid: &[u32], points: &[(u32, f64, bool)], epsilon: &Rational) -> Vec<GridSummary> {
    let eps = to_f64(epsilon);
    n_grid
        .iter()
        .map(|&n| {
            let xs: Vec<f64> = points.iter().filter(|p| p.0 == n).map(|p| p.1).collect();
            let dev = xs.iter().filter(|&&x| !(x > 1.0 - eps && x < 1.0 + eps)).count();
            GridSummary {
                n,
                count: xs.len(),
                mean: mean(&xs),
                std: sample_std(&xs),
                min: xs.iter().copied().fold(f64::INFINITY, f64::min),
                max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                deviation_frequency: if xs.is_empty() { f64::NAN } else { dev as f64 / xs.len() as f64 },
                unstabilized: points.iter().filter(|p| p.0 == n && !p.2).count(),
            }
        })
        .collect()
}

impl ConvergenceRun {
    pub fn summary(&self, n_grid: &[u32], epsilon: &Rational) -> Vec<GridSummary> {
        let pts: Vec<(u32, f64, bool)> = self.records.iter().map(|r| (r.n, r.ratio, r.stabilized)).collect();
        summarize(n_grid, &pts, epsilon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: u32,
    pub reps: usize,
    /// Replicates with ratio outside `(1 - eps, 1 + eps)`.
    pub deviations: usize,
    pub upper: usize,
    pub lower: usize,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    pub trend: TrendTest,
    /// No significant increase of the deviation indicator along the grid at 95%.
    pub nonincreasing: bool,
    pub convergence: ConvergenceRun,
}

/// One-sided significance level of the trend test.
pub const TREND_ALPHA: f64 = 0.05;

pub fn run_tail(cfg: &RunConfig) -> Result<TailReport, ExperimentError> {
    let convergence = run_convergence(cfg)?;
    let eps = to_f64(&cfg.epsilon);
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for &n in &cfg.n_grid {
        let ratios: Vec<f64> = convergence.records.iter().filter(|r| r.n == n).map(|r| r.ratio).collect();
        let upper = ratios.iter().filter(|&&x| x >= 1.0 + eps).count();
        let lower = ratios.iter().filter(|&&x| x <= 1.0 - eps).count();
        let deviations = upper + lower;
        let (wilson_low, wilson_high) = wilson_interval(deviations, ratios.len(), Z95);
        rows.push(TailRow {
            n,
            reps: ratios.len(),
            deviations,
            upper,
            lower,
            frequency: deviations as f64 / ratios.len() as f64,
            wilson_low,
            wilson_high,
        });
        groups.push(ratios.iter().map(|&x| f64::from(u8::from(!(x > 1.0 - eps && x < 1.0 + eps)))).collect());
    }
    let trend = mann_kendall(&groups);
    let nonincreasing = trend.p_increasing >= TREND_ALPHA;
    Ok(TailReport { rows, trend, nonincreasing, convergence })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DisjointRecord {
    pub n: u32,
    pub replicate: u32,
    pub count: u64,
    pub i_hat_micro: Rational,
    /// `count * scale / (n * i_hat)`.
    pub ratio: f64,
    pub stabilized: bool,
    pub seconds: f64,
}

impl PartialEq for DisjointRecord {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n
            && self.replicate == o.replicate
            && self.count == o.count
            && self.i_hat_micro == o.i_hat_micro
            && self.ratio.to_bits() == o.ratio.to_bits()
            && self.stabilized == o.stabilized
    }
}

#[derive(Clone, Debug)]
pub struct DisjointRun {
    pub table: MuTable,
    pub i_hat: Rational,
    pub records: Vec<DisjointRecord>,
    pub warnings: Vec<String>,
}

impl DisjointRun {
    pub fn mean_count(&self, n: u32) -> f64 {
        let xs: Vec<f64> = self.records.iter().filter(|r| r.n == n).map(|r| r.count as f64).collect();
        mean(&xs)
    }
}

/// Field seed of replicate `r` at scale `n` in [`run_disjoint`].
pub fn disjoint_seed(cfg: &RunConfig, n: u32, r: u32) -> u64 {
    derive_seed(cfg.master_seed, &[n as u64, r as u64])
}

pub fn run_disjoint(cfg: &RunConfig) -> Result<DisjointRun, ExperimentError> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    if cfg.p_open <= Rational::new(1, 2) {
        warnings.push(format!("p = {} is not supercritical (p_c = 1/2)", format_rational(&cfg.p_open)));
    }
    let law = DistributionSpec::Bernoulli(cfg.p_open);
    let (table, i_hat) = estimate_i_hat(&law, &cfg.polygon, cfg)?;
    let sources = cfg
        .n_grid
        .iter()
        .map(|&n| sites_in_scaled_polygon(&cfg.polygon, n).map(|s| (n, s)))
        .collect::<Result<std::collections::BTreeMap<_, _>, _>>()?;
    let records = grid(cfg)
        .into_par_iter()
        .map(|(n, r)| {
            let start = Instant::now();
            let seed = disjoint_seed(cfg, n, r);
            let paths = match disjoint_paths_infinity(&cfg.p_open, &sources[&n], seed, cfg.nmax_factor) {
                Ok(p) => p,
                Err(CutError::BudgetExceeded { best }) => decompose(*best, &sources[&n]),
                Err(e) => return Err(e.into()),
            };
            check_flow(&percolation_field(&cfg.p_open, seed)?, &paths.maxflow, &sources[&n], n, r)?;
            debug_assert_eq!(paths.paths.len() as u64, paths.count);
            let in_micro = paths.count * cfg.scale;
            Ok(DisjointRecord {
                n,
                replicate: r,
                count: paths.count,
                i_hat_micro: i_hat,
                ratio: ratio(in_micro, n, &i_hat),
                stabilized: paths.maxflow.stabilized,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(DisjointRun { table, i_hat, records, warnings })
}

/// CSV for convergence records; `timing` fills the seconds column.
pub fn convergence_csv(records: &[ConvergenceRecord], timing: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "replicate", "mincut_micro", "i_hat_micro", "ratio", "stabilized", "seconds"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.replicate.to_string(),
            r.mincut_micro.to_string(),
            format_micro(&r.i_hat_micro),
            r.ratio.to_string(),
            r.stabilized.to_string(),
            if timing { format!("{:.6}", r.seconds) } else { String::new() },
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn disjoint_csv(records: &[DisjointRecord], timing: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "replicate", "count", "i_hat_micro", "ratio", "stabilized", "seconds"])
        .expect("in-memory write");
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.replicate.to_string(),
            r.count.to_string(),
            format_micro(&r.i_hat_micro),
            r.ratio.to_string(),
            r.stabilized.to_string(),
            if timing { format!("{:.6}", r.seconds) } else { String::new() },
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn tail_csv(rows: &[TailRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "reps", "deviations", "upper", "lower", "frequency", "wilson_low", "wilson_high"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.reps.to_string(),
            r.deviations.to_string(),
            r.upper.to_string(),
            r.lower.to_string(),
            r.frequency.to_string(),
            r.wilson_low.to_string(),
            r.wilson_high.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
