//! Dispersion sampling, ensemble execution and miss statistics.
//!
//! Run `i` draws its parameters from a ChaCha stream keyed by
//! `(base_seed, i)`, so results do not depend on scheduling or thread
//! count. Statistics are computed over sorted samples and are therefore
//! independent of run order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{run, Outcome, Scenario, TerminalReport};
use crate::error::{invalid, Result, SimError};
use crate::guidance::FlightMode;

/// Closed interval sampled uniformly. `low == high` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub low: f64,
    pub high: f64,
}

impl UniformRange {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    pub const fn point(v: f64) -> Self {
        Self { low: v, high: v }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.low + (self.high - self.low) * u
    }

    fn check(&self, field: &'static str) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low <= self.high) {
            return Err(invalid(
                field,
                format!("need low <= high, got [{}, {}]", self.low, self.high),
            ));
        }
        Ok(())
    }
}

/// Which inputs vary from run to run and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpec {
    pub n_runs: usize,
    pub base_seed: u64,
    /// kg
    pub mass_range: UniformRange,
    /// Degrees below the horizon.
    pub entry_gamma_range: UniformRange,
    /// m
    pub entry_altitude_range: UniformRange,
    /// Log-space sigma of the density multiplier (median 1).
    pub density_multiplier_sigma: f64,
    /// rad
    pub seeker_noise_sigma: f64,
    /// Per-axis sigma of the target position error, m.
    pub target_offset_sigma: f64,
}

impl Default for DispersionSpec {
    fn default() -> Self {
        Self {
            n_runs: 100,
            base_seed: 1,
            mass_range: UniformRange::new(1450.0, 1550.0),
            entry_gamma_range: UniformRange::new(3.0, 4.0),
            entry_altitude_range: UniformRange::new(90_000.0, 100_000.0),
            density_multiplier_sigma: 0.05,
            seeker_noise_sigma: 1e-3,
            target_offset_sigma: 0.0,
        }
    }
}

impl DispersionSpec {
    /// No parameter dispersion: every run reproduces `nominal` except for
    /// its seed. Seeker noise stays at the nominal level.
    pub fn degenerate(nominal: &Scenario, n_runs: usize) -> Self {
        Self {
            n_runs,
            base_seed: 0,
            mass_range: UniformRange::point(nominal.vehicle.mass),
            entry_gamma_range: UniformRange::point(nominal.entry.entry_gamma.to_degrees()),
            entry_altitude_range: UniformRange::point(nominal.entry.entry_altitude),
            density_multiplier_sigma: 0.0,
            seeker_noise_sigma: nominal.guidance.seeker_noise_sigma,
            target_offset_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(invalid("n_runs", "must be at least 1"));
        }
        self.mass_range.check("mass_range")?;
        self.entry_gamma_range.check("entry_gamma_range")?;
        self.entry_altitude_range.check("entry_altitude_range")?;
        for (name, v) in [
            ("density_multiplier_sigma", self.density_multiplier_sigma),
            ("seeker_noise_sigma", self.seeker_noise_sigma),
            ("target_offset_sigma", self.target_offset_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Per-run random stream. The ChaCha stream id carries the run index.
pub fn run_rng(base_seed: u64, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(run_index as u64);
    rng
}

/// Builds the scenario for run `run_index`.
pub fn sample_scenario(
    spec: &DispersionSpec,
    nominal: &Scenario,
    run_index: usize,
) -> Result<Scenario> {
    if run_index >= spec.n_runs {
        return Err(invalid(
            "run_index",
            format!("{run_index} is out of range for {} runs", spec.n_runs),
        ));
    }
    let mut rng = run_rng(spec.base_seed, run_index);
    let mut s = *nominal;
    // draw order is part of the reproducibility contract
    s.vehicle.mass = spec.mass_range.draw(&mut rng);
    s.entry.entry_gamma = spec.entry_gamma_range.draw(&mut rng).to_radians();
    s.entry.entry_altitude = spec.entry_altitude_range.draw(&mut rng);
    let z: f64 = StandardNormal.sample(&mut rng);
    s.density_scale = nominal.density_scale * (spec.density_multiplier_sigma * z).exp();
    let dx: f64 = StandardNormal.sample(&mut rng);
    let dz: f64 = StandardNormal.sample(&mut rng);
    s.target.x += spec.target_offset_sigma * dx;
    if s.mode == FlightMode::ThreeD {
        s.target.z += spec.target_offset_sigma * dz;
    }
    s.guidance.seeker_noise_sigma = spec.seeker_noise_sigma;
    s.seed = rng.random();
    Ok(s)
}

/// One executed ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub scenario: Scenario,
    pub report: TerminalReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p95: f64,
}

/// Miss statistics over the runs that reached the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    /// Runs executed, whatever their outcome.
    pub n: usize,
    /// Runs contributing to the miss statistics.
    pub n_impact: usize,
    pub miss_mean: f64,
    pub miss_std: f64,
    pub miss_min: f64,
    pub miss_max: f64,
    pub cep: f64,
    pub quantiles: Quantiles,
    pub impact_time_mean: f64,
    pub impact_time_std: f64,
    pub downrange_mean: f64,
    pub downrange_std: f64,
    pub outcome_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub stats: EnsembleStats,
    pub runs: Vec<RunRecord>,
}

/// How an ensemble is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon fan-out, optionally on a dedicated pool of this many threads.
    /// Runs sequentially when the `parallel` feature is off.
    #[default]
    Parallel,
    ParallelWith(usize),
}

/// Linear-interpolated quantile (Hyndman-Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(SimError::EmptySample);
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Circular error probable: the median miss radius.
pub fn cep(miss_distances: &[f64]) -> Result<f64> {
    quantile_sorted(&sorted(miss_distances), 0.5)
}

/// Mean and sample standard deviation, summed in sorted order.
fn mean_std(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    if sorted.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

/// Aggregates terminal reports. Non-impact runs only enter the outcome
/// tally.
pub fn summarize(reports: &[TerminalReport]) -> Result<EnsembleStats> {
    let mut outcome_counts = BTreeMap::new();
    for o in [Outcome::Impact, Outcome::Timeout, Outcome::Aborted] {
        outcome_counts.insert(o.as_str().to_string(), 0);
    }
    for r in reports {
        *outcome_counts
            .entry(r.outcome.as_str().to_string())
            .or_insert(0) += 1;
    }
    let hits: Vec<&TerminalReport> = reports
        .iter()
        .filter(|r| r.outcome == Outcome::Impact)
        .collect();
    if hits.is_empty() {
        return Err(SimError::NoImpacts(reports.len()));
    }
    let miss = sorted(&hits.iter().map(|r| r.miss_distance).collect::<Vec<_>>());
    let time = sorted(&hits.iter().map(|r| r.impact_time).collect::<Vec<_>>());
    let range = sorted(&hits.iter().map(|r| r.downrange).collect::<Vec<_>>());
    let (miss_mean, miss_std) = mean_std(&miss);
    let (impact_time_mean, impact_time_std) = mean_std(&time);
    let (downrange_mean, downrange_std) = mean_std(&range);
    let p50 = quantile_sorted(&miss, 0.5)?;
    Ok(EnsembleStats {
        n: reports.len(),
        n_impact: hits.len(),
        miss_mean,
        miss_std,
        miss_min: miss[0],
        miss_max: miss[miss.len() - 1],
        cep: p50,
        quantiles: Quantiles {
            p50,
            p90: quantile_sorted(&miss, 0.9)?,
            p95: quantile_sorted(&miss, 0.95)?,
        },
        impact_time_mean,
        impact_time_std,
        downrange_mean,
        downrange_std,
        outcome_counts,
    })
}

fn run_one(spec: &DispersionSpec, nominal: &Scenario, i: usize) -> Result<RunRecord> {
    let scenario = sample_scenario(spec, nominal, i)?;
    let report = run(&scenario)?.report;
    Ok(RunRecord {
        run_index: i,
        scenario,
        report,
    })
}

fn run_all(
    spec: &DispersionSpec,
    nominal: &Scenario,
    execution: Execution,
) -> Result<Vec<RunRecord>> {
    let n = spec.n_runs;
    match execution {
        Execution::Sequential => (0..n).map(|i| run_one(spec, nominal, i)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|i| run_one(spec, nominal, i))
                .collect()
        }
        #[cfg(feature = "parallel")]
        Execution::ParallelWith(threads) => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| invalid("threads", e.to_string()))?;
            pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .map(|i| run_one(spec, nominal, i))
                    .collect()
            })
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::ParallelWith(_) => {
            (0..n).map(|i| run_one(spec, nominal, i)).collect()
        }
    }
}

/// Executes every run of the ensemble and summarizes the impacts. Records
/// come back ordered by run index.
pub fn run_ensemble(
    spec: &DispersionSpec,
    nominal: &Scenario,
    execution: Execution,
) -> Result<EnsembleResult> {
    spec.validate()?;
    nominal.validate()?;
    let runs = run_all(spec, nominal, execution)?;
    let reports: Vec<TerminalReport> = runs.iter().map(|r| r.report).collect();
    let stats = summarize(&reports)?;
    Ok(EnsembleResult { stats, runs })
}
