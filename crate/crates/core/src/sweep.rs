//! Degree sweeps at fixed `n`: driver phase and round counts, partitioned-run
//! survivor fractions, single-phase residual degrees and machine loads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{degree_reduction_phase, maximal_matching_driver, DriverMode, PhaseConfig};
use crate::analysis::survivor_census;
use crate::error::{Error, Result};
use crate::generators::GraphSpec;
use crate::seed::{self, tag};
use crate::stats::{self, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    RandomRegular,
    ErdosRenyi,
}

impl SweepFamily {
    pub fn spec(self, n: usize, degree: usize) -> GraphSpec {
        match self {
            SweepFamily::RandomRegular => GraphSpec::RandomRegular { n, d: degree },
            SweepFamily::ErdosRenyi => GraphSpec::ErdosRenyi {
                n,
                avg_degree: degree as f64,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: SweepFamily,
    pub n: usize,
    pub degrees: Vec<usize>,
    pub seeds: usize,
    pub base_seed: u64,
    /// Independent partitioned runs per row for the survivor census.
    pub census_trials: usize,
    pub phase: PhaseConfig,
    pub mode: DriverMode,
}

impl SweepConfig {
    pub fn new(family: SweepFamily, n: usize, degrees: Vec<usize>, seeds: usize, base_seed: u64) -> Self {
        SweepConfig {
            family,
            n,
            degrees,
            seeds,
            base_seed,
            census_trials: 8,
            phase: PhaseConfig::default(),
            mode: DriverMode::LogLog,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub degree: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub phases: usize,
    pub rounds: usize,
    pub survivor_fraction: f64,
    pub survivors: usize,
    pub census_runs: usize,
    /// Residual max degree after one full degree-reduction phase on the input.
    pub phase_residual_max_degree: usize,
    pub phase_threshold: f64,
    pub phase_ok: bool,
    pub max_machine_words: u64,
    pub machine_budget: u64,
    pub partition_space_clean: bool,
    pub space_clean: bool,
    pub matching_size: usize,
    pub maximal: bool,
}

pub const CSV_COLUMNS: &[&str] = &[
    "degree",
    "seed_index",
    "seed",
    "n",
    "m",
    "max_degree",
    "phases",
    "rounds",
    "survivor_fraction",
    "survivors",
    "census_runs",
    "phase_residual_max_degree",
    "phase_threshold",
    "phase_ok",
    "max_machine_words",
    "machine_budget",
    "partition_space_clean",
    "space_clean",
    "matching_size",
    "maximal",
];

pub fn row_seed(base: u64, degree: usize, index: usize) -> u64 {
    seed::derive(base, &[tag::GRAPH, degree as u64, index as u64])
}

pub fn sweep_row(cfg: &SweepConfig, degree: usize, index: usize) -> Result<SweepRow> {
    let s = row_seed(cfg.base_seed, degree, index);
    let g = cfg.family.spec(cfg.n, degree).generate(s)?;
    let (_, summary) = maximal_matching_driver(&g, &cfg.phase, cfg.mode, s)?;
    let census = survivor_census(&g, &cfg.phase, cfg.census_trials, seed::derive(s, &[tag::TRIAL]))?;
    // The phase is measured at every degree, including those the driver
    // would hand straight to the finishing step.
    let unguarded = PhaseConfig {
        terminal_degree: 1,
        ..cfg.phase.clone()
    };
    let delta = g.max_degree();
    let threshold = cfg.phase.cleanup_threshold(delta);
    let phase_residual = if delta > 1 {
        match degree_reduction_phase(&g, &unguarded, seed::derive(s, &[tag::PHASE])) {
            Ok((_, rep)) => rep.residual_max_degree,
            Err(Error::PhaseFailure { residual, .. }) => residual,
            Err(e) => return Err(e),
        }
    } else {
        0
    };
    Ok(SweepRow {
        degree,
        seed_index: index,
        seed: s,
        n: g.n(),
        m: g.m(),
        max_degree: delta,
        phases: summary.phase_count,
        rounds: summary.rounds,
        survivor_fraction: census.mean_fraction,
        survivors: census.total_survivors,
        census_runs: census.trials,
        phase_residual_max_degree: phase_residual,
        phase_threshold: threshold,
        phase_ok: (phase_residual as f64) < threshold,
        max_machine_words: census.max_machine_words,
        machine_budget: census.machine_budget,
        partition_space_clean: census.space_clean && summary.phases.iter().all(|p| p.space_clean),
        space_clean: summary.space_clean,
        matching_size: summary.matching_size,
        maximal: summary.maximal,
    })
}

/// All rows, ordered by degree then seed index. Rows run on the current
/// rayon pool; each holds its own graph, so memory scales with the pool size.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.phase.validate()?;
    if cfg.seeds == 0 || cfg.degrees.is_empty() {
        return Err(Error::Config("a sweep needs at least one degree and one seed".into()));
    }
    let jobs: Vec<(usize, usize)> = cfg
        .degrees
        .iter()
        .flat_map(|&d| (0..cfg.seeds).map(move |i| (d, i)))
        .collect();
    jobs.par_iter()
        .with_max_len(1)
        .map(|&(d, i)| sweep_row(cfg, d, i))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeSummary {
    pub degree: usize,
    pub rows: usize,
    pub median_max_degree: f64,
    pub median_phases: f64,
    pub median_rounds: f64,
    pub median_survivor_fraction: f64,
    /// Survivors pooled over every census run at this degree.
    pub pooled_survivors: usize,
    pub pooled_vertex_runs: usize,
    pub median_max_machine_words: f64,
    pub phase_ok_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepFits {
    pub per_degree: Vec<DegreeSummary>,
    /// Phase count against `ln ln Δ`, over all rows.
    pub phases_vs_loglog: Option<LinearFit>,
    /// Median phase count at the largest degree minus at the smallest.
    pub phase_increase: f64,
    /// `ln((pooled survivors + 1/2) / pooled vertex-runs)` against `ln Δ`.
    pub survivors_vs_degree: Option<LinearFit>,
    /// `ln(max machine words)` against `ln Δ`, over all rows.
    pub words_vs_degree: Option<LinearFit>,
    pub phases_non_decreasing: bool,
    pub survivors_non_increasing: bool,
    pub phase_ok_fraction: f64,
    pub partition_space_clean: bool,
}

pub fn fit_sweep(rows: &[SweepRow]) -> SweepFits {
    let mut degrees: Vec<usize> = rows.iter().map(|r| r.degree).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let per_degree: Vec<DegreeSummary> = degrees
        .iter()
        .map(|&d| {
            let rs: Vec<&SweepRow> = rows.iter().filter(|r| r.degree == d).collect();
            let col = |f: &dyn Fn(&SweepRow) -> f64| stats::median(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            DegreeSummary {
                degree: d,
                rows: rs.len(),
                median_max_degree: col(&|r| r.max_degree as f64),
                median_phases: col(&|r| r.phases as f64),
                median_rounds: col(&|r| r.rounds as f64),
                median_survivor_fraction: col(&|r| r.survivor_fraction),
                pooled_survivors: rs.iter().map(|r| r.survivors).sum(),
                pooled_vertex_runs: rs.iter().map(|r| r.n * r.census_runs).sum(),
                median_max_machine_words: col(&|r| r.max_machine_words as f64),
                phase_ok_fraction: rs.iter().filter(|r| r.phase_ok).count() as f64 / rs.len() as f64,
            }
        })
        .collect();

    let usable: Vec<&SweepRow> = rows.iter().filter(|r| r.max_degree >= 3).collect();
    let ln = |x: f64| x.ln();
    let phases_vs_loglog = stats::linear_fit(
        &usable.iter().map(|r| ln(ln(r.max_degree as f64))).collect::<Vec<_>>(),
        &usable.iter().map(|r| r.phases as f64).collect::<Vec<_>>(),
    );
    let words_vs_degree = stats::linear_fit(
        &usable.iter().map(|r| ln(r.max_degree as f64)).collect::<Vec<_>>(),
        &usable
            .iter()
            .map(|r| ln(r.max_machine_words.max(1) as f64))
            .collect::<Vec<_>>(),
    );
    let survivors_vs_degree = stats::linear_fit(
        &per_degree
            .iter()
            .map(|s| ln(s.median_max_degree.max(1.0)))
            .collect::<Vec<_>>(),
        &per_degree
            .iter()
            .map(|s| ln((s.pooled_survivors as f64 + 0.5) / s.pooled_vertex_runs.max(1) as f64))
            .collect::<Vec<_>>(),
    );
    let phase_medians: Vec<f64> = per_degree.iter().map(|s| s.median_phases).collect();
    let survivor_medians: Vec<f64> = per_degree.iter().map(|s| s.median_survivor_fraction).collect();
    SweepFits {
        phase_increase: match (phase_medians.first(), phase_medians.last()) {
            (Some(a), Some(b)) => b - a,
            _ => f64::NAN,
        },
        phases_non_decreasing: stats::non_decreasing(&phase_medians),
        survivors_non_increasing: stats::non_increasing(&survivor_medians),
        phase_ok_fraction: rows.iter().filter(|r| r.phase_ok).count() as f64 / rows.len().max(1) as f64,
        partition_space_clean: rows.iter().all(|r| r.partition_space_clean),
        per_degree,
        phases_vs_loglog,
        survivors_vs_degree,
        words_vs_degree,
    }
}
