//! Batch experiment harness: named scenarios, multi-run averaging over
//! seeds, agent-count sweeps, and deterministic CSV/plot-data emission.

pub mod config;
pub mod emit;
pub mod presets;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{
    convergence_time, optimal_allocation, ConvergenceMeasure, DEFAULT_CONVERGENCE_TOLERANCE,
    DEFAULT_CONVERGENCE_WINDOW,
};
use crate::bar_env::{run_simulation, SimConfig, SimResult};
use crate::core_state::AttendanceProfile;
use crate::utilities::RewardKind;
use crate::{Error, Result};

/// Weeks every sweep point runs for, regardless of the scenario's own
/// setting: sweep records compare late-run performance at a fixed horizon.
pub const SWEEP_WEEKS: usize = 2000;

/// Window (weeks) used for late-run means in summaries and sweeps.
pub const LATE_RUN_WINDOW: usize = 200;

/// A named batch: one simulation configuration executed over `runs` seeds,
/// optionally swept across agent counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: SimConfig,
    pub runs: usize,
    pub sweep: Option<Vec<usize>>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("scenario name must not be empty".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(Error::Config("sweep list must not be empty".into()));
            }
            if sweep.iter().any(|&n| n == 0) {
                return Err(Error::Config("sweep agent counts must be >= 1".into()));
            }
        }
        self.config.validate()
    }
}

/// Aggregated outcome of one scenario.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub scenario: String,
    pub reward_kind: RewardKind,
    /// Base seed; run `r` used `base_seed + r`.
    pub base_seed: u64,
    pub agents: usize,
    pub weeks: usize,
    /// Cross-run mean world reward per week.
    pub mean_weekly_world_reward: Vec<f64>,
    /// Raw per-run weekly world rewards, run order.
    pub run_weekly_world_reward: Vec<Vec<f64>>,
    /// Final-week attendance histogram of each run.
    pub run_final_attendance: Vec<AttendanceProfile>,
    /// Convergence of the cross-run mean series (`None` when the run is too
    /// short to measure).
    pub convergence: Option<ConvergenceMeasure>,
    pub wall_time: Duration,
    /// Optimal weekly world reward for this agent count (sweeps only).
    pub optimum: Option<f64>,
    /// Late-run mean divided by the optimum (sweeps only).
    pub normalized_late_mean: Option<f64>,
}

impl ExperimentRecord {
    /// Mean of the last `window` weeks of the cross-run mean series.
    pub fn late_run_mean(&self, window: usize) -> f64 {
        let len = self.mean_weekly_world_reward.len();
        let take = window.min(len).max(1);
        self.mean_weekly_world_reward[len - take..]
            .iter()
            .sum::<f64>()
            / take as f64
    }
}

fn convergence_of(series: &[f64]) -> Option<ConvergenceMeasure> {
    let window = DEFAULT_CONVERGENCE_WINDOW.min(series.len() / 2);
    if window == 0 {
        return None;
    }
    convergence_time(series, window, DEFAULT_CONVERGENCE_TOLERANCE).ok()
}

/// Executes a scenario's runs with seeds `seed, seed+1, ..., seed+R-1`
/// (concurrently; aggregation order is fixed by run index, so the record is
/// a deterministic function of the scenario).
pub fn run_scenario(scenario: &Scenario) -> Result<ExperimentRecord> {
    scenario.validate()?;
    let start = Instant::now();
    let results: Result<Vec<SimResult>> = (0..scenario.runs)
        .into_par_iter()
        .map(|r| {
            let config = SimConfig {
                seed: scenario.config.seed.wrapping_add(r as u64),
                ..scenario.config.clone()
            };
            run_simulation(&config)
        })
        .collect();
    // The config was validated up front, so a failure here means the
    // scenario is aborted and its partial results are dropped.
    let results = results.map_err(|e| {
        Error::Usage(format!(
            "scenario {:?} aborted with partial results: {e}",
            scenario.name
        ))
    })?;

    let weeks = scenario.config.weeks;
    let mut mean = vec![0.0_f64; weeks];
    for result in &results {
        for (t, r) in result.weekly_world_reward.iter().enumerate() {
            mean[t] += r;
        }
    }
    for m in &mut mean {
        *m /= scenario.runs as f64;
    }

    let convergence = convergence_of(&mean);
    Ok(ExperimentRecord {
        scenario: scenario.name.clone(),
        reward_kind: scenario.config.reward_kind,
        base_seed: scenario.config.seed,
        agents: scenario.config.world.agents(),
        weeks,
        run_weekly_world_reward: results
            .iter()
            .map(|r| r.weekly_world_reward.clone())
            .collect(),
        run_final_attendance: results.iter().map(|r| r.final_attendance.clone()).collect(),
        mean_weekly_world_reward: mean,
        convergence,
        wall_time: start.elapsed(),
        optimum: None,
        normalized_late_mean: None,
    })
}

/// Runs the scenario once per sweep agent count at the fixed
/// [`SWEEP_WEEKS`] horizon. Each record carries the optimal weekly world
/// reward for its agent count and its late-run mean normalized by that
/// optimum, so performance is comparable across N.
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<ExperimentRecord>> {
    scenario.validate()?;
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Usage(format!("scenario {:?} has no sweep list", scenario.name)))?;

    let mut records = Vec::with_capacity(sweep.len());
    for &agents in sweep {
        let world = scenario.config.world.with_agents(agents)?;
        let point = Scenario {
            name: format!("{}-N{agents}", scenario.name),
            config: SimConfig {
                world: world.clone(),
                weeks: SWEEP_WEEKS,
                ..scenario.config.clone()
            },
            runs: scenario.runs,
            sweep: None,
        };
        let mut record = run_scenario(&point)?;
        let (_, optimum) = optimal_allocation(&world, scenario.config.phi_kind)?;
        record.normalized_late_mean = Some(record.late_run_mean(LATE_RUN_WINDOW) / optimum);
        record.optimum = Some(optimum);
        records.push(record);
    }
    Ok(records)
}
