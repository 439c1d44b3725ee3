//! Built-in scenario presets.
//!
//! All presets use the stock world: 168 agents picking among 7 nights with
//! capacity 6, under either uniform night weights `[1,1,1,1,1,1,1]` or the
//! single-peak weights `[0,0,0,7,0,0,0]`, 50 runs each.
//!
//! * `fig1-left`  — peaked weights, 8000 weeks (long enough to contain the
//!   slowest reward function's convergence), all three reward kinds.
//! * `fig1-right` — uniform weights, 8000 weeks, all three reward kinds.
//! * `fig2`       — uniform weights, 2000 weeks; its attendance histograms
//!   show the week-2000 snapshot of each reward kind.
//! * `fig3`       — peaked weights, agent-count sweep over {42, 84, 168,
//!   336} at 2000 weeks, all three reward kinds.
//!
//! A single member is addressable as `<family>-<KIND>`, e.g.
//! `fig1-right-WL`.

use crate::bar_env::SimConfig;
use crate::experiments::Scenario;
use crate::utilities::{RewardKind, WorldParams};

/// Default number of runs a scenario is averaged over.
pub const DEFAULT_RUNS: usize = 50;

/// Default base seed for preset scenarios.
pub const DEFAULT_SEED: u64 = 1;

/// Agent counts swept by `fig3`.
pub const SWEEP_AGENTS: [usize; 4] = [42, 84, 168, 336];

/// Run length of the `fig1` presets.
pub const FIG1_WEEKS: usize = 8000;

fn uniform_world() -> WorldParams {
    WorldParams::uniform(7, 168)
}

fn peaked_world() -> WorldParams {
    WorldParams::single_peak(7, 3, 7.0, 168).expect("valid peaked params")
}

fn family(
    name: &str,
    world: WorldParams,
    weeks: usize,
    sweep: Option<Vec<usize>>,
) -> Vec<Scenario> {
    RewardKind::ALL
        .iter()
        .map(|&reward_kind| Scenario {
            name: format!("{name}-{}", reward_kind.token()),
            config: SimConfig {
                world: world.clone(),
                reward_kind,
                weeks,
                seed: DEFAULT_SEED,
                ..SimConfig::default()
            },
            runs: DEFAULT_RUNS,
            sweep: sweep.clone(),
        })
        .collect()
}

fn family_of(name: &str) -> Option<Vec<Scenario>> {
    match name {
        "fig1-left" => Some(family(name, peaked_world(), FIG1_WEEKS, None)),
        "fig1-right" => Some(family(name, uniform_world(), FIG1_WEEKS, None)),
        "fig2" => Some(family(name, uniform_world(), 2000, None)),
        "fig3" => Some(family(name, peaked_world(), 2000, Some(SWEEP_AGENTS.to_vec()))),
        _ => None,
    }
}

/// Resolves a preset name to its scenarios: a family name yields all three
/// reward kinds, `<family>-<KIND>` yields one.
pub fn preset(name: &str) -> Option<Vec<Scenario>> {
    if let Some(scenarios) = family_of(name) {
        return Some(scenarios);
    }
    let (family_name, kind) = name.rsplit_once('-')?;
    let kind = RewardKind::parse(kind).ok()?;
    let scenarios = family_of(family_name)?;
    let member = scenarios.into_iter().find(|s| s.config.reward_kind == kind)?;
    Some(vec![member])
}

/// All addressable preset names, families first.
pub fn preset_names() -> Vec<String> {
    let families = ["fig1-left", "fig1-right", "fig2", "fig3"];
    let mut names: Vec<String> = families.iter().map(|f| f.to_string()).collect();
    for f in families {
        for kind in RewardKind::ALL {
            names.push(format!("{f}-{}", kind.token()));
        }
    }
    names
}
