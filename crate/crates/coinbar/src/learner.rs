//! Per-agent learning: a K-component estimated-reward vector updated toward
//! received rewards, with Boltzmann (softmax) action selection under a
//! geometrically decaying temperature.
//!
//! Sign convention: estimates are rewards to be *maximized*, so pick
//! probabilities are proportional to `exp(+estimate / T)`. Hotter
//! temperatures explore, colder ones exploit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core_state::NightPick;
use crate::{Error, Result};

/// How an estimate moves toward a received reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// `e <- (1 - beta) * e + beta * reward` with a fixed `beta`.
    Ema,
    /// Incremental sample mean: `beta = 1 / visits` to the picked night.
    SampleAverage,
}

impl UpdateRule {
    pub fn token(self) -> &'static str {
        match self {
            UpdateRule::Ema => "ema",
            UpdateRule::SampleAverage => "sample-average",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ema" => Ok(UpdateRule::Ema),
            "sample-average" => Ok(UpdateRule::SampleAverage),
            other => Err(Error::Config(format!(
                "unknown update rule {other:?} (expected ema or sample-average)"
            ))),
        }
    }
}

/// Learning hyperparameters shared by all agents.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    /// EMA step size `beta` in (0, 1].
    pub learning_rate: f64,
    /// Temperature at week 0.
    pub initial_temperature: f64,
    /// Per-week geometric decay factor in (0, 1].
    pub temperature_decay: f64,
    /// Floor the decay never crosses.
    pub min_temperature: f64,
    /// Estimates start uniform in `[lo, hi)`.
    pub estimate_init: (f64, f64),
    pub update_rule: UpdateRule,
}

/// Stock hyperparameters, calibrated so that the wonderful-life system
/// reaches its near-optimal plateau within a few hundred weeks while uniform
/// division exhibits its tragedy of the commons:
///
/// * sample-average updates — each night's estimate is the running mean of
///   the rewards received there, so estimate noise decays as visits
///   accumulate;
/// * temperature annealed geometrically from 1.0 by 0.98 per week down to a
///   floor of 0.005, cold enough to exploit reward gaps of a few hundredths.
///
/// `learning_rate` only applies when `update_rule` is switched to
/// [`UpdateRule::Ema`].
impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            learning_rate: 0.1,
            initial_temperature: 1.0,
            temperature_decay: 0.98,
            min_temperature: 0.005,
            estimate_init: (0.0, 1.0),
            update_rule: UpdateRule::SampleAverage,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(Error::Config(format!(
                "initial_temperature must be > 0, got {}",
                self.initial_temperature
            )));
        }
        if !(self.temperature_decay > 0.0 && self.temperature_decay <= 1.0) {
            return Err(Error::Config(format!(
                "temperature_decay must be in (0, 1], got {}",
                self.temperature_decay
            )));
        }
        if !(self.min_temperature >= 0.0 && self.min_temperature.is_finite()) {
            return Err(Error::Config(format!(
                "min_temperature must be >= 0, got {}",
                self.min_temperature
            )));
        }
        if self.estimate_init.0 > self.estimate_init.1 {
            return Err(Error::Config(format!(
                "estimate_init range is inverted: [{}, {})",
                self.estimate_init.0, self.estimate_init.1
            )));
        }
        Ok(())
    }
}

/// One agent's estimated reward per night plus its local week counter.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    estimates: Vec<f64>,
    visits: Vec<u32>,
    week: usize,
}

impl LearnerState {
    /// Fresh learner at week 0; draws exactly `nights` values from `rng`
    /// (night order) for the initial estimates.
    pub fn init<R: Rng>(nights: usize, params: &LearnerParams, rng: &mut R) -> LearnerState {
        let (lo, hi) = params.estimate_init;
        let estimates = (0..nights)
            .map(|_| lo + (hi - lo) * rng.gen::<f64>())
            .collect();
        LearnerState {
            estimates,
            visits: vec![0; nights],
            week: 0,
        }
    }

    /// Build from explicit estimates (tests and tooling).
    pub fn from_estimates(estimates: Vec<f64>, week: usize) -> LearnerState {
        let visits = vec![0; estimates.len()];
        LearnerState {
            estimates,
            visits,
            week,
        }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn visits(&self) -> &[u32] {
        &self.visits
    }

    pub fn week(&self) -> usize {
        self.week
    }

    pub fn nights(&self) -> usize {
        self.estimates.len()
    }

    /// Copy with the week counter advanced by one.
    pub fn advanced(&self) -> LearnerState {
        let mut out = self.clone();
        out.week += 1;
        out
    }
}

/// Exploration temperature at a given week:
/// `max(min_temperature, initial_temperature * decay^week)`.
pub fn temperature(week: usize, params: &LearnerParams) -> f64 {
    let decayed = params.initial_temperature * params.temperature_decay.powi(week as i32);
    decayed.max(params.min_temperature)
}

/// Softmax distribution over estimates at temperature `temp`. The maximum
/// estimate is subtracted before exponentiation; by shift invariance this
/// does not change the distribution.
pub fn boltzmann_probabilities(estimates: &[f64], temp: f64) -> Result<Vec<f64>> {
    if estimates.is_empty() {
        return Err(Error::Usage("softmax over zero nights".into()));
    }
    if !(temp > 0.0) {
        return Err(Error::Usage(format!("temperature must be > 0, got {temp}")));
    }
    if estimates.iter().any(|e| !e.is_finite()) {
        return Err(Error::State("non-finite estimate in learner state".into()));
    }
    let max = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = estimates.iter().map(|e| ((e - max) / temp).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Draws one pick from the Boltzmann distribution over the agent's
/// estimates. Consumes exactly one value from `rng` and never returns the
/// clamped pick.
pub fn select_pick<R: Rng>(
    state: &LearnerState,
    params: &LearnerParams,
    rng: &mut R,
) -> Result<NightPick> {
    let temp = temperature(state.week, params);
    if !(temp > 0.0) {
        return Err(Error::Usage(format!(
            "temperature at week {} is {temp}; selection needs T > 0",
            state.week
        )));
    }
    if state.estimates.iter().any(|e| !e.is_finite()) {
        return Err(Error::State(format!(
            "non-finite estimate at week {}",
            state.week
        )));
    }
    let max = state
        .estimates
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = state
        .estimates
        .iter()
        .map(|e| ((e - max) / temp).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * z;
    let mut cumulative = 0.0;
    for (k, w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return Ok(NightPick::Night(k));
        }
    }
    Ok(NightPick::Night(state.estimates.len() - 1))
}

/// Moves the picked night's estimate toward the received reward; all other
/// components are untouched and the week counter is left for the
/// environment to advance.
pub fn update_estimate(
    state: &LearnerState,
    picked: usize,
    reward: f64,
    params: &LearnerParams,
) -> Result<LearnerState> {
    if picked >= state.estimates.len() {
        return Err(Error::Bounds(format!(
            "picked night {picked} out of range (K={})",
            state.estimates.len()
        )));
    }
    if !reward.is_finite() {
        return Err(Error::Usage(format!("non-finite reward {reward}")));
    }
    let mut out = state.clone();
    out.visits[picked] += 1;
    let beta = match params.update_rule {
        UpdateRule::Ema => params.learning_rate,
        UpdateRule::SampleAverage => 1.0 / out.visits[picked] as f64,
    };
    out.estimates[picked] = (1.0 - beta) * out.estimates[picked] + beta * reward;
    Ok(out)
}

/// Seed for one agent's substream. SplitMix64 finalizer applied to the
/// master seed xored with the agent index scaled by the 64-bit golden ratio;
/// this is the fixed splitting rule that makes parallel and sequential runs
/// identical.
pub fn agent_seed(master_seed: u64, agent: usize) -> u64 {
    let mut z = master_seed ^ (agent as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The agent's private random stream. Draw order is fixed: K initialization
/// draws (one per night), then one selection draw per week.
pub fn agent_rng(master_seed: u64, agent: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(agent_seed(master_seed, agent))
}
