//! The weekly simulation loop: collect picks, compute attendance, pay each
//! agent under the configured reward kind, update estimates, record the
//! trajectory.
//!
//! Draw schedule (the reproducibility contract): each agent owns the private
//! stream `agent_rng(config.seed, agent)`. At initialization it draws K
//! estimate values; afterwards it draws exactly one selection value per
//! week. Agents are stepped in index order, so a run is a pure function of
//! its `SimConfig`.

use rand_chacha::ChaCha8Rng;

use crate::core_state::{attendance, AttendanceProfile, JointState, NightPick, Trajectory};
use crate::learner::{agent_rng, select_pick, update_estimate, LearnerParams, LearnerState};
use crate::utilities::{
    ud_reward_from_profile, wl_reward_from_profile, world_reward_from_profile, PhiKind,
    RewardKind, WorldParams,
};
use crate::{Error, Result};

/// Everything a run needs. Two identical configs produce bit-identical
/// results.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub world: WorldParams,
    pub learner: LearnerParams,
    pub reward_kind: RewardKind,
    pub phi_kind: PhiKind,
    pub weeks: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            world: WorldParams::default(),
            learner: LearnerParams::default(),
            reward_kind: RewardKind::WonderfulLife,
            phi_kind: PhiKind::Exponential,
            weeks: 2000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weeks == 0 {
            return Err(Error::Config("weeks must be >= 1".into()));
        }
        self.learner.validate()
    }
}

/// Output of a full run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trajectory: Trajectory,
    /// `weekly_world_reward[t]` recomputes bit-identically as the world
    /// reward of `trajectory.states()[t]`.
    pub weekly_world_reward: Vec<f64>,
    pub final_learners: Vec<LearnerState>,
    pub final_attendance: AttendanceProfile,
}

/// One week of one agent-step: the resulting joint state, each agent's
/// reward, and the updated (and week-advanced) learners.
#[derive(Debug, Clone)]
pub struct WeekOutcome {
    pub state: JointState,
    pub rewards: Vec<f64>,
    pub learners: Vec<LearnerState>,
}

/// Per-agent rewards for a completed joint state, taking the precomputed
/// attendance profile.
fn rewards_for_state(
    state: &JointState,
    profile: &AttendanceProfile,
    world: &WorldParams,
    reward_kind: RewardKind,
    phi_kind: PhiKind,
) -> Result<Vec<f64>> {
    match reward_kind {
        RewardKind::WorldG => {
            let g = world_reward_from_profile(profile, world, phi_kind)?;
            Ok(vec![g; state.agent_count()])
        }
        RewardKind::UniformDivision => state
            .picks
            .iter()
            .map(|pick| match pick {
                NightPick::Night(d) => ud_reward_from_profile(*d, profile, world, phi_kind),
                NightPick::Clamped => Err(Error::UndefinedReward(
                    "uniform division for a clamped agent".into(),
                )),
            })
            .collect(),
        RewardKind::WonderfulLife => state
            .picks
            .iter()
            .map(|pick| match pick {
                NightPick::Night(d) => wl_reward_from_profile(*d, profile, world, phi_kind),
                NightPick::Clamped => Ok(0.0),
            })
            .collect(),
    }
}

/// Runs one week: every agent selects a night (one draw each, agent order),
/// attendance is computed once, rewards are paid from the completed joint
/// state, estimates are updated, and the learners' week counters advance.
pub fn run_week(
    learners: &[LearnerState],
    rngs: &mut [ChaCha8Rng],
    week: usize,
    config: &SimConfig,
) -> Result<WeekOutcome> {
    let n = config.world.agents();
    if learners.len() != n || rngs.len() != n {
        return Err(Error::Config(format!(
            "expected {n} learners and streams, got {} and {}",
            learners.len(),
            rngs.len()
        )));
    }
    let mut picks = Vec::with_capacity(n);
    for (learner, rng) in learners.iter().zip(rngs.iter_mut()) {
        picks.push(select_pick(learner, &config.learner, rng)?);
    }
    let state = JointState::new(picks, week);
    let profile = attendance(&state, &config.world)?;
    let rewards = rewards_for_state(&state, &profile, &config.world, config.reward_kind, config.phi_kind)?;

    let mut updated = Vec::with_capacity(n);
    for (agent, learner) in learners.iter().enumerate() {
        let next = match state.picks[agent] {
            NightPick::Night(d) => update_estimate(learner, d, rewards[agent], &config.learner)?,
            NightPick::Clamped => learner.clone(),
        };
        updated.push(next.advanced());
    }
    Ok(WeekOutcome {
        state,
        rewards,
        learners: updated,
    })
}

/// Runs `config.weeks` sequential weeks from freshly initialized learners.
pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.world.agents();
    let k = config.world.nights();

    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|a| agent_rng(config.seed, a)).collect();
    let mut learners: Vec<LearnerState> = rngs
        .iter_mut()
        .map(|rng| LearnerState::init(k, &config.learner, rng))
        .collect();

    let mut states = Vec::with_capacity(config.weeks);
    let mut weekly = Vec::with_capacity(config.weeks);
    for week in 0..config.weeks {
        let outcome = run_week(&learners, &mut rngs, week, config)?;
        let profile = attendance(&outcome.state, &config.world)?;
        weekly.push(world_reward_from_profile(&profile, &config.world, config.phi_kind)?);
        states.push(outcome.state);
        learners = outcome.learners;
    }
    let final_attendance = attendance(states.last().expect("weeks >= 1"), &config.world)?;
    Ok(SimResult {
        trajectory: Trajectory::new(states)?,
        weekly_world_reward: weekly,
        final_learners: learners,
        final_attendance,
    })
}
