//! World and agent reward functions.
//!
//! The per-night reward is `phi_k(y) = alpha_k * y * exp(-y / c)` (the
//! exponential kind) or the two-night minority variant. The weekly world
//! reward sums `phi` over nights, world utility sums weekly rewards over a
//! trajectory, and the three agent rewards — full world reward (G), uniform
//! division (UD) and wonderful life (WL) — are all derived from those sums.
//!
//! Everything is stated in maximization form: larger reward is better,
//! everywhere.

use crate::core_state::{attendance, clamp, AttendanceProfile, JointState, NightPick, Trajectory};
use crate::core_state::ClampSet;
use crate::{Error, Result};

/// World parameters: `K` nights with weights `alpha`, capacity `c`, and the
/// number of agents `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldParams {
    alpha: Vec<f64>,
    capacity: f64,
    agents: usize,
}

impl WorldParams {
    /// `K` is taken from `alpha.len()`.
    pub fn new(alpha: Vec<f64>, capacity: f64, agents: usize) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Config("alpha must have at least one night".into()));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Config("alpha entries must be finite and >= 0".into()));
        }
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(Error::Config(format!("capacity must be > 0, got {capacity}")));
        }
        if agents == 0 {
            return Err(Error::Config("agent count must be >= 1".into()));
        }
        Ok(WorldParams {
            alpha,
            capacity,
            agents,
        })
    }

    /// Uniform weights (`alpha_k = 1`) with the stock capacity `c = 6`.
    pub fn uniform(nights: usize, agents: usize) -> Self {
        WorldParams::new(vec![1.0; nights], 6.0, agents).expect("valid uniform params")
    }

    /// All weight on one night, zero elsewhere (`c = 6`).
    pub fn single_peak(nights: usize, peak: usize, weight: f64, agents: usize) -> Result<Self> {
        if peak >= nights {
            return Err(Error::Config(format!("peak night {peak} out of range (K={nights})")));
        }
        let mut alpha = vec![0.0; nights];
        alpha[peak] = weight;
        WorldParams::new(alpha, 6.0, agents)
    }

    pub fn nights(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Same world with a different agent count (used by sweeps).
    pub fn with_agents(&self, agents: usize) -> Result<Self> {
        WorldParams::new(self.alpha.clone(), self.capacity, agents)
    }
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams::uniform(7, 168)
    }
}

/// Which private reward the agents are paid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RewardKind {
    /// Every agent receives the full weekly world reward.
    WorldG,
    /// Each night's reward divided evenly among its attendees.
    UniformDivision,
    /// World reward minus the world reward with the agent clamped out.
    WonderfulLife,
}

impl RewardKind {
    pub const ALL: [RewardKind; 3] = [
        RewardKind::WonderfulLife,
        RewardKind::WorldG,
        RewardKind::UniformDivision,
    ];

    /// Short token used by the CLI, config files and CSV output.
    pub fn token(self) -> &'static str {
        match self {
            RewardKind::WorldG => "G",
            RewardKind::UniformDivision => "UD",
            RewardKind::WonderfulLife => "WL",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(RewardKind::WorldG),
            "UD" | "ud" => Ok(RewardKind::UniformDivision),
            "WL" | "wl" => Ok(RewardKind::WonderfulLife),
            other => Err(Error::Config(format!(
                "unknown reward kind {other:?} (expected G, UD or WL)"
            ))),
        }
    }
}

/// Shape of the per-night reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiKind {
    /// `alpha_k * y * exp(-y / c)`.
    Exponential,
    /// Minority-game variant: the least-attended night contributes its own
    /// attendance, every other night contributes zero. Argmin ties break
    /// toward the lowest night index (a deterministic, non-canonical rule).
    Minority,
}

impl PhiKind {
    pub fn token(self) -> &'static str {
        match self {
            PhiKind::Exponential => "exponential",
            PhiKind::Minority => "minority",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(PhiKind::Exponential),
            "minority" | "min" => Ok(PhiKind::Minority),
            other => Err(Error::Config(format!(
                "unknown phi kind {other:?} (expected exponential or minority)"
            ))),
        }
    }
}

/// Per-night reward `phi_k(y)` for a scalar attendance count.
///
/// The minority variant needs the whole attendance profile (its value on one
/// night depends on every other night), so asking for it here is an error;
/// use [`minority_night_reward`] instead.
pub fn phi(night: usize, count: usize, params: &WorldParams, kind: PhiKind) -> Result<f64> {
    if night >= params.nights() {
        return Err(Error::Bounds(format!(
            "night {night} out of range (K={})",
            params.nights()
        )));
    }
    match kind {
        PhiKind::Exponential => Ok(phi_exponential(params.alpha()[night], count, params.capacity())),
        PhiKind::Minority => Err(Error::Usage(
            "minority phi depends on the full attendance profile; call minority_night_reward"
                .into(),
        )),
    }
}

#[inline]
fn phi_exponential(alpha: f64, count: usize, capacity: f64) -> f64 {
    let y = count as f64;
    alpha * y * (-y / capacity).exp()
}

/// Night index holding the minimum attendance, lowest index on ties.
fn argmin_night(profile: &AttendanceProfile) -> usize {
    let mut best = 0;
    for (k, &c) in profile.counts.iter().enumerate() {
        if c < profile.counts[best] {
            best = k;
        }
    }
    best
}

/// Minority-variant night reward: `min_i(x_i)` on the argmin night, else 0.
pub fn minority_night_reward(night: usize, profile: &AttendanceProfile) -> f64 {
    if night == argmin_night(profile) {
        profile.counts[night] as f64
    } else {
        0.0
    }
}

/// Weekly world reward from an attendance profile.
pub fn world_reward_from_profile(
    profile: &AttendanceProfile,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    if profile.nights() != params.nights() {
        return Err(Error::Config(format!(
            "profile has {} nights but params expect K={}",
            profile.nights(),
            params.nights()
        )));
    }
    match kind {
        PhiKind::Exponential => {
            let mut sum = 0.0;
            for (k, &x) in profile.counts.iter().enumerate() {
                sum += phi_exponential(params.alpha()[k], x, params.capacity());
            }
            Ok(sum)
        }
        // All nights but the argmin contribute zero, so the sum is the min.
        PhiKind::Minority => Ok(*profile.counts.iter().min().unwrap() as f64),
    }
}

/// Weekly world reward `R_G` of a joint state.
pub fn world_reward(state: &JointState, params: &WorldParams, kind: PhiKind) -> Result<f64> {
    let profile = attendance(state, params)?;
    world_reward_from_profile(&profile, params, kind)
}

/// World utility `G`: the sum of weekly world rewards over the trajectory.
pub fn world_utility(traj: &Trajectory, params: &WorldParams, kind: PhiKind) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Usage("world utility of an empty trajectory".into()));
    }
    let mut total = 0.0;
    for state in traj.states() {
        total += world_reward(state, params, kind)?;
    }
    Ok(total)
}

/// Uniform-division reward from the agent's night and the week's profile.
pub fn ud_reward_from_profile(
    night: usize,
    profile: &AttendanceProfile,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    let x = profile.counts[night];
    if x == 0 {
        // The attendee itself is always counted, so this means the caller
        // passed a profile the agent is not actually part of.
        return Err(Error::UndefinedReward(format!(
            "uniform division on night {night} with zero attendance"
        )));
    }
    let night_reward = match kind {
        PhiKind::Exponential => phi_exponential(params.alpha()[night], x, params.capacity()),
        PhiKind::Minority => minority_night_reward(night, profile),
    };
    Ok(night_reward / x as f64)
}

/// Uniform-division reward: the agent's night reward split evenly among that
/// night's attendees. Undefined for a clamped agent.
pub fn ud_reward(
    agent: usize,
    state: &JointState,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    let profile = attendance(state, params)?;
    match state.picks.get(agent) {
        None => Err(Error::Bounds(format!(
            "agent {agent} out of range (N={})",
            state.agent_count()
        ))),
        Some(NightPick::Clamped) => Err(Error::UndefinedReward(format!(
            "uniform division reward is undefined for clamped agent {agent}"
        ))),
        Some(NightPick::Night(d)) => ud_reward_from_profile(*d, &profile, params, kind),
    }
}

/// Wonderful-life reward from the agent's night and the week's profile.
///
/// For the exponential phi this is the analytic single-night difference
/// `phi_d(x_d) - phi_d(x_d - 1)` (every other night cancels); the minority
/// variant recomputes the profile minimum with the agent removed.
pub fn wl_reward_from_profile(
    night: usize,
    profile: &AttendanceProfile,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    let x = profile.counts[night];
    if x == 0 {
        return Err(Error::UndefinedReward(format!(
            "wonderful life on night {night} with zero attendance"
        )));
    }
    match kind {
        PhiKind::Exponential => {
            let alpha = params.alpha()[night];
            let c = params.capacity();
            Ok(phi_exponential(alpha, x, c) - phi_exponential(alpha, x - 1, c))
        }
        PhiKind::Minority => {
            let before = *profile.counts.iter().min().unwrap() as f64;
            let mut reduced = profile.counts.clone();
            reduced[night] -= 1;
            let after = *reduced.iter().min().unwrap() as f64;
            Ok(before - after)
        }
    }
}

/// Wonderful-life reward: world reward minus the world reward of the state
/// with this agent clamped. A clamped agent contributes nothing, so its WL
/// reward is exactly zero.
pub fn wl_reward(
    agent: usize,
    state: &JointState,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    let profile = attendance(state, params)?;
    match state.picks.get(agent) {
        None => Err(Error::Bounds(format!(
            "agent {agent} out of range (N={})",
            state.agent_count()
        ))),
        Some(NightPick::Clamped) => Ok(0.0),
        Some(NightPick::Night(d)) => wl_reward_from_profile(*d, &profile, params, kind),
    }
}

/// Weekly private reward of one agent under the configured reward kind.
pub fn agent_weekly_reward(
    agent: usize,
    state: &JointState,
    params: &WorldParams,
    reward_kind: RewardKind,
    phi_kind: PhiKind,
) -> Result<f64> {
    match reward_kind {
        RewardKind::WorldG => world_reward(state, params, phi_kind),
        RewardKind::UniformDivision => ud_reward(agent, state, params, phi_kind),
        RewardKind::WonderfulLife => wl_reward(agent, state, params, phi_kind),
    }
}

/// Wonderful-life utility for an arbitrary clamp set:
/// `G(traj) - G(clamp(traj, sigma))`.
pub fn wlu(
    traj: &Trajectory,
    sigma: &ClampSet,
    params: &WorldParams,
    kind: PhiKind,
) -> Result<f64> {
    let clamped = clamp(traj, sigma)?;
    Ok(world_utility(traj, params, kind)? - world_utility(&clamped, params, kind)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_state::{JointState, NightPick, Trajectory};

    fn night(k: usize) -> NightPick {
        NightPick::Night(k)
    }

    fn state_of(picks: Vec<usize>, week: usize) -> JointState {
        JointState::new(picks.into_iter().map(night).collect(), week)
    }

    // Frozen with a 40-digit evaluation of alpha * y * exp(-y/c).
    const PHI_6_A1_C6: f64 = 2.207276647028654;
    const PHI_6_A7_C6: f64 = 15.450936529200577;
    const SPREAD_24_UNIFORM: f64 = 3.0770273333073423;
    const E_NEG_SIXTH: f64 = 0.8464817248906141;
    const E_NEG_ONE: f64 = 0.36787944117144233;
    const WL_PAIR_SAME_NIGHT: f64 = 0.5865808962569644;
    const WL_AT_SIX: f64 = 0.03428560449326289;

    #[test]
    fn phi_zero_attendance_is_zero() {
        let p = WorldParams::uniform(7, 1);
        for k in 0..7 {
            assert_eq!(phi(k, 0, &p, PhiKind::Exponential).unwrap(), 0.0);
        }
    }

    #[test]
    fn phi_matches_frozen_values() {
        let p = WorldParams::uniform(7, 6);
        assert!((phi(0, 6, &p, PhiKind::Exponential).unwrap() - PHI_6_A1_C6).abs() < 1e-15);
        let peaked = WorldParams::single_peak(7, 3, 7.0, 6).unwrap();
        assert!((phi(3, 6, &peaked, PhiKind::Exponential).unwrap() - PHI_6_A7_C6).abs() < 1e-14);
    }

    #[test]
    fn phi_minority_scalar_is_rejected() {
        let p = WorldParams::uniform(2, 2);
        assert!(matches!(
            phi(0, 1, &p, PhiKind::Minority),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn phi_exponential_peaks_at_capacity() {
        // Integer capacities: the integer argmax is exactly c. A couple of
        // fractional capacities away from the floor/ceil crossover too.
        for c in [1.0_f64, 2.0, 3.0, 6.0, 9.0, 12.0, 3.3, 8.7] {
            let scan_to = (10.0 * c).ceil() as usize;
            let best = (0..=scan_to)
                .max_by(|&a, &b| {
                    let f = |y: usize| (y as f64) * (-(y as f64) / c).exp();
                    f(a).partial_cmp(&f(b)).unwrap()
                })
                .unwrap();
            assert_eq!(best, c.round() as usize, "capacity {c}");
        }
    }

    #[test]
    fn world_reward_empty_bar_is_zero() {
        let p = WorldParams::uniform(7, 1);
        let state = JointState::new(vec![NightPick::Clamped], 0);
        assert_eq!(world_reward(&state, &p, PhiKind::Exponential).unwrap(), 0.0);
    }

    #[test]
    fn world_reward_uniform_spread() {
        let p = WorldParams::uniform(7, 168);
        let state = state_of((0..168).map(|i| i % 7).collect(), 0);
        let r = world_reward(&state, &p, PhiKind::Exponential).unwrap();
        assert!((r - SPREAD_24_UNIFORM).abs() < 1e-12);
    }

    #[test]
    fn world_reward_six_and_dump() {
        // 6 agents on each of six nights, 132 on the last.
        let p = WorldParams::uniform(7, 168);
        let mut picks = Vec::new();
        for k in 0..6 {
            picks.extend(std::iter::repeat(k).take(6));
        }
        picks.extend(std::iter::repeat(6).take(132));
        let r = world_reward(&state_of(picks, 0), &p, PhiKind::Exponential).unwrap();
        assert!((r - 13.243659918992902).abs() < 1e-12);
    }

    #[test]
    fn world_utility_sums_weeks() {
        let p = WorldParams::uniform(3, 2);
        let s0 = state_of(vec![0, 1], 0);
        let single = Trajectory::new(vec![s0.clone()]).unwrap();
        let w = world_reward(&s0, &p, PhiKind::Exponential).unwrap();
        assert_eq!(world_utility(&single, &p, PhiKind::Exponential).unwrap(), w);

        let mut s1 = s0.clone();
        s1.week = 1;
        let double = Trajectory::new(vec![s0, s1]).unwrap();
        let u = world_utility(&double, &p, PhiKind::Exponential).unwrap();
        assert!((u - 2.0 * w).abs() < 1e-15);
    }

    #[test]
    fn world_utility_rejects_empty_trajectory() {
        let p = WorldParams::uniform(3, 2);
        let empty = Trajectory::new(vec![]).unwrap();
        assert!(matches!(
            world_utility(&empty, &p, PhiKind::Exponential),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn world_utility_matches_per_week_resummation() {
        // Independent oracle: re-sum weekly rewards in reverse order with a
        // compensated accumulator.
        let p = WorldParams::uniform(4, 6);
        let states: Vec<JointState> = (0..5)
            .map(|t| state_of((0..6).map(|i| (i + t) % 4).collect(), t))
            .collect();
        let traj = Trajectory::new(states).unwrap();
        let direct = world_utility(&traj, &p, PhiKind::Exponential).unwrap();
        let mut kahan = 0.0_f64;
        let mut comp = 0.0_f64;
        for state in traj.states().iter().rev() {
            let y = world_reward(state, &p, PhiKind::Exponential).unwrap() - comp;
            let t = kahan + y;
            comp = (t - kahan) - y;
            kahan = t;
        }
        assert!((direct - kahan).abs() < 1e-12);
    }

    #[test]
    fn ud_reward_frozen_examples() {
        let p = WorldParams::uniform(7, 1);
        let alone = state_of(vec![2], 0);
        assert!((ud_reward(0, &alone, &p, PhiKind::Exponential).unwrap() - E_NEG_SIXTH).abs() < 1e-15);

        let p6 = WorldParams::uniform(7, 6);
        let six = state_of(vec![4; 6], 0);
        assert!((ud_reward(0, &six, &p6, PhiKind::Exponential).unwrap() - E_NEG_ONE).abs() < 1e-15);
    }

    #[test]
    fn ud_rewards_sum_to_world_reward() {
        let p = WorldParams::uniform(7, 168);
        let state = state_of((0..168).map(|i| (i * i + 3 * i) % 7).collect(), 0);
        let world = world_reward(&state, &p, PhiKind::Exponential).unwrap();
        let total: f64 = (0..168)
            .map(|a| ud_reward(a, &state, &p, PhiKind::Exponential).unwrap())
            .sum();
        assert!((total - world).abs() < 1e-9);
    }

    #[test]
    fn ud_reward_rejects_clamped_agent() {
        let p = WorldParams::uniform(3, 2);
        let state = JointState::new(vec![NightPick::Clamped, night(1)], 0);
        assert!(matches!(
            ud_reward(0, &state, &p, PhiKind::Exponential),
            Err(Error::UndefinedReward(_))
        ));
    }

    #[test]
    fn wl_reward_frozen_examples() {
        let p = WorldParams::uniform(7, 1);
        let alone = state_of(vec![5], 0);
        assert!((wl_reward(0, &alone, &p, PhiKind::Exponential).unwrap() - E_NEG_SIXTH).abs() < 1e-15);

        let p6 = WorldParams::uniform(7, 6);
        let six = state_of(vec![1; 6], 0);
        assert!((wl_reward(0, &six, &p6, PhiKind::Exponential).unwrap() - WL_AT_SIX).abs() < 1e-15);

        let p2 = WorldParams::uniform(7, 2);
        let pair = state_of(vec![3, 3], 0);
        for a in 0..2 {
            assert!(
                (wl_reward(a, &pair, &p2, PhiKind::Exponential).unwrap() - WL_PAIR_SAME_NIGHT)
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn wl_reward_of_clamped_agent_is_zero() {
        let p = WorldParams::uniform(3, 2);
        let state = JointState::new(vec![NightPick::Clamped, night(1)], 0);
        assert_eq!(wl_reward(0, &state, &p, PhiKind::Exponential).unwrap(), 0.0);
    }

    #[test]
    fn wl_analytic_matches_clamp_definition() {
        let p = WorldParams::uniform(5, 12);
        let state = state_of((0..12).map(|i| (7 * i + 1) % 5).collect(), 0);
        for agent in 0..12 {
            let fast = wl_reward(agent, &state, &p, PhiKind::Exponential).unwrap();
            let clamped = state.clamp_agent(agent).unwrap();
            let slow = world_reward(&state, &p, PhiKind::Exponential).unwrap()
                - world_reward(&clamped, &p, PhiKind::Exponential).unwrap();
            assert!((fast - slow).abs() < 1e-12, "agent {agent}: {fast} vs {slow}");
        }
    }

    #[test]
    fn wlu_of_empty_sigma_is_zero() {
        let p = WorldParams::uniform(3, 2);
        let traj = Trajectory::new(vec![state_of(vec![0, 2], 0)]).unwrap();
        assert_eq!(wlu(&traj, &ClampSet::new(), &p, PhiKind::Exponential).unwrap(), 0.0);
    }

    #[test]
    fn wlu_effect_set_matches_weekly_sum() {
        let p = WorldParams::uniform(4, 9);
        let states: Vec<JointState> = (0..6)
            .map(|t| state_of((0..9).map(|i| (i + 2 * t) % 4).collect(), t))
            .collect();
        let traj = Trajectory::new(states).unwrap();
        for agent in [0, 4, 8] {
            let sigma = ClampSet::effect_set(agent, traj.weeks());
            let via_wlu = wlu(&traj, &sigma, &p, PhiKind::Exponential).unwrap();
            let weekly: f64 = traj
                .states()
                .iter()
                .map(|s| wl_reward(agent, s, &p, PhiKind::Exponential).unwrap())
                .sum();
            assert!((via_wlu - weekly).abs() < 1e-9, "agent {agent}");
        }
    }

    #[test]
    fn wlu_of_everything_is_world_utility() {
        let p = WorldParams::uniform(4, 5);
        let states: Vec<JointState> = (0..3)
            .map(|t| state_of((0..5).map(|i| (i + t) % 4).collect(), t))
            .collect();
        let traj = Trajectory::new(states).unwrap();
        let sigma = ClampSet::everything(5, 3);
        let total = wlu(&traj, &sigma, &p, PhiKind::Exponential).unwrap();
        let g = world_utility(&traj, &p, PhiKind::Exponential).unwrap();
        assert_eq!(total, g); // clamped world has G = 0 exactly
    }

    #[test]
    fn minority_world_reward_is_min_count() {
        let p = WorldParams::uniform(2, 5);
        let state = state_of(vec![0, 0, 0, 1, 1], 0);
        assert_eq!(world_reward(&state, &p, PhiKind::Minority).unwrap(), 2.0);
    }

    #[test]
    fn minority_night_reward_tie_breaks_low() {
        let profile = AttendanceProfile { counts: vec![2, 2, 3] };
        assert_eq!(minority_night_reward(0, &profile), 2.0);
        assert_eq!(minority_night_reward(1, &profile), 0.0);
        assert_eq!(minority_night_reward(2, &profile), 0.0);
    }

    #[test]
    fn minority_ud_sums_to_world_reward() {
        let p = WorldParams::uniform(2, 5);
        let state = state_of(vec![0, 0, 0, 1, 1], 0);
        let world = world_reward(&state, &p, PhiKind::Minority).unwrap();
        let total: f64 = (0..5)
            .map(|a| ud_reward(a, &state, &p, PhiKind::Minority).unwrap())
            .sum();
        assert!((total - world).abs() < 1e-12);
    }

    #[test]
    fn minority_wl_matches_clamp_definition() {
        let p = WorldParams::uniform(2, 5);
        let state = state_of(vec![0, 0, 0, 1, 1], 0);
        for agent in 0..5 {
            let fast = wl_reward(agent, &state, &p, PhiKind::Minority).unwrap();
            let clamped = state.clamp_agent(agent).unwrap();
            let slow = world_reward(&state, &p, PhiKind::Minority).unwrap()
                - world_reward(&clamped, &p, PhiKind::Minority).unwrap();
            assert_eq!(fast, slow, "agent {agent}");
        }
    }

    #[test]
    fn world_params_validation() {
        assert!(WorldParams::new(vec![], 6.0, 1).is_err());
        assert!(WorldParams::new(vec![1.0, -0.5], 6.0, 1).is_err());
        assert!(WorldParams::new(vec![1.0], 0.0, 1).is_err());
        assert!(WorldParams::new(vec![1.0], 6.0, 0).is_err());
    }
}
