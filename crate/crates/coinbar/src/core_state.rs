//! Core state representation: picks, joint weekly states, trajectories,
//! attendance profiles and the counterfactual clamping operator.
//!
//! Everything here is an immutable value; `clamp` returns a fresh trajectory
//! and never touches its input, which is what lets wonderful-life rewards
//! evaluate the factual and counterfactual worlds side by side.

use std::collections::BTreeSet;

use crate::utilities::WorldParams;
use crate::{Error, Result};

/// One agent's action in one week: a night index in `0..K`, or the null
/// ("clamped") action that stands for the agent having done nothing.
///
/// Externally an action can be viewed as a unary K-dimensional vector via
/// [`NightPick::unary`]; the clamped pick maps to the all-zeros vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NightPick {
    Night(usize),
    Clamped,
}

impl NightPick {
    pub fn is_clamped(self) -> bool {
        matches!(self, NightPick::Clamped)
    }

    /// Night index, or `None` for the clamped pick.
    pub fn night(self) -> Option<usize> {
        match self {
            NightPick::Night(k) => Some(k),
            NightPick::Clamped => None,
        }
    }

    /// Unary (one-hot) encoding over `nights` components; the clamped pick
    /// encodes as all zeros.
    pub fn unary(self, nights: usize) -> Vec<f64> {
        let mut v = vec![0.0; nights];
        if let NightPick::Night(k) = self {
            v[k] = 1.0;
        }
        v
    }
}

/// All agents' picks for a single week.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointState {
    pub picks: Vec<NightPick>,
    pub week: usize,
}

impl JointState {
    pub fn new(picks: Vec<NightPick>, week: usize) -> Self {
        JointState { picks, week }
    }

    pub fn agent_count(&self) -> usize {
        self.picks.len()
    }

    /// Copy with one agent's pick replaced.
    pub fn with_pick(&self, agent: usize, pick: NightPick) -> Result<JointState> {
        if agent >= self.picks.len() {
            return Err(Error::Bounds(format!(
                "agent {agent} out of range (N={})",
                self.picks.len()
            )));
        }
        let mut out = self.clone();
        out.picks[agent] = pick;
        Ok(out)
    }

    /// Copy with one agent clamped to the null action.
    pub fn clamp_agent(&self, agent: usize) -> Result<JointState> {
        self.with_pick(agent, NightPick::Clamped)
    }
}

/// Sequence of joint states for weeks `0..T`, contiguous and in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    states: Vec<JointState>,
}

impl Trajectory {
    /// Validates contiguous week numbering and a uniform agent count.
    pub fn new(states: Vec<JointState>) -> Result<Self> {
        let n = states.first().map(|s| s.agent_count()).unwrap_or(0);
        for (t, s) in states.iter().enumerate() {
            if s.week != t {
                return Err(Error::Config(format!(
                    "trajectory week {} found at position {t}",
                    s.week
                )));
            }
            if s.agent_count() != n {
                return Err(Error::Config(format!(
                    "trajectory mixes agent counts {n} and {} (week {t})",
                    s.agent_count()
                )));
            }
        }
        Ok(Trajectory { states })
    }

    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn state(&self, week: usize) -> &JointState {
        &self.states[week]
    }

    pub fn weeks(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Agent count shared by every week (0 for an empty trajectory).
    pub fn agent_count(&self) -> usize {
        self.states.first().map(|s| s.agent_count()).unwrap_or(0)
    }
}

/// Attendance on each night for one week; clamped agents are counted nowhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttendanceProfile {
    pub counts: Vec<usize>,
}

impl AttendanceProfile {
    pub fn nights(&self) -> usize {
        self.counts.len()
    }

    /// Number of (unclamped) agents counted in the profile.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Set of (agent, week) pairs whose actions the clamp operator nulls out.
///
/// The effect set of an agent is approximated by its own action sequence, so
/// [`ClampSet::effect_set`] builds `{(agent, t) for all t}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClampSet {
    members: BTreeSet<(usize, usize)>,
}

impl ClampSet {
    pub fn new() -> Self {
        ClampSet::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        ClampSet {
            members: pairs.into_iter().collect(),
        }
    }

    /// `{(agent, t) for t in 0..weeks}` — the single-agent effect set.
    pub fn effect_set(agent: usize, weeks: usize) -> Self {
        ClampSet::from_pairs((0..weeks).map(|t| (agent, t)))
    }

    /// Every agent-week pair of an `agents x weeks` trajectory.
    pub fn everything(agents: usize, weeks: usize) -> Self {
        ClampSet::from_pairs((0..agents).flat_map(|a| (0..weeks).map(move |t| (a, t))))
    }

    pub fn insert(&mut self, agent: usize, week: usize) {
        self.members.insert((agent, week));
    }

    pub fn contains(&self, agent: usize, week: usize) -> bool {
        self.members.contains(&(agent, week))
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// If the set is exactly one agent's effect set over `weeks` weeks,
    /// returns that agent.
    pub fn single_agent_effect_set(&self, weeks: usize) -> Option<usize> {
        let agent = self.members.iter().next()?.0;
        if self.members.len() == weeks && (0..weeks).all(|t| self.contains(agent, t)) {
            Some(agent)
        } else {
            None
        }
    }
}

/// Counts attendance per night; clamped agents are excluded.
pub fn attendance(state: &JointState, params: &WorldParams) -> Result<AttendanceProfile> {
    if state.agent_count() != params.agents() {
        return Err(Error::Config(format!(
            "state has {} picks but params expect N={}",
            state.agent_count(),
            params.agents()
        )));
    }
    let mut counts = vec![0usize; params.nights()];
    for pick in &state.picks {
        if let NightPick::Night(k) = *pick {
            if k >= params.nights() {
                return Err(Error::Config(format!(
                    "pick {k} out of range (K={})",
                    params.nights()
                )));
            }
            counts[k] += 1;
        }
    }
    Ok(AttendanceProfile { counts })
}

/// Clamping operator: returns a copy of `traj` with every `(agent, week)`
/// member of `sigma` set to the null pick. Purely counterfactual — no
/// dynamics are re-run, and the input is untouched.
pub fn clamp(traj: &Trajectory, sigma: &ClampSet) -> Result<Trajectory> {
    let weeks = traj.weeks();
    let agents = traj.agent_count();
    for (a, t) in sigma.members() {
        if a >= agents || t >= weeks {
            return Err(Error::Bounds(format!(
                "clamp member (agent {a}, week {t}) outside trajectory (N={agents}, T={weeks})"
            )));
        }
    }
    let mut states = traj.states().to_vec();
    for (a, t) in sigma.members() {
        states[t].picks[a] = NightPick::Clamped;
    }
    Trajectory::new(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utilities::WorldParams;

    fn params(nights: usize, agents: usize) -> WorldParams {
        WorldParams::uniform(nights, agents)
    }

    fn night(k: usize) -> NightPick {
        NightPick::Night(k)
    }

    // Independent oracle: count by scanning picks per night.
    fn brute_count(state: &JointState, nights: usize) -> Vec<usize> {
        (0..nights)
            .map(|k| {
                state
                    .picks
                    .iter()
                    .filter(|p| p.night() == Some(k))
                    .count()
            })
            .collect()
    }

    #[test]
    fn attendance_all_on_night_zero() {
        let state = JointState::new(vec![night(0); 3], 0);
        let prof = attendance(&state, &params(7, 3)).unwrap();
        assert_eq!(prof.counts, vec![3, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn attendance_excludes_clamped() {
        let state = JointState::new(vec![night(1), NightPick::Clamped], 0);
        let prof = attendance(&state, &params(3, 2)).unwrap();
        assert_eq!(prof.counts, vec![0, 1, 0]);
    }

    #[test]
    fn attendance_uniform_spread_matches_brute_force() {
        let picks: Vec<NightPick> = (0..168).map(|i| night(i % 7)).collect();
        let state = JointState::new(picks, 0);
        let prof = attendance(&state, &params(7, 168)).unwrap();
        assert_eq!(prof.counts, vec![24; 7]);
        assert_eq!(prof.counts, brute_count(&state, 7));
    }

    #[test]
    fn attendance_rejects_length_mismatch() {
        let state = JointState::new(vec![night(0); 3], 0);
        assert!(matches!(
            attendance(&state, &params(7, 4)),
            Err(Error::Config(_))
        ));
    }

    fn toy_trajectory() -> Trajectory {
        let s0 = JointState::new(vec![night(3), night(1)], 0);
        let s1 = JointState::new(vec![night(2), night(2)], 1);
        Trajectory::new(vec![s0, s1]).unwrap()
    }

    #[test]
    fn clamp_single_member() {
        let traj = toy_trajectory();
        let out = clamp(&traj, &ClampSet::from_pairs([(0, 0)])).unwrap();
        assert_eq!(out.state(0).picks[0], NightPick::Clamped);
        assert_eq!(out.state(0).picks[1], night(1));
        assert_eq!(out.state(1), traj.state(1));
        // input untouched
        assert_eq!(traj.state(0).picks[0], night(3));
    }

    #[test]
    fn clamp_empty_set_is_identity() {
        let traj = toy_trajectory();
        assert_eq!(clamp(&traj, &ClampSet::new()).unwrap(), traj);
    }

    #[test]
    fn clamp_is_idempotent() {
        let traj = toy_trajectory();
        let sigma = ClampSet::from_pairs([(0, 0), (1, 1)]);
        let once = clamp(&traj, &sigma).unwrap();
        let twice = clamp(&once, &sigma).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn clamp_commutes_over_disjoint_sets() {
        let traj = toy_trajectory();
        let a = ClampSet::from_pairs([(0, 0)]);
        let b = ClampSet::from_pairs([(1, 1)]);
        let ab = clamp(&clamp(&traj, &a).unwrap(), &b).unwrap();
        let ba = clamp(&clamp(&traj, &b).unwrap(), &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn clamp_rejects_out_of_bounds() {
        let traj = toy_trajectory();
        assert!(matches!(
            clamp(&traj, &ClampSet::from_pairs([(2, 0)])),
            Err(Error::Bounds(_))
        ));
        assert!(matches!(
            clamp(&traj, &ClampSet::from_pairs([(0, 2)])),
            Err(Error::Bounds(_))
        ));
    }

    #[test]
    fn clamping_one_agent_shifts_attendance_by_one() {
        let p = params(4, 5);
        let picks = vec![night(2), night(0), night(2), night(3), night(2)];
        let state = JointState::new(picks, 0);
        let before = attendance(&state, &p).unwrap();
        let clamped = state.clamp_agent(0).unwrap();
        let after = attendance(&clamped, &p).unwrap();
        for k in 0..4 {
            let expected = if k == 2 { before.counts[k] - 1 } else { before.counts[k] };
            assert_eq!(after.counts[k], expected);
        }
        assert_eq!(after.total() + 1, 5);
    }

    #[test]
    fn unary_encoding_round_trips() {
        assert_eq!(night(2).unary(4), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(NightPick::Clamped.unary(4), vec![0.0; 4]);
    }

    #[test]
    fn trajectory_rejects_gaps_and_mixed_counts() {
        let s0 = JointState::new(vec![night(0)], 0);
        let s2 = JointState::new(vec![night(0)], 2);
        assert!(Trajectory::new(vec![s0.clone(), s2]).is_err());
        let wide = JointState::new(vec![night(0), night(0)], 1);
        assert!(Trajectory::new(vec![s0, wide]).is_err());
    }

    #[test]
    fn effect_set_recognition() {
        let sigma = ClampSet::effect_set(3, 5);
        assert_eq!(sigma.single_agent_effect_set(5), Some(3));
        assert_eq!(sigma.single_agent_effect_set(4), None);
        let mut broken = sigma.clone();
        broken.insert(1, 0);
        assert_eq!(broken.single_agent_effect_set(5), None);
    }
}
