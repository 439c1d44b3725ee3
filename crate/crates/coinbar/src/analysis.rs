//! Empirical verification machinery: exhaustive factoredness checking,
//! sampled learnability estimation, the optimal-allocation oracle and
//! convergence-time measurement.

use std::collections::BTreeMap;

use rand::Rng;

use crate::core_state::{attendance, AttendanceProfile, ClampSet, JointState, NightPick, Trajectory};
use crate::utilities::{
    agent_weekly_reward, ud_reward_from_profile, wl_reward_from_profile,
    world_reward_from_profile, PhiKind, RewardKind, WorldParams,
};
use crate::{Error, Result};

/// Exhaustive-enumeration budget for the factoredness checker: the number of
/// joint pick profiles `K^N` may not exceed this.
pub const FACTOREDNESS_BUDGET: u64 = 1_000_000;

/// Default smoothing window (weeks) for convergence measurement.
pub const DEFAULT_CONVERGENCE_WINDOW: usize = 100;
/// Default convergence band as a fraction of the plateau value.
pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 0.05;

// ---------------------------------------------------------------------------
// Factoredness
// ---------------------------------------------------------------------------

/// A concrete violation of the factoredness sign condition: two single-week
/// profiles differing only in one agent's pick, on which the personal and
/// world rewards disagree about which state is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub agent: usize,
    /// The base profile as night indices, one per agent.
    pub base_picks: Vec<usize>,
    /// The alternative night for `agent` (all other picks unchanged).
    pub alt_night: usize,
    pub personal_base: f64,
    pub personal_alt: f64,
    pub world_base: f64,
    pub world_alt: f64,
}

impl Counterexample {
    /// Re-evaluates both states from scratch through the state-based reward
    /// functions and confirms the recorded pair genuinely violates the sign
    /// condition. This is the independent route; the checker itself works on
    /// incrementally adjusted profiles.
    pub fn verify(
        &self,
        params: &WorldParams,
        reward_kind: RewardKind,
        phi_kind: PhiKind,
    ) -> Result<bool> {
        let base = JointState::new(
            self.base_picks.iter().map(|&k| NightPick::Night(k)).collect(),
            0,
        );
        let alt = base.with_pick(self.agent, NightPick::Night(self.alt_night))?;
        let g_a = agent_weekly_reward(self.agent, &base, params, reward_kind, phi_kind)?;
        let g_b = agent_weekly_reward(self.agent, &alt, params, reward_kind, phi_kind)?;
        let w_a = crate::utilities::world_reward(&base, params, phi_kind)?;
        let w_b = crate::utilities::world_reward(&alt, params, phi_kind)?;
        Ok(!signs_agree(g_a, g_b, w_a, w_b))
    }
}

/// Outcome of an exhaustive factoredness check.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredVerdict {
    pub factored: bool,
    pub counterexample: Option<Counterexample>,
}

/// The sign condition, exactly as defined: `(g_a >= g_b) <=> (w_a >= w_b)`
/// in both directions, with plain floating-point comparisons.
fn signs_agree(g_a: f64, g_b: f64, w_a: f64, w_b: f64) -> bool {
    ((g_a >= g_b) == (w_a >= w_b)) && ((g_b >= g_a) == (w_b >= w_a))
}

/// Personal weekly reward of an agent attending `night`, from a profile.
fn personal_from_profile(
    night: usize,
    profile: &AttendanceProfile,
    params: &WorldParams,
    reward_kind: RewardKind,
    phi_kind: PhiKind,
) -> Result<f64> {
    match reward_kind {
        RewardKind::WorldG => world_reward_from_profile(profile, params, phi_kind),
        RewardKind::UniformDivision => ud_reward_from_profile(night, profile, params, phi_kind),
        RewardKind::WonderfulLife => wl_reward_from_profile(night, profile, params, phi_kind),
    }
}

/// Enumerates every single-week joint pick profile of the instance and every
/// pair of profiles differing only in one agent's pick, and checks the
/// factoredness sign condition on each pair. Returns the first violation
/// found (scan order: profile odometer, then agent, then alternative night)
/// or `factored = true`.
///
/// The enumeration treats a week as a one-shot game: dynamics are the
/// identity on picks, and the personal utility is the weekly reward under
/// `reward_kind`.
pub fn factoredness_check(
    params: &WorldParams,
    reward_kind: RewardKind,
    phi_kind: PhiKind,
) -> Result<FactoredVerdict> {
    let n = params.agents();
    let k = params.nights();
    let mut budget: u64 = 1;
    for _ in 0..n {
        budget = budget.saturating_mul(k as u64);
        if budget > FACTOREDNESS_BUDGET {
            return Err(Error::TooLarge(format!(
                "K^N = {k}^{n} exceeds the enumeration budget of {FACTOREDNESS_BUDGET}"
            )));
        }
    }

    let mut picks = vec![0usize; n];
    loop {
        let mut counts = vec![0usize; k];
        for &p in &picks {
            counts[p] += 1;
        }
        let base_profile = AttendanceProfile { counts };
        let world_base = world_reward_from_profile(&base_profile, params, phi_kind)?;

        for agent in 0..n {
            let d = picks[agent];
            // Each unordered pair is visited once, from its lower-pick side;
            // the sign condition is checked in both directions.
            for alt in d + 1..k {
                let g_a = personal_from_profile(d, &base_profile, params, reward_kind, phi_kind)?;
                let mut alt_profile = base_profile.clone();
                alt_profile.counts[d] -= 1;
                alt_profile.counts[alt] += 1;
                let g_b = personal_from_profile(alt, &alt_profile, params, reward_kind, phi_kind)?;
                let world_alt = world_reward_from_profile(&alt_profile, params, phi_kind)?;
                if !signs_agree(g_a, g_b, world_base, world_alt) {
                    return Ok(FactoredVerdict {
                        factored: false,
                        counterexample: Some(Counterexample {
                            agent,
                            base_picks: picks.clone(),
                            alt_night: alt,
                            personal_base: g_a,
                            personal_alt: g_b,
                            world_base,
                            world_alt,
                        }),
                    });
                }
            }
        }

        // Odometer step.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(FactoredVerdict {
                    factored: true,
                    counterexample: None,
                });
            }
            picks[i] += 1;
            if picks[i] < k {
                break;
            }
            picks[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Learnability
// ---------------------------------------------------------------------------

/// A sampled change to the observed agent's own pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwnFlip {
    pub week: usize,
    pub agent: usize,
    pub alt_night: usize,
}

/// A sampled change to some *other* agent's pick, with `agent` observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtherFlip {
    pub week: usize,
    pub agent: usize,
    pub other: usize,
    pub alt_night: usize,
}

/// A concrete set of single-pick perturbations, shared between estimators so
/// their results are comparable sample for sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbations {
    pub own: Vec<OwnFlip>,
    pub other: Vec<OtherFlip>,
}

impl Perturbations {
    pub fn samples(&self) -> usize {
        self.own.len()
    }

    /// The single observed agent, if every sample shares one.
    pub fn observed_agent(&self) -> Option<usize> {
        let first = self.own.first().map(|f| f.agent).or_else(|| self.other.first().map(|f| f.agent))?;
        let uniform = self.own.iter().all(|f| f.agent == first)
            && self.other.iter().all(|f| f.agent == first);
        uniform.then_some(first)
    }
}

fn check_estimator_instance(traj: &Trajectory, params: &WorldParams) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::Usage("learnability needs a non-empty trajectory".into()));
    }
    if traj.agent_count() != params.agents() {
        return Err(Error::Config(format!(
            "trajectory has N={} but params expect N={}",
            traj.agent_count(),
            params.agents()
        )));
    }
    if params.agents() < 2 {
        return Err(Error::Usage(
            "learnability is undefined with a single agent: there are no other agents to perturb"
                .into(),
        ));
    }
    if params.nights() < 2 {
        return Err(Error::Usage(
            "learnability needs K >= 2 so that alternative picks exist".into(),
        ));
    }
    Ok(())
}

fn pick_of(traj: &Trajectory, week: usize, agent: usize) -> Result<usize> {
    traj.state(week).picks[agent].night().ok_or_else(|| {
        Error::Usage(format!(
            "trajectory has a clamped pick (agent {agent}, week {week}); perturbation sampling needs pick-complete states"
        ))
    })
}

fn sample_alt_night<R: Rng>(current: usize, nights: usize, rng: &mut R) -> usize {
    let mut alt = rng.gen_range(0..nights - 1);
    if alt >= current {
        alt += 1;
    }
    alt
}

/// Samples `samples` own-pick flips and `samples` other-agent flips, with
/// the observed agent drawn uniformly per sample. Draw order per own sample:
/// week, agent, alternative night; per other sample: week, agent, other,
/// alternative night.
pub fn sample_perturbations<R: Rng>(
    traj: &Trajectory,
    params: &WorldParams,
    samples: usize,
    rng: &mut R,
) -> Result<Perturbations> {
    sample_impl(traj, params, None, samples, rng)
}

/// Like [`sample_perturbations`] with the observed agent held fixed.
pub fn sample_perturbations_for_agent<R: Rng>(
    traj: &Trajectory,
    params: &WorldParams,
    agent: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Perturbations> {
    if agent >= params.agents() {
        return Err(Error::Bounds(format!(
            "observed agent {agent} out of range (N={})",
            params.agents()
        )));
    }
    sample_impl(traj, params, Some(agent), samples, rng)
}

fn sample_impl<R: Rng>(
    traj: &Trajectory,
    params: &WorldParams,
    fixed_agent: Option<usize>,
    samples: usize,
    rng: &mut R,
) -> Result<Perturbations> {
    check_estimator_instance(traj, params)?;
    if samples == 0 {
        return Err(Error::Usage("at least one perturbation sample is required".into()));
    }
    let weeks = traj.weeks();
    let n = params.agents();
    let k = params.nights();

    let mut own = Vec::with_capacity(samples);
    for _ in 0..samples {
        let week = rng.gen_range(0..weeks);
        let agent = fixed_agent.unwrap_or_else(|| rng.gen_range(0..n));
        let current = pick_of(traj, week, agent)?;
        own.push(OwnFlip {
            week,
            agent,
            alt_night: sample_alt_night(current, k, rng),
        });
    }
    let mut other = Vec::with_capacity(samples);
    for _ in 0..samples {
        let week = rng.gen_range(0..weeks);
        let agent = fixed_agent.unwrap_or_else(|| rng.gen_range(0..n));
        let mut oth = rng.gen_range(0..n - 1);
        if oth >= agent {
            oth += 1;
        }
        let current = pick_of(traj, week, oth)?;
        other.push(OtherFlip {
            week,
            agent,
            other: oth,
            alt_night: sample_alt_night(current, k, rng),
        });
    }
    Ok(Perturbations { own, other })
}

/// Weekly private reward of the observed agent, from a profile. The
/// wonderful-life value is evaluated by its clamping definition (full sum
/// minus the sum with the agent removed) so that it shares rounding behavior
/// with the world-utility differences in [`theorem2_ratio`].
fn gamma_from_profile(
    night: usize,
    profile: &AttendanceProfile,
    params: &WorldParams,
    reward_kind: RewardKind,
    phi_kind: PhiKind,
) -> Result<f64> {
    match reward_kind {
        RewardKind::WorldG => world_reward_from_profile(profile, params, phi_kind),
        RewardKind::UniformDivision => ud_reward_from_profile(night, profile, params, phi_kind),
        RewardKind::WonderfulLife => {
            let full = world_reward_from_profile(profile, params, phi_kind)?;
            let mut reduced = profile.clone();
            if reduced.counts[night] == 0 {
                return Err(Error::UndefinedReward(format!(
                    "wonderful life on night {night} with zero attendance"
                )));
            }
            reduced.counts[night] -= 1;
            let clamped = world_reward_from_profile(&reduced, params, phi_kind)?;
            Ok(full - clamped)
        }
    }
}

fn weekly_profiles(traj: &Trajectory, params: &WorldParams) -> Result<Vec<AttendanceProfile>> {
    traj.states().iter().map(|s| attendance(s, params)).collect()
}

fn moved(profile: &AttendanceProfile, from: usize, to: usize) -> AttendanceProfile {
    let mut out = profile.clone();
    out.counts[from] -= 1;
    out.counts[to] += 1;
    out
}

fn rms(sum_sq: f64, count: usize) -> f64 {
    (sum_sq / count as f64).sqrt()
}

/// Finite-difference learnability of a reward kind on a trajectory, from an
/// explicit perturbation set: the RMS reward change under own-pick flips
/// divided by the RMS change under single-other-agent flips. A zero
/// denominator reports `+inf` (perfectly learnable).
pub fn learnability_from_perturbations(
    traj: &Trajectory,
    reward_kind: RewardKind,
    params: &WorldParams,
    phi_kind: PhiKind,
    pert: &Perturbations,
) -> Result<f64> {
    check_estimator_instance(traj, params)?;
    if pert.own.is_empty() || pert.other.is_empty() {
        return Err(Error::Usage("empty perturbation set".into()));
    }
    let profiles = weekly_profiles(traj, params)?;

    let mut own_sq = 0.0;
    for flip in &pert.own {
        let d = pick_of(traj, flip.week, flip.agent)?;
        let base_profile = &profiles[flip.week];
        let gamma_base = gamma_from_profile(d, base_profile, params, reward_kind, phi_kind)?;
        let alt_profile = moved(base_profile, d, flip.alt_night);
        let gamma_alt =
            gamma_from_profile(flip.alt_night, &alt_profile, params, reward_kind, phi_kind)?;
        own_sq += (gamma_alt - gamma_base).powi(2);
    }

    let mut other_sq = 0.0;
    for flip in &pert.other {
        let d = pick_of(traj, flip.week, flip.agent)?;
        let moved_from = pick_of(traj, flip.week, flip.other)?;
        let base_profile = &profiles[flip.week];
        let gamma_base = gamma_from_profile(d, base_profile, params, reward_kind, phi_kind)?;
        let alt_profile = moved(base_profile, moved_from, flip.alt_night);
        let gamma_alt = gamma_from_profile(d, &alt_profile, params, reward_kind, phi_kind)?;
        other_sq += (gamma_alt - gamma_base).powi(2);
    }

    let numerator = rms(own_sq, pert.own.len());
    let denominator = rms(other_sq, pert.other.len());
    if denominator == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(numerator / denominator)
}

/// Samples `samples` perturbations (observed agent pooled uniformly) and
/// returns the finite-difference learnability of `reward_kind`.
pub fn learnability_estimate<R: Rng>(
    traj: &Trajectory,
    reward_kind: RewardKind,
    params: &WorldParams,
    phi_kind: PhiKind,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let pert = sample_perturbations(traj, params, samples, rng)?;
    learnability_from_perturbations(traj, reward_kind, params, phi_kind, &pert)
}

/// Learnability of all three reward kinds on one shared perturbation set,
/// plus the WL-over-G ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnabilityReport {
    pub lambda: BTreeMap<RewardKind, f64>,
    pub ratio_wl_over_g: f64,
    pub samples: usize,
    pub perturbation_seed: u64,
}

pub fn learnability_report(
    traj: &Trajectory,
    params: &WorldParams,
    phi_kind: PhiKind,
    samples: usize,
    seed: u64,
) -> Result<LearnabilityReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pert = sample_perturbations(traj, params, samples, &mut rng)?;
    let mut lambda = BTreeMap::new();
    for kind in RewardKind::ALL {
        lambda.insert(
            kind,
            learnability_from_perturbations(traj, kind, params, phi_kind, &pert)?,
        );
    }
    let ratio_wl_over_g =
        lambda[&RewardKind::WonderfulLife] / lambda[&RewardKind::WorldG];
    Ok(LearnabilityReport {
        lambda,
        ratio_wl_over_g,
        samples,
        perturbation_seed: seed,
    })
}

// ---------------------------------------------------------------------------
// Theorem-2 gradient-norm ratio
// ---------------------------------------------------------------------------

/// Finite-difference version of the clamping signal-to-noise ratio: the RMS
/// world-reward response to other-agent flips, divided by the RMS response
/// of the *clamp-corrected* world reward (world reward minus the world
/// reward of the sigma-clamped state) to the same flips.
///
/// With `sigma` equal to the observed agent's effect set this equals the
/// WL-over-G learnability ratio computed from the same perturbation set, up
/// to floating-point rearrangement.
pub fn theorem2_ratio(
    traj: &Trajectory,
    sigma: &ClampSet,
    params: &WorldParams,
    phi_kind: PhiKind,
    pert: &Perturbations,
) -> Result<f64> {
    check_estimator_instance(traj, params)?;
    if pert.other.is_empty() {
        return Err(Error::Usage("empty perturbation set".into()));
    }
    let weeks = traj.weeks();
    let agents = params.agents();
    for (a, t) in sigma.members() {
        if a >= agents || t >= weeks {
            return Err(Error::Bounds(format!(
                "sigma member (agent {a}, week {t}) outside trajectory (N={agents}, T={weeks})"
            )));
        }
    }
    if let (Some(sigma_agent), Some(observed)) =
        (sigma.single_agent_effect_set(weeks), pert.observed_agent())
    {
        if sigma_agent != observed {
            return Err(Error::Usage(format!(
                "sigma clamps agent {sigma_agent} but the perturbations observe agent {observed}"
            )));
        }
    }

    let profiles = weekly_profiles(traj, params)?;
    // Per-week profiles of the sigma-clamped trajectory.
    let mut clamped_profiles = profiles.clone();
    for (a, t) in sigma.members() {
        if let Some(d) = traj.state(t).picks[a].night() {
            clamped_profiles[t].counts[d] -= 1;
        }
    }

    let mut num_sq = 0.0;
    let mut den_sq = 0.0;
    for flip in &pert.other {
        let t = flip.week;
        let from = pick_of(traj, t, flip.other)?;
        let base = world_reward_from_profile(&profiles[t], params, phi_kind)?;
        let alt_profile = moved(&profiles[t], from, flip.alt_night);
        let alt = world_reward_from_profile(&alt_profile, params, phi_kind)?;
        let delta_g = alt - base;

        // In the clamped world a flip of a clamped agent changes nothing.
        let delta_clamped = if sigma.contains(flip.other, t) {
            0.0
        } else {
            let cl_base = world_reward_from_profile(&clamped_profiles[t], params, phi_kind)?;
            let cl_alt_profile = moved(&clamped_profiles[t], from, flip.alt_night);
            let cl_alt = world_reward_from_profile(&cl_alt_profile, params, phi_kind)?;
            cl_alt - cl_base
        };

        num_sq += delta_g * delta_g;
        let corrected = delta_g - delta_clamped;
        den_sq += corrected * corrected;
    }

    let numerator = rms(num_sq, pert.other.len());
    let denominator = rms(den_sq, pert.other.len());
    if denominator == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(numerator / denominator)
}

// ---------------------------------------------------------------------------
// Optimal allocation
// ---------------------------------------------------------------------------

/// Largest agent count the allocation oracle accepts. The dynamic program is
/// exact but `O(K * N^2)`, so the cap is generous rather than fast.
pub const OPTIMAL_ALLOCATION_MAX_AGENTS: usize = 100_000;

/// Exact maximizer of the weekly world reward over integer attendance
/// profiles summing to `N`, by dynamic programming over (night, agents
/// remaining). Ties break toward the lexicographically smallest profile.
/// Exponential phi only.
pub fn optimal_allocation(
    params: &WorldParams,
    phi_kind: PhiKind,
) -> Result<(AttendanceProfile, f64)> {
    if phi_kind != PhiKind::Exponential {
        return Err(Error::Unsupported(
            "optimal allocation is defined for the exponential phi only".into(),
        ));
    }
    let n = params.agents();
    let k = params.nights();
    if n > OPTIMAL_ALLOCATION_MAX_AGENTS {
        return Err(Error::TooLarge(format!(
            "N={n} exceeds the allocation oracle cap of {OPTIMAL_ALLOCATION_MAX_AGENTS}"
        )));
    }

    let phi_val = |night: usize, x: usize| -> f64 {
        let y = x as f64;
        params.alpha()[night] * y * (-y / params.capacity()).exp()
    };

    // value[night][m] = best reward allocating exactly m agents to
    // nights night..K. Row K is the base case: only m = 0 is feasible.
    let mut value = vec![vec![f64::NEG_INFINITY; n + 1]; k + 1];
    value[k][0] = 0.0;
    for night in (0..k).rev() {
        for m in 0..=n {
            let mut best = f64::NEG_INFINITY;
            for x in 0..=m {
                let rest = value[night + 1][m - x];
                if rest == f64::NEG_INFINITY {
                    continue;
                }
                let v = phi_val(night, x) + rest;
                if v > best {
                    best = v;
                }
            }
            value[night][m] = best;
        }
    }

    // Reconstruct toward the lexicographically smallest profile: at each
    // night take the smallest count that still achieves the optimum.
    // Mathematically tied allocations can differ by an ulp depending on
    // summation order, so ties are recognized with a tiny relative slack.
    let mut counts = Vec::with_capacity(k);
    let mut remaining = n;
    for night in 0..k {
        let target = value[night][remaining];
        let slack = 1e-9 * (1.0 + target.abs());
        let mut chosen = remaining;
        for x in 0..=remaining {
            let rest = value[night + 1][remaining - x];
            if rest == f64::NEG_INFINITY {
                continue;
            }
            if phi_val(night, x) + rest >= target - slack {
                chosen = x;
                break;
            }
        }
        counts.push(chosen);
        remaining -= chosen;
    }
    debug_assert_eq!(remaining, 0);

    // Report the reward of the profile actually returned; it agrees with
    // the table optimum `value[0][n]` up to the tie slack.
    let profile = AttendanceProfile { counts };
    let reward = world_reward_from_profile(&profile, params, phi_kind)?;
    Ok((profile, reward))
}

// ---------------------------------------------------------------------------
// Convergence time
// ---------------------------------------------------------------------------

/// Result of convergence measurement on a weekly reward series.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceMeasure {
    /// Earliest week from which every `window`-mean stays inside the band,
    /// or `None` if even the final window is outside.
    pub converged_week: Option<usize>,
    /// Mean of the final 10% of the series.
    pub plateau_value: f64,
    pub window: usize,
    /// Band half-width as a fraction of the plateau value.
    pub tolerance: f64,
}

/// Measures when a series settles: the plateau is the mean of the final 10%
/// of the series, and the converged week is the earliest `t` such that every
/// `window`-mean starting at or after `t` lies within
/// `tolerance * |plateau|` of the plateau.
pub fn convergence_time(
    series: &[f64],
    window: usize,
    tolerance: f64,
) -> Result<ConvergenceMeasure> {
    if window == 0 {
        return Err(Error::Usage("convergence window must be >= 1".into()));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::Usage(format!("tolerance must be >= 0, got {tolerance}")));
    }
    if series.len() < 2 * window {
        return Err(Error::Usage(format!(
            "series of length {} is shorter than two windows ({window} weeks each)",
            series.len()
        )));
    }
    let len = series.len();
    let tail = len.div_ceil(10).max(1);
    let plateau: f64 = series[len - tail..].iter().sum::<f64>() / tail as f64;
    let band = tolerance * plateau.abs();

    let mut prefix = vec![0.0_f64; len + 1];
    for (i, &v) in series.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let window_mean = |start: usize| (prefix[start + window] - prefix[start]) / window as f64;

    let last_start = len - window;
    let mut converged = Some(0);
    for start in (0..=last_start).rev() {
        if (window_mean(start) - plateau).abs() > band {
            converged = if start == last_start { None } else { Some(start + 1) };
            break;
        }
    }
    Ok(ConvergenceMeasure {
        converged_week: converged,
        plateau_value: plateau,
        window,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar_env::{run_simulation, SimConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // -- factoredness ------------------------------------------------------

    #[test]
    fn world_g_is_factored_on_small_instances() {
        for (n, k) in [(2, 2), (3, 2), (2, 3), (4, 2)] {
            let params = WorldParams::uniform(k, n);
            let verdict =
                factoredness_check(&params, RewardKind::WorldG, PhiKind::Exponential).unwrap();
            assert!(verdict.factored, "N={n} K={k}");
        }
    }

    #[test]
    fn wonderful_life_is_factored_single_week() {
        let params = WorldParams::uniform(2, 3);
        let verdict =
            factoredness_check(&params, RewardKind::WonderfulLife, PhiKind::Exponential).unwrap();
        assert!(verdict.factored);

        // Random weights change nothing: the clamped term is independent of
        // the varied agent's pick, so the WL difference equals the world
        // difference.
        let params = WorldParams::new(vec![0.4, 1.7, 0.9], 6.0, 4).unwrap();
        let verdict =
            factoredness_check(&params, RewardKind::WonderfulLife, PhiKind::Exponential).unwrap();
        assert!(verdict.factored);
    }

    #[test]
    fn uniform_division_uniform_weights_small_instances_are_factored() {
        // With equal weights and attendance in the concave range of phi the
        // per-attendee average and the marginal order nights identically, so
        // these tiny instances have no violation to find.
        for (n, k) in [(2, 2), (3, 2), (4, 2), (3, 3), (4, 3)] {
            let params = WorldParams::uniform(k, n);
            let verdict =
                factoredness_check(&params, RewardKind::UniformDivision, PhiKind::Exponential)
                    .unwrap();
            assert!(verdict.factored, "N={n} K={k}");
        }
    }

    #[test]
    fn uniform_division_unequal_weights_yield_a_counterexample() {
        // alpha ratio inside the misalignment window found by enumeration.
        let params = WorldParams::new(vec![1.3, 1.0], 6.0, 4).unwrap();
        let verdict =
            factoredness_check(&params, RewardKind::UniformDivision, PhiKind::Exponential)
                .unwrap();
        assert!(!verdict.factored);
        let ce = verdict.counterexample.expect("counterexample recorded");
        assert!(ce
            .verify(&params, RewardKind::UniformDivision, PhiKind::Exponential)
            .unwrap());
    }

    #[test]
    fn factoredness_rejects_oversized_instances() {
        let params = WorldParams::uniform(2, 30);
        assert!(matches!(
            factoredness_check(&params, RewardKind::WorldG, PhiKind::Exponential),
            Err(Error::TooLarge(_))
        ));
    }

    // -- optimal allocation -------------------------------------------------

    #[test]
    fn allocation_forced_single_night() {
        let params = WorldParams::new(vec![1.0], 6.0, 6).unwrap();
        let (profile, reward) = optimal_allocation(&params, PhiKind::Exponential).unwrap();
        assert_eq!(profile.counts, vec![6]);
        assert!((reward - 2.207276647028654).abs() < 1e-15);
    }

    #[test]
    fn allocation_uniform_weights_168() {
        let params = WorldParams::uniform(7, 168);
        let (profile, reward) = optimal_allocation(&params, PhiKind::Exponential).unwrap();
        assert_eq!(profile.counts, vec![6, 6, 6, 6, 6, 6, 132]);
        assert!((reward - 13.243659918992902).abs() < 1e-12);
        // Reward recomputes from the profile.
        let recomputed =
            world_reward_from_profile(&profile, &params, PhiKind::Exponential).unwrap();
        assert!((reward - recomputed).abs() < 1e-12);
    }

    #[test]
    fn allocation_peaked_weights_168() {
        let params = WorldParams::single_peak(7, 3, 7.0, 168).unwrap();
        let (profile, reward) = optimal_allocation(&params, PhiKind::Exponential).unwrap();
        assert_eq!(profile.counts[3], 6);
        assert_eq!(profile.counts.iter().sum::<usize>(), 168);
        assert!((reward - 15.450936529200577).abs() < 1e-12);
        // Lexicographically smallest: excess agents land on the last night.
        assert_eq!(profile.counts, vec![0, 0, 0, 6, 0, 0, 162]);
    }

    #[test]
    fn allocation_dominates_random_profiles() {
        let params = WorldParams::new(vec![0.3, 1.1, 0.8, 1.9], 6.0, 37).unwrap();
        let (_, best) = optimal_allocation(&params, PhiKind::Exponential).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let mut counts = vec![0usize; 4];
            for _ in 0..37 {
                counts[rng.gen_range(0..4)] += 1;
            }
            let profile = AttendanceProfile { counts };
            let reward =
                world_reward_from_profile(&profile, &params, PhiKind::Exponential).unwrap();
            assert!(reward <= best + 1e-12);
        }
    }

    #[test]
    fn allocation_rejects_minority_phi() {
        let params = WorldParams::uniform(2, 4);
        assert!(matches!(
            optimal_allocation(&params, PhiKind::Minority),
            Err(Error::Unsupported(_))
        ));
    }

    // -- convergence ---------------------------------------------------------

    #[test]
    fn convergence_constant_series_is_week_zero() {
        let series = vec![5.0; 400];
        let m = convergence_time(&series, 100, 0.05).unwrap();
        assert_eq!(m.converged_week, Some(0));
        assert!((m.plateau_value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_of_late_riser_is_near_the_end() {
        // Climbs linearly, only entering the plateau band near the end.
        let series: Vec<f64> = (0..1000).map(|t| t as f64).collect();
        let m = convergence_time(&series, 100, 0.05).unwrap();
        let week = m.converged_week.expect("converges eventually");
        assert!(week > 700, "week {week}");
    }

    #[test]
    fn convergence_is_monotone_in_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let series: Vec<f64> = (0..600)
            .map(|t| 10.0 * (1.0 - (-(t as f64) / 120.0).exp()) + 0.3 * rng.gen::<f64>())
            .collect();
        let mut last = None;
        for tol in [0.01, 0.02, 0.05, 0.1, 0.2] {
            let m = convergence_time(&series, 50, tol).unwrap();
            let week = m.converged_week.unwrap_or(series.len());
            if let Some(prev) = last {
                assert!(week <= prev, "tolerance {tol}: {week} > {prev}");
            }
            last = Some(week);
        }
    }

    #[test]
    fn convergence_rejects_short_series() {
        assert!(matches!(
            convergence_time(&[1.0; 150], 100, 0.05),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn convergence_none_when_tail_is_outside() {
        // Final window mean sits far from the final-10% plateau.
        let mut series = vec![0.0; 380];
        series.extend(vec![100.0; 20]);
        let m = convergence_time(&series, 100, 0.05).unwrap();
        assert_eq!(m.converged_week, None);
    }

    // -- learnability ---------------------------------------------------------

    fn short_run(n: usize, seed: u64) -> (Trajectory, WorldParams) {
        let world = WorldParams::uniform(7, n);
        let config = SimConfig {
            world: world.clone(),
            weeks: 40,
            seed,
            ..SimConfig::default()
        };
        (run_simulation(&config).unwrap().trajectory, world)
    }

    #[test]
    fn learnability_rejects_single_agent() {
        let world = WorldParams::uniform(7, 1);
        let config = SimConfig {
            world: world.clone(),
            weeks: 10,
            seed: 0,
            ..SimConfig::default()
        };
        let traj = run_simulation(&config).unwrap().trajectory;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            learnability_estimate(&traj, RewardKind::WorldG, &world, PhiKind::Exponential, 10, &mut rng),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn learnability_zero_denominator_reports_infinity() {
        // All-zero weights: every reward is identically zero, so both RMS
        // values vanish and the estimator flags perfect learnability.
        let world = WorldParams::new(vec![0.0, 0.0], 6.0, 4).unwrap();
        let config = SimConfig {
            world: world.clone(),
            weeks: 10,
            seed: 1,
            ..SimConfig::default()
        };
        let traj = run_simulation(&config).unwrap().trajectory;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lambda = learnability_estimate(
            &traj,
            RewardKind::WorldG,
            &world,
            PhiKind::Exponential,
            50,
            &mut rng,
        )
        .unwrap();
        assert!(lambda.is_infinite());
    }

    #[test]
    fn wl_is_more_learnable_than_g() {
        let (traj, world) = short_run(40, 9);
        let report = learnability_report(&traj, &world, PhiKind::Exponential, 2000, 17).unwrap();
        let wl = report.lambda[&RewardKind::WonderfulLife];
        let g = report.lambda[&RewardKind::WorldG];
        assert!(wl.is_finite() && g.is_finite());
        assert!(wl > g, "lambda_WL {wl} <= lambda_G {g}");
        assert!((report.ratio_wl_over_g - wl / g).abs() < 1e-15);
    }

    // -- theorem 2 -------------------------------------------------------------

    #[test]
    fn theorem2_empty_sigma_is_infinite() {
        let (traj, world) = short_run(10, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pert = sample_perturbations_for_agent(&traj, &world, 0, 200, &mut rng).unwrap();
        let ratio =
            theorem2_ratio(&traj, &ClampSet::new(), &world, PhiKind::Exponential, &pert).unwrap();
        assert!(ratio.is_infinite());
    }

    #[test]
    fn theorem2_full_sigma_is_exactly_one() {
        let (traj, world) = short_run(10, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pert = sample_perturbations_for_agent(&traj, &world, 3, 200, &mut rng).unwrap();
        let sigma = ClampSet::everything(10, traj.weeks());
        let ratio = theorem2_ratio(&traj, &sigma, &world, PhiKind::Exponential, &pert).unwrap();
        assert_eq!(ratio, 1.0);
    }

    #[test]
    fn theorem2_single_agent_effect_set_exceeds_one() {
        let (traj, world) = short_run(30, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pert = sample_perturbations_for_agent(&traj, &world, 5, 2000, &mut rng).unwrap();
        let sigma = ClampSet::effect_set(5, traj.weeks());
        let ratio = theorem2_ratio(&traj, &sigma, &world, PhiKind::Exponential, &pert).unwrap();
        assert!(ratio > 1.0, "ratio {ratio}");
    }

    #[test]
    fn theorem2_matches_learnability_ratio_on_shared_perturbations() {
        let (traj, world) = short_run(24, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pert = sample_perturbations_for_agent(&traj, &world, 7, 3000, &mut rng).unwrap();
        let sigma = ClampSet::effect_set(7, traj.weeks());
        let direct = theorem2_ratio(&traj, &sigma, &world, PhiKind::Exponential, &pert).unwrap();
        let wl = learnability_from_perturbations(
            &traj,
            RewardKind::WonderfulLife,
            &world,
            PhiKind::Exponential,
            &pert,
        )
        .unwrap();
        let g = learnability_from_perturbations(
            &traj,
            RewardKind::WorldG,
            &world,
            PhiKind::Exponential,
            &pert,
        )
        .unwrap();
        assert!(
            (direct - wl / g).abs() < 1e-9,
            "theorem2 {direct} vs ratio {}",
            wl / g
        );
    }

    #[test]
    fn theorem2_rejects_mismatched_sigma_and_observer() {
        let (traj, world) = short_run(10, 13);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pert = sample_perturbations_for_agent(&traj, &world, 2, 50, &mut rng).unwrap();
        let sigma = ClampSet::effect_set(4, traj.weeks());
        assert!(matches!(
            theorem2_ratio(&traj, &sigma, &world, PhiKind::Exponential, &pert),
            Err(Error::Usage(_))
        ));
    }
}
