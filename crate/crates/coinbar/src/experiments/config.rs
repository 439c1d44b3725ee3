//! Line-oriented `key = value` scenario configuration.
//!
//! `#` starts a comment line, blank lines are ignored, keys mirror the
//! scenario and simulation fields, and unknown keys are hard errors so a
//! typo cannot silently fall back to a default. Values never contain
//! comments.
//!
//! ```text
//! # wonderful-life, uniform weights
//! name = my-run
//! agents = 168
//! alpha = 1,1,1,1,1,1,1
//! capacity = 6
//! reward = WL
//! weeks = 2000
//! runs = 50
//! seed = 1
//! ```

use std::path::Path;

use crate::bar_env::SimConfig;
use crate::experiments::Scenario;
use crate::learner::UpdateRule;
use crate::utilities::{PhiKind, RewardKind, WorldParams};
use crate::{Error, Result};

/// Partial scenario settings; `None` means "leave the base value alone".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub name: Option<String>,
    pub weeks: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub agents: Option<usize>,
    pub nights: Option<usize>,
    pub capacity: Option<f64>,
    pub alpha: Option<Vec<f64>>,
    pub reward: Option<RewardKind>,
    pub phi: Option<PhiKind>,
    pub sweep: Option<Vec<usize>>,
    pub learning_rate: Option<f64>,
    pub initial_temperature: Option<f64>,
    pub temperature_decay: Option<f64>,
    pub min_temperature: Option<f64>,
    pub estimate_init: Option<(f64, f64)>,
    pub update_rule: Option<UpdateRule>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("key {key:?}: cannot parse {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|part| parse_num::<T>(key, part.trim()))
        .collect()
}

/// Parses configuration text. Later lines override earlier ones.
pub fn parse_config(text: &str) -> Result<ScenarioOverrides> {
    let mut out = ScenarioOverrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                idx + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "name" => out.name = Some(value.to_string()),
            "weeks" => out.weeks = Some(parse_num(key, value)?),
            "runs" => out.runs = Some(parse_num(key, value)?),
            "seed" => out.seed = Some(parse_num(key, value)?),
            "agents" => out.agents = Some(parse_num(key, value)?),
            "nights" => out.nights = Some(parse_num(key, value)?),
            "capacity" => out.capacity = Some(parse_num(key, value)?),
            "alpha" => out.alpha = Some(parse_list(key, value)?),
            "reward" => out.reward = Some(RewardKind::parse(value)?),
            "phi" => out.phi = Some(PhiKind::parse(value)?),
            "sweep" => out.sweep = Some(parse_list(key, value)?),
            "learning_rate" => out.learning_rate = Some(parse_num(key, value)?),
            "initial_temperature" => out.initial_temperature = Some(parse_num(key, value)?),
            "temperature_decay" => out.temperature_decay = Some(parse_num(key, value)?),
            "min_temperature" => out.min_temperature = Some(parse_num(key, value)?),
            "estimate_init" => {
                let parts: Vec<f64> = parse_list(key, value)?;
                if parts.len() != 2 {
                    return Err(Error::Config(format!(
                        "key {key:?}: expected `lo,hi`, got {value:?}"
                    )));
                }
                out.estimate_init = Some((parts[0], parts[1]));
            }
            "update_rule" => out.update_rule = Some(UpdateRule::parse(value)?),
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?}",
                    idx + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Reads and parses a configuration file.
pub fn parse_config_file(path: &Path) -> Result<ScenarioOverrides> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

impl ScenarioOverrides {
    /// Merge, with `later` winning wherever it is set.
    pub fn merged_with(self, later: ScenarioOverrides) -> ScenarioOverrides {
        ScenarioOverrides {
            name: later.name.or(self.name),
            weeks: later.weeks.or(self.weeks),
            runs: later.runs.or(self.runs),
            seed: later.seed.or(self.seed),
            agents: later.agents.or(self.agents),
            nights: later.nights.or(self.nights),
            capacity: later.capacity.or(self.capacity),
            alpha: later.alpha.or(self.alpha),
            reward: later.reward.or(self.reward),
            phi: later.phi.or(self.phi),
            sweep: later.sweep.or(self.sweep),
            learning_rate: later.learning_rate.or(self.learning_rate),
            initial_temperature: later.initial_temperature.or(self.initial_temperature),
            temperature_decay: later.temperature_decay.or(self.temperature_decay),
            min_temperature: later.min_temperature.or(self.min_temperature),
            estimate_init: later.estimate_init.or(self.estimate_init),
            update_rule: later.update_rule.or(self.update_rule),
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == ScenarioOverrides::default()
    }

    /// Applies the overrides on top of a base scenario.
    pub fn apply(&self, base: &Scenario) -> Result<Scenario> {
        let mut scenario = base.clone();
        if let Some(name) = &self.name {
            scenario.name = name.clone();
        }
        if let Some(weeks) = self.weeks {
            scenario.config.weeks = weeks;
        }
        if let Some(runs) = self.runs {
            scenario.runs = runs;
        }
        if let Some(seed) = self.seed {
            scenario.config.seed = seed;
        }
        if let Some(sweep) = &self.sweep {
            scenario.sweep = Some(sweep.clone());
        }
        if let Some(reward) = self.reward {
            scenario.config.reward_kind = reward;
        }
        if let Some(phi) = self.phi {
            scenario.config.phi_kind = phi;
        }

        if self.alpha.is_some()
            || self.nights.is_some()
            || self.capacity.is_some()
            || self.agents.is_some()
        {
            let old = &scenario.config.world;
            let alpha = match (&self.alpha, self.nights) {
                (Some(alpha), Some(nights)) if alpha.len() != nights => {
                    return Err(Error::Config(format!(
                        "alpha has {} entries but nights = {nights}",
                        alpha.len()
                    )));
                }
                (Some(alpha), _) => alpha.clone(),
                (None, Some(nights)) if nights == old.nights() => old.alpha().to_vec(),
                (None, Some(nights)) => vec![1.0; nights],
                (None, None) => old.alpha().to_vec(),
            };
            scenario.config.world = WorldParams::new(
                alpha,
                self.capacity.unwrap_or(old.capacity()),
                self.agents.unwrap_or(old.agents()),
            )?;
        }

        let learner = &mut scenario.config.learner;
        if let Some(v) = self.learning_rate {
            learner.learning_rate = v;
        }
        if let Some(v) = self.initial_temperature {
            learner.initial_temperature = v;
        }
        if let Some(v) = self.temperature_decay {
            learner.temperature_decay = v;
        }
        if let Some(v) = self.min_temperature {
            learner.min_temperature = v;
        }
        if let Some(v) = self.estimate_init {
            learner.estimate_init = v;
        }
        if let Some(v) = self.update_rule {
            learner.update_rule = v;
        }

        scenario.validate()?;
        Ok(scenario)
    }

    /// A default scenario with these overrides applied — the path taken when
    /// no preset is selected.
    pub fn into_scenario(&self) -> Result<Scenario> {
        let base = Scenario {
            name: "custom".into(),
            config: SimConfig::default(),
            runs: crate::experiments::presets::DEFAULT_RUNS,
            sweep: None,
        };
        self.apply(&base)
    }
}
