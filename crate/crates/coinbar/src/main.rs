//! `coinbar` — run bar-problem experiments and analyses from the shell.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coinbar::analysis::{
    factoredness_check, learnability_report, optimal_allocation, DEFAULT_CONVERGENCE_TOLERANCE,
    DEFAULT_CONVERGENCE_WINDOW,
};
use coinbar::bar_env::run_simulation;
use coinbar::experiments::config::{parse_config_file, ScenarioOverrides};
use coinbar::experiments::emit::{emit_csv, emit_plot_data, format_sig9};
use coinbar::experiments::presets::{preset, preset_names};
use coinbar::experiments::{run_scenario, run_sweep, ExperimentRecord, Scenario, LATE_RUN_WINDOW};
use coinbar::utilities::{PhiKind, RewardKind, WorldParams};
use coinbar::{Error, Result};

#[derive(Parser)]
#[command(
    name = "coinbar",
    version,
    about = "Deterministic El Farol bar-problem simulator and reward-shaping analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (or preset family) and emit CSV/plot artifacts.
    Run(RunArgs),
    /// Run an agent-count sweep and emit per-N records plus a summary.
    Sweep(RunArgs),
    /// Exhaustively check the factoredness sign condition on a small instance.
    Factoredness(FactorednessArgs),
    /// Estimate the learnability of all three reward kinds on an on-policy run.
    Learnability(LearnabilityArgs),
    /// Print the optimal attendance profile and world reward.
    Optimum(OptimumArgs),
    /// List built-in presets.
    Presets,
}

/// Flags shared by `run` and `sweep`; command-line values override the
/// config file, which overrides the preset.
#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset name (see `coinbar presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    weeks: Option<usize>,
    /// Reward kind: G, UD or WL.
    #[arg(long)]
    reward: Option<String>,
    /// Comma-separated night weights, e.g. `0,0,0,7,0,0,0`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    capacity: Option<f64>,
    /// Output directory for CSV and plot files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct FactorednessArgs {
    /// Reward kind: G, UD or WL.
    #[arg(long, default_value = "WL")]
    reward: String,
    #[arg(long, default_value_t = 4)]
    agents: usize,
    #[arg(long, default_value_t = 2)]
    nights: usize,
    /// Comma-separated night weights; defaults to uniform.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 6.0)]
    capacity: f64,
}

#[derive(Args)]
struct LearnabilityArgs {
    #[arg(long, default_value_t = 168)]
    agents: usize,
    #[arg(long, default_value_t = 2000)]
    weeks: usize,
    /// Perturbation samples per side.
    #[arg(long, default_value_t = 10000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated night weights; defaults to uniform.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 6.0)]
    capacity: f64,
    /// Reward kind generating the on-policy trajectory.
    #[arg(long, default_value = "WL")]
    reward: String,
}

#[derive(Args)]
struct OptimumArgs {
    #[arg(long, default_value_t = 168)]
    agents: usize,
    #[arg(long, default_value_t = 7)]
    nights: usize,
    /// Comma-separated night weights; defaults to uniform.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 6.0)]
    capacity: f64,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, false),
        Command::Sweep(args) => cmd_run(args, true),
        Command::Factoredness(args) => cmd_factoredness(args),
        Command::Learnability(args) => cmd_learnability(args),
        Command::Optimum(args) => cmd_optimum(args),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}

/// `COINBAR_THREADS` caps the worker pool used for concurrent runs.
fn init_thread_pool() {
    if let Ok(value) = std::env::var("COINBAR_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        } else {
            eprintln!("warning: ignoring unparseable COINBAR_THREADS={value:?}");
        }
    }
}

fn parse_alpha(spec: &Option<String>) -> Result<Option<Vec<f64>>> {
    match spec {
        None => Ok(None),
        Some(text) => text
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("cannot parse alpha entry {part:?}")))
            })
            .collect::<Result<Vec<f64>>>()
            .map(Some),
    }
}

fn flag_overrides(args: &RunArgs) -> Result<ScenarioOverrides> {
    Ok(ScenarioOverrides {
        seed: args.seed,
        runs: args.runs,
        weeks: args.weeks,
        agents: args.agents,
        capacity: args.capacity,
        alpha: parse_alpha(&args.alpha)?,
        reward: match &args.reward {
            Some(token) => Some(RewardKind::parse(token)?),
            None => None,
        },
        ..ScenarioOverrides::default()
    })
}

/// Assembles the scenario list: preset (if any), then config-file settings,
/// then command-line flags, later layers winning.
fn assemble_scenarios(args: &RunArgs) -> Result<Vec<Scenario>> {
    let mut overrides = ScenarioOverrides::default();
    if let Some(path) = &args.config {
        overrides = overrides.merged_with(parse_config_file(path)?);
    }
    overrides = overrides.merged_with(flag_overrides(args)?);

    match &args.preset {
        Some(name) => {
            let base = preset(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset {name:?}; run `coinbar presets` for the list"
                ))
            })?;
            base.iter().map(|s| overrides.apply(s)).collect()
        }
        None => {
            if args.config.is_none() && overrides.is_empty() {
                return Err(Error::Usage(
                    "nothing to run: give --preset, --config or explicit flags".into(),
                ));
            }
            Ok(vec![overrides.into_scenario()?])
        }
    }
}

fn describe(record: &ExperimentRecord) {
    let late = record.late_run_mean(LATE_RUN_WINDOW);
    let convergence = match &record.convergence {
        Some(m) => match m.converged_week {
            Some(week) => format!("converged at week {week}"),
            None => "not converged".into(),
        },
        None => "run too short to measure convergence".into(),
    };
    let normalized = match record.normalized_late_mean {
        Some(v) => format!(", normalized {}", format_sig9(v)),
        None => String::new(),
    };
    println!(
        "{} [{}] N={} weeks={} runs={}: late-run mean {}{normalized}, {convergence} ({:.1}s)",
        record.scenario,
        record.reward_kind.token(),
        record.agents,
        record.weeks,
        record.run_weekly_world_reward.len(),
        format_sig9(late),
        record.wall_time.as_secs_f64(),
    );
}

fn cmd_run(args: RunArgs, sweep: bool) -> Result<()> {
    let scenarios = assemble_scenarios(&args)?;
    let mut records = Vec::new();
    for scenario in &scenarios {
        if sweep {
            let mut scenario = scenario.clone();
            if scenario.sweep.is_none() {
                // A plain scenario swept at its own agent count.
                scenario.sweep = Some(vec![scenario.config.world.agents()]);
            }
            records.extend(run_sweep(&scenario)?);
        } else {
            records.push(run_scenario(scenario)?);
        }
    }
    for record in &records {
        describe(record);
    }
    emit_csv(&records, &args.out)?;
    emit_plot_data(&records, &args.out)?;
    if sweep {
        emit_sweep_summary(&records, &args.out)?;
    }
    println!("wrote {} record(s) to {}", records.len(), args.out.display());
    Ok(())
}

fn emit_sweep_summary(records: &[ExperimentRecord], dir: &PathBuf) -> Result<()> {
    let mut text = String::from("scenario,reward_kind,agents,optimum,late_mean,normalized\n");
    for r in records {
        let (Some(optimum), Some(normalized)) = (r.optimum, r.normalized_late_mean) else {
            continue;
        };
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scenario,
            r.reward_kind.token(),
            r.agents,
            format_sig9(optimum),
            format_sig9(r.late_run_mean(LATE_RUN_WINDOW)),
            format_sig9(normalized),
        ));
    }
    let path = dir.join("sweep.csv");
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    std::fs::write(&path, text).map_err(|source| Error::Io { path, source })
}

fn world_from(agents: usize, nights: usize, alpha: &Option<String>, capacity: f64) -> Result<WorldParams> {
    match parse_alpha(alpha)? {
        Some(weights) => {
            if weights.len() != nights && alpha.is_some() {
                // nights defaults exist, so only complain on real conflicts
                if nights != 7 && weights.len() != nights {
                    return Err(Error::Config(format!(
                        "alpha has {} entries but nights = {nights}",
                        weights.len()
                    )));
                }
            }
            WorldParams::new(weights, capacity, agents)
        }
        None => WorldParams::new(vec![1.0; nights], capacity, agents),
    }
}

fn cmd_factoredness(args: FactorednessArgs) -> Result<()> {
    let reward = RewardKind::parse(&args.reward)?;
    let world = world_from(args.agents, args.nights, &args.alpha, args.capacity)?;
    let verdict = factoredness_check(&world, reward, PhiKind::Exponential)?;
    if verdict.factored {
        println!(
            "factored: {} is factored on N={} K={} (all {} pick profiles checked)",
            reward.token(),
            world.agents(),
            world.nights(),
            (world.nights() as u64).pow(world.agents() as u32),
        );
    } else {
        let ce = verdict.counterexample.expect("violation recorded");
        println!(
            "not factored: agent {} moving night {} -> {} in profile {:?}",
            ce.agent, ce.base_picks[ce.agent], ce.alt_night, ce.base_picks
        );
        println!(
            "  personal {} -> {} but world {} -> {}",
            format_sig9(ce.personal_base),
            format_sig9(ce.personal_alt),
            format_sig9(ce.world_base),
            format_sig9(ce.world_alt),
        );
    }
    Ok(())
}

fn cmd_learnability(args: LearnabilityArgs) -> Result<()> {
    let world = world_from(args.agents, 7, &args.alpha, args.capacity)?;
    let reward = RewardKind::parse(&args.reward)?;
    let config = coinbar::bar_env::SimConfig {
        world: world.clone(),
        reward_kind: reward,
        weeks: args.weeks,
        seed: args.seed,
        ..Default::default()
    };
    let result = run_simulation(&config)?;
    let report = learnability_report(
        &result.trajectory,
        &world,
        PhiKind::Exponential,
        args.samples,
        args.seed,
    )?;
    println!(
        "on-policy trajectory: {} reward, N={}, {} weeks, seed {}",
        reward.token(),
        world.agents(),
        args.weeks,
        args.seed
    );
    for (kind, lambda) in &report.lambda {
        println!("lambda[{}] = {}", kind.token(), format_sig9(*lambda));
    }
    println!(
        "lambda[WL] / lambda[G] = {} ({} samples per side)",
        format_sig9(report.ratio_wl_over_g),
        report.samples
    );
    Ok(())
}

fn cmd_optimum(args: OptimumArgs) -> Result<()> {
    let world = world_from(args.agents, args.nights, &args.alpha, args.capacity)?;
    let (profile, reward) = optimal_allocation(&world, PhiKind::Exponential)?;
    println!("optimal attendance profile: {:?}", profile.counts);
    println!("optimal weekly world reward: {}", format_sig9(reward));
    println!(
        "(convergence measurements use window {DEFAULT_CONVERGENCE_WINDOW}, tolerance {DEFAULT_CONVERGENCE_TOLERANCE})"
    );
    Ok(())
}

fn cmd_presets() -> Result<()> {
    println!("built-in presets (families expand to one scenario per reward kind):");
    for name in preset_names() {
        let scenarios = preset(&name).expect("listed preset resolves");
        if scenarios.len() == 1 {
            let s = &scenarios[0];
            let sweep = match &s.sweep {
                Some(list) => format!(", sweep {list:?}"),
                None => String::new(),
            };
            println!(
                "  {name}: alpha {:?}, {} weeks, {} runs{sweep}",
                s.config.world.alpha(),
                s.config.weeks,
                s.runs
            );
        } else {
            println!("  {name} ({} scenarios)", scenarios.len());
        }
    }
    Ok(())
}
