use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use l1ilc_core::experiment::ControllerSpec;
use l1ilc_core::lti::check_l1_condition;
use l1ilc_core::plant::DisturbanceSpec;
use l1ilc_harness::report::report_directory;
use l1ilc_harness::runner::{run_scenario, write_outputs, ScenarioResult};
use l1ilc_harness::scenario::{ControllerConfig, InitConfig, PlantSource, ScenarioConfig};

#[derive(Parser)]
#[command(name = "l1ilc", version, about = "L1 adaptive control with iterative learning: experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its results.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Run a scenario starting from a learning state exported by another run.
    Transfer {
        #[arg(long = "from")]
        from: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Accept a state learned against a different model.
        #[arg(long)]
        allow_mismatch: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Check the L1 small-gain condition of a plant under a controller.
    CheckL1 {
        /// Preset name or TOML plant description.
        plant: String,
        /// `default` or a TOML controller description.
        controller: String,
        /// Lipschitz constant of the disturbance.
        #[arg(long, default_value_t = DisturbanceSpec::default().l)]
        lipschitz: f64,
    },
    /// Summarize every result below a directory.
    Report { results: PathBuf },
}

/// Exit status for runs that completed but broke an invariant.
const VIOLATION: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Run { scenario, seed, out, reps } => {
            let cfg = load(&scenario, seed, reps, None)?;
            execute(&cfg, out)
        }
        Command::Transfer {
            from,
            scenario,
            allow_mismatch,
            seed,
            out,
            reps,
        } => {
            let init = InitConfig::Transfer {
                path: from,
                allow_mismatch,
            };
            let cfg = load(&scenario, seed, reps, Some(init))?;
            execute(&cfg, out)
        }
        Command::CheckL1 {
            plant,
            controller,
            lipschitz,
        } => check_l1(&plant, &controller, lipschitz),
        Command::Report { results } => {
            let reports = report_directory(&results)?;
            let mut text = String::new();
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&r.to_string());
                r.write_csv(&results.join(format!("report_{i}.csv")))?;
            }
            std::fs::write(results.join("report.txt"), &text)?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path, seed: Option<u64>, reps: Option<usize>, init: Option<InitConfig>) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = reps {
        cfg.repetitions = r;
    }
    if let Some(i) = init {
        cfg.init = i;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &ScenarioConfig, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let result = run_scenario(cfg)?;
    let dir = out.unwrap_or_else(|| cfg.default_out_dir());
    write_outputs(&result, &dir)?;
    print_summary(&result);
    println!("results written to {}", dir.display());
    let violations = result.violations();
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &violations {
            eprintln!("invariant violated: {v}");
        }
        Ok(ExitCode::from(VIOLATION))
    }
}

fn print_summary(r: &ScenarioResult) {
    println!(
        "{} ({} on {}, init {}): {} repetition(s) in {:.2} s",
        r.name,
        r.framework.name(),
        r.plant,
        r.init,
        r.repetitions.len(),
        r.wall_time_s
    );
    println!("{:>9}{:>14}{:>14}", "iteration", "error", "std");
    for s in &r.summary {
        println!("{:>9}{:>14.6}{:>14.3e}", s.iteration, s.mean, s.std);
    }
}

fn check_l1(plant: &str, controller: &str, lipschitz: f64) -> anyhow::Result<ExitCode> {
    let source = if Path::new(plant).is_file() {
        let text = std::fs::read_to_string(plant)?;
        toml::from_str::<PlantSource>(&text).with_context(|| format!("parsing {plant}"))?
    } else {
        PlantSource::Preset(plant.to_string())
    };
    let cfg = source.resolve()?;
    let ctrl = if controller == "default" {
        ControllerConfig::l1()
    } else {
        let text = std::fs::read_to_string(controller).with_context(|| format!("reading {controller}"))?;
        toml::from_str::<ControllerConfig>(&text).with_context(|| format!("parsing {controller}"))?
    };
    let ControllerSpec::L1(axes) = ctrl.build(cfg.n_axes(), source.preset_name(), 1e-3)? else {
        bail!("the L1 condition applies to the L1 controller only");
    };
    let mut ok = true;
    for (i, (a, c)) in cfg.axes.iter().zip(&axes).enumerate() {
        let rep = check_l1_condition(a, &c.reference_model(), &c.filter(), c.k, lipschitz)?;
        println!("axis {i}:");
        println!("{}", serde_json::to_string_pretty(&rep)?);
        let discrete = c.discrete_loop_is_stable();
        if !discrete {
            println!("axis {i}: sampled adaptation loop is unstable at dt = {}", c.dt);
        }
        ok &= rep.passes && discrete;
    }
    println!("{}", if ok { "condition holds on every axis" } else { "condition violated" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(VIOLATION) })
}
