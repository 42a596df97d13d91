use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use matterwave_cli::figures::run_figure;
use matterwave_cli::validate::{probe_kernels, run_suite, SuiteOptions, PDE_STEP};
use matterwave_core::states::PhysicalParams;
use matterwave_cli::{parse_config, run_scenario, OutputFormat, RunOptions, RunOutcome};

#[derive(Parser)]
#[command(name = "matterwave", version, about = "Exact-kernel evolution of structured matter waves")]
struct Cli {
    /// Scenario file (same as the positional argument of `run`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; nothing in the program is random.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one or more scenario files; each writes to OUT_DIR/<name>.
    Run { configs: Vec<PathBuf> },
    /// Run the invariant suite and print one JSON line per check.
    Validate {
        /// Coarse grids, for CI.
        #[arg(long)]
        quick: bool,
    },
    /// Kernel spot checks.
    Kernels {
        #[command(subcommand)]
        action: KernelsAction,
    },
    /// Write the data behind one of the six built-in figures.
    Figures {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=6))]
        number: u32,
    },
}

#[derive(Subcommand)]
enum KernelsAction {
    /// Finite-difference Schrödinger residuals of every kernel.
    Probe {
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn report(name: &str, out: &RunOutcome, tau: f64) -> bool {
    println!("== {name}");
    print!("{}", out.summary_table(tau));
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    for c in out.sanity.iter().filter(|c| !c.pass) {
        eprintln!("{name}: {} = {:.3e} exceeds {:.1e} at t = {:?}", c.check, c.value, c.tolerance, c.t);
    }
    out.passed()
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    log::debug!("seed {} (unused)", cli.seed);
    let opts = RunOptions {
        out_dir: cli.out_dir.clone(),
        format: cli.format,
    };
    match cli.command {
        Command::Run { mut configs } => {
            configs.extend(cli.config);
            if configs.is_empty() {
                bail!("no scenario given; pass a file or --config");
            }
            let mut parsed = Vec::new();
            for path in &configs {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let cfg = parse_config(&text).with_context(|| format!("invalid scenario {}", path.display()))?;
                if parsed.iter().any(|c: &matterwave_cli::ScenarioConfig| c.name == cfg.name) {
                    bail!("two scenarios are named \"{}\"", cfg.name);
                }
                parsed.push(cfg);
            }
            let mut ok = true;
            for cfg in &parsed {
                let dir = opts.out_dir.join(&cfg.name);
                let out = run_scenario(cfg, &RunOptions { out_dir: dir, ..opts.clone() })
                    .with_context(|| format!("scenario \"{}\"", cfg.name))?;
                ok &= report(&cfg.name, &out, cfg.params.tau());
            }
            Ok(ok)
        }
        Command::Validate { quick } => {
            let stdout = std::io::stdout();
            let checks = run_suite(SuiteOptions { quick }, |c| {
                let mut lock = stdout.lock();
                let _ = writeln!(lock, "{}", serde_json::to_string(c).expect("checks serialise"));
                let _ = lock.flush();
            })?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            eprintln!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
        Command::Kernels {
            action: KernelsAction::Probe { points },
        } => {
            if points == 0 {
                bail!("--points must be positive");
            }
            println!(
                "{:<16} {:>6} {:>14} {:>14} {:>8}",
                "kernel",
                "points",
                format!("max rel h={PDE_STEP:.0e}"),
                "max rel 2h",
                "ratio"
            );
            for r in probe_kernels(points)? {
                println!(
                    "{:<16} {:>6} {:>14.3e} {:>14.3e} {:>8.3}",
                    r.kind, r.points, r.max_relative, r.max_relative_coarse, r.median_ratio
                );
            }
            Ok(true)
        }
        Command::Figures { number } => match run_figure(number, &opts)? {
            Some(out) => Ok(report(&format!("fig{number}"), &out, PhysicalParams::natural().tau())),
            None => Ok(true),
        },
    }
}
