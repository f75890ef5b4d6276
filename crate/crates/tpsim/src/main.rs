use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tpsim::bench::{run_bench, write_bench};
use tpsim::run::{cmd_simulate, cmd_validate, Overrides};
use tpsim::{BenchConfig, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "tpsim", version, about = "Simulate, validate and benchmark temporal point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicates and write event logs, snapshots and diagnostics.
    Simulate(Common),
    /// Simulate, then test the time-rescaled intervals against Exp(1).
    Validate(Common),
    /// Time methods over a grid of Erdős–Rényi Hawkes systems.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Worker threads for replicates (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replicates: self.replicates,
            threads: self.threads,
        }
    }

    fn read(&self) -> Result<String, CliError> {
        std::fs::read_to_string(&self.config).map_err(|source| CliError::Read {
            path: self.config.clone(),
            source,
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let mut cfg = RunConfig::parse(&c.read()?)?;
            c.overrides().apply(&mut cfg)?;
            cmd_simulate(&cfg, &c.out, c.threads)?;
        }
        Command::Validate(c) => {
            let mut cfg = RunConfig::parse(&c.read()?)?;
            c.overrides().apply(&mut cfg)?;
            let report = cmd_validate(&cfg, &c.out, c.threads)?;
            for k in &report.ks {
                let verdict = match k.pass_0_01 {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "skipped",
                };
                let d = k.statistic.map_or_else(|| "-".into(), |d| format!("{d:.5}"));
                println!("process {:>3}  n={:<7} D={d:<9} {verdict}", k.process_index, k.intervals);
            }
            println!("all processes pass KS at alpha=0.01: {}", report.all_pass_0_01);
        }
        Command::Bench(c) => {
            let mut cfg = BenchConfig::parse(&c.read()?)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if let Some(r) = c.replicates {
                cfg.runs = r;
            }
            cfg.check()?;
            if c.threads.is_some() {
                log::warn!("--threads is ignored by bench; runs are timed sequentially");
            }
            std::fs::create_dir_all(&c.out)?;
            let rows = run_bench(&cfg)?;
            write_bench(&c.out.join("bench.csv"), &rows)?;
            for r in &rows {
                println!(
                    "{:<28} V={:<4} completed={:<4} median={} rejection={}",
                    r.method,
                    r.nodes,
                    r.runs_completed,
                    r.median_seconds.map_or_else(|| "NA".into(), |x| format!("{x:.6}s")),
                    r.rejection_rate.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
