use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pop_bench::{run_experiment, scaling_sweep, Domain, ExperimentConfig, Problem, TIME_LIMIT_ENV};

/// Runs partitioned-optimisation experiments.
#[derive(Parser)]
#[command(name = "pop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full solve, POP-k and the baseline for every seed of a config file.
    Run {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's parallelism.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Full versus POP-k solve time over growing instance sizes.
    Sweep {
        #[arg(long)]
        domain: Domain,
        /// Ascending sizes: jobs, nodes or shards depending on the domain.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Per-solve limit in seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Stop after the first size whose full solve takes this many seconds.
        #[arg(long)]
        stop_after: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes one seeded instance as JSON.
    Gen {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON file with generator settings; defaults otherwise.
        #[arg(long)]
        generator: Option<PathBuf>,
    },
}

fn time_limit(secs: f64) -> Result<Duration> {
    let secs = match std::env::var(TIME_LIMIT_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{TIME_LIMIT_ENV}={v:?}"))?,
        Err(_) => secs,
    };
    if !(secs > 0.0) {
        bail!("time limit must be positive, got {secs}");
    }
    Ok(Duration::from_secs_f64(secs))
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            domain,
            config,
            out,
            parallelism,
        } => {
            let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            match cfg.domain {
                Some(d) if d != domain => bail!("config is for {d}, command line says {domain}"),
                _ => cfg.domain = Some(domain),
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            let report = run_experiment(&cfg)?;
            println!(
                "{} records written to {}",
                report.records.len(),
                report.output_dir.display()
            );
            let failures: Vec<_> = report.failures().collect();
            for r in &failures {
                eprintln!(
                    "seed {} {}: {}{}",
                    r.seed,
                    r.method,
                    r.status,
                    r.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
                );
            }
            Ok(if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sweep {
            domain,
            sizes,
            k,
            seed,
            parallelism,
            time_limit: secs,
            stop_after,
            out,
        } => {
            let stop_after = stop_after.map(Duration::from_secs_f64);
            let report = scaling_sweep(domain, &sizes, k, seed, parallelism, time_limit(secs)?, stop_after)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(out.join("sweep.csv"), report.to_csv()?)?;
            std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&report)?)?;
            match report.slope {
                Some(s) => println!("log-log slope of full solve time against variables: {s:.3}"),
                None => println!("too few completed full solves to fit a slope"),
            }
            let Some(largest) = report.largest_solved() else {
                eprintln!("no size finished both solves");
                return Ok(ExitCode::from(2));
            };
            println!(
                "largest solved size {}: full {:.0} ms, pop-{k} {:.0} ms ({:.2}x)",
                largest.size,
                largest.full_ms,
                largest.pop_ms,
                largest.full_ms / largest.pop_ms
            );
            let all_solved = report
                .points
                .iter()
                .all(|p| p.full_status == pop_bench::Status::Optimal);
            Ok(if all_solved && report.pop_faster_at_largest() == Some(true) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Gen {
            domain,
            seed,
            out,
            generator,
        } => {
            let settings = match generator {
                Some(path) => serde_json::from_str(
                    &std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => serde_json::Value::Null,
            };
            let problem = Problem::generate(domain, &settings, seed)?;
            std::fs::write(&out, problem.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
