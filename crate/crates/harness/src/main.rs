use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qa_hybrid::config::{parse_sweep_arg, Seeds};
use qa_hybrid::{ingest, presets, run_scenario, ConfigError, RunError, RunOptions, ScenarioConfig};

/// Default output root when `--out` is not given.
const OUT_ENV: &str = "QA_HYBRID_OUT";

#[derive(Parser)]
#[command(name = "qa-hybrid", version, about = "Hybridization scenarios for quantum and classical accelerometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a preset and write the CSV bundle.
    Run {
        /// Scenario TOML file (omit with --preset).
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Use seeds 0..N.
        #[arg(long)]
        seeds: Option<u64>,
        /// Override the number of cycles per seed.
        #[arg(long)]
        cycles: Option<u64>,
        /// Output directory (default `$QA_HYBRID_OUT/<name>` or `results/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep `key=v1,v2,...`; repeat for a cartesian product.
        #[arg(long)]
        sweep: Vec<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Exit with code 3 if any estimator diverges.
        #[arg(long)]
        strict: bool,
    },
    /// Parse and validate an IMU CSV (`t,ax,ay,az,wx,wy,wz`).
    Ingest { path: PathBuf },
    /// List presets, or print one.
    Presets { name: Option<String> },
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn real_main(cli: Cli) -> Result<ExitCode, RunError> {
    match cli.command {
        Command::Run { config, preset, seeds, cycles, out, sweep, jobs, strict } => {
            let mut cfg = match (config, preset) {
                (Some(path), None) => ScenarioConfig::from_path(&path)?,
                (None, Some(name)) => presets::load(&name)?,
                _ => return Err(ConfigError::invalid("run", "give exactly one of <config> or --preset").into()),
            };
            if let Some(n) = seeds {
                cfg.seeds = Seeds::Count(n);
            }
            if let Some(n) = cycles {
                cfg.cycles = n;
            }
            if !sweep.is_empty() {
                cfg.sweep = sweep.iter().map(|s| parse_sweep_arg(s)).collect::<Result<_, _>>()?;
            }
            cfg.validate()?;
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j)
                    .build_global()
                    .map_err(|e| RunError::Data(e.to_string()))?;
            }
            let out = out.unwrap_or_else(|| {
                let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
                root.join(&cfg.name)
            });
            let start = Instant::now();
            let results = run_scenario(&cfg, Some(&out), RunOptions::default())?;
            let mut diverged = false;
            println!("{:<5} {:<40} {:<17} {:>9} {:>12} {:>8}", "point", "params", "series", "converged", "level", "slope");
            for p in &results {
                for s in &p.series {
                    diverged |= s.algorithm.is_some() && s.converged() < s.seeds.len();
                    println!(
                        "{:<5} {:<40} {:<17} {:>5}/{:<3} {:>12.4e} {:>8.3}",
                        p.point.index,
                        p.point.label(),
                        s.label,
                        s.converged(),
                        s.seeds.len(),
                        s.median_level(),
                        s.median_slope()
                    );
                }
            }
            eprintln!("wrote {} in {:.1?}", out.display(), start.elapsed());
            Ok(if strict && diverged { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }
        Command::Ingest { path } => {
            let start = Instant::now();
            let s = ingest::read_stream_path(&path)?;
            let el = start.elapsed().as_secs_f64();
            let span = s.t[s.len() - 1] - s.t[0];
            println!("rows {}  rate {:.6} Hz  span {:.3} s  ({:.0} rows/s)", s.len(), s.rate, span, s.len() as f64 / el);
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { name } => {
            match name {
                None => presets::names().for_each(|n| println!("{n}")),
                Some(n) => print!("{}", presets::text(&n).ok_or(ConfigError::UnknownPreset(n.clone()))?),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
