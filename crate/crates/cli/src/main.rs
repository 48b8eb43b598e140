use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use curvlab::error::{Error, Result};
use curvlab::harness::maps::{curvature_csv, levi_csv, norm_csv};
use curvlab::harness::{
    falsify, gallery, gallery_names, run_scenario, Check, FalsifyConfig, RunOutput, Scenario, EXIT_CONFIG,
    EXIT_FAIL, EXIT_PASS,
};

/// Curvature checks for hermitian holomorphic bundle maps.
#[derive(Parser)]
#[command(name = "curvlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario and check that both metrics are valid on its domain.
    Validate { file: PathBuf },
    /// Run every check of a scenario and write the report bundle.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Inspect or run the built-in scenarios.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Search random curvature-decreasing maps for a non-psh `log ‖A‖`.
    Falsify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the summary to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a heatmap CSV for a scenario.
    Map {
        kind: MapKind,
        scenario: PathBuf,
        /// Metric used by `curvature`.
        #[arg(long, value_enum, default_value_t = MapSide::Source)]
        side: MapSide,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// List the entry names.
    List,
    /// Run an entry and compare with its expected outcomes.
    Run {
        name: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print an entry as scenario JSON.
    Show { name: String },
}

#[derive(clap::Args)]
struct OutArgs {
    /// Output directory (default: `$CURVLAB_OUT/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "CURVLAB_OUT", default_value = "curvlab-out", hide_env_values = true)]
    out_root: PathBuf,
}

impl OutArgs {
    fn dir(&self, scenario: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| self.out_root.join(scenario))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Curvature,
    Norm,
    Levi,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapSide {
    Source,
    Target,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

/// Write to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"));
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Validate { file } => {
            let scenario = Scenario {
                checks: vec![Check::Validate],
                truncation: None,
                ..load(&file)?
            };
            let out = run_scenario(&scenario)?;
            print_json(&out.reports[0])?;
            Ok(out.exit_code())
        }
        Command::Run { scenario, out, seed } => {
            let mut s = load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            finish(run_scenario(&s)?, &out.dir(&s.name))
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => {
                emit(&gallery_names().iter().map(|n| format!("{n}\n")).collect::<String>());
                Ok(EXIT_PASS)
            }
            GalleryAction::Show { name } => {
                emit(&(gallery(&name)?.to_json() + "\n"));
                Ok(EXIT_PASS)
            }
            GalleryAction::Run { name, out } => {
                let s = gallery(&name)?;
                let output = run_scenario(&s)?;
                for (check, want) in &s.expected {
                    let got = output.report(check.name()).map(|r| r.outcome);
                    if got != Some(*want) {
                        eprintln!("{name}: {check} expected {want:?}, got {got:?}");
                        return Err(Error::Scenario(format!("gallery entry `{name}` did not reproduce")));
                    }
                }
                finish(output, &out.dir(&s.name))
            }
        },
        Command::Falsify { trials, seed, out } => {
            let summary = falsify(FalsifyConfig { trials, seed })?;
            let text = serde_json::to_string_pretty(&summary)? + "\n";
            if let Some(path) = out {
                fs::write(path, &text)?;
            }
            emit(&text);
            Ok(if summary.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Map { kind, scenario, side } => {
            let s = load(&scenario)?;
            let hom = s.build()?.hom;
            let csv = match kind {
                MapKind::Curvature => {
                    let metric = match side {
                        MapSide::Source => hom.source(),
                        MapSide::Target => hom.target(),
                    };
                    curvature_csv(metric, &s.domain)?
                }
                MapKind::Norm => norm_csv(&hom, &s.domain),
                MapKind::Levi => levi_csv(&hom, &s.domain),
            };
            emit(&csv);
            Ok(EXIT_PASS)
        }
    }
}

fn finish(output: RunOutput, dir: &Path) -> Result<i32> {
    output.write_to(dir)?;
    print_json(&output.summary())?;
    Ok(output.exit_code())
}
