use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geq_cli::commands::{self, Settings};
use geq_cli::report::Report;
use geq_cli::scene::SpecFile;
use geq_cli::{ladder_from_env, CliError, EXIT_CHECK_FAILED, EXIT_PASS};

#[derive(Parser)]
#[command(
    name = "geq",
    version,
    about = "Checks and constructions for geodesically equivalent metric pairs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct Common {
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compatibility residual, Nijenhuis torsion and self-adjointness of L.
    Check {
        scene: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Split along a grouping of the base-point eigenvalues, e.g. "0,1|2".
    Split {
        scene: PathBuf,
        #[arg(long)]
        groups: String,
        #[arg(long)]
        export: Option<PathBuf>,
        /// Lattice nodes per axis for --export.
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Glue two pairs on the product box.
    Glue {
        scene1: PathBuf,
        scene2: PathBuf,
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        trajectories: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Transform a pair by f(L): poly:c0,c1,..  recip:c  exp  id
    Ts {
        scene: PathBuf,
        #[arg(long = "f")]
        f: String,
        #[command(flatten)]
        common: Common,
    },
    /// Emit the scene of a Levi-Civita normal form.
    Generate { spec: PathBuf },
    /// Integrate geodesics of g and measure their defect against gbar.
    Oracle {
        scene: PathBuf,
        #[arg(long, default_value_t = 20)]
        trajectories: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn settings(common: Common) -> Result<Settings, CliError> {
    let (ladder, scale) = ladder_from_env()?;
    Ok(Settings {
        points: common.points,
        seed: common.seed,
        ladder,
        scale,
        ..Settings::default()
    })
}

fn emit(report: Report) -> i32 {
    print!("{}", report.to_json());
    if report.pass() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let code = match cli.cmd {
        Cmd::Check { scene, common } => emit(commands::cmd_check(
            &commands::load_scene(&scene)?,
            &settings(common)?,
        )?),
        Cmd::Split {
            scene,
            groups,
            export,
            grid,
            common,
        } => {
            let s = Settings {
                grid,
                ..settings(common)?
            };
            emit(commands::cmd_split(
                &commands::load_scene(&scene)?,
                &groups,
                export.as_deref(),
                &s,
            )?)
        }
        Cmd::Glue {
            scene1,
            scene2,
            export,
            grid,
            trajectories,
            common,
        } => {
            let s = Settings {
                grid,
                trajectories,
                ..settings(common)?
            };
            let (a, b) = (
                commands::load_scene(&scene1)?,
                commands::load_scene(&scene2)?,
            );
            emit(commands::cmd_glue(&a, &b, export.as_deref(), &s)?)
        }
        Cmd::Ts { scene, f, common } => emit(commands::cmd_ts(
            &commands::load_scene(&scene)?,
            &f,
            &settings(common)?,
        )?),
        Cmd::Generate { spec } => {
            let scene = commands::cmd_generate(&commands::read_json::<SpecFile>(&spec)?)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&scene).expect("scene serialises")
            );
            EXIT_PASS
        }
        Cmd::Oracle {
            scene,
            trajectories,
            seed,
        } => {
            let s = Settings {
                trajectories,
                ..settings(Common { points: 0, seed })?
            };
            emit(commands::cmd_oracle(&commands::load_scene(&scene)?, &s)?)
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("geq: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
