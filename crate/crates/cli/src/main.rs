//! `pswe`: batch driver for the shallow water engine.
//!
//! Exit codes: 0 success, 1 validation or I/O failure (or a failed
//! self-test), 2 bad command line, 3 solver abort (the last valid state is
//! written to `<out>/abort/`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use pswe_core::diagnostics::{self, water_volume};
use pswe_core::driver::{self, Abort, Event};
use pswe_core::experiments::{self, DrainCase, UniformFlowCase};
use pswe_core::io::output::{self, CsvTable, SERIES_HEADER, STEPS_HEADER};
use pswe_core::io::{load_config, RunConfig};
use pswe_core::riemann::{self, RiemannIC, StripRun};
use pswe_core::{timestep, Error, MeshKind, StepPolicy, Vec2};

const EXIT_FAILURE: u8 = 1;
const EXIT_ABORT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pswe", version, about = "Shallow water flow over vegetated terrain")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Run configuration (TOML); required by `run`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Seed for random terrain.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Rect,
    Hex,
}

impl From<Kind> for MeshKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Rect => MeshKind::Rectangular,
            Kind::Hex => MeshKind::Hexagonal,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum LakeTerrain {
    /// Every cell wet over `z ~ U[0, 1]`.
    Random,
    /// Bowl, partly wet.
    Bowl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a configured simulation.
    Run,
    /// 1-D dam break on a strip, compared with the exact solution.
    Riemann {
        #[arg(long, default_value_t = 9.0)]
        hl: f64,
        #[arg(long, default_value_t = 1.0)]
        hr: f64,
        #[arg(long, default_value_t = 400)]
        cells: usize,
        #[arg(long, default_value_t = 0.04)]
        t_end: f64,
        /// Add edge viscosity.
        #[arg(long)]
        viscosity: bool,
    },
    /// Checks that a lake at rest stays exactly at rest.
    LakeTest {
        #[arg(long, default_value_t = 32)]
        cells: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Kind::Rect)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = LakeTerrain::Random)]
        terrain: LakeTerrain,
    },
    /// Checks steady uniform flow down an inclined plane.
    UniformTest {
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        slope_x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        slope_y: f64,
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha_p: f64,
        #[arg(long, default_value_t = 0.02)]
        alpha_s: f64,
        #[arg(long, default_value_t = 0.5)]
        h: f64,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Drains a uniformly wetted synthetic valley and records q(t).
    Drain {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, default_value_t = 5.0)]
        spacing: f64,
        #[arg(long, default_value_t = 0.05)]
        h0: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha_p: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha_s: f64,
        #[arg(long, default_value_t = 600.0)]
        t_end: f64,
        #[arg(long, default_value_t = 20.0)]
        every: f64,
        #[arg(long, value_enum, default_value_t = Kind::Rect)]
        kind: Kind,
    },
}

/// Failures after argument parsing.
enum Failure {
    Usage(String),
    Error(Error),
    Abort(Abort),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PSWE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let workers = cli
        .global
        .workers
        .map(usize::from)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let result = pswe_core::with_workers(workers, || dispatch(&cli)).unwrap_or_else(|e| Err(e.into()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            error!("{e}");
            eprintln!("error: {e}");
            if is_solver_error(&e) {
                ExitCode::from(EXIT_ABORT)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Abort(a)) => {
            eprintln!("solver aborted after step {}: {}", a.step, a.error);
            ExitCode::from(EXIT_ABORT)
        }
    }
}

fn is_solver_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Positivity { .. } | Error::TimeStepTooSmall { .. } | Error::NonConvergence { .. }
    )
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let out = &cli.global.out;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    match &cli.command {
        Command::Run => {
            let path = cli
                .global
                .config
                .as_ref()
                .ok_or_else(|| Failure::Usage("the run subcommand needs --config PATH".into()))?;
            let mut config = load_config(path)?;
            if let Some(seed) = cli.global.seed {
                config = config.with_seed(seed);
            }
            run_config(&config, out)
        }
        Command::Riemann {
            hl,
            hr,
            cells,
            t_end,
            viscosity,
        } => riemann_cmd(*hl, *hr, *cells, *t_end, *viscosity, out),
        Command::LakeTest {
            cells,
            steps,
            kind,
            terrain,
        } => lake_test(*cells, *steps, (*kind).into(), *terrain, cli.global.seed.unwrap_or(0)),
        Command::UniformTest {
            slope_x,
            slope_y,
            theta,
            alpha_p,
            alpha_s,
            h,
            cells,
            steps,
        } => uniform_test(&UniformFlowCase {
            n: *cells,
            slope: Vec2::new(*slope_x, *slope_y),
            theta: *theta,
            alpha_p: *alpha_p,
            alpha_s: *alpha_s,
            h: *h,
            steps: *steps,
        }),
        Command::Drain {
            theta,
            cells,
            spacing,
            h0,
            alpha_p,
            alpha_s,
            t_end,
            every,
            kind,
        } => {
            let case = DrainCase {
                kind: (*kind).into(),
                n: *cells,
                spacing: *spacing,
                theta: *theta,
                h0: *h0,
                alpha_p: *alpha_p,
                alpha_s: *alpha_s,
                t_end: *t_end,
                output_every: *every,
                ..DrainCase::default()
            };
            drain(&case, out)
        }
    }
}

fn run_config(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let setup = config.build()?;
    let (model, state) = (setup.model, setup.state);
    info!("mesh with {} cells, t_end {}", model.n_cells(), config.output.t_end);
    let snapshots = out.join("snapshots");
    if config.output.snapshot_every.is_some() {
        std::fs::create_dir_all(&snapshots).map_err(|e| Error::Io {
            path: snapshots.clone(),
            source: e,
        })?;
    }
    let volume0 = water_volume(&model, &state);
    let mut steps = CsvTable::create(out.join("steps.csv"), &STEPS_HEADER)?;
    let mut series = CsvTable::create(out.join("series.csv"), &SERIES_HEADER)?;
    let result = driver::run(&model, state, &config.step, &config.schedule(), |ev| {
        match ev {
            Event::Step { step, report } => steps.step(step, report)?,
            Event::Output {
                step,
                state,
                snapshot,
                series: row,
            } => {
                if row {
                    series.series(&diagnostics::series_row(&model, state, volume0))?;
                }
                if snapshot {
                    output::write_snapshot(&model, state, step, &snapshots)?;
                }
            }
        }
        Ok(())
    });
    steps.finish()?;
    series.finish()?;
    match result {
        Ok(summary) => {
            output::write_cells(out.join("final_cells.csv"), &model, &summary.state)?;
            println!("completed {} steps, t = {}", summary.steps, summary.state.t);
            Ok(())
        }
        Err(abort) => {
            let dir = out.join("abort");
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            output::write_cells(dir.join("last_cells.csv"), &model, &abort.last)?;
            if model.mesh.grid().is_some() {
                output::write_snapshot(&model, &abort.last, abort.step, &dir)?;
            }
            eprintln!("last valid state (t = {}) written to {}", abort.last.t, dir.display());
            Err(Failure::Abort(abort))
        }
    }
}

fn riemann_cmd(hl: f64, hr: f64, cells: usize, t_end: f64, viscosity: bool, out: &Path) -> Result<(), Failure> {
    let ic = RiemannIC {
        h_l: hl,
        h_r: hr,
        ..RiemannIC::default()
    };
    let run = StripRun {
        viscosity,
        ..StripRun::new(cells, t_end)
    };
    let profile = riemann::run_riemann_1d(&ic, &run)?;
    let g = pswe_core::GRAVITY;
    let (h_exact, v_exact) = riemann::exact_profile(&ic, &profile.x, profile.t, g)?;
    let path = out.join(format!("riemann_{cells}.csv"));
    output::write_profile(&path, &profile, &h_exact, &v_exact)?;
    let (a, b) = riemann::unaffected_window(&ic, profile.t, g);
    let window = profile.window(a, b);
    let (hw, _) = riemann::exact_profile(&ic, &window.x, window.t, g)?;
    let l1 = riemann::l1_error(&window, &hw)?;
    println!("L1(h) = {l1} on [{a}, {b}] at t = {}", profile.t);
    println!("profile written to {}", path.display());
    Ok(())
}

fn lake_test(cells: usize, steps: usize, kind: MeshKind, terrain: LakeTerrain, seed: u64) -> Result<(), Failure> {
    let setup = match terrain {
        LakeTerrain::Random => experiments::random_lake(kind, cells, seed)?,
        LakeTerrain::Bowl => experiments::bowl_lake(kind, cells, 0.4)?,
    };
    let policy = StepPolicy::default();
    let mut state = setup.state.clone();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        let (next, _) = timestep::advance(&setup.model, &state, &policy)?;
        for i in 0..next.len() {
            worst = worst
                .max((next.h[i] - state.h[i]).abs())
                .max((next.v[i] - state.v[i]).norm());
        }
        state = next;
    }
    println!("max |dstate/step| = {worst}");
    if worst != 0.0 {
        return Err(Failure::Check(format!("lake drifted by {worst}")));
    }
    Ok(())
}

fn uniform_test(case: &UniformFlowCase) -> Result<(), Failure> {
    let r = experiments::run_uniform_flow(case, &StepPolicy::default())?;
    println!("steady velocity = ({}, {})", r.velocity.x, r.velocity.y);
    println!("window cells = {}", r.window_cells);
    println!("max relative step change = {:e}", r.max_step_change);
    println!("max relative velocity error = {:e}", r.max_velocity_error);
    if r.max_step_change >= 1e-10 || r.max_velocity_error >= 1e-10 {
        return Err(Failure::Check("uniform flow is not steady to 1e-10".into()));
    }
    Ok(())
}

fn drain(case: &DrainCase, out: &Path) -> Result<(), Failure> {
    let rows = experiments::run_drain(case, &StepPolicy::default())?;
    let path = out.join(format!("drain_theta_{}.csv", case.theta));
    output::write_series(&path, &rows)?;
    if let Some(last) = rows.last() {
        println!("q({}) = {}", last.t, last.q);
    }
    println!("series written to {}", path.display());
    Ok(())
}
