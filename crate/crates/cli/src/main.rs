//! `abc-orbits`: trajectories, shooting, verification and diagnostics for the ABC flow.

mod args;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use abc_orbits::diagnostics::{Orientation, SectionSpec};
use abc_orbits::shooting::ShootingConfig;
use abc_orbits::{Config, Params, Point};
use clap::{Args, Parser, Subcommand};

use args::*;
use commands::CliError;
use config::*;

#[derive(Parser)]
#[command(name = "abc-orbits", version, about = "Shift-periodic orbits of the ABC flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Integrate(IntegrateArgs),
    /// Locate the corner-hitting height and optionally assemble the periodic orbit.
    Shoot(ShootArgs),
    /// Check the periodic orbit and its supporting inequalities.
    Verify(VerifyArgs),
    /// Estimate the mean drift of a trajectory.
    Rotation(RotationArgs),
    /// Record crossings of a section plane from a grid of seeds.
    Poincare(PoincareArgs),
    /// Run the shooting step on a cube of parameters around (1, 1, 1).
    Sweep(SweepArgs),
    /// Report the inequality margins over a grid of starting heights.
    Lemmas(LemmasArgs),
}

#[derive(Args)]
struct Common {
    /// Replay a config echoed by an earlier run; other flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Field amplitudes A,B,C.
    #[arg(long, value_name = "A,B,C", value_parser = parse_params, allow_hyphen_values = true)]
    params: Option<Params>,
    /// Relative integrator tolerance (absolute is 1/100 of it).
    #[arg(long, value_parser = parse_positive)]
    tol: Option<f64>,
}

impl Common {
    fn integrator(&self, base: Config) -> Config {
        self.tol.map_or(base, |t| base.with_tol(t))
    }

    fn shooting(&self, mut base: ShootingConfig) -> ShootingConfig {
        if let Some(p) = self.params {
            base.params = p;
        }
        base.integrator = self.integrator(base.integrator);
        base
    }
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: Common,
    /// Initial point x,y,z.
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_point, allow_hyphen_values = true,
          required_unless_present = "config")]
    from: Option<Point>,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Final time; may be below t0.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true, required_unless_present = "config")]
    t1: Option<f64>,
    /// Write this many uniformly spaced points instead of the accepted steps.
    #[arg(long)]
    samples: Option<usize>,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShootArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_positive)]
    bracket_tol: Option<f64>,
    /// Distance from the corner edge classified as a corner exit.
    #[arg(long, value_parser = parse_positive)]
    corner_tol: Option<f64>,
    /// Also build the periodic orbit.
    #[arg(long)]
    assemble: bool,
    /// Output JSON; with --assemble also writes <stem>.orbit.json and <stem>.orbit.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Orbit JSON written by `shoot --assemble`; runs the pipeline if absent.
    #[arg(long)]
    orbit: Option<PathBuf>,
    /// Print the six shift vectors.
    #[arg(long)]
    directions: bool,
    /// Number of starting heights in the inequality scan.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct RotationArgs {
    #[command(flatten)]
    common: Common,
    /// Start on the x-directed periodic orbit.
    #[arg(long, conflicts_with = "from")]
    on_orbit: bool,
    #[arg(long, value_name = "X,Y,Z", value_parser = parse_point, allow_hyphen_values = true)]
    from: Option<Point>,
    /// Averaging time.
    #[arg(long, value_parser = parse_positive)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoincareArgs {
    #[command(flatten)]
    common: Common,
    /// Section plane, e.g. z=0 or x=pi/2.
    #[arg(long, value_parser = parse_plane, allow_hyphen_values = true)]
    plane: Option<(abc_orbits::diagnostics::Axis, f64)>,
    /// positive, negative or both.
    #[arg(long, value_parser = parse_orientation)]
    orientation: Option<Orientation>,
    /// Seeds per side of the seed grid.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    tmax: Option<f64>,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_real)]
    radius: Option<f64>,
    #[arg(long, value_parser = parse_positive)]
    step: Option<f64>,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmasArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    grid: Option<usize>,
    /// Output JSON with one report per height.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn base(common: &Common, command: &str) -> Result<Option<RunConfig>, CliError> {
    let Some(path) = &common.config else { return Ok(None) };
    let run = load(path).map_err(CliError::Usage)?;
    if run.command() != command {
        return Err(CliError::Usage(format!("{} holds a `{}` config, not `{command}`", path.display(), run.command())));
    }
    Ok(Some(run))
}

fn resolve(command: Command) -> Result<RunConfig, CliError> {
    Ok(match command {
        Command::Integrate(a) => {
            let mut r = match base(&a.common, "integrate")? {
                Some(RunConfig::Integrate(r)) => r,
                _ => IntegrateRun::default(),
            };
            if let Some(p) = a.common.params {
                r.params = p;
            }
            r.integrator = a.common.integrator(r.integrator);
            r.from = a.from.unwrap_or(r.from);
            r.t0 = a.t0.unwrap_or(r.t0);
            r.t1 = a.t1.unwrap_or(r.t1);
            r.samples = a.samples.or(r.samples);
            r.out = a.out.or(r.out);
            RunConfig::Integrate(r)
        }
        Command::Shoot(a) => {
            let mut r = match base(&a.common, "shoot")? {
                Some(RunConfig::Shoot(r)) => r,
                _ => ShootRun::default(),
            };
            r.shooting = a.common.shooting(r.shooting);
            r.shooting.bracket_tol = a.bracket_tol.unwrap_or(r.shooting.bracket_tol);
            r.shooting.exit.corner_tol = a.corner_tol.unwrap_or(r.shooting.exit.corner_tol);
            r.assemble |= a.assemble;
            r.out = a.out.or(r.out);
            RunConfig::Shoot(r)
        }
        Command::Verify(a) => {
            let mut r = match base(&a.common, "verify")? {
                Some(RunConfig::Verify(r)) => r,
                _ => VerifyRun::default(),
            };
            r.shooting = a.common.shooting(r.shooting);
            r.orbit = a.orbit.or(r.orbit);
            r.directions |= a.directions;
            r.grid = a.grid.unwrap_or(r.grid);
            RunConfig::Verify(r)
        }
        Command::Rotation(a) => {
            let mut r = match base(&a.common, "rotation")? {
                Some(RunConfig::Rotation(r)) => r,
                _ => RotationRun::default(),
            };
            r.shooting = a.common.shooting(r.shooting);
            if a.on_orbit {
                r.on_orbit = true;
                r.from = None;
            }
            if a.from.is_some() {
                r.on_orbit = false;
                r.from = a.from;
            }
            r.t = a.t.or(r.t);
            r.out = a.out.or(r.out);
            RunConfig::Rotation(r)
        }
        Command::Poincare(a) => {
            let mut r = match base(&a.common, "poincare")? {
                Some(RunConfig::Poincare(r)) => r,
                _ => PoincareRun::default(),
            };
            if let Some(p) = a.common.params {
                r.params = p;
            }
            r.integrator = a.common.integrator(r.integrator);
            if let Some((axis, level)) = a.plane {
                r.section = SectionSpec { axis, level, ..r.section };
            }
            r.section.orientation = a.orientation.unwrap_or(r.section.orientation);
            r.grid = a.grid.unwrap_or(r.grid);
            r.t_max = a.tmax.unwrap_or(r.t_max);
            r.out = a.out.or(r.out);
            RunConfig::Poincare(r)
        }
        Command::Sweep(a) => {
            let mut r = match base(&a.common, "sweep")? {
                Some(RunConfig::Sweep(r)) => r,
                _ => SweepRun::default(),
            };
            r.shooting = a.common.shooting(r.shooting);
            r.radius = a.radius.unwrap_or(r.radius);
            r.step = a.step.unwrap_or(r.step);
            r.out = a.out.or(r.out);
            RunConfig::Sweep(r)
        }
        Command::Lemmas(a) => {
            let mut r = match base(&a.common, "lemmas")? {
                Some(RunConfig::Lemmas(r)) => r,
                _ => LemmasRun::default(),
            };
            r.shooting = a.common.shooting(r.shooting);
            r.grid = a.grid.unwrap_or(r.grid);
            r.out = a.out.or(r.out);
            RunConfig::Lemmas(r)
        }
    })
}

fn run(command: Command) -> Result<i32, CliError> {
    let cfg = resolve(command)?;
    match &cfg {
        RunConfig::Integrate(r) => commands::integrate_cmd(r, &cfg),
        RunConfig::Shoot(r) => commands::shoot_cmd(r, &cfg),
        RunConfig::Verify(r) => commands::verify_cmd(r),
        RunConfig::Rotation(r) => commands::rotation_cmd(r, &cfg),
        RunConfig::Poincare(r) => commands::poincare_cmd(r, &cfg),
        RunConfig::Sweep(r) => commands::sweep_cmd(r, &cfg),
        RunConfig::Lemmas(r) => commands::lemmas_cmd(r, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
