use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use abc_orbits::diagnostics::{poincare_section, rotation_vector, seed_grid};
use abc_orbits::integrator::{integrate, ExitFace};
use abc_orbits::io::{
    fmt17, trajectory_rows, write_json, write_section_csv, write_sweep_csv, write_trajectory_csv, Sampling,
};
use abc_orbits::shooting::{
    assemble_periodic_orbit, conjugate_orbits, cube_grid, find_critical_a, lemma_margins, max_adjacent_jump,
    parameter_sweep, reflection_defects, verify_orbit, LemmaReport, OrbitRecord, PeriodicOrbit, ShootingConfig,
};
use abc_orbits::{Error, Point};
use serde_json::{json, Value};

use crate::config::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Outcome = Result<i32, CliError>;

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json_file(path: &Path, value: &Value) -> io::Result<()> {
    let mut w = create(path)?;
    write_json(&mut w, value)?;
    w.flush()
}

/// Writes a CSV to `out` with a config sidecar, or to stdout with the config on stderr.
fn emit_csv(
    out: Option<&Path>,
    run: &RunConfig,
    extra: Option<(&str, Value)>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    let mut echo = json!({ "config": run });
    if let Some((k, v)) = extra {
        echo[k] = v;
    }
    match out {
        Some(path) => {
            let mut w = create(path)?;
            body(&mut w)?;
            w.flush()?;
            write_json_file(&sidecar_path(path), &echo)
        }
        None => {
            eprintln!("config: {}", serde_json::to_string(&echo)?);
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()
        }
    }
}

fn vec17(p: Point) -> String {
    format!("({}, {}, {})", fmt17(p.x), fmt17(p.y), fmt17(p.z))
}

pub fn integrate_cmd(run: &IntegrateRun, echo: &RunConfig) -> Outcome {
    let traj = integrate(&run.params, run.from, (run.t0, run.t1), &run.integrator)?;
    let sampling = run.samples.map_or(Sampling::Steps, Sampling::Uniform);
    let rows = trajectory_rows(&traj, sampling);
    emit_csv(run.out.as_deref(), echo, None, |w| write_trajectory_csv(w, &rows))?;
    if run.out.is_some() {
        println!("points = {}", rows.len());
        println!("end = {}", vec17(traj.end_point()));
    }
    Ok(0)
}

pub fn shoot_cmd(run: &ShootRun, echo: &RunConfig) -> Outcome {
    let cfg = &run.shooting;
    let res = find_critical_a(cfg)?;
    println!("a_star = {}", fmt17(res.a_star));
    println!("t_star = {}", fmt17(res.t_star));
    println!("period = {}", fmt17(4.0 * res.t_star));
    println!("corner_residual = {}", fmt17(res.corner_residual));
    println!("bracket_width = {}", fmt17(res.bracket_width()));
    if let Some(out) = &run.out {
        write_json_file(out, &json!({ "config": echo, "result": res }))?;
    }
    if run.assemble {
        let orbit = assemble_periodic_orbit(&res, cfg)?;
        println!("residual = {}", fmt17(orbit.residual));
        println!("base_point = {}", vec17(orbit.base_point));
        if let Some(out) = &run.out {
            write_json_file(&out.with_extension("orbit.json"), &json!({ "config": echo, "orbit": orbit.record() }))?;
            let mut w = create(&out.with_extension("orbit.csv"))?;
            write_trajectory_csv(&mut w, &trajectory_rows(&orbit.trajectory, Sampling::Steps))?;
            w.flush()?;
        }
    }
    Ok(0)
}

fn load_orbit(path: &Path) -> Result<OrbitRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(inner) = v.get_mut("orbit") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Builds the orbit without enforcing the acceptance tolerances, so they can be reported.
fn orbit_for(cfg: &ShootingConfig) -> Result<PeriodicOrbit, Error> {
    let res = find_critical_a(cfg)?;
    let loose = ShootingConfig { periodicity_tol: f64::INFINITY, max_corner_residual: f64::INFINITY, ..*cfg };
    assemble_periodic_orbit(&res, &loose)
}

fn a_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * FRAC_PI_2 / n as f64).collect()
}

fn lemma_scan(cfg: &ShootingConfig, n: usize) -> Result<Vec<LemmaReport>, Error> {
    a_grid(n).into_iter().map(|a| lemma_margins(a, cfg)).collect()
}

struct Checks {
    failed: usize,
}

impl Checks {
    fn line(&mut self, pass: bool, text: String) {
        if !pass {
            self.failed += 1;
        }
        println!("[{}] {text}", if pass { "PASS" } else { "FAIL" });
    }

    fn measured(&mut self, name: &str, value: f64, tol: f64) {
        self.line(value <= tol, format!("{name} = {} (tol {})", fmt17(value), fmt17(tol)));
    }
}

pub fn verify_cmd(run: &VerifyRun) -> Outcome {
    let mut cfg = run.shooting;
    let orbit = match &run.orbit {
        Some(path) => {
            let rec = load_orbit(path)?;
            cfg.params = rec.params;
            PeriodicOrbit::from_record(&rec, &cfg.integrator)?
        }
        None => orbit_for(&cfg)?,
    };
    let mut checks = Checks { failed: 0 };
    println!("period = {}", fmt17(orbit.period));
    checks.measured("shift residual", orbit.residual, cfg.periodicity_tol);
    checks.measured("base point residual", orbit.base_point_residual, cfg.base_point_tol);
    if orbit.shift == [1, 0, 0] {
        let (d1, d2) = reflection_defects(&orbit, run.reflection_samples);
        checks.measured("reflection X(-s) = S1(X(s))", d1, run.reflection_tol);
        checks.measured("reflection X(t+s) = S2(X(t-s))", d2, run.reflection_tol);
    } else {
        println!("[SKIP] reflection identities need the +x orbit");
    }

    let reports = lemma_scan(&cfg, run.grid)?;
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    let margin = reports.iter().map(|r| r.y_margin).fold(f64::INFINITY, f64::min);
    checks.line(
        violations == 0,
        format!(
            "lemma margins over {} heights: {violations} violations, min(pi/4 - max y) = {}",
            reports.len(),
            fmt17(margin)
        ),
    );
    let forbidden = reports
        .iter()
        .filter(|r| !matches!(r.exit_face, ExitFace::Fx | ExitFace::FZTop | ExitFace::CornerXZTop))
        .count();
    checks.line(forbidden == 0, format!("exit faces: {forbidden} exits through FZ0, FDIAG or FANTI"));

    match conjugate_orbits(&orbit) {
        Ok(six) => {
            let want = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]];
            let mut worst = 0.0f64;
            let mut shifts_ok = six.len() == want.len();
            for (o, w) in six.iter().zip(want) {
                let r = verify_orbit(o, &cfg.integrator)?;
                worst = worst.max(r);
                shifts_ok &= o.shift == w;
                if run.directions {
                    let s = Point::new(o.shift[0] as f64, o.shift[1] as f64, o.shift[2] as f64) * TAU;
                    println!(
                        "{:>2} shift = {} residual = {}",
                        serde_json::to_value(o.direction)?.as_str().unwrap_or("?"),
                        vec17(s),
                        fmt17(r)
                    );
                }
            }
            checks.line(
                shifts_ok && worst <= cfg.periodicity_tol,
                format!("six conjugate orbits: worst residual = {} (tol {})", fmt17(worst), fmt17(cfg.periodicity_tol)),
            );
        }
        Err(e @ Error::SymmetryUnavailable { .. }) => println!("[SKIP] six conjugate orbits: {}: {e}", e.name()),
        Err(e) => return Err(e.into()),
    }
    Ok(if checks.failed == 0 { 0 } else { 1 })
}

pub fn rotation_cmd(run: &RotationRun, echo: &RunConfig) -> Outcome {
    let cfg = &run.shooting;
    let (p0, t, expected) = if run.on_orbit {
        let orbit = orbit_for(cfg)?;
        let t = run.t.unwrap_or(run.periods as f64 * orbit.period);
        (orbit.base_point, t, Some(orbit.rotation_vector()))
    } else {
        let p0 = run.from.ok_or_else(|| CliError::Usage("--from or --on-orbit is required".into()))?;
        (p0, run.t.unwrap_or(1000.0), None)
    };
    let est = rotation_vector(&cfg.params, p0, t, &cfg.integrator)?;
    println!("T = {}", fmt17(est.t));
    println!("rho = {}", vec17(est.rho));
    println!("tail_variation = {}", fmt17(est.tail_variation));
    if let Some(e) = expected {
        println!("expected = {}", vec17(e));
        println!("deviation = {}", fmt17((est.rho - e).norm()));
    }
    if let Some(out) = &run.out {
        write_json_file(out, &json!({ "config": echo, "estimate": est, "expected": expected }))?;
    }
    Ok(0)
}

pub fn poincare_cmd(run: &PoincareRun, echo: &RunConfig) -> Outcome {
    let seeds = seed_grid(run.grid, &run.section);
    let plot = poincare_section(&run.params, &run.section, &seeds, run.t_max, &run.integrator)?;
    for f in &plot.failures {
        eprintln!("seed {}: {}", f.seed_index, f.error);
    }
    let failures = serde_json::to_value(&plot.failures)?;
    emit_csv(run.out.as_deref(), echo, Some(("failures", failures)), |w| write_section_csv(w, &plot))?;
    if run.out.is_some() {
        println!("seeds = {}", seeds.len());
        println!("points = {}", plot.points.len());
        println!("failures = {}", plot.failures.len());
    }
    Ok(0)
}

pub fn sweep_cmd(run: &SweepRun, echo: &RunConfig) -> Outcome {
    if !(run.radius >= 0.0 && run.step > 0.0) {
        return Err(Error::InvalidConfig("radius must be non-negative and step positive".into()).into());
    }
    let grid = cube_grid(run.radius, run.step);
    let rows = parameter_sweep(&grid, &run.shooting);
    let n = 2 * (run.radius / run.step).round() as usize + 1;
    emit_csv(run.out.as_deref(), echo, None, |w| write_sweep_csv(w, &rows))?;
    if run.out.is_some() {
        println!("rows = {}", rows.len());
        println!("failed = {}", rows.iter().filter(|r| !r.ok).count());
        match max_adjacent_jump(&rows, n) {
            Some(j) => println!("max_adjacent_jump = {}", fmt17(j)),
            None => println!("max_adjacent_jump = n/a"),
        }
    }
    Ok(0)
}

pub fn lemmas_cmd(run: &LemmasRun, echo: &RunConfig) -> Outcome {
    let reports = lemma_scan(&run.shooting, run.grid)?;
    let min = |f: &dyn Fn(&LemmaReport) -> f64| reports.iter().map(f).fold(f64::INFINITY, f64::min);
    println!("heights = {}", reports.len());
    println!("min y_margin = {}", fmt17(min(&|r| r.y_margin)));
    if let Some(m) = reports.iter().find_map(|r| r.xz_margin) {
        println!("xz_margin = {}", fmt17(m));
    }
    println!("min zdot_interior = {}", fmt17(min(&|r| r.min_zdot_interior)));
    println!("min diag_speed = {}", fmt17(min(&|r| r.min_diag_speed)));
    if let Some(out) = &run.out {
        write_json_file(out, &json!({ "config": echo, "reports": reports }))?;
    }
    if let Some(r) = reports.iter().find(|r| !r.passed()) {
        return Err(Error::MonitorViolation { a: r.a, what: r.violations.join("; ") }.into());
    }
    Ok(0)
}
