//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::time::{Duration, Instant};

use abc_orbits::diagnostics::{flame_speed_lower_bound, poincare_section, seed_grid, Axis, Orientation, SectionSpec};
use abc_orbits::flow::*;
use abc_orbits::integrator::oracle::rk4_fixed;
use abc_orbits::integrator::{flow_map, integrate_until_exit, ExitFace, ExitOptions, IntegratorConfig};
use abc_orbits::io::{trajectory_rows, write_json, write_section_csv, write_sweep_csv, write_trajectory_csv, Sampling};
use abc_orbits::shooting::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            if elapsed > b {
                o.pass = false;
                o.detail.push_str(&format!("; over time budget {b:?}"));
            }
        }
        if !o.pass {
            self.failures += 1;
        }
        println!("[{}] {id:>2} {name}: {} ({elapsed:.2?})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
}

fn random_points(n: usize, seed: u64) -> Vec<Point3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
        .collect()
}

fn a_grid() -> Vec<f64> {
    (0..200).map(|i| i as f64 * FRAC_PI_2 / 200.0).collect()
}

fn field_correctness() -> Outcome {
    let params = FlowParams::default();
    let pts = random_points(1000, 1);
    let div = pts.iter().map(|p| trace(&jacobian(&params, p)).abs()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for kind in SymmetryKind::BUILTIN {
        for p in &pts {
            worst = worst.max(symmetry_equivariance_defect(kind, &params, p).unwrap());
        }
    }
    outcome(div <= 1e-14 && worst <= 1e-12, format!("max |div| = {div:e}, max defect = {worst:e}"))
}

fn integrator_order() -> Outcome {
    let params = FlowParams::default();
    let p0 = Point3::new(0.4, -1.2, 2.5);
    let span = (0.0, 10.0);
    let h = 0.05;
    let reference = rk4_fixed(&params, p0, span, h / 8.0);
    let e1 = (rk4_fixed(&params, p0, span, h) - reference).norm();
    let e2 = (rk4_fixed(&params, p0, span, h / 2.0) - reference).norm();
    let ratio = e1 / e2;

    let oracle = rk4_fixed(&params, p0, span, 1e-5);
    let adaptive = flow_map(&params, p0, span, &IntegratorConfig::default()).unwrap();
    let gap = (oracle - adaptive).norm();
    outcome(
        (12.0..=20.0).contains(&ratio) && gap <= 1e-6,
        format!("halving ratio = {ratio:.3}, adaptive vs RK4(h=1e-5) = {gap:e}"),
    )
}

fn exit_face_exclusion() -> Outcome {
    let region = PrismRegion::default();
    let mut forbidden = 0;
    let mut faces = [0usize; 3];
    for a in a_grid() {
        let (_, rep) = integrate_until_exit(
            &FlowParams::default(),
            Point3::new(-FRAC_PI_2, 0.0, a),
            &region,
            &IntegratorConfig::default(),
            &ExitOptions::default(),
        )
        .unwrap();
        match rep.face {
            ExitFace::Fx => faces[0] += 1,
            ExitFace::FZTop => faces[1] += 1,
            ExitFace::CornerXZTop => faces[2] += 1,
            _ => forbidden += 1,
        }
    }
    outcome(
        forbidden == 0,
        format!("forbidden exits = {forbidden}; FX {} FZTOP {} corner {}", faces[0], faces[1], faces[2]),
    )
}

fn inequality_monitors() -> Outcome {
    let cfg = ShootingConfig::default();
    let mut violations = 0;
    let mut min_y = f64::INFINITY;
    let mut min_zdot = f64::INFINITY;
    let mut l2 = f64::NAN;
    for a in a_grid() {
        let r = lemma_margins(a, &cfg).unwrap();
        violations += r.violations.len();
        min_y = min_y.min(r.y_margin);
        min_zdot = min_zdot.min(r.min_zdot_interior);
        if let Some(m) = r.xz_margin {
            l2 = m;
        }
    }
    outcome(
        violations == 0 && min_y > 0.0 && l2 > 0.0 && min_zdot > 0.0,
        format!(
            "violations = {violations}, min(π/4 - max y) = {min_y:.6}, a=0 min(x+π/2-z) = {l2:e}, min ż inside = {min_zdot:e}"
        ),
    )
}

fn shooting_convergence(res: &ShootingResult) -> Outcome {
    let w = res.bracket_width();
    let ok = w <= 1e-12
        && res.corner_residual <= 1e-6
        && res.a_star > 0.0
        && res.a_star < FRAC_PI_2
        && res.y_exit >= -FRAC_PI_2
        && res.y_exit <= FRAC_PI_4;
    outcome(
        ok,
        format!(
            "width = {w:e}, corner residual = {:e}, a* = {:.15}, t* = {:.15}, y_exit = {:.12}",
            res.corner_residual, res.a_star, res.t_star, res.y_exit
        ),
    )
}

fn orbit_reproduction(res: &ShootingResult, orbit: &PeriodicOrbit) -> Outcome {
    let predicted = Point3::new(-PI, -res.y_exit, FRAC_PI_2);
    let base = (orbit.base_point - predicted).norm();
    let (d1, d2) = reflection_defects(orbit, 50);
    outcome(
        orbit.residual <= 1e-5 && base <= 1e-6 && d1 <= 1e-6 && d2 <= 1e-6,
        format!(
            "period = {:.15}, shift residual = {:e}, base point = {base:e}, reflections = {d1:e} / {d2:e}",
            orbit.period, orbit.residual
        ),
    )
}

fn six_directions(six: &[PeriodicOrbit]) -> Outcome {
    let want = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]];
    let shifts_ok = six.len() == 6 && six.iter().zip(want).all(|(o, w)| o.shift == w);
    let cfg = IntegratorConfig::default();
    let residuals: Vec<f64> = six.iter().map(|o| verify_orbit(o, &cfg).unwrap()).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let periods_ok = six.iter().all(|o| o.period == six[0].period);
    outcome(
        shifts_ok && periods_ok && worst <= 1e-5,
        format!("shifts {:?}, worst direct residual = {worst:e}", six.iter().map(|o| o.shift).collect::<Vec<_>>()),
    )
}

fn drift_bound(six: &[PeriodicOrbit]) -> Outcome {
    let floor = TAU / six[0].period / 3f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut min_bound = f64::INFINITY;
    let mut pattern_ok = true;
    for _ in 0..100 {
        let v = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = v * (1.0 / v.norm());
        let b = flame_speed_lower_bound(six, p).unwrap();
        min_bound = min_bound.min(b);
        for o in orders {
            for signs in 0..8u32 {
                let s = |i: u32| if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                let q = Point3::new(s(0) * p[o[0]], s(1) * p[o[1]], s(2) * p[o[2]]);
                pattern_ok &= flame_speed_lower_bound(six, q).unwrap() == b;
            }
        }
    }
    outcome(
        min_bound >= floor - 1e-9 && floor > 0.0 && pattern_ok,
        format!("min bound = {min_bound:.15}, floor (2π/t0)/√3 = {floor:.15}, symmetric = {pattern_ok}"),
    )
}

fn sweep_continuity() -> Outcome {
    let grid = cube_grid(0.1, 0.05);
    let rows = parameter_sweep(&grid, &ShootingConfig::default());
    let failed = rows.iter().filter(|r| !r.ok).count();
    let jump = max_adjacent_jump(&rows, 5);
    let (lo, hi) =
        rows.iter().filter_map(|r| r.a_star).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| (l.min(a), h.max(a)));
    outcome(
        rows.len() == 125 && failed == 0 && jump.is_some_and(|j| j < 0.1),
        format!("{} cells, {failed} failed, max adjacent jump = {jump:?}, a* ∈ [{lo:.6}, {hi:.6}]", rows.len()),
    )
}

fn data_outputs() -> Vec<u8> {
    let cfg = ShootingConfig::default();
    let res = find_critical_a(&cfg).unwrap();
    let orbit = assemble_periodic_orbit(&res, &cfg).unwrap();
    let mut out = Vec::new();
    write_json(&mut out, &res).unwrap();
    write_json(&mut out, &orbit.record()).unwrap();
    write_trajectory_csv(&mut out, &trajectory_rows(&orbit.trajectory, Sampling::Steps)).unwrap();
    let spec = SectionSpec { axis: Axis::Z, level: 0.0, orientation: Orientation::Positive };
    let plot = poincare_section(&cfg.params, &spec, &seed_grid(4, &spec), 100.0, &cfg.integrator).unwrap();
    write_section_csv(&mut out, &plot).unwrap();
    let rows = parameter_sweep(&cube_grid(0.05, 0.05), &cfg);
    write_sweep_csv(&mut out, &rows).unwrap();
    out
}

fn determinism() -> Outcome {
    let a = data_outputs();
    let b = data_outputs();
    outcome(a == b, format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    println!("acceptance suite");
    let mut suite = Suite { failures: 0 };
    suite.run(1, "field correctness", Some(Duration::from_secs(1)), field_correctness);
    suite.run(2, "integrator order", Some(Duration::from_secs(10)), integrator_order);
    suite.run(3, "exit-face exclusion", Some(Duration::from_secs(30)), exit_face_exclusion);
    suite.run(4, "inequality monitors", None, inequality_monitors);

    let cfg = ShootingConfig::default();
    let t = Instant::now();
    let res = find_critical_a(&cfg);
    let shoot_time = t.elapsed();
    let res = match res {
        Ok(r) => r,
        Err(e) => {
            println!("[FAIL]  5 shooting convergence: {}: {e}", e.name());
            println!("[SKIP] criteria 6-8 need a converged shooting result");
            std::process::exit(1);
        }
    };
    suite.run(5, "shooting convergence", Some(Duration::from_secs(60).saturating_sub(shoot_time)), || {
        shooting_convergence(&res)
    });
    let orbit = match assemble_periodic_orbit(&res, &cfg) {
        Ok(o) => o,
        Err(e) => {
            println!("[FAIL]  6 orbit reproduction: {}: {e}", e.name());
            std::process::exit(1);
        }
    };
    suite.run(6, "orbit reproduction", None, || orbit_reproduction(&res, &orbit));
    let six = conjugate_orbits(&orbit).expect("cyclic parameters");
    suite.run(7, "six directions", None, || six_directions(&six));
    suite.run(8, "drift lower bound", None, || drift_bound(&six));
    suite.run(9, "parameter sweep", Some(Duration::from_secs(600)), sweep_continuity);
    suite.run(10, "determinism", None, determinism);

    if suite.failures > 0 {
        println!("{} criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
