//! Shooting for the critical start height and assembly of the shift-periodic orbit.
//!
//! Trajectories start at `(-π/2, 0, a)` for `a ∈ [0, π/2)` inside the prism
//! `D` and are followed to their first exit. Heights whose trajectory leaves
//! through `x = 0` form S0, those leaving through `z = π/2` form S1. A height
//! on the common boundary reaches the corner edge `x = 0, z = π/2`, and the
//! two reflections fixing the start line and the corner line then extend
//! that arc into a solution with `X(t + 4 t̄) = X(t) + (2π, 0, 0)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{apply_symmetry, velocity, Face, FlowParams, Matrix3, Point3, PrismRegion, SymmetryKind};
use crate::integrator::{
    flow_map, integrate, integrate_until_exit, ExitFace, ExitOptions, ExitReport, IntegratorConfig, Trajectory,
};

/// Band around the diagonal face in which `ẋ + ẏ` is monitored.
const DIAG_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    pub params: FlowParams<f64>,
    pub integrator: IntegratorConfig<f64>,
    pub exit: ExitOptions<f64>,
    /// Bisection stops once `a_hi - a_lo` is at most this.
    pub bracket_tol: f64,
    /// Grid spacing of the coarse upward scan.
    pub scan_step: f64,
    /// Stop bisecting at the first corner classification.
    pub stop_on_boundary: bool,
    /// Try one secant correction of `a_star` on the signed corner offset.
    pub polish: bool,
    /// Largest corner residual accepted by orbit assembly.
    pub max_corner_residual: f64,
    pub periodicity_tol: f64,
    pub base_point_tol: f64,
    /// Allowed distance of (A, B, C) from (1, 1, 1).
    pub ball_radius: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            params: FlowParams::default(),
            integrator: IntegratorConfig::default(),
            exit: ExitOptions::default(),
            bracket_tol: 1e-12,
            scan_step: PI / 64.0,
            stop_on_boundary: false,
            polish: true,
            max_corner_residual: 1e-6,
            periodicity_tol: 1e-5,
            base_point_tol: 1e-6,
            ball_radius: 0.2,
        }
    }
}

impl ShootingConfig {
    pub fn with_params(mut self, params: FlowParams<f64>) -> Self {
        self.params = params;
        self
    }

    fn check(&self) -> Result<()> {
        let p = self.params;
        if !(p.distance_to_unit() <= self.ball_radius) {
            return Err(Error::OutsideParameterBall { a: p.a, b: p.b, c: p.c, radius: self.ball_radius });
        }
        if !(self.bracket_tol > 0.0 && self.scan_step > 0.0 && self.scan_step < FRAC_PI_2) {
            return Err(Error::InvalidConfig("bracket_tol and scan_step must be positive".into()));
        }
        self.integrator.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotClass {
    /// Left through x = 0 below the corner.
    S0,
    /// Left through z = π/2 away from the corner.
    S1,
    /// Reached the corner edge within tolerance.
    #[serde(rename = "BOUNDARY")]
    Boundary,
    /// Grazing, non-transversal exit.
    #[serde(rename = "UNRESOLVED")]
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitClass {
    pub a: f64,
    pub class: ShotClass,
    pub report: ExitReport<f64>,
}

impl ExitClass {
    /// Which side of the critical height `a` lies on. Corner hits are
    /// assigned by the face that was crossed first.
    pub fn below_critical(&self) -> Option<bool> {
        match self.class {
            ShotClass::S0 => Some(true),
            ShotClass::S1 => Some(false),
            ShotClass::Boundary => Some(self.report.crossed_face == Face::Fx),
            ShotClass::Unresolved => None,
        }
    }

    /// `x + (π/2 - z)` at the exit: positive in S0, negative in S1, zero at the corner.
    pub fn corner_offset(&self) -> f64 {
        self.report.p_exit.x + (FRAC_PI_2 - self.report.p_exit.z)
    }

    pub fn corner_residual(&self) -> f64 {
        corner_residual(&self.report.p_exit)
    }
}

fn corner_residual(p: &Point3<f64>) -> f64 {
    p.x.abs().max((p.z - FRAC_PI_2).abs())
}

/// The shooting start point for height `a`.
pub fn start_point(a: f64) -> Point3<f64> {
    Point3::new(-FRAC_PI_2, 0.0, a)
}

fn shoot(a: f64, cfg: &ShootingConfig) -> Result<(Trajectory<f64>, ExitReport<f64>)> {
    if !(0.0..FRAC_PI_2).contains(&a) {
        return Err(Error::InvalidStart(format!("height {a} outside [0, π/2)")));
    }
    let p0 = start_point(a);
    let v = velocity(&cfg.params, &p0);
    if !(v.x + v.y > 0.0) {
        return Err(Error::InvalidStart(format!("ẋ + ẏ = {} is not inward at height {a}", v.x + v.y)));
    }
    integrate_until_exit(&cfg.params, p0, &PrismRegion::default(), &cfg.integrator, &cfg.exit)
}

/// Classifies height `a` by where its trajectory first leaves the prism.
pub fn classify(a: f64, cfg: &ShootingConfig) -> Result<ExitClass> {
    cfg.check()?;
    let (_, report) = shoot(a, cfg)?;
    let class = match report.face {
        ExitFace::Fx | ExitFace::FZTop if !report.transversal => ShotClass::Unresolved,
        ExitFace::Fx => ShotClass::S0,
        ExitFace::FZTop => ShotClass::S1,
        ExitFace::CornerXZTop => ShotClass::Boundary,
        ExitFace::FZ0 | ExitFace::FDiag | ExitFace::FAnti => {
            return Err(Error::ForbiddenFaceExit { a, face: report.crossed_face });
        }
    };
    Ok(ExitClass { a, class, report })
}

/// A change of class between neighbouring scan heights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub a_lo: f64,
    pub a_hi: f64,
    pub from: ShotClass,
    pub to: ShotClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub params: FlowParams<f64>,
    pub a_lo: f64,
    pub a_hi: f64,
    pub a_star: f64,
    pub t_star: f64,
    pub exit_point: Point3<f64>,
    pub corner_residual: f64,
    pub y_exit: f64,
    pub exit_class: ShotClass,
    pub bisection_steps: usize,
    pub boundary_hits: usize,
    pub polished: bool,
    /// Every class change seen in the coarse scan.
    pub transitions: Vec<Transition>,
}

impl ShootingResult {
    pub fn bracket_width(&self) -> f64 {
        self.a_hi - self.a_lo
    }
}

/// Coarse scan heights `k * scan_step < π/2`.
pub fn scan_grid(step: f64) -> Vec<f64> {
    (0..).map(|k| k as f64 * step).take_while(|a| *a < FRAC_PI_2).collect()
}

/// Locates a height whose trajectory exits at the corner edge.
///
/// Scans upward on a grid, takes the first S0 -> S1 change, and bisects
/// it down to `bracket_tol`.
pub fn find_critical_a(cfg: &ShootingConfig) -> Result<ShootingResult> {
    cfg.check()?;
    let grid = scan_grid(cfg.scan_step);
    let scan: Vec<ExitClass> = grid.par_iter().map(|&a| classify(a, cfg)).collect::<Result<Vec<_>>>()?;

    let transitions: Vec<Transition> = scan
        .windows(2)
        .filter(|w| w[0].class != w[1].class)
        .map(|w| Transition { a_lo: w[0].a, a_hi: w[1].a, from: w[0].class, to: w[1].class })
        .collect();

    let first = scan
        .windows(2)
        .find(|w| w[0].below_critical() == Some(true) && w[1].below_critical() == Some(false))
        .ok_or(Error::NoTransition)?;
    let (mut lo, mut hi) = (first[0], first[1]);

    let mut steps = 0;
    let mut boundary_hits = 0;
    let mut stopped_at = None;
    while hi.a - lo.a > cfg.bracket_tol {
        let mid = lo.a + 0.5 * (hi.a - lo.a);
        if mid <= lo.a || mid >= hi.a {
            break;
        }
        let c = classify(mid, cfg)?;
        steps += 1;
        if c.class == ShotClass::Boundary {
            boundary_hits += 1;
            if cfg.stop_on_boundary {
                stopped_at = Some(c);
                break;
            }
        }
        match c.below_critical() {
            Some(true) => lo = c,
            Some(false) => hi = c,
            None => {
                return Err(Error::BracketLost {
                    a: mid,
                    reason: format!("unresolved exit inside [{}, {}]", lo.a, hi.a),
                })
            }
        }
    }

    let mut star = match stopped_at {
        Some(c) => c,
        None => classify(lo.a + 0.5 * (hi.a - lo.a), cfg)?,
    };
    let mut polished = false;
    if cfg.polish && stopped_at.is_none() {
        let (g_lo, g_hi) = (lo.corner_offset(), hi.corner_offset());
        if g_lo > 0.0 && g_hi < 0.0 {
            let a = lo.a - g_lo * (hi.a - lo.a) / (g_hi - g_lo);
            if a > lo.a && a < hi.a {
                let c = classify(a, cfg)?;
                if c.corner_residual() < star.corner_residual() {
                    star = c;
                    polished = true;
                }
            }
        }
    }

    Ok(ShootingResult {
        params: cfg.params,
        a_lo: lo.a,
        a_hi: hi.a,
        a_star: star.a,
        t_star: star.report.t_exit,
        exit_point: star.report.p_exit,
        corner_residual: star.corner_residual(),
        y_exit: star.report.p_exit.y,
        exit_class: star.class,
        bisection_steps: steps,
        boundary_hits,
        polished,
        transitions,
    })
}

/// Lattice drift direction of a shift-periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "+z")]
    PlusZ,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "-y")]
    MinusY,
    #[serde(rename = "-z")]
    MinusZ,
}

impl Direction {
    pub fn from_shift(s: [i32; 3]) -> Option<Direction> {
        Some(match s {
            [1, 0, 0] => Direction::PlusX,
            [0, 1, 0] => Direction::PlusY,
            [0, 0, 1] => Direction::PlusZ,
            [-1, 0, 0] => Direction::MinusX,
            [0, -1, 0] => Direction::MinusY,
            [0, 0, -1] => Direction::MinusZ,
            _ => return None,
        })
    }
}

/// A solution with `X(t + period) = X(t) + 2π shift`, stored over one period
/// starting at `base_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub params: FlowParams<f64>,
    pub base_point: Point3<f64>,
    pub period: f64,
    pub shift: [i32; 3],
    pub direction: Direction,
    /// `|X(period) - X(0) - 2π shift|` measured when the orbit was built.
    pub residual: f64,
    /// Distance of the base point from its predicted position (x-directed orbit only).
    pub base_point_residual: f64,
    pub trajectory: Trajectory<f64>,
}

/// Serializable summary of a [`PeriodicOrbit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub params: FlowParams<f64>,
    pub base_point: Point3<f64>,
    pub period: f64,
    pub shift: [i32; 3],
    pub direction: Direction,
    pub residual: f64,
    pub base_point_residual: f64,
}

impl PeriodicOrbit {
    pub fn record(&self) -> OrbitRecord {
        OrbitRecord {
            params: self.params,
            base_point: self.base_point,
            period: self.period,
            shift: self.shift,
            direction: self.direction,
            residual: self.residual,
            base_point_residual: self.base_point_residual,
        }
    }

    /// Rebuilds the orbit from a record by integrating one period.
    pub fn from_record(rec: &OrbitRecord, cfg: &IntegratorConfig<f64>) -> Result<PeriodicOrbit> {
        let trajectory = integrate(&rec.params, rec.base_point, (0.0, rec.period), cfg)?;
        let residual = shift_residual(&trajectory, rec.shift);
        Ok(PeriodicOrbit {
            params: rec.params,
            base_point: rec.base_point,
            period: rec.period,
            shift: rec.shift,
            direction: rec.direction,
            residual,
            base_point_residual: rec.base_point_residual,
            trajectory,
        })
    }

    /// Half-period of the corner arc, `t̄ = period / 4`.
    pub fn t_bar(&self) -> f64 {
        self.period / 4.0
    }

    /// Position at time `t` for any real `t`, using the lattice periodicity
    /// to extend the stored period.
    pub fn position(&self, t: f64) -> Point3<f64> {
        let k = (t / self.period).floor();
        let tau = (t - k * self.period).clamp(0.0, self.period);
        let p = self.trajectory.eval(tau).expect("reduced time inside the period");
        let s = [self.shift[0] as f64, self.shift[1] as f64, self.shift[2] as f64];
        p + Point3::from(s) * (TAU * k)
    }

    /// Mean drift `2π shift / period`.
    pub fn rotation_vector(&self) -> Point3<f64> {
        let s = Point3::new(self.shift[0] as f64, self.shift[1] as f64, self.shift[2] as f64);
        s * (TAU / self.period)
    }
}

fn shift_residual(traj: &Trajectory<f64>, shift: [i32; 3]) -> f64 {
    let (_, p0) = traj.first();
    let (_, p1) = traj.last();
    (p1 - p0.lattice_shifted(shift)).norm()
}

/// Builds the x-directed orbit from a converged shooting result.
pub fn assemble_periodic_orbit(res: &ShootingResult, cfg: &ShootingConfig) -> Result<PeriodicOrbit> {
    if !(res.corner_residual <= cfg.max_corner_residual) {
        return Err(Error::CornerResidual { residual: res.corner_residual, tol: cfg.max_corner_residual });
    }
    let params = res.params;
    let t_bar = res.t_star;
    let base_point = flow_map(&params, start_point(res.a_star), (0.0, -t_bar), &cfg.integrator)?;
    let predicted = Point3::new(-PI, -res.y_exit, FRAC_PI_2);
    let base_point_residual = (base_point - predicted).norm();

    let period = 4.0 * t_bar;
    let trajectory = integrate(&params, base_point, (0.0, period), &cfg.integrator)?;
    let shift = [1, 0, 0];
    let residual = shift_residual(&trajectory, shift);
    if !(residual <= cfg.periodicity_tol) {
        return Err(Error::PeriodicityFailure { residual, tol: cfg.periodicity_tol });
    }
    Ok(PeriodicOrbit {
        params,
        base_point,
        period,
        shift,
        direction: Direction::PlusX,
        residual,
        base_point_residual,
        trajectory,
    })
}

/// Largest deviations from the two reflection identities along the orbit,
/// `X(-s) = S1(X(s))` and `X(t̄ + s) = S2(X(t̄ - s))`, over `n` values of
/// `s ∈ [0, t̄]`. Times are those of the shooting solution, which starts at
/// `(-π/2, 0, ā)` a quarter period after the base point.
pub fn reflection_defects(orbit: &PeriodicOrbit, n: usize) -> (f64, f64) {
    let tb = orbit.t_bar();
    let x = |t: f64| orbit.position(t + tb);
    let n = n.max(2);
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for i in 0..n {
        let s = tb * i as f64 / (n - 1) as f64;
        let r1 = x(-s) - apply_symmetry(SymmetryKind::ReflectX, &x(s));
        let r2 = x(tb + s) - apply_symmetry(SymmetryKind::ReflectCorner, &x(tb - s));
        d1 = d1.max(r1.norm());
        d2 = d2.max(r2.norm());
    }
    (d1, d2)
}

/// Integrates the orbit's base point over one period and returns the shift residual.
pub fn verify_orbit(orbit: &PeriodicOrbit, cfg: &IntegratorConfig<f64>) -> Result<f64> {
    let end = flow_map(&orbit.params, orbit.base_point, (0.0, orbit.period), cfg)?;
    Ok((end - orbit.base_point.lattice_shifted(orbit.shift)).norm())
}

fn conjugate(orbit: &PeriodicOrbit, kinds: &[SymmetryKind]) -> PeriodicOrbit {
    // composite map p -> L p + b, applied right to left
    let mut linear: Matrix3<f64> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut offset = Point3::zero();
    let mut reversing = false;
    for k in kinds.iter().rev() {
        let l = k.linear_part::<f64>();
        let b = apply_symmetry(*k, &Point3::zero());
        linear = mat_mul(&l, &linear);
        offset = crate::flow::mat_vec(&l, &offset) + b;
        reversing ^= k.time_reversing();
    }
    let s = Point3::new(orbit.shift[0] as f64, orbit.shift[1] as f64, orbit.shift[2] as f64);
    let ls = crate::flow::mat_vec(&linear, &s);
    let sign = if reversing { -1.0 } else { 1.0 };
    let shift = [(sign * ls.x) as i32, (sign * ls.y) as i32, (sign * ls.z) as i32];
    let trajectory = if reversing {
        // Y(t) = m(X(-t)) = L X(P - t) + b - 2π L s
        let off = offset - ls * TAU;
        orbit.trajectory.affine_image(&linear, off, Some(0.5 * orbit.period))
    } else {
        orbit.trajectory.affine_image(&linear, offset, None)
    };
    PeriodicOrbit {
        params: orbit.params,
        base_point: trajectory.first().1,
        period: orbit.period,
        shift,
        direction: Direction::from_shift(shift).expect("signed unit shift"),
        residual: orbit.residual,
        base_point_residual: orbit.base_point_residual,
        trajectory,
    }
}

fn mat_mul(a: &Matrix3<f64>, b: &Matrix3<f64>) -> Matrix3<f64> {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// The six orbits drifting along ±e1, ±e2, ±e3, in the order +x, +y, +z, -x, -y, -z.
///
/// Needs A = B = C for the cyclic images.
pub fn conjugate_orbits(orbit: &PeriodicOrbit) -> Result<Vec<PeriodicOrbit>> {
    if !SymmetryKind::Cyclic.supported_by(&orbit.params) {
        let p = orbit.params;
        return Err(Error::SymmetryUnavailable { map: "Cyclic".into(), a: p.a, b: p.b, c: p.c });
    }
    use SymmetryKind::*;
    let maps: [&[SymmetryKind]; 6] =
        [&[], &[Cyclic], &[CyclicSquared], &[ShiftReverse], &[ShiftReverse, Cyclic], &[ShiftReverse, CyclicSquared]];
    Ok(maps.iter().map(|m| conjugate(orbit, m)).collect())
}

/// Margins of the inequalities the shooting argument relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub a: f64,
    pub t_exit: f64,
    pub exit_face: ExitFace,
    pub max_y: f64,
    /// `π/4 - max y`, must be positive.
    pub y_margin: f64,
    /// `min (x + π/2 - z)` over `(0, t_exit]`, only for `a = 0`.
    pub xz_margin: Option<f64>,
    /// `min ż` over points strictly inside the prism.
    pub min_zdot_interior: f64,
    /// `min (ẋ + ẏ)` near the diagonal face.
    pub min_diag_speed: f64,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Measures the lemma margins along the trajectory from height `a` without
/// failing on violations.
pub fn lemma_margins(a: f64, cfg: &ShootingConfig) -> Result<LemmaReport> {
    cfg.check()?;
    let (traj, report) = shoot(a, cfg)?;
    let region = PrismRegion::default();
    let params = cfg.params;

    // samples plus segment midpoints
    let mut pts: Vec<(f64, Point3<f64>)> = Vec::with_capacity(2 * traj.len());
    for (i, seg) in traj.segments().iter().enumerate() {
        let (ta, pa) = traj.samples()[i];
        let (tb, _) = traj.samples()[i + 1];
        pts.push((ta, pa));
        let tm = 0.5 * (ta + tb);
        pts.push((tm, seg.eval(tm)));
    }
    pts.push(traj.last());

    let mut max_y = f64::NEG_INFINITY;
    let mut xz_margin = f64::INFINITY;
    let mut min_zdot = f64::INFINITY;
    let mut min_diag = f64::INFINITY;
    for (t, p) in &pts {
        max_y = max_y.max(p.y);
        let v = velocity(&params, p);
        if *t > 0.0 {
            xz_margin = xz_margin.min(p.x + FRAC_PI_2 - p.z);
            if region.contains(p) {
                min_zdot = min_zdot.min(v.z);
            }
        }
        if region.face(Face::FDiag).value(p) <= DIAG_BAND {
            min_diag = min_diag.min(v.x + v.y);
        }
    }

    let xz_margin = (a == 0.0).then_some(xz_margin);
    let mut violations = Vec::new();
    if !(max_y < FRAC_PI_4) {
        violations.push(format!("max y = {max_y} reaches π/4"));
    }
    if let Some(m) = xz_margin {
        if !(m > 0.0) {
            violations.push(format!("x + π/2 - z reaches {m}"));
        }
    }
    if !(min_zdot > 0.0) {
        violations.push(format!("ż = {min_zdot} inside the prism"));
    }
    if !(min_diag > 0.0) {
        violations.push(format!("ẋ + ẏ = {min_diag} near the diagonal face"));
    }
    Ok(LemmaReport {
        a,
        t_exit: report.t_exit,
        exit_face: report.face,
        max_y,
        y_margin: FRAC_PI_4 - max_y,
        xz_margin,
        min_zdot_interior: min_zdot,
        min_diag_speed: min_diag,
        violations,
    })
}

/// Like [`lemma_margins`], but any violated inequality is an error.
pub fn lemma_monitor(a: f64, cfg: &ShootingConfig) -> Result<LemmaReport> {
    let rep = lemma_margins(a, cfg)?;
    if let Some(v) = rep.violations.first() {
        return Err(Error::MonitorViolation { a, what: v.clone() });
    }
    Ok(rep)
}

/// One parameter triple of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: FlowParams<f64>,
    pub ok: bool,
    pub a_star: Option<f64>,
    pub t_star: Option<f64>,
    pub corner_residual: Option<f64>,
    pub error: Option<String>,
}

/// Cube of parameter triples `1 + i * step` for `|i * step| <= radius`,
/// ordered with C varying fastest.
pub fn cube_grid(radius: f64, step: f64) -> Vec<FlowParams<f64>> {
    let n = (radius / step).round() as i64;
    let vals: Vec<f64> = (-n..=n).map(|i| 1.0 + i as f64 * step).collect();
    let mut out = Vec::with_capacity(vals.len().pow(3));
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                out.push(FlowParams { a, b, c });
            }
        }
    }
    out
}

/// Runs [`find_critical_a`] for every triple. Failures are recorded per row.
pub fn parameter_sweep(grid: &[FlowParams<f64>], cfg: &ShootingConfig) -> Vec<SweepRow> {
    grid.par_iter()
        .map(|&params| match find_critical_a(&cfg.with_params(params)) {
            Ok(r) => SweepRow {
                params,
                ok: true,
                a_star: Some(r.a_star),
                t_star: Some(r.t_star),
                corner_residual: Some(r.corner_residual),
                error: None,
            },
            Err(e) => SweepRow {
                params,
                ok: false,
                a_star: None,
                t_star: None,
                corner_residual: None,
                error: Some(format!("{}: {e}", e.name())),
            },
        })
        .collect()
}

/// Largest `|Δ a_star|` between grid neighbours of a [`cube_grid`] sweep
/// with `n` values per axis. `None` if any row failed.
pub fn max_adjacent_jump(rows: &[SweepRow], n: usize) -> Option<f64> {
    if rows.len() != n * n * n {
        return None;
    }
    let a = |i: usize, j: usize, k: usize| rows[(i * n + j) * n + k].a_star;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let here = a(i, j, k)?;
                for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                    let (ii, jj, kk) = (i + di, j + dj, k + dk);
                    if ii < n && jj < n && kk < n {
                        worst = worst.max((a(ii, jj, kk)? - here).abs());
                    }
                }
            }
        }
    }
    Some(worst)
}
