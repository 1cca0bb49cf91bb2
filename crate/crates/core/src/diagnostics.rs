//! Drift statistics along trajectories and Poincaré sections.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{velocity, wrap_angle, FlowParams, Point3};
use crate::integrator::{bisect_root, integrate, IntegratorConfig, Stepper};
use crate::shooting::PeriodicOrbit;

/// Number of windowed estimates used for `tail_variation`.
const TAIL_WINDOWS: usize = 32;

/// Crossings located this close to `t = 0` are the seed itself.
const START_SKIP: f64 = 1e-9;

/// Finite-time mean drift `(X(T) - X(0)) / T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub p0: Point3<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub rho: Point3<f64>,
    /// Largest deviation of `(X(s) - X(0)) / s` from `rho` for `s` in `[T/2, T]`.
    pub tail_variation: f64,
}

pub fn rotation_vector(
    params: &FlowParams<f64>,
    p0: Point3<f64>,
    t: f64,
    cfg: &IntegratorConfig<f64>,
) -> Result<RotationEstimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("averaging time must be positive, got {t}")));
    }
    let traj = integrate(params, p0, (0.0, t), cfg)?;
    let rho = (traj.last().1 - p0) * (1.0 / t);
    let mut cur = traj.cursor();
    let mut tail = 0.0f64;
    for i in 0..=TAIL_WINDOWS {
        let s = 0.5 * t * (1.0 + i as f64 / TAIL_WINDOWS as f64);
        let est = (cur.eval(s.min(t))? - p0) * (1.0 / s);
        tail = tail.max((est - rho).norm());
    }
    Ok(RotationEstimate { p0, t, rho, tail_variation: tail })
}

/// Best drift in direction `p` over the given shift-periodic orbits,
/// `max_i p . rho_i`.
///
/// With the six orbits along ±e1, ±e2, ±e3 this equals
/// `(2π / period) max_i |p_i|`, which is at least `(2π / period) / √3`.
pub fn flame_speed_lower_bound(orbits: &[PeriodicOrbit], p: Point3<f64>) -> Result<f64> {
    if orbits.is_empty() {
        return Err(Error::InvalidConfig("no orbits given".into()));
    }
    if !((p.norm() - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidConfig(format!("direction must be a unit vector, |p| = {}", p.norm())));
    }
    Ok(orbits.iter().map(|o| o.rotation_vector().dot(&p)).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    /// Coordinates reported in the section, in increasing index order.
    pub fn others(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Coordinate increasing through the plane.
    Positive,
    Negative,
    Both,
}

/// The planes `coord = level + 2πk`, with the crossing orientation to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub axis: Axis,
    pub level: f64,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub seed_index: usize,
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed_index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionPlot {
    pub section: SectionSpec,
    pub seeds: Vec<Point3<f64>>,
    pub t_max: f64,
    /// Sorted by seed index, then time.
    pub points: Vec<SectionPoint>,
    pub failures: Vec<SeedFailure>,
}

/// `n x n` seeds on the section plane, cell-centred in `[0, 2π)^2`.
pub fn seed_grid(n: usize, spec: &SectionSpec) -> Vec<Point3<f64>> {
    let (iu, iv) = spec.axis.others();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut c = [0.0; 3];
            c[spec.axis.index()] = spec.level;
            c[iu] = TAU * (i as f64 + 0.5) / n as f64;
            c[iv] = TAU * (j as f64 + 0.5) / n as f64;
            out.push(Point3::from(c));
        }
    }
    out
}

fn section_crossings(
    params: &FlowParams<f64>,
    seed_index: usize,
    seed: Point3<f64>,
    spec: &SectionSpec,
    t_max: f64,
    cfg: &IntegratorConfig<f64>,
) -> Result<Vec<SectionPoint>> {
    let k = spec.axis.index();
    let (iu, iv) = spec.axis.others();
    let sheet = |p: &Point3<f64>| ((p[k] - spec.level) / TAU).floor() as i64;
    let keep_up = spec.orientation != Orientation::Negative;
    let keep_down = spec.orientation != Orientation::Positive;

    let mut out = Vec::new();
    let mut stepper = Stepper::new(params, cfg, 0.0, seed, 1.0);
    while stepper.time() < t_max {
        let step = stepper.step(t_max)?;
        let (n0, n1) = (sheet(&step.y0), sheet(&step.y1));
        if n0 == n1 {
            continue;
        }
        let levels: Vec<i64> = if n1 > n0 {
            if !keep_up {
                continue;
            }
            (n0 + 1..=n1).collect()
        } else {
            if !keep_down {
                continue;
            }
            (n1 + 1..=n0).rev().collect()
        };
        for m in levels {
            let target = spec.level + TAU * m as f64;
            let g = |t: f64| step.segment.eval(t)[k] - target;
            let (lo, hi) = bisect_root(g, step.t0, step.t1, 1e-13);
            let mut t = 0.5 * (lo + hi);
            let rate = velocity(params, &step.segment.eval(t))[k];
            if rate != 0.0 {
                let cand = t - g(t) / rate;
                if cand >= step.t0 && cand <= step.t1 && g(cand).abs() <= g(t).abs() {
                    t = cand;
                }
            }
            if t <= START_SKIP {
                continue;
            }
            let p = step.segment.eval(t);
            out.push(SectionPoint { seed_index, t, u: wrap_angle(p[iu]), v: wrap_angle(p[iv]) });
        }
    }
    Ok(out)
}

/// Records the oriented crossings of the section by each seed's trajectory
/// over `[0, t_max]`. Per-seed failures are recorded, not fatal.
pub fn poincare_section(
    params: &FlowParams<f64>,
    spec: &SectionSpec,
    seeds: &[Point3<f64>],
    t_max: f64,
    cfg: &IntegratorConfig<f64>,
) -> Result<SectionPlot> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("no seeds given".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_max must be positive, got {t_max}")));
    }
    cfg.validate()?;
    let per_seed: Vec<Result<Vec<SectionPoint>>> =
        seeds.par_iter().enumerate().map(|(i, s)| section_crossings(params, i, *s, spec, t_max, cfg)).collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in per_seed.into_iter().enumerate() {
        match r {
            Ok(p) => points.extend(p),
            Err(e) => failures.push(SeedFailure { seed_index: i, error: format!("{}: {e}", e.name()) }),
        }
    }
    Ok(SectionPlot { section: *spec, seeds: seeds.to_vec(), t_max, points, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rotation_rejects_nonpositive_time() {
        let err = rotation_vector(&FlowParams::default(), Point3::zero(), 0.0, &IntegratorConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn rotation_is_bounded_by_speed() {
        let params = FlowParams::default();
        let est = rotation_vector(&params, Point3::new(0.3, 2.0, -1.0), 50.0, &IntegratorConfig::default()).unwrap();
        assert!(est.rho.max_abs() <= params.speed_bound());
        assert!(est.tail_variation.is_finite());
    }

    #[test]
    fn section_points_lie_on_the_plane() {
        let spec = SectionSpec { axis: Axis::Z, level: 0.0, orientation: Orientation::Both };
        let params = FlowParams::default();
        let seeds = seed_grid(2, &spec);
        let cfg = IntegratorConfig::default();
        let plot = poincare_section(&params, &spec, &seeds, 40.0, &cfg).unwrap();
        assert!(!plot.points.is_empty());
        assert!(plot.failures.is_empty());
        for pt in plot.points.iter().filter(|p| p.seed_index == 0) {
            let traj = integrate(&params, seeds[0], (0.0, 40.0), &cfg).unwrap();
            let z = traj.eval(pt.t).unwrap().z;
            let off = z - TAU * (z / TAU).round();
            assert!(off.abs() < 1e-9, "z = {z}");
            assert!((0.0..TAU).contains(&pt.u) && (0.0..TAU).contains(&pt.v));
        }
        assert!(plot.points.windows(2).all(|w| { (w[0].seed_index, w[0].t) < (w[1].seed_index, w[1].t) }));
    }

    #[test]
    fn orientation_filters_crossings() {
        let params = FlowParams::default();
        let cfg = IntegratorConfig::default();
        let seeds = [Point3::new(0.5, 1.0, 0.2)];
        let run = |orientation| {
            let spec = SectionSpec { axis: Axis::Y, level: 1.0, orientation };
            poincare_section(&params, &spec, &seeds, 60.0, &cfg).unwrap().points.len()
        };
        assert_eq!(run(Orientation::Positive) + run(Orientation::Negative), run(Orientation::Both));
    }

    #[test]
    fn seeds_on_the_plane_are_not_crossings() {
        let spec = SectionSpec { axis: Axis::X, level: FRAC_PI_2, orientation: Orientation::Both };
        let seeds = seed_grid(2, &spec);
        let plot = poincare_section(&FlowParams::default(), &spec, &seeds, 50.0, &IntegratorConfig::default()).unwrap();
        assert!(plot.points.iter().all(|p| p.t > 1e-3), "{:?}", plot.points.first());
    }

    #[test]
    fn seed_grid_lies_on_plane() {
        let spec = SectionSpec { axis: Axis::X, level: 0.7, orientation: Orientation::Positive };
        let seeds = seed_grid(3, &spec);
        assert_eq!(seeds.len(), 9);
        assert!(seeds.iter().all(|s| s.x == 0.7));
    }
}
