//! Adaptive integration of the ABC flow with continuous (dense) output.
//!
//! [`integrate`] runs a Dormand–Prince 5(4) pair over a time span in either
//! direction. The result is a [`Trajectory`]: accepted step end points plus
//! one fourth-order interpolant per step. [`integrate_until_exit`] adds
//! event detection against the faces of a [`PrismRegion`](crate::flow::PrismRegion).
//! A fixed-step classical RK4 integrator lives in [`oracle`] as an
//! independent reference.

mod dopri;
mod events;
pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{mat_vec, FlowParams, Matrix3, Point3};
use crate::scalar::Real;

pub(crate) use dopri::{Step, Stepper};
pub(crate) use events::bisect_root;
pub use events::{integrate_until_exit, ExitFace, ExitOptions, ExitReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub h_init: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            h_init: T::lit(1e-3),
            h_max: T::lit(0.1),
            max_steps: 10_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    /// Same step controls, tolerances scaled so that `rel_tol = tol` and
    /// `abs_tol = tol / 100`.
    pub fn with_tol(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol / T::lit(100.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > T::zero()
            && self.abs_tol > T::zero()
            && self.h_init > T::zero()
            && self.h_max > T::zero()
            && self.h_init <= self.h_max
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad integrator settings {self:?}")))
        }
    }
}

/// Interpolant for one step: `y(θ) = c0 + θ(c1 + (1-θ)(c2 + θ(c3 + (1-θ)c4)))`
/// with `θ = (t - t_origin) / h`. `h` is negative for backward steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<T: Copy> {
    t_origin: T,
    h: T,
    coeffs: [Point3<T>; 5],
}

impl<T: Real> DenseSegment<T> {
    pub fn eval(&self, t: T) -> Point3<T> {
        let th = (t - self.t_origin) / self.h;
        let th1 = T::one() - th;
        let [c0, c1, c2, c3, c4] = self.coeffs;
        c0 + (c1 + (c2 + (c3 + c4 * th1) * th) * th1) * th
    }

    fn affine_image(&self, linear: &Matrix3<T>, offset: Point3<T>, reflect: Option<T>) -> Self {
        let mut coeffs = self.coeffs.map(|c| mat_vec(linear, &c));
        coeffs[0] += offset;
        match reflect {
            Some(c) => DenseSegment { t_origin: c + c - self.t_origin, h: -self.h, coeffs },
            None => DenseSegment { t_origin: self.t_origin, h: self.h, coeffs },
        }
    }
}

/// A solution curve with dense output over `[first sample, last sample]`.
///
/// Samples are stored in increasing time regardless of the integration
/// direction; `segments[i]` interpolates between `samples[i]` and `samples[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Copy> {
    params: FlowParams<T>,
    t0: T,
    samples: Vec<(T, Point3<T>)>,
    segments: Vec<DenseSegment<T>>,
}

impl<T: Real> Trajectory<T> {
    fn start(params: FlowParams<T>, t0: T, p0: Point3<T>) -> Self {
        Trajectory { params, t0, samples: vec![(t0, p0)], segments: Vec::new() }
    }

    /// Appends a step; steps must be pushed in integration order.
    pub(crate) fn push(&mut self, step: &Step<T>) {
        self.samples.push((step.t1, step.y1));
        self.segments.push(step.segment);
    }

    pub(crate) fn push_truncated(&mut self, step: &Step<T>, t: T, p: Point3<T>) {
        self.samples.push((t, p));
        self.segments.push(step.segment);
    }

    /// Restores increasing sample order after backward integration.
    fn finish(mut self) -> Self {
        if self.samples.len() > 1 && self.samples[0].0 > self.samples[1].0 {
            self.samples.reverse();
            self.segments.reverse();
        }
        self
    }

    pub fn params(&self) -> &FlowParams<T> {
        &self.params
    }

    /// Time the integration started from (the last sample for backward runs).
    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn samples(&self) -> &[(T, Point3<T>)] {
        &self.samples
    }

    pub fn segments(&self) -> &[DenseSegment<T>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_range(&self) -> (T, T) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn first(&self) -> (T, Point3<T>) {
        self.samples[0]
    }

    pub fn last(&self) -> (T, Point3<T>) {
        self.samples[self.samples.len() - 1]
    }

    /// Point at the integration end time (the far end from `t0`).
    pub fn end_point(&self) -> Point3<T> {
        if self.samples[0].0 == self.t0 {
            self.last().1
        } else {
            self.first().1
        }
    }

    fn out_of_range(&self, t: T) -> Error {
        let (lo, hi) = self.t_range();
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        Error::OutOfRange { t: f(t), lo: f(lo), hi: f(hi) }
    }

    fn locate(&self, t: T) -> Result<usize> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) || self.segments.is_empty() {
            return Err(self.out_of_range(t));
        }
        let idx = self.samples.partition_point(|s| s.0 <= t);
        Ok(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    fn eval_in(&self, idx: usize, t: T) -> Point3<T> {
        if t == self.samples[idx].0 {
            self.samples[idx].1
        } else if t == self.samples[idx + 1].0 {
            self.samples[idx + 1].1
        } else {
            self.segments[idx].eval(t)
        }
    }

    /// Continuous evaluation at `t`; sample times return the stored sample exactly.
    pub fn eval(&self, t: T) -> Result<Point3<T>> {
        if self.segments.is_empty() && t == self.samples[0].0 {
            return Ok(self.samples[0].1);
        }
        let idx = self.locate(t)?;
        Ok(self.eval_in(idx, t))
    }

    /// A cursor for evaluating at (mostly) monotone times without re-searching.
    pub fn cursor(&self) -> DenseCursor<'_, T> {
        DenseCursor { traj: self, idx: 0, searches: 0 }
    }

    /// `n` equally spaced samples over the covered interval (`n >= 2`).
    pub fn resample(&self, n: usize) -> Vec<(T, Point3<T>)> {
        let n = n.max(2);
        let (lo, hi) = self.t_range();
        let mut cur = self.cursor();
        (0..n)
            .map(|i| {
                let t = if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap()
                };
                (t, cur.eval(t).expect("inside range"))
            })
            .collect()
    }

    /// The image `t' -> L X(t) + offset`, with time optionally reflected
    /// about `c` (`t' = 2c - t`).
    pub fn affine_image(&self, linear: &Matrix3<T>, offset: Point3<T>, reflect: Option<T>) -> Self {
        let map = |p: &Point3<T>| mat_vec(linear, p) + offset;
        let mut samples: Vec<_> = self.samples.iter().map(|(t, p)| (*t, map(p))).collect();
        let mut segments: Vec<_> = self.segments.iter().map(|s| s.affine_image(linear, offset, reflect)).collect();
        let mut t0 = self.t0;
        if let Some(c) = reflect {
            for s in samples.iter_mut() {
                s.0 = c + c - s.0;
            }
            samples.reverse();
            segments.reverse();
            t0 = c + c - t0;
        }
        Trajectory { params: self.params, t0, samples, segments }
    }
}

/// Streaming evaluator that remembers the last segment used.
pub struct DenseCursor<'a, T: Copy> {
    traj: &'a Trajectory<T>,
    idx: usize,
    searches: usize,
}

impl<'a, T: Real> DenseCursor<'a, T> {
    pub fn eval(&mut self, t: T) -> Result<Point3<T>> {
        let tr = self.traj;
        if tr.segments.is_empty() {
            return tr.eval(t);
        }
        let fits = |i: usize| tr.samples[i].0 <= t && t <= tr.samples[i + 1].0;
        if !fits(self.idx) {
            if self.idx + 1 < tr.segments.len() && fits(self.idx + 1) {
                self.idx += 1;
            } else {
                self.searches += 1;
                self.idx = tr.locate(t)?;
            }
        }
        Ok(tr.eval_in(self.idx, t))
    }

    /// Number of binary searches performed so far.
    pub fn searches(&self) -> usize {
        self.searches
    }
}

/// Integrates from `p0` at `t_span.0` to `t_span.1` (forward or backward).
pub fn integrate<T: Real>(
    params: &FlowParams<T>,
    p0: Point3<T>,
    t_span: (T, T),
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let (ta, tb) = t_span;
    if !(ta.is_finite() && tb.is_finite()) || ta == tb {
        return Err(Error::InvalidConfig("time span must be finite and nondegenerate".into()));
    }
    if !p0.is_finite() {
        return Err(Error::InvalidStart("start point must be finite".into()));
    }
    let mut stepper = Stepper::new(params, cfg, ta, p0, tb - ta);
    let mut traj = Trajectory::start(*params, ta, p0);
    while stepper.time() != tb {
        let step = stepper.step(tb)?;
        traj.push(&step);
    }
    Ok(traj.finish())
}

/// Endpoint of [`integrate`] without keeping the trajectory.
pub fn flow_map<T: Real>(
    params: &FlowParams<T>,
    p0: Point3<T>,
    t_span: (T, T),
    cfg: &IntegratorConfig<T>,
) -> Result<Point3<T>> {
    cfg.validate()?;
    let (ta, tb) = t_span;
    if ta == tb {
        return Ok(p0);
    }
    let mut stepper = Stepper::new(params, cfg, ta, p0, tb - ta);
    while stepper.time() != tb {
        stepper.step(tb)?;
    }
    Ok(stepper.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{apply_symmetry, SymmetryKind};
    use std::f64::consts::FRAC_PI_2;

    fn unit() -> FlowParams<f64> {
        FlowParams::default()
    }

    #[test]
    fn round_trip_returns_to_start() {
        let cfg = IntegratorConfig::default();
        let fwd = integrate(&unit(), Point3::zero(), (0.0, 1.0), &cfg).unwrap();
        let back = integrate(&unit(), fwd.end_point(), (1.0, 0.0), &cfg).unwrap();
        assert!(back.end_point().norm() < 1e-8);
    }

    #[test]
    fn backward_trajectory_is_stored_increasing() {
        let cfg = IntegratorConfig::default();
        let p0 = Point3::new(0.3, -0.1, 1.0);
        let tr = integrate(&unit(), p0, (0.0, -2.0), &cfg).unwrap();
        assert!(tr.samples().windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(tr.t_range(), (-2.0, 0.0));
        assert_eq!(tr.last().1, p0);
        assert_eq!(tr.t0(), 0.0);
        let mid = tr.eval(-1.0).unwrap();
        let direct = flow_map(&unit(), p0, (0.0, -1.0), &cfg).unwrap();
        assert!((mid - direct).norm() < 1e-8);
    }

    #[test]
    fn z_rises_from_the_shooting_start() {
        let p0 = Point3::new(-FRAC_PI_2, 0.0, 0.0);
        assert!(crate::flow::velocity(&unit(), &p0).z.abs() < 1e-15);
        let tr = integrate(&unit(), p0, (0.0, 0.05), &IntegratorConfig::default()).unwrap();
        for (t, p) in tr.samples().iter().skip(1) {
            assert!(p.z > 0.0, "z({t}) = {}", p.z);
        }
    }

    #[test]
    fn dense_eval_reproduces_samples() {
        let tr = integrate(&unit(), Point3::new(1.0, 2.0, 3.0), (0.0, 5.0), &IntegratorConfig::default()).unwrap();
        for (i, seg) in tr.segments().iter().enumerate() {
            let (ta, pa) = tr.samples()[i];
            let (tb, pb) = tr.samples()[i + 1];
            assert!((seg.eval(ta) - pa).max_abs() <= 1e-12);
            assert!((seg.eval(tb) - pb).max_abs() <= 1e-12);
        }
        assert_eq!(tr.eval(tr.samples()[3].0).unwrap(), tr.samples()[3].1);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let tr = integrate(&unit(), Point3::zero(), (0.0, 1.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.eval(1.5).unwrap_err().name(), "OutOfRange");
        assert_eq!(tr.eval(-1e-9).unwrap_err().name(), "OutOfRange");
    }

    #[test]
    fn monotone_cursor_does_not_search() {
        let tr = integrate(&unit(), Point3::zero(), (0.0, 20.0), &IntegratorConfig::default()).unwrap();
        let mut cur = tr.cursor();
        let mut t = 0.0;
        while t <= 20.0 {
            cur.eval(t).unwrap();
            t += 0.01;
        }
        assert_eq!(cur.searches(), 0);
        cur.eval(0.5).unwrap();
        assert_eq!(cur.searches(), 1);
    }

    #[test]
    fn step_limit_is_reported() {
        let cfg = IntegratorConfig { max_steps: 5, ..IntegratorConfig::default() };
        let err = integrate(&unit(), Point3::zero(), (0.0, 10.0), &cfg).unwrap_err();
        assert_eq!(err.name(), "StepLimitExceeded");
    }

    #[test]
    fn degenerate_span_and_bad_config_are_rejected() {
        let cfg = IntegratorConfig::default();
        assert!(integrate(&unit(), Point3::zero(), (1.0, 1.0), &cfg).is_err());
        let bad = IntegratorConfig { h_init: 1.0, h_max: 0.1, ..cfg };
        assert!(integrate(&unit(), Point3::zero(), (0.0, 1.0), &bad).is_err());
    }

    #[test]
    fn tighter_tolerance_never_worsens_round_trip() {
        let p0 = Point3::new(0.7, -0.4, 2.0);
        let mut prev = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
            let cfg = IntegratorConfig::default().with_tol(tol);
            let end = flow_map(&unit(), p0, (0.0, 10.0), &cfg).unwrap();
            let back = flow_map(&unit(), end, (10.0, 0.0), &cfg).unwrap();
            let err = (back - p0).norm();
            assert!(err <= prev.max(1e-13), "tol {tol}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn shift_reverse_undoes_forward_flow() {
        // S3(X(T)) flowed forward by T, mapped by S3 again, is p0 shifted by -2π(1,1,1)
        let cfg = IntegratorConfig::default();
        let p0 = Point3::new(0.2, 1.1, -0.6);
        let t = 3.0;
        let a = flow_map(&unit(), p0, (0.0, t), &cfg).unwrap();
        let b = flow_map(&unit(), apply_symmetry(SymmetryKind::ShiftReverse, &a), (0.0, t), &cfg).unwrap();
        let c = apply_symmetry(SymmetryKind::ShiftReverse, &b).lattice_shifted([1, 1, 1]);
        assert!((c - p0).norm() < 1e-7);
    }

    #[test]
    fn affine_image_with_time_reflection() {
        let cfg = IntegratorConfig::default();
        let tr = integrate(&unit(), Point3::new(0.1, 0.2, 0.3), (0.0, 2.0), &cfg).unwrap();
        let lin = SymmetryKind::ShiftReverse.linear_part();
        let off = apply_symmetry(SymmetryKind::ShiftReverse, &Point3::zero());
        let img = tr.affine_image(&lin, off, Some(1.0));
        assert_eq!(img.t_range(), (0.0, 2.0));
        for t in [0.0, 0.37, 1.0, 1.999] {
            let want = apply_symmetry(SymmetryKind::ShiftReverse, &tr.eval(2.0 - t).unwrap());
            assert!((img.eval(t).unwrap() - want).max_abs() < 1e-13);
        }
    }
}
