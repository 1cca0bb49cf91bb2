use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Face, FlowParams, Point3, PrismRegion};
use crate::scalar::Real;

use super::{IntegratorConfig, Stepper, Trajectory};

/// Where a trajectory left the prism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExitFace {
    #[serde(rename = "FX")]
    Fx,
    #[serde(rename = "FDIAG")]
    FDiag,
    #[serde(rename = "FANTI")]
    FAnti,
    #[serde(rename = "FZ0")]
    FZ0,
    #[serde(rename = "FZTOP")]
    FZTop,
    /// Both x = 0 and z = π/2 within the corner tolerance.
    #[serde(rename = "CORNER_XZTOP")]
    CornerXZTop,
}

impl From<Face> for ExitFace {
    fn from(f: Face) -> Self {
        match f {
            Face::Fx => ExitFace::Fx,
            Face::FDiag => ExitFace::FDiag,
            Face::FAnti => ExitFace::FAnti,
            Face::FZ0 => ExitFace::FZ0,
            Face::FZTop => ExitFace::FZTop,
        }
    }
}

/// Event detection knobs for [`integrate_until_exit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExitOptions<T> {
    /// Give up (with `NoExit`) after this much time.
    pub horizon: T,
    /// Both corner face values at or below this classify the exit as the corner.
    pub corner_tol: T,
    /// A face containing the start point is ignored until its value exceeds this.
    pub grace: T,
    /// Target bound on the crossed face value at the reported exit.
    pub face_tol: T,
    /// Bisection stops once the time bracket is this narrow.
    pub time_width: T,
    /// Start points within this of a face are treated as lying on it.
    pub on_face_tol: T,
    /// Exits with smaller outward speed are flagged non-transversal.
    pub transversal_min: T,
}

impl<T: Real> Default for ExitOptions<T> {
    fn default() -> Self {
        ExitOptions {
            horizon: T::lit(1e3),
            corner_tol: T::lit(1e-8),
            grace: T::lit(1e-9),
            face_tol: T::lit(1e-11),
            time_width: T::lit(1e-13),
            on_face_tol: T::lit(1e-12),
            transversal_min: T::lit(1e-9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitReport<T: Copy> {
    pub face: ExitFace,
    /// The face whose value changed sign first; differs from `face` only at the corner.
    pub crossed_face: Face,
    pub t_exit: T,
    pub p_exit: Point3<T>,
    /// Rate at which the crossed face value decreases at the exit.
    pub outward_speed: T,
    pub transversal: bool,
}

/// Bisects a sign change of `f` on `[lo, hi]` (with `f(lo) >= 0 > f(hi)` or
/// the reverse) down to `width`. Returns the final bracket.
pub(crate) fn bisect_root<T: Real>(mut f: impl FnMut(T) -> T, mut lo: T, mut hi: T, width: T) -> (T, T) {
    let lo_sign = f(lo) >= T::zero();
    for _ in 0..200 {
        if (hi - lo).abs() <= width {
            break;
        }
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) >= T::zero()) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Integrates forward from `p0` until the trajectory first leaves `region`.
///
/// Faces that contain `p0` with inward or tangential velocity are ignored
/// until their value first exceeds `opts.grace`. The returned trajectory
/// ends exactly at the exit time.
pub fn integrate_until_exit<T: Real>(
    params: &FlowParams<T>,
    p0: Point3<T>,
    region: &PrismRegion<T>,
    cfg: &IntegratorConfig<T>,
    opts: &ExitOptions<T>,
) -> Result<(Trajectory<T>, ExitReport<T>)> {
    cfg.validate()?;
    if !p0.is_finite() {
        return Err(Error::InvalidStart("start point must be finite".into()));
    }
    let mut in_grace = [false; 5];
    for (i, face) in region.faces.iter().enumerate() {
        let v = face.value(&p0);
        if v < -opts.on_face_tol {
            return Err(Error::InvalidStart(format!("{p0:?} lies outside face {:?}", face.face)));
        }
        if v <= opts.on_face_tol {
            if face.rate(params, &p0) < -opts.on_face_tol {
                return Err(Error::InvalidStart(format!("{p0:?} leaves immediately through face {:?}", face.face)));
            }
            in_grace[i] = true;
        }
    }

    let t_limit = opts.horizon;
    let mut stepper = Stepper::new(params, cfg, T::zero(), p0, T::one());
    let mut traj = Trajectory::start(*params, T::zero(), p0);
    loop {
        if stepper.time() >= t_limit {
            return Err(Error::NoExit { horizon: t_limit.to_f64().unwrap_or(f64::NAN) });
        }
        let step = stepper.step(t_limit)?;
        let values = region.face_values(&step.y1);

        let mut crossing: Option<(T, usize)> = None;
        for (i, face) in region.faces.iter().enumerate() {
            let v = values[i];
            let crossed = if in_grace[i] {
                if v > opts.grace {
                    in_grace[i] = false;
                }
                v < -opts.grace
            } else {
                v < T::zero()
            };
            if !crossed {
                continue;
            }
            let g = |t: T| face.value(&step.segment.eval(t));
            let t_hit = if g(step.t0) < T::zero() {
                step.t0
            } else {
                let (_, hi) = bisect_root(g, step.t0, step.t1, opts.time_width);
                // one Newton correction on the face value
                let p = step.segment.eval(hi);
                let rate = face.rate(params, &p);
                let gh = face.value(&p);
                let cand = hi - gh / rate;
                if rate != T::zero() && cand >= step.t0 && cand <= step.t1 && g(cand).abs() <= gh.abs() {
                    cand
                } else {
                    hi
                }
            };
            if crossing.is_none_or(|(t, _)| t_hit < t) {
                crossing = Some((t_hit, i));
            }
        }

        let Some((t_exit, idx)) = crossing else {
            traj.push(&step);
            continue;
        };
        let p_exit = step.segment.eval(t_exit);
        let face = region.faces[idx];
        let outward_speed = -face.rate(params, &p_exit);
        let corner = matches!(face.face, Face::Fx | Face::FZTop)
            && region.face(Face::Fx).value(&p_exit).abs() <= opts.corner_tol
            && region.face(Face::FZTop).value(&p_exit).abs() <= opts.corner_tol;
        let report = ExitReport {
            face: if corner { ExitFace::CornerXZTop } else { face.face.into() },
            crossed_face: face.face,
            t_exit,
            p_exit,
            outward_speed,
            transversal: outward_speed >= opts.transversal_min,
        };
        if t_exit > step.t0 {
            traj.push_truncated(&step, t_exit, p_exit);
        }
        return Ok((traj, report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::oracle::rk4_samples;
    use std::f64::consts::FRAC_PI_2;

    fn run(a: f64) -> (Trajectory<f64>, ExitReport<f64>) {
        integrate_until_exit(
            &FlowParams::default(),
            Point3::new(-FRAC_PI_2, 0.0, a),
            &PrismRegion::default(),
            &IntegratorConfig::default(),
            &ExitOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_height_exits_through_x_face() {
        let (traj, rep) = run(0.0);
        assert_eq!(rep.face, ExitFace::Fx);
        assert!(rep.p_exit.x.abs() <= 1e-11);
        assert!(rep.outward_speed > 0.0 && rep.transversal);
        assert_eq!(traj.last(), (rep.t_exit, rep.p_exit));
    }

    #[test]
    fn exits_only_through_allowed_faces() {
        for k in 0..16 {
            let a = k as f64 * FRAC_PI_2 / 16.0;
            let (_, rep) = run(a);
            assert!(
                matches!(rep.face, ExitFace::Fx | ExitFace::FZTop | ExitFace::CornerXZTop),
                "a = {a}: {:?}",
                rep.face
            );
        }
    }

    #[test]
    fn near_top_height_exits_through_top_face() {
        let (_, rep) = run(1.55);
        assert_eq!(rep.face, ExitFace::FZTop);
        // the RK4 oracle agrees on which face is reached first
        let region = PrismRegion::default();
        let samples =
            rk4_samples(&FlowParams::default(), Point3::new(-FRAC_PI_2, 0.0, 1.55), (0.0, rep.t_exit + 0.01), 1e-4);
        let first_out =
            samples.iter().skip(1).find(|(_, p)| !region.contains(p)).map(|(_, p)| region.face_values(p)).unwrap();
        assert!(first_out[Face::FZTop.index()] < 0.0);
        assert!(first_out[Face::Fx.index()] > 0.0);
    }

    #[test]
    fn exit_localization_is_tight() {
        let region = PrismRegion::default();
        let opts = ExitOptions::<f64>::default();
        for a in [0.0, 0.3, 0.9, 1.55] {
            let (traj, rep) = run(a);
            let face = region.face(rep.crossed_face);
            assert!(face.value(&rep.p_exit).abs() <= 1e-11);
            let before = traj.eval(rep.t_exit - 10.0 * opts.time_width).unwrap();
            assert!(face.value(&before) > 0.0);
        }
    }

    #[test]
    fn start_outside_is_rejected() {
        let err = integrate_until_exit(
            &FlowParams::default(),
            Point3::new(0.5, 0.0, 0.3),
            &PrismRegion::default(),
            &IntegratorConfig::default(),
            &ExitOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.name(), "InvalidStart");
    }

    #[test]
    fn short_horizon_reports_no_exit() {
        let opts = ExitOptions { horizon: 0.01, ..ExitOptions::default() };
        let err = integrate_until_exit(
            &FlowParams::default(),
            Point3::new(-FRAC_PI_2, 0.0, 0.2),
            &PrismRegion::default(),
            &IntegratorConfig::default(),
            &opts,
        )
        .unwrap_err();
        assert_eq!(err.name(), "NoExit");
    }

    #[test]
    fn report_serializes_with_face_names() {
        let (_, rep) = run(0.0);
        let v = serde_json::to_value(rep).unwrap();
        assert_eq!(v["face"], "FX");
        assert_eq!(v["p_exit"].as_array().unwrap().len(), 3);
        assert!(v["t_exit"].is_f64() && v["outward_speed"].is_f64());
    }
}
