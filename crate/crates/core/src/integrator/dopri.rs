//! Dormand–Prince 5(4) stepping with the free fourth-order dense interpolant.

use crate::error::{Error, Result};
use crate::flow::{velocity, FlowParams, Point3};
use crate::scalar::Real;

use super::{DenseSegment, IntegratorConfig};

#[cfg(test)]
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

// fifth-order minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const H_FLOOR: f64 = 1e-14;

/// One accepted step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step<T: Copy> {
    pub t0: T,
    pub t1: T,
    pub y0: Point3<T>,
    pub y1: Point3<T>,
    pub segment: DenseSegment<T>,
}

/// Adaptive stepper over the ABC field. Steps in the sign of `dir`.
pub(crate) struct Stepper<'a, T: Real> {
    params: &'a FlowParams<T>,
    cfg: &'a IntegratorConfig<T>,
    t: T,
    y: Point3<T>,
    k1: Point3<T>,
    h: T,
    dir: T,
    attempts: usize,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(params: &'a FlowParams<T>, cfg: &'a IntegratorConfig<T>, t0: T, y0: Point3<T>, dir: T) -> Self {
        Stepper {
            params,
            cfg,
            t: t0,
            y: y0,
            k1: velocity(params, &y0),
            h: cfg.h_init.min(cfg.h_max),
            dir: dir.signum(),
            attempts: 0,
        }
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn state(&self) -> Point3<T> {
        self.y
    }

    /// Takes one accepted step, never passing `t_end` (in the stepping direction).
    pub fn step(&mut self, t_end: T) -> Result<Step<T>> {
        let mut rejected = false;
        loop {
            if self.attempts >= self.cfg.max_steps {
                return Err(Error::StepLimitExceeded {
                    t: self.t.to_f64().unwrap_or(f64::NAN),
                    max_steps: self.cfg.max_steps,
                });
            }
            self.attempts += 1;

            let remaining = (t_end - self.t) * self.dir;
            let mut h_mag = self.h.min(self.cfg.h_max);
            let landing = h_mag * T::lit(1.01) >= remaining;
            if landing {
                h_mag = remaining;
            }
            let h = h_mag * self.dir;

            let (y1, k7, err, k) = self.attempt(h);
            if err <= T::one() {
                let t1 = if landing { t_end } else { self.t + h };
                let segment = dense_segment(self.t, h, &self.y, &y1, &k, &k7);
                let step = Step { t0: self.t, t1, y0: self.y, y1, segment };

                let mut fac = T::lit(SAFETY) * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
                fac = fac.max(T::lit(FAC_MIN)).min(T::lit(FAC_MAX));
                if rejected {
                    fac = fac.min(T::one());
                }
                // keep the nominal step when landing shortened it
                let base = if landing { self.h.max(h_mag) } else { h_mag };
                self.h = (base * fac).min(self.cfg.h_max);

                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                return Ok(step);
            }

            rejected = true;
            let fac = (T::lit(SAFETY) * err.powf(T::lit(-0.2))).max(T::lit(FAC_MIN));
            self.h = h_mag * fac.min(T::one());
            if self.h < T::lit(H_FLOOR) || !self.h.is_finite() {
                return Err(Error::StepUnderflow {
                    t: self.t.to_f64().unwrap_or(f64::NAN),
                    h: self.h.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    fn attempt(&self, h: T) -> (Point3<T>, Point3<T>, T, [Point3<T>; 6]) {
        let mut k = [Point3::zero(); 6];
        k[0] = self.k1;
        for s in 1..6 {
            let mut acc = Point3::zero();
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += *kj * T::lit(A[s][j]);
            }
            k[s] = velocity(self.params, &(self.y + acc * h));
        }
        let mut incr = Point3::zero();
        for (j, kj) in k.iter().enumerate() {
            incr += *kj * T::lit(A[6][j]);
        }
        let y1 = self.y + incr * h;
        let k7 = velocity(self.params, &y1);

        let mut e = k7 * T::lit(E[6]);
        for (j, kj) in k.iter().enumerate() {
            e += *kj * T::lit(E[j]);
        }
        let e = e * h;

        let mut sum = T::zero();
        for i in 0..3 {
            let sk = self.cfg.abs_tol + self.cfg.rel_tol * self.y[i].abs().max(y1[i].abs());
            sum = sum + (e[i] / sk).powi(2);
        }
        let err = (sum / T::lit(3.0)).sqrt();
        (y1, k7, if err.is_finite() { err } else { T::infinity() }, k)
    }
}

fn dense_segment<T: Real>(
    t0: T,
    h: T,
    y0: &Point3<T>,
    y1: &Point3<T>,
    k: &[Point3<T>; 6],
    k7: &Point3<T>,
) -> DenseSegment<T> {
    let ydiff = *y1 - *y0;
    let bspl = k[0] * h - ydiff;
    let c3 = ydiff - *k7 * h - bspl;
    let mut d = *k7 * T::lit(D[6]);
    for (j, kj) in k.iter().enumerate() {
        d += *kj * T::lit(D[j]);
    }
    DenseSegment { t_origin: t0, h, coeffs: [*y0, ydiff, bspl, c3, d * h] }
}
