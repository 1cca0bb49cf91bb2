//! The ABC vector field, its symmetries, and the prism region used for shooting.
//!
//! The field is
//!
//! ```text
//! u(x, y, z) = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)
//! ```
//!
//! Coordinates are radians and are never wrapped here; the field is
//! 2π-periodic in each coordinate.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Amplitudes (A, B, C) of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "C")]
    pub c: T,
}

impl<T: Real> FlowParams<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidConfig("flow amplitudes must be finite".into()));
        }
        Ok(FlowParams { a, b, c })
    }

    /// True when A = B = C, i.e. the field commutes with the cyclic
    /// coordinate permutation.
    pub fn is_cyclic(&self) -> bool {
        self.a == self.b && self.b == self.c
    }

    /// Euclidean distance to (1, 1, 1).
    pub fn distance_to_unit(&self) -> T {
        let one = T::one();
        ((self.a - one).powi(2) + (self.b - one).powi(2) + (self.c - one).powi(2)).sqrt()
    }

    /// Upper bound on the speed, |A| + |B| + |C|, used to bound drift rates.
    pub fn speed_bound(&self) -> T {
        self.a.abs() + self.b.abs() + self.c.abs()
    }

    pub fn to_f64(&self) -> FlowParams<f64> {
        FlowParams {
            a: self.a.to_f64().unwrap_or(f64::NAN),
            b: self.b.to_f64().unwrap_or(f64::NAN),
            c: self.c.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl<T: Real> Default for FlowParams<T> {
    fn default() -> Self {
        FlowParams { a: T::one(), b: T::one(), c: T::one() }
    }
}

/// A point (or vector) in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
pub struct Point3<T: Copy> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Velocities share the point representation.
pub type Velocity3<T> = Point3<T>;

/// Row-major 3x3 matrix.
pub type Matrix3<T> = [[T; 3]; 3];

impl<T: Copy> From<[T; 3]> for Point3<T> {
    fn from(v: [T; 3]) -> Self {
        Point3 { x: v[0], y: v[1], z: v[2] }
    }
}

impl<T: Copy> From<Point3<T>> for [T; 3] {
    fn from(p: Point3<T>) -> Self {
        [p.x, p.y, p.z]
    }
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Point3 { x, y, z }
    }

    pub fn zero() -> Self {
        Point3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Translation by 2π times an integer vector.
    pub fn lattice_shifted(&self, k: [i32; 3]) -> Self {
        let tau = T::two_pi();
        let f = |v: i32| T::from_i32(v).expect("small integer") * tau;
        Point3::new(self.x + f(k[0]), self.y + f(k[1]), self.z + f(k[2]))
    }

    /// Each coordinate reduced to [0, 2π).
    pub fn wrapped(&self) -> Self {
        Point3::new(wrap_angle(self.x), wrap_angle(self.y), wrap_angle(self.z))
    }

    pub fn to_f64(&self) -> Point3<f64> {
        Point3 {
            x: self.x.to_f64().unwrap_or(f64::NAN),
            y: self.y.to_f64().unwrap_or(f64::NAN),
            z: self.z.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// Reduces an angle to [0, 2π).
pub fn wrap_angle<T: Real>(v: T) -> T {
    let tau = T::two_pi();
    let r = v - (v / tau).floor() * tau;
    // floor can leave r == tau after rounding
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

impl<T: Copy> Index<usize> for Point3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Point3 index {i} out of range"),
        }
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Point3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Point3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

pub fn mat_vec<T: Real>(m: &Matrix3<T>, v: &Point3<T>) -> Point3<T> {
    let row = |r: &[T; 3]| r[0] * v.x + r[1] * v.y + r[2] * v.z;
    Point3::new(row(&m[0]), row(&m[1]), row(&m[2]))
}

pub fn trace<T: Real>(m: &Matrix3<T>) -> T {
    m[0][0] + m[1][1] + m[2][2]
}

/// The ABC velocity at `p`.
#[inline]
pub fn velocity<T: Real>(params: &FlowParams<T>, p: &Point3<T>) -> Velocity3<T> {
    let (sx, cx) = p.x.sin_cos();
    let (sy, cy) = p.y.sin_cos();
    let (sz, cz) = p.z.sin_cos();
    let FlowParams { a, b, c } = *params;
    Point3::new(a * sz + c * cy, b * sx + a * cz, c * sy + b * cx)
}

/// Analytic Jacobian of [`velocity`]; row `i` holds the gradient of component `i`.
pub fn jacobian<T: Real>(params: &FlowParams<T>, p: &Point3<T>) -> Matrix3<T> {
    let (sx, cx) = p.x.sin_cos();
    let (sy, cy) = p.y.sin_cos();
    let (sz, cz) = p.z.sin_cos();
    let FlowParams { a, b, c } = *params;
    let o = T::zero();
    [[o, -c * sy, a * cz], [b * cx, o, -a * sz], [-b * sx, c * cy, o]]
}

/// The point maps used to generate new solutions from old ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    /// `(x, y, z) -> (-π - x, -y, z)`, reflection across the line x = -π/2, y = 0.
    ReflectX,
    /// `(x, y, z) -> (-x, y, π - z)`, reflection across the line x = 0, z = π/2.
    ReflectCorner,
    /// `p -> p - (π, π, π)`.
    ShiftReverse,
    /// `(x, y, z) -> (z, x, y)`.
    Cyclic,
    /// `(x, y, z) -> (y, z, x)`.
    CyclicSquared,
    /// Translation by 2π times the integer vector.
    LatticeShift([i32; 3]),
}

impl SymmetryKind {
    /// The five maps that are symmetries of the 1-1-1 field.
    pub const BUILTIN: [SymmetryKind; 5] = [
        SymmetryKind::ReflectX,
        SymmetryKind::ReflectCorner,
        SymmetryKind::ShiftReverse,
        SymmetryKind::Cyclic,
        SymmetryKind::CyclicSquared,
    ];

    pub fn time_reversing(&self) -> bool {
        matches!(self, SymmetryKind::ReflectX | SymmetryKind::ReflectCorner | SymmetryKind::ShiftReverse)
    }

    /// Linear part of the map, a signed permutation matrix.
    pub fn linear_part<T: Real>(&self) -> Matrix3<T> {
        let (o, l) = (T::zero(), T::one());
        match self {
            SymmetryKind::ReflectX => [[-l, o, o], [o, -l, o], [o, o, l]],
            SymmetryKind::ReflectCorner => [[-l, o, o], [o, l, o], [o, o, -l]],
            SymmetryKind::ShiftReverse | SymmetryKind::LatticeShift(_) => [[l, o, o], [o, l, o], [o, o, l]],
            SymmetryKind::Cyclic => [[o, o, l], [l, o, o], [o, l, o]],
            SymmetryKind::CyclicSquared => [[o, l, o], [o, o, l], [l, o, o]],
        }
    }

    /// Matrix `M` with `u(m(p)) = M u(p)`: the linear part, negated for
    /// time-reversing maps.
    pub fn velocity_matrix<T: Real>(&self) -> Matrix3<T> {
        let mut m = self.linear_part::<T>();
        if self.time_reversing() {
            for row in m.iter_mut() {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
        }
        m
    }

    /// Whether the map is a (possibly reversing) symmetry of the field at `params`.
    ///
    /// The reflections and the half-lattice shift hold for every (A, B, C);
    /// the cyclic permutations need A = B = C.
    pub fn supported_by<T: Real>(&self, params: &FlowParams<T>) -> bool {
        match self {
            SymmetryKind::Cyclic | SymmetryKind::CyclicSquared => params.is_cyclic(),
            _ => true,
        }
    }
}

/// A symmetry map together with its time treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryMap<T> {
    pub kind: SymmetryKind,
    /// Reflection center for time: a reversing map sends `t` to `2 * time_anchor - t`.
    pub time_anchor: T,
}

impl<T: Real> SymmetryMap<T> {
    pub fn new(kind: SymmetryKind) -> Self {
        SymmetryMap { kind, time_anchor: T::zero() }
    }

    pub fn anchored(kind: SymmetryKind, time_anchor: T) -> Self {
        SymmetryMap { kind, time_anchor }
    }

    pub fn time_reversing(&self) -> bool {
        self.kind.time_reversing()
    }

    /// Time substitution applied together with the point map.
    pub fn map_time(&self, t: T) -> T {
        if self.time_reversing() {
            self.time_anchor + self.time_anchor - t
        } else {
            t
        }
    }

    pub fn apply(&self, p: &Point3<T>) -> Point3<T> {
        apply_symmetry(self.kind, p)
    }
}

/// Applies the point part of a symmetry map.
pub fn apply_symmetry<T: Real>(kind: SymmetryKind, p: &Point3<T>) -> Point3<T> {
    let pi = T::PI();
    match kind {
        SymmetryKind::ReflectX => Point3::new(-pi - p.x, -p.y, p.z),
        SymmetryKind::ReflectCorner => Point3::new(-p.x, p.y, pi - p.z),
        SymmetryKind::ShiftReverse => Point3::new(p.x - pi, p.y - pi, p.z - pi),
        SymmetryKind::Cyclic => Point3::new(p.z, p.x, p.y),
        SymmetryKind::CyclicSquared => Point3::new(p.y, p.z, p.x),
        SymmetryKind::LatticeShift(k) => p.lattice_shifted(k),
    }
}

/// `|u(m(p)) - M u(p)|`, zero up to rounding whenever `m` is a symmetry.
pub fn symmetry_equivariance_defect<T: Real>(kind: SymmetryKind, params: &FlowParams<T>, p: &Point3<T>) -> Result<T> {
    if !kind.supported_by(params) {
        let f = params.to_f64();
        return Err(Error::SymmetryUnavailable { map: format!("{kind:?}"), a: f.a, b: f.b, c: f.c });
    }
    let lhs = velocity(params, &apply_symmetry(kind, p));
    let rhs = mat_vec(&kind.velocity_matrix(), &velocity(params, p));
    Ok((lhs - rhs).norm())
}

/// Faces of the prism `D = R x (0, π/2)`, `R` the open triangle with
/// vertices (0, -π/2), (0, 3π/2), (-π, π/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    /// x = 0
    #[serde(rename = "FX")]
    Fx,
    /// x + y = -π/2
    #[serde(rename = "FDIAG")]
    FDiag,
    /// y - x = 3π/2
    #[serde(rename = "FANTI")]
    FAnti,
    /// z = 0
    #[serde(rename = "FZ0")]
    FZ0,
    /// z = π/2
    #[serde(rename = "FZTOP")]
    FZTop,
}

impl Face {
    pub const ALL: [Face; 5] = [Face::Fx, Face::FDiag, Face::FAnti, Face::FZ0, Face::FZTop];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Affine face function `g(p) = grad . p + offset`, positive inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFace<T: Copy> {
    pub face: Face,
    pub grad: Point3<T>,
    pub offset: T,
}

impl<T: Real> AffineFace<T> {
    pub fn value(&self, p: &Point3<T>) -> T {
        self.grad.dot(p) + self.offset
    }

    /// d/dt of the face function along the flow.
    pub fn rate(&self, params: &FlowParams<T>, p: &Point3<T>) -> T {
        self.grad.dot(&velocity(params, p))
    }

    pub fn outward_normal(&self) -> Point3<T> {
        -self.grad
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismRegion<T: Copy> {
    pub faces: [AffineFace<T>; 5],
}

impl<T: Real> Default for PrismRegion<T> {
    fn default() -> Self {
        let (o, l) = (T::zero(), T::one());
        let half_pi = T::FRAC_PI_2();
        let three_half_pi = half_pi * T::lit(3.0);
        let f = |face, grad: [T; 3], offset| AffineFace { face, grad: grad.into(), offset };
        PrismRegion {
            faces: [
                f(Face::Fx, [-l, o, o], o),
                f(Face::FDiag, [l, l, o], half_pi),
                f(Face::FAnti, [l, -l, o], three_half_pi),
                f(Face::FZ0, [o, o, l], o),
                f(Face::FZTop, [o, o, -l], half_pi),
            ],
        }
    }
}

impl<T: Real> PrismRegion<T> {
    pub fn face(&self, face: Face) -> &AffineFace<T> {
        &self.faces[face.index()]
    }

    /// Face function values in [`Face::ALL`] order; all positive iff `p` is inside.
    pub fn face_values(&self, p: &Point3<T>) -> [T; 5] {
        let mut out = [T::zero(); 5];
        for (o, f) in out.iter_mut().zip(&self.faces) {
            *o = f.value(p);
        }
        out
    }

    pub fn contains(&self, p: &Point3<T>) -> bool {
        self.faces.iter().all(|f| f.value(p) > T::zero())
    }
}

/// Free-function form of [`PrismRegion::face_values`].
pub fn face_values<T: Real>(region: &PrismRegion<T>, p: &Point3<T>) -> [T; 5] {
    region.face_values(p)
}
