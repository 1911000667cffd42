//! Quaternion arithmetic, involutions and the Euler polar form.
//!
//! Components are stored as `w + x i + y j + z k`. The Euler polar form
//! factors a nonzero quaternion as `|q| exp(iθ) exp(-kχ) exp(jφ)`, which is
//! the parametrization used throughout the crate to read off the
//! orientation `θ`, ellipticity `χ` and phase `φ` of a polarized signal.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Values with `|2(xy - wz)|` above this bound are treated as gimbal locked.
const GIMBAL_THRESHOLD: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Embeds a complex number into the `C_i` subfield `{1, i}`.
    #[inline]
    pub fn from_ci(c: Complex64) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    /// Embeds a complex number into the `C_j` subfield `{1, j}`.
    #[inline]
    pub fn from_cj(c: Complex64) -> Self {
        Self::new(c.re, 0.0, c.im, 0.0)
    }

    /// Projection onto `{1, i}`.
    #[inline]
    pub fn ci_part(self) -> Complex64 {
        Complex64::new(self.w, self.x)
    }

    /// `exp(μθ) = cos θ + μ sin θ` for a unit pure axis.
    pub fn exp_axis(axis: Axis, angle: f64) -> Self {
        let [a, b, c] = axis.vector();
        let (s, co) = angle.sin_cos();
        Self::new(co, a * s, b * s, c * s)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `q⁻¹ = conj(q) / |q|²`, absent for `q = 0`.
    pub fn inverse(self) -> Option<Self> {
        let n2 = self.norm_sqr();
        (n2 > 0.0).then(|| self.conj() / n2)
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn max_abs(self) -> f64 {
        self.w.abs().max(self.x.abs()).max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `-μqμ`, or its quaternion conjugate when `conjugated` is set.
    pub fn involute(self, axis: Axis, conjugated: bool) -> Self {
        let mu = axis.quaternion();
        let inv = -(mu * self * mu);
        if conjugated {
            inv.conj()
        } else {
            inv
        }
    }

    /// Simplex/perplex split `q = s + i p` with `s, p ∈ C_j`.
    ///
    /// The returned complex numbers use their imaginary unit for `j`.
    #[inline]
    pub fn simplex_perplex(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.y), Complex64::new(self.x, self.z))
    }

    #[inline]
    pub fn from_simplex_perplex(s: Complex64, p: Complex64) -> Self {
        Self::new(s.re, p.re, s.im, p.im)
    }

    /// Cayley-Dickson split `q = q1 + q2 j` with `q1, q2 ∈ C_i`.
    pub fn cayley_dickson(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    pub fn from_cayley_dickson(q1: Complex64, q2: Complex64) -> Self {
        Self::new(q1.re, q1.im, q2.re, q2.im)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, q: Self) -> Self {
        let p = self;
        Self::new(
            p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
        )
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl MulAssign<f64> for Quaternion {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, s: f64) -> Self {
        Self::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

/// Pure unit quaternion used as a transform axis or involution axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    I,
    J,
    K,
    /// Arbitrary unit pure quaternion, as `(x, y, z)` on `{i, j, k}`.
    Pure([f64; 3]),
}

impl Axis {
    /// Normalizes `v` into a pure unit axis.
    pub fn pure(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("axis vector must be finite and nonzero"));
        }
        Ok(Axis::Pure([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn vector(self) -> [f64; 3] {
        match self {
            Axis::I => [1.0, 0.0, 0.0],
            Axis::J => [0.0, 1.0, 0.0],
            Axis::K => [0.0, 0.0, 1.0],
            Axis::Pure(v) => v,
        }
    }

    pub fn quaternion(self) -> Quaternion {
        let [x, y, z] = self.vector();
        Quaternion::new(0.0, x, y, z)
    }
}

/// Phase triplet of a quaternion together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerTriplet {
    pub modulus: f64,
    /// Orientation, in `[-π, π)`. Zero when gimbal locked.
    pub theta: f64,
    /// Ellipticity, in `[-π/4, π/4]`.
    pub chi: f64,
    /// Phase, in `[-π/2, π/2]`; spans `(-π, π]` when gimbal locked.
    pub phi: f64,
}

impl EulerTriplet {
    pub fn new(modulus: f64, theta: f64, chi: f64, phi: f64) -> Self {
        Self { modulus, theta, chi, phi }
    }

    pub fn is_gimbal_locked(&self) -> bool {
        (self.chi.abs() - FRAC_PI_4).abs() < 1e-9
    }
}

/// `|q| exp(iθ) exp(-kχ) exp(jφ)`.
pub fn euler_compose(t: &EulerTriplet) -> Quaternion {
    let (st, ct) = t.theta.sin_cos();
    let (sc, cc) = t.chi.sin_cos();
    let (sp, cp) = t.phi.sin_cos();
    let q = Quaternion::new(
        ct * cc * cp - st * sc * sp,
        st * cc * cp + ct * sc * sp,
        ct * cc * sp + st * sc * cp,
        st * cc * sp - ct * sc * cp,
    );
    q * t.modulus
}

/// Euler polar decomposition of a nonzero quaternion.
///
/// Half-angle `atan2` forms give `θ` modulo `π`; the sign of the recomposed
/// unit quaternion then fixes the remaining branch. At `|χ| = π/4` only the
/// sum or difference of `θ` and `φ` is identifiable, so `θ` is set to zero
/// and the whole angle is carried by `φ`.
pub fn euler_decompose(q: Quaternion) -> Result<EulerTriplet> {
    let modulus = q.norm();
    if !(modulus > 0.0) || !modulus.is_finite() {
        return Err(Error::ZeroQuaternion);
    }
    let u = q / modulus;
    let (a, b, c, d) = (u.w, u.x, u.y, u.z);
    let s2chi = 2.0 * (b * c - a * d);

    if s2chi.abs() > GIMBAL_THRESHOLD {
        let sign = s2chi.signum();
        let chi = sign * FRAC_PI_4;
        let phi = (c + sign * b).atan2(a - sign * d);
        return Ok(EulerTriplet::new(modulus, 0.0, chi, phi));
    }

    let chi = s2chi.asin() / 2.0;
    let theta_t = (2.0 * (a * b + c * d)).atan2(a * a - b * b + c * c - d * d) / 2.0;
    let phi = (2.0 * (b * d + a * c)).atan2(a * a + b * b - c * c - d * d) / 2.0;

    let trial = euler_compose(&EulerTriplet::new(1.0, theta_t, chi, phi));
    let theta = if trial.dot(u) < 0.0 {
        if theta_t >= 0.0 {
            theta_t - PI
        } else {
            theta_t + PI
        }
    } else {
        theta_t
    };
    Ok(EulerTriplet::new(modulus, theta, chi, phi))
}
