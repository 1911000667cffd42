//! Discrete quaternion Fourier transform with the kernel on the right.
//!
//! A quaternion sequence is split as `f = A + ν B` with `A, B` valued in the
//! complex subfield `C_μ` of the transform axis `μ` and `ν ⟂ μ`. Since
//! `ν B e^{-μθ} = ν (B e^{-μθ})`, each part is an ordinary complex DFT and
//! the whole transform costs two complex FFTs. For the default axis `j`
//! this is the simplex/perplex split `f = f_s + i f_p`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quaternion::{Axis, Quaternion};

/// Uniformly sampled quaternion-valued signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuaternionSignal {
    pub samples: Vec<Quaternion>,
    pub dt: f64,
    pub t0: f64,
}

impl QuaternionSignal {
    pub fn new(samples: Vec<Quaternion>, dt: f64) -> Result<Self> {
        Self::with_origin(samples, dt, 0.0)
    }

    pub fn with_origin(samples: Vec<Quaternion>, dt: f64, t0: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("signal must have at least one sample"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("sample interval must be positive, got {dt}")));
        }
        Ok(Self { samples, dt, t0 })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|n| self.time(n))
    }

    /// `∫ |f|² dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|q| q.norm_sqr()).sum::<f64>() * self.dt
    }

    /// `∫ f ḡ dt` or `∫ f g^{j̄} dt` depending on `pairing`.
    pub fn inner(&self, other: &Self, pairing: Pairing) -> Quaternion {
        debug_assert_eq!(self.len(), other.len());
        let sum: Quaternion = self.samples.iter().zip(&other.samples).map(|(&f, &g)| f * pairing.apply(g)).sum();
        sum * self.dt
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&q| q * s).collect(),
            ..self.clone()
        }
    }
}

/// How the second factor of a quaternion inner product is transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Quaternion conjugate: energy-type products.
    Conjugate,
    /// Conjugate composed with the `j` involution: polarization-type products.
    InvolutionJ,
}

impl Pairing {
    #[inline]
    pub fn apply(self, q: Quaternion) -> Quaternion {
        match self {
            Pairing::Conjugate => q.conj(),
            Pairing::InvolutionJ => q.involute(Axis::J, true),
        }
    }
}

/// Raw DFT bins `F[k] = Σ f[n] e^{-μ 2πkn/N}` in native order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuaternionSpectrum {
    pub bins: Vec<Quaternion>,
    /// Bin width in rad/s.
    pub domega: f64,
    /// Time origin of the source signal, kept for the inverse.
    pub t0: f64,
}

impl QuaternionSpectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Sample interval of the signal this spectrum belongs to.
    pub fn dt(&self) -> f64 {
        2.0 * PI / (self.len() as f64 * self.domega)
    }

    /// Signed angular frequency of bin `k`; bins above `N/2` are negative.
    pub fn omega(&self, k: usize) -> f64 {
        signed_bin(k, self.len()) as f64 * self.domega
    }

    /// `(1/2π) ∫ F Ĝ dω` with the continuous-transform scaling `f̂ = dt·F`.
    pub fn inner(&self, other: &Self, pairing: Pairing) -> Quaternion {
        let sum: Quaternion = self.bins.iter().zip(&other.bins).map(|(&f, &g)| f * pairing.apply(g)).sum();
        sum * (self.dt() / self.len() as f64)
    }
}

/// Index `k` of an `n`-point DFT mapped into `(-n/2, n/2]`.
#[inline]
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if 2 * k <= n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Orthonormal frame `(μ, ν, νμ)` for the split `f = A + ν B`.
#[derive(Debug, Clone, Copy)]
struct SplitFrame {
    mu: [f64; 3],
    nu: [f64; 3],
    numu: [f64; 3],
}

impl SplitFrame {
    fn new(axis: Axis) -> Self {
        let mu = axis.vector();
        let helper = if mu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let nu = normalize(cross(helper, mu));
        let numu = cross(nu, mu);
        Self { mu, nu, numu }
    }

    #[inline]
    fn split(&self, q: Quaternion) -> (Complex64, Complex64) {
        let v = [q.x, q.y, q.z];
        (
            Complex64::new(q.w, dot3(v, self.mu)),
            Complex64::new(dot3(v, self.nu), dot3(v, self.numu)),
        )
    }

    #[inline]
    fn join(&self, a: Complex64, b: Complex64) -> Quaternion {
        let v = |k: usize| a.im * self.mu[k] + b.re * self.nu[k] + b.im * self.numu[k];
        Quaternion::new(a.re, v(0), v(1), v(2))
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Reusable forward/inverse QFT of a fixed length and axis.
#[derive(Clone)]
pub struct QftPlan {
    len: usize,
    axis: Axis,
    frame: Option<SplitFrame>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for QftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QftPlan").field("len", &self.len).field("axis", &self.axis).finish()
    }
}

impl QftPlan {
    /// Plan for axis `j`.
    pub fn new(len: usize) -> Self {
        Self::with_axis(len, Axis::J)
    }

    pub fn with_axis(len: usize, axis: Axis) -> Self {
        let mut planner = FftPlanner::new();
        let frame = match axis {
            Axis::J => None,
            other => Some(SplitFrame::new(other)),
        };
        Self {
            len,
            axis,
            frame,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Unnormalized forward transform of `data` (length must match the plan).
    pub fn forward(&self, data: &[Quaternion]) -> Vec<Quaternion> {
        self.run(data, false)
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, data: &[Quaternion]) -> Vec<Quaternion> {
        self.run(data, true)
    }

    /// Buffers for [`QftPlan::forward_into`] and [`QftPlan::inverse_into`].
    pub fn workspace(&self) -> QftWorkspace {
        let scratch = self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len());
        QftWorkspace {
            buf: vec![Complex64::default(); 2 * self.len],
            scratch: vec![Complex64::default(); scratch],
        }
    }

    /// Allocation-free [`QftPlan::forward`].
    pub fn forward_into(&self, data: &[Quaternion], out: &mut [Quaternion], ws: &mut QftWorkspace) {
        self.run_into(data, out, ws, false);
    }

    /// Allocation-free [`QftPlan::inverse`].
    pub fn inverse_into(&self, data: &[Quaternion], out: &mut [Quaternion], ws: &mut QftWorkspace) {
        self.run_into(data, out, ws, true);
    }

    fn run(&self, data: &[Quaternion], inverse: bool) -> Vec<Quaternion> {
        let n = self.len;
        assert_eq!(data.len(), n, "QFT plan length mismatch");
        let mut buf = Vec::with_capacity(2 * n);
        match &self.frame {
            None => {
                buf.extend(data.iter().map(|q| q.simplex_perplex().0));
                buf.extend(data.iter().map(|q| q.simplex_perplex().1));
            }
            Some(frame) => {
                buf.extend(data.iter().map(|&q| frame.split(q).0));
                buf.extend(data.iter().map(|&q| frame.split(q).1));
            }
        }
        if inverse {
            self.inverse.process(&mut buf);
        } else {
            self.forward.process(&mut buf);
        }
        self.join_all(&buf, inverse).collect()
    }

    fn join_all<'a>(&'a self, buf: &'a [Complex64], inverse: bool) -> impl Iterator<Item = Quaternion> + 'a {
        let n = self.len;
        let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
        let (a, b) = buf.split_at(n);
        a.iter().zip(b).map(move |(&s, &p)| {
            let q = match &self.frame {
                None => Quaternion::from_simplex_perplex(s, p),
                Some(frame) => frame.join(s, p),
            };
            if inverse {
                q * scale
            } else {
                q
            }
        })
    }

    fn run_into(&self, data: &[Quaternion], out: &mut [Quaternion], ws: &mut QftWorkspace, inverse: bool) {
        let n = self.len;
        assert!(data.len() == n && out.len() == n, "QFT plan length mismatch");
        let (a, b) = ws.buf.split_at_mut(n);
        for ((q, s), p) in data.iter().zip(a.iter_mut()).zip(b.iter_mut()) {
            (*s, *p) = match &self.frame {
                None => q.simplex_perplex(),
                Some(frame) => frame.split(*q),
            };
        }
        let fft = if inverse { &self.inverse } else { &self.forward };
        fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (o, q) in out.iter_mut().zip(self.join_all(&ws.buf, inverse)) {
            *o = q;
        }
    }
}

/// Scratch space for one thread's transforms with a given plan.
#[derive(Debug, Clone)]
pub struct QftWorkspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// QFT of axis `j`.
pub fn qft_forward(f: &QuaternionSignal) -> QuaternionSpectrum {
    qft_forward_axis(f, Axis::J)
}

pub fn qft_forward_axis(f: &QuaternionSignal, axis: Axis) -> QuaternionSpectrum {
    let n = f.len();
    let plan = QftPlan::with_axis(n, axis);
    QuaternionSpectrum {
        bins: plan.forward(&f.samples),
        domega: 2.0 * PI / (n as f64 * f.dt),
        t0: f.t0,
    }
}

/// Inverse QFT of axis `j`.
pub fn qft_inverse(spectrum: &QuaternionSpectrum) -> QuaternionSignal {
    qft_inverse_axis(spectrum, Axis::J)
}

pub fn qft_inverse_axis(spectrum: &QuaternionSpectrum, axis: Axis) -> QuaternionSignal {
    let plan = QftPlan::with_axis(spectrum.len(), axis);
    QuaternionSignal {
        samples: plan.inverse(&spectrum.bins),
        dt: spectrum.dt(),
        t0: spectrum.t0,
    }
}

/// Time and frequency localization of a signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    /// Mean time, s.
    pub u: f64,
    /// Mean angular frequency, rad/s.
    pub xi: f64,
    /// Time variance, s².
    pub sigma_t2: f64,
    /// Frequency variance, rad²/s².
    pub sigma_w2: f64,
}

impl SpreadReport {
    pub fn product(&self) -> f64 {
        self.sigma_t2 * self.sigma_w2
    }
}

/// Riemann-sum time/frequency means and spreads.
///
/// Frequency moments use the periodic spectrum over `(-π/dt, π/dt]`, so
/// signals must be effectively time-limited and bandlimited for the
/// uncertainty bound to be meaningful.
pub fn spreads(f: &QuaternionSignal) -> Result<SpreadReport> {
    let energy: f64 = f.samples.iter().map(|q| q.norm_sqr()).sum();
    if !(energy > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let u = f.times().zip(&f.samples).map(|(t, q)| t * q.norm_sqr()).sum::<f64>() / energy;
    let sigma_t2 = f.times().zip(&f.samples).map(|(t, q)| (t - u).powi(2) * q.norm_sqr()).sum::<f64>() / energy;

    let spec = qft_forward(f);
    let spec_energy: f64 = spec.bins.iter().map(|q| q.norm_sqr()).sum();
    let xi = spec.bins.iter().enumerate().map(|(k, q)| spec.omega(k) * q.norm_sqr()).sum::<f64>() / spec_energy;
    let sigma_w2 = spec
        .bins
        .iter()
        .enumerate()
        .map(|(k, q)| (spec.omega(k) - xi).powi(2) * q.norm_sqr())
        .sum::<f64>()
        / spec_energy;
    Ok(SpreadReport { u, xi, sigma_t2, sigma_w2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> QuaternionSignal {
        let samples = (0..n)
            .map(|_| {
                Quaternion::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        QuaternionSignal::new(samples, 0.01).unwrap()
    }

    /// Direct O(N²) sum of `f[n] exp(-μ 2πkn/N)`.
    fn naive_dft(f: &[Quaternion], axis: Axis, sign: f64) -> Vec<Quaternion> {
        let n = f.len();
        (0..n)
            .map(|k| {
                f.iter()
                    .enumerate()
                    .map(|(m, &q)| {
                        let angle = sign * 2.0 * PI * ((k * m) % n) as f64 / n as f64;
                        q * Quaternion::exp_axis(axis, angle)
                    })
                    .sum()
            })
            .collect()
    }

    fn max_err(a: &[Quaternion], b: &[Quaternion]) -> f64 {
        a.iter().zip(b).map(|(&x, &y)| (x - y).max_abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_is_dc_delta() {
        let f = QuaternionSignal::new(vec![Quaternion::ONE; 16], 1.0).unwrap();
        let s = qft_forward(&f);
        assert!((s.bins[0] - Quaternion::real(16.0)).max_abs() < 1e-12);
        assert!(s.bins[1..].iter().all(|q| q.max_abs() < 1e-12));
    }

    #[test]
    fn j_exponential_is_bin_one() {
        let n = 32;
        let samples = (0..n)
            .map(|m| Quaternion::exp_axis(Axis::J, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let s = qft_forward(&QuaternionSignal::new(samples, 1.0).unwrap());
        for (k, q) in s.bins.iter().enumerate() {
            let expected = if k == 1 { Quaternion::real(n as f64) } else { Quaternion::ZERO };
            assert!((*q - expected).max_abs() < 1e-12, "bin {k}");
        }
        let back = qft_inverse(&s);
        assert!((back.samples[3] - Quaternion::exp_axis(Axis::J, 2.0 * PI * 3.0 / n as f64)).max_abs() < 1e-14);
    }

    #[test]
    fn inverse_of_deltas() {
        let n = 8;
        let mut bins = vec![Quaternion::ZERO; n];
        bins[0] = Quaternion::real(n as f64);
        let f = qft_inverse(&QuaternionSpectrum {
            bins,
            domega: 1.0,
            t0: 0.0,
        });
        assert!(f.samples.iter().all(|q| (*q - Quaternion::ONE).max_abs() < 1e-15));
    }

    #[test]
    fn matches_naive_dft_for_every_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_signal(&mut rng, 64);
        let general = Axis::pure([0.3, -0.5, 0.8]).unwrap();
        for axis in [Axis::I, Axis::J, Axis::K, general] {
            let fast = qft_forward_axis(&f, axis);
            let slow = naive_dft(&f.samples, axis, -1.0);
            assert!(max_err(&fast.bins, &slow) < 1e-10, "{axis:?}");
            let back = qft_inverse_axis(&fast, axis);
            assert!(max_err(&back.samples, &f.samples) < 1e-12);
        }
    }

    #[test]
    fn round_trip_1024() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_signal(&mut rng, 1024);
        let back = qft_inverse(&qft_forward(&f));
        assert!(max_err(&back.samples, &f.samples) < 1e-10);
        assert_eq!(back.dt, f.dt);
    }

    #[test]
    fn left_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_signal(&mut rng, 48);
        let g = random_signal(&mut rng, 48);
        let alpha = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        let beta = Quaternion::new(-0.7, 0.1, 0.0, 1.5);
        let combo = QuaternionSignal::new(
            f.samples.iter().zip(&g.samples).map(|(&a, &b)| alpha * a + beta * b).collect(),
            f.dt,
        )
        .unwrap();
        let (sf, sg, sc) = (qft_forward(&f), qft_forward(&g), qft_forward(&combo));
        let expected: Vec<_> = sf.bins.iter().zip(&sg.bins).map(|(&a, &b)| alpha * a + beta * b).collect();
        assert!(max_err(&sc.bins, &expected) < 1e-10);
    }

    #[test]
    fn cj_subspace_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = (0..40).map(|_| Quaternion::new(rng.gen(), 0.0, rng.gen(), 0.0)).collect();
        let s = qft_forward(&QuaternionSignal::new(samples, 1.0).unwrap());
        assert!(s.bins.iter().all(|q| q.x.abs() < 1e-12 && q.z.abs() < 1e-12));
    }

    #[test]
    fn convolution_with_cj_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 32;
        let f = random_signal(&mut rng, n);
        let g: Vec<Quaternion> = (0..n).map(|_| Quaternion::new(rng.gen(), 0.0, rng.gen(), 0.0)).collect();
        let conv: Vec<Quaternion> = (0..n).map(|m| (0..n).map(|p| f.samples[p] * g[(m + n - p) % n]).sum()).collect();
        let plan = QftPlan::new(n);
        let (fh, gh, ch) = (plan.forward(&f.samples), plan.forward(&g), plan.forward(&conv));
        let prod: Vec<_> = fh.iter().zip(&gh).map(|(&a, &b)| a * b).collect();
        assert!(max_err(&ch, &prod) < 1e-9);
    }

    #[test]
    fn spectral_derivative_matches_analytic() {
        // f(t) = q1 e^{j 3t} + q2 e^{j(-5t)} on one period, dt = 2π/N.
        let n = 64;
        let dt = 2.0 * PI / n as f64;
        let q1 = Quaternion::new(0.2, 1.0, -0.4, 0.3);
        let q2 = Quaternion::new(-0.5, 0.1, 0.7, 1.0);
        let at = |t: f64| q1 * Quaternion::exp_axis(Axis::J, 3.0 * t) + q2 * Quaternion::exp_axis(Axis::J, -5.0 * t);
        let dat = |t: f64| {
            q1 * Quaternion::exp_axis(Axis::J, 3.0 * t) * (Quaternion::J * 3.0)
                + q2 * Quaternion::exp_axis(Axis::J, -5.0 * t) * (Quaternion::J * -5.0)
        };
        let f = QuaternionSignal::new((0..n).map(|m| at(m as f64 * dt)).collect(), dt).unwrap();
        let mut s = qft_forward(&f);
        for k in 0..n {
            let w = s.omega(k);
            s.bins[k] *= Quaternion::J * w;
        }
        let d = qft_inverse(&s);
        let expected: Vec<_> = (0..n).map(|m| dat(m as f64 * dt)).collect();
        assert!(max_err(&d.samples, &expected) < 1e-10);
    }

    #[test]
    fn shift_covariance_of_spreads() {
        let n = 512;
        let dt = 0.05;
        let make = |delay: f64| {
            QuaternionSignal::new(
                (0..n)
                    .map(|m| {
                        let t = m as f64 * dt - 12.0 - delay;
                        Quaternion::new(1.0, 0.5, -0.2, 0.1) * (-t * t / 2.0).exp()
                    })
                    .collect(),
                dt,
            )
            .unwrap()
        };
        let a = spreads(&make(0.0)).unwrap();
        let b = spreads(&make(2.0)).unwrap();
        assert!((b.u - a.u - 2.0).abs() < 1e-9);
        assert!((b.sigma_t2 - a.sigma_t2).abs() < 1e-9);
        assert!((a.sigma_t2 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn spreads_rejects_zero_signal() {
        let f = QuaternionSignal::new(vec![Quaternion::ZERO; 8], 1.0).unwrap();
        assert!(matches!(spreads(&f), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn signal_validation() {
        assert!(QuaternionSignal::new(vec![], 1.0).is_err());
        assert!(QuaternionSignal::new(vec![Quaternion::ONE], 0.0).is_err());
    }
}
