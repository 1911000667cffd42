//! Quaternion embedding of bivariate signals and the instantaneous
//! polarization quantities derived from it.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Stokes;
use crate::qft::{QftPlan, QuaternionSignal};
use crate::quaternion::{euler_decompose, EulerTriplet, Quaternion};

/// Relative amplitude below which polar angles are not reported.
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

/// Uniformly sampled bivariate signal with values in `C_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, dt: f64) -> Result<Self> {
        Self::with_origin(samples, dt, 0.0)
    }

    pub fn with_origin(samples: Vec<Complex64>, dt: f64, t0: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("bivariate signal needs at least two samples"));
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

    /// The same samples viewed in the `{1, i}` plane of `H`.
    pub fn to_quaternion(&self) -> QuaternionSignal {
        QuaternionSignal {
            samples: self.samples.iter().map(|&c| Quaternion::from_ci(c)).collect(),
            dt: self.dt,
            t0: self.t0,
        }
    }
}

/// Componentwise discrete Hilbert transform of the real and `i` parts.
///
/// Each real component is multiplied by `-i sign(ω)` in its spectrum; the
/// DC and Nyquist bins carry no quadrature and are zeroed.
pub fn hilbert(f: &ComplexSignal) -> ComplexSignal {
    let n = f.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let transform = |part: &dyn Fn(Complex64) -> f64| -> Vec<f64> {
        let mut buf: Vec<Complex64> = f.samples.iter().map(|&c| Complex64::new(part(c), 0.0)).collect();
        fft.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let rot = if k == 0 || 2 * k == n {
                Complex64::new(0.0, 0.0)
            } else if 2 * k < n {
                Complex64::new(0.0, -1.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            *b *= rot;
        }
        ifft.process(&mut buf);
        buf.iter().map(|c| c.re / n as f64).collect()
    };
    let re = transform(&|c| c.re);
    let im = transform(&|c| c.im);
    ComplexSignal {
        samples: re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect(),
        dt: f.dt,
        t0: f.t0,
    }
}

/// One-sided quaternion lift `f₊ = f + H{f} j`, built in the QFT domain.
///
/// Positive bins are doubled, negative bins removed, and the DC and
/// Nyquist bins are kept with unit weight so that the `{1, i}` projection
/// returns `f` exactly.
pub fn quaternion_embed(f: &ComplexSignal) -> QuaternionSignal {
    let n = f.len();
    let plan = QftPlan::new(n);
    let q = f.to_quaternion();
    let mut spec = plan.forward(&q.samples);
    for (k, b) in spec.iter_mut().enumerate() {
        if k == 0 || 2 * k == n {
            continue;
        }
        if 2 * k < n {
            *b *= 2.0;
        } else {
            *b = Quaternion::ZERO;
        }
    }
    QuaternionSignal {
        samples: plan.inverse(&spec),
        dt: f.dt,
        t0: f.t0,
    }
}

/// Per-sample `(|a|, θ, χ, φ)`; `None` marks samples too small to carry a phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTripletSeries {
    pub samples: Vec<Option<EulerTriplet>>,
    pub dt: f64,
    pub t0: f64,
}

impl CanonicalTripletSeries {
    /// Evaluates `a(t)[cos φ cos χ + i sin φ sin χ]` with `a = |a| e^{iθ}`.
    pub fn reconstruct(&self) -> Vec<Option<Complex64>> {
        self.samples.iter().map(|s| s.map(|t| mes_value(&t))).collect()
    }

    pub fn gaps(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }
}

/// Modulated elliptical signal value for one polar triplet.
pub fn mes_value(t: &EulerTriplet) -> Complex64 {
    let a = Complex64::from_polar(t.modulus, t.theta);
    a * Complex64::new(t.phi.cos() * t.chi.cos(), t.phi.sin() * t.chi.sin())
}

pub fn canonical_triplet(fplus: &QuaternionSignal) -> CanonicalTripletSeries {
    let peak = fplus.samples.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let floor = AMPLITUDE_FLOOR * peak;
    let samples = fplus
        .samples
        .iter()
        .map(|&q| if q.norm() <= floor { None } else { euler_decompose(q).ok() })
        .collect();
    CanonicalTripletSeries {
        samples,
        dt: fplus.dt,
        t0: fplus.t0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesSeries {
    pub samples: Vec<Stokes>,
    pub dt: f64,
    pub t0: f64,
}

pub fn instantaneous_stokes(fplus: &QuaternionSignal) -> StokesSeries {
    StokesSeries {
        samples: fplus.samples.iter().map(|&q| Stokes::from_coefficient(q)).collect(),
        dt: fplus.dt,
        t0: fplus.t0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qft::qft_forward;
    use crate::quaternion::{euler_compose, Axis};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn tone(n: usize, cycles: f64, f: impl Fn(f64) -> Complex64) -> ComplexSignal {
        let dt = 1.0 / n as f64;
        ComplexSignal::new((0..n).map(|m| f(2.0 * PI * cycles * m as f64 * dt)).collect(), dt).unwrap()
    }

    #[test]
    fn hilbert_pairs() {
        let f = tone(256, 5.0, |p| Complex64::new(p.cos(), 0.0));
        let h = hilbert(&f);
        for (m, c) in h.samples.iter().enumerate() {
            let p = 2.0 * PI * 5.0 * m as f64 / 256.0;
            assert!((c.re - p.sin()).abs() < 1e-9 && c.im.abs() < 1e-9);
        }
        let dc = ComplexSignal::new(vec![Complex64::new(2.0, -1.0); 32], 1.0).unwrap();
        assert!(hilbert(&dc).samples.iter().all(|c| c.norm() < 1e-12));

        let f = tone(128, 3.0, |p| Complex64::new(p.cos(), p.sin()));
        for (m, c) in hilbert(&f).samples.iter().enumerate() {
            let p = 2.0 * PI * 3.0 * m as f64 / 128.0;
            assert!((c - Complex64::new(p.sin(), -p.cos())).norm() < 1e-9);
        }
    }

    #[test]
    fn embedding_of_cosine_is_j_exponential() {
        let f = tone(1024, 32.0, |p| Complex64::new(p.cos(), 0.0));
        let fp = quaternion_embed(&f);
        for (m, q) in fp.samples.iter().enumerate() {
            let expected = Quaternion::exp_axis(Axis::J, 2.0 * PI * 32.0 * m as f64 / 1024.0);
            assert!((*q - expected).max_abs() < 1e-9);
        }
    }

    #[test]
    fn embedding_agrees_with_hilbert_route() {
        let n = 200;
        let f = ComplexSignal::new(
            (0..n)
                .map(|m| Complex64::new((m as f64 * 0.37).sin() + 0.2, (m as f64 * 0.11).cos() * (m as f64 * 0.05).sin()))
                .collect(),
            0.5,
        )
        .unwrap();
        let fp = quaternion_embed(&f);
        let h = hilbert(&f);
        for ((q, c), h) in fp.samples.iter().zip(&f.samples).zip(&h.samples) {
            assert!((q.w - c.re).abs() < 1e-10 && (q.x - c.im).abs() < 1e-10);
            assert!((q.y - h.re).abs() < 1e-10 && (q.z - h.im).abs() < 1e-10);
        }
        let spec = qft_forward(&fp);
        let peak = spec.bins.iter().map(|b| b.norm()).fold(0.0, f64::max);
        assert!(spec.bins[n / 2 + 1..].iter().all(|b| b.norm() < 1e-12 * peak));
    }

    #[test]
    fn odd_length_embedding_recovers_signal() {
        let n = 101;
        let f = ComplexSignal::new(
            (0..n).map(|m| Complex64::new((m as f64).sin(), (0.3 * m as f64).cos())).collect(),
            1.0,
        )
        .unwrap();
        let fp = quaternion_embed(&f);
        for (q, c) in fp.samples.iter().zip(&f.samples) {
            assert!((q.ci_part() - c).norm() < 1e-12);
        }
    }

    #[test]
    fn two_tone_multicomponent_envelope() {
        // α cos ω0 t + α cos ω1 t with α ∈ C_i: linear polarization, beating envelope.
        let n = 1024;
        let (k0, k1) = (40.0, 48.0);
        let alpha = Complex64::from_polar(0.7, 0.4);
        let f = tone(n, 1.0, |p| alpha * ((k0 * p).cos() + (k1 * p).cos()));
        let tri = canonical_triplet(&quaternion_embed(&f));
        for (m, s) in tri.samples.iter().enumerate() {
            let t = m as f64 / n as f64;
            let env = (2.0 * alpha.norm() * (PI * (k1 - k0) * t).cos()).abs();
            match s {
                Some(s) => {
                    assert!((s.modulus - env).abs() < 1e-9, "sample {m}");
                    if env > 1e-3 {
                        assert!(s.chi.abs() < 1e-6);
                    }
                }
                None => assert!(env < 1e-6),
            }
        }
    }

    #[test]
    fn canonical_triplet_examples() {
        let n = 256;
        let w0 = 2.0 * PI * 9.0;
        let dt = 1.0 / n as f64;
        let ej = QuaternionSignal::new((0..n).map(|m| Quaternion::exp_axis(Axis::J, w0 * m as f64 * dt)).collect(), dt).unwrap();
        for (m, s) in canonical_triplet(&ej).samples.iter().enumerate() {
            let s = s.unwrap();
            let wrapped = {
                let p = (w0 * m as f64 * dt).rem_euclid(PI);
                if p > PI / 2.0 {
                    p - PI
                } else {
                    p
                }
            };
            assert!((s.modulus - 1.0).abs() < 1e-12 && s.chi.abs() < 1e-12);
            // θ ∈ {0, -π} absorbs the sign when φ wraps by π.
            assert!(s.theta.abs() < 1e-9 || (s.theta + PI).abs() < 1e-9);
            assert!((s.phi - wrapped).abs() < 1e-9 || (s.phi.abs() - PI / 2.0).abs() < 1e-9);
        }

        let a0 = Quaternion::exp_axis(Axis::I, FRAC_PI_4);
        let chi = Quaternion::exp_axis(Axis::K, -FRAC_PI_6);
        let f = QuaternionSignal::new(
            (0..n)
                .map(|m| a0 * chi * Quaternion::exp_axis(Axis::J, w0 * m as f64 * dt))
                .collect(),
            dt,
        )
        .unwrap();
        for s in canonical_triplet(&f).samples.iter().flatten() {
            assert!((s.chi - FRAC_PI_6).abs() < 1e-6);
            let th = s.theta.rem_euclid(PI);
            assert!((th - FRAC_PI_4).abs() < 1e-6);
        }

        let circ = QuaternionSignal::new(
            (0..n)
                .map(|m| Quaternion::exp_axis(Axis::K, -FRAC_PI_4) * Quaternion::exp_axis(Axis::J, w0 * m as f64 * dt))
                .collect(),
            dt,
        )
        .unwrap();
        for s in canonical_triplet(&circ).samples.iter().flatten() {
            assert_eq!(s.theta, 0.0);
            assert_eq!(s.chi, FRAC_PI_4);
        }
    }

    #[test]
    fn mes_reconstruction_matches_signal() {
        let n = 512;
        let dt = 1.0 / n as f64;
        let f = ComplexSignal::new(
            (0..n)
                .map(|m| {
                    let t = m as f64 * dt;
                    let a = Complex64::from_polar(1.0 + 0.2 * (2.0 * PI * t).cos(), 0.5 * t);
                    let (chi, phi) = (0.3 - 0.2 * t, 2.0 * PI * 60.0 * t + 20.0 * t * t);
                    a * Complex64::new(phi.cos() * chi.cos(), phi.sin() * chi.sin())
                })
                .collect(),
            dt,
        )
        .unwrap();
        let fp = quaternion_embed(&f);
        let rec = canonical_triplet(&fp).reconstruct();
        let peak = f.samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (r, c) in rec.iter().zip(&f.samples) {
            assert!((r.unwrap() - c).norm() < 1e-8 * peak);
        }
    }

    #[test]
    fn zero_samples_are_flagged() {
        let f = QuaternionSignal::new(vec![Quaternion::ONE, Quaternion::ZERO, Quaternion::J], 1.0).unwrap();
        let tri = canonical_triplet(&f);
        assert_eq!(tri.gaps(), 1);
        assert!(tri.samples[1].is_none());
        assert!(euler_compose(&tri.samples[2].unwrap()).y > 0.99);
    }

    #[test]
    fn stokes_examples() {
        let s = Stokes::from_coefficient(Quaternion::exp_axis(Axis::J, 0.7));
        assert!((s.s0 - 1.0).abs() < 1e-15 && (s.s1 - 1.0).abs() < 1e-15);
        assert!(s.s2.abs() < 1e-15 && s.s3.abs() < 1e-15);

        let c = Quaternion::exp_axis(Axis::K, -FRAC_PI_4) * Quaternion::exp_axis(Axis::J, 1.3);
        let s = Stokes::from_coefficient(c);
        assert!((s.s3 - s.s0).abs() < 1e-15 && s.s1.abs() < 1e-15 && s.s2.abs() < 1e-15);

        let q = Quaternion::new(0.3, -1.1, 0.8, 2.0);
        let s = Stokes::from_coefficient(q);
        assert!(s.polarization_defect().abs() < 1e-10 * s.s0 * s.s0);
    }

    #[test]
    fn stokes_follow_ellipse_parameters() {
        let (theta, chi) = (0.6, -0.35);
        let q = euler_compose(&EulerTriplet::new(1.5, theta, chi, 0.9));
        let s = Stokes::from_coefficient(q);
        let a2 = 1.5f64 * 1.5;
        assert!((s.s1 - a2 * (2.0 * chi).cos() * (2.0 * theta).cos()).abs() < 1e-12);
        assert!((s.s2 - a2 * (2.0 * chi).cos() * (2.0 * theta).sin()).abs() < 1e-12);
        assert!((s.s3 - a2 * (2.0 * chi).sin()).abs() < 1e-12);
    }

    #[test]
    fn instantaneous_stokes_has_no_j_leak() {
        let f = tone(300, 7.0, |p| Complex64::new(p.cos() * 1.2, 0.4 * (p + 0.3).sin()));
        let fp = quaternion_embed(&f);
        let st = instantaneous_stokes(&fp);
        for (q, s) in fp.samples.iter().zip(&st.samples) {
            let p = *q * q.involute(Axis::J, true);
            assert!(p.y.abs() <= 1e-12 * s.s0.max(f64::MIN_POSITIVE));
            assert!(s.polarization_defect().abs() <= 1e-10 * s.s0 * s.s0);
        }
    }
}
