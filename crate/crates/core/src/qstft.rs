//! Quaternion short-term Fourier transform.
//!
//! Coefficients are in continuous-transform units:
//! `Sf(u, ξ) ≈ ∫ f(t) g(t - u) e^{-jξt} dt` with `‖g‖₂ = 1`, so the
//! discrete window taps `w[m]` (unit `ℓ²` norm) enter as `g = w / √dt`.
//! With periodic boundaries and hop 1 the discrete inversion and both
//! conservation laws hold to round-off.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{quaternion_embed, ComplexSignal};
use crate::error::{invalid, Result};
use crate::grid::{self, stokes_grid, Analysis, GridKind, Lattice, StokesGrid, TFGrid, WindowKind};
use crate::qft::{signed_bin, Pairing, QftPlan, QuaternionSignal};
use crate::quaternion::{Axis, Quaternion};

/// Real symmetric analysis window with unit `ℓ²` norm and odd length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub kind: WindowKind,
    pub taps: Vec<f64>,
    /// Gaussian width in samples.
    pub sigma: Option<f64>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn half(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Tap at signed offset `m` from the center, zero outside the support.
    #[inline]
    pub fn at(&self, m: i64) -> f64 {
        let h = self.half() as i64;
        if m.abs() > h {
            0.0
        } else {
            self.taps[(m + h) as usize]
        }
    }

    /// Continuous-unit center value `g(0)`.
    pub fn g0(&self, dt: f64) -> f64 {
        self.taps[self.half()] / dt.sqrt()
    }

    /// Continuous-unit transform `ĝ(ν) = √dt Σ w[m] cos(ν m dt)`.
    pub fn ghat(&self, nu: f64, dt: f64) -> f64 {
        let h = self.half() as i64;
        let s: f64 = self
            .taps
            .iter()
            .enumerate()
            .map(|(i, &w)| w * (nu * (i as i64 - h) as f64 * dt).cos())
            .sum();
        s * dt.sqrt()
    }

    pub fn analysis(&self) -> Analysis {
        Analysis::Window {
            kind: self.kind,
            len: self.len(),
            sigma: self.sigma,
        }
    }

    /// Gaussian window truncated at ±4σ.
    pub fn gauss(sigma: f64) -> Result<Self> {
        let half = (4.0 * sigma).ceil().max(1.0) as usize;
        make_window(WindowKind::Gauss, 2 * half + 1, Some(sigma))
    }

    pub fn from_analysis(a: &Analysis) -> Result<Self> {
        match *a {
            Analysis::Window { kind, len, sigma } => make_window(kind, len, sigma),
            Analysis::Morlet { .. } => Err(invalid("grid was not computed with a window")),
        }
    }
}

pub fn make_window(kind: WindowKind, length: usize, sigma: Option<f64>) -> Result<Window> {
    if length < 3 || length.is_multiple_of(2) {
        return Err(invalid(format!("window length must be odd and at least 3, got {length}")));
    }
    let h = ((length - 1) / 2) as f64;
    let mut taps: Vec<f64> = match kind {
        WindowKind::Hann => (0..length)
            .map(|n| 0.5 * (1.0 - (2.0 * PI * (n + 1) as f64 / (length + 1) as f64).cos()))
            .collect(),
        WindowKind::Gauss => {
            let s = sigma.ok_or_else(|| invalid("gauss window needs sigma"))?;
            if !(s > 0.0 && s.is_finite()) {
                return Err(invalid(format!("gauss sigma must be positive, got {s}")));
            }
            let c = (PI * s * s).powf(-0.25);
            (0..length)
                .map(|n| {
                    let t = n as f64 - h;
                    c * (-t * t / (2.0 * s * s)).exp()
                })
                .collect()
        }
    };
    let norm = taps.iter().map(|w| w * w).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|w| *w /= norm);
    // enforce exact symmetry
    for n in 0..length / 2 {
        let avg = 0.5 * (taps[n] + taps[length - 1 - n]);
        taps[n] = avg;
        taps[length - 1 - n] = avg;
    }
    Ok(Window {
        kind,
        taps,
        sigma: if kind == WindowKind::Gauss { sigma } else { None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Circular windowing; exact discrete inversion and conservation.
    #[default]
    Periodic,
    /// Samples outside the record are taken as zero.
    ZeroPad,
}

/// How a `C_i` signal enters a quaternion transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lift {
    /// Analyze the embedding `f₊` and halve, giving `Sf = ½ Sf₊`.
    #[default]
    Embed,
    /// Analyze the `C_i` samples as they are.
    Direct,
}

/// Configured Q-STFT.
#[derive(Debug, Clone)]
pub struct Qstft {
    window: Window,
    hop: usize,
    boundary: Boundary,
}

impl Qstft {
    pub fn new(window: Window, hop: usize) -> Result<Self> {
        if hop == 0 {
            return Err(invalid("hop must be at least 1"));
        }
        Ok(Self {
            window,
            hop,
            boundary: Boundary::Periodic,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn forward(&self, f: &QuaternionSignal) -> Result<TFGrid> {
        self.analyze(f, false, 1.0)
    }

    pub fn forward_complex(&self, f: &ComplexSignal, lift: Lift) -> Result<TFGrid> {
        match lift {
            Lift::Embed => self.analyze(&quaternion_embed(f), true, 0.5),
            Lift::Direct => self.analyze(&f.to_quaternion(), false, 1.0),
        }
    }

    fn analyze(&self, f: &QuaternionSignal, lifted: bool, gain: f64) -> Result<TFGrid> {
        let n = f.len();
        if self.window.len() > n {
            return Err(invalid(format!(
                "window of {} taps is longer than the signal ({n} samples)",
                self.window.len()
            )));
        }
        let n_time = n.div_ceil(self.hop);
        let dw = 2.0 * PI / (n as f64 * f.dt);
        let axis: Vec<f64> = (0..n).map(|k| signed_bin(k, n) as f64 * dw).collect();
        // e^{-jξ t0} restores absolute-time phase when the record does not start at 0
        let origin: Option<Vec<Quaternion>> =
            (f.t0 != 0.0).then(|| axis.iter().map(|&w| Quaternion::exp_axis(Axis::J, -w * f.t0)).collect());
        let plan = QftPlan::new(n);
        let scale = gain * f.dt.sqrt();
        let h = self.window.half() as i64;

        let mut coeffs = vec![Quaternion::ZERO; n_time * n];
        coeffs.par_chunks_mut(n).enumerate().for_each_init(
            || (vec![Quaternion::ZERO; n], plan.workspace()),
            |(buf, ws), (c, col)| {
                let u = (c * self.hop) as i64;
                buf.fill(Quaternion::ZERO);
                for m in -h..=h {
                    let idx = u + m;
                    let idx = match self.boundary {
                        Boundary::Periodic => idx.rem_euclid(n as i64),
                        Boundary::ZeroPad if idx < 0 || idx >= n as i64 => continue,
                        Boundary::ZeroPad => idx,
                    } as usize;
                    buf[idx] += f.samples[idx] * self.window.at(m);
                }
                plan.forward_into(buf, col, ws);
                for (k, q) in col.iter_mut().enumerate() {
                    *q = match &origin {
                        Some(ph) => *q * ph[k] * scale,
                        None => *q * scale,
                    };
                }
            },
        );

        let lattice = Lattice {
            kind: GridKind::Stft,
            n_time,
            n_bins: n,
            hop: self.hop,
            dt: f.dt,
            t0: f.t0,
            n_samples: n,
            axis,
            analysis: self.window.analysis(),
            lifted,
        };
        TFGrid::new(lattice, coeffs)
    }

    /// Discrete inversion `f = (1/2π) ∬ Sf g_{u,ξ} du dξ`.
    ///
    /// Exact for hop 1 on a full-spectrum periodic grid; larger hops give
    /// an approximation. Lifted grids return the embedding `f₊`.
    pub fn inverse(&self, grid: &TFGrid) -> Result<QuaternionSignal> {
        let lat = &grid.lattice;
        if !lat.is_full_spectrum() {
            return Err(invalid("inversion needs a full-spectrum stft grid in native bin order"));
        }
        let n = lat.n_samples;
        let plan = QftPlan::new(n);
        let origin: Option<Vec<Quaternion>> =
            (lat.t0 != 0.0).then(|| lat.axis.iter().map(|&w| Quaternion::exp_axis(Axis::J, w * lat.t0)).collect());
        let h = self.window.half() as i64;
        let gain = if lat.lifted { 2.0 } else { 1.0 };
        let scale = gain * lat.hop as f64 / lat.dt.sqrt();

        // each column touches only the window support, so partial sums are
        // accumulated per thread and added at the end
        let out = (0..lat.n_time)
            .into_par_iter()
            .fold(
                || {
                    (
                        vec![Quaternion::ZERO; n],
                        vec![Quaternion::ZERO; n],
                        vec![Quaternion::ZERO; n],
                        plan.workspace(),
                    )
                },
                |(mut acc, mut col, mut seg, mut ws), c| {
                    col.copy_from_slice(grid.column(c));
                    if let Some(ph) = &origin {
                        col.iter_mut().zip(ph).for_each(|(q, p)| *q *= *p);
                    }
                    plan.inverse_into(&col, &mut seg, &mut ws);
                    let u = (c * lat.hop) as i64;
                    for m in -h..=h {
                        let idx = u + m;
                        let idx = match self.boundary {
                            Boundary::Periodic => idx.rem_euclid(n as i64),
                            Boundary::ZeroPad if idx < 0 || idx >= n as i64 => continue,
                            Boundary::ZeroPad => idx,
                        } as usize;
                        acc[idx] += seg[idx] * (self.window.at(m) * scale);
                    }
                    (acc, col, seg, ws)
                },
            )
            .map(|(acc, ..)| acc)
            .reduce(
                || vec![Quaternion::ZERO; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        QuaternionSignal::with_origin(out, lat.dt, lat.t0)
    }
}

pub fn qstft_forward(f: &QuaternionSignal, g: &Window, hop: usize) -> Result<TFGrid> {
    Qstft::new(g.clone(), hop)?.forward(f)
}

pub fn qstft_inverse(grid: &TFGrid, g: &Window) -> Result<QuaternionSignal> {
    Qstft::new(g.clone(), grid.lattice.hop)?.inverse(grid)
}

/// Time-frequency Stokes parameters `|Sf|²` and `Sf Sf^{j̄}`.
pub fn polarization_spectrogram(grid: &TFGrid) -> StokesGrid {
    stokes_grid(grid)
}

/// `(1/2π) ∬ Sf · pairing(Sf) du dξ` over a full-spectrum grid.
pub fn stft_pair_integral(grid: &TFGrid, pairing: Pairing) -> Quaternion {
    let lat = &grid.lattice;
    let du = lat.hop as f64 * lat.dt;
    let dxi = 2.0 * PI / (lat.n_samples as f64 * lat.dt);
    grid::weighted_pair_sum(grid, pairing, |_, _| du * dxi / (2.0 * PI))
}

/// Periodic inner product `⟨g_{u,ξ}, g_{u0,ξ0}⟩` of two atoms on an
/// `n`-sample record; `u`, `u0` are sample indices.
pub fn stft_kernel(g: &Window, n: usize, dt: f64, u: usize, xi: f64, u0: usize, xi0: f64) -> Quaternion {
    let h = g.half() as i64;
    let mut acc = Quaternion::ZERO;
    for m in -h..=h {
        let idx = (u as i64 + m).rem_euclid(n as i64);
        let m0 = {
            let d = (idx - u0 as i64).rem_euclid(n as i64);
            if d > n as i64 / 2 {
                d - n as i64
            } else {
                d
            }
        };
        let w = g.at(m) * g.at(m0);
        if w != 0.0 {
            acc += Quaternion::exp_axis(Axis::J, (xi - xi0) * idx as f64 * dt) * w;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::euler_compose;
    use crate::quaternion::EulerTriplet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(seed: u64, n: usize, dt: f64) -> QuaternionSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QuaternionSignal::new(
            (0..n)
                .map(|_| {
                    Quaternion::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect(),
            dt,
        )
        .unwrap()
    }

    fn rel_l2(a: &[Quaternion], b: &[Quaternion]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(&x, &y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|q| q.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn window_shapes() {
        let w = make_window(WindowKind::Hann, 3, None).unwrap();
        let n = (0.25f64 + 1.0 + 0.25).sqrt();
        assert!((w.taps[0] - 0.5 / n).abs() < 1e-15 && (w.taps[1] - 1.0 / n).abs() < 1e-15);
        for (kind, len, sigma) in [
            (WindowKind::Hann, 101, None),
            (WindowKind::Gauss, 31, Some(4.0)),
            (WindowKind::Hann, 31, None),
        ] {
            let w = make_window(kind, len, sigma).unwrap();
            assert!((w.taps.iter().map(|t| t * t).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((0..len).all(|i| w.taps[i] == w.taps[len - 1 - i]));
        }
        let g = Window::gauss(3.0).unwrap();
        assert_eq!(g.len(), 25);
        let shape = |t: f64| (-t * t / 18.0).exp();
        assert!((g.taps[12] / g.taps[15] - shape(0.0) / shape(3.0)).abs() < 1e-12);
        assert!(make_window(WindowKind::Hann, 4, None).is_err());
        assert!(make_window(WindowKind::Gauss, 5, None).is_err());
    }

    #[test]
    fn zero_signal_gives_zero_grid() {
        let f = QuaternionSignal::new(vec![Quaternion::ZERO; 64], 0.1).unwrap();
        let g = make_window(WindowKind::Hann, 15, None).unwrap();
        let grid = qstft_forward(&f, &g, 1).unwrap();
        assert!(grid.coeffs.iter().all(|q| *q == Quaternion::ZERO));
        assert!(qstft_inverse(&grid, &g).unwrap().samples.iter().all(|q| *q == Quaternion::ZERO));
        assert!(polarization_spectrogram(&grid).cells.iter().all(|s| s.s0 == 0.0 && s.s1 == 0.0));
    }

    #[test]
    fn exact_inversion_with_hop_one_and_offset_origin() {
        let mut f = random_signal(1, 128, 0.01);
        f.t0 = 0.37;
        let g = make_window(WindowKind::Hann, 31, None).unwrap();
        let grid = qstft_forward(&f, &g, 1).unwrap();
        let back = qstft_inverse(&grid, &g).unwrap();
        assert!(rel_l2(&back.samples, &f.samples) < 1e-10);
        assert_eq!(back.t0, f.t0);
    }

    #[test]
    fn hop_four_reconstruction_of_smooth_chirp() {
        let n = 1024;
        let dt = 1.0 / n as f64;
        let f = QuaternionSignal::new(
            (0..n)
                .map(|m| {
                    let t = m as f64 * dt;
                    Quaternion::new(0.8, 0.2, 0.0, 0.0) * Quaternion::exp_axis(Axis::J, 2.0 * PI * (60.0 * t + 40.0 * t * t))
                })
                .collect(),
            dt,
        )
        .unwrap();
        let g = make_window(WindowKind::Hann, 101, None).unwrap();
        let grid = qstft_forward(&f, &g, 4).unwrap();
        let back = qstft_inverse(&grid, &g).unwrap();
        assert!(rel_l2(&back.samples, &f.samples) < 1e-3);
    }

    #[test]
    fn monochromatic_closed_form() {
        let n = 256;
        let dt = 1.0 / n as f64;
        let w0 = 2.0 * PI * 40.0;
        let a0 = euler_compose(&EulerTriplet::new(1.3, 0.4, 0.3, 0.0));
        let f = QuaternionSignal::new((0..n).map(|m| a0 * Quaternion::exp_axis(Axis::J, w0 * m as f64 * dt)).collect(), dt).unwrap();
        let g = make_window(WindowKind::Hann, 31, None).unwrap();
        let grid = qstft_forward(&f, &g, 1).unwrap();
        for u in [0usize, 17, 128, 255] {
            let t = u as f64 * dt;
            for k in 36..=44 {
                let xi = grid.lattice.axis[k];
                let expected = a0 * g.ghat(xi - w0, dt) * Quaternion::exp_axis(Axis::J, -(xi - w0) * t);
                let got = grid.get(u, k);
                assert!((got - expected).norm() < 1e-9 * expected.norm());
            }
        }
    }

    #[test]
    fn kernel_values() {
        let g = make_window(WindowKind::Hann, 9, None).unwrap();
        let k = stft_kernel(&g, 64, 0.1, 10, 2.0, 10, 2.0);
        assert!((k - Quaternion::ONE).max_abs() < 1e-12);
        assert_eq!(stft_kernel(&g, 64, 0.1, 10, 2.0, 30, 1.0), Quaternion::ZERO);
        // periodic wrap puts columns 1 and 63 within one window support
        assert!(stft_kernel(&g, 64, 0.1, 1, 0.0, 63, 0.0).w > 0.0);
    }

    #[test]
    fn reproducing_kernel_double_sum() {
        let n = 32;
        let dt = 0.1;
        let f = random_signal(4, n, dt);
        let g = make_window(WindowKind::Hann, 7, None).unwrap();
        let grid = qstft_forward(&f, &g, 1).unwrap();
        let dxi = 2.0 * PI / (n as f64 * dt);
        for (u0, k0) in [(3usize, 5usize), (20, 17), (31, 0)] {
            let xi0 = grid.lattice.axis[k0];
            let mut acc = Quaternion::ZERO;
            for u in 0..n {
                for k in 0..n {
                    let kern = stft_kernel(&g, n, dt, u, grid.lattice.axis[k], u0, xi0);
                    acc += grid.get(u, k) * kern * (dt * dxi / (2.0 * PI));
                }
            }
            assert!((acc - grid.get(u0, k0)).norm() < 1e-6 * (1.0 + grid.get(u0, k0).norm()));
        }
    }

    #[test]
    fn zero_pad_boundary_differs_only_near_edges() {
        let f = random_signal(8, 128, 1.0);
        let g = make_window(WindowKind::Hann, 21, None).unwrap();
        let per = Qstft::new(g.clone(), 1).unwrap().forward(&f).unwrap();
        let zp = Qstft::new(g, 1).unwrap().with_boundary(Boundary::ZeroPad).forward(&f).unwrap();
        assert_eq!(per.column(64), zp.column(64));
        assert_ne!(per.column(2), zp.column(2));
    }

    #[test]
    fn direct_ci_analysis_is_i_hermitian() {
        let n = 64;
        let f = ComplexSignal::new(
            (0..n)
                .map(|m| rustfft::num_complex::Complex64::new((m as f64 * 0.3).sin(), (m as f64 * 0.7).cos()))
                .collect(),
            1.0,
        )
        .unwrap();
        let g = make_window(WindowKind::Hann, 15, None).unwrap();
        let grid = Qstft::new(g, 1).unwrap().forward_complex(&f, Lift::Direct).unwrap();
        for u in [0, 10, 40] {
            for k in 1..n {
                let a = grid.get(u, n - k);
                let b = -(Quaternion::I * grid.get(u, k) * Quaternion::I);
                assert!((a - b).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        let g = make_window(WindowKind::Hann, 33, None).unwrap();
        assert!(Qstft::new(g.clone(), 0).is_err());
        let short = QuaternionSignal::new(vec![Quaternion::ONE; 16], 1.0).unwrap();
        assert!(qstft_forward(&short, &g, 1).is_err());
        let f = QuaternionSignal::new(vec![Quaternion::ONE; 64], 1.0).unwrap();
        let grid = qstft_forward(&f, &g, 1).unwrap().one_sided();
        assert!(qstft_inverse(&grid, &g).is_err());
    }
}
