//! Quaternion continuous wavelet transform with a `C_j`-valued Morlet
//! wavelet.
//!
//! Scales are in seconds and the wavelet frequency `η` is dimensionless:
//! `ψ_s(t) = s^{-1/2} ψ(t/s)` peaks at `ω = η/s` rad/s. Each scale row is
//! the inverse QFT of `F(ω) conj(ψ̂_s(ω))`, so row spectra are exact
//! discrete band-pass products.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::embedding::{quaternion_embed, ComplexSignal};
use crate::error::{invalid, Result};
use crate::grid::{self, stokes_grid, Analysis, GridKind, Lattice, StokesGrid, TFGrid};
use crate::qft::{Pairing, QftPlan, QuaternionSignal};
use crate::qstft::Lift;
use crate::quaternion::Quaternion;

/// Smallest accepted Morlet center frequency.
pub const MIN_ETA: f64 = 4.0;

/// Analytic Morlet wavelet, `ψ̂(ω) = √2 π^{1/4} e^{-(ω-η)²/2}` for `ω > 0`
/// and zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelet {
    pub eta: f64,
    /// Admissibility constant of the spectral evaluator.
    pub c_psi: f64,
}

pub fn make_wavelet(eta: f64) -> Result<Wavelet> {
    if !(eta >= MIN_ETA && eta.is_finite()) {
        return Err(invalid(format!("morlet eta must be at least {MIN_ETA}, got {eta}")));
    }
    let mut w = Wavelet { eta, c_psi: 0.0 };
    let hi = eta + 12.0;
    let steps = 1usize << 16;
    let grid: Vec<f64> = (1..=steps).map(|i| hi * i as f64 / steps as f64).collect();
    w.c_psi = admissibility_constant(&w, &grid);
    Ok(w)
}

impl Wavelet {
    /// `ψ̂(ω)`, real and nonnegative.
    #[inline]
    pub fn spectrum(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            0.0
        } else {
            let d = omega - self.eta;
            2f64.sqrt() * PI.powf(0.25) * (-0.5 * d * d).exp()
        }
    }

    /// `ψ̂_s(ω) = √s ψ̂(sω)`.
    #[inline]
    pub fn scaled_spectrum(&self, s: f64, omega: f64) -> f64 {
        s.sqrt() * self.spectrum(s * omega)
    }

    /// Untruncated time form `π^{-1/4} e^{-t²/2} e^{jηt}` as a `C_j` number.
    pub fn time(&self, t: f64) -> Complex64 {
        Complex64::from_polar(PI.powf(-0.25) * (-0.5 * t * t).exp(), self.eta * t)
    }

    /// Envelope value `g(0)`.
    pub fn g0(&self) -> f64 {
        PI.powf(-0.25)
    }

    pub fn analysis(&self) -> Analysis {
        Analysis::Morlet { eta: self.eta }
    }

    pub fn from_analysis(a: &Analysis) -> Result<Self> {
        match *a {
            Analysis::Morlet { eta } => make_wavelet(eta),
            Analysis::Window { .. } => Err(invalid("grid was not computed with a wavelet")),
        }
    }
}

/// Trapezoid estimate of `∫₀^∞ |ψ̂(ω)|²/ω dω` over the given increasing
/// positive grid.
pub fn admissibility_constant(psi: &Wavelet, freq_grid: &[f64]) -> f64 {
    let f = |w: f64| psi.spectrum(w).powi(2) / w;
    freq_grid.windows(2).map(|p| 0.5 * (p[1] - p[0]) * (f(p[0]) + f(p[1]))).sum()
}

/// Log-spaced scales in seconds, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    pub scales: Vec<f64>,
    pub voices_per_octave: usize,
}

impl ScaleGrid {
    /// `s_min · 2^{m/V}` up to the first scale reaching `s_max`.
    pub fn log_spaced(s_min: f64, s_max: f64, voices_per_octave: usize) -> Result<Self> {
        if !(s_min > 0.0 && s_max > s_min && s_max.is_finite()) {
            return Err(invalid(format!(
                "scale bounds must satisfy 0 < s_min < s_max, got {s_min}, {s_max}"
            )));
        }
        if voices_per_octave == 0 {
            return Err(invalid("voices per octave must be at least 1"));
        }
        let v = voices_per_octave as f64;
        let count = (v * (s_max / s_min).log2() - 1e-9).ceil() as usize + 1;
        let scales = (0..count).map(|m| s_min * (m as f64 / v).exp2()).collect();
        Ok(Self { scales, voices_per_octave })
    }

    /// Scales whose wavelet passbands cover angular frequencies in
    /// `[omega_lo, omega_hi]`, out to `|ψ̂|²` tails near `e^{-20}`.
    pub fn covering(psi: &Wavelet, omega_lo: f64, omega_hi: f64, voices_per_octave: usize) -> Result<Self> {
        if !(omega_lo > 0.0 && omega_hi > omega_lo) {
            return Err(invalid(format!(
                "frequency band must satisfy 0 < lo < hi, got {omega_lo}, {omega_hi}"
            )));
        }
        let lo = (psi.eta - 4.5).max(psi.eta / 10.0);
        Self::log_spaced(lo / omega_hi, (psi.eta + 4.5) / omega_lo, voices_per_octave)
    }

    /// Default band for an `n`-sample record: Nyquist down to two bins.
    pub fn for_record(psi: &Wavelet, n: usize, dt: f64, voices_per_octave: usize) -> Result<Self> {
        let dw = 2.0 * PI / (n as f64 * dt);
        Self::log_spaced(psi.eta / (PI / dt), psi.eta / (2.0 * dw), voices_per_octave)
    }

    /// Takes arbitrary positive, strictly increasing scales.
    pub fn from_scales(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(invalid("scales must be positive and finite"));
        }
        if scales.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("scales must be strictly increasing"));
        }
        let voices = if scales.len() > 1 {
            (1.0 / (scales[1] / scales[0]).log2()).round().max(1.0) as usize
        } else {
            1
        };
        Ok(Self {
            scales,
            voices_per_octave: voices,
        })
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Trapezoid weights in `log s`.
    pub fn log_weights(&self) -> Vec<f64> {
        log_weights(&self.scales)
    }
}

fn log_weights(scales: &[f64]) -> Vec<f64> {
    let n = scales.len();
    if n < 2 {
        return vec![1.0; n];
    }
    let l: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    (0..n)
        .map(|m| {
            let left = if m > 0 { l[m] - l[m - 1] } else { 0.0 };
            let right = if m + 1 < n { l[m + 1] - l[m] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Configured Q-CWT.
#[derive(Debug, Clone)]
pub struct Qcwt {
    psi: Wavelet,
    scales: ScaleGrid,
    hop: usize,
}

impl Qcwt {
    pub fn new(psi: Wavelet, scales: ScaleGrid) -> Self {
        Self { psi, scales, hop: 1 }
    }

    pub fn with_hop(mut self, hop: usize) -> Result<Self> {
        if hop == 0 {
            return Err(invalid("hop must be at least 1"));
        }
        self.hop = hop;
        Ok(self)
    }

    pub fn wavelet(&self) -> &Wavelet {
        &self.psi
    }

    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }

    pub fn forward(&self, f: &QuaternionSignal) -> TFGrid {
        self.analyze(f, false, 1.0)
    }

    pub fn forward_complex(&self, f: &ComplexSignal, lift: Lift) -> TFGrid {
        match lift {
            Lift::Embed => self.analyze(&quaternion_embed(f), true, 0.5),
            Lift::Direct => self.analyze(&f.to_quaternion(), false, 1.0),
        }
    }

    /// Per-scale spectra `F[k] conj(ψ̂_s(ω_k))`, one vector per scale.
    pub fn band_products(&self, f: &QuaternionSignal) -> Vec<Vec<Quaternion>> {
        let n = f.len();
        let spectrum = QftPlan::new(n).forward(&f.samples);
        let omegas = bin_frequencies(n, f.dt);
        self.scales
            .scales
            .iter()
            .map(|&s| {
                spectrum
                    .iter()
                    .zip(&omegas)
                    .map(|(&q, &w)| q * self.psi.scaled_spectrum(s, w))
                    .collect()
            })
            .collect()
    }

    fn analyze(&self, f: &QuaternionSignal, lifted: bool, gain: f64) -> TFGrid {
        let n = f.len();
        let plan = QftPlan::new(n);
        let spectrum = plan.forward(&f.samples);
        let omegas = bin_frequencies(n, f.dt);
        let rows: Vec<Vec<Quaternion>> = self
            .scales
            .scales
            .par_iter()
            .map(|&s| {
                let prod: Vec<Quaternion> = spectrum
                    .iter()
                    .zip(&omegas)
                    .map(|(&q, &w)| q * (gain * self.psi.scaled_spectrum(s, w)))
                    .collect();
                plan.inverse(&prod)
            })
            .collect();
        let n_time = n.div_ceil(self.hop);
        let nb = self.scales.len();
        let mut coeffs = vec![Quaternion::ZERO; n_time * nb];
        for (b, row) in rows.iter().enumerate() {
            for c in 0..n_time {
                coeffs[c * nb + b] = row[c * self.hop];
            }
        }
        let lattice = Lattice {
            kind: GridKind::Cwt,
            n_time,
            n_bins: nb,
            hop: self.hop,
            dt: f.dt,
            t0: f.t0,
            n_samples: n,
            axis: self.scales.scales.clone(),
            analysis: self.psi.analysis(),
            lifted,
        };
        TFGrid { lattice, coeffs }
    }
}

fn bin_frequencies(n: usize, dt: f64) -> Vec<f64> {
    let dw = 2.0 * PI / (n as f64 * dt);
    (0..n).map(|k| crate::qft::signed_bin(k, n) as f64 * dw).collect()
}

pub fn qcwt_forward(f: &QuaternionSignal, psi: &Wavelet, scales: &ScaleGrid) -> TFGrid {
    Qcwt::new(*psi, scales.clone()).forward(f)
}

/// Discretized `C_ψ^{-1} ∬ Wf(u,s) ψ_s(t-u) du ds/s²` with trapezoid
/// weights in `log s`. Needs hop 1. Lifted grids return `f₊`.
pub fn qcwt_inverse(grid: &TFGrid, psi: &Wavelet) -> Result<QuaternionSignal> {
    let lat = &grid.lattice;
    if lat.kind != GridKind::Cwt {
        return Err(invalid("expected a cwt grid"));
    }
    if lat.hop != 1 || lat.n_time != lat.n_samples {
        return Err(invalid("cwt inversion needs every time column (hop 1)"));
    }
    let n = lat.n_samples;
    let plan = QftPlan::new(n);
    let omegas = bin_frequencies(n, lat.dt);
    let weights = log_weights(&lat.axis);
    let gain = if lat.lifted { 2.0 } else { 1.0 };
    let nb = lat.n_bins;
    let acc = (0..nb)
        .into_par_iter()
        .map(|b| {
            let s = lat.axis[b];
            let row: Vec<Quaternion> = (0..n).map(|u| grid.coeffs[u * nb + b]).collect();
            let c = gain * weights[b] / (s * psi.c_psi);
            plan.forward(&row)
                .into_iter()
                .zip(&omegas)
                .map(|(q, &w)| q * (c * psi.scaled_spectrum(s, w)))
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![Quaternion::ZERO; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    QuaternionSignal::with_origin(plan.inverse(&acc), lat.dt, lat.t0)
}

/// Time-scale Stokes parameters `|Wf|²` and `Wf Wf^{j̄}`.
pub fn polarization_scalogram(grid: &TFGrid) -> StokesGrid {
    stokes_grid(grid)
}

/// `C_ψ^{-1} ∬ Wf · pairing(Wf) du ds/s²`, the scalogram side of the
/// energy and polarization conservation laws.
pub fn cwt_pair_integral(grid: &TFGrid, psi: &Wavelet, pairing: Pairing) -> Quaternion {
    let lat = &grid.lattice;
    let weights = log_weights(&lat.axis);
    let du = lat.hop as f64 * lat.dt;
    grid::weighted_pair_sum(grid, pairing, |_, b| du * weights[b] / (lat.axis[b] * psi.c_psi))
}
