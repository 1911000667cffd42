//! Synthetic modulated elliptical signals, including the worked examples.
//!
//! A component is `a(t)[cos φ(t) cos χ(t) + i sin φ(t) sin χ(t)]` with
//! `a = |a| e^{iθ}`. Curves are parametric so analytic derivatives are
//! available as ground truth.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embedding::{mes_value, ComplexSignal};
use crate::error::{invalid, Error, Result};
use crate::grid::{Analysis, WindowKind};
use crate::quaternion::EulerTriplet;

/// Real function of time with closed-form first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case")]
pub enum Curve {
    /// `c0 + c1 t + c2 t²`.
    Poly { c0: f64, c1: f64, c2: f64 },
    /// `c / (t_s - t)`.
    Hyperbolic { c: f64, t_s: f64 },
}

impl Curve {
    pub fn constant(c: f64) -> Self {
        Curve::Poly { c0: c, c1: 0.0, c2: 0.0 }
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Curve::Poly { c0, c1, c2: 0.0 }
    }

    pub fn quadratic(c0: f64, c1: f64, c2: f64) -> Self {
        Curve::Poly { c0, c1, c2 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Curve::Poly { c0, c1, c2 } => c0 + t * (c1 + t * c2),
            Curve::Hyperbolic { c, t_s } => c / (t_s - t),
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match *self {
            Curve::Poly { c1, c2, .. } => c1 + 2.0 * c2 * t,
            Curve::Hyperbolic { c, t_s } => c / (t_s - t).powi(2),
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match *self {
            Curve::Poly { c2, .. } => 2.0 * c2,
            Curve::Hyperbolic { c, t_s } => 2.0 * c / (t_s - t).powi(3),
        }
    }
}

/// One modulated elliptical component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// `|a|(t)`.
    pub modulus: Curve,
    /// `arg a(t)`, the ellipse orientation.
    pub theta: Curve,
    pub chi: Curve,
    pub phi: Curve,
}

impl Component {
    pub fn triplet(&self, t: f64) -> EulerTriplet {
        EulerTriplet::new(self.modulus.value(t), self.theta.value(t), self.chi.value(t), self.phi.value(t))
    }

    pub fn value(&self, t: f64) -> Complex64 {
        mes_value(&self.triplet(t))
    }

    /// Instantaneous angular frequency `φ'(t)`.
    pub fn inst_freq(&self, t: f64) -> f64 {
        self.phi.d1(t)
    }

    pub fn chirp_rate(&self, t: f64) -> f64 {
        self.phi.d2(t)
    }
}

/// Sampled superposition of MES components on `t_n = n · duration / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AMFMSpec {
    pub duration: f64,
    pub n_samples: usize,
    pub components: Vec<Component>,
}

impl AMFMSpec {
    pub fn single(duration: f64, n_samples: usize, component: Component) -> Self {
        Self {
            duration,
            n_samples,
            components: vec![component],
        }
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.n_samples as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// First sample time at which some component's `|φ'|` reaches the
    /// Nyquist frequency, or the record end if none does.
    pub fn resolvable_until(&self) -> f64 {
        let nyquist = PI / self.dt();
        (0..self.n_samples)
            .map(|n| self.time(n))
            .find(|&t| self.components.iter().any(|c| c.inst_freq(t).abs() >= nyquist))
            .unwrap_or(self.duration)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(invalid(format!("need at least 2 samples, got {}", self.n_samples)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if self.components.is_empty() {
            return Err(invalid("signal needs at least one component"));
        }
        let tol = 1e-12;
        for (c, comp) in self.components.iter().enumerate() {
            for n in 0..self.n_samples {
                let t = self.time(n);
                let chi = comp.chi.value(t);
                if !(chi.abs() <= FRAC_PI_4 + tol) {
                    return Err(invalid(format!("component {c}: chi = {chi} outside [-pi/4, pi/4] at t = {t}")));
                }
                let a = comp.modulus.value(t);
                if !(a >= 0.0) {
                    return Err(invalid(format!("component {c}: amplitude {a} is negative at t = {t}")));
                }
            }
        }
        Ok(())
    }
}

pub fn gen_amfm(spec: &AMFMSpec) -> Result<ComplexSignal> {
    spec.validate()?;
    let samples = (0..spec.n_samples)
        .map(|n| {
            let t = spec.time(n);
            spec.components.iter().map(|c| c.value(t)).sum()
        })
        .collect();
    ComplexSignal::new(samples, spec.dt())
}

pub const EXAMPLE_NAMES: [&str; 4] = [
    "two_linear_chirps",
    "two_hyperbolic_chirps",
    "mono_polarized",
    "polarized_linear_chirp",
];

/// A named example with the analysis it is meant to be viewed with.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperExample {
    pub name: &'static str,
    pub spec: AMFMSpec,
    pub analysis: Analysis,
}

/// `a₀ e^{iθ₀}`-oriented ellipse at constant frequency `ω₀` on `[0, 1)`.
pub fn mono_polarized(n_samples: usize, omega0: f64, theta0: f64, chi0: f64) -> AMFMSpec {
    AMFMSpec::single(
        1.0,
        n_samples,
        Component {
            modulus: Curve::constant(1.0),
            theta: Curve::constant(theta0),
            chi: Curve::constant(chi0),
            phi: Curve::linear(0.0, omega0),
        },
    )
}

pub fn paper_example(name: &str) -> Result<PaperExample> {
    let n = 1024;
    let hann101 = Analysis::Window {
        kind: WindowKind::Hann,
        len: 101,
        sigma: None,
    };
    let ex = match name {
        "two_linear_chirps" => PaperExample {
            name: "two_linear_chirps",
            spec: AMFMSpec {
                duration: 1.0,
                n_samples: n,
                components: vec![
                    Component {
                        modulus: Curve::constant(1.0),
                        theta: Curve::constant(FRAC_PI_4),
                        chi: Curve::linear(FRAC_PI_6, -1.0),
                        phi: Curve::linear(50.0 * PI, 250.0 * PI),
                    },
                    Component {
                        modulus: Curve::constant(1.0),
                        theta: Curve::linear(0.0, 10.0 * FRAC_PI_4),
                        chi: Curve::constant(0.0),
                        phi: Curve::linear(150.0 * PI, 250.0 * PI),
                    },
                ],
            },
            analysis: hann101,
        },
        "two_hyperbolic_chirps" => PaperExample {
            name: "two_hyperbolic_chirps",
            spec: AMFMSpec {
                duration: 1.0,
                n_samples: n,
                components: vec![
                    Component {
                        modulus: Curve::constant(1.0),
                        theta: Curve::constant(-FRAC_PI_3),
                        chi: Curve::constant(FRAC_PI_6),
                        phi: Curve::Hyperbolic { c: 15.0 * PI, t_s: 0.8 },
                    },
                    Component {
                        modulus: Curve::constant(0.8),
                        theta: Curve::linear(0.0, 5.0),
                        chi: Curve::constant(-PI / 10.0),
                        phi: Curve::Hyperbolic { c: 5.0 * PI, t_s: 0.8 },
                    },
                ],
            },
            analysis: Analysis::Morlet { eta: 5.0 },
        },
        "mono_polarized" => PaperExample {
            name: "mono_polarized",
            spec: mono_polarized(n, 2.0 * PI * 64.0, PI / 5.0, FRAC_PI_8),
            analysis: hann101,
        },
        "polarized_linear_chirp" => PaperExample {
            name: "polarized_linear_chirp",
            spec: AMFMSpec::single(
                1.0,
                n,
                Component {
                    modulus: Curve::constant(1.0),
                    theta: Curve::constant(FRAC_PI_3),
                    chi: Curve::constant(-FRAC_PI_8),
                    phi: Curve::quadratic(0.0, 2.0 * PI * 50.0, 2.0 * PI * 200.0),
                },
            ),
            analysis: Analysis::Window {
                kind: WindowKind::Gauss,
                len: 321,
                sigma: Some(40.0),
            },
        },
        other => return Err(Error::UnknownExample(other.to_string())),
    };
    Ok(ex)
}

pub fn gen_paper_example(name: &str) -> Result<ComplexSignal> {
    gen_amfm(&paper_example(name)?.spec)
}
