//! Time-frequency and time-scale lattices shared by the transforms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qft::Pairing;
use crate::quaternion::{Axis, Quaternion};

/// Stokes parameters of one fully polarized coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stokes {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Stokes {
    /// Reads `S1 + i S2 - k S3` from `q · q^{j̄}` and `S0 = |q|²`.
    #[inline]
    pub fn from_coefficient(q: Quaternion) -> Self {
        let p = polarization_product(q);
        Self {
            s0: q.norm_sqr(),
            s1: p.w,
            s2: p.x,
            s3: -p.z,
        }
    }

    /// `S0² - (S1² + S2² + S3²)`; zero for fully polarized states.
    pub fn polarization_defect(&self) -> f64 {
        self.s0 * self.s0 - (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            s0: a[0],
            s1: a[1],
            s2: a[2],
            s3: a[3],
        }
    }
}

/// `q · q^{j̄}`, whose `j` component vanishes identically.
#[inline]
pub fn polarization_product(q: Quaternion) -> Quaternion {
    q * q.involute(Axis::J, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Stft,
    Cwt,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Stft => "stft",
            GridKind::Cwt => "cwt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Gauss,
}

/// Analysis atom a grid was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "lowercase")]
pub enum Analysis {
    Window {
        kind: WindowKind,
        len: usize,
        /// Gaussian width in samples.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Morlet {
        eta: f64,
    },
}

/// Axis metadata shared by coefficient and Stokes grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub kind: GridKind,
    pub n_time: usize,
    pub n_bins: usize,
    /// Column spacing in samples.
    pub hop: usize,
    /// Sample interval of the analyzed signal, s.
    pub dt: f64,
    /// Time of the first analyzed sample, s.
    pub t0: f64,
    /// Length of the analyzed signal.
    pub n_samples: usize,
    /// Angular frequency per bin (stft, rad/s) or scale per bin (cwt, s).
    pub axis: Vec<f64>,
    pub analysis: Analysis,
    /// True when a `C_i` signal was analyzed through its embedding, in which
    /// case coefficients carry the factor `1/2`.
    pub lifted: bool,
}

impl Lattice {
    pub fn cells(&self) -> usize {
        self.n_time * self.n_bins
    }

    /// Time of column `u`, s.
    pub fn time(&self, u: usize) -> f64 {
        self.t0 + (u * self.hop) as f64 * self.dt
    }

    /// Angular frequency associated with bin `b`, rad/s. Scales map through
    /// the peak-frequency convention `ω = η/s`.
    pub fn frequency(&self, b: usize) -> f64 {
        match (self.kind, self.analysis) {
            (GridKind::Cwt, Analysis::Morlet { eta }) => eta / self.axis[b],
            _ => self.axis[b],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis.len() != self.n_bins {
            return Err(invalid(format!("axis has {} values for {} bins", self.axis.len(), self.n_bins)));
        }
        if self.hop == 0 {
            return Err(invalid("hop must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        Ok(())
    }

    /// True when the bins form a complete DFT in native order.
    pub fn is_full_spectrum(&self) -> bool {
        if self.kind != GridKind::Stft || self.n_bins != self.n_samples {
            return false;
        }
        let dw = 2.0 * PI / (self.n_samples as f64 * self.dt);
        self.axis.iter().enumerate().all(|(k, &w)| {
            let expected = crate::qft::signed_bin(k, self.n_samples) as f64 * dw;
            (w - expected).abs() <= 1e-9 * dw.max(expected.abs())
        })
    }
}

/// Quaternion coefficients on a lattice, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TFGrid {
    pub lattice: Lattice,
    pub coeffs: Vec<Quaternion>,
}

impl TFGrid {
    pub fn new(lattice: Lattice, coeffs: Vec<Quaternion>) -> Result<Self> {
        lattice.validate()?;
        if coeffs.len() != lattice.cells() {
            return Err(invalid(format!("grid expects {} cells, got {}", lattice.cells(), coeffs.len())));
        }
        Ok(Self { lattice, coeffs })
    }

    #[inline]
    pub fn get(&self, u: usize, b: usize) -> Quaternion {
        self.coeffs[u * self.lattice.n_bins + b]
    }

    pub fn column(&self, u: usize) -> &[Quaternion] {
        let nb = self.lattice.n_bins;
        &self.coeffs[u * nb..(u + 1) * nb]
    }

    /// Keeps only the bins selected by `keep`, in their current order.
    pub fn select_bins(&self, keep: &[usize]) -> Self {
        let mut lattice = self.lattice.clone();
        lattice.axis = keep.iter().map(|&b| self.lattice.axis[b]).collect();
        lattice.n_bins = keep.len();
        let coeffs = (0..self.lattice.n_time)
            .flat_map(|u| keep.iter().map(move |&b| (u, b)))
            .map(|(u, b)| self.get(u, b))
            .collect();
        Self { lattice, coeffs }
    }

    /// Nonnegative-frequency bins `0..=N/2` of an stft grid.
    pub fn one_sided(&self) -> Self {
        let keep: Vec<usize> = (0..self.lattice.n_bins).filter(|&b| self.lattice.axis[b] >= 0.0).collect();
        let mut sorted = keep;
        sorted.sort_by(|&a, &b| self.lattice.axis[a].total_cmp(&self.lattice.axis[b]));
        self.select_bins(&sorted)
    }

    /// Bins reordered by increasing frequency.
    pub fn centered(&self) -> Self {
        let mut order: Vec<usize> = (0..self.lattice.n_bins).collect();
        order.sort_by(|&a, &b| self.lattice.axis[a].total_cmp(&self.lattice.axis[b]));
        self.select_bins(&order)
    }
}

/// Stokes parameters on a lattice, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesGrid {
    pub lattice: Lattice,
    pub cells: Vec<Stokes>,
}

impl StokesGrid {
    pub fn new(lattice: Lattice, cells: Vec<Stokes>) -> Result<Self> {
        lattice.validate()?;
        if cells.len() != lattice.cells() {
            return Err(invalid(format!("grid expects {} cells, got {}", lattice.cells(), cells.len())));
        }
        Ok(Self { lattice, cells })
    }

    #[inline]
    pub fn get(&self, u: usize, b: usize) -> Stokes {
        self.cells[u * self.lattice.n_bins + b]
    }

    #[inline]
    pub fn s0(&self, u: usize, b: usize) -> f64 {
        self.get(u, b).s0
    }

    pub fn max_s0(&self) -> f64 {
        self.cells.iter().map(|s| s.s0).fold(0.0, f64::max)
    }

    /// Largest `|S0² - ΣSᵢ²| / S0²` over nonzero cells.
    pub fn max_polarization_defect(&self) -> f64 {
        self.cells
            .iter()
            .filter(|s| s.s0 > 0.0)
            .map(|s| s.polarization_defect().abs() / (s.s0 * s.s0))
            .fold(0.0, f64::max)
    }
}

/// Cellwise Stokes extraction; serves both spectrograms and scalograms.
pub fn stokes_grid(grid: &TFGrid) -> StokesGrid {
    StokesGrid {
        lattice: grid.lattice.clone(),
        cells: grid.coeffs.iter().map(|&q| Stokes::from_coefficient(q)).collect(),
    }
}

/// Weighted `Σ c · pairing(c)` over the grid with per-cell weights `w(u, b)`.
pub(crate) fn weighted_pair_sum(grid: &TFGrid, pairing: Pairing, weight: impl Fn(usize, usize) -> f64) -> Quaternion {
    let nb = grid.lattice.n_bins;
    grid.coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * pairing.apply(c) * weight(i / nb, i % nb))
        .sum()
}
