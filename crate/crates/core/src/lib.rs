// NaN-rejecting guards are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod grid;
pub mod io;
pub mod qcwt;
pub mod qft;
pub mod qstft;
pub mod quaternion;
pub mod ridges;
pub mod selftest;
pub mod signals;

pub use embedding::{canonical_triplet, hilbert, instantaneous_stokes, quaternion_embed, ComplexSignal};
pub use error::{Error, Result};
pub use grid::{stokes_grid, Analysis, GridKind, Lattice, Stokes, StokesGrid, TFGrid, WindowKind};
pub use qcwt::{admissibility_constant, make_wavelet, polarization_scalogram, qcwt_forward, qcwt_inverse, Qcwt, ScaleGrid, Wavelet};
pub use qft::{qft_forward, qft_inverse, spreads, Pairing, QftPlan, QuaternionSignal, QuaternionSpectrum, SpreadReport};
pub use qstft::{make_window, polarization_spectrogram, qstft_forward, qstft_inverse, Boundary, Lift, Qstft, Window};
pub use quaternion::{euler_compose, euler_decompose, Axis, EulerTriplet, Quaternion};
pub use ridges::{asymptotic_check, extract_ridges, ridge_profile, Ridge, RidgeProfile};
pub use selftest::{run_selftest, CheckOutcome};
pub use signals::{gen_amfm, gen_paper_example, paper_example, AMFMSpec, Component, Curve, PaperExample};
