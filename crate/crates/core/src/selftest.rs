//! Invariant suite run on the built-in examples.

use std::f64::consts::PI;

use crate::embedding::{canonical_triplet, quaternion_embed};
use crate::error::Result;
use crate::grid::{polarization_product, stokes_grid, StokesGrid, TFGrid, WindowKind};
use crate::qcwt::{cwt_pair_integral, make_wavelet, qcwt_forward, Qcwt, ScaleGrid};
use crate::qft::{qft_forward, qft_inverse, Pairing, QftPlan, QuaternionSignal};
use crate::qstft::{make_window, stft_pair_integral, Lift, Qstft};
use crate::quaternion::{euler_compose, euler_decompose, EulerTriplet, Quaternion};
use crate::ridges::{extract_ridges, ridge_profile, DEFAULT_MIN_LEN, DEFAULT_THRESHOLD};
use crate::signals::{gen_amfm, gen_paper_example, paper_example, EXAMPLE_NAMES};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Measured error or a short failure reason.
    pub detail: String,
}

impl CheckOutcome {
    fn bound(name: &'static str, err: f64, tol: f64) -> Self {
        Self {
            name,
            passed: err < tol,
            detail: format!("{err:.3e} (< {tol:.0e})"),
        }
    }

    fn failed(name: &'static str, e: impl std::fmt::Display) -> Self {
        Self {
            name,
            passed: false,
            detail: e.to_string(),
        }
    }
}

fn rel(a: Quaternion, b: Quaternion, scale: f64) -> f64 {
    (a - b).norm() / scale
}

fn stokes_defect(s: &StokesGrid) -> f64 {
    let peak = s.max_s0().max(f64::MIN_POSITIVE);
    s.cells
        .iter()
        .map(|c| (c.s0 * c.s0 - (c.s1 * c.s1 + c.s2 * c.s2 + c.s3 * c.s3)).abs() / (peak * peak))
        .fold(0.0, f64::max)
}

fn j_leak(g: &TFGrid) -> f64 {
    g.coeffs
        .iter()
        .map(|&q| {
            let n = q.norm_sqr();
            if n > 0.0 {
                polarization_product(q).y.abs() / n
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn check_qft() -> Result<Vec<CheckOutcome>> {
    let f = quaternion_embed(&gen_paper_example("two_hyperbolic_chirps")?);
    let spec = qft_forward(&f);
    let back = qft_inverse(&spec);
    let scale = f.samples.iter().map(|q| q.max_abs()).fold(0.0, f64::max);
    let rt = f
        .samples
        .iter()
        .zip(&back.samples)
        .map(|(a, b)| (*a - *b).max_abs())
        .fold(0.0, f64::max)
        / scale;

    let e = f.energy();
    let g = QuaternionSignal::new(f.samples.iter().rev().copied().collect(), f.dt)?;
    let sg = qft_forward(&g);
    let mut worst: f64 = 0.0;
    for pairing in [Pairing::Conjugate, Pairing::InvolutionJ] {
        worst = worst.max(rel(f.inner(&f, pairing), spec.inner(&spec, pairing), e));
        worst = worst.max(rel(f.inner(&g, pairing), spec.inner(&sg, pairing), e));
    }

    let c = gen_paper_example("two_linear_chirps")?.to_quaternion();
    let n = c.len();
    let fc = QftPlan::new(n).forward(&c.samples);
    let peak = fc.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let herm = (1..n)
        .map(|k| {
            let expected = -(Quaternion::I * fc[k] * Quaternion::I);
            (fc[n - k] - expected).norm() / peak
        })
        .fold(0.0, f64::max);
    Ok(vec![
        CheckOutcome::bound("qft round trip", rt, 1e-10),
        CheckOutcome::bound("parseval and plancherel", worst, 1e-10),
        CheckOutcome::bound("i-hermitian symmetry", herm, 1e-10),
    ])
}

fn check_euler() -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for a in 0..12 {
        for c in 0..9 {
            for p in 0..12 {
                let t = EulerTriplet::new(1.7, -PI / 2.0 + 0.26 * a as f64, -0.7 + 0.17 * c as f64, -1.5 + 0.26 * p as f64);
                let q = euler_compose(&t);
                match euler_decompose(q) {
                    Ok(back) => worst = worst.max((euler_compose(&back) - q).max_abs()),
                    Err(e) => return CheckOutcome::failed("euler round trip", e),
                }
            }
        }
    }
    CheckOutcome::bound("euler round trip", worst, 1e-10)
}

fn check_embedding() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let mut leak: f64 = 0.0;
    let mut proj: f64 = 0.0;
    let mut angle: f64 = 0.0;
    for name in EXAMPLE_NAMES {
        let ex = paper_example(name)?;
        let f = gen_amfm(&ex.spec)?;
        let fp = quaternion_embed(&f);
        let n = fp.len();
        let spec = QftPlan::new(n).forward(&fp.samples);
        let peak = spec.iter().map(|q| q.norm()).fold(0.0, f64::max);
        leak = leak.max(spec[n / 2 + 1..].iter().map(|q| q.norm()).fold(0.0, f64::max) / peak);
        proj = proj.max(
            fp.samples
                .iter()
                .zip(&f.samples)
                .map(|(q, c)| (q.ci_part() - c).norm())
                .fold(0.0, f64::max),
        );
        if name == "mono_polarized" {
            let comp = ex.spec.components[0];
            let trip = canonical_triplet(&fp);
            for (m, s) in trip.samples.iter().enumerate() {
                if let Some(s) = s {
                    let t = f.time(m);
                    let d = (s.theta - comp.theta.value(t)).rem_euclid(PI);
                    angle = angle.max(d.min(PI - d)).max((s.chi - comp.chi.value(t)).abs());
                }
            }
        }
    }
    out.push(CheckOutcome::bound("embedding negative bins", leak, 1e-12));
    out.push(CheckOutcome::bound("embedding projection", proj, 1e-10));
    out.push(CheckOutcome::bound("canonical triplet geometry", angle, 1e-2));
    Ok(out)
}

fn check_stft() -> Result<Vec<CheckOutcome>> {
    let f = gen_paper_example("two_linear_chirps")?;
    let q = f.to_quaternion();
    let t = Qstft::new(make_window(WindowKind::Hann, 101, None)?, 1)?;
    let grid = t.forward(&q)?;
    let back = t.inverse(&grid)?;
    let e = q.energy();
    let inv = (back.samples.iter().zip(&q.samples).map(|(a, b)| (*a - *b).norm_sqr()).sum::<f64>() * q.dt / e).sqrt();
    let energy = rel(stft_pair_integral(&grid, Pairing::Conjugate), Quaternion::real(e), e);
    let pol = rel(
        stft_pair_integral(&grid, Pairing::InvolutionJ),
        q.inner(&q, Pairing::InvolutionJ),
        e,
    );
    let lifted = t.forward_complex(&f, Lift::Embed)?;
    let s = stokes_grid(&lifted);
    Ok(vec![
        CheckOutcome::bound("stft inversion", inv, 1e-10),
        CheckOutcome::bound("stft energy conservation", energy, 1e-10),
        CheckOutcome::bound("stft polarization conservation", pol, 1e-10),
        CheckOutcome::bound(
            "stft stokes identity",
            stokes_defect(&s).max(stokes_defect(&stokes_grid(&grid))),
            1e-10,
        ),
        CheckOutcome::bound("stft polarization j-part", j_leak(&lifted).max(j_leak(&grid)), 1e-12),
    ])
}

fn check_cwt() -> Result<Vec<CheckOutcome>> {
    let ex = paper_example("mono_polarized")?;
    let fp = quaternion_embed(&gen_amfm(&ex.spec)?);
    let psi = make_wavelet(5.0)?;
    let scales = ScaleGrid::for_record(&psi, fp.len(), fp.dt, 16)?;
    let grid = qcwt_forward(&fp, &psi, &scales);
    let e = fp.energy();
    let energy = rel(cwt_pair_integral(&grid, &psi, Pairing::Conjugate), Quaternion::real(e), e);
    let pol = rel(
        cwt_pair_integral(&grid, &psi, Pairing::InvolutionJ),
        fp.inner(&fp, Pairing::InvolutionJ),
        e,
    );

    let t = Qcwt::new(psi, scales);
    let plan = QftPlan::new(fp.len());
    let mut band: f64 = 0.0;
    for (b, expected) in t.band_products(&fp).iter().enumerate() {
        let row: Vec<Quaternion> = (0..fp.len()).map(|u| grid.get(u, b)).collect();
        let scale = expected.iter().map(|q| q.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let err = plan
            .forward(&row)
            .iter()
            .zip(expected)
            .map(|(a, e)| (*a - *e).max_abs())
            .fold(0.0, f64::max);
        band = band.max(err / scale);
    }
    Ok(vec![
        CheckOutcome::bound("cwt energy conservation", energy, 1e-2),
        CheckOutcome::bound("cwt polarization conservation", pol, 1e-2),
        CheckOutcome::bound("cwt band products", band, 1e-10),
        CheckOutcome::bound("cwt stokes identity", stokes_defect(&stokes_grid(&grid)), 1e-10),
        CheckOutcome::bound("cwt polarization j-part", j_leak(&grid), 1e-12),
    ])
}

fn check_ridges() -> Result<CheckOutcome> {
    let ex = paper_example("mono_polarized")?;
    let comp = ex.spec.components[0];
    let f = gen_amfm(&ex.spec)?;
    let grid = Qstft::new(make_window(WindowKind::Hann, 101, None)?, 1)?.forward_complex(&f, Lift::Embed)?;
    let ridges = extract_ridges(&stokes_grid(&grid), DEFAULT_THRESHOLD, DEFAULT_MIN_LEN)?;
    if ridges.len() != 1 {
        return Ok(CheckOutcome::failed("ridge geometry", format!("{} ridges", ridges.len())));
    }
    let p = ridge_profile(&grid, &ridges[0])?;
    let err = p
        .interior()
        .into_iter()
        .map(|i| {
            let r = &p.records[i];
            let d = (r.theta - comp.theta.value(r.t)).rem_euclid(PI);
            d.min(PI - d).max((r.chi - comp.chi.value(r.t)).abs())
        })
        .fold(0.0, f64::max);
    Ok(CheckOutcome::bound("ridge geometry", err, 1e-2))
}

/// Runs every check; a check that errors is reported as failed.
pub fn run_selftest() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut take = |name: &'static str, r: Result<Vec<CheckOutcome>>| match r {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckOutcome::failed(name, e)),
    };
    take("qft", check_qft());
    take("euler", Ok(vec![check_euler()]));
    take("embedding", check_embedding());
    take("stft", check_stft());
    take("cwt", check_cwt());
    take("ridges", check_ridges().map(|c| vec![c]));
    out
}
