//! Ridge extraction on energy grids and on-ridge polarization profiles.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Analysis, GridKind, Lattice, StokesGrid, TFGrid};
use crate::qstft::Window;
use crate::quaternion::{euler_decompose, Quaternion};
use crate::signals::Component;

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_MIN_LEN: usize = 10;

/// Largest bin jump allowed between consecutive columns of one ridge.
pub fn max_jump(kind: GridKind) -> usize {
    match kind {
        GridKind::Stft => 3,
        GridKind::Cwt => 2,
    }
}

/// A chain of `(column, bin)` points, one per consecutive column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ridge {
    pub kind: GridKind,
    pub points: Vec<(usize, usize)>,
}

impl Ridge {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> usize {
        self.points[0].0
    }

    pub fn end(&self) -> usize {
        self.points[self.points.len() - 1].0
    }

    pub fn bin_at(&self, u: usize) -> Option<usize> {
        if self.is_empty() || u < self.start() || u > self.end() {
            None
        } else {
            Some(self.points[u - self.start()].1)
        }
    }
}

/// Last sorted-axis position of a live ridge and its points.
type Track = (usize, Vec<(usize, usize)>);

/// Links per-column local maxima of `S0` above `threshold_rel · max S0`.
///
/// Each candidate joins the nearest ridge alive in the previous column if
/// within [`max_jump`] bins, closest pairs first; the rest start new
/// ridges. Ridges shorter than `min_len` columns are dropped.
pub fn extract_ridges(s0: &StokesGrid, threshold_rel: f64, min_len: usize) -> Result<Vec<Ridge>> {
    if !(threshold_rel > 0.0 && threshold_rel < 1.0) {
        return Err(invalid(format!("threshold must lie in (0, 1), got {threshold_rel}")));
    }
    let lat = &s0.lattice;
    // cwt cells carry energy |W|² du ds/s², i.e. S0/s per unit log-scale
    let density = |u: usize, b: usize| match lat.kind {
        GridKind::Stft => s0.s0(u, b),
        GridKind::Cwt => s0.s0(u, b) / lat.axis[b],
    };
    let peak = (0..lat.n_time)
        .flat_map(|u| (0..lat.n_bins).map(move |b| (u, b)))
        .map(|(u, b)| density(u, b))
        .fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = threshold_rel * peak;
    let jump = max_jump(lat.kind);
    // work in increasing-axis order so neighbors are adjacent frequencies
    let mut order: Vec<usize> = (0..lat.n_bins).collect();
    order.sort_by(|&a, &b| lat.axis[a].total_cmp(&lat.axis[b]));

    let mut done: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut live: Vec<Track> = Vec::new();
    for u in 0..lat.n_time {
        let v = |p: usize| density(u, order[p]);
        let nb = order.len();
        let cands: Vec<usize> = (0..nb)
            .filter(|&p| {
                let x = v(p);
                x >= floor && x > 0.0 && (p == 0 || x > v(p - 1)) && (p + 1 == nb || x >= v(p + 1))
            })
            .collect();

        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for (r, (last, _)) in live.iter().enumerate() {
            for (c, &p) in cands.iter().enumerate() {
                let d = last.abs_diff(p);
                if d <= jump {
                    pairs.push((d, r, c));
                }
            }
        }
        pairs.sort();
        let mut ridge_used = vec![false; live.len()];
        let mut cand_used = vec![false; cands.len()];
        let mut next: Vec<Track> = Vec::new();
        let mut old: Vec<Option<Track>> = live.into_iter().map(Some).collect();
        for (_, r, c) in pairs {
            if ridge_used[r] || cand_used[c] {
                continue;
            }
            ridge_used[r] = true;
            cand_used[c] = true;
            let (_, mut pts) = old[r].take().expect("ridge used once");
            pts.push((u, order[cands[c]]));
            next.push((cands[c], pts));
        }
        done.extend(old.into_iter().flatten().map(|(_, pts)| pts));
        for (c, &p) in cands.iter().enumerate() {
            if !cand_used[c] {
                next.push((p, vec![(u, order[p])]));
            }
        }
        live = next;
    }
    done.extend(live.into_iter().map(|(_, pts)| pts));
    let mut ridges: Vec<Ridge> = done
        .into_iter()
        .filter(|pts| pts.len() >= min_len.max(1))
        .map(|points| Ridge { kind: lat.kind, points })
        .collect();
    ridges.sort_by_key(|r| (r.start(), r.points[0].1));
    Ok(ridges)
}

/// Wavelet envelope widths on each side counted as a cell's support.
pub const CONE_WIDTHS: f64 = 2.0;

/// Zeroes cells whose analysis atom reaches outside `[t_lo, t_hi]`: the
/// half window for stft grids and [`CONE_WIDTHS`] scales for cwt grids.
/// With the record bounds this is the usual cone of influence.
pub fn mask_outside(s0: &StokesGrid, t_lo: f64, t_hi: f64) -> StokesGrid {
    let lat = &s0.lattice;
    let mut out = s0.clone();
    for u in 0..lat.n_time {
        let t = lat.time(u);
        for b in 0..lat.n_bins {
            let half = match lat.analysis {
                Analysis::Window { len, .. } => ((len - 1) / 2) as f64 * lat.dt,
                Analysis::Morlet { .. } => CONE_WIDTHS * lat.axis[b],
            };
            if t - half < t_lo || t + half > t_hi {
                out.cells[u * lat.n_bins + b] = Default::default();
            }
        }
    }
    out
}

/// One on-ridge sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeRecord {
    pub u: usize,
    pub bin: usize,
    pub t: f64,
    /// rad/s.
    pub inst_freq: f64,
    /// Orientation reduced to `(-π/2, π/2]`.
    pub theta: f64,
    /// Orientation unwrapped along the ridge.
    pub theta_unwrapped: f64,
    pub chi: f64,
    /// Amplitude with the analysis gain divided out.
    pub amp: f64,
    /// Estimated `φ''` from the ridge frequency track, rad/s².
    pub chirp_rate: f64,
    pub coefficient: Quaternion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeProfile {
    pub kind: GridKind,
    pub analysis: Analysis,
    pub lifted: bool,
    pub dt: f64,
    pub t0: f64,
    pub n_samples: usize,
    pub records: Vec<RidgeRecord>,
}

/// Envelope value `g(0)` in continuous units and the width parameter `c`
/// of the Gaussian-matched on-ridge gain, at scale `s` for wavelets.
fn gain_params(lat_analysis: &Analysis, dt: f64, s: f64) -> Result<(f64, f64)> {
    match *lat_analysis {
        Analysis::Window { .. } => {
            let w = Window::from_analysis(lat_analysis)?;
            let g0 = w.g0(dt);
            Ok((g0, (2.0 * PI).sqrt() * g0 / w.ghat(0.0, dt)))
        }
        Analysis::Morlet { .. } => Ok((PI.powf(-0.25) / s.sqrt(), 1.0 / s)),
    }
}

/// On-ridge gain `√(2π) g(0) / (c⁴ + φ''²)^{1/4}`, exact for Gaussian
/// envelopes on linear chirps and tending to `ĝ(0)` on pure tones.
fn ridge_gain(g0: f64, c: f64, chirp_rate: f64, lift: f64) -> f64 {
    lift * (2.0 * PI).sqrt() * g0 / (c.powi(4) + chirp_rate * chirp_rate).powf(0.25)
}

/// Half-width of the least-squares slope fit used for `φ''`.
const SLOPE_SPAN: usize = 8;

fn slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let den: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn ridge_profile(grid: &TFGrid, ridge: &Ridge) -> Result<RidgeProfile> {
    let lat = &grid.lattice;
    if ridge.points.iter().any(|&(u, b)| u >= lat.n_time || b >= lat.n_bins) {
        return Err(invalid("ridge does not fit the grid"));
    }
    let lift = if lat.lifted { 0.5 } else { 1.0 };
    let times: Vec<f64> = ridge.points.iter().map(|&(u, _)| lat.time(u)).collect();
    let mut order: Vec<usize> = (0..lat.n_bins).collect();
    order.sort_by(|&a, &b| lat.axis[a].total_cmp(&lat.axis[b]));
    let mut rank = vec![0; lat.n_bins];
    order.iter().enumerate().for_each(|(r, &b)| rank[b] = r);
    let freqs: Vec<f64> = ridge
        .points
        .iter()
        .map(|&(u, b)| refined_frequency(grid, &order, rank[b], u))
        .collect();
    let n = ridge.len();
    let mut records = Vec::with_capacity(n);
    let mut prev_theta: Option<f64> = None;
    for (i, &(u, b)) in ridge.points.iter().enumerate() {
        let lo = i.saturating_sub(SLOPE_SPAN);
        let hi = (i + SLOPE_SPAN + 1).min(n);
        let chirp_rate = slope(&times[lo..hi], &freqs[lo..hi]);
        let q = grid.get(u, b);
        let (theta, chi) = match euler_decompose(q) {
            Ok(e) => (e.theta, e.chi),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let theta = if theta.is_nan() { theta } else { reduce_half_turn(theta) };
        let theta_unwrapped = match prev_theta {
            Some(p) if !theta.is_nan() => p + reduce_half_turn(theta - p),
            _ => theta,
        };
        if !theta_unwrapped.is_nan() {
            prev_theta = Some(theta_unwrapped);
        }
        let s = if lat.kind == GridKind::Cwt { lat.axis[b] } else { 1.0 };
        let (g0, c) = gain_params(&lat.analysis, lat.dt, s)?;
        records.push(RidgeRecord {
            u,
            bin: b,
            t: times[i],
            inst_freq: freqs[i],
            theta,
            theta_unwrapped,
            chi,
            amp: q.norm() / ridge_gain(g0, c, chirp_rate, lift),
            chirp_rate,
            coefficient: q,
        });
    }
    Ok(RidgeProfile {
        kind: lat.kind,
        analysis: lat.analysis,
        lifted: lat.lifted,
        dt: lat.dt,
        t0: lat.t0,
        n_samples: lat.n_samples,
        records,
    })
}

/// Peak frequency from a log-parabola through the ridge cell and its two
/// axis neighbors, in `ω` for stft and in `log s` for cwt grids.
fn refined_frequency(grid: &TFGrid, order: &[usize], r: usize, u: usize) -> f64 {
    let lat = &grid.lattice;
    let b = order[r];
    if r == 0 || r + 1 == order.len() {
        return lat.frequency(b);
    }
    let x = |b: usize| match lat.kind {
        GridKind::Stft => lat.axis[b],
        GridKind::Cwt => lat.axis[b].ln(),
    };
    let y = |b: usize| match lat.kind {
        GridKind::Stft => grid.get(u, b).norm_sqr().ln(),
        GridKind::Cwt => (grid.get(u, b).norm_sqr() / lat.axis[b]).ln(),
    };
    let (bl, br) = (order[r - 1], order[r + 1]);
    let (yl, y0, yr) = (y(bl), y(b), y(br));
    let curv = yl - 2.0 * y0 + yr;
    if !(curv < 0.0 && curv.is_finite()) {
        return lat.frequency(b);
    }
    let delta = (0.5 * (yl - yr) / curv).clamp(-0.5, 0.5);
    let h = if delta >= 0.0 { x(br) - x(b) } else { x(b) - x(bl) };
    let xs = x(b) + delta * h;
    match (lat.kind, lat.analysis) {
        (GridKind::Cwt, Analysis::Morlet { eta }) => eta / xs.exp(),
        _ => xs,
    }
}

/// Maps an angle to `(-π/2, π/2]`.
fn reduce_half_turn(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r > PI / 2.0 {
        r - PI
    } else {
        r
    }
}

impl RidgeProfile {
    /// Indices of the central 80% of records, further excluding columns
    /// within one atom half-support of the record ends.
    pub fn interior(&self) -> Vec<usize> {
        let n = self.records.len();
        let cut = n / 10;
        let span = self.n_samples as f64 * self.dt;
        (cut..n - cut)
            .filter(|&i| {
                let r = &self.records[i];
                let half = match self.analysis {
                    Analysis::Window { len, .. } => ((len - 1) / 2) as f64 * self.dt,
                    Analysis::Morlet { eta } => 3.0 * eta / r.inst_freq,
                };
                r.t - self.t0 >= half && self.t0 + span - r.t > half
            })
            .collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_ridge_csv(path, std::slice::from_ref(self))
    }
}

/// Ridge CSV with columns `t, inst_freq, theta, chi, amp` and a leading
/// ridge index.
pub fn write_ridge_csv(path: impl AsRef<Path>, profiles: &[RidgeProfile]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => crate::error::Error::Io(e),
        other => invalid(format!("{other:?}")),
    })?;
    let io = |e: csv::Error| crate::error::Error::Io(std::io::Error::other(e));
    w.write_record(["ridge", "t", "inst_freq", "theta", "chi", "amp"]).map_err(io)?;
    for (k, p) in profiles.iter().enumerate() {
        for r in &p.records {
            w.write_record([
                k.to_string(),
                r.t.to_string(),
                r.inst_freq.to_string(),
                r.theta.to_string(),
                r.chi.to_string(),
                r.amp.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Deviation of on-ridge magnitudes from the stationary-phase prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub used: usize,
    /// Interior columns where `φ'' = 0` and the prediction is undefined.
    pub excluded: usize,
    pub max_rel: f64,
    pub median_rel: f64,
}

impl AsymptoticReport {
    pub fn all_excluded(&self) -> bool {
        self.used == 0 && self.excluded > 0
    }
}

/// Predicted on-ridge magnitude `|a| √(2π) g(0) / √|φ''|`, times `½` on
/// lifted grids and evaluated at `s_R = η/φ'` for wavelets.
pub fn asymptotic_magnitude(
    lat_kind: GridKind,
    analysis: &Analysis,
    dt: f64,
    lifted: bool,
    truth: &Component,
    t: f64,
) -> Result<Option<f64>> {
    let phi2 = truth.chirp_rate(t);
    if phi2 == 0.0 {
        return Ok(None);
    }
    let lift = if lifted { 0.5 } else { 1.0 };
    let s = match (lat_kind, analysis) {
        (GridKind::Cwt, Analysis::Morlet { eta }) => eta / truth.inst_freq(t),
        _ => 1.0,
    };
    let (g0, _) = gain_params(analysis, dt, s)?;
    Ok(Some(lift * (2.0 * PI).sqrt() * truth.modulus.value(t) * g0 / phi2.abs().sqrt()))
}

pub fn asymptotic_check(profile: &RidgeProfile, truth: &Component) -> Result<AsymptoticReport> {
    let mut devs = Vec::new();
    let mut excluded = 0;
    for i in profile.interior() {
        let r = &profile.records[i];
        match asymptotic_magnitude(profile.kind, &profile.analysis, profile.dt, profile.lifted, truth, r.t)? {
            Some(m) => devs.push((r.coefficient.norm() - m).abs() / m),
            None => excluded += 1,
        }
    }
    devs.sort_by(f64::total_cmp);
    let median_rel = if devs.is_empty() { f64::NAN } else { devs[devs.len() / 2] };
    Ok(AsymptoticReport {
        used: devs.len(),
        excluded,
        max_rel: devs.last().copied().unwrap_or(f64::NAN),
        median_rel,
    })
}

/// Index of the bin whose frequency is nearest `omega`.
pub fn nearest_bin(lat: &Lattice, omega: f64) -> usize {
    (0..lat.n_bins)
        .min_by(|&a, &b| (lat.frequency(a) - omega).abs().total_cmp(&(lat.frequency(b) - omega).abs()))
        .unwrap_or(0)
}
