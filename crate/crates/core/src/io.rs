//! Signal CSV files and the QTF1 binary grid format.
//!
//! QTF1 layout: the line `QTF1`, one line of JSON header, then
//! little-endian `f64` values, time-major, four per cell.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embedding::{CanonicalTripletSeries, ComplexSignal};
use crate::error::{Error, Result};
use crate::grid::{Lattice, Stokes, StokesGrid, TFGrid};
use crate::qft::QuaternionSignal;
use crate::quaternion::Quaternion;

pub const SIGNAL_HEADER: [&str; 3] = ["t", "re", "im"];
pub const QUATERNION_HEADER: [&str; 5] = ["t", "w", "x", "y", "z"];
pub const TRIPLET_HEADER: [&str; 5] = ["t", "modulus", "theta", "chi", "phi"];
pub const QTF_MAGIC: &str = "QTF1";

/// Tolerance on sample times, relative to `dt`.
const TIME_TOLERANCE: f64 = 1e-6;

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(File::create(path)?)))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::MalformedRow {
            row: 0,
            reason: format!("{other:?}"),
        },
    }
}

/// Reads a CSV whose header equals `header`, returning `(t, values)` rows.
/// Row numbers in errors count data rows from 1.
fn read_table(path: &Path, header: &[&str]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let expected = header.join(",");
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(File::open(path)?));
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::MissingHeader { expected }),
    };
    if first.len() != header.len() || first.iter().zip(header).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
        return Err(Error::MissingHeader { expected });
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let vals = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::MalformedRow {
                    row,
                    reason: format!("`{s}` is not a finite number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        times.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    Ok((times, rows))
}

/// Checks `t` is uniform and returns `(dt, t0)`.
fn uniform_time(times: &[f64]) -> Result<(f64, f64)> {
    if times.len() < 2 {
        return Err(Error::MalformedRow {
            row: times.len() + 1,
            reason: "need at least 2 samples".into(),
        });
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::NonUniformTime { row: 2 });
    }
    for (n, &t) in times.iter().enumerate() {
        if (t - (t0 + n as f64 * dt)).abs() > TIME_TOLERANCE * dt {
            return Err(Error::NonUniformTime { row: n + 1 });
        }
    }
    Ok((dt, t0))
}

pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<ComplexSignal> {
    let (times, rows) = read_table(path.as_ref(), &SIGNAL_HEADER)?;
    let (dt, t0) = uniform_time(&times)?;
    ComplexSignal::with_origin(rows.iter().map(|r| Complex64::new(r[0], r[1])).collect(), dt, t0)
}

pub fn write_signal_csv(path: impl AsRef<Path>, f: &ComplexSignal) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(SIGNAL_HEADER).map_err(csv_error)?;
    for (n, c) in f.samples.iter().enumerate() {
        w.write_record([f.time(n).to_string(), c.re.to_string(), c.im.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_quaternion_csv(path: impl AsRef<Path>) -> Result<QuaternionSignal> {
    let (times, rows) = read_table(path.as_ref(), &QUATERNION_HEADER)?;
    let (dt, t0) = uniform_time(&times)?;
    QuaternionSignal::with_origin(rows.iter().map(|r| Quaternion::new(r[0], r[1], r[2], r[3])).collect(), dt, t0)
}

pub fn write_quaternion_csv(path: impl AsRef<Path>, f: &QuaternionSignal) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(QUATERNION_HEADER).map_err(csv_error)?;
    for (n, q) in f.samples.iter().enumerate() {
        let mut rec = vec![f.time(n).to_string()];
        rec.extend(q.to_array().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Polar triplets, one row per sample; gap samples have empty fields.
pub fn write_triplet_csv(path: impl AsRef<Path>, series: &CanonicalTripletSeries) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(TRIPLET_HEADER).map_err(csv_error)?;
    for (n, s) in series.samples.iter().enumerate() {
        let t = (series.t0 + n as f64 * series.dt).to_string();
        let rec = match s {
            Some(e) => [t, e.modulus.to_string(), e.theta.to_string(), e.chi.to_string(), e.phi.to_string()],
            None => [t, String::new(), String::new(), String::new(), String::new()],
        };
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// What the four channels of a QTF1 cell hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMeaning {
    /// `w, x, y, z` of a coefficient.
    Quaternion,
    /// `S0, S1, S2, S3`.
    Stokes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QtfHeader {
    #[serde(flatten)]
    lattice: Lattice,
    channels: usize,
    channel_meaning: ChannelMeaning,
}

/// A grid read back from a QTF1 file.
#[derive(Debug, Clone, PartialEq)]
pub enum GridFile {
    Coefficients(TFGrid),
    Stokes(StokesGrid),
}

fn write_qtf(path: &Path, lattice: &Lattice, meaning: ChannelMeaning, cells: impl Iterator<Item = [f64; 4]>) -> Result<()> {
    let header = QtfHeader {
        lattice: lattice.clone(),
        channels: 4,
        channel_meaning: meaning,
    };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{QTF_MAGIC}")?;
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::BadHeader(e.to_string()))?;
    writeln!(w)?;
    for cell in cells {
        for v in cell {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid(path: impl AsRef<Path>, grid: &TFGrid) -> Result<()> {
    write_qtf(
        path.as_ref(),
        &grid.lattice,
        ChannelMeaning::Quaternion,
        grid.coeffs.iter().map(|q| q.to_array()),
    )
}

pub fn write_stokes_grid(path: impl AsRef<Path>, grid: &StokesGrid) -> Result<()> {
    write_qtf(
        path.as_ref(),
        &grid.lattice,
        ChannelMeaning::Stokes,
        grid.cells.iter().map(|s| s.to_array()),
    )
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<GridFile> {
    let mut r = BufReader::new(File::open(path.as_ref())?);
    let mut magic = String::new();
    r.read_line(&mut magic)?;
    if magic.trim_end_matches(['\n', '\r']) != QTF_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: QtfHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::BadHeader(e.to_string()))?;
    if header.channels != 4 {
        return Err(Error::BadHeader(format!("expected 4 channels, found {}", header.channels)));
    }
    header.lattice.validate().map_err(|e| Error::BadHeader(e.to_string()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = header.lattice.cells() * 4 * 8;
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    let cells = payload.chunks_exact(32).map(|c| {
        let mut a = [0.0; 4];
        for (i, v) in a.iter_mut().enumerate() {
            *v = f64::from_le_bytes(c[8 * i..8 * i + 8].try_into().expect("8-byte chunk"));
        }
        a
    });
    Ok(match header.channel_meaning {
        ChannelMeaning::Quaternion => GridFile::Coefficients(TFGrid::new(header.lattice, cells.map(Quaternion::from_array).collect())?),
        ChannelMeaning::Stokes => GridFile::Stokes(StokesGrid::new(header.lattice, cells.map(Stokes::from_array).collect())?),
    })
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<TFGrid> {
    match read_grid_file(path)? {
        GridFile::Coefficients(g) => Ok(g),
        GridFile::Stokes(_) => Err(Error::BadHeader("expected quaternion channels, found stokes".into())),
    }
}

pub fn read_stokes_grid(path: impl AsRef<Path>) -> Result<StokesGrid> {
    match read_grid_file(path)? {
        GridFile::Stokes(g) => Ok(g),
        GridFile::Coefficients(_) => Err(Error::BadHeader("expected stokes channels, found quaternion".into())),
    }
}
