use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtfa::io::{
    read_grid, read_quaternion_csv, read_signal_csv, write_grid, write_quaternion_csv, write_signal_csv, write_stokes_grid,
    write_triplet_csv,
};
use qtfa::ridges::{mask_outside, write_ridge_csv};
use qtfa::{
    canonical_triplet, extract_ridges, gen_paper_example, make_wavelet, make_window, quaternion_embed, ridge_profile, run_selftest,
    stokes_grid, ComplexSignal, Error, Lift, Qcwt, Qstft, QuaternionSignal, ScaleGrid, TFGrid, WindowKind,
};

#[derive(Parser, Debug)]
#[command(name = "qtfa", version, about = "Quaternion time-frequency analysis of bivariate signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one of the built-in example signals as t,re,im CSV.
    Generate {
        #[arg(long)]
        example: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Quaternion embedding (t,w,x,y,z) plus its canonical triplet.
    Embed {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Triplet CSV path; defaults to `<output stem>_triplet.csv`.
        #[arg(long)]
        triplet: Option<PathBuf>,
    },
    /// Quaternion short-time Fourier transform to a QTF1 grid.
    Stft {
        #[command(flatten)]
        io: TransformIo,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
        #[arg(long, default_value_t = 101)]
        winlen: usize,
        /// Gaussian standard deviation in samples.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1)]
        hop: usize,
    },
    /// Quaternion continuous wavelet transform to a QTF1 grid.
    Cwt {
        #[command(flatten)]
        io: TransformIo,
        #[arg(long, default_value_t = 5.0)]
        eta: f64,
        #[arg(long, default_value_t = 16)]
        voices: usize,
        /// Smallest scale in seconds.
        #[arg(long)]
        smin: Option<f64>,
        /// Largest scale in seconds.
        #[arg(long)]
        smax: Option<f64>,
        #[arg(long, default_value_t = 1)]
        hop: usize,
    },
    /// Stokes parameters of a coefficient grid.
    Stokes {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Ridge extraction and on-ridge polarization profile.
    Ridges {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = qtfa::ridges::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = qtfa::ridges::DEFAULT_MIN_LEN)]
        min_len: usize,
        /// Drop cells whose atom reaches past the record ends.
        #[arg(long)]
        cone: bool,
        /// Drop cells whose atom starts before this time (implies --cone).
        #[arg(long)]
        t_min: Option<f64>,
        /// Drop cells whose atom ends after this time (implies --cone).
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Run the invariant suite on the built-in examples.
    Selftest,
}

#[derive(Args, Debug)]
struct TransformIo {
    /// Signal CSV (t,re,im) or quaternion CSV (t,w,x,y,z).
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// How a complex signal is lifted to quaternions; ignored for quaternion input.
    #[arg(long, value_enum, default_value_t = LiftArg::Embed)]
    lift: LiftArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WindowArg {
    Hann,
    Gauss,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LiftArg {
    Embed,
    Direct,
}

impl From<LiftArg> for Lift {
    fn from(l: LiftArg) -> Self {
        match l {
            LiftArg::Embed => Lift::Embed,
            LiftArg::Direct => Lift::Direct,
        }
    }
}

enum Input {
    Complex(ComplexSignal),
    Quaternion(QuaternionSignal),
}

fn load_input(path: &Path) -> qtfa::Result<Input> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let fields = first.split(',').count();
    if fields == 5 {
        Ok(Input::Quaternion(read_quaternion_csv(path)?))
    } else {
        Ok(Input::Complex(read_signal_csv(path)?))
    }
}

fn triplet_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}_triplet.csv"))
}

/// Prefixes I/O errors with the file they concern.
fn at<T>(path: &Path, r: qtfa::Result<T>) -> qtfa::Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn run(cmd: Command) -> qtfa::Result<()> {
    match cmd {
        Command::Generate { example, output } => at(&output, write_signal_csv(&output, &gen_paper_example(&example)?)),
        Command::Embed { input, output, triplet } => {
            let fplus = quaternion_embed(&at(&input, read_signal_csv(&input))?);
            at(&output, write_quaternion_csv(&output, &fplus))?;
            let triplet = triplet.unwrap_or_else(|| triplet_path(&output));
            at(&triplet, write_triplet_csv(&triplet, &canonical_triplet(&fplus)))
        }
        Command::Stft {
            io,
            window,
            winlen,
            sigma,
            hop,
        } => {
            let kind = match window {
                WindowArg::Hann => WindowKind::Hann,
                WindowArg::Gauss => WindowKind::Gauss,
            };
            let t = Qstft::new(make_window(kind, winlen, sigma)?, hop)?;
            let grid = match at(&io.input, load_input(&io.input))? {
                Input::Complex(f) => t.forward_complex(&f, io.lift.into())?,
                Input::Quaternion(f) => t.forward(&f)?,
            };
            at(&io.output, write_grid(&io.output, &grid))
        }
        Command::Cwt {
            io,
            eta,
            voices,
            smin,
            smax,
            hop,
        } => {
            let psi = make_wavelet(eta)?;
            let input = at(&io.input, load_input(&io.input))?;
            let (n, dt) = match &input {
                Input::Complex(f) => (f.len(), f.dt),
                Input::Quaternion(f) => (f.len(), f.dt),
            };
            let scales = match (smin, smax) {
                (Some(lo), Some(hi)) => ScaleGrid::log_spaced(lo, hi, voices)?,
                (None, None) => ScaleGrid::for_record(&psi, n, dt, voices)?,
                _ => return Err(invalid("--smin and --smax must be given together".into())),
            };
            let t = Qcwt::new(psi, scales).with_hop(hop)?;
            let grid = match input {
                Input::Complex(f) => t.forward_complex(&f, io.lift.into()),
                Input::Quaternion(f) => t.forward(&f),
            };
            at(&io.output, write_grid(&io.output, &grid))
        }
        Command::Stokes { input, output } => {
            let grid = at(&input, read_grid(&input))?;
            at(&output, write_stokes_grid(&output, &stokes_grid(&grid)))
        }
        Command::Ridges {
            input,
            output,
            threshold,
            min_len,
            cone,
            t_min,
            t_max,
        } => {
            let grid: TFGrid = at(&input, read_grid(&input))?;
            let mut s = stokes_grid(&grid);
            if cone || t_min.is_some() || t_max.is_some() {
                let lat = &grid.lattice;
                let lo = t_min.unwrap_or(lat.t0);
                let hi = t_max.unwrap_or(lat.t0 + lat.n_samples as f64 * lat.dt);
                s = mask_outside(&s, lo, hi);
            }
            let ridges = extract_ridges(&s, threshold, min_len)?;
            let profiles = ridges.iter().map(|r| ridge_profile(&grid, r)).collect::<qtfa::Result<Vec<_>>>()?;
            at(&output, write_ridge_csv(&output, &profiles))
        }
        Command::Selftest => {
            let out = run_selftest();
            for c in &out {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = out.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(invalid(format!("{failed} invariant(s) failed")));
            }
            Ok(())
        }
    }
}

/// 2 for anything that prevented reading or writing a file, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::BadMagic | Error::BadHeader(_) | Error::Truncated { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!(
                "qtfa: {}",
                msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ")
            );
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtfa: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
