//! The `frmv` command-line front end.
//!
//! Exit status: 0 success, 1 I/O failure, 2 bad arguments, 3 unreadable
//! input data, 4 numeric or configuration errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::{s, Axis};
use serde::Serialize;

use crate::deconv::{extract_spectra, rank1_spectrum, rank_matches, ParafacFactors, Spectrum};
use crate::error::Error;
use crate::io::{
    atomic_write, chromatogram_to_csv, read_chromatogram, read_matrix, read_spectra,
    spectra_to_csv, to_json_string, with_suffix, write_result, CsvLayout,
};
use crate::pipeline::{run_frmv, FrmvConfig};
use crate::plot::{render_plot, PlotStyle};
use crate::synth::{generate, random_spectrum, single_peak_template, sweep, PeakSpec, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "FRMV_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "frmv",
    version,
    about = "Region-of-interest selection for GC-MS chromatograms with a pseudo F-ratio moving window"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect regions of interest in a chromatogram CSV.
    Detect(DetectArgs),
    /// Write a synthetic chromatogram with known peaks.
    Synth(SynthArgs),
    /// Detection rate over peak amplitudes and noise seeds.
    Sweep(SweepArgs),
    /// Cosine match factors between query and library spectra.
    Match(MatchArgs),
    /// Recover component spectra from an ROI.
    Extract(ExtractArgs),
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// First row holds m/z labels.
    #[arg(long)]
    header: bool,
    /// First column holds retention times (minutes).
    #[arg(long)]
    time_column: bool,
    /// Field delimiter (single ASCII character, or "tab").
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
}

impl LayoutArgs {
    fn layout(&self) -> CsvLayout {
        CsvLayout {
            has_header: self.header,
            has_time_column: self.time_column,
            delimiter: self.delimiter,
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Moving-window size in acquisitions.
    #[arg(long, default_value_t = 10)]
    window: usize,
    /// Probability threshold.
    #[arg(long, default_value_t = 0.7)]
    cutoff: f64,
    #[arg(long)]
    out_prefix: PathBuf,
    /// Drop ROIs shorter than this from the interval list.
    #[arg(long, default_value_t = 0)]
    min_roi_len: usize,
    /// Autoscaling degeneracy tolerance.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[command(flatten)]
    layout: LayoutArgs,
    /// Also write an SVG overlay here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Overlay the pv trace on the plot.
    #[arg(long)]
    plot_pv: bool,
    #[arg(long, default_value_t = 1200)]
    plot_width: u32,
    #[arg(long, default_value_t = 400)]
    plot_height: u32,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    rows: usize,
    #[arg(long, default_value_t = 40)]
    cols: usize,
    /// Peak as apex:sigma:amplitude (repeatable).
    #[arg(long = "peaks", value_parser = parse_peak)]
    peaks: Vec<(usize, f64, f64)>,
    #[arg(long, default_value_t = 1.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; ground truth goes to the same stem with `.truth.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated amplitudes, in multiples of the noise sigma.
    #[arg(long, value_delimiter = ',', required = true)]
    amplitudes: Vec<f64>,
    /// Number of noise seeds (0..N).
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 0.7)]
    cutoff: f64,
    #[arg(long)]
    out_prefix: PathBuf,
    #[arg(long, default_value_t = 300)]
    rows: usize,
    #[arg(long, default_value_t = 40)]
    cols: usize,
    /// Peak width (standard deviation, acquisitions).
    #[arg(long, default_value_t = 3.0)]
    width_sigma: f64,
    /// Seed for the template peak's spectrum.
    #[arg(long, default_value_t = 0)]
    spectrum_seed: u64,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    library: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Chromatogram CSV holding the ROI (or a whole run with --start/--end).
    #[arg(long)]
    roi: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
    /// First acquisition of the ROI (1-based).
    #[arg(long)]
    start: Option<usize>,
    /// Last acquisition of the ROI (1-based, inclusive).
    #[arg(long)]
    end: Option<usize>,
    /// Elution profiles, one column per component, one row per acquisition.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Comma-separated relative quantities, one per component.
    #[arg(long, value_delimiter = ',')]
    quantities: Vec<f64>,
    /// Output spectra CSV.
    #[arg(long)]
    out: PathBuf,
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    let d = match s {
        "tab" | "\\t" => b'\t',
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii() => c as u8,
                _ => return Err(format!("delimiter must be a single ASCII character, got {s:?}")),
            }
        }
    };
    CsvLayout {
        delimiter: d,
        ..CsvLayout::default()
    }
    .validate()
    .map_err(|e| e.to_string())?;
    Ok(d)
}

fn parse_peak(s: &str) -> Result<(usize, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected apex:sigma:amplitude, got {s:?}"));
    }
    let apex = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad apex in {s:?}"))?;
    let sigma = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad sigma in {s:?}"))?;
    let amplitude = parts[2]
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad amplitude in {s:?}"))?;
    if !(sigma > 0.0) || !sigma.is_finite() || !amplitude.is_finite() {
        return Err(format!("sigma must be positive and amplitude finite in {s:?}"));
    }
    Ok((apex, sigma, amplitude))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Format { .. } => EXIT_PARSE,
        Error::Io { .. } => EXIT_IO,
        Error::Domain { .. }
        | Error::Config(_)
        | Error::Dimension(_)
        | Error::Singular { .. }
        | Error::ZeroSpectrum { .. } => EXIT_NUMERIC,
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {v:?}");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };

    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => {
                eprintln!("error: could not start {n} worker threads: {e}");
                return EXIT_IO;
            }
        },
        None => dispatch(cli.command),
    };

    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> crate::Result<()> {
    match command {
        Command::Detect(a) => cmd_detect(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Match(a) => cmd_match(&a),
        Command::Extract(a) => cmd_extract(&a),
    }
}

fn cmd_detect(args: &DetectArgs) -> crate::Result<()> {
    let config = FrmvConfig {
        wndw: args.window,
        cutoff: args.cutoff,
        epsilon: args.epsilon,
        min_roi_len: args.min_roi_len,
        ..FrmvConfig::default()
    };
    config.validate()?;
    let style = PlotStyle {
        width_px: args.plot_width,
        height_px: args.plot_height,
        roi_shade: true,
        show_pv: args.plot_pv,
    };
    if args.plot.is_some() {
        style.validate()?;
    }

    let layout = args.layout.layout();
    let chrom = read_chromatogram(&args.input, &layout)?;
    let result = run_frmv(&chrom, &config)?;
    write_result(&result, &args.out_prefix, layout.delimiter)?;
    if let Some(path) = &args.plot {
        render_plot(&result, &style, path)?;
    }
    eprintln!(
        "{} acquisitions, {} ROIs covering {} acquisitions",
        result.n_acquisitions(),
        result.rois.len(),
        result.bool_cutoff.iter().filter(|&&b| b == 1).count()
    );
    Ok(())
}

/// Seed for the spectrum of the `k`-th synthetic peak (0-based).
fn peak_spectrum_seed(seed: u64, k: usize) -> u64 {
    seed ^ ((k as u64 + 1) << 32)
}

fn truth_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

fn cmd_synth(args: &SynthArgs) -> crate::Result<()> {
    let spec = SyntheticSpec {
        rows: args.rows,
        cols: args.cols,
        peaks: args
            .peaks
            .iter()
            .enumerate()
            .map(|(k, &(apex, width_sigma, amplitude))| PeakSpec {
                apex,
                width_sigma,
                amplitude,
                spectrum: random_spectrum(args.cols, peak_spectrum_seed(args.seed, k)),
            })
            .collect(),
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    let chrom = generate(&spec)?;
    let csv = chromatogram_to_csv(&chrom, b',');
    let truth = to_json_string(&spec);
    atomic_write(&args.out, csv.as_bytes())?;
    atomic_write(truth_path(&args.out), truth.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    config: &'a FrmvConfig,
    rows: usize,
    cols: usize,
    width_sigma: f64,
    apex: usize,
    noise_sigma: f64,
    spectrum_seed: u64,
    seeds: u64,
    amplitudes: &'a [crate::synth::AmplitudeSummary],
}

fn cmd_sweep(args: &SweepArgs) -> crate::Result<()> {
    let config = FrmvConfig {
        wndw: args.window,
        cutoff: args.cutoff,
        ..FrmvConfig::default()
    };
    config.validate()?;
    if args.seeds == 0 {
        return Err(Error::Config("--seeds must be at least 1".into()));
    }
    let template = single_peak_template(args.rows, args.cols, args.width_sigma, args.spectrum_seed);
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let report = sweep(&template, &args.amplitudes, &seeds, &config)?;

    let mut csv = String::from("amplitude,seed,peak_id,detected,roi_width,roi_count\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.amplitude,
            r.seed,
            r.peak_id,
            u8::from(r.detected),
            r.roi_width,
            r.roi_count
        );
    }
    let summary = SweepSummary {
        config: &report.config,
        rows: template.rows,
        cols: template.cols,
        width_sigma: args.width_sigma,
        apex: template.peaks[0].apex,
        noise_sigma: template.noise_sigma,
        spectrum_seed: args.spectrum_seed,
        seeds: args.seeds,
        amplitudes: &report.summary,
    };
    atomic_write(with_suffix(&args.out_prefix, ".sweep.csv"), csv.as_bytes())?;
    atomic_write(
        with_suffix(&args.out_prefix, ".summary.json"),
        to_json_string(&summary).as_bytes(),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MatchHit {
    rank: usize,
    library_row: usize,
    label: Option<String>,
    score: f64,
}

#[derive(Serialize)]
struct QueryMatches {
    query_row: usize,
    query: Option<String>,
    hits: Vec<MatchHit>,
}

fn cmd_match(args: &MatchArgs) -> crate::Result<()> {
    let queries = read_spectra(&args.query, args.delimiter)?;
    let library = read_spectra(&args.library, args.delimiter)?;
    let out = queries
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            let hits = rank_matches(q, &library)?
                .into_iter()
                .enumerate()
                .map(|(rank, h)| MatchHit {
                    rank: rank + 1,
                    library_row: h.library_index + 1,
                    label: h.label,
                    score: h.score,
                })
                .collect();
            Ok(QueryMatches {
                query_row: qi + 1,
                query: q.label.clone(),
                hits,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    atomic_write(&args.out, to_json_string(&out).as_bytes())
}

fn cmd_extract(args: &ExtractArgs) -> crate::Result<()> {
    let chrom = read_chromatogram(&args.roi, &args.layout.layout())?;
    let n = chrom.n_acquisitions();
    let start = args.start.unwrap_or(1);
    let end = args.end.unwrap_or(n);
    if start < 1 || end > n || start >= end {
        return Err(Error::Config(format!(
            "ROI {start}..={end} must hold at least 2 acquisitions within 1..={n}"
        )));
    }
    let slab = chrom.intensities().slice_move(s![start - 1..end, ..]);

    let spectra: Vec<Spectrum> = match &args.profiles {
        Some(path) => {
            let profiles = read_matrix(path, args.layout.delimiter)?;
            let factors = if args.quantities.is_empty() {
                ParafacFactors::from_profiles(profiles)?
            } else {
                ParafacFactors::new(profiles, args.quantities.clone())?
            };
            let a = extract_spectra(slab, &factors)?;
            a.axis_iter(Axis(1))
                .enumerate()
                .map(|(k, col)| {
                    // mass spectra are nonnegative; negative loadings are noise
                    Spectrum::new(
                        col.iter().map(|v| v.max(0.0)).collect(),
                        Some(format!("component_{}", k + 1)),
                    )
                })
                .collect::<crate::Result<_>>()?
        }
        None => {
            let mut s = rank1_spectrum(slab)?;
            s.label = Some("rank1".into());
            vec![s]
        }
    };
    atomic_write(&args.out, spectra_to_csv(&spectra, chrom.mz_labels()).as_bytes())
}
