//! CSV and JSON reading and writing.
//!
//! Chromatograms use a wide layout: one row per acquisition, one column per
//! m/z channel, optionally preceded by a header row of m/z labels and a
//! leading retention-time column. Floating-point output is written with 17
//! significant digits so every `f64` survives a write/read cycle unchanged.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use crate::chromatogram::Chromatogram;
use crate::deconv::Spectrum;
use crate::error::{Error, Result};
use crate::pipeline::{FrmvConfig, FrmvResult};

/// How a chromatogram CSV is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvLayout {
    /// The first row holds m/z labels.
    pub has_header: bool,
    /// The first column holds retention times in minutes.
    pub has_time_column: bool,
    pub delimiter: u8,
}

impl Default for CsvLayout {
    fn default() -> Self {
        CsvLayout {
            has_header: false,
            has_time_column: false,
            delimiter: b',',
        }
    }
}

impl CsvLayout {
    pub fn validate(&self) -> Result<()> {
        let d = self.delimiter;
        if d.is_ascii_digit() || matches!(d, b'-' | b'.' | b'\n' | b'\r') || !d.is_ascii() {
            return Err(Error::Config(format!(
                "invalid CSV delimiter {:?}",
                char::from(d)
            )));
        }
        Ok(())
    }
}

/// Format with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_cell(path: &Path, row: usize, col: usize, raw: &str) -> Result<f64> {
    let cell = raw.trim();
    let parse_err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        col,
        msg,
    };
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(format!("not a number: {cell:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(format!("non-finite value {cell:?}")));
    }
    Ok(v)
}

/// A numeric table with optional header and leading column.
struct Table {
    header: Option<Vec<String>>,
    lead: Vec<String>,
    values: Array2<f64>,
}

fn read_table(path: &Path, layout: &CsvLayout, numeric_lead: bool) -> Result<Table> {
    layout.validate()?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(layout.delimiter)
        .from_reader(text.as_bytes());

    let skip = usize::from(layout.has_time_column);
    let mut header: Option<Vec<String>> = None;
    let mut lead = Vec::new();
    let mut flat = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row,
            col: 1,
            msg: e.to_string(),
        })?;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if layout.has_header && header.is_none() {
            header = Some(record.iter().skip(skip).map(|c| c.trim().to_string()).collect());
            continue;
        }
        if record.len() <= skip {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                col: record.len().max(1),
                msg: "row has no intensity columns".into(),
            });
        }
        let n = record.len() - skip;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    col: record.len(),
                    msg: format!("ragged row: expected {} fields, found {}", w + skip, record.len()),
                })
            }
            _ => {}
        }
        if skip == 1 {
            let raw = &record[0];
            if numeric_lead {
                parse_cell(path, row, 1, raw)?;
            }
            lead.push(raw.trim().to_string());
        }
        for (j, raw) in record.iter().enumerate().skip(skip) {
            flat.push(parse_cell(path, row, j + 1, raw)?);
        }
    }

    let cols = width.unwrap_or(0);
    let rows = flat.len().checked_div(cols).unwrap_or(0);
    if let (Some(h), true) = (&header, cols > 0) {
        if h.len() != cols {
            return Err(Error::Format {
                path: path.to_path_buf(),
                msg: format!("header has {} labels but rows have {cols} columns", h.len()),
            });
        }
    }
    let values = Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Ok(Table {
        header,
        lead,
        values,
    })
}

/// Read a chromatogram from a delimited text file.
pub fn read_chromatogram(path: impl AsRef<Path>, layout: &CsvLayout) -> Result<Chromatogram> {
    let path = path.as_ref();
    let table = read_table(path, layout, true)?;
    let format_err = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let (rows, cols) = table.values.dim();
    if rows < 3 {
        return Err(format_err(format!(
            "a chromatogram needs at least 3 acquisitions, found {rows}"
        )));
    }
    if cols < 1 {
        return Err(format_err("no intensity columns".into()));
    }
    let mut chrom = Chromatogram::new(table.values).map_err(|e| format_err(e.to_string()))?;
    if layout.has_time_column {
        let times = table
            .lead
            .iter()
            .map(|t| t.parse::<f64>().unwrap_or(f64::NAN))
            .collect();
        chrom = chrom
            .with_retention_times(times)
            .map_err(|e| format_err(e.to_string()))?;
    }
    if let Some(labels) = table.header {
        chrom = chrom
            .with_mz_labels(labels)
            .map_err(|e| format_err(e.to_string()))?;
    }
    Ok(chrom)
}

/// Render a chromatogram in the same layout it would be read back with:
/// header row iff it has m/z labels, time column iff it has retention times.
pub fn chromatogram_to_csv(chrom: &Chromatogram, delimiter: u8) -> String {
    let sep = char::from(delimiter);
    let mut out = String::new();
    let times = chrom.retention_times();
    if let Some(labels) = chrom.mz_labels() {
        let mut cells: Vec<&str> = Vec::with_capacity(labels.len() + 1);
        if times.is_some() {
            cells.push("time");
        }
        cells.extend(labels.iter().map(String::as_str));
        out.push_str(&cells.join(&sep.to_string()));
        out.push('\n');
    }
    for (i, row) in chrom.intensities().rows().into_iter().enumerate() {
        let mut first = true;
        if let Some(t) = times {
            out.push_str(&fmt_f64(t[i]));
            first = false;
        }
        for v in row {
            if !first {
                out.push(sep);
            }
            out.push_str(&fmt_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Write `bytes` to a sibling temporary file, then rename it over `path`.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!(".{file_name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// `<prefix><suffix>`, keeping the prefix's directory.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub(crate) fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Per-acquisition output table.
pub fn vectors_csv(result: &FrmvResult) -> String {
    let times = result.noise_dropped.retention_times();
    let mut out = String::new();
    out.push_str("index,");
    if times.is_some() {
        out.push_str("time,");
    }
    out.push_str("ticData,pv,modPVans,boolCutOff,noiseDroppedTIC\n");
    for i in 0..result.n_acquisitions() {
        let _ = write!(out, "{},", i + 1);
        if let Some(t) = times {
            let _ = write!(out, "{},", fmt_f64(t[i]));
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(result.tic[i]),
            fmt_f64(result.pv[i]),
            fmt_f64(result.mod_pv[i]),
            result.bool_cutoff[i],
            fmt_f64(result.noise_dropped_tic[i]),
        );
    }
    out
}

pub fn rois_json(result: &FrmvResult) -> String {
    to_json_string(&result.rois)
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a FrmvConfig,
    acquisitions: usize,
    channels: usize,
    windows: usize,
    roi_count: usize,
    roi_acquisitions: usize,
    max_pv: f64,
}

pub fn report_json(result: &FrmvResult) -> String {
    let n = result.n_acquisitions();
    let report = RunReport {
        config: &result.config,
        acquisitions: n,
        channels: result.noise_dropped.n_channels(),
        windows: n + 1 - result.config.wndw,
        roi_count: result.rois.len(),
        roi_acquisitions: result.bool_cutoff.iter().map(|&b| usize::from(b)).sum(),
        max_pv: result.pv.iter().copied().fold(0.0, f64::max),
    };
    to_json_string(&report)
}

/// Write the four result files next to `out_prefix` and return their paths:
/// `.vectors.csv`, `.noisedropped.csv`, `.rois.json`, `.report.json`.
///
/// All contents are rendered before anything touches the disk, and each file
/// is written atomically.
pub fn write_result(
    result: &FrmvResult,
    out_prefix: impl AsRef<Path>,
    delimiter: u8,
) -> Result<Vec<PathBuf>> {
    let prefix = out_prefix.as_ref();
    let files = [
        (".vectors.csv", vectors_csv(result)),
        (
            ".noisedropped.csv",
            chromatogram_to_csv(&result.noise_dropped, delimiter),
        ),
        (".rois.json", rois_json(result)),
        (".report.json", report_json(result)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (suffix, body) in files {
        let path = with_suffix(prefix, suffix);
        atomic_write(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Read spectra: a header row (`label`, then m/z labels) followed by one row
/// per spectrum whose first cell is its label.
pub fn read_spectra(path: impl AsRef<Path>, delimiter: u8) -> Result<Vec<Spectrum>> {
    let path = path.as_ref();
    let layout = CsvLayout {
        has_header: true,
        has_time_column: true,
        delimiter,
    };
    let table = read_table(path, &layout, false)?;
    if table.header.is_none() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "spectra file needs a header row".into(),
        });
    }
    table
        .values
        .rows()
        .into_iter()
        .zip(table.lead)
        .map(|(row, label)| {
            Spectrum::new(row.to_vec(), Some(label)).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                msg: e.to_string(),
            })
        })
        .collect()
}

/// Inverse of [`read_spectra`]. `mz_labels` defaults to `1..=J`.
pub fn spectra_to_csv(spectra: &[Spectrum], mz_labels: Option<&[String]>) -> String {
    let width = spectra.first().map_or(0, |s| s.intensities.len());
    let mut out = String::from("label");
    for j in 0..width {
        out.push(',');
        match mz_labels {
            Some(l) => out.push_str(&l[j]),
            None => {
                let _ = write!(out, "{}", j + 1);
            }
        }
    }
    out.push('\n');
    for (k, s) in spectra.iter().enumerate() {
        match &s.label {
            Some(l) => out.push_str(l),
            None => {
                let _ = write!(out, "component_{}", k + 1);
            }
        }
        for v in &s.intensities {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

/// Plain numeric matrix, no header, no label column.
pub fn read_matrix(path: impl AsRef<Path>, delimiter: u8) -> Result<Array2<f64>> {
    let layout = CsvLayout {
        delimiter,
        ..CsvLayout::default()
    };
    Ok(read_table(path.as_ref(), &layout, true)?.values)
}
