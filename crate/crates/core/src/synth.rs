//! Synthetic chromatograms with known peaks, and detection sweeps over them.
//!
//! A peak contributes `amplitude · noise_sigma · exp(-(i - apex)² / 2σ²) · s`
//! to acquisition `i`, where `s` is a unit-norm spectrum. Noise is i.i.d.
//! Gaussian from a ChaCha8 stream seeded from `SyntheticSpec::seed` and is not
//! clipped at zero.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chromatogram::Chromatogram;
use crate::error::{Error, Result};
use crate::pipeline::{run_frmv, FrmvConfig, FrmvResult};

/// One Gaussian elution peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSpec {
    /// 1-based acquisition of the apex.
    pub apex: usize,
    /// Standard deviation of the elution profile, in acquisitions.
    pub width_sigma: f64,
    /// Apex height as a multiple of the noise standard deviation.
    pub amplitude: f64,
    /// Unit-norm, nonnegative fragment spectrum.
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub peaks: Vec<PeakSpec>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 3 || self.cols < 1 {
            return Err(Error::Config(format!(
                "synthetic chromatogram must be at least 3 x 1, got {} x {}",
                self.rows, self.cols
            )));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!(
                "noise_sigma must be positive, got {}",
                self.noise_sigma
            )));
        }
        for (k, p) in self.peaks.iter().enumerate() {
            let id = k + 1;
            if p.apex < 1 || p.apex > self.rows {
                return Err(Error::Config(format!(
                    "peak {id}: apex {} outside 1..={}",
                    p.apex, self.rows
                )));
            }
            if !(p.width_sigma > 0.0) || !p.width_sigma.is_finite() {
                return Err(Error::Config(format!("peak {id}: width_sigma must be positive")));
            }
            if !p.amplitude.is_finite() {
                return Err(Error::Config(format!("peak {id}: amplitude must be finite")));
            }
            if p.spectrum.len() != self.cols {
                return Err(Error::Dimension(format!(
                    "peak {id}: spectrum has {} channels, expected {}",
                    p.spectrum.len(),
                    self.cols
                )));
            }
            if p.spectrum.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Config(format!("peak {id}: spectrum must be nonnegative")));
            }
            let norm = p.spectrum.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "peak {id}: spectrum must have unit norm (got {norm})"
                )));
            }
        }
        Ok(())
    }

    /// Acquisitions within ±2σ of the apex of peak `k`, 1-based and clipped
    /// to the chromatogram.
    pub fn peak_support(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        let p = &self.peaks[k];
        let reach = 2.0 * p.width_sigma;
        let lo = (p.apex as f64 - reach).ceil().max(1.0) as usize;
        let hi = (p.apex as f64 + reach).floor().min(self.rows as f64) as usize;
        lo..=hi
    }
}

/// A nonnegative unit-norm spectrum drawn deterministically from `seed`.
pub fn random_spectrum(cols: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let normal = Normal::new(0.0_f64, 1.0).expect("unit normal");
    let raw: Vec<f64> = (0..cols).map(|_| normal.sample(&mut rng).abs()).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        raw.into_iter().map(|v| v / norm).collect()
    } else {
        let mut flat = vec![0.0; cols];
        if let Some(first) = flat.first_mut() {
            *first = 1.0;
        }
        flat
    }
}

/// Render the chromatogram described by `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<Chromatogram> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
    let mut data = Array2::<f64>::zeros((spec.rows, spec.cols));
    for v in data.iter_mut() {
        *v = normal.sample(&mut rng);
    }
    for peak in &spec.peaks {
        if peak.amplitude == 0.0 {
            continue;
        }
        let height = peak.amplitude * spec.noise_sigma;
        let two_var = 2.0 * peak.width_sigma * peak.width_sigma;
        for (i, mut row) in data.rows_mut().into_iter().enumerate() {
            let d = (i + 1) as f64 - peak.apex as f64;
            let h = height * (-(d * d) / two_var).exp();
            for (v, s) in row.iter_mut().zip(&peak.spectrum) {
                *v += h * s;
            }
        }
    }
    Chromatogram::new(data)
}

/// Detection outcome for one peak in one (amplitude, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub amplitude: f64,
    pub seed: u64,
    /// 1-based index into the template's peak list.
    pub peak_id: usize,
    /// At least half of the ±2σ support lies inside ROIs.
    pub detected: bool,
    /// Total length of the ROIs that overlap the peak's support.
    pub roi_width: usize,
    /// Number of ROIs in the whole chromatogram.
    pub roi_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSummary {
    pub amplitude: f64,
    pub seeds: usize,
    pub peaks: usize,
    pub detected: usize,
    pub detection_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: FrmvConfig,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<AmplitudeSummary>,
}

impl SweepReport {
    pub fn rate(&self, amplitude: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.amplitude == amplitude)
            .map(|s| s.detection_rate)
    }
}

/// Score every template peak against a finished run.
pub fn score_peaks(spec: &SyntheticSpec, result: &FrmvResult) -> Vec<(bool, usize)> {
    (0..spec.peaks.len())
        .map(|k| {
            let support = spec.peak_support(k);
            let len = support.clone().count();
            let inside = support
                .clone()
                .filter(|&i| result.bool_cutoff[i - 1] == 1)
                .count();
            let width = result
                .rois
                .iter()
                .filter(|r| r.start_index <= *support.end() && r.end_index >= *support.start())
                .map(|r| r.len())
                .sum();
            (len > 0 && 2 * inside >= len, width)
        })
        .collect()
}

/// Run the detector over every (amplitude, seed) pair, with every template
/// peak's amplitude replaced by the sweep amplitude.
pub fn sweep(
    template: &SyntheticSpec,
    amplitudes: &[f64],
    seeds: &[u64],
    config: &FrmvConfig,
) -> Result<SweepReport> {
    if amplitudes.is_empty() || seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one amplitude and one seed".into()));
    }
    config.validate()?;
    let cells: Vec<(f64, u64)> = amplitudes
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();

    let per_cell = cells
        .par_iter()
        .map(|&(amplitude, seed)| {
            let mut spec = template.clone();
            spec.seed = seed;
            for p in &mut spec.peaks {
                p.amplitude = amplitude;
            }
            let chrom = generate(&spec)?;
            let result = run_frmv(&chrom, config)?;
            Ok(score_peaks(&spec, &result)
                .into_iter()
                .enumerate()
                .map(|(k, (detected, roi_width))| SweepRow {
                    amplitude,
                    seed,
                    peak_id: k + 1,
                    detected,
                    roi_width,
                    roi_count: result.rois.len(),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = per_cell.into_iter().flatten().collect();

    let summary = amplitudes
        .iter()
        .map(|&a| {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.amplitude == a).collect();
            let detected = cell.iter().filter(|r| r.detected).count();
            AmplitudeSummary {
                amplitude: a,
                seeds: seeds.len(),
                peaks: template.peaks.len(),
                detected,
                detection_rate: if cell.is_empty() {
                    0.0
                } else {
                    detected as f64 / cell.len() as f64
                },
            }
        })
        .collect();

    Ok(SweepReport {
        config: *config,
        rows,
        summary,
    })
}

/// Single-peak template: `rows × cols`, apex at `rows / 2`, width `sigma`.
pub fn single_peak_template(rows: usize, cols: usize, sigma: f64, spectrum_seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        rows,
        cols,
        peaks: vec![PeakSpec {
            apex: rows / 2,
            width_sigma: sigma,
            amplitude: 0.0,
            spectrum: random_spectrum(cols, spectrum_seed),
        }],
        noise_sigma: 1.0,
        seed: 0,
    }
}
