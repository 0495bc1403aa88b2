//! Window probabilities, χ² accumulation and the masked outputs.
//!
//! Every window probability `p` is converted to a one-degree-of-freedom χ²
//! value, `chi2inv(p, 1)`, and added to every acquisition the window covers.
//! An acquisition covered by `c` windows then gets `pv = chi2cdf(sum, c)`, so
//! the first and last acquisitions carry a single degree of freedom and the
//! interior carries `wndw`.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::chromatogram::Chromatogram;
use crate::error::{Error, Result};
use crate::special::{chi2cdf, chi2inv, fcdf};
use crate::window::{scan, PseudoF, PseudoFSeries};

/// Parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrmvConfig {
    /// Moving-window size in acquisitions.
    pub wndw: usize,
    /// Probability threshold; acquisitions with `pv >= cutoff` are kept.
    pub cutoff: f64,
    /// Channels whose within-window standard deviation is at most this are
    /// zeroed during autoscaling.
    pub epsilon: f64,
    /// Window probabilities are clamped to `[0, p_clamp]` before the χ²
    /// inverse, which diverges at 1.
    pub p_clamp: f64,
    /// ROIs shorter than this many acquisitions are dropped from the interval
    /// list (the masks are unaffected). 0 keeps everything.
    pub min_roi_len: usize,
}

impl Default for FrmvConfig {
    fn default() -> Self {
        FrmvConfig {
            wndw: 10,
            cutoff: 0.7,
            epsilon: 0.0,
            p_clamp: 1.0 - 1e-12,
            min_roi_len: 0,
        }
    }
}

impl FrmvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.wndw < 3 {
            return Err(Error::Config(format!(
                "window size must satisfy wndw >= 3 (got {})",
                self.wndw
            )));
        }
        if !(0.0..=1.0).contains(&self.cutoff) {
            return Err(Error::Config(format!(
                "cutoff must lie in [0, 1] (got {})",
                self.cutoff
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0 (got {})",
                self.epsilon
            )));
        }
        if !(self.p_clamp > 0.0 && self.p_clamp < 1.0) {
            return Err(Error::Config(format!(
                "p_clamp must lie in (0, 1) (got {})",
                self.p_clamp
            )));
        }
        Ok(())
    }

    fn validate_for(&self, n_acquisitions: usize) -> Result<()> {
        self.validate()?;
        if self.wndw > n_acquisitions {
            return Err(Error::Config(format!(
                "window size {} exceeds the {} acquisitions available",
                self.wndw, n_acquisitions
            )));
        }
        Ok(())
    }
}

/// Summed χ² values and window coverage per acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorState {
    pub chi2_sum: Vec<f64>,
    pub coverage: Vec<u32>,
}

/// A maximal run of acquisitions at or above the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiInterval {
    /// 1-based, inclusive.
    pub start_index: usize,
    /// 1-based, inclusive.
    pub end_index: usize,
    pub start_time: Option<f64>,
    pub end_time: Option<f64>,
    /// Largest `pv` inside the interval.
    pub peak_probability: f64,
}

impl RoiInterval {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start_index..=self.end_index).contains(&index)
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FrmvResult {
    pub config: FrmvConfig,
    /// Probability that each acquisition lies in a region of interest (`pv`).
    pub pv: Vec<f64>,
    /// `pv` where it meets the cutoff, 0 elsewhere (`modPVans`).
    pub mod_pv: Vec<f64>,
    /// 1 where `pv >= cutoff`, else 0 (`boolCutOff`).
    pub bool_cutoff: Vec<u8>,
    /// Row sums of the input (`ticData`).
    pub tic: Vec<f64>,
    /// `tic ⊙ bool_cutoff` (`noiseDroppedTIC`).
    pub noise_dropped_tic: Vec<f64>,
    /// The input with every row outside an ROI zeroed (`noiseDropped`).
    pub noise_dropped: Chromatogram,
    pub rois: Vec<RoiInterval>,
}

impl FrmvResult {
    pub fn n_acquisitions(&self) -> usize {
        self.pv.len()
    }
}

/// F CDF of each pseudo F-ratio. Saturated windows map to 1, degenerate
/// windows to 0.
pub fn window_probabilities(series: &PseudoFSeries) -> Result<Vec<f64>> {
    series
        .values
        .iter()
        .map(|v| match *v {
            PseudoF::Ratio(f) => fcdf(f, series.dof),
            PseudoF::Saturated => Ok(1.0),
            PseudoF::Degenerate => Ok(0.0),
        })
        .collect()
}

/// Spread each window's χ² value over the acquisitions it covers.
///
/// Windows are summed in ascending start order.
pub fn accumulate(
    window_probs: &[f64],
    n_acquisitions: usize,
    wndw: usize,
    p_clamp: f64,
) -> Result<AccumulatorState> {
    if wndw == 0 || wndw > n_acquisitions {
        return Err(Error::Config(format!(
            "window size {wndw} incompatible with {n_acquisitions} acquisitions"
        )));
    }
    let expected = n_acquisitions - wndw + 1;
    if window_probs.len() != expected {
        return Err(Error::Dimension(format!(
            "expected {expected} window probabilities, got {}",
            window_probs.len()
        )));
    }
    let mut chi2_sum = vec![0.0; n_acquisitions];
    let mut coverage = vec![0u32; n_acquisitions];
    for (s, &p) in window_probs.iter().enumerate() {
        let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, p_clamp) };
        let q = chi2inv(p, 1)?;
        for i in s..s + wndw {
            chi2_sum[i] += q;
            coverage[i] += 1;
        }
    }
    Ok(AccumulatorState { chi2_sum, coverage })
}

/// `pv[i] = chi2cdf(chi2_sum[i], coverage[i])`.
pub fn acquisition_probabilities(state: &AccumulatorState) -> Result<Vec<f64>> {
    if state.chi2_sum.len() != state.coverage.len() {
        return Err(Error::Dimension(format!(
            "{} χ² sums but {} coverage counts",
            state.chi2_sum.len(),
            state.coverage.len()
        )));
    }
    state
        .chi2_sum
        .iter()
        .zip(&state.coverage)
        .map(|(&x, &k)| chi2cdf(x, k))
        .collect()
}

/// Maximal runs of 1s in `bool_cutoff`, dropping runs shorter than `min_len`.
pub fn extract_rois(
    bool_cutoff: &[u8],
    pv: &[f64],
    retention_times: Option<&[f64]>,
    min_len: usize,
) -> Result<Vec<RoiInterval>> {
    if bool_cutoff.len() != pv.len() || retention_times.is_some_and(|t| t.len() != pv.len()) {
        return Err(Error::Dimension(
            "mask, probabilities and retention times must have equal length".into(),
        ));
    }
    let mut rois = Vec::new();
    let mut i = 0;
    let n = bool_cutoff.len();
    while i < n {
        if bool_cutoff[i] == 0 {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && bool_cutoff[i + 1] != 0 {
            i += 1;
        }
        let end = i;
        i += 1;
        if end - start + 1 < min_len {
            continue;
        }
        let peak = pv[start..=end].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rois.push(RoiInterval {
            start_index: start + 1,
            end_index: end + 1,
            start_time: retention_times.map(|t| t[start]),
            end_time: retention_times.map(|t| t[end]),
            peak_probability: peak,
        });
    }
    Ok(rois)
}

/// The full pipeline: scan, window probabilities, accumulation, acquisition
/// probabilities, thresholding and masking.
pub fn run_frmv(chromatogram: &Chromatogram, config: &FrmvConfig) -> Result<FrmvResult> {
    let n = chromatogram.n_acquisitions();
    config.validate_for(n)?;

    let series = scan(chromatogram, config.wndw, config.epsilon)?;
    let window_probs = window_probabilities(&series)?;
    let state = accumulate(&window_probs, n, config.wndw, config.p_clamp)?;
    let pv = acquisition_probabilities(&state)?;

    let bool_cutoff: Vec<u8> = pv.iter().map(|&p| u8::from(p >= config.cutoff)).collect();
    let mod_pv = pv
        .iter()
        .zip(&bool_cutoff)
        .map(|(&p, &b)| if b == 1 { p } else { 0.0 })
        .collect();
    let tic = chromatogram.tic();
    let noise_dropped_tic = tic
        .iter()
        .zip(&bool_cutoff)
        .map(|(&t, &b)| t * f64::from(b))
        .collect();

    let mut masked = Array2::<f64>::zeros(chromatogram.intensities().dim());
    for ((mut dst, src), &b) in masked
        .axis_iter_mut(Axis(0))
        .zip(chromatogram.intensities().axis_iter(Axis(0)))
        .zip(&bool_cutoff)
    {
        if b == 1 {
            dst.assign(&src);
        }
    }

    let rois = extract_rois(
        &bool_cutoff,
        &pv,
        chromatogram.retention_times(),
        config.min_roi_len,
    )?;

    Ok(FrmvResult {
        config: *config,
        pv,
        mod_pv,
        bool_cutoff,
        tic,
        noise_dropped_tic,
        noise_dropped: chromatogram.with_intensities(masked),
        rois,
    })
}
