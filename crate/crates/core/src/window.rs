//! Moving-window pseudo F-ratios.
//!
//! Each window of `wndw` consecutive acquisitions is autoscaled per m/z
//! channel, and the squared ratio of its two leading singular values is taken
//! as a pseudo F statistic with `(wndw - 1, wndw - 2)` degrees of freedom.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::chromatogram::Chromatogram;
use crate::error::{Error, Result};
use crate::linalg::top2_singular;
use crate::special::FDof;

/// Squared second singular values at or below this count as zero.
pub const SATURATION_TINY: f64 = 1e-300;

/// `wndw` consecutive acquisitions starting at 1-based index `start`.
#[derive(Debug, Clone)]
pub struct WindowView<'a> {
    pub start: usize,
    pub rows: ArrayView2<'a, f64>,
}

impl<'a> WindowView<'a> {
    pub fn new(chromatogram: &'a Chromatogram, start: usize, wndw: usize) -> Result<Self> {
        let n = chromatogram.n_acquisitions();
        if wndw < 3 {
            return Err(Error::Config(format!(
                "window size must satisfy wndw >= 3 (got {wndw})"
            )));
        }
        if wndw > n {
            return Err(Error::Config(format!(
                "window size {wndw} exceeds the {n} acquisitions available"
            )));
        }
        if start < 1 || start > n - wndw + 1 {
            return Err(Error::Config(format!(
                "window start {start} outside 1..={}",
                n - wndw + 1
            )));
        }
        let rows = chromatogram
            .intensities()
            .slice_move(ndarray::s![start - 1..start - 1 + wndw, ..]);
        Ok(WindowView { start, rows })
    }
}

/// Pseudo F-ratio of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PseudoF {
    /// `sigma1² / sigma2²`, always at least 1.
    Ratio(f64),
    /// The second singular value vanished: a rank-1 window.
    Saturated,
    /// Every channel was constant over the window, so there is no structure.
    Degenerate,
}

impl PseudoF {
    /// The ratio as an extended real: `+inf` when saturated, `NaN` when degenerate.
    pub fn value(self) -> f64 {
        match self {
            PseudoF::Ratio(v) => v,
            PseudoF::Saturated => f64::INFINITY,
            PseudoF::Degenerate => f64::NAN,
        }
    }
}

/// Pseudo F-ratios for every window start, in start order.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoFSeries {
    pub values: Vec<PseudoF>,
    pub dof: FDof,
    pub wndw: usize,
}

/// Autoscale each column of `window` to zero mean and unit sample standard
/// deviation. Columns that are exactly constant, or whose standard deviation
/// is at most `epsilon`, become all-zero.
pub fn autoscale(window: &WindowView<'_>, epsilon: f64) -> Array2<f64> {
    autoscale_counted(window.rows, epsilon).0
}

/// Autoscaled copy plus the number of columns that survived.
fn autoscale_counted(rows: ArrayView2<'_, f64>, epsilon: f64) -> (Array2<f64>, usize) {
    let n = rows.nrows();
    let mut out = Array2::<f64>::zeros(rows.dim());
    let mut active = 0;
    for (src, mut dst) in rows.axis_iter(Axis(1)).zip(out.axis_iter_mut(Axis(1))) {
        let first = src[0];
        if src.iter().all(|&v| v == first) {
            continue;
        }
        let mean = src.sum() / n as f64;
        let ss: f64 = src.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if !(sd > epsilon) {
            continue;
        }
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d = (s - mean) / sd;
        }
        active += 1;
    }
    (out, active)
}

/// `sigma1² / sigma2²`, or `+inf` once `sigma2²` is at most [`SATURATION_TINY`].
pub fn pseudo_f(sigma1: f64, sigma2: f64) -> f64 {
    let s2 = sigma2 * sigma2;
    if s2 <= SATURATION_TINY {
        f64::INFINITY
    } else {
        (sigma1 * sigma1) / s2
    }
}

fn window_ratio(rows: ArrayView2<'_, f64>, epsilon: f64) -> Result<PseudoF> {
    let (scaled, active) = autoscale_counted(rows, epsilon);
    if active == 0 {
        return Ok(PseudoF::Degenerate);
    }
    let (s1, s2) = top2_singular(scaled.view())?;
    let f = pseudo_f(s1, s2);
    Ok(if f.is_infinite() {
        PseudoF::Saturated
    } else {
        PseudoF::Ratio(f)
    })
}

/// Slide a window of `wndw` acquisitions down the chromatogram one
/// acquisition at a time and compute the pseudo F-ratio at each position.
///
/// Windows are evaluated in parallel on the current rayon pool; each result
/// depends only on its own window, so the output does not depend on the
/// number of threads.
pub fn scan(chromatogram: &Chromatogram, wndw: usize, epsilon: f64) -> Result<PseudoFSeries> {
    let dof = FDof::for_window(wndw)?;
    let n = chromatogram.n_acquisitions();
    if wndw > n {
        return Err(Error::Config(format!(
            "window size {wndw} exceeds the {n} acquisitions available"
        )));
    }
    let data = chromatogram.intensities();
    let values = (0..n - wndw + 1)
        .into_par_iter()
        .map(|s| window_ratio(data.slice(ndarray::s![s..s + wndw, ..]), epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoFSeries { values, dof, wndw })
}
