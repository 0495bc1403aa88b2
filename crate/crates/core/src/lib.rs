//! Untargeted region-of-interest (ROI) selection for GC-MS chromatograms.
//!
//! A window of `wndw` acquisitions slides down the chromatogram one
//! acquisition at a time. Each window is autoscaled per m/z channel and the
//! ratio of its squared first and second singular values is read as a pseudo
//! F statistic with `(wndw - 1, wndw - 2)` degrees of freedom. Window
//! probabilities are pooled per acquisition through one-degree-of-freedom χ²
//! values, and acquisitions whose pooled probability reaches the cutoff form
//! the regions of interest.
//!
//! ```
//! use frmv::{run_frmv, FrmvConfig};
//! use frmv::synth::{generate, single_peak_template};
//!
//! let mut spec = single_peak_template(300, 40, 3.0, 7);
//! spec.peaks[0].amplitude = 50.0;
//! let chrom = generate(&spec)?;
//!
//! let result = run_frmv(&chrom, &FrmvConfig::default())?;
//! assert!(result.rois.iter().any(|r| r.contains(150)));
//! # Ok::<(), frmv::Error>(())
//! ```
//!
//! The guide in `book/` walks through each stage.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod chromatogram;
pub mod cli;
pub mod deconv;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod plot;
pub mod special;
pub mod synth;
pub mod window;

pub use chromatogram::Chromatogram;
pub use error::{Error, Result};
pub use pipeline::{
    accumulate, acquisition_probabilities, extract_rois, run_frmv, window_probabilities,
    AccumulatorState, FrmvConfig, FrmvResult, RoiInterval,
};
pub use window::{autoscale, pseudo_f, scan, PseudoF, PseudoFSeries, WindowView};

// The book's code listings compile and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/pseudo-f-ratio.md")]
    pub struct PseudoFRatio;
    #[doc = include_str!("../../../book/src/special-functions.md")]
    pub struct SpecialFunctions;
    #[doc = include_str!("../../../book/src/pooling.md")]
    pub struct Pooling;
    #[doc = include_str!("../../../book/src/outputs.md")]
    pub struct Outputs;
    #[doc = include_str!("../../../book/src/spectra.md")]
    pub struct Spectra;
    #[doc = include_str!("../../../book/src/synthetic.md")]
    pub struct Synthetic;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../book/src/file-formats.md")]
    pub struct FileFormats;
}
