use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// An I × J intensity matrix: acquisitions (rows) by m/z channels (columns).
///
/// Intensities must be finite. They are not required to be nonnegative, since
/// baseline-subtracted or simulated data routinely dips below zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromatogram {
    intensities: Array2<f64>,
    retention_times: Option<Vec<f64>>,
    mz_labels: Option<Vec<String>>,
}

impl Chromatogram {
    pub fn new(intensities: Array2<f64>) -> Result<Self> {
        let (rows, cols) = intensities.dim();
        if rows < 3 {
            return Err(Error::Config(format!(
                "a chromatogram needs at least 3 acquisitions, got {rows}"
            )));
        }
        if cols < 1 {
            return Err(Error::Config("a chromatogram needs at least one m/z channel".into()));
        }
        if let Some(((i, j), v)) = intensities.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite intensity {v} at acquisition {}, channel {}",
                i + 1,
                j + 1
            )));
        }
        Ok(Chromatogram {
            intensities,
            retention_times: None,
            mz_labels: None,
        })
    }

    /// Attach retention times (minutes); must be strictly increasing with one
    /// entry per acquisition.
    pub fn with_retention_times(mut self, times: Vec<f64>) -> Result<Self> {
        if times.len() != self.n_acquisitions() {
            return Err(Error::Dimension(format!(
                "{} retention times for {} acquisitions",
                times.len(),
                self.n_acquisitions()
            )));
        }
        if let Some(i) = times
            .windows(2)
            .position(|w| !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite())
        {
            return Err(Error::Config(format!(
                "retention times must be finite and strictly increasing (acquisition {})",
                i + 2
            )));
        }
        self.retention_times = Some(times);
        Ok(self)
    }

    pub fn with_mz_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_channels() {
            return Err(Error::Dimension(format!(
                "{} m/z labels for {} channels",
                labels.len(),
                self.n_channels()
            )));
        }
        self.mz_labels = Some(labels);
        Ok(self)
    }

    pub fn n_acquisitions(&self) -> usize {
        self.intensities.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.intensities.ncols()
    }

    pub fn intensities(&self) -> ArrayView2<'_, f64> {
        self.intensities.view()
    }

    pub fn retention_times(&self) -> Option<&[f64]> {
        self.retention_times.as_deref()
    }

    pub fn mz_labels(&self) -> Option<&[String]> {
        self.mz_labels.as_deref()
    }

    /// Total ion chromatogram: the row sums.
    pub fn tic(&self) -> Vec<f64> {
        self.intensities
            .axis_iter(Axis(0))
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Same axes, different intensities.
    pub(crate) fn with_intensities(&self, intensities: Array2<f64>) -> Chromatogram {
        debug_assert_eq!(intensities.dim(), self.intensities.dim());
        Chromatogram {
            intensities,
            retention_times: self.retention_times.clone(),
            mz_labels: self.mz_labels.clone(),
        }
    }

    /// Multiply every intensity by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Chromatogram> {
        Chromatogram::new(self.intensities.mapv(|v| v * factor)).map(|c| Chromatogram {
            retention_times: self.retention_times.clone(),
            mz_labels: self.mz_labels.clone(),
            ..c
        })
    }
}
