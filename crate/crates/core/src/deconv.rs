//! Spectra from regions of interest.
//!
//! Given per-sample elution profiles `B` (time × k) and relative quantities
//! `D = diag(d)` for an ROI slab `X` (time × m/z), the component spectra are
//! the least-squares solution of `X ≈ B D Aᵀ`:
//!
//! ```text
//! A = Xᵀ B D (D Bᵀ B D)⁻¹
//! ```
//!
//! computed by a Cholesky solve of the k × k normal equations rather than an
//! explicit inverse. Spectra are compared with the cosine match factor on a
//! 0–100 scale.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, symmetric_eigen};

/// Normal-equation matrices with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Component profiles and relative quantities for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ParafacFactors {
    /// Elution profiles, one column per component (time × k).
    pub profiles: Array2<f64>,
    /// Diagonal of `D`, one nonnegative entry per component.
    pub quantities: Vec<f64>,
}

impl ParafacFactors {
    pub fn new(profiles: Array2<f64>, quantities: Vec<f64>) -> Result<Self> {
        let k = profiles.ncols();
        if k == 0 {
            return Err(Error::Dimension("at least one component is required".into()));
        }
        if quantities.len() != k {
            return Err(Error::Dimension(format!(
                "{} quantities for {k} components",
                quantities.len()
            )));
        }
        if let Some(d) = quantities.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(Error::Config(format!("quantities must be finite and >= 0, got {d}")));
        }
        if let Some(c) = profiles
            .axis_iter(Axis(1))
            .position(|col| col.iter().all(|&v| v == 0.0))
        {
            return Err(Error::Config(format!("profile column {} is all zero", c + 1)));
        }
        Ok(ParafacFactors {
            profiles,
            quantities,
        })
    }

    /// Unit quantities.
    pub fn from_profiles(profiles: Array2<f64>) -> Result<Self> {
        let k = profiles.ncols();
        Self::new(profiles, vec![1.0; k])
    }

    pub fn n_components(&self) -> usize {
        self.quantities.len()
    }

    fn scaled_profiles(&self) -> Array2<f64> {
        let d = Array1::from(self.quantities.clone());
        &self.profiles * &d
    }

    /// `D Bᵀ B D`, the k × k normal-equation matrix.
    pub fn normal_matrix(&self) -> Array2<f64> {
        let bd = self.scaled_profiles();
        bd.t().dot(&bd)
    }
}

/// A mass spectrum: nonnegative intensities over m/z channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub intensities: Vec<f64>,
    pub label: Option<String>,
}

impl Spectrum {
    pub fn new(intensities: Vec<f64>, label: Option<String>) -> Result<Self> {
        if let Some(v) = intensities.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!(
                "spectrum intensities must be finite and >= 0, got {v}"
            )));
        }
        Ok(Spectrum { intensities, label })
    }

    pub fn norm(&self) -> f64 {
        self.intensities.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Component spectra (m/z × k) for the ROI slab `xk` (time × m/z).
pub fn extract_spectra(xk: ArrayView2<'_, f64>, factors: &ParafacFactors) -> Result<Array2<f64>> {
    if xk.nrows() != factors.profiles.nrows() {
        return Err(Error::Dimension(format!(
            "ROI has {} acquisitions but profiles have {} rows",
            xk.nrows(),
            factors.profiles.nrows()
        )));
    }
    let bd = factors.scaled_profiles();
    let normal = bd.t().dot(&bd);

    let eig = symmetric_eigen(normal.view())?;
    let largest = eig.values.first().copied().unwrap_or(0.0);
    let smallest = eig.values.last().copied().unwrap_or(0.0);
    let condition = if smallest > 0.0 {
        largest / smallest
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }

    // A · N = Xᵀ B D  ⇔  N · Aᵀ = (Xᵀ B D)ᵀ = D Bᵀ X
    let rhs = bd.t().dot(&xk);
    let at = cholesky_solve(normal.view(), rhs.view())?;
    Ok(at.reversed_axes())
}

/// Dominant right singular vector of the mean-centered ROI, sign-fixed so its
/// largest-magnitude entry is positive, negatives clipped, unit norm.
///
/// If the ROI has no variation over time, its mean spectrum is used.
pub fn rank1_spectrum(xk: ArrayView2<'_, f64>) -> Result<Spectrum> {
    let (rows, cols) = xk.dim();
    if rows < 2 {
        return Err(Error::Dimension(format!(
            "rank1_spectrum needs at least 2 acquisitions, got {rows}"
        )));
    }
    if cols == 0 || xk.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSpectrum { label: None });
    }
    let mean = xk.mean_axis(Axis(0)).expect("rows >= 2");
    let centered = &xk - &mean;

    let mut direction = if centered.iter().all(|&v| v == 0.0) {
        mean
    } else if rows <= cols {
        let gram = centered.dot(&centered.t());
        let eig = symmetric_eigen(gram.view())?;
        centered.t().dot(&eig.vectors.column(0))
    } else {
        let gram = centered.t().dot(&centered);
        let eig = symmetric_eigen(gram.view())?;
        eig.vectors.column(0).to_owned()
    };

    let pivot = direction
        .iter()
        .copied()
        .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if pivot < 0.0 {
        direction.mapv_inplace(|v| -v);
    }
    direction.mapv_inplace(|v| v.max(0.0));
    let norm = direction.dot(&direction).sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroSpectrum { label: None });
    }
    Spectrum::new(direction.mapv(|v| v / norm).to_vec(), None)
}

/// `100 · cos θ` between two spectra.
pub fn match_factor(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.intensities.len() != b.intensities.len() {
        return Err(Error::Dimension(format!(
            "spectra have {} and {} channels",
            a.intensities.len(),
            b.intensities.len()
        )));
    }
    let na = a.norm();
    let nb = b.norm();
    if !(na > 0.0) {
        return Err(Error::ZeroSpectrum {
            label: a.label.clone(),
        });
    }
    if !(nb > 0.0) {
        return Err(Error::ZeroSpectrum {
            label: b.label.clone(),
        });
    }
    let dot: f64 = a
        .intensities
        .iter()
        .zip(&b.intensities)
        .map(|(x, y)| x * y)
        .sum();
    Ok((100.0 * dot / (na * nb)).clamp(0.0, 100.0))
}

/// One library hit for a query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LibraryHit {
    pub library_index: usize,
    pub label: Option<String>,
    pub score: f64,
}

/// Score `query` against every library entry, best first. Ties keep library
/// order.
pub fn rank_matches(query: &Spectrum, library: &[Spectrum]) -> Result<Vec<LibraryHit>> {
    let mut hits = library
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            Ok(LibraryHit {
                library_index: i,
                label: entry.label.clone(),
                score: match_factor(query, entry)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    hits.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec(), None).unwrap()
    }

    #[test]
    fn match_factor_examples() {
        let a = spec(&[1.0, 2.0, 3.0]);
        let b = spec(&[3.0, 2.0, 1.0]);
        assert!((match_factor(&a, &a).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(match_factor(&spec(&[1.0, 0.0]), &spec(&[0.0, 4.0])).unwrap(), 0.0);
        // a·b = 10, |a|² = |b|² = 14
        assert!((match_factor(&a, &b).unwrap() - 1000.0 / 14.0).abs() < 1e-12);
        assert_eq!(match_factor(&a, &b).unwrap(), match_factor(&b, &a).unwrap());
    }

    #[test]
    fn match_factor_rejects_zero_and_mismatch() {
        assert!(matches!(
            match_factor(&spec(&[0.0, 0.0]), &spec(&[1.0, 0.0])),
            Err(Error::ZeroSpectrum { .. })
        ));
        assert!(match_factor(&spec(&[1.0]), &spec(&[1.0, 0.0])).is_err());
        assert!(Spectrum::new(vec![-1.0], None).is_err());
    }

    #[test]
    fn extraction_reduces_with_orthonormal_profiles() {
        let s = 0.5_f64.sqrt();
        let b = array![[s, 0.0], [s, 0.0], [0.0, 1.0]];
        let x = array![[1.0, 2.0, 0.0, 4.0], [3.0, 0.5, 1.0, 0.0], [2.0, 2.0, 7.0, 1.0]];
        let f = ParafacFactors::from_profiles(b.clone()).unwrap();
        let a = extract_spectra(x.view(), &f).unwrap();
        let expect = x.t().dot(&b);
        for (g, e) in a.iter().zip(expect.iter()) {
            assert!((g - e).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_rank_one_extraction() {
        let profile = Array1::from_shape_fn(9, |i| (-((i as f64 - 4.0).powi(2)) / 4.0).exp());
        let spectrum = array![0.0, 3.0, 1.0, 0.0, 5.0];
        let x = Array2::from_shape_fn((9, 5), |(i, j)| profile[i] * spectrum[j]);
        let b = profile.clone().insert_axis(Axis(1));
        let f = ParafacFactors::new(b, vec![2.5]).unwrap();
        let a = extract_spectra(x.view(), &f).unwrap();
        let got = Spectrum::new(a.column(0).mapv(|v| v.max(0.0)).to_vec(), None).unwrap();
        assert!((match_factor(&got, &Spectrum::new(spectrum.to_vec(), None).unwrap()).unwrap() - 100.0).abs() < 1e-9);

        let r1 = rank1_spectrum(x.view()).unwrap();
        assert!((r1.norm() - 1.0).abs() < 1e-12);
        assert!((match_factor(&r1, &Spectrum::new(spectrum.to_vec(), None).unwrap()).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn singular_profiles_are_reported() {
        let b = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let f = ParafacFactors::from_profiles(b).unwrap();
        let x = Array2::<f64>::ones((3, 4));
        match extract_spectra(x.view(), &f) {
            Err(Error::Singular { condition }) => assert!(condition > MAX_CONDITION),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn factor_validation() {
        assert!(ParafacFactors::new(array![[1.0], [2.0]], vec![-1.0]).is_err());
        assert!(ParafacFactors::new(array![[1.0], [2.0]], vec![1.0, 1.0]).is_err());
        assert!(ParafacFactors::new(array![[0.0], [0.0]], vec![1.0]).is_err());
    }

    #[test]
    fn rank1_rejects_degenerate() {
        assert!(rank1_spectrum(Array2::<f64>::zeros((4, 3)).view()).is_err());
        assert!(rank1_spectrum(array![[1.0, 2.0]].view()).is_err());
        // constant rows fall back to the mean spectrum
        let flat = array![[1.0, 2.0, 0.0], [1.0, 2.0, 0.0]];
        let s = rank1_spectrum(flat.view()).unwrap();
        assert!((s.intensities[1] / s.intensities[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_orders_by_score() {
        let q = spec(&[1.0, 2.0, 3.0]);
        let lib = vec![spec(&[3.0, 2.0, 1.0]), spec(&[1.0, 2.0, 3.0]), spec(&[0.0, 0.0, 1.0])];
        let hits = rank_matches(&q, &lib).unwrap();
        assert_eq!(hits.iter().map(|h| h.library_index).collect::<Vec<_>>(), vec![1, 2, 0]);
        assert!(rank_matches(&q, &[]).unwrap().is_empty());
    }
}
