//! Reference implementations used only to check the library.
//!
//! None of these share code with the crate: the distribution functions
//! integrate densities numerically, ln Γ uses the Stirling series, the
//! probit comes from statrs, and singular values come from a one-sided
//! Jacobi SVD of the matrix itself.
#![allow(dead_code, clippy::excessive_precision)]

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use frmv::Chromatogram;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
pub const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
pub const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
pub const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// (Kronrod, Gauss) estimates on [a, b].
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (k, g, _) = gk15_abs(f, a, b);
    (k, g)
}

/// Also returns the Kronrod estimate of the integral of |f|.
fn gk15_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[j] * (f1 + f2);
        kabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, g * h, kabs * h.abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, g, kabs) = gk15_abs(f, a, b);
    // stop once the error estimate is at rounding level
    let err = (k - g).abs();
    if err <= tol || err <= 50.0 * f64::EPSILON * kabs || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod integral with relative tolerance `rel`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // coarse pass fixes the absolute scale
    let n = 16;
    let step = (b - a) / n as f64;
    let rough: f64 = (0..n)
        .map(|i| gk15(&f, a + i as f64 * step, a + (i + 1) as f64 * step).0.abs())
        .sum();
    let tol = (rel * rough).max(1e-300);
    (0..n)
        .map(|i| adapt(&f, a + i as f64 * step, a + (i + 1) as f64 * step, tol / n as f64, 30))
        .sum()
}

const QUAD_REL: f64 = 1e-14;

/// F(ν1, ν2) CDF by integrating the unnormalized density.
pub fn f_cdf_oracle(x: f64, nu1: f64, nu2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = nu1 / 2.0;
    let s = (nu1 + nu2) / 2.0;
    let ln_density = |t: f64| (a - 1.0) * t.ln() - s * (nu1 * t / nu2).ln_1p();
    // t = x r² on [0, x]
    let lower = integrate(
        |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            2.0 * x * r * ln_density(x * r * r).exp()
        },
        0.0,
        1.0,
        QUAD_REL,
    );
    // t = x / r² on [x, ∞)
    let upper = integrate(
        |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            2.0 * x * ln_density(x / (r * r)).exp() / (r * r * r)
        },
        0.0,
        1.0,
        QUAD_REL,
    );
    lower / (lower + upper)
}

/// χ²_k CDF with t = u² so the integrand is u^(k-1) e^(-u²/2).
pub fn chi2_cdf_oracle(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let g = |u: f64| {
        if u == 0.0 {
            return if k == 1.0 { 1.0 } else { 0.0 };
        }
        ((k - 1.0) * u.ln() - 0.5 * u * u).exp()
    };
    let r = x.sqrt();
    let top = r.max((k - 1.0).sqrt()) + 40.0;
    let lower = integrate(g, 0.0, r, QUAD_REL);
    let upper = integrate(g, r, top, QUAD_REL);
    lower / (lower + upper)
}

/// I_x(a, b) with y = sin²θ.
pub fn inc_beta_oracle(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let g = |th: f64| {
        let (s, c) = th.sin_cos();
        let ls = if 2.0 * a - 1.0 == 0.0 { 0.0 } else { (2.0 * a - 1.0) * s.ln() };
        let lc = if 2.0 * b - 1.0 == 0.0 { 0.0 } else { (2.0 * b - 1.0) * c.ln() };
        2.0 * (ls + lc).exp()
    };
    let split = x.sqrt().asin();
    let lower = integrate(g, 0.0, split, QUAD_REL);
    let upper = integrate(g, split, std::f64::consts::FRAC_PI_2, QUAD_REL);
    lower / (lower + upper)
}

/// ln Γ(x) by upward recurrence and the Stirling series.
pub fn ln_gamma_oracle(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut z = x;
    let mut shift = 0.0;
    while z < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// chi2inv(p, 1) through the probit identity.
pub fn chi2inv1_oracle(p: f64) -> f64 {
    let z = statrs::function::erf::erf_inv(p);
    2.0 * z * z
}

/// All singular values (descending) by one-sided Jacobi on the matrix.
pub fn jacobi_singular_values(a: ArrayView2<'_, f64>) -> Vec<f64> {
    // work on the orientation with fewer columns
    let mut u: Array2<f64> = if a.nrows() >= a.ncols() {
        a.to_owned()
    } else {
        a.t().to_owned()
    };
    let n = u.ncols();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u.column(p).dot(&u.column(p));
                let beta: f64 = u.column(q).dot(&u.column(q));
                let gamma: f64 = u.column(p).dot(&u.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..u.nrows() {
                    let up = u[[i, p]];
                    let uq = u[[i, q]];
                    u[[i, p]] = c * up - s * uq;
                    u[[i, q]] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| u.column(j).dot(&u.column(j)).sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Random chromatogram with a mix of noise, Gaussian peaks, constant and
/// all-zero channels. Values are nonnegative about half the time.
pub fn fuzz_chromatogram(seed: u64) -> Chromatogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(12..=80);
    let cols = rng.random_range(1..=30);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let offset = if rng.random_bool(0.5) { 10.0 } else { 0.0 };
    let mut x = Array2::<f64>::zeros((rows, cols));
    for v in x.iter_mut() {
        *v = offset + noise.sample(&mut rng);
    }
    let n_peaks = rng.random_range(0..=3);
    for _ in 0..n_peaks {
        let apex = rng.random_range(0.0..rows as f64);
        let width = rng.random_range(1.0..6.0);
        let amp = rng.random_range(0.0..60.0);
        let spectrum: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..1.0)).collect();
        for i in 0..rows {
            let h = amp * (-0.5 * ((i as f64 - apex) / width).powi(2)).exp();
            for j in 0..cols {
                x[[i, j]] += h * spectrum[j];
            }
        }
    }
    for j in 0..cols {
        match rng.random_range(0..10) {
            0 => x.column_mut(j).fill(offset + 3.0),
            1 => x.column_mut(j).fill(0.0),
            _ => {}
        }
    }
    Chromatogram::new(x).unwrap()
}
