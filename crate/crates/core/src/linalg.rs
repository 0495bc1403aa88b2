//! Small dense linear algebra: a cyclic Jacobi symmetric eigensolver, the
//! two leading singular values of a short, wide matrix, and a Cholesky solve.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the full norm.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unit eigenvectors stored as columns, in the same order as `values`.
    pub vectors: Array2<f64>,
}

/// Cyclic Jacobi eigensolver. Only the upper triangle of `a` is read.
pub fn symmetric_eigen(a: ArrayView2<'_, f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!(
            "symmetric_eigen needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            m[[i, j]] = a[[i, j]];
            m[[j, i]] = a[[i, j]];
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if (2.0 * off).sqrt() <= OFF_DIAGONAL_TOL * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let vectors = v.select(Axis(1), &order);
    Ok(SymmetricEigen { values, vectors })
}

/// The two largest singular values `(sigma1, sigma2)` of `a`.
///
/// The Gram matrix over the smaller dimension is diagonalized with
/// [`symmetric_eigen`]; each singular value is then recovered as the norm of
/// `a` applied to the matching eigenvector, which keeps `sigma2` accurate to
/// `eps * sigma1` rather than `sqrt(eps) * sigma1` for nearly rank-1 inputs.
pub fn top2_singular(a: ArrayView2<'_, f64>) -> Result<(f64, f64)> {
    let (rows, cols) = a.dim();
    if rows < 2 {
        return Err(Error::Dimension(format!(
            "top2_singular needs at least 2 rows, got {rows}"
        )));
    }
    if cols == 0 {
        return Ok((0.0, 0.0));
    }
    // Orient so that `wide` has no more rows than columns.
    let wide = if rows <= cols { a } else { a.t() };
    if wide.nrows() == 1 {
        let norm = wide.iter().map(|x| x * x).sum::<f64>().sqrt();
        return Ok((norm, 0.0));
    }
    let gram = wide.dot(&wide.t());
    let eig = symmetric_eigen(gram.view())?;
    let project = |i: usize| -> f64 {
        let u: Array1<f64> = eig.vectors.column(i).to_owned();
        let w = wide.t().dot(&u);
        w.dot(&w).sqrt()
    };
    let s1 = project(0);
    let s2 = project(1);
    Ok(if s1 >= s2 { (s1, s2) } else { (s2, s1) })
}

/// Solve `a x = b` for symmetric positive definite `a` by Cholesky
/// factorization. Each column of `b` is one right-hand side.
pub fn cholesky_solve(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "cholesky_solve: a is {}x{}, b is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0) {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    let mut x = b.to_owned();
    for mut col in x.columns_mut() {
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= l[[k, i]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    Ok(x)
}
