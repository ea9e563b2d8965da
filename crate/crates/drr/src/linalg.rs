//! Dense symmetric solvers for the regularized normal equations: Cholesky for
//! the positive-definite case, with a symmetric Jacobi eigendecomposition as
//! the minimum-norm fallback for rank-deficient unregularized systems.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Lower Cholesky factor of a symmetric matrix, or `None` when a pivot drops
/// below the positive-definiteness threshold.
pub(crate) fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0f64, f64::max);
    let floor = (max_diag * 1e-13).max(f64::MIN_POSITIVE);
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= floor {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

pub(crate) fn cholesky_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns).
pub(crate) fn jacobi_eigh(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max);
        if off <= scale.max(1.0) * 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= (m[(p, p)].abs() + m[(q, q)].abs()).max(1.0) * 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues = Array1::from_iter((0..n).map(|i| m[(i, i)]));
    (eigenvalues, v)
}

/// Outcome of a regularized normal-equation solve.
pub(crate) struct NormalSolve {
    pub solutions: Vec<Array1<f64>>,
    pub min_norm_fallback: bool,
}

/// Solve `(G + lambda I) x = b` for each right-hand side, where `G` is a
/// Gram matrix. With `lambda = 0` and `G` singular this falls back to the
/// minimum-norm pseudo-solution. Residuals are polished by iterative
/// refinement until the stationarity contract
/// `||b - (G + lambda I) x||_inf < tol (1 + ||b||_inf)` holds.
pub(crate) fn solve_regularized(
    gram: &Array2<f64>,
    rhs: &[Array1<f64>],
    lambda: f64,
    tol: f64,
) -> Result<NormalSolve> {
    let n = gram.nrows();
    let mut reg = gram.clone();
    for i in 0..n {
        reg[(i, i)] += lambda;
    }
    if let Some(l) = cholesky(&reg) {
        let mut solutions = Vec::with_capacity(rhs.len());
        for b in rhs {
            let mut x = cholesky_solve(&l, b);
            refine(&reg, b, &mut x, &l, tol)?;
            solutions.push(x);
        }
        return Ok(NormalSolve {
            solutions,
            min_norm_fallback: false,
        });
    }
    // Rank-deficient (only reachable with lambda = 0 or a pathological Gram):
    // pseudo-inverse through the eigendecomposition.
    let (eigenvalues, vectors) = jacobi_eigh(&reg);
    let lambda_max = eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let cutoff = lambda_max * 1e-12;
    let solutions = rhs
        .iter()
        .map(|b| {
            let vt_b = vectors.t().dot(b);
            let scaled = Array1::from_iter(
                eigenvalues
                    .iter()
                    .zip(vt_b.iter())
                    .map(|(&e, &c)| if e.abs() > cutoff { c / e } else { 0.0 }),
            );
            vectors.dot(&scaled)
        })
        .collect();
    Ok(NormalSolve {
        solutions,
        min_norm_fallback: true,
    })
}

fn refine(
    reg: &Array2<f64>,
    b: &Array1<f64>,
    x: &mut Array1<f64>,
    l: &Array2<f64>,
    tol: f64,
) -> Result<()> {
    let budget = tol * (1.0 + b.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
    for _ in 0..3 {
        let r = b - &reg.dot(x);
        let norm = r.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if norm < budget {
            return Ok(());
        }
        let delta = cholesky_solve(l, &r);
        *x += &delta;
    }
    let r = b - &reg.dot(x);
    let norm = r.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if norm < budget {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "normal-equation solve failed the stationarity contract: \
             residual {norm:e} above budget {budget:e}"
        )))
    }
}
