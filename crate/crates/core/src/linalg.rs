//! Dense symmetric eigensolver (cyclic Jacobi) and small helpers shared by
//! the embedders.

use ndarray::Array2;

use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// Column `i` of `vectors` belongs to `values[i]`. Each eigenvector has its
/// largest-magnitude component positive.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).to_vec()
    }
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-12` times the matrix norm (or to absolute `1e-12` for tiny matrices).
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<SymmetricEigen> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Dimension(format!("eigen: matrix is {n}x{m}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigen: non-finite entry".into()));
    }
    // Row-major working copy, symmetrized.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    // Rows of `vt` are the eigenvectors.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = OFF_DIAGONAL_TOL * norm.max(1.0);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&w, n);
        if off < tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                // Skip rotations below the rounding floor of both diagonals.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = w[p * n + r];
                    let h = w[q * n + r];
                    let np = g - s * (h + g * tau);
                    let nq = h + s * (g - h * tau);
                    w[p * n + r] = np;
                    w[q * n + r] = nq;
                    w[r * n + p] = np;
                    w[r * n + q] = nq;
                }
                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..p * n + n];
                let vq = &mut tail[..n];
                for (g, h) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (a, b) = (*g, *h);
                    *g = a - s * (b + a * tau);
                    *h = b + s * (a - b * tau);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&w, n) >= tol {
        return Err(Error::Numeric(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].total_cmp(&w[i * n + i]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| w[i * n + i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        let row = &vt[i * n..i * n + n];
        let pivot = row
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (k, v)| if v.abs() > best.1 { (k, v.abs()) } else { best })
            .0;
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (r, v) in row.iter().enumerate() {
            vectors[[r, col]] = sign * v;
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(w: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * w[i * n + j] * w[i * n + j];
        }
    }
    s.sqrt()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot falls below `1e-14` times the largest entry.
pub(crate) fn solve(a: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))?;
        if m[[piv, col]].abs() < 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap([piv, k], [col, k]);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[[r, k]] -= f * m[[col, k]];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[[col, k]] * x[k];
        }
        x[col] = s / m[[col, col]];
    }
    Some(x)
}
