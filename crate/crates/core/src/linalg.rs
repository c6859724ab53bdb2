//! Dense linear algebra for the penalized fits: weighted cross-products,
//! a column-pivoted Householder QR, and small helpers shared by the model
//! and benchmark code.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular at pivot {pivot} (|r| = {value:.3e})")]
    Singular { pivot: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Computes `X' diag(w) X` using the fast matmul path.
pub fn weighted_crossprod(x: &Array2<f64>, w: &Array1<f64>) -> Array2<f64> {
    let (n, p) = x.dim();
    assert_eq!(w.len(), n, "weight length must match row count");
    let mut xw = x.clone();
    for (mut row, &wi) in xw.rows_mut().into_iter().zip(w.iter()) {
        row.mapv_inplace(|v| v * wi);
    }
    let mut out = Array2::zeros((p, p));
    ndarray::linalg::general_mat_mul(1.0, &x.t(), &xw, 0.0, &mut out);
    out
}

/// Computes `X' v` for a dense matrix and vector.
pub fn crossprod_vec(x: &Array2<f64>, v: &Array1<f64>) -> Array1<f64> {
    x.t().dot(v)
}

/// Column-pivoted Householder QR factorization of a square (or tall) matrix,
/// kept in packed form for solving.
pub struct PivotedQr {
    qr: Array2<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
    max_diag: f64,
    min_diag: f64,
}

impl PivotedQr {
    /// Factorizes `a` (consumed). Rank is judged against
    /// `rank_tol * |r11|` on the pivoted diagonal.
    pub fn new(mut a: Array2<f64>, rank_tol: f64) -> Self {
        let (m, n) = a.dim();
        assert!(m >= n, "QR expects m >= n");
        let mut tau = vec![0.0; n];
        let mut perm: Vec<usize> = (0..n).collect();
        // running squared column norms for pivot selection
        let mut colnorm: Vec<f64> = (0..n)
            .map(|j| a.column(j).iter().map(|v| v * v).sum())
            .collect();

        let mut max_diag = 0.0f64;
        let mut min_diag = f64::INFINITY;
        let mut rank = n;
        let mut rank_found = false;

        for k in 0..n {
            // pivot: largest remaining column norm
            let (jmax, _) = colnorm
                .iter()
                .enumerate()
                .skip(k)
                .fold((k, -1.0), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
            if jmax != k {
                for i in 0..m {
                    a.swap([i, k], [i, jmax]);
                }
                perm.swap(k, jmax);
                colnorm.swap(k, jmax);
            }

            // Householder vector for column k below the diagonal
            let mut norm = 0.0;
            for i in k..m {
                norm += a[[i, k]] * a[[i, k]];
            }
            let norm = norm.sqrt();
            if norm == 0.0 {
                tau[k] = 0.0;
                if !rank_found {
                    rank = k;
                    rank_found = true;
                }
                min_diag = 0.0;
                continue;
            }
            let alpha = if a[[k, k]] >= 0.0 { -norm } else { norm };
            let v0 = a[[k, k]] - alpha;
            tau[k] = -v0 / alpha; // tau = 2 / (v'v) with v scaled so v[0] = 1
            let inv_v0 = 1.0 / v0;
            for i in (k + 1)..m {
                a[[i, k]] *= inv_v0;
            }
            a[[k, k]] = alpha;

            let adiag = alpha.abs();
            if adiag > max_diag {
                max_diag = adiag;
            }
            if adiag < min_diag {
                min_diag = adiag;
            }
            if !rank_found && adiag < rank_tol * max_diag {
                rank = k;
                rank_found = true;
            }

            // apply reflector to trailing columns
            for j in (k + 1)..n {
                let mut dot = a[[k, j]];
                for i in (k + 1)..m {
                    dot += a[[i, k]] * a[[i, j]];
                }
                let t = tau[k] * dot;
                a[[k, j]] -= t;
                for i in (k + 1)..m {
                    let aik = a[[i, k]];
                    a[[i, j]] -= t * aik;
                }
                colnorm[j] -= a[[k, j]] * a[[k, j]];
                if colnorm[j] < 0.0 {
                    colnorm[j] = 0.0;
                }
            }
            colnorm[k] = 0.0;
        }

        PivotedQr { qr: a, tau, perm, rank, max_diag, min_diag }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.qr.ncols()
    }

    /// Ratio of the largest to smallest pivoted |R| diagonal, a cheap
    /// conditioning proxy.
    pub fn diag_ratio(&self) -> f64 {
        if self.min_diag <= 0.0 {
            f64::INFINITY
        } else {
            self.max_diag / self.min_diag
        }
    }

    /// Solves `A x = b` via the stored factorization.
    pub fn solve(&self, b: &Array1<f64>) -> Result<Array1<f64>, LinalgError> {
        let (m, n) = self.qr.dim();
        if b.len() != m {
            return Err(LinalgError::Shape(format!(
                "rhs has {} entries, expected {}",
                b.len(),
                m
            )));
        }
        let mut y = b.clone();
        // apply Q' to b
        for k in 0..n {
            if self.tau[k] == 0.0 {
                continue;
            }
            let mut dot = y[k];
            for i in (k + 1)..m {
                dot += self.qr[[i, k]] * y[i];
            }
            let t = self.tau[k] * dot;
            y[k] -= t;
            for i in (k + 1)..m {
                y[i] -= t * self.qr[[i, k]];
            }
        }
        // back substitution on R
        let mut x = Array1::zeros(n);
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in (k + 1)..n {
                s -= self.qr[[k, j]] * x[j];
            }
            let r = self.qr[[k, k]];
            if r == 0.0 {
                return Err(LinalgError::Singular { pivot: k, value: 0.0 });
            }
            x[k] = s / r;
        }
        // undo the column permutation
        let mut out = Array1::zeros(n);
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        Ok(out)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Array2<f64>) -> Result<Array2<f64>, LinalgError> {
        let n = self.qr.ncols();
        let mut out = Array2::zeros((n, b.ncols()));
        for (j, col) in b.columns().into_iter().enumerate() {
            let x = self.solve(&col.to_owned())?;
            out.column_mut(j).assign(&x);
        }
        Ok(out)
    }
}

/// Solves a general square system by pivoted QR; convenience for small
/// systems outside the PIRLS loop.
pub fn solve_square(a: Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>, LinalgError> {
    let qr = PivotedQr::new(a, 1e-13);
    if qr.is_rank_deficient() {
        return Err(LinalgError::Singular { pivot: qr.rank(), value: qr.min_diag });
    }
    qr.solve(b)
}

/// Symmetric eigenvalue lower bound via Gershgorin discs; cheap PSD sanity check.
pub fn gershgorin_min(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut lo = f64::INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        for j in 0..n {
            if i != j {
                radius += a[[i, j]].abs();
            }
        }
        lo = lo.min(a[[i, i]] - radius);
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qr_solves_well_conditioned_system() {
        let a = array![[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let x_true = array![1.0, -2.0, 0.5];
        let b = a.dot(&x_true);
        let x = solve_square(a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn qr_reports_rank_deficiency() {
        // third column is the sum of the first two
        let a = array![
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [1.0, 1.0, 2.0],
            [2.0, 1.0, 3.0]
        ];
        let qr = PivotedQr::new(a, 1e-10);
        assert!(qr.is_rank_deficient());
        assert_eq!(qr.rank(), 2);
    }

    #[test]
    fn crossprod_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let p = 7;
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0));
        let w = Array1::from_shape_fn(n, |_| rng.random_range(0.1..2.0));
        let fast = weighted_crossprod(&x, &w);
        for i in 0..p {
            for j in 0..p {
                let naive: f64 = (0..n).map(|t| x[[t, i]] * w[t] * x[[t, j]]).sum();
                assert!((fast[[i, j]] - naive).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn qr_random_square_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let n = 5 + trial;
            let a = Array2::from_shape_fn((n, n), |_| rng.random_range(-2.0..2.0));
            let x_true = Array1::from_shape_fn(n, |_| rng.random_range(-3.0..3.0));
            let b = a.dot(&x_true);
            let x = solve_square(a, &b).unwrap();
            for i in 0..n {
                assert!((x[i] - x_true[i]).abs() < 1e-8, "trial {trial} entry {i}");
            }
        }
    }
}
