//! Singular value decomposition of small dense square matrices.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

const MAX_SWEEPS: usize = 100;

/// `A = U diag(σ) Vᵗ` with orthogonal `U`, `V` and `σ₁ ≥ … ≥ σₙ ≥ 0`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// `U diag(σ) Vᵗ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.sigma.len();
        let mut us = self.u.clone();
        for i in 0..n {
            for j in 0..n {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul(&self.v.transpose())
    }

    /// `σ₁/σₙ`, infinite for singular matrices.
    pub fn condition(&self) -> f64 {
        let last = *self.sigma.last().expect("non-empty");
        if last == 0.0 {
            f64::INFINITY
        } else {
            self.sigma[0] / last
        }
    }
}

/// One-sided Jacobi: rotates column pairs of `A V` until all pairs are
/// orthogonal to working precision.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::invalid("svd needs a non-empty square matrix"));
    }
    if a.max_abs().is_nan() || !a.max_abs().is_finite() {
        return Err(Error::invalid("svd of a non-finite matrix"));
    }
    let n = a.rows();
    // Work on columns stored as rows of the transpose.
    let mut w = a.transpose();
    let mut v = Matrix::identity(n);
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..n {
                    let (x, y) = (w[(p, k)], w[(q, k)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for k in 0..n {
                        let (x, y) = (m[(p, k)], m[(q, k)]);
                        m[(p, k)] = c * x - s * y;
                        m[(q, k)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::BlowUp("jacobi svd did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|i| w.row_vector(i).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let scale = sigma[0];
    let mut u_cols: Vec<Vector> = Vec::with_capacity(n);
    for &i in &order {
        if norms[i] > 1e-14 * scale && norms[i] > 0.0 {
            u_cols.push(w.row_vector(i).scaled(1.0 / norms[i]));
        }
    }
    complete_basis(&mut u_cols, n);
    let v_cols: Vec<Vector> = order.iter().map(|&i| v.row_vector(i)).collect();
    Ok(Svd {
        u: Matrix::from_columns(&u_cols)?,
        sigma,
        v: Matrix::from_columns(&v_cols)?,
    })
}

/// Extends orthonormal vectors to a basis of ℝⁿ with standard basis vectors.
fn complete_basis(vs: &mut Vec<Vector>, n: usize) {
    let mut candidate = 0;
    while vs.len() < n && candidate < n {
        let mut r = Vector::basis(n, candidate);
        for _pass in 0..2 {
            for e in vs.iter() {
                let d = r.dot(e);
                r.axpy(-d, e);
            }
        }
        let norm = r.norm();
        if norm > 0.5 {
            vs.push(r.scaled(1.0 / norm));
        }
        candidate += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(a: &Matrix, svd: &Svd) {
        assert!(svd.u.orthogonality_defect() < 1e-13);
        assert!(svd.v.orthogonality_defect() < 1e-13);
        assert!((&svd.reconstruct() - a).max_abs() <= 1e-13 * a.max_abs().max(1.0));
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_and_rank_deficient() {
        let a = Matrix::diagonal(&[1.0, -3.0, 2.0]);
        let s = svd(&a).unwrap();
        assert_eq!(s.sigma, vec![3.0, 2.0, 1.0]);
        check(&a, &s);

        let z = Matrix::zeros(3, 3);
        let s = svd(&z).unwrap();
        assert_eq!(s.sigma, vec![0.0; 3]);
        check(&z, &s);

        let r1 = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let s = svd(&r1).unwrap();
        assert!((s.sigma[0] - 5.0).abs() < 1e-14 && s.sigma[1].abs() < 1e-14);
        check(&r1, &s);
    }

    #[test]
    fn matches_nalgebra() {
        let data = vec![4.0, 1.0, -2.0, 0.5, 3.0, 1.0, 2.0, -1.0, 1.0];
        let s = svd(&Matrix::from_row_major(3, 3, data.clone()).unwrap()).unwrap();
        let oracle = nalgebra::DMatrix::from_row_slice(3, 3, &data).singular_values();
        let mut expected: Vec<f64> = oracle.iter().copied().collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in s.sigma.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn decomposes_random_matrices(n in 1usize..=6, data in prop::collection::vec(-5.0f64..5.0, 36)) {
            let a = Matrix::from_row_major(n, n, data[..n * n].to_vec()).unwrap();
            let s = svd(&a).unwrap();
            check(&a, &s);
            let det: f64 = s.sigma.iter().product();
            prop_assert!((det - a.determinant().abs()).abs() <= 1e-11 * det.max(1.0));
        }
    }
}
