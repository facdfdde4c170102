//! Gram determinants, `k`-volumes and Gram-Schmidt orthonormalization.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::multivector;

/// Default scale-invariant regularity threshold: a system is treated as
/// dependent once `vol(f₁..f_i) ≤ ε·Π‖f_j‖`.
pub const DEFAULT_REGULARITY_EPS: f64 = 1e-10;

/// `G_{ij} = ⟨u_i, v_j⟩`.
pub fn gram_matrix(us: &[Vector], vs: &[Vector]) -> Result<Matrix> {
    if us.len() != vs.len() {
        return Err(Error::invalid("gram matrix needs equally many vectors"));
    }
    let k = us.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            vs[j].check_dim(us[i].dim())?;
            g[(i, j)] = us[i].dot(&vs[j]);
        }
    }
    Ok(g)
}

/// `det G(v₁..v_k; v₁..v_k)`, clamped at zero. More vectors than the
/// ambient dimension are always dependent, and the empty system has 1.
pub fn gram_det(vs: &[Vector]) -> f64 {
    match vs.first() {
        None => 1.0,
        Some(v) if vs.len() > v.dim() => 0.0,
        Some(_) => gram_matrix(vs, vs)
            .map(|g| g.determinant().max(0.0))
            .unwrap_or(0.0),
    }
}

/// `k`-volume of the parallelepiped spanned by `vs`; `vol(∅) = 1`.
///
/// Evaluated as `Π |R_jj|` from a Householder QR factorization, which keeps
/// relative accuracy near `ε·cond` where `sqrt(gram_det)` would see `ε·cond²`.
pub fn volume(vs: &[Vector]) -> f64 {
    let Some(first) = vs.first() else {
        return 1.0;
    };
    let n = first.dim();
    let k = vs.len();
    if k > n || vs.iter().any(|v| v.dim() != n) {
        return 0.0;
    }
    // Columns of the n × k matrix, reflected in place.
    let mut cols: Vec<Vec<f64>> = vs.iter().map(|v| v.as_slice().to_vec()).collect();
    let mut vol = 1.0;
    for j in 0..k {
        let alpha = cols[j][j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        vol *= alpha;
        if alpha == 0.0 {
            return 0.0;
        }
        // w = x − β e_j with β = −sign(x_j)·α avoids cancellation.
        let beta = -alpha.copysign(cols[j][j]);
        let mut w: Vec<f64> = cols[j][j..].to_vec();
        w[0] -= beta;
        let wn2: f64 = w.iter().map(|x| x * x).sum();
        if wn2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(j + 1) {
            let d: f64 = w.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * d / wn2;
            for (c, wi) in col[j..].iter_mut().zip(&w) {
                *c -= f * wi;
            }
        }
    }
    vol
}

/// Volume divided by the product of the factor norms, in `[0, 1]`.
pub fn normalized_volume(vs: &[Vector]) -> f64 {
    let units: Vec<Vector> = vs
        .iter()
        .map(|v| {
            let n = v.norm();
            if n > 0.0 {
                v.scaled(1.0 / n)
            } else {
                v.clone()
            }
        })
        .collect();
    volume(&units).min(1.0)
}

/// Orthonormal vectors `e_i = a_{i,1}f₁ + … + a_{i,i}f_i` with `a_{i,i} > 0`.
#[derive(Clone, Debug)]
pub struct OrthonormalSystem {
    pub vectors: Vec<Vector>,
    /// The leading coefficients `a_{i,i}`.
    pub diag_coeffs: Vec<f64>,
}

impl OrthonormalSystem {
    /// `max |⟨e_i, e_j⟩ − δ_ij|`
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }
}

/// Gram-Schmidt orthonormalization with the default threshold.
pub fn gram_schmidt(fs: &[Vector]) -> Result<OrthonormalSystem> {
    gram_schmidt_with(fs, DEFAULT_REGULARITY_EPS)
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Fails with [`Error::CollapsedVolume`] naming the first `i` for which
/// `vol(f₁..f_i) ≤ eps·Π‖f_j‖`.
pub fn gram_schmidt_with(fs: &[Vector], eps: f64) -> Result<OrthonormalSystem> {
    let dim = match fs.first() {
        Some(f) => f.dim(),
        None => {
            return Ok(OrthonormalSystem {
                vectors: Vec::new(),
                diag_coeffs: Vec::new(),
            })
        }
    };
    let mut vectors: Vec<Vector> = Vec::with_capacity(fs.len());
    let mut diag_coeffs = Vec::with_capacity(fs.len());
    // Running normalized volume Π‖r_j‖/‖f_j‖.
    let mut normalized = 1.0;
    for (i, f) in fs.iter().enumerate() {
        f.check_dim(dim)?;
        let fnorm = f.norm();
        let mut r = f.clone();
        for _pass in 0..2 {
            for e in &vectors {
                let d = r.dot(e);
                r.axpy(-d, e);
            }
        }
        let rnorm = r.norm();
        normalized *= if fnorm > 0.0 { rnorm / fnorm } else { 0.0 };
        if !(normalized > eps) {
            return Err(Error::CollapsedVolume {
                k: i + 1,
                normalized,
            });
        }
        diag_coeffs.push(1.0 / rnorm);
        vectors.push(r.scaled(1.0 / rnorm));
    }
    Ok(OrthonormalSystem {
        vectors,
        diag_coeffs,
    })
}

/// `sgn(v₁..vₙ) ∈ {−1, 0, 1}`, zero when the vectors are dependent within
/// [`DEFAULT_REGULARITY_EPS`].
pub fn sign_of(vs: &[Vector]) -> Result<i8> {
    sign_of_with(vs, DEFAULT_REGULARITY_EPS)
}

pub fn sign_of_with(vs: &[Vector], eps: f64) -> Result<i8> {
    let det = multivector::determinant(vs)?;
    let scale: f64 = vs.iter().map(Vector::norm).product();
    Ok(if det.abs() <= eps * scale {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivector::{cross, determinant};
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec())
    }

    #[test]
    fn gram_det_examples() {
        assert_eq!(gram_det(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]), 1.0);
        assert_eq!(gram_det(&[v(&[1.0, 2.0, 3.0]), v(&[2.0, 4.0, 6.0])]), 0.0);
        assert!((gram_det(&[v(&[1.0, 0.0]), v(&[1.0, 1.0])]) - 1.0).abs() < 1e-15);
        assert_eq!(gram_det(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])]), 0.0);
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&[]), 1.0);
        assert_eq!(volume(&[v(&[3.0, 0.0])]), 3.0);
        let sheared = [v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        assert!((volume(&sheared) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_hand_example() {
        let sys = gram_schmidt(&[v(&[2.0, 0.0, 0.0]), v(&[1.0, 3.0, 0.0])]).unwrap();
        assert_eq!(sys.vectors[0], v(&[1.0, 0.0, 0.0]));
        assert!(sys.vectors[1].distance(&v(&[0.0, 1.0, 0.0])) < 1e-15);
        assert!((sys.diag_coeffs[0] - 0.5).abs() < 1e-15);
        assert!((sys.diag_coeffs[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_identity_case() {
        let fs: Vec<Vector> = (0..4).map(|i| Vector::basis(4, i)).collect();
        let sys = gram_schmidt(&fs).unwrap();
        assert_eq!(sys.vectors, fs);
        assert!(sys.diag_coeffs.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn gram_schmidt_names_failing_index() {
        let fs = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[1.0, 1.0, 1e-13])];
        match gram_schmidt(&fs) {
            Err(Error::CollapsedVolume { k, .. }) => assert_eq!(k, 3),
            other => panic!("unexpected {other:?}"),
        }
        // Scale invariance of the threshold.
        let tiny = [v(&[1e-20, 0.0]), v(&[0.0, 1e-20])];
        assert!(gram_schmidt(&tiny).is_ok());
    }

    #[test]
    fn ill_conditioned_system_stays_orthonormal() {
        // Hilbert-like columns in ℝ⁶.
        let fs: Vec<Vector> = (0..6)
            .map(|i| Vector::new((0..6).map(|j| 1.0 / (i + j + 1) as f64).collect()))
            .collect();
        let sys = gram_schmidt_with(&fs, 1e-16).unwrap();
        assert!(sys.orthogonality_defect() <= 1e-12);
    }

    #[test]
    fn sign_examples() {
        let id: Vec<Vector> = (0..3).map(|i| Vector::basis(3, i)).collect();
        assert_eq!(sign_of(&id).unwrap(), 1);
        let sw = [Vector::basis(3, 1), Vector::basis(3, 0), Vector::basis(3, 2)];
        assert_eq!(sign_of(&sw).unwrap(), -1);
        let dep = [v(&[1.0, 1.0]), v(&[2.0, 2.0])];
        assert_eq!(sign_of(&dep).unwrap(), 0);
    }

    fn arb_system() -> impl Strategy<Value = Vec<Vector>> {
        (2usize..=6).prop_flat_map(|n| {
            (1..=n).prop_flat_map(move |k| {
                prop::collection::vec(
                    prop::collection::vec(-2.0f64..2.0, n).prop_map(Vector::new),
                    k,
                )
            })
        })
    }

    proptest! {
        #[test]
        fn diagonal_coefficients_are_volume_ratios(fs in arb_system()) {
            prop_assume!(normalized_volume(&fs) > 1e-4);
            let sys = gram_schmidt(&fs).unwrap();
            for i in 0..fs.len() {
                let ratio = volume(&fs[..i]) / volume(&fs[..=i]);
                prop_assert!((sys.diag_coeffs[i] - ratio).abs() <= 1e-9 * ratio);
            }
            prop_assert!(sys.orthogonality_defect() <= 1e-12);
        }

        #[test]
        fn gram_volume_matches_cross_norm(fs in arb_system()) {
            prop_assume!(normalized_volume(&fs) > 1e-4);
            // Gram determinants lose accuracy like cond², so compare on the
            // scale of the inputs.
            let scale: f64 = fs.iter().map(Vector::norm).product();
            let vol = volume(&fs);
            let cn = cross(&fs).unwrap().norm();
            prop_assert!((vol - cn).abs() <= 1e-9 * scale);
        }

        #[test]
        fn determinant_squared_is_gram_det(n in 2usize..=6, seed in prop::collection::vec(-2.0f64..2.0, 36)) {
            let vs: Vec<Vector> = (0..n).map(|i| Vector::new(seed[i * n..(i + 1) * n].to_vec())).collect();
            prop_assume!(normalized_volume(&vs) > 1e-4);
            let d = determinant(&vs).unwrap();
            let g = gram_det(&vs);
            prop_assert!((d * d - g).abs() <= 1e-7 * g);
            // det = sgn · vol
            let s = f64::from(sign_of(&vs).unwrap());
            prop_assert!((d - s * volume(&vs)).abs() <= 1e-9 * d.abs());
        }
    }
}
