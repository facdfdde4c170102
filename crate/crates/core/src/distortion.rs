//! How far an affine map `x ↦ Lx + λ` can move the curvatures of a curve.
//!
//! With singular values `σ₁ ≥ … ≥ σₙ > 0`, `k`-volumes obey
//! `σ_{n−k+1}⋯σₙ ≤ vol(Lv)/vol(v) ≤ σ₁⋯σ_k`, and substituting this into the
//! volume formula for `κ_r` bounds every curvature of `Lc + λ`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curvature::curvatures;
use crate::error::{Error, Result};
use crate::gram;
use crate::jets::{self, AnalyticCurve, CurveJet, CurveSamples};
use crate::linalg::{Matrix, Vector};
use crate::svd::svd;

/// Relative slack allowed when comparing an observed curvature with a bound,
/// so that exact equality cases survive rounding.
pub const BOUND_RTOL: f64 = 1e-9;

/// `σ₁ ≥ … ≥ σₙ ≥ 0`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SingularSpectrum {
    sigma: Vec<f64>,
}

pub fn singular_values(l: &Matrix) -> Result<SingularSpectrum> {
    Ok(SingularSpectrum {
        sigma: svd(l)?.sigma,
    })
}

impl SingularSpectrum {
    /// Sorts the given values in decreasing order.
    pub fn new(mut sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid("singular values must be finite and non-negative"));
        }
        sigma.sort_by(|a, b| b.total_cmp(a));
        Ok(SingularSpectrum { sigma })
    }

    pub fn values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `σ_i`, one-based.
    pub fn sigma(&self, i: usize) -> f64 {
        self.sigma[i - 1]
    }

    /// `‖L‖ = σ₁`
    pub fn operator_norm(&self) -> f64 {
        self.sigma[0]
    }

    /// `‖L⁻¹‖ = 1/σₙ`
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.sigma[self.dim() - 1]
    }

    pub fn is_invertible(&self) -> bool {
        self.sigma[self.dim() - 1] > 0.0
    }

    pub fn condition(&self) -> f64 {
        self.operator_norm() * self.inverse_norm()
    }

    /// Spectrum of `L⁻¹`.
    pub fn inverse(&self) -> Result<Self> {
        self.require_invertible()?;
        Ok(SingularSpectrum {
            sigma: self.sigma.iter().rev().map(|s| 1.0 / s).collect(),
        })
    }

    /// `σ₁⋯σ_k = ‖∧^k L‖`, the largest singular value of the exterior power.
    pub fn top_product(&self, k: usize) -> f64 {
        self.sigma[..k].iter().product()
    }

    /// `σ_{n−k+1}⋯σₙ = ‖∧^k L⁻¹‖⁻¹`, the smallest one.
    pub fn bottom_product(&self, k: usize) -> f64 {
        self.sigma[self.dim() - k..].iter().product()
    }

    /// Bounds on `vol(Lv₁..Lv_k) / vol(v₁..v_k)`.
    pub fn volume_factor_bounds(&self, k: usize) -> (f64, f64) {
        (self.bottom_product(k), self.top_product(k))
    }

    fn require_invertible(&self) -> Result<()> {
        if self.is_invertible() {
            Ok(())
        } else {
            Err(Error::invalid("the linear map is not invertible"))
        }
    }
}

/// Which statement produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Full singular spectrum.
    Singular,
    /// Only `‖L‖` and `‖L⁻¹‖`.
    OperatorNorm,
}

/// `lower ≤ κ̃_r ≤ upper`, on absolute values for the top curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub kind: BoundKind,
    pub r: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BoundInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower * (1.0 - BOUND_RTOL) <= value && value <= self.upper * (1.0 + BOUND_RTOL)
    }

    /// Whether `self ⊆ other` up to [`BOUND_RTOL`].
    pub fn within(&self, other: &BoundInterval) -> bool {
        other.contains(self.lower) && other.contains(self.upper)
    }

    pub fn check(&self, observed: f64, is_top: bool) -> BoundReport {
        let observed = if is_top { observed.abs() } else { observed };
        BoundReport {
            kind: self.kind,
            r: self.r,
            lower: self.lower,
            observed,
            upper: self.upper,
            satisfied: self.contains(observed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub r: usize,
    pub lower: f64,
    pub observed: f64,
    pub upper: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn interval(&self) -> BoundInterval {
        BoundInterval {
            kind: self.kind,
            r: self.r,
            lower: self.lower,
            upper: self.upper,
        }
    }
}

fn check_index(spec: &SingularSpectrum, r: usize) -> Result<usize> {
    let n = spec.dim();
    if n < 2 || r == 0 || r >= n {
        return Err(Error::invalid(format!("curvature index must be in 1..{n}, got {r}")));
    }
    spec.require_invertible()?;
    Ok(n)
}

/// Bounds on `κ̃_r` from the full spectrum, built from the volume bounds:
///
/// ```text
/// r ≤ n−2:  σ_{n−r}σ_{n−r+1}σ_{n−r+2}²⋯σₙ² / (σ₁³σ₂²⋯σ_r²)  ≤ κ̃_r/κ_r ≤
///           σ₁²⋯σ_{r−1}²σ_rσ_{r+1} / (σ_{n−r+1}²⋯σ_{n−1}²σₙ³)
/// r = n−1:  σₙ²/(σ₁²σ₂) ≤ |κ̃_{n−1}/κ_{n−1}| ≤ σ₁²/(σ_{n−1}σₙ²)
/// ```
pub fn curvature_bounds(spec: &SingularSpectrum, kappa: f64, r: usize) -> Result<BoundInterval> {
    let n = check_index(spec, r)?;
    let vb = |k: usize| spec.volume_factor_bounds(k);
    // ‖Lc′‖/‖c′‖ ∈ [σₙ, σ₁]
    let (s_lo, s_hi) = vb(1);
    let (lower, upper) = if r + 1 < n {
        let (a_lo, a_hi) = vb(r - 1);
        let (b_lo, b_hi) = vb(r + 1);
        let (m_lo, m_hi) = vb(r);
        (
            a_lo * b_lo / (m_hi * m_hi * s_hi),
            a_hi * b_hi / (m_lo * m_lo * s_lo),
        )
    } else {
        // The determinant scales exactly by |det L| = σ₁⋯σₙ.
        let det = spec.top_product(n);
        let (a_lo, a_hi) = vb(n - 2);
        let (m_lo, m_hi) = vb(n - 1);
        (
            a_lo * det / (m_hi * m_hi * s_hi),
            a_hi * det / (m_lo * m_lo * s_lo),
        )
    };
    let k = if r + 1 < n { kappa } else { kappa.abs() };
    Ok(BoundInterval {
        kind: BoundKind::Singular,
        r,
        lower: lower * k,
        upper: upper * k,
    })
}

/// Bounds on `κ̃_r` from `‖L‖` and `‖L⁻¹‖` alone:
///
/// ```text
/// r ≤ n−2:  ‖L⁻¹‖^{−2r} ‖L‖^{−2r−1} ≤ κ̃_r/κ_r ≤ ‖L‖^{2r} ‖L⁻¹‖^{2r+1}
/// r = n−1:  ‖L⁻¹‖^{−2} ‖L‖^{−3} ≤ |κ̃_{n−1}/κ_{n−1}| ≤ ‖L‖² ‖L⁻¹‖³
/// ```
pub fn operator_norm_bounds(spec: &SingularSpectrum, kappa: f64, r: usize) -> Result<BoundInterval> {
    let n = check_index(spec, r)?;
    let a = spec.operator_norm();
    let b = spec.inverse_norm();
    let (lower, upper, k) = if r + 1 < n {
        let e = r as i32;
        (b.powi(-2 * e) * a.powi(-2 * e - 1), a.powi(2 * e) * b.powi(2 * e + 1), kappa)
    } else {
        (b.powi(-2) * a.powi(-3), a.powi(2) * b.powi(3), kappa.abs())
    };
    Ok(BoundInterval {
        kind: BoundKind::OperatorNorm,
        r,
        lower: lower * k,
        upper: upper * k,
    })
}

/// Both kinds of bounds for every `r`, checked against the curvatures of the
/// mapped jet `L c′, …, L c^(n)`.
pub fn verify_jet(jet: &CurveJet, l: &Matrix) -> Result<Vec<BoundReport>> {
    let spec = singular_values(l)?;
    let original = curvatures(jet)?;
    let mapped = curvatures(&jet.mapped(l))?;
    bound_reports(&spec, &original.kappa, &mapped.kappa)
}

fn bound_reports(spec: &SingularSpectrum, kappa: &[f64], observed: &[f64]) -> Result<Vec<BoundReport>> {
    let n = spec.dim();
    let mut reports = Vec::with_capacity(2 * (n - 1));
    for r in 1..n {
        let top = r == n - 1;
        reports.push(curvature_bounds(spec, kappa[r - 1], r)?.check(observed[r - 1], top));
        reports.push(operator_norm_bounds(spec, kappa[r - 1], r)?.check(observed[r - 1], top));
    }
    Ok(reports)
}

/// Bound reports of `Lc + λ` at each parameter value of an analytic curve.
pub fn verify_on_curve(
    curve: &AnalyticCurve,
    l: &Matrix,
    translation: &Vector,
    ts: &[f64],
) -> Result<Vec<(f64, Vec<BoundReport>)>> {
    let spec = singular_values(l)?;
    let mapped = curve.transformed(l, translation)?;
    let n = curve.dim();
    ts.iter()
        .map(|&t| {
            let before = curvatures(&curve.jet(t, n)?)?;
            let after = curvatures(&mapped.jet(t, n)?)?;
            Ok((t, bound_reports(&spec, &before.kappa, &after.kappa)?))
        })
        .collect()
}

/// Bound reports for sampled data: the original and the mapped samples are
/// differentiated independently, so the reports include stencil error.
pub fn verify_on_samples(
    samples: &CurveSamples,
    l: &Matrix,
    translation: &Vector,
    accuracy: usize,
) -> Result<Vec<(f64, Vec<BoundReport>)>> {
    let spec = singular_values(l)?;
    let n = samples.dim();
    if l.rows() != n || l.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l.rows(),
        });
    }
    translation.check_dim(n)?;
    let mapped = samples.map_points(|p| &l.mul_vec(p) + translation)?;
    let before = jets::differentiate(samples, n, accuracy)?;
    let after = jets::differentiate(&mapped, n, accuracy)?;
    before
        .iter()
        .zip(&after)
        .map(|(a, b)| {
            let ka = curvatures(a)?.kappa;
            let kb = curvatures(b)?.kappa;
            Ok((a.t, bound_reports(&spec, &ka, &kb)?))
        })
        .collect()
}

/// Haar-like random orthogonal matrix from Gram-Schmidt on Gaussian rows.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let rows: Vec<Vector> = (0..n)
            .map(|_| Vector::new((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()))
            .collect();
        if let Ok(sys) = gram::gram_schmidt(&rows) {
            return Matrix::from_rows(&sys.vectors).expect("rows share a dimension");
        }
    }
}

/// `L = Q₁ diag(σ) Q₂` with `log σ` uniform on `[log σ_min, log σ_max]`.
pub fn random_linear_map<R: Rng + ?Sized>(n: usize, sigma_min: f64, sigma_max: f64, rng: &mut R) -> Matrix {
    let (a, b) = (sigma_min.ln(), sigma_max.ln());
    let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(a..=b).exp()).collect();
    random_orthogonal(n, rng)
        .matmul(&Matrix::diagonal(&sigma))
        .matmul(&random_orthogonal(n, rng))
}

/// One `(r, kind)` line of a Monte-Carlo trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub sigma: Vec<f64>,
    pub kind: BoundKind,
    pub r: usize,
    pub lower: f64,
    pub observed: f64,
    pub upper: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: usize,
    pub max_condition: f64,
    /// Records whose observed value left its interval.
    pub violations: usize,
    /// Trials where a singular-value interval was not inside the matching
    /// operator-norm interval.
    pub containment_failures: usize,
    pub records: Vec<TrialRecord>,
}

/// Random `(curve point, L)` pairs: a random Fourier curve in a dimension
/// drawn from `dims`, a random parameter, and `L` with σ log-uniform on
/// `[0.1, 10]`.
pub fn monte_carlo<R: Rng + ?Sized>(trials: usize, dims: &[usize], rng: &mut R) -> Result<MonteCarloReport> {
    if dims.is_empty() {
        return Err(Error::invalid("no dimensions to sample"));
    }
    let mut records = Vec::new();
    let mut violations = 0;
    let mut containment_failures = 0;
    let mut max_condition = 0.0_f64;
    let mut trial = 0;
    while trial < trials {
        let n = dims[rng.random_range(0..dims.len())];
        let curve = AnalyticCurve::random_fourier(n, rng)?;
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let jet = curve.jet(t, n)?;
        if !jets::regularity(&jet).is_strongly_regular() {
            continue;
        }
        let l = random_linear_map(n, 0.1, 10.0, rng);
        let spec = singular_values(&l)?;
        max_condition = max_condition.max(spec.condition());
        let reports = verify_jet(&jet, &l)?;
        // Reports alternate singular / operator-norm for each r.
        if reports
            .chunks(2)
            .any(|pair| !pair[0].interval().within(&pair[1].interval()))
        {
            containment_failures += 1;
        }
        for rep in reports {
            if !rep.satisfied {
                violations += 1;
            }
            records.push(TrialRecord {
                trial,
                n,
                sigma: spec.values().to_vec(),
                kind: rep.kind,
                r: rep.r,
                lower: rep.lower,
                observed: rep.observed,
                upper: rep.upper,
                ok: rep.satisfied,
            });
        }
        trial += 1;
    }
    Ok(MonteCarloReport {
        trials,
        max_condition,
        violations,
        containment_failures,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectrum_examples() {
        let s = singular_values(&Matrix::diagonal(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthogonal(4, &mut rng);
        let s = singular_values(&q).unwrap();
        assert!(s.values().iter().all(|x| (x - 1.0).abs() < 1e-13));
    }

    #[test]
    fn scalar_map_is_sharp() {
        let a = 2.5;
        let spec = SingularSpectrum::new(vec![a; 4]).unwrap();
        for r in 1..4 {
            for b in [curvature_bounds(&spec, 0.8, r).unwrap(), operator_norm_bounds(&spec, 0.8, r).unwrap()] {
                assert!((b.lower - 0.8 / a).abs() < 1e-15 * 10.0);
                assert!((b.upper - 0.8 / a).abs() < 1e-15 * 10.0);
            }
        }
    }

    #[test]
    fn closed_forms_for_n4() {
        // r = 1: σ₃σ₄/σ₁³ and σ₁σ₂/σ₄³; r = 2: σ₂σ₃σ₄²/(σ₁³σ₂²) and σ₁²σ₂σ₃/(σ₃²σ₄³);
        // r = 3: σ₄²/(σ₁²σ₂) and σ₁²/(σ₃σ₄²).
        let s = [5.0, 3.0, 2.0, 0.5];
        let spec = SingularSpectrum::new(s.to_vec()).unwrap();
        let expect = [
            (s[2] * s[3] / s[0].powi(3), s[0] * s[1] / s[3].powi(3)),
            (
                s[1] * s[2] * s[3].powi(2) / (s[0].powi(3) * s[1].powi(2)),
                s[0].powi(2) * s[1] * s[2] / (s[2].powi(2) * s[3].powi(3)),
            ),
            (s[3].powi(2) / (s[0].powi(2) * s[1]), s[0].powi(2) / (s[2] * s[3].powi(2))),
        ];
        for (r, (lo, hi)) in expect.iter().enumerate() {
            let b = curvature_bounds(&spec, 1.0, r + 1).unwrap();
            assert!((b.lower - lo).abs() <= 1e-14 * lo, "r={} {} vs {lo}", r + 1, b.lower);
            assert!((b.upper - hi).abs() <= 1e-14 * hi, "r={} {} vs {hi}", r + 1, b.upper);
        }
    }

    #[test]
    fn ellipse_within_bounds() {
        let l = Matrix::diagonal(&[2.0, 1.0, 1.0]);
        let circle_in_r3 = AnalyticCurve::helix(1.0, 0.0);
        let jet = circle_in_r3.jet(0.0, 3).unwrap();
        let spec = singular_values(&l).unwrap();
        let observed = curvatures(&jet.mapped(&l)).unwrap().kappa[0];
        // Ellipse (2cos t, sin t) at t = 0: κ = a/b² = 2.
        assert!((observed - 2.0).abs() < 1e-14);
        let b = curvature_bounds(&spec, 1.0, 1).unwrap();
        assert!(b.contains(observed));
    }

    #[test]
    fn reflection_flips_torsion_within_bounds() {
        let curve = AnalyticCurve::helix(1.0, 0.7);
        let mirror = Matrix::diagonal(&[1.0, 1.0, -1.0]);
        let reports = verify_on_curve(&curve, &mirror, &Vector::zeros(3), &[0.0, 1.0]).unwrap();
        for (_, reps) in &reports {
            assert!(reps.iter().all(|r| r.satisfied));
        }
        let jet = curve.jet(0.5, 3).unwrap();
        let before = curvatures(&jet).unwrap().kappa[1];
        let after = curvatures(&jet.mapped(&mirror)).unwrap().kappa[1];
        assert!((before + after).abs() < 1e-14 && before > 0.0);
    }

    #[test]
    fn small_monte_carlo_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let report = monte_carlo(50, &[3, 4, 5], &mut rng).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.containment_failures, 0);
        assert!(report.max_condition <= 100.0);
    }
}
