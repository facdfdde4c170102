//! Frenet frames, curve reconstruction from curvature profiles, and rigid
//! alignment of sampled curves.

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureProfile;
use crate::error::{Error, Result};
use crate::gram::{self, DEFAULT_REGULARITY_EPS};
use crate::jets::{CurveJet, CurveSamples};
use crate::linalg::{Matrix, Vector};
use crate::multivector;
use crate::svd::svd;

/// Tolerance on `EᵗE = I` and `det E = 1` for frames and rotations.
pub const FRAME_TOL: f64 = 1e-10;

/// Position plus the frame `e₁..eₙ` stored as matrix rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FrenetState {
    pub position: Vector,
    pub frame: Matrix,
}

impl FrenetState {
    pub fn new(position: Vector, frame: Matrix) -> Result<Self> {
        let s = FrenetState { position, frame };
        s.validate()?;
        Ok(s)
    }

    /// Origin with the standard basis.
    pub fn standard(dim: usize) -> Self {
        FrenetState {
            position: Vector::zeros(dim),
            frame: Matrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.position.dim()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        multivector::check_supported(n)?;
        if self.frame.rows() != n || self.frame.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.frame.rows(),
            });
        }
        let defect = self.frame.orthogonality_defect();
        if !(defect <= FRAME_TOL) {
            return Err(Error::invalid(format!("frame is not orthonormal (defect {defect:e})")));
        }
        if (self.frame.determinant() - 1.0).abs() > FRAME_TOL {
            return Err(Error::invalid("frame is not positively oriented"));
        }
        Ok(())
    }

    /// `eᵢ` as a vector, one-based.
    pub fn e(&self, i: usize) -> Vector {
        self.frame.row_vector(i - 1)
    }
}

/// Frenet frame of a jet.
#[derive(Clone, Debug, PartialEq)]
pub struct FrenetFrame {
    pub t: f64,
    pub frame: Matrix,
    /// `a_{n,n}` in `eₙ = a_{n,1}c′ + … + a_{n,n}c^(n)`, present when the jet
    /// carries `c^(n)` and it is independent of the lower derivatives.
    pub top_coefficient: Option<f64>,
}

/// `e₁..e_{n−1}` by Gram-Schmidt on `c′..c^(n−1)`, and `eₙ` their cross
/// product, which completes them to a positive orthonormal basis.
pub fn frame_at(jet: &CurveJet) -> Result<FrenetFrame> {
    let n = jet.dim();
    jet.require_order(n - 1)?;
    let sys = gram::gram_schmidt(jet.leading(n - 1))?;
    let mut rows = sys.vectors;
    rows.push(multivector::cross_vector(&rows)?);
    let top_coefficient = if jet.order() >= n {
        let last = jet.deriv(n);
        let p = rows[n - 1].dot(last);
        (p.abs() > DEFAULT_REGULARITY_EPS * last.norm()).then(|| 1.0 / p)
    } else {
        None
    };
    Ok(FrenetFrame {
        t: jet.t,
        frame: Matrix::from_rows(&rows)?,
        top_coefficient,
    })
}

/// Frenet state of a curve at `t` from its position and jet.
pub fn state_at(position: Vector, jet: &CurveJet) -> Result<FrenetState> {
    FrenetState::new(position, frame_at(jet)?.frame)
}

/// Rigid motion `x ↦ Lx + λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub rotation: Matrix,
    pub translation: Vector,
}

impl Isometry {
    pub fn new(rotation: Matrix, translation: Vector) -> Result<Self> {
        let n = translation.dim();
        if rotation.rows() != n || rotation.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rotation.rows(),
            });
        }
        let defect = rotation.orthogonality_defect();
        if !(defect <= FRAME_TOL) {
            return Err(Error::invalid(format!("map is not orthogonal (defect {defect:e})")));
        }
        Ok(Isometry {
            rotation,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Isometry {
            rotation: Matrix::identity(dim),
            translation: Vector::zeros(dim),
        }
    }

    /// `det L = ±1`
    pub fn orientation(&self) -> i8 {
        if self.rotation.determinant() > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.rotation.mul_vec(x) + &self.translation
    }

    pub fn apply_samples(&self, samples: &CurveSamples) -> Result<CurveSamples> {
        samples.map_points(|p| self.apply(p))
    }

    /// Moves the position and rotates every frame vector.
    pub fn apply_state(&self, state: &FrenetState) -> FrenetState {
        FrenetState {
            position: self.apply(&state.position),
            frame: state.frame.matmul(&self.rotation.transpose()),
        }
    }
}

/// Samples of an integrated curve with its frames.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: CurveSamples,
    pub frames: Vec<Matrix>,
    /// Largest `‖EᵗE − I‖_max` seen after a step, before re-orthonormalizing.
    pub max_drift: f64,
}

pub fn integrate(profile: &CurvatureProfile, init: &FrenetState) -> Result<CurveSamples> {
    Ok(integrate_trajectory(profile, init)?.samples)
}

/// `(x′, E′) = s(t)·(e₁, F(κ(t)) E)` where `F` is skew tri-diagonal with
/// `F_{r,r+1} = κ_r`.
fn frenet_rhs(speed: f64, kappa: &[f64], frame: &Matrix) -> (Vector, Matrix) {
    let n = frame.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let row = d.row_mut(i);
        if i + 1 < n {
            let k = kappa[i] * speed;
            for (x, y) in row.iter_mut().zip(frame.row(i + 1)) {
                *x += k * y;
            }
        }
        if i > 0 {
            let k = kappa[i - 1] * speed;
            for (x, y) in row.iter_mut().zip(frame.row(i - 1)) {
                *x -= k * y;
            }
        }
    }
    (frame.row_vector(0).scaled(speed), d)
}

/// Classical RK4 on the profile grid. Coefficients at half steps are linear
/// interpolants; the frame is re-orthonormalized after every step.
pub fn integrate_trajectory(profile: &CurvatureProfile, init: &FrenetState) -> Result<Trajectory> {
    let n = profile.dim;
    init.validate()?;
    if init.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: init.dim(),
        });
    }
    for (r, series) in profile.kappa[..n - 2].iter().enumerate() {
        if let Some(i) = series.iter().position(|&k| !(k > 0.0)) {
            return Err(Error::invalid(format!(
                "κ_{} must be positive, got {} at t = {}",
                r + 1,
                series[i],
                profile.t[i]
            )));
        }
    }
    let h = profile.spacing();
    let mut x = init.position.clone();
    let mut e = init.frame.clone();
    let mut points = vec![x.clone()];
    let mut frames = vec![e.clone()];
    let mut max_drift = 0.0_f64;
    for i in 0..profile.len() - 1 {
        let c0 = profile.at(i);
        let c1 = profile.at(i + 1);
        let mid_speed = 0.5 * (c0.speed + c1.speed);
        let mid_kappa: Vec<f64> = c0.kappa.iter().zip(&c1.kappa).map(|(a, b)| 0.5 * (a + b)).collect();

        let stage = |offset: Option<(&Matrix, f64)>, speed: f64, kappa: &[f64]| {
            let mut ee = e.clone();
            if let Some((de, s)) = offset {
                ee.axpy(s, de);
            }
            frenet_rhs(speed, kappa, &ee)
        };
        let (k1x, k1e) = stage(None, c0.speed, &c0.kappa);
        let (k2x, k2e) = stage(Some((&k1e, 0.5 * h)), mid_speed, &mid_kappa);
        let (k3x, k3e) = stage(Some((&k2e, 0.5 * h)), mid_speed, &mid_kappa);
        let (k4x, k4e) = stage(Some((&k3e, h)), c1.speed, &c1.kappa);

        x.axpy(h / 6.0, &k1x);
        x.axpy(h / 3.0, &k2x);
        x.axpy(h / 3.0, &k3x);
        x.axpy(h / 6.0, &k4x);
        e.axpy(h / 6.0, &k1e);
        e.axpy(h / 3.0, &k2e);
        e.axpy(h / 3.0, &k3e);
        e.axpy(h / 6.0, &k4e);

        let drift = e.transpose().orthogonality_defect();
        if !drift.is_finite() {
            return Err(Error::BlowUp(format!("frame diverged at t = {}", profile.t[i + 1])));
        }
        max_drift = max_drift.max(drift);
        e.orthonormalize_rows();
        points.push(x.clone());
        frames.push(e.clone());
    }
    Ok(Trajectory {
        samples: CurveSamples::new(profile.t.clone(), points)?,
        frames,
        max_drift,
    })
}

/// Which orthogonal maps an alignment may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationClass {
    /// `det L = +1`
    Proper,
    /// `det L = −1`
    Improper,
    Any,
}

/// Result of [`align`].
#[derive(Clone, Debug)]
pub struct Alignment {
    /// Maps `a` onto `b`.
    pub isometry: Isometry,
    pub rms: f64,
}

/// Rigid motion `g` of the requested class minimizing the RMS distance
/// between `g(a_i)` and `b_i` (orthogonal Procrustes with a determinant
/// correction on the smallest singular direction).
pub fn align(a: &CurveSamples, b: &CurveSamples, class: OrientationClass) -> Result<Alignment> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "cannot align {} samples with {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < n + 1 {
        return Err(Error::InsufficientPoints {
            needed: n + 1,
            found: a.len(),
        });
    }
    let centroid = |s: &CurveSamples| {
        let mut c = Vector::zeros(n);
        for p in s.points() {
            c += p;
        }
        c.scaled(1.0 / s.len() as f64)
    };
    let (ca, cb) = (centroid(a), centroid(b));
    // H = Σ (b_i − b̄)(a_i − ā)ᵗ, so that L = U D Vᵗ maximizes tr(Lᵗ H).
    let mut hm = Matrix::zeros(n, n);
    for (pa, pb) in a.points().iter().zip(b.points()) {
        let (da, db) = (pa - &ca, pb - &cb);
        for i in 0..n {
            for j in 0..n {
                hm[(i, j)] += db[i] * da[j];
            }
        }
    }
    let dec = svd(&hm)?;
    let base_sign = dec.u.determinant() * dec.v.determinant();
    let rotation_with = |flip: bool| {
        let mut d = vec![1.0; n];
        if flip {
            d[n - 1] = -1.0;
        }
        dec.u.matmul(&Matrix::diagonal(&d)).matmul(&dec.v.transpose())
    };
    let rotation = match class {
        OrientationClass::Proper => rotation_with(base_sign < 0.0),
        OrientationClass::Improper => rotation_with(base_sign > 0.0),
        OrientationClass::Any => rotation_with(false),
    };
    let translation = &cb - &rotation.mul_vec(&ca);
    let isometry = Isometry::new(rotation, translation)?;
    let sum: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(pa, pb)| (&isometry.apply(pa) - pb).norm_squared())
        .sum();
    Ok(Alignment {
        isometry,
        rms: (sum / a.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::AnalyticCurve;
    use std::f64::consts::{PI, SQRT_2, TAU};

    #[test]
    fn unit_circle_frame() {
        let f = frame_at(&AnalyticCurve::circle(1.0).jet(0.0, 2).unwrap()).unwrap();
        let expected = Matrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!((&f.frame - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn moment_curve_frame_is_standard() {
        let f = frame_at(&AnalyticCurve::moment(3).unwrap().jet(0.0, 3).unwrap()).unwrap();
        assert_eq!(f.frame, Matrix::identity(3));
        // a₃₃ = vol(c′,c″)/det(c′,c″,c‴) = 2/12
        assert!((f.top_coefficient.unwrap() - 2.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn circle_closes() {
        let r = 3.0;
        let count = 20001;
        let h = TAU * r / (count - 1) as f64;
        let p = CurvatureProfile::constant(1.0, &[1.0 / r], 0.0, h, count).unwrap();
        let s = integrate(&p, &FrenetState::standard(2)).unwrap();
        let last = s.points().last().unwrap();
        assert!(last.norm() <= 1e-6 * r, "{last}");
    }

    #[test]
    fn zero_curvature_gives_a_line() {
        let p = CurvatureProfile::constant(1.0, &[0.0], 0.0, 0.1, 11).unwrap();
        let s = integrate(&p, &FrenetState::standard(2)).unwrap();
        assert!(s.points()[10].distance(&Vector::from([1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn integrates_helix() {
        let count = 6284;
        let h = TAU / (count - 1) as f64;
        let p = CurvatureProfile::constant(SQRT_2, &[0.5, 0.5], 0.0, h, count).unwrap();
        let traj = integrate_trajectory(&p, &FrenetState::standard(3)).unwrap();
        assert!(traj.max_drift <= 1e-9);
        let helix = AnalyticCurve::helix(1.0, 1.0).sample(0.0, h, count).unwrap();
        let al = align(&traj.samples, &helix, OrientationClass::Proper).unwrap();
        assert!(al.rms <= 1e-6, "rms {}", al.rms);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = CurvatureProfile::constant(1.0, &[0.0, 0.5], 0.0, 0.1, 11).unwrap();
        assert!(integrate(&p, &FrenetState::standard(3)).is_err());
        let p = CurvatureProfile::constant(1.0, &[1.0, 0.5], 0.0, 0.1, 11).unwrap();
        let mirrored = FrenetState {
            position: Vector::zeros(3),
            frame: Matrix::diagonal(&[1.0, 1.0, -1.0]),
        };
        assert!(integrate(&p, &mirrored).is_err());
        assert!(integrate(&p, &FrenetState::standard(4)).is_err());
    }

    #[test]
    fn align_recovers_motion() {
        let a = AnalyticCurve::helix(1.0, 0.3).sample(0.0, 0.05, 100).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = Matrix::from_row_major(3, 3, vec![c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let g = Isometry::new(rot.clone(), Vector::from([1.0, 2.0, -0.5])).unwrap();
        let b = g.apply_samples(&a).unwrap();
        let al = align(&a, &b, OrientationClass::Proper).unwrap();
        assert!(al.rms <= 1e-10);
        assert!((&al.isometry.rotation - &rot).max_abs() <= 1e-10);
        assert!(al.isometry.translation.distance(&g.translation) <= 1e-10);

        let same = align(&a, &a, OrientationClass::Proper).unwrap();
        assert!(same.rms <= 1e-12);
        assert!((&same.isometry.rotation - &Matrix::identity(3)).max_abs() <= 1e-12);
    }

    #[test]
    fn mirrored_curve_needs_reflection() {
        let a = AnalyticCurve::helix(1.0, 0.5).sample(0.0, 0.05, 2 * (PI / 0.05) as usize).unwrap();
        let mirror = Isometry::new(Matrix::diagonal(&[1.0, -1.0, 1.0]), Vector::zeros(3)).unwrap();
        let b = mirror.apply_samples(&a).unwrap();
        assert!(align(&a, &b, OrientationClass::Proper).unwrap().rms > 1e-2);
        let any = align(&a, &b, OrientationClass::Any).unwrap();
        assert!(any.rms <= 1e-10);
        assert_eq!(any.isometry.orientation(), -1);
        assert!(align(&a, &b, OrientationClass::Improper).unwrap().rms <= 1e-10);
    }
}
