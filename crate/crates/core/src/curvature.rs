//! Curvatures `κ₁..κ_{n−1}` of a curve from its derivative jet.
//!
//! With `v_k = vol(c′..c^(k))` and `v₀ = 1`,
//!
//! ```text
//! κ_r     = v_{r−1} v_{r+1} / (v_r² ‖c′‖)            r ≤ n − 2
//! κ_{n−1} = v_{n−2} det(c′..c^(n)) / (v_{n−1}² ‖c′‖)
//! ```
//!
//! [`curvatures`] evaluates these through Gram-Schmidt residuals, where
//! `v_{r+1}/v_r` is the norm of the `(r+1)`-th residual, so the ratios never
//! form the volumes themselves and cannot under- or overflow.
//! [`curvatures_cross_form`] evaluates the same quantities from multivector
//! cross-product norms and serves as an independent check.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{self, DEFAULT_REGULARITY_EPS};
use crate::io::format_f64;
use crate::jets::{CurveJet, UNIFORM_GRID_RTOL};
use crate::linalg::{Matrix, Vector};
use crate::multivector::{self, check_supported};

/// Speed and curvatures at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curvatures {
    pub speed: f64,
    pub kappa: Vec<f64>,
}

pub fn curvatures(jet: &CurveJet) -> Result<Curvatures> {
    curvatures_with(jet, DEFAULT_REGULARITY_EPS)
}

/// Fails with [`Error::CollapsedVolume`] when `c′..c^(k)` is dependent for
/// some `k ≤ n − 1`. The top curvature only needs `det`, which may vanish.
pub fn curvatures_with(jet: &CurveJet, eps: f64) -> Result<Curvatures> {
    let n = jet.dim();
    jet.require_order(n)?;
    let sys = gram::gram_schmidt_with(jet.leading(n - 1), eps)?;
    // ‖r_k‖ = v_k / v_{k−1}
    let mut residual: Vec<f64> = sys.diag_coeffs.iter().map(|a| 1.0 / a).collect();
    residual.push(signed_top_residual(jet, &sys.vectors));
    let speed = residual[0];
    let kappa = (1..n).map(|r| residual[r] / (residual[r - 1] * speed)).collect();
    Ok(Curvatures { speed, kappa })
}

/// `det(c′..c^(n)) / v_{n−1}`: the component of `c^(n)` orthogonal to the
/// span of the lower derivatives, signed by the determinant.
fn signed_top_residual(jet: &CurveJet, frame: &[Vector]) -> f64 {
    let n = jet.dim();
    let mut r = jet.deriv(n).clone();
    for _pass in 0..2 {
        for e in frame {
            let d = r.dot(e);
            r.axpy(-d, e);
        }
    }
    // Column scaling by positive factors keeps the sign of the determinant.
    let columns: Vec<Vector> = jet
        .derivs
        .iter()
        .map(|d| {
            let s = d.norm();
            if s > 0.0 {
                d.scaled(1.0 / s)
            } else {
                d.clone()
            }
        })
        .collect();
    let det = Matrix::from_columns(&columns)
        .expect("jet derivatives share a dimension")
        .determinant();
    if det == 0.0 {
        0.0
    } else {
        r.norm().copysign(det)
    }
}

/// Same contract as [`curvatures`], computed from `‖c′ × … × c^(k)‖` and
/// the multivector determinant. Ratios are combined in log space.
pub fn curvatures_cross_form(jet: &CurveJet) -> Result<Vec<f64>> {
    curvatures_cross_form_with(jet, DEFAULT_REGULARITY_EPS)
}

pub fn curvatures_cross_form_with(jet: &CurveJet, eps: f64) -> Result<Vec<f64>> {
    let n = jet.dim();
    jet.require_order(n)?;
    // ln v_k for k = 0..n−1
    let mut log_vol = vec![0.0];
    let mut log_norms = 0.0;
    for k in 1..n {
        let v = multivector::cross(jet.leading(k))?.norm();
        log_norms += jet.deriv(k).norm().ln();
        let normalized = (v.ln() - log_norms).exp();
        if !(normalized > eps) {
            return Err(Error::CollapsedVolume { k, normalized });
        }
        log_vol.push(v.ln());
    }
    let log_speed = log_vol[1];
    let mut kappa: Vec<f64> = (1..n - 1)
        .map(|r| (log_vol[r - 1] + log_vol[r + 1] - 2.0 * log_vol[r] - log_speed).exp())
        .collect();
    let det = multivector::determinant(jet.leading(n))?;
    let top = if det == 0.0 {
        0.0
    } else {
        (log_vol[n - 2] + det.abs().ln() - 2.0 * log_vol[n - 1] - log_speed)
            .exp()
            .copysign(det)
    };
    kappa.push(top);
    Ok(kappa)
}

/// Classical curvature and torsion in ℝ³:
/// `κ = ‖c′×c″‖/‖c′‖³`, `τ = det(c′,c″,c‴)/‖c′×c″‖²`.
pub fn classical_r3(jet: &CurveJet) -> Result<(f64, f64)> {
    if jet.dim() != 3 {
        return Err(Error::UnsupportedDimension(jet.dim()));
    }
    jet.require_order(3)?;
    let [a, b, c] = [jet.deriv(1), jet.deriv(2), jet.deriv(3)].map(|v| [v[0], v[1], v[2]]);
    let w = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let wn2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let speed = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if !(wn2.sqrt() > DEFAULT_REGULARITY_EPS * speed * jet.deriv(2).norm()) {
        return Err(Error::CollapsedVolume {
            k: 2,
            normalized: wn2.sqrt() / (speed * jet.deriv(2).norm()),
        });
    }
    let triple = w[0] * c[0] + w[1] * c[1] + w[2] * c[2];
    Ok((wn2.sqrt() / speed.powi(3), triple / wn2))
}

/// `κ₁ = vol(c′,c″)/‖c′‖³` and, for `n ≥ 4`, `κ₂ = vol(c′,c″,c‴)/vol(c′,c″)²`.
pub fn low_order(jet: &CurveJet) -> Result<(f64, Option<f64>)> {
    let n = jet.dim();
    if n < 3 {
        return Err(Error::invalid(
            "the unsigned κ₁ form needs n ≥ 3; in ℝ² κ₁ is the signed top curvature",
        ));
    }
    let want = if n >= 4 { 3 } else { 2 };
    jet.require_order(want)?;
    let speed = jet.speed();
    let v2 = gram::volume(jet.leading(2));
    if !(gram::normalized_volume(jet.leading(2)) > DEFAULT_REGULARITY_EPS) {
        return Err(Error::CollapsedVolume {
            k: 2,
            normalized: gram::normalized_volume(jet.leading(2)),
        });
    }
    let k1 = v2 / speed.powi(3);
    let k2 = (n >= 4).then(|| gram::volume(jet.leading(3)) / (v2 * v2));
    Ok((k1, k2))
}

/// One side-by-side evaluation of a volume product identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductIdentity {
    /// `r` for `vol(c′..c^(r))`, or `n` for the determinant identity.
    pub r: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeProductReport {
    pub identities: Vec<ProductIdentity>,
}

impl VolumeProductReport {
    pub fn max_residual(&self) -> f64 {
        self.identities.iter().map(|i| i.residual).fold(0.0, f64::max)
    }
}

fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Checks `vol(c′..c^(r))/‖c′‖^{r(r+1)/2} = Π_{j<r} κ_j^{r−j}` for
/// `r = 1..n−1` and `det(c′..c^(n))/‖c′‖^{n(n+1)/2} = Π_{j<n} κ_j^{n−j}`.
/// The left sides use Gram determinants, the right sides [`curvatures`].
pub fn volume_products(jet: &CurveJet) -> Result<VolumeProductReport> {
    let n = jet.dim();
    let c = curvatures(jet)?;
    let product = |r: usize| -> f64 {
        (1..r).map(|j| c.kappa[j - 1].powi((r - j) as i32)).product()
    };
    let speed_power = |r: usize| c.speed.powi((r * (r + 1) / 2) as i32);
    let mut identities: Vec<ProductIdentity> = (1..n)
        .map(|r| {
            let lhs = gram::volume(jet.leading(r)) / speed_power(r);
            let rhs = product(r);
            ProductIdentity {
                r,
                lhs,
                rhs,
                residual: relative_residual(lhs, rhs),
            }
        })
        .collect();
    let lhs = jet_matrix(jet).determinant() / speed_power(n);
    let rhs = product(n);
    identities.push(ProductIdentity {
        r: n,
        lhs,
        rhs,
        residual: relative_residual(lhs, rhs),
    });
    Ok(VolumeProductReport { identities })
}

fn jet_matrix(jet: &CurveJet) -> Matrix {
    Matrix::from_columns(jet.leading(jet.dim())).expect("jet derivatives share a dimension")
}

/// Speed and curvature functions sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub dim: usize,
    pub t: Vec<f64>,
    pub speed: Vec<f64>,
    /// `kappa[r − 1][i] = κ_r(t_i)`
    pub kappa: Vec<Vec<f64>>,
}

impl CurvatureProfile {
    pub fn new(dim: usize, t: Vec<f64>, speed: Vec<f64>, kappa: Vec<Vec<f64>>) -> Result<Self> {
        let p = CurvatureProfile {
            dim,
            t,
            speed,
            kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Constant speed and curvatures on `t₀ + i h`, `count` nodes.
    pub fn constant(speed: f64, kappa: &[f64], t0: f64, h: f64, count: usize) -> Result<Self> {
        let t = (0..count).map(|i| t0 + i as f64 * h).collect();
        Self::new(
            kappa.len() + 1,
            t,
            vec![speed; count],
            kappa.iter().map(|&k| vec![k; count]).collect(),
        )
    }

    /// Curvatures of every jet, in order.
    pub fn from_jets(jets: &[CurveJet]) -> Result<Self> {
        let first = jets
            .first()
            .ok_or_else(|| Error::invalid("no jets to evaluate"))?;
        let n = first.dim();
        let mut t = Vec::with_capacity(jets.len());
        let mut speed = Vec::with_capacity(jets.len());
        let mut kappa = vec![Vec::with_capacity(jets.len()); n - 1];
        for jet in jets {
            let c = curvatures(jet)?;
            t.push(jet.t);
            speed.push(c.speed);
            for (series, k) in kappa.iter_mut().zip(c.kappa) {
                series.push(k);
            }
        }
        Self::new(n, t, speed, kappa)
    }

    fn validate(&self) -> Result<()> {
        check_supported(self.dim)?;
        let len = self.t.len();
        if len < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                found: len,
            });
        }
        if self.kappa.len() != self.dim - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim - 1,
                found: self.kappa.len(),
            });
        }
        if self.speed.len() != len || self.kappa.iter().any(|k| k.len() != len) {
            return Err(Error::invalid("profile series lengths differ from the grid"));
        }
        if self.speed.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("speed must be positive and finite"));
        }
        if self.kappa.iter().flatten().any(|k| !k.is_finite()) {
            return Err(Error::invalid("non-finite curvature value"));
        }
        let h = self.spacing();
        if !(h > 0.0) {
            return Err(Error::invalid("parameter grid must be strictly increasing"));
        }
        for (i, w) in self.t.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > UNIFORM_GRID_RTOL * h {
                return Err(Error::NonUniformGrid { index: i + 1 });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.t[self.len() - 1] - self.t[0]) / (self.len() - 1) as f64
    }

    /// Speed and curvatures at node `i`.
    pub fn at(&self, i: usize) -> Curvatures {
        Curvatures {
            speed: self.speed[i],
            kappa: self.kappa.iter().map(|k| k[i]).collect(),
        }
    }

    /// Largest `|a − b| / max(|b|, floor)` over all series.
    pub fn max_relative_error(&self, reference: &CurvatureProfile, floor: f64) -> Result<f64> {
        if self.dim != reference.dim || self.len() != reference.len() {
            return Err(Error::invalid("profiles have different shapes"));
        }
        let rel = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
                .fold(0.0, f64::max)
        };
        Ok(self
            .kappa
            .iter()
            .zip(&reference.kappa)
            .map(|(a, b)| rel(a, b))
            .fold(rel(&self.speed, &reference.speed), f64::max))
    }

    /// Nodes `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(
            self.dim,
            self.t[start..end].to_vec(),
            self.speed[start..end].to_vec(),
            self.kappa.iter().map(|k| k[start..end].to_vec()).collect(),
        )
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let p: CurvatureProfile = serde_json::from_reader(reader)?;
        p.validate()?;
        Ok(p)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        crate::io::write_json(writer, self)
    }

    /// Plot-ready columns `t,speed,kappa1,...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string(), "speed".to_string()];
        header.extend((1..self.dim).map(|r| format!("kappa{r}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![format_f64(self.t[i]), format_f64(self.speed[i])];
            row.extend(self.kappa.iter().map(|k| format_f64(k[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cross-check residuals attached to each report record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest relative difference to [`curvatures_cross_form`].
    pub cross_form: f64,
    /// Largest relative difference to [`classical_r3`] (ℝ³ only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<f64>,
    /// Largest relative residual of the volume product identities.
    pub volume_products: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRecord {
    pub t: f64,
    pub speed: f64,
    pub kappa: Vec<f64>,
    pub residuals: Residuals,
}

fn max_relative_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_residual(x, y))
        .fold(0.0, f64::max)
}

/// Curvatures plus dual-path residuals at one jet.
pub fn record(jet: &CurveJet) -> Result<CurvatureRecord> {
    let c = curvatures(jet)?;
    let cross = curvatures_cross_form(jet)?;
    let classical = if jet.dim() == 3 {
        let (k, tau) = classical_r3(jet)?;
        Some(max_relative_difference(&c.kappa, &[k, tau]))
    } else {
        None
    };
    Ok(CurvatureRecord {
        t: jet.t,
        residuals: Residuals {
            cross_form: max_relative_difference(&c.kappa, &cross),
            classical,
            volume_products: volume_products(jet)?.max_residual(),
        },
        speed: c.speed,
        kappa: c.kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::AnalyticCurve;

    #[test]
    fn circle_radius_two() {
        let jet = AnalyticCurve::circle(2.0).jet(0.4, 2).unwrap();
        let c = curvatures(&jet).unwrap();
        assert!((c.speed - 2.0).abs() < 1e-15);
        assert!((c.kappa[0] - 0.5).abs() < 1e-15);
        assert!((curvatures_cross_form(&jet).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn helix_closed_forms() {
        for (a, b) in [(1.0, 1.0), (2.0, 0.5), (1.0, -3.0)] {
            let jet = AnalyticCurve::helix(a, b).jet(1.3, 3).unwrap();
            let c = curvatures(&jet).unwrap();
            let d = a * a + b * b;
            assert!((c.kappa[0] - a / d).abs() < 1e-14);
            assert!((c.kappa[1] - b / d).abs() < 1e-14);
            let (k, tau) = classical_r3(&jet).unwrap();
            assert!((k - a / d).abs() < 1e-14 && (tau - b / d).abs() < 1e-14);
        }
    }

    #[test]
    fn planar_curve_in_r3_has_zero_torsion() {
        let jet = AnalyticCurve::helix(2.0, 0.0).jet(0.2, 3).unwrap();
        assert_eq!(curvatures(&jet).unwrap().kappa[1], 0.0);
        assert_eq!(classical_r3(&jet).unwrap().1, 0.0);
    }

    #[test]
    fn degenerate_jet_names_volume() {
        let line = AnalyticCurve::line(Vector::zeros(3), Vector::from([1.0, 1.0, 0.0])).unwrap();
        let jet = line.jet(0.0, 3).unwrap();
        assert!(matches!(curvatures(&jet), Err(Error::CollapsedVolume { k: 2, .. })));
        assert!(matches!(
            curvatures_cross_form(&jet),
            Err(Error::CollapsedVolume { k: 2, .. })
        ));
        assert!(classical_r3(&jet).is_err());
    }

    #[test]
    fn short_jet_rejected() {
        let jet = AnalyticCurve::helix(1.0, 1.0).jet(0.0, 2).unwrap();
        assert!(curvatures(&jet).is_err());
    }

    #[test]
    fn low_order_forms() {
        let jet = AnalyticCurve::helix(1.0, 1.0).jet(0.0, 3).unwrap();
        let (k1, k2) = low_order(&jet).unwrap();
        assert!((k1 - 0.5).abs() < 1e-15 && k2.is_none());

        let jet = AnalyticCurve::double_helix(2.0).jet(0.3, 4).unwrap();
        let full = curvatures(&jet).unwrap();
        let (k1, k2) = low_order(&jet).unwrap();
        assert!((k1 - full.kappa[0]).abs() < 1e-12);
        assert!((k2.unwrap() - full.kappa[1]).abs() < 1e-10);

        let circle = AnalyticCurve::circle(1.0).jet(0.0, 2).unwrap();
        assert!(low_order(&circle).is_err());
    }

    #[test]
    fn volume_product_conventions() {
        let jet = AnalyticCurve::moment(4).unwrap().jet(0.5, 4).unwrap();
        let report = volume_products(&jet).unwrap();
        assert_eq!(report.identities[0].rhs, 1.0);
        assert!((report.identities[0].lhs - 1.0).abs() < 1e-15);
        assert!(report.max_residual() < 1e-10);
    }

    #[test]
    fn profile_json_round_trip() {
        let p = CurvatureProfile::constant(1.5, &[0.5, -0.25], 0.0, 0.1, 5).unwrap();
        let mut buf = Vec::new();
        p.write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"dim\":3,\"t\":["));
        assert_eq!(CurvatureProfile::read_json(&buf[..]).unwrap(), p);
        assert!(CurvatureProfile::constant(0.0, &[1.0], 0.0, 0.1, 3).is_err());

        let mut csv = Vec::new();
        p.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("t,speed,kappa1,kappa2"));
        assert_eq!(text.lines().count(), 6);
    }
}
