//! Curve representations and derivative jets.
//!
//! A [`CurveJet`] holds `c′(t), …, c^(m)(t)` at one parameter value. Jets come
//! either from closed-form [`AnalyticCurve`] presets or from finite
//! differences on uniformly sampled [`CurveSamples`].

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{self, DEFAULT_REGULARITY_EPS};
use crate::io::format_f64;
use crate::linalg::{Matrix, Vector};
use crate::multivector::check_supported;
use crate::stencil::{self, Stencil};

/// Relative tolerance on grid spacing uniformity.
pub const UNIFORM_GRID_RTOL: f64 = 1e-9;

/// Derivatives `c′..c^(m)` of a curve at parameter `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveJet {
    pub t: f64,
    pub derivs: Vec<Vector>,
    /// Nominal truncation scale `h^p` of the finite differences, zero for
    /// exact jets.
    pub error_scale: f64,
    /// Set when skewed boundary stencils were used.
    pub boundary: bool,
}

impl CurveJet {
    /// An exact jet. Needs at least one derivative and at most `n`.
    pub fn new(t: f64, derivs: Vec<Vector>) -> Result<Self> {
        let dim = derivs
            .first()
            .map(Vector::dim)
            .ok_or_else(|| Error::invalid("jet needs at least one derivative"))?;
        check_supported(dim)?;
        if derivs.len() > dim {
            return Err(Error::invalid(format!(
                "jet in dimension {dim} holds at most {dim} derivatives, got {}",
                derivs.len()
            )));
        }
        for d in &derivs {
            d.check_dim(dim)?;
        }
        Ok(CurveJet {
            t,
            derivs,
            error_scale: 0.0,
            boundary: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.derivs[0].dim()
    }

    /// Highest derivative order held.
    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    /// `c^(k)`, one-based.
    pub fn deriv(&self, k: usize) -> &Vector {
        &self.derivs[k - 1]
    }

    /// `c′..c^(k)`
    pub fn leading(&self, k: usize) -> &[Vector] {
        &self.derivs[..k]
    }

    pub fn speed(&self) -> f64 {
        self.derivs[0].norm()
    }

    /// Jet of `L c + λ` (the translation drops out).
    pub fn mapped(&self, linear: &Matrix) -> CurveJet {
        CurveJet {
            derivs: self.derivs.iter().map(|d| linear.mul_vec(d)).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn require_order(&self, order: usize) -> Result<()> {
        if self.order() < order {
            return Err(Error::invalid(format!(
                "jet holds {} derivatives, {order} required",
                self.order()
            )));
        }
        Ok(())
    }
}

/// Regularity class of a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularity {
    /// `c′..c^(n−1)` independent, `c^(n)` unavailable or dependent on them.
    Regular,
    StronglyRegularRight,
    StronglyRegularLeft,
    Degenerate,
}

impl Regularity {
    pub fn is_regular(self) -> bool {
        self != Regularity::Degenerate
    }

    pub fn is_strongly_regular(self) -> bool {
        matches!(
            self,
            Regularity::StronglyRegularRight | Regularity::StronglyRegularLeft
        )
    }
}

pub fn regularity(jet: &CurveJet) -> Regularity {
    regularity_with(jet, DEFAULT_REGULARITY_EPS)
}

/// Classifies by thresholded normalized volumes. A jet with fewer than
/// `n − 1` derivatives cannot be certified and counts as degenerate.
pub fn regularity_with(jet: &CurveJet, eps: f64) -> Regularity {
    let n = jet.dim();
    if jet.order() < n - 1 || gram::normalized_volume(jet.leading(n - 1)) <= eps {
        return Regularity::Degenerate;
    }
    if jet.order() < n || gram::normalized_volume(jet.leading(n)) <= eps {
        return Regularity::Regular;
    }
    match gram::sign_of_with(jet.leading(n), eps) {
        Ok(1) => Regularity::StronglyRegularRight,
        Ok(-1) => Regularity::StronglyRegularLeft,
        _ => Regularity::Regular,
    }
}

/// Points of a curve on a uniform parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSamples {
    t: Vec<f64>,
    points: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
struct SamplesFile {
    dim: usize,
    t: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl CurveSamples {
    pub fn new(t: Vec<f64>, points: Vec<Vector>) -> Result<Self> {
        if t.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} parameter values but {} points",
                t.len(),
                points.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                found: t.len(),
            });
        }
        let dim = points[0].dim();
        check_supported(dim)?;
        for p in &points {
            p.check_dim(dim)?;
            if !p.is_finite() {
                return Err(Error::invalid("non-finite sample coordinate"));
            }
        }
        let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid("parameter grid must be strictly increasing"));
        }
        for (i, w) in t.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > UNIFORM_GRID_RTOL * h {
                return Err(Error::NonUniformGrid { index: i + 1 });
            }
        }
        Ok(CurveSamples { t, points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        (self.t[self.len() - 1] - self.t[0]) / (self.len() - 1) as f64
    }

    /// Every `stride`-th sample.
    pub fn decimated(&self, stride: usize) -> Result<CurveSamples> {
        let stride = stride.max(1);
        CurveSamples::new(
            self.t.iter().step_by(stride).copied().collect(),
            self.points.iter().step_by(stride).cloned().collect(),
        )
    }

    /// Applies `f` to every point.
    pub fn map_points(&self, f: impl Fn(&Vector) -> Vector) -> Result<CurveSamples> {
        CurveSamples::new(self.t.clone(), self.points.iter().map(f).collect())
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max(p.distance(q));
            }
        }
        d
    }

    /// Root-mean-square pointwise distance to samples on the same grid.
    pub fn rms_distance(&self, other: &CurveSamples) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::invalid("sample counts differ"));
        }
        other.points[0].check_dim(self.dim())?;
        let s: f64 = self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a - b).norm_squared())
            .sum();
        Ok((s / self.len() as f64).sqrt())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let dim = headers.len().saturating_sub(1);
        if headers.get(0) != Some("t")
            || dim == 0
            || headers.iter().skip(1).enumerate().any(|(i, h)| h != format!("x{}", i + 1))
        {
            return Err(Error::Parse(format!(
                "expected header t,x1,...,xn, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut t = Vec::new();
        let mut points = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", row + 2)))
            };
            if record.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    row + 2,
                    record.len(),
                    dim + 1
                )));
            }
            t.push(parse(&record[0])?);
            points.push(Vector::new(
                record.iter().skip(1).map(parse).collect::<Result<_>>()?,
            ));
        }
        CurveSamples::new(t, points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (t, p) in self.t.iter().zip(&self.points) {
            let mut row = vec![format_f64(*t)];
            row.extend(p.iter().map(|&x| format_f64(x)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: SamplesFile = serde_json::from_reader(reader)?;
        let samples = CurveSamples::new(file.t, file.points.into_iter().map(Vector::new).collect())?;
        if samples.dim() != file.dim {
            return Err(Error::DimensionMismatch {
                expected: file.dim,
                found: samples.dim(),
            });
        }
        Ok(samples)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let file = SamplesFile {
            dim: self.dim(),
            t: self.t.clone(),
            points: self.points.iter().map(|p| p.as_slice().to_vec()).collect(),
        };
        crate::io::write_json(writer, &file)
    }
}

/// Central finite-difference jets `c′..c^(m)` at every grid point.
///
/// Interior points use centered stencils of accuracy `O(h^p)`; points too
/// close to either end use skewed stencils of the same accuracy and are
/// flagged with [`CurveJet::boundary`].
pub fn differentiate(samples: &CurveSamples, order: usize, accuracy: usize) -> Result<Vec<CurveJet>> {
    stencil::check_order(accuracy)?;
    let n = samples.dim();
    if order == 0 || order > n {
        return Err(Error::invalid(format!(
            "derivative order must be in 1..={n}, got {order}"
        )));
    }
    let needed = stencil::min_nodes(order, accuracy);
    if samples.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            found: samples.len(),
        });
    }
    let h = samples.spacing();
    let len = samples.len();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|c| samples.points.iter().map(|p| p[c]).collect())
        .collect();
    let central: Vec<Stencil> = (1..=order).map(|d| Stencil::central(d, accuracy)).collect();
    let error_scale = h.powi(accuracy as i32);

    Ok((0..len)
        .map(|i| {
            let mut boundary = false;
            let derivs = (1..=order)
                .map(|d| {
                    let q = Stencil::central_half_width(d, accuracy);
                    let owned;
                    let s = if i >= q && i + q < len {
                        &central[d - 1]
                    } else {
                        boundary = true;
                        owned = Stencil::for_node(d, accuracy, i, len).0;
                        &owned
                    };
                    Vector::new(columns.iter().map(|col| s.apply(col, i, h)).collect())
                })
                .collect();
            CurveJet {
                t: samples.t[i],
                derivs,
                error_scale,
                boundary,
            }
        })
        .collect())
}

/// One Fourier component `A cos(ωt) + B sin(ωt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMode {
    pub frequency: f64,
    pub cos: Vector,
    pub sin: Vector,
}

/// Closed-form curve families.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    Line { origin: Vector, direction: Vector },
    /// Circle of the given radius in ℝ².
    Circle { radius: f64 },
    /// `(a cos t, a sin t, b t)` in ℝ³.
    Helix { a: f64, b: f64 },
    /// `(cos t, sin t, cos αt, sin αt)` in ℝ⁴.
    DoubleHelix { alpha: f64 },
    /// `(t, t², …, tⁿ)`.
    Moment { dim: usize },
    /// A finite Fourier sum plus a constant offset.
    Fourier { offset: Vector, modes: Vec<FourierMode> },
}

/// A closed-form curve, optionally followed by an affine map `x ↦ Lx + λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCurve {
    kind: CurveKind,
    linear: Option<Matrix>,
    translation: Option<Vector>,
}

/// `d^k/dt^k` of `(cos ωt, sin ωt)` = `ω^k (cos(ωt + kπ/2), sin(ωt + kπ/2))`.
fn trig_derivative(omega: f64, t: f64, k: usize) -> (f64, f64) {
    let phase = omega * t + k as f64 * FRAC_PI_2;
    let scale = omega.powi(k as i32);
    (scale * phase.cos(), scale * phase.sin())
}

impl AnalyticCurve {
    pub fn new(kind: CurveKind) -> Result<Self> {
        let curve = AnalyticCurve {
            kind,
            linear: None,
            translation: None,
        };
        check_supported(curve.base_dim())?;
        if let CurveKind::Fourier { offset, modes } = &curve.kind {
            for m in modes {
                m.cos.check_dim(offset.dim())?;
                m.sin.check_dim(offset.dim())?;
            }
        }
        if let CurveKind::Line { origin, direction } = &curve.kind {
            direction.check_dim(origin.dim())?;
        }
        Ok(curve)
    }

    pub fn line(origin: Vector, direction: Vector) -> Result<Self> {
        Self::new(CurveKind::Line { origin, direction })
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(CurveKind::Circle { radius }).expect("ℝ² is supported")
    }

    pub fn helix(a: f64, b: f64) -> Self {
        Self::new(CurveKind::Helix { a, b }).expect("ℝ³ is supported")
    }

    pub fn double_helix(alpha: f64) -> Self {
        Self::new(CurveKind::DoubleHelix { alpha }).expect("ℝ⁴ is supported")
    }

    pub fn moment(dim: usize) -> Result<Self> {
        Self::new(CurveKind::Moment { dim })
    }

    pub fn fourier(offset: Vector, modes: Vec<FourierMode>) -> Result<Self> {
        Self::new(CurveKind::Fourier { offset, modes })
    }

    /// Fourier curve with `dim` modes at frequencies `1, 1.5, 2, …` and
    /// standard normal coefficient vectors. Generically strongly regular.
    pub fn random_fourier<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let gaussian = |rng: &mut R| {
            Vector::new((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        };
        let modes = (0..dim)
            .map(|k| FourierMode {
                frequency: 1.0 + 0.5 * k as f64,
                cos: gaussian(rng),
                sin: gaussian(rng),
            })
            .collect();
        Self::fourier(Vector::zeros(dim), modes)
    }

    /// Composes with `x ↦ Lx + λ`.
    pub fn transformed(&self, linear: &Matrix, translation: &Vector) -> Result<Self> {
        let n = self.dim();
        if linear.rows() != n || linear.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: linear.rows(),
            });
        }
        translation.check_dim(n)?;
        let (new_linear, new_translation) = match (&self.linear, &self.translation) {
            (Some(l0), t0) => {
                let t0 = t0.clone().unwrap_or_else(|| Vector::zeros(n));
                (linear.matmul(l0), &linear.mul_vec(&t0) + translation)
            }
            (None, t0) => {
                let t0 = t0.clone().unwrap_or_else(|| Vector::zeros(n));
                (linear.clone(), &linear.mul_vec(&t0) + translation)
            }
        };
        Ok(AnalyticCurve {
            kind: self.kind.clone(),
            linear: Some(new_linear),
            translation: Some(new_translation),
        })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    fn base_dim(&self) -> usize {
        match &self.kind {
            CurveKind::Line { origin, .. } => origin.dim(),
            CurveKind::Circle { .. } => 2,
            CurveKind::Helix { .. } => 3,
            CurveKind::DoubleHelix { .. } => 4,
            CurveKind::Moment { dim } => *dim,
            CurveKind::Fourier { offset, .. } => offset.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base_dim()
    }

    /// `c^(k)(t)` before the affine map; `k = 0` is the position.
    fn base_derivative(&self, t: f64, k: usize) -> Vector {
        match &self.kind {
            CurveKind::Line { origin, direction } => match k {
                0 => &origin.clone() + &direction.scaled(t),
                1 => direction.clone(),
                _ => Vector::zeros(origin.dim()),
            },
            CurveKind::Circle { radius } => {
                let (c, s) = trig_derivative(1.0, t, k);
                Vector::new(vec![radius * c, radius * s])
            }
            CurveKind::Helix { a, b } => {
                let (c, s) = trig_derivative(1.0, t, k);
                let z = match k {
                    0 => b * t,
                    1 => *b,
                    _ => 0.0,
                };
                Vector::new(vec![a * c, a * s, z])
            }
            CurveKind::DoubleHelix { alpha } => {
                let (c1, s1) = trig_derivative(1.0, t, k);
                let (c2, s2) = trig_derivative(*alpha, t, k);
                Vector::new(vec![c1, s1, c2, s2])
            }
            CurveKind::Moment { dim } => Vector::new(
                (1..=*dim)
                    .map(|i| {
                        if k > i {
                            0.0
                        } else {
                            let fall: f64 = (0..k).map(|j| (i - j) as f64).product();
                            fall * t.powi((i - k) as i32)
                        }
                    })
                    .collect(),
            ),
            CurveKind::Fourier { offset, modes } => {
                let mut v = if k == 0 {
                    offset.clone()
                } else {
                    Vector::zeros(offset.dim())
                };
                for m in modes {
                    let (c, s) = trig_derivative(m.frequency, t, k);
                    v.axpy(c, &m.cos);
                    v.axpy(s, &m.sin);
                }
                v
            }
        }
    }

    /// `c^(k)(t)`; `k = 0` gives the position.
    pub fn derivative(&self, t: f64, k: usize) -> Vector {
        let base = self.base_derivative(t, k);
        let mut v = match &self.linear {
            Some(l) => l.mul_vec(&base),
            None => base,
        };
        if k == 0 {
            if let Some(tr) = &self.translation {
                v += tr;
            }
        }
        v
    }

    pub fn position(&self, t: f64) -> Vector {
        self.derivative(t, 0)
    }

    /// Exact jet `c′(t)..c^(m)(t)` with `1 ≤ m ≤ n`.
    pub fn jet(&self, t: f64, order: usize) -> Result<CurveJet> {
        if order == 0 || order > self.dim() {
            return Err(Error::invalid(format!(
                "derivative order must be in 1..={}, got {order}",
                self.dim()
            )));
        }
        CurveJet::new(t, (1..=order).map(|k| self.derivative(t, k)).collect())
    }

    /// Samples on `t₀, t₀ + h, …` (`count` points).
    pub fn sample(&self, t0: f64, h: f64, count: usize) -> Result<CurveSamples> {
        let t: Vec<f64> = (0..count).map(|i| t0 + i as f64 * h).collect();
        let points = t.iter().map(|&s| self.position(s)).collect();
        CurveSamples::new(t, points)
    }

    /// Samples `c(φ(s))` on a uniform `s` grid.
    pub fn sample_reparameterized(
        &self,
        s0: f64,
        h: f64,
        count: usize,
        phi: impl Fn(f64) -> f64,
    ) -> Result<CurveSamples> {
        let s: Vec<f64> = (0..count).map(|i| s0 + i as f64 * h).collect();
        let points = s.iter().map(|&x| self.position(phi(x))).collect();
        CurveSamples::new(s, points)
    }
}

/// Uniform grid `t₀ + i h` with `count` nodes covering `[t0, t1]` as closely
/// as `h` allows.
pub fn uniform_grid(t0: f64, t1: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !(t1 > t0) {
        return Err(Error::invalid("grid needs t1 > t0 and h > 0"));
    }
    let count = ((t1 - t0) / h + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| t0 + i as f64 * h).collect())
}
