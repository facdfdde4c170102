//! Curves from the norms of their derivatives.
//!
//! For a strongly regular curve the functions `f_k = ‖c^(k)‖`, `k = 1..n`,
//! together with `sgn det(c′..c^(n))` determine the curve up to an
//! orientation preserving isometry. The inner products follow from
//!
//! ```text
//! f_{k,k}   = f_k²
//! f_{k,k+1} = f_{k,k}′ / 2
//! f_{k,l}   = f_{k,l−1}′ − f_{k+1,l−1}      l > k + 1
//! ```
//!
//! and the volumes are square roots of leading Gram minors. Each level of the
//! recursion differentiates sampled data again, so errors grow quickly with
//! `n`; inputs should be finely sampled.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureProfile;
use crate::error::{Error, Result};
use crate::frenet::{self, FrenetState};
use crate::gram::{self, DEFAULT_REGULARITY_EPS};
use crate::jets::{self, CurveJet, CurveSamples, UNIFORM_GRID_RTOL};
use crate::linalg::Matrix;
use crate::multivector::check_supported;
use crate::stencil;

/// Default pointwise relative tolerance for congruence decisions.
pub const DEFAULT_CONGRUENCE_RTOL: f64 = 1e-3;

/// `f_k(t_i) = ‖c^(k)(t_i)‖` plus the constant sign of `det(c′..c^(n))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub dim: usize,
    pub t: Vec<f64>,
    /// `norms[k − 1][i] = f_k(t_i)`
    pub norms: Vec<Vec<f64>>,
    pub sgn: i8,
}

impl NormProfile {
    pub fn new(dim: usize, t: Vec<f64>, norms: Vec<Vec<f64>>, sgn: i8) -> Result<Self> {
        let p = NormProfile { dim, t, norms, sgn };
        p.validate()?;
        Ok(p)
    }

    /// Norms of strongly regular jets; the sign must not change.
    pub fn from_jets(jets: &[CurveJet]) -> Result<Self> {
        let first = jets
            .first()
            .ok_or_else(|| Error::invalid("no jets to evaluate"))?;
        let n = first.dim();
        let mut norms = vec![Vec::with_capacity(jets.len()); n];
        let mut sgn = 0;
        for jet in jets {
            jet.require_order(n)?;
            let s = gram::sign_of(jet.leading(n))?;
            if s == 0 {
                return Err(Error::CollapsedVolume {
                    k: n,
                    normalized: gram::normalized_volume(jet.leading(n)),
                });
            }
            if sgn != 0 && s != sgn {
                return Err(Error::invalid(format!(
                    "sgn changes at t = {}; the curve is not strongly regular",
                    jet.t
                )));
            }
            sgn = s;
            for (series, d) in norms.iter_mut().zip(&jet.derivs) {
                series.push(d.norm());
            }
        }
        Self::new(n, jets.iter().map(|j| j.t).collect(), norms, sgn)
    }

    /// Differentiates the samples and takes norms at every grid point.
    pub fn from_samples(samples: &CurveSamples, accuracy: usize) -> Result<Self> {
        Self::from_jets(&jets::differentiate(samples, samples.dim(), accuracy)?)
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
        if self.norms.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.norms.len(),
            });
        }
        if self.norms.iter().any(|s| s.len() != len) {
            return Err(Error::invalid("norm series lengths differ from the grid"));
        }
        if self.norms.iter().flatten().any(|&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::invalid("derivative norms must be positive and finite"));
        }
        if self.sgn != 1 && self.sgn != -1 {
            return Err(Error::invalid(format!("sgn must be ±1, got {}", self.sgn)));
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

    /// Nodes `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(
            self.dim,
            self.t[start..end].to_vec(),
            self.norms.iter().map(|s| s[start..end].to_vec()).collect(),
            self.sgn,
        )
    }

    /// The same norms with the opposite sign.
    pub fn mirrored(&self) -> Self {
        NormProfile {
            sgn: -self.sgn,
            ..self.clone()
        }
    }

    /// Largest pointwise `|a − b| / max(|a|, |b|)` over all norm functions.
    pub fn max_relative_difference(&self, other: &NormProfile) -> Result<f64> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::invalid("norm profiles have different shapes"));
        }
        Ok(self
            .norms
            .iter()
            .flatten()
            .zip(other.norms.iter().flatten())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max))
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let p: NormProfile = serde_json::from_reader(reader)?;
        p.validate()?;
        Ok(p)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        crate::io::write_json(writer, self)
    }
}

/// `f_{k,l}(t_i) = ⟨c^(k), c^(l)⟩(t_i)` for `1 ≤ k, l ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramProfile {
    pub dim: usize,
    pub t: Vec<f64>,
    /// `entries[k − 1][l − 1][i]`, symmetric in `k, l`.
    entries: Vec<Vec<Vec<f64>>>,
}

impl GramProfile {
    /// `f_{k,l}` as a series, one-based indices.
    pub fn series(&self, k: usize, l: usize) -> &[f64] {
        &self.entries[k - 1][l - 1]
    }

    /// The `n × n` Gram matrix at node `i`.
    pub fn matrix_at(&self, i: usize) -> Matrix {
        let n = self.dim;
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                m[(k, l)] = self.entries[k][l][i];
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Runs the inner-product recursion with stencils of the given accuracy.
pub fn gram_from_norms(p: &NormProfile, accuracy: usize) -> Result<GramProfile> {
    let n = p.dim;
    let h = p.spacing();
    let mut entries = vec![vec![Vec::new(); n]; n];
    for k in 0..n {
        entries[k][k] = p.norms[k].iter().map(|f| f * f).collect();
    }
    for offset in 1..n {
        for k in 0..n - offset {
            let l = k + offset;
            let mut d = stencil::differentiate_series(&entries[k][l - 1], h, 1, accuracy)?;
            if offset == 1 {
                d.iter_mut().for_each(|x| *x *= 0.5);
            } else {
                // k + 1 ≤ l − 1 < n always holds here.
                for (x, y) in d.iter_mut().zip(&entries[k + 1][l - 1]) {
                    *x -= y;
                }
            }
            entries[l][k] = d.clone();
            entries[k][l] = d;
        }
    }
    Ok(GramProfile {
        dim: n,
        t: p.t.clone(),
        entries,
    })
}

/// Volumes from Cholesky pivots of the Gram matrices, then curvatures with
/// `det(c′..c^(n)) = sgn · vol(c′..c^(n))`.
pub fn curvatures_from_norms(p: &NormProfile, accuracy: usize) -> Result<CurvatureProfile> {
    let g = gram_from_norms(p, accuracy)?;
    curvatures_from_gram(&g, p.sgn)
}

pub fn curvatures_from_gram(g: &GramProfile, sgn: i8) -> Result<CurvatureProfile> {
    let n = g.dim;
    let mut speed = Vec::with_capacity(g.len());
    let mut kappa = vec![Vec::with_capacity(g.len()); n - 1];
    for i in 0..g.len() {
        // pivots[k] = vol_{k+1} / vol_k
        let pivots = cholesky_pivots(&g.matrix_at(i), g.t[i])?;
        let s = pivots[0];
        speed.push(s);
        for r in 1..n {
            let mut value = pivots[r] / (pivots[r - 1] * s);
            if r == n - 1 {
                value *= f64::from(sgn);
            }
            kappa[r - 1].push(value);
        }
    }
    CurvatureProfile::new(n, g.t.clone(), speed, kappa)
}

/// Square roots of the Cholesky pivots; fails with the first leading block
/// whose normalized volume falls below the regularity threshold.
fn cholesky_pivots(g: &Matrix, t: f64) -> Result<Vec<f64>> {
    let n = g.rows();
    let mut l = Matrix::zeros(n, n);
    let mut pivots = Vec::with_capacity(n);
    let mut normalized = 1.0;
    for j in 0..n {
        let mut d = g[(j, j)];
        for m in 0..j {
            d -= l[(j, m)] * l[(j, m)];
        }
        let diag = g[(j, j)];
        normalized *= if diag > 0.0 && d > 0.0 {
            (d / diag).sqrt()
        } else {
            0.0
        };
        if !(normalized > DEFAULT_REGULARITY_EPS) {
            return Err(Error::NotPositiveDefinite { t, k: j + 1 });
        }
        let r = d.sqrt();
        l[(j, j)] = r;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for m in 0..j {
                s -= l[(i, m)] * l[(j, m)];
            }
            l[(i, j)] = s / r;
        }
        pivots.push(r);
    }
    Ok(pivots)
}

/// Recovers curvatures from the norms and integrates them from `init`.
pub fn reconstruct_from_norms(
    p: &NormProfile,
    init: &FrenetState,
    accuracy: usize,
) -> Result<CurveSamples> {
    frenet::integrate(&curvatures_from_norms(p, accuracy)?, init)
}

/// Congruence class of two curves judged from their norm profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Congruence {
    /// Related by an orientation preserving isometry.
    Congruent,
    /// Same norms, opposite sign: related by an orientation reversing one.
    Mirrored,
    NotCongruent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongruenceVerdict {
    pub verdict: Congruence,
    pub max_relative_difference: f64,
    pub tolerance: f64,
    pub sgn: (i8, i8),
}

pub fn congruence(a: &NormProfile, b: &NormProfile, rtol: f64) -> Result<CongruenceVerdict> {
    let diff = a.max_relative_difference(b)?;
    let verdict = if !(diff <= rtol) {
        Congruence::NotCongruent
    } else if a.sgn == b.sgn {
        Congruence::Congruent
    } else {
        Congruence::Mirrored
    };
    Ok(CongruenceVerdict {
        verdict,
        max_relative_difference: diff,
        tolerance: rtol,
        sgn: (a.sgn, b.sgn),
    })
}
