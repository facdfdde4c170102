//! Generalized Heisenberg ferromagnet on a closed spin chain.
//!
//! A chain `S: ℝ/2πℤ → Sⁿ⁻¹` evolves by
//!
//! ```text
//! n = 3:  S_t = S × S_xx
//! n ≥ 4:  S_t = S × S′ × S″ × … × S^(n−2)
//! ```
//!
//! Spatial derivatives use periodic central stencils; time stepping is RK4
//! followed by projection back to the unit sphere. Reading `x` as arclength
//! of a curve `c` with `c′ = S`, the diagnostics track `κ₁ = ‖S_x‖` and
//! `⟨c′, c‴⟩ = ⟨S, S_xx⟩`.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::multivector::{self, check_supported};
use crate::stencil::{self, Stencil};

/// Unit-norm tolerance for chain sites.
pub const UNIT_TOL: f64 = 1e-10;

/// Pre-normalization norm drift treated as blow-up.
pub const BLOW_UP_DRIFT: f64 = 0.1;

/// Default `c` in `Δt = c·Δx^pow`.
pub const DEFAULT_CFL: f64 = 0.1;

/// Spins on a uniform periodic grid of length `2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChain {
    pub dim: usize,
    pub spins: Vec<Vector>,
}

impl SpinChain {
    pub fn new(spins: Vec<Vector>) -> Result<Self> {
        let dim = spins
            .first()
            .map(Vector::dim)
            .ok_or_else(|| Error::invalid("empty spin chain"))?;
        check_supported(dim)?;
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        for (j, s) in spins.iter().enumerate() {
            s.check_dim(dim)?;
            if !((s.norm() - 1.0).abs() <= UNIT_TOL) {
                return Err(Error::invalid(format!("spin {j} is not a unit vector")));
            }
        }
        Ok(SpinChain { dim, spins })
    }

    /// `S ≡ e₁`
    pub fn constant(dim: usize, sites: usize) -> Result<Self> {
        Self::new(vec![Vector::basis(dim, 0); sites])
    }

    /// `S(x) = cos(kx) e₁ + sin(kx) e₂`
    pub fn great_circle(dim: usize, sites: usize, wave: f64) -> Result<Self> {
        let dx = TAU / sites as f64;
        Self::new(
            (0..sites)
                .map(|j| {
                    let x = j as f64 * dx;
                    let mut s = Vector::zeros(dim);
                    s[0] = (wave * x).cos();
                    s[1] = (wave * x).sin();
                    s
                })
                .collect(),
        )
    }

    /// Normalized `e₁ + Σ_{m≤modes} (A_m cos mx + B_m sin mx)` with Gaussian
    /// coefficient vectors decaying like `1/m²`, rescaled so the perturbation
    /// never exceeds `0.8` in norm.
    pub fn random_smooth<R: Rng + ?Sized>(dim: usize, sites: usize, modes: usize, rng: &mut R) -> Result<Self> {
        let mut coeffs: Vec<(Vector, Vector)> = (1..=modes)
            .map(|m| {
                let w = 1.0 / (m * m) as f64;
                let mut g = || Vector::new((0..dim).map(|_| w * rng.sample::<f64, _>(StandardNormal)).collect());
                (g(), g())
            })
            .collect();
        let bound: f64 = coeffs.iter().map(|(a, b)| a.norm() + b.norm()).sum();
        if bound > 0.8 {
            let s = 0.8 / bound;
            for (a, b) in &mut coeffs {
                *a = a.scaled(s);
                *b = b.scaled(s);
            }
        }
        let dx = TAU / sites as f64;
        Self::new(
            (0..sites)
                .map(|j| {
                    let x = j as f64 * dx;
                    let mut s = Vector::basis(dim, 0);
                    for (m, (a, b)) in coeffs.iter().enumerate() {
                        let k = (m + 1) as f64;
                        s.axpy((k * x).cos(), a);
                        s.axpy((k * x).sin(), b);
                    }
                    let norm = s.norm();
                    s.scaled(1.0 / norm)
                })
                .collect(),
        )
    }

    pub fn sites(&self) -> usize {
        self.spins.len()
    }

    pub fn dx(&self) -> f64 {
        TAU / self.sites() as f64
    }

    /// Largest `|‖S_j‖ − 1|`.
    pub fn norm_defect(&self) -> f64 {
        self.spins.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Spatial derivative orders entering the flow.
fn flow_orders(dim: usize) -> Vec<usize> {
    if dim == 3 {
        vec![2]
    } else {
        (1..=dim - 2).collect()
    }
}

/// Suggested time step `c·Δx^pow` with `pow = 2` for `n = 3` and `n − 2`
/// otherwise.
pub fn suggested_dt(dim: usize, dx: f64, cfl: f64) -> f64 {
    let pow = if dim == 3 { 2 } else { dim - 2 };
    cfl * dx.powi(pow as i32)
}

/// Periodic derivative operators for one chain size.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub dim: usize,
    pub sites: usize,
    pub accuracy: usize,
    stencils: Vec<Stencil>,
    /// Stencil weights divided by `Δx^d`.
    scaled: Vec<Vec<f64>>,
    orders: Vec<usize>,
}

impl Discretization {
    pub fn new(dim: usize, sites: usize, accuracy: usize) -> Result<Self> {
        stencil::check_order(accuracy)?;
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        check_supported(dim)?;
        let orders = flow_orders(dim);
        let max_d = orders.iter().copied().max().unwrap_or(2).max(2);
        let stencils: Vec<Stencil> = (1..=max_d).map(|d| Stencil::central(d, accuracy)).collect();
        let width = stencils.iter().map(|s| s.offsets.len()).max().unwrap_or(1);
        if sites < width {
            return Err(Error::InsufficientPoints {
                needed: width,
                found: sites,
            });
        }
        let dx = TAU / sites as f64;
        let scaled = stencils
            .iter()
            .map(|s| {
                let f = dx.powi(s.derivative as i32);
                s.weights.iter().map(|w| w / f).collect()
            })
            .collect();
        Ok(Discretization {
            dim,
            sites,
            accuracy,
            stencils,
            scaled,
            orders,
        })
    }

    fn check(&self, spins: &[Vector]) -> Result<()> {
        if spins.len() != self.sites {
            return Err(Error::invalid("chain size does not match the discretization"));
        }
        spins.iter().try_for_each(|s| s.check_dim(self.dim))
    }

    /// `d^k S/dx^k` at site `j` of a site-major flat chain.
    fn derivative_into(&self, flat: &[f64], k: usize, j: usize, out: &mut [f64]) {
        let n = self.dim;
        let m = self.sites as isize;
        out.fill(0.0);
        for (&o, &w) in self.stencils[k - 1].offsets.iter().zip(&self.scaled[k - 1]) {
            let mut idx = j as isize + o;
            if idx < 0 {
                idx += m;
            } else if idx >= m {
                idx -= m;
            }
            let site = &flat[idx as usize * n..(idx as usize + 1) * n];
            for (acc, x) in out.iter_mut().zip(site) {
                *acc += w * x;
            }
        }
    }

    /// All sites' `k`-th derivatives.
    pub fn derivatives(&self, spins: &[Vector], k: usize) -> Result<Vec<Vector>> {
        self.check(spins)?;
        if k == 0 || k > self.stencils.len() {
            return Err(Error::invalid(format!("derivative order {k} is not available")));
        }
        let flat = flatten(spins);
        let mut buf = vec![0.0; self.dim];
        Ok((0..self.sites)
            .map(|j| {
                self.derivative_into(&flat, k, j, &mut buf);
                Vector::new(buf.clone())
            })
            .collect())
    }

    /// Right-hand side of the flow at every site.
    pub fn rhs(&self, spins: &[Vector]) -> Result<Vec<Vector>> {
        self.check(spins)?;
        let flat = flatten(spins);
        let mut out = vec![0.0; flat.len()];
        self.rhs_into(&flat, &mut out, &mut multivector::CrossProduct::new(self.dim)?);
        Ok(out.chunks(self.dim).map(|c| Vector::new(c.to_vec())).collect())
    }

    fn rhs_into(&self, flat: &[f64], out: &mut [f64], cross: &mut multivector::CrossProduct) {
        let n = self.dim;
        let mut derivs = vec![0.0; n * self.orders.len()];
        for j in 0..self.sites {
            for (slot, &k) in derivs.chunks_mut(n).zip(&self.orders) {
                self.derivative_into(flat, k, j, slot);
            }
            let mut factors: [&[f64]; multivector::MAX_DIM] = [&[]; multivector::MAX_DIM];
            factors[0] = &flat[j * n..(j + 1) * n];
            for (f, d) in factors[1..].iter_mut().zip(derivs.chunks(n)) {
                *f = d;
            }
            cross.compute(&factors[..n - 1], &mut out[j * n..(j + 1) * n]);
        }
    }
}

fn flatten(spins: &[Vector]) -> Vec<f64> {
    spins.iter().flat_map(|s| s.as_slice().iter().copied()).collect()
}

/// `S_t` for a chain with fourth-order stencils.
pub fn rhs(chain: &SpinChain) -> Result<Vec<Vector>> {
    Discretization::new(chain.dim, chain.sites(), 4)?.rhs(&chain.spins)
}

/// One RK4 step and renormalization. Returns the new chain and the largest
/// norm drift before renormalizing.
pub fn step_with(disc: &Discretization, chain: &SpinChain, dt: f64) -> Result<(SpinChain, f64)> {
    disc.check(&chain.spins)?;
    let n = disc.dim;
    let s0 = flatten(&chain.spins);
    let mut cross = multivector::CrossProduct::new(n)?;
    let mut k = vec![0.0; s0.len()];
    let mut stage = vec![0.0; s0.len()];
    let mut acc = s0.clone();
    let weights = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
    let advance = [0.5, 0.5, 1.0];
    for (s, w) in weights.into_iter().enumerate() {
        disc.rhs_into(if s == 0 { &s0 } else { &stage }, &mut k, &mut cross);
        for i in 0..s0.len() {
            acc[i] += dt * w * k[i];
            if s < 3 {
                stage[i] = s0[i] + dt * advance[s] * k[i];
            }
        }
    }
    let mut drift = 0.0_f64;
    let mut spins = Vec::with_capacity(disc.sites);
    for (j, site) in acc.chunks(n).enumerate() {
        let norm = site.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d = (norm - 1.0).abs();
        if !(d <= BLOW_UP_DRIFT) {
            return Err(Error::BlowUp(format!(
                "norm drift {d:e} at site {j} (Δt = {dt:e}); reduce the time step"
            )));
        }
        drift = drift.max(d);
        spins.push(Vector::new(site.iter().map(|x| x / norm).collect()));
    }
    Ok((
        SpinChain {
            dim: chain.dim,
            spins,
        },
        drift,
    ))
}

pub fn step(chain: &SpinChain, dt: f64) -> Result<SpinChain> {
    let disc = Discretization::new(chain.dim, chain.sites(), 4)?;
    Ok(step_with(&disc, chain, dt)?.0)
}

/// Chain state at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub spins: Vec<Vector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub dt: f64,
    pub accuracy: usize,
    pub snapshots: Vec<Snapshot>,
    /// Largest per-step norm drift before renormalization.
    pub max_step_drift: f64,
}

impl Trajectory {
    /// One JSON object per snapshot and line.
    pub fn write_json_lines<W: Write>(&self, mut writer: W) -> Result<()> {
        for s in &self.snapshots {
            crate::io::write_json(&mut writer, s)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds its initial state")
    }
}

/// Integrates to time `t_end` with steps no larger than `dt`, recording
/// `outputs` evenly spaced snapshots after the initial one.
pub fn simulate(
    chain: &SpinChain,
    t_end: f64,
    dt: f64,
    outputs: usize,
    accuracy: usize,
) -> Result<Trajectory> {
    if !(t_end >= 0.0) || !(dt > 0.0) {
        return Err(Error::invalid("need T ≥ 0 and Δt > 0"));
    }
    let disc = Discretization::new(chain.dim, chain.sites(), accuracy)?;
    let outputs = outputs.max(1);
    let steps = ((t_end / dt).ceil() as usize).div_ceil(outputs) * outputs;
    let dt = if steps == 0 { dt } else { t_end / steps as f64 };
    let per_output = (steps / outputs).max(1);
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        spins: chain.spins.clone(),
    }];
    let mut current = chain.clone();
    let mut max_step_drift = 0.0_f64;
    for i in 1..=steps {
        let (next, drift) = step_with(&disc, &current, dt)?;
        max_step_drift = max_step_drift.max(drift);
        current = next;
        if i % per_output == 0 {
            snapshots.push(Snapshot {
                t: i as f64 * dt,
                spins: current.spins.clone(),
            });
        }
    }
    Ok(Trajectory {
        dim: chain.dim,
        dt,
        accuracy,
        snapshots,
        max_step_drift,
    })
}

/// Drift of the conserved quantities relative to the initial snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub times: Vec<f64>,
    /// `max_x |κ₁(x,t) − κ₁(x,0)|` per output time.
    pub kappa_drift: Vec<f64>,
    /// `max_x |⟨S,S_xx⟩(x,t) − ⟨S,S_xx⟩(x,0)|` per output time.
    pub second_moment_drift: Vec<f64>,
    /// `max_x |⟨S,S_xx⟩ + ‖S_x‖²|` per output time.
    pub identity_residual: Vec<f64>,
    /// Largest `|⟨S_t, S⟩|` over all snapshots.
    pub tangency: f64,
    pub max_kappa_drift: f64,
    pub max_second_moment_drift: f64,
    /// `max_x κ₁(x, 0)`, the scale for relative drift.
    pub kappa_scale: f64,
}

pub fn conserved_report(traj: &Trajectory) -> Result<ConservedReport> {
    let first = &traj.snapshots[0];
    let disc = Discretization::new(traj.dim, first.spins.len(), traj.accuracy)?;
    let diagnostics = |spins: &[Vector]| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let d1 = disc.derivatives(spins, 1)?;
        let d2 = disc.derivatives(spins, 2)?;
        let kappa: Vec<f64> = d1.iter().map(Vector::norm).collect();
        let q: Vec<f64> = spins.iter().zip(&d2).map(|(s, s2)| s.dot(s2)).collect();
        let tangency = disc
            .rhs(spins)?
            .iter()
            .zip(spins)
            .map(|(r, s)| r.dot(s).abs())
            .fold(0.0, f64::max);
        Ok((kappa, q, tangency))
    };
    let (k0, q0, mut tangency) = diagnostics(&first.spins)?;
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut report = ConservedReport {
        times: Vec::new(),
        kappa_drift: Vec::new(),
        second_moment_drift: Vec::new(),
        identity_residual: Vec::new(),
        tangency: 0.0,
        max_kappa_drift: 0.0,
        max_second_moment_drift: 0.0,
        kappa_scale: k0.iter().copied().fold(0.0, f64::max),
    };
    for snap in &traj.snapshots {
        let (k, q, tan) = diagnostics(&snap.spins)?;
        tangency = tangency.max(tan);
        report.times.push(snap.t);
        report.kappa_drift.push(max_diff(&k, &k0));
        report.second_moment_drift.push(max_diff(&q, &q0));
        report.identity_residual.push(
            k.iter()
                .zip(&q)
                .map(|(kk, qq)| (qq + kk * kk).abs())
                .fold(0.0, f64::max),
        );
    }
    report.tangency = tangency;
    report.max_kappa_drift = report.kappa_drift.iter().copied().fold(0.0, f64::max);
    report.max_second_moment_drift = report.second_moment_drift.iter().copied().fold(0.0, f64::max);
    Ok(report)
}

/// Cumulative trapezoidal integral `c(x_j)` of `c′ = S` with `c(x₀) = 0`.
pub fn curve_from_chain(chain: &SpinChain) -> Vec<Vector> {
    let dx = chain.dx();
    let mut c = vec![Vector::zeros(chain.dim)];
    for w in chain.spins.windows(2) {
        let mut next = c.last().expect("non-empty").clone();
        next.axpy(0.5 * dx, &w[0]);
        next.axpy(0.5 * dx, &w[1]);
        c.push(next);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_chain_is_fixed() {
        for n in [3, 4, 5] {
            let chain = SpinChain::constant(n, 32).unwrap();
            assert!(rhs(&chain).unwrap().iter().all(|v| v.norm() == 0.0));
            let traj = simulate(&chain, 0.1, 1e-3, 2, 4).unwrap();
            assert_eq!(traj.last().spins, chain.spins);
            let rep = conserved_report(&traj).unwrap();
            assert_eq!(rep.max_kappa_drift, 0.0);
            assert_eq!(rep.max_second_moment_drift, 0.0);
        }
    }

    #[test]
    fn great_circle_tangency() {
        let chain = SpinChain::great_circle(3, 64, 2.0).unwrap();
        for (r, s) in rhs(&chain).unwrap().iter().zip(&chain.spins) {
            assert!(r.dot(s).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_chain_tangency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 4, 5, 6] {
            let chain = SpinChain::random_smooth(n, 64, 3, &mut rng).unwrap();
            for (r, s) in rhs(&chain).unwrap().iter().zip(&chain.spins) {
                assert!(r.dot(s).abs() <= 1e-12 * r.norm().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_small_grids_and_dims() {
        assert!(SpinChain::constant(2, 10).is_err());
        let chain = SpinChain::constant(5, 4).unwrap();
        assert!(rhs(&chain).is_err());
        let bad = vec![Vector::from([1.0, 0.0, 0.1])];
        assert!(SpinChain::new(bad).is_err());
    }

    #[test]
    fn step_drift_is_high_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let chain = SpinChain::random_smooth(4, 64, 2, &mut rng).unwrap();
        let disc = Discretization::new(4, 64, 4).unwrap();
        let (_, d1) = step_with(&disc, &chain, 0.04).unwrap();
        let (_, d2) = step_with(&disc, &chain, 0.02).unwrap();
        assert!(d1 / d2 >= 8.0, "{d1:e} {d2:e}");
    }

    #[test]
    fn trapezoid_curve_has_spin_tangent() {
        let chain = SpinChain::great_circle(3, 400, 1.0).unwrap();
        let c = curve_from_chain(&chain);
        // c(x) = (sin x, 1 − cos x, 0)
        let j = 100;
        let x = j as f64 * chain.dx();
        assert!(c[j].distance(&Vector::from([x.sin(), 1.0 - x.cos(), 0.0])) < 1e-4);
    }
}
