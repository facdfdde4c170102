//! Finite-difference weights on uniform grids.
//!
//! Weights come from Fornberg's recursion on integer offsets, so the same
//! code produces centered, skewed and one-sided stencils of any order.

use crate::error::{Error, Result};

/// Derivative weights for unit spacing: `f^(d)(x_i) ≈ h^{-d} Σ w_j f(x_{i+o_j})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub derivative: usize,
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
}

/// Fornberg weights at `z` for nodes `xs`, derivatives `0..=max_order`.
/// Returns `c[k][j]`, the weight of node `j` for derivative `k`.
pub fn fornberg_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

pub fn check_order(accuracy: usize) -> Result<()> {
    if matches!(accuracy, 2 | 4 | 6) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "stencil order must be 2, 4 or 6, got {accuracy}"
        )))
    }
}

impl Stencil {
    /// Weights on the given integer offsets, evaluated at offset 0.
    pub fn on_offsets(derivative: usize, offsets: Vec<isize>) -> Stencil {
        let xs: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let weights = fornberg_weights(0.0, &xs, derivative).swap_remove(derivative);
        Stencil {
            derivative,
            offsets,
            weights,
        }
    }

    /// Half-width of the centered stencil with the given accuracy.
    pub fn central_half_width(derivative: usize, accuracy: usize) -> usize {
        derivative.div_ceil(2) + accuracy / 2 - 1
    }

    /// Centered stencil of accuracy `O(h^accuracy)`.
    pub fn central(derivative: usize, accuracy: usize) -> Stencil {
        let q = Self::central_half_width(derivative, accuracy) as isize;
        Self::on_offsets(derivative, (-q..=q).collect())
    }

    /// Number of consecutive nodes used away from the center: one-sided or
    /// skewed windows need `d + p` nodes for accuracy `p`.
    pub fn window_len(derivative: usize, accuracy: usize) -> usize {
        (derivative + accuracy).max(2 * Self::central_half_width(derivative, accuracy) + 1)
    }

    /// Stencil for node `index` on a grid of `len` nodes: centered when it
    /// fits, otherwise the most centered window that stays inside the grid.
    /// The flag reports whether the centered stencil was used.
    pub fn for_node(derivative: usize, accuracy: usize, index: usize, len: usize) -> (Stencil, bool) {
        let q = Self::central_half_width(derivative, accuracy);
        if index >= q && index + q < len {
            return (Self::central(derivative, accuracy), true);
        }
        let w = Self::window_len(derivative, accuracy).min(len);
        let start = index.saturating_sub(w / 2).min(len - w);
        let offsets = (start..start + w)
            .map(|j| j as isize - index as isize)
            .collect();
        (Self::on_offsets(derivative, offsets), false)
    }

    /// Apply to a scalar series at node `index` with spacing `h`.
    pub fn apply(&self, values: &[f64], index: usize, h: f64) -> f64 {
        let s: f64 = self
            .offsets
            .iter()
            .zip(&self.weights)
            .map(|(&o, &w)| w * values[(index as isize + o) as usize])
            .sum();
        s / h.powi(self.derivative as i32)
    }

    /// Apply on a periodic series.
    pub fn apply_periodic(&self, values: &[f64], index: usize, h: f64) -> f64 {
        let n = values.len() as isize;
        let s: f64 = self
            .offsets
            .iter()
            .zip(&self.weights)
            .map(|(&o, &w)| w * values[(index as isize + o).rem_euclid(n) as usize])
            .sum();
        s / h.powi(self.derivative as i32)
    }
}

/// Minimum number of nodes needed to differentiate up to `max_derivative`.
pub fn min_nodes(max_derivative: usize, accuracy: usize) -> usize {
    (1..=max_derivative)
        .map(|d| Stencil::window_len(d, accuracy))
        .max()
        .unwrap_or(1)
}

/// `d`-th derivative of a uniformly sampled scalar series, same length as
/// the input. Boundary nodes use skewed stencils of the same accuracy.
pub fn differentiate_series(values: &[f64], h: f64, derivative: usize, accuracy: usize) -> Result<Vec<f64>> {
    check_order(accuracy)?;
    let needed = min_nodes(derivative, accuracy);
    if values.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            found: values.len(),
        });
    }
    let central = Stencil::central(derivative, accuracy);
    let q = Stencil::central_half_width(derivative, accuracy);
    let len = values.len();
    Ok((0..len)
        .map(|i| {
            if i >= q && i + q < len {
                central.apply(values, i, h)
            } else {
                Stencil::for_node(derivative, accuracy, i, len).0.apply(values, i, h)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_weights(s: &Stencil, expected: &[f64]) {
        assert_eq!(s.weights.len(), expected.len());
        for (a, b) in s.weights.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13, "{:?} vs {:?}", s.weights, expected);
        }
    }

    #[test]
    fn classic_central_weights() {
        assert_weights(&Stencil::central(1, 2), &[-0.5, 0.0, 0.5]);
        assert_weights(&Stencil::central(2, 2), &[1.0, -2.0, 1.0]);
        assert_weights(
            &Stencil::central(1, 4),
            &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        );
        assert_weights(
            &Stencil::central(3, 4),
            &[1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
        );
    }

    #[test]
    fn one_sided_first_derivative() {
        let (s, centered) = Stencil::for_node(1, 2, 0, 10);
        assert!(!centered);
        assert_eq!(s.offsets, vec![0, 1, 2]);
        assert_weights(&s, &[-1.5, 2.0, -0.5]);
    }

    #[test]
    fn polynomial_exactness_everywhere() {
        // Degree ≤ p polynomials are differentiated exactly at every node.
        for p in [2, 4, 6] {
            for d in 1..=5 {
                let h = 0.25;
                let n = min_nodes(d, p) + 3;
                let ts: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * h).collect();
                let coeffs: Vec<f64> = (0..=p).map(|k| 1.0 / (k + 1) as f64).collect();
                let poly = |t: f64, der: usize| -> f64 {
                    (der..=p)
                        .map(|k| {
                            let fall: f64 = (0..der).map(|j| (k - j) as f64).product();
                            coeffs[k] * fall * t.powi((k - der) as i32)
                        })
                        .sum()
                };
                let vals: Vec<f64> = ts.iter().map(|&t| poly(t, 0)).collect();
                let got = differentiate_series(&vals, h, d, p).unwrap();
                // Rounding grows like ε·max|f|/h^d.
                let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                let tol = 1e-13 * scale / h.powi(d as i32);
                for (i, &t) in ts.iter().enumerate() {
                    assert!(
                        (got[i] - poly(t, d)).abs() < tol,
                        "p={p} d={d} i={i}: {} vs {}",
                        got[i],
                        poly(t, d)
                    );
                }
            }
        }
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(
            differentiate_series(&[1.0, 2.0, 3.0], 0.1, 2, 4),
            Err(Error::InsufficientPoints { .. })
        ));
        assert!(differentiate_series(&[1.0; 20], 0.1, 1, 3).is_err());
    }

    #[test]
    fn periodic_application() {
        let n = 64;
        let h = std::f64::consts::TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let s = Stencil::central(2, 6);
        for i in 0..n {
            let exact = -(i as f64 * h).sin();
            assert!((s.apply_periodic(&vals, i, h) - exact).abs() < 1e-7);
        }
    }
}
