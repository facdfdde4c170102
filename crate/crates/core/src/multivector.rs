//! Exterior algebra ⋀ℝⁿ with its induced scalar product.
//!
//! Basis blades `e_I` are indexed by subset masks: bit `i` of the mask stands
//! for the factor `e_{i+1}`, and factors are always kept in increasing order.
//! All blade signs are computed from transposition counts, so they are exact
//! integers.
//!
//! Besides the wedge product this module provides interior multiplication
//! (the adjoint of left wedge multiplication), the duality operator
//! `D(z) = I_z o` where `o = e₁∧…∧eₙ`, the `k`-fold cross product
//! `v₁×…×v_k = D(v₁∧…∧v_k)`, and the determinant as the `o`-coefficient of an
//! `n`-fold wedge.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Smallest supported ambient dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported ambient dimension (2¹⁶ coefficients).
pub const MAX_DIM: usize = 16;

pub(crate) fn check_supported(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Sign `±1` of `e_a ∧ e_b = ±e_{a∪b}` for disjoint masks: the parity of the
/// shuffle that merges the two ordered index lists.
#[inline]
pub fn merge_sign(a: u32, b: u32) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Element of ⋀ℝⁿ with one coefficient per basis blade.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    /// The zero element.
    ///
    /// # Panics
    /// If `dim` is outside `MIN_DIM..=MAX_DIM`.
    pub fn zero(dim: usize) -> Self {
        assert!(
            (MIN_DIM..=MAX_DIM).contains(&dim),
            "multivector dimension {dim} out of range"
        );
        Multivector {
            dim,
            coeffs: vec![0.0; 1 << dim],
        }
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_supported(dim)?;
        if coeffs.len() != 1 << dim {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                1usize << dim,
                coeffs.len()
            )));
        }
        Ok(Multivector { dim, coeffs })
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut z = Self::zero(dim);
        z.coeffs[0] = value;
        z
    }

    /// The basis blade `e_I` for subset mask `mask`.
    pub fn blade(dim: usize, mask: u32) -> Self {
        let mut z = Self::zero(dim);
        z.coeffs[mask as usize] = 1.0;
        z
    }

    /// The orientation element `o = e₁∧…∧eₙ`.
    pub fn orientation(dim: usize) -> Self {
        Self::blade(dim, full_mask(dim))
    }

    pub fn from_vector(v: &Vector) -> Result<Self> {
        check_supported(v.dim())?;
        let mut z = Self::zero(v.dim());
        for (i, &x) in v.iter().enumerate() {
            z.coeffs[1 << i] = x;
        }
        Ok(z)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs[mask as usize]
    }

    /// Iterator over `(mask, coefficient)` pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, &c)| (m as u32, c))
    }

    /// The common grade of all nonzero terms, or `None` for zero or mixed
    /// elements.
    pub fn grade(&self) -> Option<usize> {
        let mut grade = None;
        for (mask, _) in self.terms() {
            let g = mask.count_ones() as usize;
            match grade {
                None => grade = Some(g),
                Some(h) if h != g => return None,
                _ => {}
            }
        }
        grade
    }

    /// Projection onto `∧ᵏV`.
    pub fn grade_part(&self, k: usize) -> Multivector {
        let mut out = Self::zero(self.dim);
        for (mask, c) in self.terms() {
            if mask.count_ones() as usize == k {
                out.coeffs[mask as usize] = c;
            }
        }
        out
    }

    /// The degree-one part as a vector.
    pub fn vector_part(&self) -> Vector {
        Vector::new((0..self.dim).map(|i| self.coeffs[1 << i]).collect())
    }

    /// Converts a pure degree-one element into a [`Vector`].
    pub fn to_vector(&self) -> Result<Vector> {
        if self.terms().all(|(m, _)| m.count_ones() == 1) {
            Ok(self.vector_part())
        } else {
            Err(Error::invalid("multivector is not of degree one"))
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn check_same_dim(&self, other: &Multivector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn full_mask(dim: usize) -> u32 {
    ((1u64 << dim) - 1) as u32
}

impl Add<&Multivector> for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim);
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Multivector> for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim);
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self * -1.0
    }
}

/// Exterior product `z ∧ w`.
pub fn wedge(z: &Multivector, w: &Multivector) -> Result<Multivector> {
    z.check_same_dim(w)?;
    let mut out = Multivector::zero(z.dim);
    let rhs: Vec<(u32, f64)> = w.terms().collect();
    for (a, za) in z.terms() {
        for &(b, wb) in &rhs {
            if a & b == 0 {
                out.coeffs[(a | b) as usize] += merge_sign(a, b) * za * wb;
            }
        }
    }
    Ok(out)
}

/// `z ∧ v` for a vector `v`, without building the multivector of `v`.
fn wedge_with_vector(z: &Multivector, v: &Vector, out: &mut Multivector) {
    out.coeffs.iter_mut().for_each(|c| *c = 0.0);
    for (a, za) in z.terms() {
        for (i, &x) in v.iter().enumerate() {
            let b = 1u32 << i;
            if a & b == 0 && x != 0.0 {
                // e_a ∧ e_i: e_i moves past every factor of a with a larger index.
                let s = if (a >> (i + 1)).count_ones() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out.coeffs[(a | b) as usize] += s * za * x;
            }
        }
    }
}

/// `v₁ ∧ … ∧ v_k`; the empty product is the scalar 1.
pub fn wedge_vectors(dim: usize, vs: &[Vector]) -> Result<Multivector> {
    check_supported(dim)?;
    for v in vs {
        v.check_dim(dim)?;
    }
    let mut acc = Multivector::scalar(dim, 1.0);
    let mut scratch = Multivector::zero(dim);
    for v in vs {
        wedge_with_vector(&acc, v, &mut scratch);
        std::mem::swap(&mut acc, &mut scratch);
    }
    Ok(acc)
}

/// Induced scalar product on ⋀V.
///
/// The blades `e_I` are orthonormal, so this is the coefficient dot product;
/// see [`monomial_inner`] for the Gram-determinant form on monomials.
pub fn inner(z: &Multivector, w: &Multivector) -> Result<f64> {
    z.check_same_dim(w)?;
    Ok(z.coeffs.iter().zip(&w.coeffs).map(|(a, b)| a * b).sum())
}

/// `⟨u₁∧…∧u_k, v₁∧…∧v_k⟩ = det[⟨u_i, v_j⟩]`.
pub fn monomial_inner(us: &[Vector], vs: &[Vector]) -> Result<f64> {
    if us.len() != vs.len() {
        return Ok(0.0);
    }
    let k = us.len();
    if k == 0 {
        return Ok(1.0);
    }
    let dim = us[0].dim();
    for v in us.iter().chain(vs) {
        v.check_dim(dim)?;
    }
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = us[i].dot(&vs[j]);
        }
    }
    Ok(g.determinant())
}

/// Interior multiplication `I_z t`, the adjoint of `w ↦ z ∧ w`.
///
/// On blades, `I_{e_I} e_J = ε e_{J∖I}` when `I ⊆ J` (and zero otherwise),
/// where `e_J = ε e_I ∧ e_{J∖I}`. This agrees with `I_{z∧w} = I_w ∘ I_z`.
pub fn interior(z: &Multivector, t: &Multivector) -> Result<Multivector> {
    z.check_same_dim(t)?;
    let mut out = Multivector::zero(z.dim);
    let targets: Vec<(u32, f64)> = t.terms().collect();
    for (a, za) in z.terms() {
        for &(j, tj) in &targets {
            if a & j == a {
                let rest = j & !a;
                out.coeffs[rest as usize] += merge_sign(a, rest) * za * tj;
            }
        }
    }
    Ok(out)
}

/// Left wedge multiplication operator `E_z`.
pub fn exterior(z: &Multivector, t: &Multivector) -> Result<Multivector> {
    wedge(z, t)
}

/// Duality operator `D(z) = I_z o`, mapping `∧ᵏV` onto `∧ⁿ⁻ᵏV`.
pub fn poincare_dual(z: &Multivector) -> Multivector {
    let full = full_mask(z.dim);
    let mut out = Multivector::zero(z.dim);
    for (a, za) in z.terms() {
        let rest = full & !a;
        out.coeffs[rest as usize] += merge_sign(a, rest) * za;
    }
    out
}

/// `k`-fold cross product `v₁×…×v_k = D(v₁∧…∧v_k)` with `1 ≤ k ≤ n`.
pub fn cross(vs: &[Vector]) -> Result<Multivector> {
    let dim = vs
        .first()
        .map(Vector::dim)
        .ok_or_else(|| Error::invalid("cross product needs at least one factor"))?;
    check_supported(dim)?;
    if vs.len() > dim {
        return Err(Error::invalid(format!(
            "cross product takes 1..={dim} factors in dimension {dim}, got {}",
            vs.len()
        )));
    }
    Ok(poincare_dual(&wedge_vectors(dim, vs)?))
}

/// The `(n−1)`-fold cross product as a vector.
pub fn cross_vector(vs: &[Vector]) -> Result<Vector> {
    let dim = vs.len() + 1;
    check_supported(dim)?;
    let w = wedge_vectors(dim, vs)?;
    let full = full_mask(dim);
    // D(e_{full∖i}) = (−1)^{n−1−i} e_i
    Ok(Vector::new(
        (0..dim)
            .map(|i| {
                let c = w.coeffs[(full & !(1 << i)) as usize];
                if (dim - 1 - i).is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .collect(),
    ))
}

/// Reusable buffers for many `(n−1)`-fold cross products in one dimension.
///
/// Same result as [`cross_vector`], without allocating per call: the wedge is
/// accumulated one grade at a time over precomputed blade masks.
#[derive(Clone, Debug)]
pub struct CrossProduct {
    dim: usize,
    masks_by_grade: Vec<Vec<u32>>,
    acc: Vec<f64>,
    next: Vec<f64>,
}

impl CrossProduct {
    pub fn new(dim: usize) -> Result<Self> {
        check_supported(dim)?;
        let mut masks_by_grade = vec![Vec::new(); dim + 1];
        for mask in 0..=full_mask(dim) {
            masks_by_grade[mask.count_ones() as usize].push(mask);
        }
        Ok(CrossProduct {
            dim,
            masks_by_grade,
            acc: vec![0.0; 1 << dim],
            next: vec![0.0; 1 << dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `v₁×…×v_{n−1}` into `out`; `factors` must hold `n − 1` slices
    /// of length `n`.
    pub fn compute(&mut self, factors: &[&[f64]], out: &mut [f64]) {
        let n = self.dim;
        assert_eq!(factors.len(), n - 1, "cross product needs n − 1 factors");
        self.acc[0] = 1.0;
        for (k, v) in factors.iter().enumerate() {
            for &m in &self.masks_by_grade[k + 1] {
                self.next[m as usize] = 0.0;
            }
            for &a in &self.masks_by_grade[k] {
                let za = self.acc[a as usize];
                if za == 0.0 {
                    continue;
                }
                for (i, &x) in v.iter().enumerate() {
                    let b = 1u32 << i;
                    if a & b == 0 {
                        let term = za * x;
                        if (a >> (i + 1)).count_ones() & 1 == 0 {
                            self.next[(a | b) as usize] += term;
                        } else {
                            self.next[(a | b) as usize] -= term;
                        }
                    }
                }
            }
            std::mem::swap(&mut self.acc, &mut self.next);
        }
        let full = full_mask(n);
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let c = self.acc[(full & !(1 << i)) as usize];
            *o = if (n - 1 - i).is_multiple_of(2) { c } else { -c };
        }
    }
}

/// `det(v₁,…,vₙ)`, the coefficient of `o` in `v₁∧…∧vₙ`.
pub fn determinant(vs: &[Vector]) -> Result<f64> {
    let dim = vs
        .first()
        .map(Vector::dim)
        .ok_or_else(|| Error::invalid("determinant of an empty list"))?;
    if vs.len() != dim {
        return Err(Error::invalid(format!(
            "determinant needs exactly {dim} vectors, got {}",
            vs.len()
        )));
    }
    Ok(wedge_vectors(dim, vs)?.coeff(full_mask(dim)))
}
