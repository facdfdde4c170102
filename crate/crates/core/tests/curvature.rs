use std::f64::consts::TAU;

use frenetnd::curvature;
use frenetnd::distortion::random_orthogonal;
use frenetnd::jets::{self, AnalyticCurve, CurveJet};
use frenetnd::{Matrix, Vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn jet_strategy(dim: usize) -> impl Strategy<Value = CurveJet> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), dim)
        .prop_map(|rows| CurveJet::new(0.0, rows.into_iter().map(Vector::new).collect()).unwrap())
}

fn any_jet() -> impl Strategy<Value = CurveJet> {
    (2usize..=6).prop_flat_map(jet_strategy)
}

/// Gram determinant by cofactor expansion.
fn det(m: &[Vec<f64>]) -> f64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

fn gram_volume(vs: &[Vector]) -> f64 {
    if vs.is_empty() {
        return 1.0;
    }
    let g: Vec<Vec<f64>> = vs.iter().map(|u| vs.iter().map(|v| u.dot(v)).collect()).collect();
    det(&g).sqrt()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn double_frequency_curve_has_constant_curvatures() {
    // Brute-force Gram determinants of the exact jet as the oracle.
    let curve = AnalyticCurve::fourier(
        Vector::zeros(4),
        vec![
            jets::FourierMode {
                frequency: 1.0,
                cos: Vector::basis(4, 0),
                sin: Vector::basis(4, 1),
            },
            jets::FourierMode {
                frequency: 2.0,
                cos: Vector::basis(4, 2),
                sin: Vector::basis(4, 3),
            },
        ],
    )
    .unwrap();
    let reference = curvature::curvatures(&curve.jet(0.0, 4).unwrap()).unwrap();
    for i in 0..100 {
        let jet = curve.jet(i as f64 * TAU / 100.0, 4).unwrap();
        let c = curvature::curvatures(&jet).unwrap();
        let d = jet.leading(4);
        let speed = d[0].norm();
        for r in 1..=2 {
            let oracle = gram_volume(&d[..r - 1]) * gram_volume(&d[..r + 1]) / (gram_volume(&d[..r]).powi(2) * speed);
            assert!(rel(c.kappa[r - 1], oracle) < 1e-10);
        }
        let cols: Vec<Vec<f64>> = (0..4).map(|row| d.iter().map(|v| v[row]).collect()).collect();
        let top = gram_volume(&d[..2]) * det(&cols) / (gram_volume(&d[..3]).powi(2) * speed);
        assert!(rel(c.kappa[2], top) < 1e-10);
        for (a, b) in c.kappa.iter().zip(&reference.kappa) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn reparameterization_invariance_on_helix() {
    let helix = AnalyticCurve::helix(1.0, 1.0);
    let phi = |s: f64| s + 0.3 * s.sin();
    let h = 1e-3;
    let samples = helix.sample_reparameterized(0.0, h, 6284, phi).unwrap();
    for jet in jets::differentiate(&samples, 3, 4).unwrap() {
        let c = curvature::curvatures(&jet).unwrap();
        let exact = curvature::curvatures(&helix.jet(phi(jet.t), 3).unwrap()).unwrap();
        for (a, b) in c.kappa.iter().zip(&exact.kappa) {
            assert!((a - b).abs() < 1e-5, "t={} {a} vs {b}", jet.t);
        }
    }
}

#[test]
fn double_helix_low_order_matches_full_formula() {
    let c = AnalyticCurve::double_helix(2.0);
    for i in 0..20 {
        let jet = c.jet(0.3 * i as f64, 4).unwrap();
        let (k1, k2) = curvature::low_order(&jet).unwrap();
        let full = curvature::curvatures(&jet).unwrap();
        assert!(rel(k1, full.kappa[0]) < 1e-10);
        assert!(rel(k2.unwrap(), full.kappa[1]) < 1e-10);
    }
}

#[test]
fn helix_volume_products_at_unit_speed() {
    // (cos(s/√2), sin(s/√2), s/√2) has unit speed, so vol(c′, c″) = κ₁.
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let jet = AnalyticCurve::helix(1.0, 1.0).jet(0.4, 3).unwrap();
    let unit: Vec<Vector> = (1..=3).map(|k| jet.deriv(k).scaled(a.powi(k as i32))).collect();
    let unit_jet = CurveJet::new(0.4, unit).unwrap();
    let report = curvature::volume_products(&unit_jet).unwrap();
    assert!(report.max_residual() < 1e-10);
    assert!((frenetnd::gram::volume(unit_jet.leading(2)) - 0.5).abs() < 1e-12);
}

#[test]
fn profile_from_sampled_helix() {
    let helix = AnalyticCurve::helix(2.0, 1.0);
    let samples = helix.sample(0.0, 1e-2, 700).unwrap();
    let jets = jets::differentiate(&samples, 3, 6).unwrap();
    let (interior, boundary): (Vec<CurveJet>, Vec<CurveJet>) = jets.into_iter().partition(|j| !j.boundary);
    assert!(!boundary.is_empty());
    let worst = |jets: &[CurveJet]| {
        jets.iter()
            .flat_map(|j| {
                let c = curvature::curvatures(j).unwrap();
                [rel(c.kappa[0], 0.4), rel(c.kappa[1], 0.2), rel(c.speed, 5f64.sqrt())]
            })
            .fold(0.0, f64::max)
    };
    let (inner, edge) = (worst(&interior), worst(&boundary));
    assert!(inner < 1e-7, "{inner}");
    assert!(edge < 1e-5, "{edge}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cross_form_agrees(jet in any_jet()) {
        prop_assume!(jets::regularity(&jet).is_strongly_regular());
        let a = curvature::curvatures(&jet).unwrap();
        let b = curvature::curvatures_cross_form(&jet).unwrap();
        for (x, y) in a.kappa.iter().zip(&b) {
            prop_assert!(rel(*x, *y) < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn isometries_preserve_curvatures(jet in any_jet(), seed in any::<u64>()) {
        prop_assume!(jets::regularity(&jet).is_strongly_regular());
        let n = jet.dim();
        let mut q = random_orthogonal(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let base = curvature::curvatures(&jet).unwrap();
        let orientation = q.determinant().signum();
        let moved = curvature::curvatures(&jet.mapped(&q)).unwrap();
        prop_assert!(rel(base.speed, moved.speed) < 1e-12);
        for r in 0..n - 1 {
            let expected = if r == n - 2 { orientation * base.kappa[r] } else { base.kappa[r] };
            prop_assert!((moved.kappa[r] - expected).abs() <= 1e-10 * base.kappa[r].abs().max(1.0));
        }
        // Flip one row to get the other orientation class.
        for x in q.row_mut(0) {
            *x = -*x;
        }
        let flipped = curvature::curvatures(&jet.mapped(&q)).unwrap();
        prop_assert!((flipped.kappa[n - 2] + orientation * base.kappa[n - 2]).abs() <= 1e-10 * base.kappa[n - 2].abs().max(1.0));
    }

    #[test]
    fn scaling_is_homogeneous(jet in any_jet(), a in 0.1f64..10.0) {
        prop_assume!(jets::regularity(&jet).is_strongly_regular());
        let n = jet.dim();
        let base = curvature::curvatures(&jet).unwrap();
        let scaled = curvature::curvatures(&jet.mapped(&Matrix::identity(n).scaled(a))).unwrap();
        prop_assert!(rel(scaled.speed, a * base.speed) < 1e-12);
        for (x, y) in scaled.kappa.iter().zip(&base.kappa) {
            prop_assert!(rel(*x, y / a) < 1e-10);
        }
    }

    #[test]
    fn lower_curvatures_are_positive(jet in any_jet()) {
        prop_assume!(jets::regularity(&jet).is_regular());
        let c = curvature::curvatures(&jet).unwrap();
        let n = jet.dim();
        prop_assert!(c.speed > 0.0);
        prop_assert!(c.kappa[..n - 2].iter().all(|&k| k > 0.0));
    }
}
