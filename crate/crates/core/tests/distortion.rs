use frenetnd::distortion::{self, BoundKind, SingularSpectrum};
use frenetnd::jets::AnalyticCurve;
use frenetnd::multivector::wedge_vectors;
use frenetnd::svd::svd;
use frenetnd::{gram, Matrix, Vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vectors(n: usize, k: usize) -> impl Strategy<Value = Vec<Vector>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n).prop_map(Vector::new), k)
}

proptest! {
    #[test]
    fn volume_factor_bounds_hold(
        (n, vs) in (2usize..=6).prop_flat_map(|n| (Just(n), (1..=n).prop_flat_map(move |k| vectors(n, k)))),
        seed in any::<u64>(),
    ) {
        let l = distortion::random_linear_map(n, 0.1, 10.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let spec = distortion::singular_values(&l).unwrap();
        let before = gram::volume(&vs);
        let after = gram::volume(&vs.iter().map(|v| l.mul_vec(v)).collect::<Vec<_>>());
        let (lo, hi) = spec.volume_factor_bounds(vs.len());
        prop_assert!(after >= lo * before * (1.0 - 1e-10));
        prop_assert!(after <= hi * before * (1.0 + 1e-10));
    }

    #[test]
    fn inverse_spectrum_is_reversed_reciprocal(n in 2usize..=6, seed in any::<u64>()) {
        let l = distortion::random_linear_map(n, 0.1, 10.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let direct = distortion::singular_values(&l.inverse().unwrap()).unwrap();
        let derived = distortion::singular_values(&l).unwrap().inverse().unwrap();
        for (a, b) in direct.values().iter().zip(derived.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn widening_never_tightens(
        sigma in prop::collection::vec(0.2f64..5.0, 3..=6),
        grow in 1.0f64..3.0,
        shrink in 1.0f64..3.0,
        kappa in 0.1f64..2.0,
    ) {
        let narrow = SingularSpectrum::new(sigma.clone()).unwrap();
        let mut wide = narrow.values().to_vec();
        wide[0] *= grow;
        *wide.last_mut().unwrap() /= shrink;
        let wide = SingularSpectrum::new(wide).unwrap();
        for r in 1..narrow.dim() {
            let a = distortion::curvature_bounds(&narrow, kappa, r).unwrap();
            let b = distortion::curvature_bounds(&wide, kappa, r).unwrap();
            prop_assert!(a.within(&b));
            let a = distortion::operator_norm_bounds(&narrow, kappa, r).unwrap();
            let b = distortion::operator_norm_bounds(&wide, kappa, r).unwrap();
            prop_assert!(a.within(&b));
        }
    }
}

#[test]
fn exterior_powers_attain_the_extreme_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let l = distortion::random_linear_map(5, 0.1, 10.0, &mut rng);
    let spec = distortion::singular_values(&l).unwrap();
    let dec = svd(&l).unwrap();
    let right: Vec<Vector> = (0..5).map(|j| dec.v.column(j)).collect();
    for k in 1..=5 {
        let top: Vec<Vector> = right[..k].iter().map(|v| l.mul_vec(v)).collect();
        let bottom: Vec<Vector> = right[5 - k..].iter().map(|v| l.mul_vec(v)).collect();
        let top_norm = wedge_vectors(5, &top).unwrap().norm();
        let bottom_norm = wedge_vectors(5, &bottom).unwrap().norm();
        assert!((top_norm - spec.top_product(k)).abs() < 1e-10 * top_norm);
        assert!((bottom_norm - spec.bottom_product(k)).abs() < 1e-10 * bottom_norm);
    }
}

#[test]
fn identity_map_observes_the_original() {
    let curve = AnalyticCurve::double_helix(3.0);
    let ts: Vec<f64> = (0..10).map(|i| 0.6 * i as f64).collect();
    for (_, reports) in distortion::verify_on_curve(&curve, &Matrix::identity(4), &Vector::zeros(4), &ts).unwrap() {
        for r in reports {
            assert!(r.satisfied);
            assert!((r.lower - r.observed.abs()).abs() < 1e-12 * r.lower);
            assert!((r.upper - r.observed.abs()).abs() < 1e-12 * r.upper);
        }
    }
}

#[test]
fn sampled_verification_respects_the_bounds() {
    let curve = AnalyticCurve::helix(1.0, 0.7);
    let samples = curve.sample(0.0, 1e-2, 300).unwrap();
    let l = Matrix::from_row_major(3, 3, vec![1.5, 0.2, 0.0, 0.0, 0.8, 0.3, 0.1, 0.0, 1.1]).unwrap();
    let reports = distortion::verify_on_samples(&samples, &l, &Vector::from([1.0, 0.0, -1.0]), 4).unwrap();
    assert_eq!(reports.len(), 300);
    for (t, rs) in reports {
        assert_eq!(rs.len(), 4);
        assert!(rs.iter().all(|r| r.satisfied), "t = {t}");
        assert_eq!(rs[1].kind, BoundKind::OperatorNorm);
    }
}
