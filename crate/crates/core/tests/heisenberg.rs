use frenetnd::heisenberg::{self, Discretization, SpinChain, Trajectory};
use frenetnd::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_chain(dim: usize, sites: usize, seed: u64) -> SpinChain {
    SpinChain::random_smooth(dim, sites, 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Determinant of the matrix with the given rows, by cofactor expansion.
fn det(rows: &[Vec<f64>]) -> f64 {
    if rows.len() == 1 {
        return rows[0][0];
    }
    (0..rows.len())
        .map(|j| {
            let minor: Vec<Vec<f64>> = rows[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * rows[0][j] * det(&minor)
        })
        .sum()
}

#[test]
fn rhs_matches_cofactor_expansion() {
    // ⟨S × S′ × S″, e_i⟩ = det(S, S′, S″, e_i).
    let chain = random_chain(4, 128, 9);
    let disc = Discretization::new(4, 128, 4).unwrap();
    let d1 = disc.derivatives(&chain.spins, 1).unwrap();
    let d2 = disc.derivatives(&chain.spins, 2).unwrap();
    let rhs = disc.rhs(&chain.spins).unwrap();
    for j in 0..128 {
        let scale = d1[j].norm() * d2[j].norm();
        for i in 0..4 {
            let rows = vec![
                chain.spins[j].as_slice().to_vec(),
                d1[j].as_slice().to_vec(),
                d2[j].as_slice().to_vec(),
                Vector::basis(4, i).into_inner(),
            ];
            assert!((rhs[j][i] - det(&rows)).abs() <= 1e-10 * scale.max(1.0));
        }
    }
}

#[test]
fn classical_model_uses_second_derivative() {
    let chain = random_chain(3, 64, 4);
    let disc = Discretization::new(3, 64, 4).unwrap();
    let d2 = disc.derivatives(&chain.spins, 2).unwrap();
    for ((r, s), s2) in disc.rhs(&chain.spins).unwrap().iter().zip(&chain.spins).zip(&d2) {
        let expected = Vector::from([
            s[1] * s2[2] - s[2] * s2[1],
            s[2] * s2[0] - s[0] * s2[2],
            s[0] * s2[1] - s[1] * s2[0],
        ]);
        assert!(r.distance(&expected) < 1e-12 * s2.norm().max(1.0));
    }
}

#[test]
fn great_circle_tangency() {
    let chain = SpinChain::great_circle(3, 128, 2.0).unwrap();
    for (r, s) in heisenberg::rhs(&chain).unwrap().iter().zip(&chain.spins) {
        assert!(r.dot(s).abs() < 1e-12);
    }
}

#[test]
fn refinement_reduces_discrepancy_to_finest_run() {
    let t_end = 0.05;
    let finest_sites = 256;
    let finest_dt = heisenberg::suggested_dt(4, std::f64::consts::TAU / finest_sites as f64, 0.1);
    let run = |sites: usize| {
        let dt = finest_dt * (finest_sites / sites).pow(2) as f64;
        heisenberg::simulate(&random_chain(4, sites, 2), t_end, dt, 1, 4).unwrap()
    };
    let finest = run(finest_sites);
    let mut previous = f64::INFINITY;
    for sites in [32, 64, 128] {
        let traj = run(sites);
        let stride = finest_sites / sites;
        let err = traj
            .last()
            .spins
            .iter()
            .enumerate()
            .map(|(j, s)| s.distance(&finest.last().spins[j * stride]))
            .fold(0.0, f64::max);
        assert!(err < previous, "M = {sites}: {err} vs {previous}");
        previous = err;
    }
}

#[test]
fn conserved_quantities_of_a_smooth_chain() {
    let chain = random_chain(4, 128, 6);
    let dt = heisenberg::suggested_dt(4, chain.dx(), 0.1);
    let traj = heisenberg::simulate(&chain, 0.2, dt, 4, 4).unwrap();
    let report = heisenberg::conserved_report(&traj).unwrap();
    assert_eq!(report.times.len(), 5);
    assert_eq!(report.kappa_drift[0], 0.0);
    assert!(report.max_kappa_drift < 1e-3 * report.kappa_scale);
    assert!(report.identity_residual.iter().all(|&r| r < 1e-3 * report.kappa_scale.powi(2)));
    assert!(report.tangency < 1e-12);
}

#[test]
fn blow_up_is_reported() {
    let chain = random_chain(4, 64, 1);
    let err = heisenberg::simulate(&chain, 1.0, 0.5, 1, 4).unwrap_err();
    assert_eq!(err.category(), frenetnd::ErrorCategory::Numerical);
}

#[test]
fn trajectory_json_lines() {
    let chain = random_chain(3, 32, 3);
    let traj: Trajectory = heisenberg::simulate(&chain, 0.01, 1e-3, 2, 4).unwrap();
    let mut buf = Vec::new();
    traj.write_json_lines(&mut buf).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().collect();
    assert_eq!(lines.len(), 3);
    for (line, snap) in lines.iter().zip(&traj.snapshots) {
        let parsed: heisenberg::Snapshot = serde_json::from_str(line).unwrap();
        assert_eq!(&parsed, snap);
    }
}
