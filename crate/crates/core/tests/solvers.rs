use std::f64::consts::PI;

use ringcat_core::fock::FockBasis;
use ringcat_core::model::{build_site_hamiltonian, RingParams};
use ringcat_core::spectrum::{find_anticrossing, lowest_eigenpairs_with, phase_scan, SolverOptions};
use ringcat_core::Error;

#[test]
fn krylov_matches_dense() {
    for (m, n, u, phi) in [(3, 30, 0.09, PI / 3.0), (4, 8, 0.5, 0.2), (5, 6, 2.0, 1.0), (3, 4, 0.0, PI / 3.0)] {
        let basis = FockBasis::new(m, n).unwrap();
        let h = build_site_hamiltonian(&RingParams::uniform(m, n, u, 1.0, phi), &basis).unwrap();
        let dense = lowest_eigenpairs_with(&h, 4, &SolverOptions::dense()).unwrap();
        let krylov = lowest_eigenpairs_with(&h, 4, &SolverOptions::krylov()).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&krylov.eigenvalues) {
            assert!((a - b).abs() < 1e-9, "M={m} N={n}: {a} vs {b}");
        }
        let scale = krylov.scale();
        for r in krylov.residuals.iter().chain(&dense.residuals) {
            assert!(*r <= 1e-10 * scale, "residual {r}");
        }
    }
}

#[test]
fn krylov_is_used_above_the_dense_limit() {
    let basis = FockBasis::new(4, 20).unwrap();
    assert!(basis.dim() > 1000);
    let h = build_site_hamiltonian(&RingParams::uniform(4, 20, 0.3, 1.0, 0.5), &basis).unwrap();
    let opts = SolverOptions {
        dense_limit: 1000,
        ..Default::default()
    };
    let s = lowest_eigenpairs_with(&h, 3, &opts).unwrap();
    for (v, r) in s.eigenvectors.iter().zip(&s.residuals) {
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(*r <= 1e-10 * s.scale());
    }
    for i in 0..3 {
        for j in 0..i {
            assert!(s.eigenvectors[i].dotc(&s.eigenvectors[j]).norm() < 1e-9);
        }
    }
}

#[test]
fn phase_scan_is_thread_count_independent() {
    let p = RingParams::uniform(3, 5, 0.5, 1.0, 0.0);
    let grid: Vec<f64> = (0..31).map(|i| i as f64 * 0.07).collect();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| phase_scan(&p, &grid, 3)).unwrap();
    let b = four.install(|| phase_scan(&p, &grid, 3)).unwrap();
    for (x, y) in a.levels.iter().flatten().zip(b.levels.iter().flatten()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn noninteracting_gap_closes() {
    let p = RingParams::uniform(3, 3, 0.0, 1.0, 0.0);
    let a = find_anticrossing(&p, (PI / 3.0 - 0.3, PI / 3.0 + 0.3), 1e-8).unwrap();
    assert!((a.phi - PI / 3.0).abs() < 1e-6);
    assert!(a.gap < 1e-6);
}

#[test]
fn oversized_basis_is_rejected() {
    let p = RingParams::uniform(6, 40, 0.5, 1.0, 0.0);
    let err = phase_scan(&p, &[0.0], 2).unwrap_err();
    assert!(matches!(err, Error::DimensionCap { .. }), "{err}");
}
