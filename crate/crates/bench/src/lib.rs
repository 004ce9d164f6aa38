//! Fixtures shared by the benchmarks.

use ringcat_core::{build_site_hamiltonian, FockBasis, HermitianOperator, RingParams};

/// Three-site ring at the anti-crossing phase with `U/J = 0.5`.
pub fn three_site(atoms: usize) -> RingParams {
    RingParams::uniform(3, atoms, 0.5, 1.0, std::f64::consts::PI / 3.0)
}

pub fn hamiltonian(params: &RingParams) -> (FockBasis, HermitianOperator) {
    let basis = FockBasis::new(params.sites, params.atoms).expect("benchmark sizes are small");
    let h = build_site_hamiltonian(params, &basis).expect("valid parameters");
    (basis, h)
}
