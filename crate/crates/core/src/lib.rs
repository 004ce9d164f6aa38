//! Exact diagonalization of bosons on a twisted ring lattice.
//!
//! Builds the Bose-Hubbard Hamiltonian of `N` atoms on `M` sites with Peierls
//! phases on the bonds, solves for its low-lying spectrum, expresses states in
//! the quasi-momentum ("flow") basis, measures two-branch cat fidelities,
//! bounds the energy of product condensates and propagates states under
//! time-dependent tunneling.

pub mod dynamics;
pub mod error;
pub mod flow;
pub mod fock;
pub mod lanczos;
pub mod model;
pub mod operator;
pub mod optimize;
pub mod spectrum;
pub mod witness;

pub use dynamics::{
    cat_scan_static, evolve, preparation_protocol, CatScanRow, EvolutionTrace, JProfile, ProtocolSettings,
    RampSchedule, RampShape, Segment,
};
pub use error::{Error, ErrorKind, Result};
pub use flow::{
    cat_fidelity, flow_distribution, flow_fock_vector, CatFidelity, CatProbe, FlowDistribution, FlowFrame,
    FlowTransform,
};
pub use fock::{fock_dimension, FockBasis, OccupationState};
pub use model::{build_flow_hamiltonian_3site, build_site_hamiltonian, quasi_momentum, RingParams};
pub use operator::{DenseMatrix, HermitianOperator, OperatorBuilder, StateVector};
pub use spectrum::{
    find_anticrossing, lowest_eigenpairs, phase_scan, resolved_ground_state, Anticrossing, GroundState,
    PhaseScan, SolverOptions, SpectrumResult,
};
pub use witness::{minimize_separable_energy, separable_energy, SeparableAnsatz, WitnessReport};

pub use num_complex::Complex64;
