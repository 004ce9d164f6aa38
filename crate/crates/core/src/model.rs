//! The twisted Bose-Hubbard ring.
//!
//! ```text
//! H = −Σᵢ Jᵢ (e^{iφᵢ} aᵢ† aᵢ₊₁ + h.c.) + U Σᵢ aᵢ†² aᵢ²
//! ```
//!
//! Bond `i` joins site `i` to site `(i+1) mod M`. The interaction is
//! `U aᵢ†²aᵢ²`, i.e. `U nᵢ(nᵢ−1)` per site; the common `U/2` convention
//! corresponds to `U_here = U_standard / 2`. Units have ħ = 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::operator::{HermitianOperator, OperatorBuilder};

/// Parameters of an `M`-site ring holding `N` atoms.
///
/// Bond tunnelings are stored as a base value times per-bond factors, so
/// `U/J` keeps referring to the base `J` when one bond is detuned.
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams {
    pub sites: usize,
    pub atoms: usize,
    pub interaction: f64,
    pub tunneling: f64,
    pub bond_factors: Vec<f64>,
    pub phases: Vec<f64>,
}

impl RingParams {
    /// Uniform ring: equal tunneling and equal Peierls phase on every bond.
    pub fn uniform(sites: usize, atoms: usize, interaction: f64, tunneling: f64, phi: f64) -> Self {
        RingParams {
            sites,
            atoms,
            interaction,
            tunneling,
            bond_factors: vec![1.0; sites],
            phases: vec![phi; sites],
        }
    }

    /// Ring from explicit per-bond tunnelings; the base tunneling is their
    /// mean.
    pub fn from_bonds(
        atoms: usize,
        interaction: f64,
        tunnelings: &[f64],
        phases: &[f64],
    ) -> Result<Self> {
        if tunnelings.len() != phases.len() {
            return Err(Error::Domain(format!(
                "{} tunnelings but {} phases",
                tunnelings.len(),
                phases.len()
            )));
        }
        let sites = tunnelings.len();
        let mean = tunnelings.iter().sum::<f64>() / sites.max(1) as f64;
        let bond_factors = if mean == 0.0 {
            vec![1.0; sites]
        } else {
            tunnelings.iter().map(|j| j / mean).collect()
        };
        let params = RingParams {
            sites,
            atoms,
            interaction,
            tunneling: mean,
            bond_factors,
            phases: phases.to_vec(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Multiplies the tunneling of one bond by `factor`.
    pub fn with_bond_factor(mut self, bond: usize, factor: f64) -> Self {
        self.bond_factors[bond] *= factor;
        self
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phases.iter_mut().for_each(|p| *p = phi);
        self
    }

    pub fn with_tunneling(mut self, tunneling: f64) -> Self {
        self.tunneling = tunneling;
        self
    }

    pub fn with_interaction(mut self, interaction: f64) -> Self {
        self.interaction = interaction;
        self
    }

    pub fn bond_tunneling(&self, bond: usize) -> f64 {
        self.tunneling * self.bond_factors[bond]
    }

    pub fn tunnelings(&self) -> Vec<f64> {
        (0..self.sites).map(|i| self.bond_tunneling(i)).collect()
    }

    pub fn mean_tunneling(&self) -> f64 {
        self.tunnelings().iter().sum::<f64>() / self.sites as f64
    }

    /// All bonds share one tunneling and one phase.
    pub fn is_uniform(&self) -> bool {
        let f0 = self.bond_factors[0];
        let p0 = self.phases[0];
        self.bond_factors.iter().all(|&f| f == f0) && self.phases.iter().all(|&p| p == p0)
    }

    /// Energy scale used for relative tolerances: `max(U, |J̄|, 1e-300)`.
    pub fn energy_scale(&self) -> f64 {
        self.interaction
            .abs()
            .max(self.mean_tunneling().abs())
            .max(1e-300)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.sites < 2 {
            problems.push(format!("need at least 2 sites, got {}", self.sites));
        }
        if self.atoms < 1 {
            problems.push("need at least 1 atom".to_string());
        }
        if self.bond_factors.len() != self.sites {
            problems.push(format!(
                "{} bond factors for {} sites",
                self.bond_factors.len(),
                self.sites
            ));
        }
        if self.phases.len() != self.sites {
            problems.push(format!("{} phases for {} sites", self.phases.len(), self.sites));
        }
        if !(self.interaction >= 0.0) || !self.interaction.is_finite() {
            problems.push(format!("interaction must be finite and >= 0, got {}", self.interaction));
        }
        if !self.tunneling.is_finite()
            || self.bond_factors.iter().any(|f| !f.is_finite())
            || self.phases.iter().any(|p| !p.is_finite())
        {
            problems.push("tunnelings and phases must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }

    fn check_basis(&self, basis: &FockBasis) -> Result<()> {
        self.validate()?;
        if basis.sites() != self.sites || basis.atoms() != self.atoms {
            return Err(Error::Domain(format!(
                "basis is (M={}, N={}) but parameters are (M={}, N={})",
                basis.sites(),
                basis.atoms(),
                self.sites,
                self.atoms
            )));
        }
        Ok(())
    }
}

/// Site-basis matrix of the twisted Hamiltonian.
pub fn build_site_hamiltonian(params: &RingParams, basis: &FockBasis) -> Result<HermitianOperator> {
    params.check_basis(basis)?;
    let m = params.sites;
    let hops: Vec<(usize, Complex64)> = (0..m)
        .filter_map(|bond| {
            let j = params.bond_tunneling(bond);
            (j != 0.0).then(|| (bond, -j * Complex64::from_polar(1.0, params.phases[bond])))
        })
        .collect();

    let mut builder = OperatorBuilder::new(basis.dim());
    let mut target = vec![0usize; m];
    for (col, state) in basis.states().iter().enumerate() {
        let n = state.as_slice();
        let onsite: usize = n.iter().map(|&k| k * k.saturating_sub(1)).sum();
        builder.add_diagonal(col, params.interaction * onsite as f64);

        // aᵢ† aᵢ₊₁ moves one atom from site i+1 to site i; the h.c. term is
        // added by add_hermitian.
        for &(bond, coupling) in &hops {
            let from = (bond + 1) % m;
            if n[from] == 0 {
                continue;
            }
            target.copy_from_slice(n);
            target[from] -= 1;
            target[bond] += 1;
            debug_assert_eq!(target.iter().sum::<usize>(), params.atoms);
            let amp = ((n[bond] + 1) as f64 * n[from] as f64).sqrt();
            builder.add_hermitian(basis.rank(&target), col, coupling * amp);
        }
    }
    Ok(builder.finish())
}

/// Three-site Hamiltonian written directly in the flow (quasi-momentum)
/// representation, on the occupation basis read as `(N_α, N_β, N_γ)`.
///
/// ```text
/// H = −J{(2α†α − β†β − γ†γ) cos φ + √3(β†β − γ†γ) sin φ}
///   + U/3 {α†²α² + β†²β² + γ†²γ² + 4(α†αβ†β + α†αγ†γ + β†βγ†γ)
///          + 2(α²β†γ† + β²α†γ† + γ²α†β† + h.c.)}
/// ```
///
/// Only defined for uniform rings.
pub fn build_flow_hamiltonian_3site(
    params: &RingParams,
    basis: &FockBasis,
) -> Result<HermitianOperator> {
    if params.sites != 3 {
        return Err(Error::Unsupported(format!(
            "flow-representation builder is three-site only, got M={}",
            params.sites
        )));
    }
    params.check_basis(basis)?;
    if !params.is_uniform() {
        return Err(Error::Unsupported(
            "flow-representation builder requires uniform bonds".into(),
        ));
    }
    let j = params.bond_tunneling(0);
    let phi = params.phases[0];
    let u = params.interaction;
    let sqrt3 = 3f64.sqrt();

    let mut builder = OperatorBuilder::new(basis.dim());
    let mut target = [0usize; 3];
    for (col, state) in basis.states().iter().enumerate() {
        let n = state.as_slice();
        let (na, nb, ng) = (n[0] as f64, n[1] as f64, n[2] as f64);
        let kinetic = -j * ((2.0 * na - nb - ng) * phi.cos() + sqrt3 * (nb - ng) * phi.sin());
        let self_int = na * (na - 1.0) + nb * (nb - 1.0) + ng * (ng - 1.0);
        let cross = 4.0 * (na * nb + na * ng + nb * ng);
        builder.add_diagonal(col, kinetic + u / 3.0 * (self_int + cross));

        if u == 0.0 {
            continue;
        }
        // pair in mode p scatters to one atom each in q and r
        for (p, q, r) in [(0usize, 1usize, 2usize), (1, 0, 2), (2, 0, 1)] {
            if n[p] < 2 {
                continue;
            }
            target.copy_from_slice(n);
            target[p] -= 2;
            target[q] += 1;
            target[r] += 1;
            let amp = ((n[p] * (n[p] - 1)) as f64).sqrt()
                * ((n[q] + 1) as f64).sqrt()
                * ((n[r] + 1) as f64).sqrt();
            builder.add_hermitian(
                basis.rank(&target),
                col,
                Complex64::new(2.0 * u / 3.0 * amp, 0.0),
            );
        }
    }
    Ok(builder.finish())
}

/// Total quasi-momentum `Σ_k k·n_k` of a flow occupation tuple (not reduced).
pub fn quasi_momentum(flow_occupations: &[usize]) -> usize {
    flow_occupations.iter().enumerate().map(|(k, &n)| k * n).sum()
}

/// Diagonal operator `K = Σ_k k N_k` on a basis read as flow occupations.
/// Conservation laws hold modulo `M`.
pub fn quasi_momentum_operator(basis: &FockBasis) -> HermitianOperator {
    let mut builder = OperatorBuilder::new(basis.dim());
    for (i, s) in basis.states().iter().enumerate() {
        builder.add_diagonal(i, quasi_momentum(s.as_slice()) as f64);
    }
    builder.finish()
}

/// Peierls phase per bond for ring angular momentum `L/ħ`: `φ = 2πL/(Mħ)`.
pub fn phase_from_angular_momentum(l_over_hbar: f64, sites: usize) -> f64 {
    2.0 * PI * l_over_hbar / sites as f64
}
