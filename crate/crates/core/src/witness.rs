//! Separable-state energy bound.
//!
//! The separable class here is the product condensate
//! `(Σᵢ uᵢ aᵢ†)^N |0⟩ / √(N!)`. If the exact ground energy lies strictly below
//! the lowest energy reachable in that class, the ground state is entangled
//! relative to product-condensate states.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowTransform;
use crate::fock::FockBasis;
use crate::model::{build_site_hamiltonian, RingParams};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::spectrum::lowest_eigenpairs;

pub const DEFAULT_RESTARTS: usize = 32;

/// Single-particle amplitudes of a product condensate, normalized, with the
/// first nonzero amplitude real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableAnsatz {
    amplitudes: Vec<Complex64>,
}

impl SeparableAnsatz {
    /// Normalizes `amplitudes` and fixes the global phase.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("ansatz amplitudes must be finite and not all zero".into()));
        }
        let mut amplitudes: Vec<Complex64> = amplitudes.into_iter().map(|u| u / norm).collect();
        if let Some(pivot) = amplitudes.iter().copied().find(|u| u.norm() > 1e-14) {
            let rot = pivot.conj() / pivot.norm();
            amplitudes.iter_mut().for_each(|u| *u *= rot);
        }
        Ok(SeparableAnsatz { amplitudes })
    }

    /// All atoms on the sites with equal weight and phase.
    pub fn uniform(sites: usize) -> Self {
        let u = Complex64::new(1.0 / (sites as f64).sqrt(), 0.0);
        SeparableAnsatz {
            amplitudes: vec![u; sites],
        }
    }

    /// All atoms in flow mode `k` (site amplitudes `e^{−2πijk/M}/√M`).
    pub fn flow_mode(sites: usize, mode: usize) -> Result<Self> {
        if mode >= sites {
            return Err(Error::Domain(format!("flow mode {mode} out of range for {sites} sites")));
        }
        SeparableAnsatz::new(FlowTransform::new(sites).creation_coefficients(mode))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn energy(&self, params: &RingParams) -> Result<f64> {
        separable_energy(&self.amplitudes, params)
    }

    /// Real parameters `(θ₁..θ_{M−1}, ψ₁..ψ_{M−1})`: hyperspherical angles
    /// for the moduli and phases relative to site 0.
    fn to_params(&self) -> Vec<f64> {
        let m = self.amplitudes.len();
        let r: Vec<f64> = self.amplitudes.iter().map(|u| u.norm()).collect();
        let mut x = Vec::with_capacity(2 * m - 2);
        for k in 1..m {
            let tail = r[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            x.push(tail.atan2(r[k - 1]));
        }
        let a0 = self.amplitudes[0].arg();
        for u in &self.amplitudes[1..] {
            x.push(u.arg() - a0);
        }
        x
    }
}

/// Normalized amplitudes from the `2M − 2` real parameters.
fn amplitudes_from_params(x: &[f64], sites: usize) -> Vec<Complex64> {
    let (angles, phases) = x.split_at(sites - 1);
    let mut out = Vec::with_capacity(sites);
    let mut carry = 1.0;
    for (k, &t) in angles.iter().enumerate() {
        let modulus = carry * t.cos();
        carry *= t.sin();
        let phase = if k == 0 { 0.0 } else { phases[k - 1] };
        out.push(Complex64::from_polar(modulus, phase));
    }
    out.push(Complex64::from_polar(carry, phases[sites - 2]));
    out
}

fn energy_unchecked(u: &[Complex64], params: &RingParams) -> f64 {
    let m = u.len();
    let n = params.atoms as f64;
    let mut hop = 0.0;
    for i in 0..m {
        let j = params.bond_tunneling(i);
        let w = Complex64::from_polar(1.0, params.phases[i]) * u[i].conj() * u[(i + 1) % m];
        hop += j * w.re;
    }
    let quartic: f64 = u.iter().map(|v| v.norm_sqr().powi(2)).sum();
    -2.0 * n * hop + params.interaction * n * (n - 1.0) * quartic
}

/// `⟨ψ(u)|H|ψ(u)⟩` for the product condensate with single-particle
/// amplitudes `u`:
///
/// ```text
/// E(u) = −2N Σᵢ Jᵢ Re(e^{iφᵢ} uᵢ* uᵢ₊₁) + U N(N−1) Σᵢ |uᵢ|⁴
/// ```
pub fn separable_energy(amplitudes: &[Complex64], params: &RingParams) -> Result<f64> {
    params.validate()?;
    if amplitudes.len() != params.sites {
        return Err(Error::Domain(format!(
            "ansatz has {} amplitudes for {} sites",
            amplitudes.len(),
            params.sites
        )));
    }
    let norm2: f64 = amplitudes.iter().map(|u| u.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::Contract(format!("ansatz norm² is {norm2}, expected 1")));
    }
    Ok(energy_unchecked(amplitudes, params))
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub e_ground: f64,
    pub e_sep_min: f64,
    /// `e_sep_min − e_ground`.
    pub margin: f64,
    pub certified: bool,
    pub argmin: SeparableAnsatz,
    pub restarts_converged: usize,
}

impl WitnessReport {
    /// Margin required for certification: `10⁻⁶ · max(|E_ground|, U, J̄)`.
    pub fn threshold(e_ground: f64, params: &RingParams) -> f64 {
        1e-6 * e_ground.abs().max(params.interaction.abs()).max(params.mean_tunneling().abs())
    }
}

/// Multi-start Nelder–Mead over product condensates, compared with the
/// exact ground energy.
///
/// Starting points are `restarts` draws uniform on the amplitude sphere
/// (seeded), followed by the uniform ansatz and each pure flow-mode ansatz.
/// `restarts_converged` counts the random starts only. Starts run in
/// parallel; the result does not depend on scheduling.
pub fn minimize_separable_energy(params: &RingParams, restarts: usize, seed: u64) -> Result<WitnessReport> {
    params.validate()?;
    if restarts == 0 {
        return Err(Error::Domain("need at least one restart".into()));
    }
    let m = params.sites;
    let basis = FockBasis::new(m, params.atoms)?;
    let h = build_site_hamiltonian(params, &basis)?;
    let e_ground = lowest_eigenpairs(&h, 1)?.ground_energy();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = (0..restarts)
        .map(|_| {
            let u: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            SeparableAnsatz::new(u).map(|a| a.to_params())
        })
        .collect::<Result<_>>()?;
    starts.push(SeparableAnsatz::uniform(m).to_params());
    for k in 0..m {
        starts.push(SeparableAnsatz::flow_mode(m, k)?.to_params());
    }

    let opts = NelderMeadOptions::default();
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| nelder_mead(|x| energy_unchecked(&amplitudes_from_params(x, m), params), x0, &opts))
        .collect();

    let restarts_converged = runs[..restarts].iter().filter(|r| r.converged).count();
    let best = runs
        .iter()
        .filter(|r| r.converged)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::Optimization(format!("none of {} starts converged", runs.len())))?;
    let argmin = SeparableAnsatz::new(amplitudes_from_params(&best.x, m))?;
    let e_sep_min = argmin.energy(params)?;
    let margin = e_sep_min - e_ground;
    Ok(WitnessReport {
        e_ground,
        e_sep_min,
        margin,
        certified: margin > WitnessReport::threshold(e_ground, params),
        argmin,
        restarts_converged,
    })
}
