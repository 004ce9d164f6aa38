//! Lowest eigenpairs, phase scans and anti-crossing localization.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::lanczos::{lowest_krylov, KrylovOptions};
use crate::model::{build_site_hamiltonian, RingParams};
use crate::operator::{HermitianOperator, StateVector};
use crate::optimize::golden_section_minimize;

/// Relative width within which eigenvalues are reported as one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default half-width of the bracket around φ = π/3 for
/// [`find_anticrossing`].
pub const ANTICROSSING_HALF_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Dense up to [`SolverOptions::dense_limit`], Krylov above.
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub dense_limit: usize,
    pub krylov: KrylovOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolverMethod::Auto,
            dense_limit: 5000,
            krylov: KrylovOptions::default(),
        }
    }
}

impl SolverOptions {
    pub fn dense() -> Self {
        SolverOptions {
            method: SolverMethod::Dense,
            ..Default::default()
        }
    }

    pub fn krylov() -> Self {
        SolverOptions {
            method: SolverMethod::Krylov,
            ..Default::default()
        }
    }
}

/// Lowest `k` eigenpairs with their residual norms.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending; values within [`DEGENERACY_TOL`]·scale of each other are
    /// reported as their common mean.
    pub eigenvalues: Vec<f64>,
    /// Normalized, largest-magnitude component real and positive.
    pub eigenvectors: Vec<StateVector>,
    /// `‖Hv − Ev‖` for each pair.
    pub residuals: Vec<f64>,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.eigenvectors[0]
    }

    /// `E₁ − E₀`, zero when only one level was computed.
    pub fn gap(&self) -> f64 {
        if self.eigenvalues.len() < 2 {
            0.0
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }

    /// `max |E|` over computed levels, floored at 1.
    pub fn scale(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.abs()).fold(1.0, f64::max)
    }

    /// Eigenvectors spanning the (possibly degenerate) lowest level.
    pub fn ground_space(&self) -> &[StateVector] {
        let e0 = self.eigenvalues[0];
        let g = self.eigenvalues.iter().take_while(|&&e| e == e0).count();
        &self.eigenvectors[..g]
    }

    /// Probability of `state` in the lowest level's eigenspace.
    pub fn ground_overlap(&self, state: &StateVector) -> f64 {
        self.ground_space().iter().map(|g| g.dotc(state).norm_sqr()).sum()
    }
}

/// Rotates `v` so its largest-magnitude component is real and positive.
pub fn fix_phase(v: StateVector) -> StateVector {
    let pivot = v
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |best, c| if c.norm() > best.norm() + 1e-14 { c } else { best });
    if pivot.norm() == 0.0 {
        return v;
    }
    let rot = pivot.conj() / pivot.norm();
    v * rot
}

/// Lowest `k` eigenpairs using the default solver choice.
pub fn lowest_eigenpairs(h: &HermitianOperator, k: usize) -> Result<SpectrumResult> {
    lowest_eigenpairs_with(h, k, &SolverOptions::default())
}

pub fn lowest_eigenpairs_with(
    h: &HermitianOperator,
    k: usize,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::Domain(format!("requested {k} eigenpairs of a {dim}-dimensional operator")));
    }
    let use_dense = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Krylov => false,
        SolverMethod::Auto => dim <= opts.dense_limit,
    };
    let (values, vectors) = if use_dense {
        dense_lowest(h, k)?
    } else {
        lowest_krylov(h, k, &opts.krylov)?
    };
    Ok(finalize(h, values, vectors))
}

fn dense_lowest(h: &HermitianOperator, k: usize) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let eig = h
        .to_dense()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::Convergence { iterations: 0 })?;
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .take(k)
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok((values, vectors))
}

fn finalize(h: &HermitianOperator, values: Vec<f64>, vectors: Vec<StateVector>) -> SpectrumResult {
    let vectors: Vec<StateVector> = vectors
        .into_iter()
        .map(|v| {
            let n = v.norm();
            fix_phase(v / Complex64::new(n, 0.0))
        })
        .collect();
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&e, v)| (h.apply(v) - v * Complex64::new(e, 0.0)).norm())
        .collect();
    let scale = values.iter().map(|e: &f64| e.abs()).fold(1.0, f64::max);
    SpectrumResult {
        eigenvalues: merge_degenerate(&values, DEGENERACY_TOL * scale),
        eigenvectors: vectors,
        residuals,
    }
}

fn merge_degenerate(values: &[f64], tol: f64) -> Vec<f64> {
    let mut out = values.to_vec();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            out[start..end].iter_mut().for_each(|v| *v = mean);
        }
        start = end;
    }
    out
}

/// Ground state with exact degeneracies broken by quasi-momentum.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// `E₁ − E₀`; zero when the lowest level is degenerate.
    pub gap: f64,
    pub degeneracy: usize,
    pub state: StateVector,
    /// Sector `K mod M` of `state` when the level was degenerate.
    pub quasi_momentum: Option<usize>,
}

/// Lowest eigenstate of `h`. A degenerate lowest level is rotated into
/// quasi-momentum eigenstates and the one with the smallest `K mod M` is
/// returned, so the choice does not depend on the eigensolver.
pub fn resolved_ground_state(h: &HermitianOperator, basis: &FockBasis, opts: &SolverOptions) -> Result<GroundState> {
    let dim = h.dim();
    let mut k = dim.min(6);
    let spectrum = loop {
        let s = lowest_eigenpairs_with(h, k, opts)?;
        if s.ground_space().len() < k || k == dim {
            break s;
        }
        k = (2 * k).min(dim);
    };
    let space = spectrum.ground_space();
    let (state, quasi_momentum) = if space.len() > 1 {
        let (v, q) = crate::flow::resolve_quasi_momentum(basis, space).swap_remove(0);
        (v, Some(q))
    } else {
        (space[0].clone(), None)
    };
    let gap = spectrum
        .eigenvalues
        .get(space.len())
        .map_or(0.0, |e| e - spectrum.ground_energy());
    Ok(GroundState {
        energy: spectrum.ground_energy(),
        gap: if space.len() > 1 { 0.0 } else { gap },
        degeneracy: space.len(),
        state,
        quasi_momentum,
    })
}

/// Low-lying levels on a grid of Peierls phases.
#[derive(Debug, Clone)]
pub struct PhaseScan {
    pub phis: Vec<f64>,
    /// `levels[i]` holds the lowest `k` energies at `phis[i]`.
    pub levels: Vec<Vec<f64>>,
    /// `E₁ − E₀` at each phase.
    pub gaps: Vec<f64>,
}

impl PhaseScan {
    /// Index of the smallest gap (first one on ties).
    pub fn min_gap_index(&self) -> usize {
        self.gaps
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &g)| if g < acc.1 { (i, g) } else { acc })
            .0
    }
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("{what} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{what} grid must be strictly ascending")));
    }
    Ok(())
}

pub(crate) fn spectrum_at_phase(
    params: &RingParams,
    basis: &FockBasis,
    phi: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    let p = params.clone().with_phase(phi);
    let h = build_site_hamiltonian(&p, basis)?;
    lowest_eigenpairs_with(&h, k.min(h.dim()), opts)
}

/// Lowest `k` levels at each phase of `phi_grid` (uniform phase on every
/// bond). Grid points are independent and run on the current rayon pool;
/// output order follows the grid.
pub fn phase_scan(params: &RingParams, phi_grid: &[f64], k: usize) -> Result<PhaseScan> {
    phase_scan_with(params, phi_grid, k, &SolverOptions::default())
}

pub fn phase_scan_with(
    params: &RingParams,
    phi_grid: &[f64],
    k: usize,
    opts: &SolverOptions,
) -> Result<PhaseScan> {
    check_grid(phi_grid, "phase")?;
    if k == 0 {
        return Err(Error::Domain("need at least one level".into()));
    }
    let basis = FockBasis::new(params.sites, params.atoms)?;
    let solve_k = k.max(2).min(basis.dim());
    let rows: Vec<(Vec<f64>, f64)> = phi_grid
        .par_iter()
        .map(|&phi| {
            spectrum_at_phase(params, &basis, phi, solve_k, opts)
                .map(|s| (s.eigenvalues.iter().take(k).copied().collect(), s.gap()))
                .map_err(|e| e.at_phase(phi))
        })
        .collect::<Result<_>>()?;
    let (levels, gaps) = rows.into_iter().unzip();
    Ok(PhaseScan {
        phis: phi_grid.to_vec(),
        levels,
        gaps,
    })
}

/// Location and size of the minimum gap between the two lowest levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anticrossing {
    pub phi: f64,
    pub gap: f64,
}

/// `E₁ − E₀` at a single phase.
pub fn gap_at_phase(params: &RingParams, phi: f64, opts: &SolverOptions) -> Result<f64> {
    let basis = FockBasis::new(params.sites, params.atoms)?;
    gap_with_basis(params, &basis, phi, opts)
}

fn gap_with_basis(params: &RingParams, basis: &FockBasis, phi: f64, opts: &SolverOptions) -> Result<f64> {
    if basis.dim() < 2 {
        return Err(Error::Domain("gap needs at least two states".into()));
    }
    spectrum_at_phase(params, basis, phi, 2, opts)
        .map(|s| s.gap())
        .map_err(|e| e.at_phase(phi))
}

/// Golden-section minimization of the lowest gap over `bracket`.
///
/// The bracket must hold a single gap minimum: the gap at its midpoint has
/// to lie below both ends, otherwise a bracketing error is returned.
pub fn find_anticrossing(params: &RingParams, bracket: (f64, f64), tol: f64) -> Result<Anticrossing> {
    find_anticrossing_with(params, bracket, tol, &SolverOptions::default())
}

pub fn find_anticrossing_with(
    params: &RingParams,
    bracket: (f64, f64),
    tol: f64,
    opts: &SolverOptions,
) -> Result<Anticrossing> {
    let (a, b) = bracket;
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::Domain(format!("bad bracket ({a}, {b}) or tolerance {tol}")));
    }
    let basis = FockBasis::new(params.sites, params.atoms)?;
    let gap = |phi: f64| gap_with_basis(params, &basis, phi, opts);
    let mid = 0.5 * (a + b);
    let (ga, gm, gb) = (gap(a)?, gap(mid)?, gap(b)?);
    if !(gm < ga && gm < gb) {
        return Err(Error::Bracketing(format!(
            "gap at midpoint {mid:.6} ({gm:.3e}) is not below both ends ({ga:.3e}, {gb:.3e})"
        )));
    }
    let mut failure = None;
    let (phi, g) = golden_section_minimize(
        |x| match gap(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        tol,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(Anticrossing { phi, gap: g }),
    }
}

/// Default anti-crossing bracket `[π/3 − 0.3, π/3 + 0.3]`.
pub fn default_anticrossing_bracket() -> (f64, f64) {
    (PI / 3.0 - ANTICROSSING_HALF_WIDTH, PI / 3.0 + ANTICROSSING_HALF_WIDTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::OperatorBuilder;

    fn diag(values: &[f64]) -> HermitianOperator {
        let mut b = OperatorBuilder::new(values.len());
        for (i, &v) in values.iter().enumerate() {
            b.add_diagonal(i, v);
        }
        b.finish()
    }

    #[test]
    fn diagonal_matrix_lowest_two() {
        let s = lowest_eigenpairs(&diag(&[3.0, 1.0, 2.0]), 2).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0]);
        assert!((s.eigenvectors[0][1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_out_of_range() {
        let h = diag(&[1.0, 2.0]);
        assert!(matches!(lowest_eigenpairs(&h, 0), Err(Error::Domain(_))));
        assert!(matches!(lowest_eigenpairs(&h, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn single_particle_dispersion() {
        let b = FockBasis::new(3, 1).unwrap();
        let h = build_site_hamiltonian(&RingParams::uniform(3, 1, 0.0, 1.0, 0.0), &b).unwrap();
        let s = lowest_eigenpairs(&h, 3).unwrap();
        assert!((s.eigenvalues[0] + 2.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[2] - 1.0).abs() < 1e-12);
        assert_eq!(s.eigenvalues[1], s.eigenvalues[2]);
    }

    #[test]
    fn phase_fixing_makes_pivot_real_positive() {
        let v = StateVector::from_vec(vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, -0.9),
            Complex64::new(0.3, 0.3),
        ]);
        let f = fix_phase(v.clone());
        assert!(f[1].im.abs() < 1e-15 && f[1].re > 0.0);
        assert!((f.norm() - v.norm()).abs() < 1e-15);
    }

    #[test]
    fn merge_snaps_clusters_only() {
        let m = merge_degenerate(&[1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0 + 5e-13], 1e-9);
        assert_eq!(m[0], m[1]);
        assert_eq!(m[2], 2.0);
        assert_eq!(m[3], m[4]);
    }

    #[test]
    fn phase_scan_rejects_bad_grids() {
        let p = RingParams::uniform(3, 2, 0.5, 1.0, 0.0);
        assert!(matches!(phase_scan(&p, &[], 2), Err(Error::Domain(_))));
        assert!(matches!(phase_scan(&p, &[0.2, 0.1], 2), Err(Error::Domain(_))));
    }

    #[test]
    fn bracketing_error_when_minimum_is_outside() {
        let p = RingParams::uniform(3, 3, 0.5, 1.0, 0.0);
        let err = find_anticrossing(&p, (0.0, 0.5), 1e-6).unwrap_err();
        assert!(matches!(err, Error::Bracketing(_)), "{err:?}");
    }
}
