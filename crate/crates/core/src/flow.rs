//! Flow (quasi-momentum) modes of the ring and many-body states built from
//! them.
//!
//! Flow mode `k` annihilates `f_k = Σ_j e^{2πi jk/M} a_j / √M`, so for three
//! sites `k = 0, 1, 2` are α (no flow), β (one quantum of clockwise flow) and
//! γ (anticlockwise). The creation operator is `f_k† = Σ_j e^{−2πi jk/M} a_j† / √M`;
//! a single atom in β therefore has site amplitudes `e^{−2πi j/3}/√3`, and the
//! bra `⟨β|` has components `e^{+2πi j/3}/√3`.
//!
//! A flow Fock vector `|N_0, …, N_{M−1}⟩` is `Π_k (f_k†)^{N_k} |0⟩ / √(Π N_k!)`,
//! expanded on the site basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::operator::{require_normalized, DenseMatrix, HermitianOperator, StateVector};
use crate::optimize::golden_section_minimize;

const NORM_TOL: f64 = 1e-6;

/// Discrete Fourier transform from site modes to flow modes.
#[derive(Debug, Clone)]
pub struct FlowTransform {
    sites: usize,
    matrix: DenseMatrix,
}

impl FlowTransform {
    pub fn new(sites: usize) -> Self {
        let norm = (sites as f64).sqrt();
        let matrix = DMatrix::from_fn(sites, sites, |k, j| {
            Complex64::from_polar(1.0 / norm, 2.0 * PI * (j * k) as f64 / sites as f64)
        });
        FlowTransform { sites, matrix }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `T[k, j]`: coefficient of site mode `j` in flow annihilator `k`.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Site coefficients of the flow creation operator `f_k†`.
    pub fn creation_coefficients(&self, mode: usize) -> Vec<Complex64> {
        (0..self.sites).map(|j| self.matrix[(mode, j)].conj()).collect()
    }

    /// `max |T†T − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let id = DenseMatrix::identity(self.sites, self.sites);
        (prod - id).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `Σ_j x_j a_j†` acting from sector `src` into sector `dst` (one more atom).
fn apply_creation(
    src: &FockBasis,
    amplitudes: &[Complex64],
    dst: &FockBasis,
    coefficients: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dst.dim()];
    let mut target = vec![0usize; src.sites()];
    for (i, &a) in amplitudes.iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let n = src.state(i).as_slice();
        for (j, &x) in coefficients.iter().enumerate() {
            target.copy_from_slice(n);
            target[j] += 1;
            out[dst.rank(&target)] += a * x * ((n[j] + 1) as f64).sqrt();
        }
    }
    out
}

fn sector_ladder(sites: usize, atoms: usize) -> Vec<FockBasis> {
    (0..=atoms)
        .map(|n| FockBasis::sector(sites, n, usize::MAX).expect("sector below parent basis size"))
        .collect()
}

fn check_transform(basis: &FockBasis, transform: &FlowTransform) -> Result<()> {
    if transform.sites() != basis.sites() {
        return Err(Error::Domain(format!(
            "transform has {} modes, basis has {} sites",
            transform.sites(),
            basis.sites()
        )));
    }
    Ok(())
}

/// Site-basis expansion of the flow Fock vector with the given flow
/// occupations, built by applying `f_k†` mode by mode from the vacuum.
pub fn flow_fock_vector(
    basis: &FockBasis,
    flow_occupations: &[usize],
    transform: &FlowTransform,
) -> Result<StateVector> {
    check_transform(basis, transform)?;
    basis.index_of(flow_occupations)?;
    let ladder = sector_ladder(basis.sites(), basis.atoms());
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    let mut filled = 0;
    for (mode, &count) in flow_occupations.iter().enumerate() {
        let coeffs = transform.creation_coefficients(mode);
        for c in 0..count {
            amps = apply_creation(&ladder[filled], &amps, &ladder[filled + 1], &coeffs);
            // f† raises the norm of a state with c atoms in this mode by √(c+1)
            let inv = 1.0 / ((c + 1) as f64).sqrt();
            amps.iter_mut().for_each(|a| *a *= inv);
            filled += 1;
        }
    }
    Ok(StateVector::from_vec(amps))
}

/// All flow Fock vectors of a basis, as the columns of a unitary matrix `W`
/// ordered like the basis itself (column `i` is the flow state whose
/// occupations are `basis.state(i)`).
#[derive(Debug, Clone)]
pub struct FlowFrame {
    basis: FockBasis,
    matrix: DenseMatrix,
}

impl FlowFrame {
    /// Builds every column by recursion over particle number: the vector for
    /// `ν` is `f_k† |ν − e_k⟩ / √ν_k` with `k` the first occupied mode.
    pub fn new(basis: &FockBasis, transform: &FlowTransform) -> Result<Self> {
        check_transform(basis, transform)?;
        let m = basis.sites();
        let ladder = sector_ladder(m, basis.atoms());
        let coeffs: Vec<Vec<Complex64>> = (0..m).map(|k| transform.creation_coefficients(k)).collect();

        let mut prev = DenseMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let mut lowered = vec![0usize; m];
        for n in 1..=basis.atoms() {
            let (src, dst) = (&ladder[n - 1], &ladder[n]);
            let mut cur = DenseMatrix::zeros(dst.dim(), dst.dim());
            for (col, occ) in dst.states().iter().enumerate() {
                let nu = occ.as_slice();
                let k = nu.iter().position(|&v| v > 0).expect("sector n >= 1 is non-empty");
                lowered.copy_from_slice(nu);
                lowered[k] -= 1;
                let parent = prev.column(src.rank(&lowered));
                let mut v = apply_creation(src, parent.as_slice(), dst, &coeffs[k]);
                let inv = 1.0 / (nu[k] as f64).sqrt();
                v.iter_mut().for_each(|a| *a *= inv);
                cur.column_mut(col).copy_from_slice(&v);
            }
            prev = cur;
        }
        Ok(FlowFrame {
            basis: basis.clone(),
            matrix: prev,
        })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// The unitary `W` whose columns are flow Fock vectors.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn vector(&self, flow_occupations: &[usize]) -> Result<StateVector> {
        let i = self.basis.index_of(flow_occupations)?;
        Ok(self.matrix.column(i).into_owned())
    }

    /// Flow amplitudes `⟨ν|ψ⟩` for every flow state `ν`, in basis order.
    pub fn to_flow(&self, state: &StateVector) -> StateVector {
        self.matrix.adjoint() * state
    }

    pub fn from_flow(&self, amplitudes: &StateVector) -> StateVector {
        &self.matrix * amplitudes
    }

    /// `W† H W`: the operator expressed between flow Fock vectors.
    pub fn conjugate(&self, op: &HermitianOperator) -> DenseMatrix {
        let hw = op.to_dense() * &self.matrix;
        self.matrix.adjoint() * hw
    }

    /// `max |W†W − I|`.
    pub fn gram_defect(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        let d = g.nrows();
        (g - DenseMatrix::identity(d, d)).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn distribution(&self, state: &StateVector) -> Result<FlowDistribution> {
        if state.len() != self.basis.dim() {
            return Err(Error::Domain("state length does not match basis".into()));
        }
        require_normalized(state, NORM_TOL)?;
        let amps = self.to_flow(state);
        let entries = self
            .basis
            .states()
            .iter()
            .zip(amps.iter())
            .map(|(s, a)| (s.as_slice().to_vec(), a.norm_sqr()))
            .collect();
        Ok(FlowDistribution {
            atoms: self.basis.atoms(),
            entries,
        })
    }
}

/// Probability of each flow occupation tuple.
#[derive(Debug, Clone)]
pub struct FlowDistribution {
    pub atoms: usize,
    /// `(flow occupations, probability)` in basis order.
    pub entries: Vec<(Vec<usize>, f64)>,
}

impl FlowDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn probability(&self, flow_occupations: &[usize]) -> f64 {
        self.entries
            .iter()
            .find(|(occ, _)| occ.as_slice() == flow_occupations)
            .map_or(0.0, |e| e.1)
    }

    /// Three-mode view keyed by `(N_β, N_γ)`, with `N_α = N − N_β − N_γ`.
    pub fn beta_gamma(&self, n_beta: usize, n_gamma: usize) -> f64 {
        if n_beta + n_gamma > self.atoms {
            return 0.0;
        }
        self.probability(&[self.atoms - n_beta - n_gamma, n_beta, n_gamma])
    }

    /// Rows `(N_β, N_γ, p)` sorted by `N_β` then `N_γ`. Three modes only.
    pub fn beta_gamma_rows(&self) -> Vec<(usize, usize, f64)> {
        let mut rows: Vec<_> = self
            .entries
            .iter()
            .filter(|(occ, _)| occ.len() == 3)
            .map(|(occ, p)| (occ[1], occ[2], *p))
            .collect();
        rows.sort_by_key(|r| (r.0, r.1));
        rows
    }
}

/// Flow distribution of `state` (normalized) over all flow Fock states.
pub fn flow_distribution(
    state: &StateVector,
    basis: &FockBasis,
    transform: &FlowTransform,
) -> Result<FlowDistribution> {
    FlowFrame::new(basis, transform)?.distribution(state)
}

/// Overlap of a state with the two-branch cat `(|N in p⟩ + e^{iθ}|N in q⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatFidelity {
    pub probability: f64,
    /// Relative phase `arg(c_q) − arg(c_p)` wrapped to `(−π, π]`.
    pub theta: f64,
}

/// Precomputed branch vectors `|N in mode p⟩`, `|N in mode q⟩` for repeated
/// cat-fidelity evaluations.
#[derive(Debug, Clone)]
pub struct CatProbe {
    first: StateVector,
    second: StateVector,
}

impl CatProbe {
    pub fn new(basis: &FockBasis, transform: &FlowTransform, modes: (usize, usize)) -> Result<Self> {
        let (p, q) = modes;
        if p == q {
            return Err(Error::Domain(format!("cat branches must use distinct modes, got {p} twice")));
        }
        let m = basis.sites();
        if p >= m || q >= m {
            return Err(Error::Domain(format!("modes ({p}, {q}) out of range for {m} sites")));
        }
        let branch = |k: usize| {
            let mut occ = vec![0; m];
            occ[k] = basis.atoms();
            flow_fock_vector(basis, &occ, transform)
        };
        Ok(CatProbe {
            first: branch(p)?,
            second: branch(q)?,
        })
    }

    /// Same probe, taking the branch vectors from an existing frame.
    pub fn from_frame(frame: &FlowFrame, modes: (usize, usize)) -> Result<Self> {
        let (p, q) = modes;
        if p == q {
            return Err(Error::Domain(format!("cat branches must use distinct modes, got {p} twice")));
        }
        let m = frame.basis().sites();
        let n = frame.basis().atoms();
        let branch = |k: usize| {
            let mut occ = vec![0; m];
            occ.get_mut(k)
                .ok_or_else(|| Error::Domain(format!("mode {k} out of range")))
                .map(|slot| *slot = n)?;
            frame.vector(&occ)
        };
        Ok(CatProbe {
            first: branch(p)?,
            second: branch(q)?,
        })
    }

    /// Branch amplitudes `(c_p, c_q)`.
    pub fn amplitudes(&self, state: &StateVector) -> (Complex64, Complex64) {
        (self.first.dotc(state), self.second.dotc(state))
    }

    /// θ-optimized fidelity `(|c_p| + |c_q|)² / 2`.
    pub fn fidelity(&self, state: &StateVector) -> Result<CatFidelity> {
        require_normalized(state, NORM_TOL)?;
        let (c1, c2) = self.amplitudes(state);
        let probability = ((c1.norm() + c2.norm()).powi(2) / 2.0).min(1.0);
        Ok(CatFidelity {
            probability,
            theta: wrap_phase(c2.arg() - c1.arg()),
        })
    }

    /// Fidelity against the cat with a fixed relative phase θ.
    pub fn fidelity_at(&self, state: &StateVector, theta: f64) -> Result<f64> {
        require_normalized(state, NORM_TOL)?;
        let (c1, c2) = self.amplitudes(state);
        Ok((c1 + Complex64::from_polar(1.0, -theta) * c2).norm_sqr() / 2.0)
    }
}

/// Cat fidelity of `state` for branches in flow modes `modes.0`, `modes.1`.
pub fn cat_fidelity(
    state: &StateVector,
    basis: &FockBasis,
    transform: &FlowTransform,
    modes: (usize, usize),
) -> Result<CatFidelity> {
    CatProbe::new(basis, transform, modes)?.fidelity(state)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Translation `T a_j† T† = a_{j+1}†` applied to a site-basis vector.
fn translate(basis: &FockBasis, state: &[Complex64]) -> Vec<Complex64> {
    let m = basis.sites();
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    let mut shifted = vec![0usize; m];
    for (i, &a) in state.iter().enumerate() {
        let n = basis.state(i).as_slice();
        for j in 0..m {
            shifted[(j + 1) % m] = n[j];
        }
        out[basis.rank(&shifted)] = a;
    }
    out
}

/// Projections of `state` onto each quasi-momentum sector `K mod M`.
///
/// A flow state with total quasi-momentum `K` is a translation eigenstate
/// with eigenvalue `e^{2πiK/M}`, so `P_K = (1/M) Σ_s e^{−2πiKs/M} T^s`.
pub fn quasi_momentum_projections(basis: &FockBasis, state: &StateVector) -> Vec<StateVector> {
    let m = basis.sites();
    let mut powers = vec![state.as_slice().to_vec()];
    for s in 1..m {
        let next = translate(basis, &powers[s - 1]);
        powers.push(next);
    }
    (0..m)
        .map(|k| {
            let mut acc = StateVector::zeros(state.len());
            for (s, shifted) in powers.iter().enumerate() {
                let w = Complex64::from_polar(1.0 / m as f64, -2.0 * PI * (k * s) as f64 / m as f64);
                for (o, v) in acc.iter_mut().zip(shifted) {
                    *o += w * v;
                }
            }
            acc
        })
        .collect()
}

/// Rotates an orthonormal set spanning a (degenerate) eigenspace into
/// quasi-momentum eigenstates, sorted by sector `K mod M`.
///
/// Vectors that already carry a definite `K` are returned unchanged (only
/// reordered), so well-separated-but-numerically-close levels are never
/// mixed. Returns `(vector, K)` pairs.
pub fn resolve_quasi_momentum(basis: &FockBasis, vectors: &[StateVector]) -> Vec<(StateVector, usize)> {
    let g = vectors.len();
    if g == 0 {
        return Vec::new();
    }
    let projections: Vec<Vec<StateVector>> =
        vectors.iter().map(|v| quasi_momentum_projections(basis, v)).collect();
    let m = basis.sites();
    let mut a = DenseMatrix::zeros(g, g);
    for r in 0..g {
        for c in 0..g {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += k as f64 * vectors[r].dotc(&projections[c][k]);
            }
            a[(r, c)] = acc;
        }
    }
    let off_diag = (0..g)
        .flat_map(|r| (0..g).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|idx| a[idx].norm())
        .fold(0.0, f64::max);

    let mut out: Vec<(StateVector, usize)> = if off_diag <= 1e-8 {
        (0..g)
            .map(|i| (vectors[i].clone(), a[(i, i)].re.round().max(0.0) as usize))
            .collect()
    } else {
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        order
            .into_iter()
            .map(|col| {
                let mut v = StateVector::zeros(vectors[0].len());
                for (i, vi) in vectors.iter().enumerate() {
                    v += vi * eig.eigenvectors[(i, col)];
                }
                let k = eig.eigenvalues[col].round().max(0.0) as usize;
                (crate::spectrum::fix_phase(v), k)
            })
            .collect()
    };
    out.sort_by_key(|(_, k)| *k);
    out
}

/// Ansatz families for non-commensurate fillings `N = 3·m + r`, `r ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MottAnsatz {
    /// `(a†b†c†)^m (a† + e^{iθ} b† + e^{2iθ} c†)^r |0⟩`
    SiteSuperfluid,
    /// `(a†b†c†)^m (α† + e^{iθ} β†)^r |0⟩`
    FlowSuperposition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzOverlap {
    pub probability: f64,
    /// Optimal ansatz phase in `[0, 2π)`.
    pub phase: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Normalized ansatz vector on the site basis for the given phase.
pub fn mott_ansatz_vector(
    basis: &FockBasis,
    mott_per_site: usize,
    ansatz: MottAnsatz,
    phase: f64,
) -> Result<StateVector> {
    if basis.sites() != 3 {
        return Err(Error::Unsupported(format!(
            "Mott ansatz is defined for three sites, got {}",
            basis.sites()
        )));
    }
    let mott = 3 * mott_per_site;
    if basis.atoms() < mott {
        return Err(Error::Domain(format!(
            "{} atoms cannot hold a Mott core of {mott_per_site} per site",
            basis.atoms()
        )));
    }
    let extra = basis.atoms() - mott;
    if !(1..=2).contains(&extra) {
        return Err(Error::Domain(format!(
            "ansatz needs 1 or 2 atoms beyond the Mott core, got {extra}"
        )));
    }
    let x: Vec<Complex64> = match ansatz {
        MottAnsatz::SiteSuperfluid => (0..3)
            .map(|j| Complex64::from_polar(1.0, j as f64 * phase))
            .collect(),
        MottAnsatz::FlowSuperposition => {
            let t = FlowTransform::new(3);
            let alpha = t.creation_coefficients(0);
            let beta = t.creation_coefficients(1);
            let w = Complex64::from_polar(1.0, phase);
            alpha.iter().zip(&beta).map(|(a, b)| a + w * b).collect()
        }
    };
    // (Σ x_j a_j†)^r |0⟩ = Σ_s r!/Πs_j! Π x_j^{s_j} Π √(s_j!) |s⟩, then the Mott
    // core raises each site by m: |s⟩ → Π √((s_j+m)!/s_j!) |s+m⟩.
    let mut v = StateVector::zeros(basis.dim());
    for (i, state) in basis.states().iter().enumerate() {
        let n = state.as_slice();
        if n.iter().any(|&k| k < mott_per_site) {
            continue;
        }
        let mut amp = Complex64::new(factorial(extra), 0.0);
        for j in 0..3 {
            let s = n[j] - mott_per_site;
            amp *= x[j].powu(s as u32) * (factorial(n[j]).sqrt() / factorial(s));
        }
        v[i] = amp;
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::Domain("ansatz vanishes for this phase".into()));
    }
    Ok(v / Complex64::new(norm, 0.0))
}

/// Best overlap `max_θ |⟨ansatz(θ)|ψ⟩|²` over the ansatz phase: a 360-point
/// grid followed by golden-section refinement around the best grid point.
pub fn skewed_mott_overlap(
    state: &StateVector,
    basis: &FockBasis,
    mott_per_site: usize,
    ansatz: MottAnsatz,
) -> Result<AnsatzOverlap> {
    if state.len() != basis.dim() {
        return Err(Error::Domain("state length does not match basis".into()));
    }
    require_normalized(state, NORM_TOL)?;
    // validate once, then the closure below cannot fail on shape
    mott_ansatz_vector(basis, mott_per_site, ansatz, 0.0)?;
    let overlap = |phase: f64| -> f64 {
        mott_ansatz_vector(basis, mott_per_site, ansatz, phase)
            .map(|v| v.dotc(state).norm_sqr())
            .unwrap_or(0.0)
    };
    const GRID: usize = 360;
    let step = 2.0 * PI / GRID as f64;
    let (best_i, _) = (0..GRID)
        .map(|i| (i, overlap(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let centre = best_i as f64 * step;
    let (phase, neg) = golden_section_minimize(|t| -overlap(t), centre - step, centre + step, 1e-10);
    Ok(AnsatzOverlap {
        probability: -neg,
        phase: phase.rem_euclid(2.0 * PI),
    })
}
