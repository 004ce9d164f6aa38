//! Block Krylov eigensolver for the lowest eigenpairs of a sparse Hermitian
//! operator.
//!
//! The search space is grown by the Ritz residuals of the current block
//! (mathematically the block Lanczos space), projected with Rayleigh–Ritz,
//! and thick-restarted onto the current Ritz block when it reaches its size
//! limit. Reorthogonalization is full (classical Gram–Schmidt, twice). The
//! block is wider than the number of wanted pairs so that degenerate levels
//! up to the block width are resolved.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, StateVector};

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Converged when `‖Hx − θx‖ ≤ tol · max(max|θ|, 1)`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Extra block vectors beyond the number of wanted pairs.
    pub guard_vectors: usize,
    /// Search-space size that triggers a restart, as a multiple of the block.
    pub max_blocks: usize,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-11,
            max_iterations: 2000,
            guard_vectors: 3,
            max_blocks: 8,
            seed: 0x5eed,
        }
    }
}

/// Ritz pairs `(values, vectors)` for the `k` lowest eigenvalues, ascending.
pub fn lowest_krylov(
    h: &HermitianOperator,
    k: usize,
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let dim = h.dim();
    let block = (k + opts.guard_vectors).min(dim);
    let max_basis = (opts.max_blocks * block).max(block + 1).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<StateVector> = Vec::with_capacity(max_basis);
    let mut images: Vec<StateVector> = Vec::with_capacity(max_basis);
    let random = |rng: &mut ChaCha8Rng| -> StateVector {
        StateVector::from_fn(dim, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    };

    // projected[(r, c)] = ⟨basis_r|H|basis_c⟩, extended as vectors are added
    let mut projected = DMatrix::<Complex64>::zeros(0, 0);
    let push = |q: StateVector,
                basis: &mut Vec<StateVector>,
                images: &mut Vec<StateVector>,
                projected: &mut DMatrix<Complex64>| {
        let hq = h.apply(&q);
        let m = basis.len();
        let mut grown = projected.clone().resize(m + 1, m + 1, Complex64::new(0.0, 0.0));
        for r in 0..m {
            let v = basis[r].dotc(&hq);
            grown[(r, m)] = v;
            grown[(m, r)] = v.conj();
        }
        grown[(m, m)] = Complex64::new(q.dotc(&hq).re, 0.0);
        *projected = grown;
        basis.push(q);
        images.push(hq);
    };

    while basis.len() < block {
        let v = random(&mut rng);
        if let Some(q) = orthonormalize(v, &basis) {
            push(q, &mut basis, &mut images, &mut projected);
        }
    }

    for iteration in 1..=opts.max_iterations {
        let m = basis.len();
        let eig = projected
            .clone()
            .try_symmetric_eigen(1e-15, 10_000)
            .ok_or(Error::Convergence { iterations: iteration })?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let keep = block.min(m);

        let mut ritz_vals = Vec::with_capacity(keep);
        let mut ritz_vecs = Vec::with_capacity(keep);
        let mut ritz_imgs = Vec::with_capacity(keep);
        for &col in order.iter().take(keep) {
            let y = eig.eigenvectors.column(col);
            let mut x = StateVector::zeros(dim);
            let mut hx = StateVector::zeros(dim);
            for i in 0..m {
                x.axpy(y[i], &basis[i], Complex64::new(1.0, 0.0));
                hx.axpy(y[i], &images[i], Complex64::new(1.0, 0.0));
            }
            ritz_vals.push(eig.eigenvalues[col]);
            ritz_vecs.push(x);
            ritz_imgs.push(hx);
        }
        let scale = ritz_vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let residuals: Vec<StateVector> = ritz_vals
            .iter()
            .zip(ritz_vecs.iter().zip(&ritz_imgs))
            .map(|(&t, (x, hx))| hx - x * Complex64::new(t, 0.0))
            .collect();
        let converged = residuals
            .iter()
            .take(k)
            .all(|r| r.norm() <= opts.tol * scale);
        if converged || m == dim {
            return Ok((ritz_vals[..k].to_vec(), ritz_vecs.into_iter().take(k).collect()));
        }

        if m + block > max_basis {
            // thick restart on the Ritz block; images follow without new matvecs
            basis.clear();
            images.clear();
            projected = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                ritz_vals.len(),
                ritz_vals.iter().map(|&t| Complex64::new(t, 0.0)),
            ));
            for (x, hx) in ritz_vecs.into_iter().zip(ritz_imgs) {
                basis.push(x);
                images.push(hx);
            }
        }

        let mut added = 0;
        for r in residuals {
            if r.norm() <= opts.tol * scale * 1e-3 {
                continue;
            }
            if let Some(q) = orthonormalize(r, &basis) {
                push(q, &mut basis, &mut images, &mut projected);
                added += 1;
            }
            if basis.len() >= dim {
                break;
            }
        }
        if added == 0 && basis.len() < dim {
            let v = random(&mut rng);
            if let Some(q) = orthonormalize(v, &basis) {
                push(q, &mut basis, &mut images, &mut projected);
            }
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iterations,
    })
}

/// Projects `v` off `basis` twice and normalizes; `None` if nothing is left.
fn orthonormalize(mut v: StateVector, basis: &[StateVector]) -> Option<StateVector> {
    let start = v.norm();
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = q.dotc(&v);
            v.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
    }
    let n = v.norm();
    if n <= 1e-10 * start {
        return None;
    }
    Some(v / Complex64::new(n, 0.0))
}
