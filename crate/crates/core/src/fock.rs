//! Fixed-particle-number bosonic Fock space on `M` modes.
//!
//! States are ordered lexicographically *descending* on their occupation
//! tuples, so for three modes and three atoms the order starts
//! `(3,0,0), (2,1,0), (2,0,1), (1,2,0), ...`. Output files refer to states
//! by this index, so the order is part of the public contract.
//!
//! Lookup is an exact combinatorial rank (no hashing): the number of states
//! that precede a tuple is a sum of binomial coefficients, one per leading
//! mode.

use std::fmt;

use crate::error::{Error, Result};

/// Occupation numbers, one per site (or per flow mode).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(Vec<usize>);

impl OccupationState {
    pub fn new(occupations: Vec<usize>) -> Self {
        OccupationState(occupations)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for OccupationState {
    fn from(v: Vec<usize>) -> Self {
        OccupationState(v)
    }
}

impl From<&[usize]> for OccupationState {
    fn from(v: &[usize]) -> Self {
        OccupationState(v.to_vec())
    }
}

impl std::ops::Index<usize> for OccupationState {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Binomial coefficient in 128-bit arithmetic, saturating on overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of ways to place `atoms` bosons in `sites` modes.
pub fn fock_dimension(sites: usize, atoms: usize) -> u128 {
    if sites == 0 {
        return u128::from(atoms == 0);
    }
    binomial((atoms + sites - 1) as u64, (sites - 1) as u64)
}

/// The complete, ordered fixed-N Fock basis.
#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    atoms: usize,
    states: Vec<OccupationState>,
    // binom[n][k] for n <= atoms + sites, used by the ranking function
    binom: Vec<Vec<usize>>,
}

impl FockBasis {
    pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

    /// Builds the basis for `sites >= 2` and `atoms >= 1` under the default
    /// dimension cap.
    pub fn new(sites: usize, atoms: usize) -> Result<Self> {
        Self::with_cap(sites, atoms, Self::DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(sites: usize, atoms: usize, cap: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::Domain(format!("need at least 2 sites, got {sites}")));
        }
        if atoms < 1 {
            return Err(Error::Domain("need at least 1 atom".into()));
        }
        Self::sector(sites, atoms, cap)
    }

    /// Like [`FockBasis::with_cap`] but also admits the empty (N = 0) and
    /// single-mode sectors, which the flow-vector construction walks through.
    pub(crate) fn sector(sites: usize, atoms: usize, cap: usize) -> Result<Self> {
        let dimension = fock_dimension(sites, atoms);
        if dimension > cap as u128 {
            return Err(Error::DimensionCap { dimension, cap });
        }
        let n_max = atoms + sites;
        let mut binom = vec![vec![0usize; n_max + 1]; n_max + 1];
        for n in 0..=n_max {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
            }
        }
        let mut states = Vec::with_capacity(dimension as usize);
        let mut current = vec![0usize; sites];
        enumerate_descending(&mut current, 0, atoms, &mut states);
        debug_assert_eq!(states.len() as u128, dimension);
        Ok(FockBasis {
            sites,
            atoms,
            states,
            binom,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> &OccupationState {
        &self.states[index]
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    /// Position of `occupations` in the basis ordering.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.sites {
            return Err(Error::Domain(format!(
                "state has {} modes, basis has {}",
                occupations.len(),
                self.sites
            )));
        }
        let total: usize = occupations.iter().sum();
        if total != self.atoms {
            return Err(Error::Domain(format!(
                "state holds {total} atoms, basis holds {}",
                self.atoms
            )));
        }
        Ok(self.rank(occupations))
    }

    /// Rank without validation. Callers guarantee length and total.
    pub(crate) fn rank(&self, occupations: &[usize]) -> usize {
        let m = self.sites;
        let mut remaining = self.atoms;
        let mut rank = 0;
        for (j, &n) in occupations.iter().enumerate().take(m - 1) {
            // states with a larger value in slot j come first:
            // sum_{v=n+1}^{remaining} C(remaining - v + m-j-2, m-j-2)
            //   = C(remaining - n + m-j-2, m-j-1)
            let top = remaining - n + m - j - 2;
            let k = m - j - 1;
            if top >= k {
                rank += self.binom[top][k];
            }
            remaining -= n;
        }
        rank
    }
}

fn enumerate_descending(
    current: &mut [usize],
    slot: usize,
    remaining: usize,
    out: &mut Vec<OccupationState>,
) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(OccupationState(current.to_vec()));
        current[slot] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        current[slot] = v;
        enumerate_descending(current, slot + 1, remaining - v, out);
    }
    current[slot] = 0;
}
