//! Open spin-1/2 XXZ chain with nearest- and next-nearest-neighbour exchange,
//! restricted to a fixed-magnetization, even-reflection sector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricMatrix};

pub const MAX_SITES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub sites: usize,
    pub n_up: usize,
    /// Ising anisotropy μ.
    pub mu: f64,
    /// Next-nearest-neighbour strength relative to the nearest-neighbour bonds.
    pub lambda: f64,
    /// Exchange scale J.
    pub coupling: f64,
}

impl SpinChainParams {
    pub fn new(sites: usize, n_up: usize, mu: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            sites,
            n_up,
            mu,
            lambda,
            coupling: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.sites < 2 || self.sites > MAX_SITES {
            problems.push(format!("sites must be in 2..={MAX_SITES}, got {}", self.sites));
        }
        if self.n_up < 1 || self.n_up + 1 > self.sites {
            problems.push(format!(
                "n_up must be in 1..=sites-1, got {} for {} sites",
                self.n_up, self.sites
            ));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            problems.push(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            problems.push(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            problems.push(format!("coupling must be > 0, got {}", self.coupling));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

/// Bit `i` set means site `i` (0-based) is up.
pub fn reflect(bits: u64, sites: usize) -> u64 {
    bits.reverse_bits() >> (64 - sites)
}

/// A reflection orbit, labelled by its smaller member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub representative: u64,
    pub palindrome: bool,
}

impl ChainState {
    fn orbit_size(&self) -> f64 {
        if self.palindrome {
            1.0
        } else {
            2.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainBasis {
    pub sites: usize,
    pub n_up: usize,
    pub states: Vec<ChainState>,
}

impl ChainBasis {
    /// Symmetric combinations (|b⟩ + |R b⟩)/√2 and palindromes, ascending by
    /// representative.
    pub fn even_reflection(sites: usize, n_up: usize) -> Self {
        let states = bitstrings(sites, n_up)
            .filter_map(|b| {
                let r = reflect(b, sites);
                (b <= r).then_some(ChainState {
                    representative: b,
                    palindrome: b == r,
                })
            })
            .collect();
        Self {
            sites,
            n_up,
            states,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    fn index_of(&self, representative: u64) -> Option<usize> {
        self.states
            .binary_search_by(|s| s.representative.cmp(&representative))
            .ok()
    }
}

/// All `sites`-bit integers with `n_up` set bits, ascending.
pub fn bitstrings(sites: usize, n_up: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << sites;
    let first = if n_up == 0 { 0 } else { (1u64 << n_up) - 1 };
    // Gosper's hack walks combinations in increasing order.
    std::iter::successors(Some(first), move |&v| {
        if v == 0 {
            return None;
        }
        let c = v & v.wrapping_neg();
        let r = v + c;
        let next = (((r ^ v) >> 2) / c) | r;
        (next < limit).then_some(next)
    })
    .take_while(move |&v| v < limit)
}

/// Applies H to the product state `bits`, reporting each `(target, amplitude)`.
pub(crate) fn apply_hamiltonian(
    p: &SpinChainParams,
    bits: u64,
    mut emit: impl FnMut(u64, f64),
) {
    let mut diagonal = 0.0;
    for (reach, weight) in [(1usize, 1.0), (2, p.lambda)] {
        if weight == 0.0 || p.sites <= reach {
            continue;
        }
        let scale = p.coupling * weight;
        for i in 0..p.sites - reach {
            let a = (bits >> i) & 1;
            let b = (bits >> (i + reach)) & 1;
            if a == b {
                diagonal += 0.25 * p.mu * scale;
            } else {
                diagonal -= 0.25 * p.mu * scale;
                let flipped = bits ^ (1 << i) ^ (1 << (i + reach));
                emit(flipped, 0.5 * scale);
            }
        }
    }
    emit(bits, diagonal);
}

pub(crate) fn build_on_basis(p: &SpinChainParams, basis: &ChainBasis) -> Result<SymmetricMatrix> {
    p.validate()?;
    let dim = basis.dim();
    let mut full = DenseMatrix::zeros(dim, dim);
    for (col, state) in basis.states.iter().enumerate() {
        let norm_col = state.orbit_size();
        apply_hamiltonian(p, state.representative, |target, amp| {
            let rep = target.min(reflect(target, p.sites));
            let row = basis
                .index_of(rep)
                .expect("hamiltonian conserves magnetization");
            let norm_row = basis.states[row].orbit_size();
            let v = full.get(row, col) + amp * (norm_col / norm_row).sqrt();
            full.set(row, col, v);
        });
    }
    debug_assert!((0..dim).all(|i| (0..i).all(|j| {
        (full.get(i, j) - full.get(j, i)).abs() <= 1e-12 * (1.0 + full.get(i, j).abs())
    })));
    SymmetricMatrix::from_lower_fn(dim, |i, j| full.get(i, j))
}
