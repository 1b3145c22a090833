//! Hamiltonian builders for the two tunable models.

pub mod dicke;
pub mod spin_chain;

use serde::{Deserialize, Serialize};

pub use dicke::{DickeBasis, DickeParams, DickeState};
pub use spin_chain::{ChainBasis, ChainState, SpinChainParams};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, SymmetricMatrix};

/// Enumerated basis of the symmetry sector a Hamiltonian lives in.
#[derive(Debug, Clone, PartialEq)]
pub enum SectorBasis {
    Dicke(DickeBasis),
    SpinChain(ChainBasis),
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        match self {
            SectorBasis::Dicke(b) => b.dim(),
            SectorBasis::SpinChain(b) => b.dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelHamiltonian {
    pub matrix: SymmetricMatrix,
    pub basis: SectorBasis,
}

impl ModelHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Dicke Hamiltonian in the even-parity sector.
pub fn build_dicke(p: &DickeParams) -> Result<ModelHamiltonian> {
    let basis = DickeBasis::even(p.two_j, p.n_max);
    let matrix = dicke::build_on_basis(p, &basis)?;
    Ok(ModelHamiltonian {
        matrix,
        basis: SectorBasis::Dicke(basis),
    })
}

/// Spin chain Hamiltonian in the `n_up`, even-reflection sector.
pub fn build_spin_chain(p: &SpinChainParams) -> Result<ModelHamiltonian> {
    p.validate()?;
    let basis = ChainBasis::even_reflection(p.sites, p.n_up);
    let matrix = spin_chain::build_on_basis(p, &basis)?;
    Ok(ModelHamiltonian {
        matrix,
        basis: SectorBasis::SpinChain(basis),
    })
}

/// Either model, with its tuning parameter λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Dicke(DickeParams),
    SpinChain(SpinChainParams),
}

impl ModelSpec {
    pub fn lambda(&self) -> f64 {
        match self {
            ModelSpec::Dicke(p) => p.lambda,
            ModelSpec::SpinChain(p) => p.lambda,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        match *self {
            ModelSpec::Dicke(p) => ModelSpec::Dicke(p.with_lambda(lambda)),
            ModelSpec::SpinChain(p) => ModelSpec::SpinChain(p.with_lambda(lambda)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Dicke(p) => p.validate(),
            ModelSpec::SpinChain(p) => p.validate(),
        }
    }

    pub fn build(&self) -> Result<ModelHamiltonian> {
        match self {
            ModelSpec::Dicke(p) => build_dicke(p),
            ModelSpec::SpinChain(p) => build_spin_chain(p),
        }
    }

    /// Sector dimension, without building the matrix.
    pub fn sector_dim(&self) -> usize {
        match self {
            ModelSpec::Dicke(p) => DickeBasis::even(p.two_j, p.n_max).dim(),
            ModelSpec::SpinChain(p) => ChainBasis::even_reflection(p.sites, p.n_up).dim(),
        }
    }

    /// Short model name used in CSV `model` columns.
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Dicke(_) => "dicke",
            ModelSpec::SpinChain(_) => "spin_chain",
        }
    }

    /// Every fixed parameter except λ, as `key=value` pairs.
    pub fn describe(&self) -> String {
        match self {
            ModelSpec::Dicke(p) => format!(
                "dicke[j={};n_max={};omega={};omega0={}]",
                p.j(),
                p.n_max,
                p.omega,
                p.omega0
            ),
            ModelSpec::SpinChain(p) => format!(
                "spin_chain[L={};n_up={};mu={};J={}]",
                p.sites, p.n_up, p.mu, p.coupling
            ),
        }
    }
}

/// Outcome of re-diagonalizing with a larger photon cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    pub n_max: u32,
    pub n_max_extended: u32,
    pub k_states: usize,
    pub max_deviation: f64,
    pub energy_range: f64,
    pub converged: bool,
}

pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Compares the lowest `k_states` levels at `n_max` and `ceil(1.2·n_max)`.
pub fn truncation_check(p: &DickeParams, k_states: usize) -> Result<TruncationReport> {
    let (e, e_ext, n_max_extended) = cutoff_pair(p)?;
    if k_states == 0 || k_states > e.len() {
        return Err(Error::invalid(format!(
            "k_states must be in 1..={}, got {k_states}",
            e.len()
        )));
    }
    let max_deviation = e[..k_states]
        .iter()
        .zip(&e_ext[..k_states])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let energy_range = (e[k_states - 1] - e[0]).abs();
    Ok(TruncationReport {
        n_max: p.n_max,
        n_max_extended,
        k_states,
        max_deviation,
        energy_range,
        converged: max_deviation <= TRUNCATION_TOLERANCE * energy_range,
    })
}

/// The longest run of lowest levels `E_0..E_{K−1}` for which
/// [`truncation_check`] with `k_states = K` reports convergence.
pub fn converged_spectrum(p: &DickeParams) -> Result<Vec<f64>> {
    let (mut e, e_ext, _) = cutoff_pair(p)?;
    let mut worst = 0.0f64;
    let mut keep = 0;
    for k in 0..e.len() {
        worst = worst.max((e[k] - e_ext[k]).abs());
        if worst <= TRUNCATION_TOLERANCE * (e[k] - e[0]).abs() {
            keep = k + 1;
        }
    }
    e.truncate(keep);
    Ok(e)
}

/// Ascending spectra at `n_max` and at the enlarged cutoff.
fn cutoff_pair(p: &DickeParams) -> Result<(Vec<f64>, Vec<f64>, u32)> {
    p.validate()?;
    let n_max_extended = (f64::from(p.n_max) * 1.2).ceil() as u32;
    let e = eigvalsh(&build_dicke(p)?.matrix)?;
    let e_ext = eigvalsh(&build_dicke(&p.with_n_max(n_max_extended))?.matrix)?;
    Ok((e, e_ext, n_max_extended))
}
