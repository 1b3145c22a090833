//! Single-mode Dicke model in the even-parity sector of the truncated
//! Fock ⊗ collective-spin basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymmetricBuilder, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    /// Twice the pseudospin length (2j = N atoms).
    pub two_j: u32,
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
    /// Largest retained photon number.
    pub n_max: u32,
}

impl DickeParams {
    /// Resonant model (ω = ω0 = 1) with pseudospin `j`.
    pub fn resonant(j: f64, lambda: f64, n_max: u32) -> Result<Self> {
        let two_j = 2.0 * j;
        if !(two_j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0) {
            return Err(Error::invalid(format!("j must be a positive half-integer, got {j}")));
        }
        let p = Self {
            two_j: two_j as u32,
            omega: 1.0,
            omega0: 1.0,
            lambda,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.two_j == 0 {
            problems.push("j must be > 0".to_string());
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            problems.push(format!("omega must be > 0, got {}", self.omega));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            problems.push(format!("omega0 must be > 0, got {}", self.omega0));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            problems.push(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.n_max < 1 {
            problems.push("n_max must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Critical coupling √(ω0·ω)/2.
    pub fn lambda_c(&self) -> f64 {
        (self.omega0 * self.omega).sqrt() / 2.0
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_n_max(self, n_max: u32) -> Self {
        Self { n_max, ..self }
    }
}

/// Product state |n, m⟩ with `m_plus_j = m + j ∈ 0..=2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DickeState {
    pub n: u32,
    pub m_plus_j: u32,
}

impl DickeState {
    pub fn m(&self, two_j: u32) -> f64 {
        f64::from(self.m_plus_j) - f64::from(two_j) / 2.0
    }

    /// Eigenvalue of exp(iπ(a†a + J_z + j)).
    pub fn parity(&self) -> i32 {
        if (self.n + self.m_plus_j) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DickeBasis {
    pub two_j: u32,
    pub n_max: u32,
    pub states: Vec<DickeState>,
}

impl DickeBasis {
    /// States with n + m + j even, n-major then m ascending.
    pub fn even(two_j: u32, n_max: u32) -> Self {
        Self::with_parity(two_j, n_max, Some(1))
    }

    /// `parity = None` keeps the whole truncated product space.
    pub(crate) fn with_parity(two_j: u32, n_max: u32, parity: Option<i32>) -> Self {
        let mut states = Vec::new();
        for n in 0..=n_max {
            for m_plus_j in 0..=two_j {
                let s = DickeState { n, m_plus_j };
                if parity.map_or(true, |p| s.parity() == p) {
                    states.push(s);
                }
            }
        }
        Self {
            two_j,
            n_max,
            states,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    fn index_of(&self, s: DickeState) -> Option<usize> {
        self.states
            .binary_search_by(|t| (t.n, t.m_plus_j).cmp(&(s.n, s.m_plus_j)))
            .ok()
    }
}

pub(crate) fn build_on_basis(p: &DickeParams, basis: &DickeBasis) -> Result<SymmetricMatrix> {
    p.validate()?;
    let j = p.j();
    let coupling = p.lambda / (2.0 * j).sqrt();
    let mut h = SymmetricBuilder::new(basis.dim());
    for (idx, s) in basis.states.iter().enumerate() {
        let m = s.m(p.two_j);
        h.add(idx, idx, p.omega * f64::from(s.n) + p.omega0 * m);
        if coupling == 0.0 || s.n == basis.n_max {
            continue;
        }
        // Couple upward in n only; the builder mirrors each pair once.
        let boson = f64::from(s.n + 1).sqrt();
        for (dk, target) in [(1i64, s.m_plus_j as i64 + 1), (-1, s.m_plus_j as i64 - 1)] {
            if target < 0 || target > i64::from(p.two_j) {
                continue;
            }
            let spin = (j * (j + 1.0) - m * (m + dk as f64)).sqrt();
            let t = DickeState {
                n: s.n + 1,
                m_plus_j: target as u32,
            };
            if let Some(tidx) = basis.index_of(t) {
                h.add(tidx, idx, coupling * boson * spin);
            }
        }
    }
    h.finish()
}
