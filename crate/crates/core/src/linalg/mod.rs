//! Dense real-symmetric linear algebra.

mod band;
mod eigh;
mod jacobi;
mod matrix;

pub use eigh::{eigh, eigvalsh, project_onto_eigenbasis, EigenProjection, SpectralDecomposition};
pub use jacobi::{jacobi_eigh, JACOBI_MAX_DIM};
pub use matrix::{matvec, DenseMatrix, SymmetricBuilder, SymmetricMatrix};

#[allow(unused_imports)]
pub(crate) use matrix::{dot, gemm, MatRef};
