//! Relaxation after sudden quenches in the Dicke model and an NN/NNN spin
//! chain: diagonal entropy, the diagonal ensemble, and the inverse
//! participation ratio of eigenstate initial conditions.

pub mod error;
pub mod linalg;
pub mod models;
mod par;
pub mod quench;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use par::with_workers;
