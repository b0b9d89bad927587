//! Adaptive regularization for online convex optimization.
//!
//! Each round the learner accumulates `G_t = G_{t-1} + g_t g_tᵀ`, picks the
//! regularizer `H_t = argmin_H G_t • H + Φ(H)` over a full, diagonal or
//! isotropic domain, and plays `x_{t+1} = Π^{H_t⁻¹}(x_t - H_t g_t)`.

pub mod engine;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracles;
pub mod potentials;
pub mod problems;
pub mod sampling;
pub mod sets;

pub use engine::{run, AdaRegConfig, AdaRegState, Preset, RunOutput, Trajectory};
pub use error::{Error, Result};
pub use linalg::{SymmetricMatrix, Vector};
pub use potentials::{minimize_regularizer, RegularizerDomain, SpectralPotential};
pub use problems::{OnlineProblem, ProblemKind};
pub use sets::FeasibleSet;
