//! Independent checks of the algebraic facts the regret analysis relies on.

pub mod argmin;
pub mod bounds;
pub mod decomposition;
pub mod ftl_btl;
pub mod mirror;

pub use argmin::{numeric_potential_argmin, ArgminOptions};
pub use bounds::{
    pnorm_optimal_eta, preset_bound, regret_bound, trace_product_check, BoundCertificate,
    BoundFormula, BoundInputs,
};
pub use decomposition::{regret_decomposition_check, DecompositionReport};
pub use ftl_btl::{ftl_btl_check, FtlBtlReport, SeparableTerm};
pub use mirror::{mirror_lemma_check, mirror_lemma_trajectory, MirrorReport, MirrorStepSlack};

/// Relative slack tolerance shared by the inequality checks.
pub const SLACK_TOL: f64 = 1e-8;

/// `true` when `slack ≥ -SLACK_TOL · (1 + scale)`.
pub fn slack_ok(slack: f64, scale: f64) -> bool {
    slack >= -SLACK_TOL * (1.0 + scale.abs())
}
