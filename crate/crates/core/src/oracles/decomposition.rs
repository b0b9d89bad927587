//! The master regret inequality, checked on every prefix of a run:
//!
//! `R_t(x) ≤ ½(G_t • H_t + Φ(H_t) - Φ(H_0)) + ½ Σ_{s ≤ t} Δ_s(x)`.

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::{Loss, OnlineProblem};

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub prefixes_checked: usize,
    /// Smallest `rhs - lhs` over prefixes and points.
    pub min_slack: f64,
    /// Prefix (1-based) and point index attaining `min_slack`.
    pub worst: (usize, usize),
    pub holds: bool,
}

pub fn regret_decomposition_check(
    trajectory: &Trajectory,
    problem: &OnlineProblem,
    points: &[Vector],
) -> Result<DecompositionReport> {
    if points.is_empty() {
        return Err(Error::validation("need at least one reference point"));
    }
    let n = points.len();
    let mut regret = vec![0.0; n];
    let mut delta_sum = vec![0.0; n];
    let mut scale = vec![0.0; n];
    let mut report = DecompositionReport {
        prefixes_checked: 0,
        min_slack: f64::INFINITY,
        worst: (0, 0),
        holds: true,
    };
    for (i, round) in trajectory.rounds.iter().enumerate() {
        let loss = problem.round(i + 1)?;
        let next = trajectory.next_x(i);
        let potential = 0.5 * (round.potential_term - trajectory.initial_potential);
        for (j, x) in points.iter().enumerate() {
            let fx = loss.value(x);
            regret[j] += round.loss - fx;
            scale[j] += round.loss.abs() + fx.abs();
            if let Some(reg) = &round.regularizer {
                delta_sum[j] +=
                    reg.h_inv.quad_form(&(&round.x - x))? - reg.h_inv.quad_form(&(next - x))?;
            }
            let rhs = potential + 0.5 * delta_sum[j];
            let slack = rhs - regret[j];
            if slack < report.min_slack {
                report.min_slack = slack;
                report.worst = (i + 1, j);
            }
            report.holds &= super::slack_ok(slack, scale[j] + potential.abs());
        }
        report.prefixes_checked += 1;
    }
    Ok(report)
}
