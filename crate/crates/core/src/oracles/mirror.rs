//! The per-step mirror descent inequalities, with `D = H⁻¹` and
//! `x_{t+1} = argmin_{x ∈ X} g·x + ½‖x - x_t‖²_D`:
//!
//! * `g·(x_{t+1} - x) ≤ ½‖x_t - x‖²_D - ½‖x_{t+1} - x‖²_D - ½‖x_t - x_{t+1}‖²_D`
//! * `g·(x_t - x_{t+1}) ≤ ½‖g‖²_H + ½‖x_t - x_{t+1}‖²_D`
//! * their sum `g·(x_t - x) ≤ ½‖g‖²_H + ½‖x_t - x‖²_D - ½‖x_{t+1} - x‖²_D`

use crate::engine::{Regularizer, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Right-hand side minus left-hand side for each inequality, with the
/// magnitude of the terms involved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MirrorStepSlack {
    pub three_point: f64,
    pub young: f64,
    pub combined: f64,
    pub scale: f64,
}

impl MirrorStepSlack {
    pub fn holds(&self) -> bool {
        super::slack_ok(self.three_point, self.scale)
            && super::slack_ok(self.young, self.scale)
            && super::slack_ok(self.combined, self.scale)
    }

    pub fn min_slack(&self) -> f64 {
        self.three_point.min(self.young).min(self.combined)
    }
}

pub fn mirror_lemma_check(
    x_t: &Vector,
    g: &Vector,
    reg: &Regularizer,
    x_next: &Vector,
    x: &Vector,
) -> Result<MirrorStepSlack> {
    let d = x_t.len();
    for v in [g, x_next, x] {
        Error::check_dim(d, v.len())?;
    }
    let dn = |v: &Vector| reg.h_inv.quad_form(v);
    let to_x = dn(&(x_t - x))?;
    let next_to_x = dn(&(x_next - x))?;
    let step = dn(&(x_t - x_next))?;
    let g_h = reg.h.quad_form(g)?;
    let three_point = 0.5 * to_x - 0.5 * next_to_x - 0.5 * step - g.dot(&(x_next - x));
    let young = 0.5 * g_h + 0.5 * step - g.dot(&(x_t - x_next));
    let combined = 0.5 * g_h + 0.5 * to_x - 0.5 * next_to_x - g.dot(&(x_t - x));
    let scale =
        to_x + next_to_x + step + g_h + g.dot(&(x_t - x)).abs() + g.dot(&(x_next - x)).abs();
    Ok(MirrorStepSlack {
        three_point,
        young,
        combined,
        scale,
    })
}

#[derive(Clone, Debug)]
pub struct MirrorReport {
    pub steps_checked: usize,
    pub worst_step: f64,
    /// `½Σ‖g_t‖²_{H_t} + ½ΣΔ_t(x) - Σ g_t·(x_t - x)`, minimized over points.
    pub cumulative_slack: f64,
    pub holds: bool,
}

/// Checks every step of `trajectory` against each reference point, plus the
/// summed inequality `Σ g_t·(x_t - x) ≤ ½Σ‖g_t‖²_{H_t} + ½ΣΔ_t(x)`.
pub fn mirror_lemma_trajectory(trajectory: &Trajectory, points: &[Vector]) -> Result<MirrorReport> {
    let mut report = MirrorReport {
        steps_checked: 0,
        worst_step: f64::INFINITY,
        cumulative_slack: f64::INFINITY,
        holds: true,
    };
    for x in points {
        let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
        for (i, round) in trajectory.rounds.iter().enumerate() {
            let Some(reg) = &round.regularizer else {
                continue;
            };
            let next = trajectory.next_x(i);
            let s = mirror_lemma_check(&round.x, &round.gradient, reg, next, x)?;
            report.steps_checked += 1;
            report.worst_step = report.worst_step.min(s.min_slack());
            report.holds &= s.holds();
            let lin = round.gradient.dot(&(&round.x - x));
            lhs += lin;
            let delta = reg.h_inv.quad_form(&(&round.x - x))? - reg.h_inv.quad_form(&(next - x))?;
            rhs += 0.5 * round.grad_norm_sq + 0.5 * delta;
            scale += s.scale;
        }
        report.cumulative_slack = report.cumulative_slack.min(rhs - lhs);
        report.holds &= super::slack_ok(rhs - lhs, scale);
    }
    Ok(report)
}
