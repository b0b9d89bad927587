//! Closed-form regret bounds for each preset and certificates comparing them
//! with realized regret.

use serde::{Deserialize, Serialize};

use crate::engine::Preset;
use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_fn, FnDomain, SymmetricMatrix};

/// Below this value of `(βγb)²T/d` the logarithmic ONS bound is not implied.
pub const ONS_MIN_RATIO: f64 = 1.618_033_988_749_895;
/// Smallest horizon for the strongly convex bound.
pub const SC_MIN_HORIZON: usize = 4;
const CERT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFormula {
    /// `√2 · b · tr(G_T^{1/2})`
    AdagradFull,
    /// `√2 · b_∞ · tr(diag(G_T)^{1/2})`
    AdagradDiag,
    /// `√2 · b · √(Σ‖g_t‖²)`
    AdaptiveOgd,
    /// `b √((p+1)/p · tr(G^{1/(p+1)}) · tr(G^{p/(p+1)}))`, for the tuned η.
    #[serde(rename = "pnorm")]
    PNorm,
    /// `b²/(2η) tr(G^{1/(p+1)}) + η(p+1)/(2p) tr(G^{p/(p+1)})`
    #[serde(rename = "pnorm-fixed-eta")]
    PNormFixedEta,
    /// `(d/β)(1 + log((βγb)²T/d))`
    OnsFull,
    /// Same expression as `OnsFull`.
    OnsDiag,
    /// `(γ²/α)(8 + log T)`
    ScOgd,
}

impl BoundFormula {
    pub fn id(&self) -> &'static str {
        match self {
            Self::AdagradFull => "adagrad-full",
            Self::AdagradDiag => "adagrad-diag",
            Self::AdaptiveOgd => "adaptive-ogd",
            Self::PNorm => "pnorm",
            Self::PNormFixedEta => "pnorm-fixed-eta",
            Self::OnsFull => "ons-full",
            Self::OnsDiag => "ons-diag",
            Self::ScOgd => "sc-ogd",
        }
    }
}

/// Everything a bound may depend on. Unused fields are ignored; missing
/// required ones are a validation error.
#[derive(Clone, Debug, Default)]
pub struct BoundInputs {
    /// `G_T`, including `G_0`.
    pub g_acc: Option<SymmetricMatrix>,
    pub horizon: usize,
    pub dim: usize,
    /// Euclidean diameter, or the ℓ∞ diameter for the diagonal bound.
    pub b: Option<f64>,
    pub p: Option<f64>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.filter(|x| x.is_finite())
        .ok_or_else(|| Error::validation(format!("bound needs a finite {name}")))
}

fn trace_pow(g: &SymmetricMatrix, e: f64) -> Result<f64> {
    Ok(apply_scalar_fn(g, |x| x.powf(e), FnDomain::NonNegative)?.trace())
}

fn positive_trace_pow(g: &SymmetricMatrix, e: f64) -> Result<f64> {
    Ok(apply_scalar_fn(
        g,
        |x| if x > 0.0 { x.powf(e) } else { 0.0 },
        FnDomain::NonNegative,
    )?
    .trace())
}

pub fn regret_bound(formula: BoundFormula, inputs: &BoundInputs) -> Result<f64> {
    let g = || {
        inputs
            .g_acc
            .as_ref()
            .ok_or_else(|| Error::validation("bound needs G_T"))
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    match formula {
        BoundFormula::AdagradFull => Ok(sqrt2 * need(inputs.b, "b")? * trace_pow(g()?, 0.5)?),
        BoundFormula::AdagradDiag => {
            let diag = g()?.diagonal();
            Ok(sqrt2 * need(inputs.b, "b")? * diag.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>())
        }
        BoundFormula::AdaptiveOgd => {
            Ok(sqrt2 * need(inputs.b, "b")? * g()?.trace().max(0.0).sqrt())
        }
        BoundFormula::PNorm => {
            let p = need(inputs.p, "p")?;
            let (lo, hi) = pnorm_traces(g()?, p)?;
            Ok(need(inputs.b, "b")? * ((p + 1.0) / p * lo * hi).sqrt())
        }
        BoundFormula::PNormFixedEta => {
            let (p, eta, b) = (
                need(inputs.p, "p")?,
                need(inputs.eta, "eta")?,
                need(inputs.b, "b")?,
            );
            let (lo, hi) = pnorm_traces(g()?, p)?;
            Ok(b * b / (2.0 * eta) * lo + eta * (p + 1.0) / (2.0 * p) * hi)
        }
        BoundFormula::OnsFull | BoundFormula::OnsDiag => {
            let (beta, gamma, b) = (
                need(inputs.beta, "beta")?,
                need(inputs.gamma, "gamma")?,
                need(inputs.b, "b")?,
            );
            let d = inputs.dim as f64;
            let ratio = (beta * gamma * b).powi(2) * inputs.horizon as f64 / d;
            if !(ratio >= ONS_MIN_RATIO) {
                return Err(Error::validation(format!(
                    "ONS bound needs (βγb)²T/d ≥ {ONS_MIN_RATIO:.3}, got {ratio:e}"
                )));
            }
            Ok(d / beta * (1.0 + ratio.ln()))
        }
        BoundFormula::ScOgd => {
            let (alpha, gamma) = (need(inputs.alpha, "alpha")?, need(inputs.gamma, "gamma")?);
            if inputs.horizon < SC_MIN_HORIZON {
                return Err(Error::validation(format!(
                    "strongly convex bound needs T ≥ {SC_MIN_HORIZON}, got {}",
                    inputs.horizon
                )));
            }
            Ok(gamma * gamma / alpha * (8.0 + (inputs.horizon as f64).ln()))
        }
    }
}

/// `(tr(G^{1/(p+1)}), tr(G^{p/(p+1)}))`.
pub fn pnorm_traces(g: &SymmetricMatrix, p: f64) -> Result<(f64, f64)> {
    Ok((
        positive_trace_pow(g, 1.0 / (p + 1.0))?,
        positive_trace_pow(g, p / (p + 1.0))?,
    ))
}

/// The η minimizing the fixed-η p-norm bound:
/// `b √(p/(p+1) · tr(G^{1/(p+1)}) / tr(G^{p/(p+1)}))`.
pub fn pnorm_optimal_eta(g: &SymmetricMatrix, b: f64, p: f64) -> Result<f64> {
    let (lo, hi) = pnorm_traces(g, p)?;
    if !(hi > 0.0) {
        return Err(Error::Singular("tuning η needs a nonzero G".into()));
    }
    Ok(b * (p / (p + 1.0) * lo / hi).sqrt())
}

/// `tr(G^{1/(p+1)}) · tr(G^{p/(p+1)}) ≥ tr(G^{1/2})²`, returned as
/// `(lhs, rhs, holds)`.
pub fn trace_product_check(g: &SymmetricMatrix, p: f64) -> Result<(f64, f64, bool)> {
    let (lo, hi) = pnorm_traces(g, p)?;
    let lhs = lo * hi;
    let rhs = trace_pow(g, 0.5)?.powi(2);
    Ok((lhs, rhs, lhs >= rhs - 1e-12 * (1.0 + rhs)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub formula: BoundFormula,
    pub bound: f64,
    pub realized: f64,
    /// `bound - realized`.
    pub slack: f64,
    pub satisfied: bool,
}

impl BoundCertificate {
    pub fn new(formula: BoundFormula, bound: f64, realized: f64) -> Self {
        Self {
            formula,
            bound,
            realized,
            slack: bound - realized,
            satisfied: realized <= bound + CERT_TOL * (1.0 + bound.abs()),
        }
    }
}

/// The bound that applies to `preset` after `horizon` rounds with
/// accumulated `G_t` (including `G_0`).
pub fn preset_bound(
    preset: &Preset,
    g_acc: &SymmetricMatrix,
    horizon: usize,
) -> Result<(BoundFormula, f64)> {
    let dim = g_acc.dim();
    let mut inputs = BoundInputs {
        g_acc: Some(g_acc.clone()),
        horizon,
        dim,
        ..Default::default()
    };
    let formula = match *preset {
        Preset::AdagradFull { b, .. } => {
            inputs.b = Some(b);
            BoundFormula::AdagradFull
        }
        Preset::AdagradDiag { b_inf, .. } => {
            inputs.b = Some(b_inf);
            BoundFormula::AdagradDiag
        }
        Preset::AdaptiveOgd { c } => {
            inputs.b = Some(c * std::f64::consts::SQRT_2);
            BoundFormula::AdaptiveOgd
        }
        Preset::PNorm { b, p, eta, .. } => {
            inputs.b = Some(b);
            inputs.p = Some(p);
            inputs.eta = eta;
            if eta.is_some() {
                BoundFormula::PNormFixedEta
            } else {
                BoundFormula::PNorm
            }
        }
        Preset::OnsFull { beta, b, gamma } | Preset::OnsDiag { beta, b, gamma } => {
            inputs.beta = Some(beta);
            inputs.b = Some(b);
            inputs.gamma = Some(gamma);
            if matches!(preset, Preset::OnsFull { .. }) {
                BoundFormula::OnsFull
            } else {
                BoundFormula::OnsDiag
            }
        }
        Preset::ScOgd { alpha, gamma } => {
            inputs.alpha = Some(alpha);
            inputs.gamma = Some(gamma);
            BoundFormula::ScOgd
        }
    };
    Ok((formula, regret_bound(formula, &inputs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(g: SymmetricMatrix) -> BoundInputs {
        BoundInputs {
            dim: g.dim(),
            g_acc: Some(g),
            horizon: 1,
            ..Default::default()
        }
    }

    #[test]
    fn golden_values() {
        let g = SymmetricMatrix::from_diagonal(&[4.0, 9.0]);
        let mut i = inputs(g.clone());
        i.b = Some(2.0);
        let s2 = std::f64::consts::SQRT_2;
        assert!(
            (regret_bound(BoundFormula::AdagradFull, &i).unwrap() - s2 * 2.0 * 5.0).abs() < 1e-12
        );
        assert!(
            (regret_bound(BoundFormula::AdagradDiag, &i).unwrap() - s2 * 2.0 * 5.0).abs() < 1e-12
        );
        assert!(
            (regret_bound(BoundFormula::AdaptiveOgd, &i).unwrap() - s2 * 2.0 * 13f64.sqrt()).abs()
                < 1e-12
        );
        i.p = Some(1.0);
        // p = 1 reduces to the AdaGrad bound
        assert!((regret_bound(BoundFormula::PNorm, &i).unwrap() - s2 * 2.0 * 5.0).abs() < 1e-12);

        let o = BoundInputs {
            dim: 2,
            horizon: 100,
            b: Some(1.0),
            beta: Some(1.0),
            gamma: Some(1.0),
            ..Default::default()
        };
        let want = 2.0 * (1.0 + 50f64.ln());
        assert!((regret_bound(BoundFormula::OnsFull, &o).unwrap() - want).abs() < 1e-12);
        let sc = BoundInputs {
            horizon: 100,
            alpha: Some(0.5),
            gamma: Some(1.0),
            ..Default::default()
        };
        assert!(
            (regret_bound(BoundFormula::ScOgd, &sc).unwrap() - 2.0 * (8.0 + 100f64.ln())).abs()
                < 1e-12
        );
    }

    #[test]
    fn premises_are_enforced() {
        let o = BoundInputs {
            dim: 10,
            horizon: 10,
            b: Some(1.0),
            beta: Some(1.0),
            gamma: Some(1.0),
            ..Default::default()
        };
        assert!(regret_bound(BoundFormula::OnsFull, &o).is_err());
        let sc = BoundInputs {
            horizon: 3,
            alpha: Some(1.0),
            gamma: Some(1.0),
            ..Default::default()
        };
        assert!(regret_bound(BoundFormula::ScOgd, &sc).is_err());
        assert!(regret_bound(BoundFormula::AdagradFull, &BoundInputs::default()).is_err());
    }

    #[test]
    fn optimal_eta_minimizes_fixed_eta_bound() {
        let g = SymmetricMatrix::from_diagonal(&[0.5, 3.0, 7.0]);
        for p in [0.5, 1.0, 2.0, 8.0] {
            let eta = pnorm_optimal_eta(&g, 1.5, p).unwrap();
            let mut i = inputs(g.clone());
            i.b = Some(1.5);
            i.p = Some(p);
            let tuned = regret_bound(BoundFormula::PNorm, &i).unwrap();
            i.eta = Some(eta);
            let at_opt = regret_bound(BoundFormula::PNormFixedEta, &i).unwrap();
            assert!((tuned - at_opt).abs() < 1e-10 * tuned);
            for f in [0.5, 0.9, 1.1, 2.0] {
                i.eta = Some(eta * f);
                assert!(regret_bound(BoundFormula::PNormFixedEta, &i).unwrap() > at_opt);
            }
        }
    }

    #[test]
    fn trace_product_examples() {
        let (l, r, ok) = trace_product_check(&SymmetricMatrix::identity(3), 4.0).unwrap();
        assert!((l - 9.0).abs() < 1e-12 && (r - 9.0).abs() < 1e-12 && ok);
        let (_, _, ok) =
            trace_product_check(&SymmetricMatrix::from_diagonal(&[1.0, 100.0]), 3.0).unwrap();
        assert!(ok);
    }

    #[test]
    fn certificate_tolerance() {
        assert!(BoundCertificate::new(BoundFormula::ScOgd, 10.0, 10.0).satisfied);
        assert!(!BoundCertificate::new(BoundFormula::ScOgd, 10.0, 10.1).satisfied);
    }
}
