//! Named instantiations of the meta-algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymmetricMatrix, Vector};
use crate::potentials::{RegularizerDomain, SpectralPotential};
use crate::sets::FeasibleSet;

use super::AdaRegConfig;

/// ε used by the AdaGrad presets when none is given.
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Preset {
    /// Full-matrix AdaGrad, `η = b/√2`, `G_0 = εI`.
    AdagradFull { b: f64, epsilon: f64 },
    /// Diagonal AdaGrad, `η = b_∞/√2`.
    AdagradDiag { b_inf: f64, epsilon: f64 },
    /// Isotropic AdaGrad from `G_0 = 0`: step size `c / √(Σ‖g_s‖²)`.
    AdaptiveOgd { c: f64 },
    /// Full-matrix p-norm AdaGrad. `eta = None` means η is tuned post hoc
    /// from the final `G_T` and must be filled in before building a config.
    #[serde(rename = "pnorm")]
    PNorm {
        b: f64,
        p: f64,
        eta: Option<f64>,
        epsilon: f64,
    },
    /// Full-matrix ONS with `ε = d/(β²b²)`.
    OnsFull { beta: f64, b: f64, gamma: f64 },
    /// Diagonal ONS, same ε.
    OnsDiag { beta: f64, b: f64, gamma: f64 },
    /// Isotropic ONS for α-strongly convex losses: `β = αd/γ²`, `ε = γ²`,
    /// `G_0 = (ε/d)I`.
    ScOgd { alpha: f64, gamma: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(format!(
            "{name} must be nonnegative, got {v}"
        )))
    }
}

impl Preset {
    pub const IDS: [&'static str; 7] = [
        "adagrad-full",
        "adagrad-diag",
        "adaptive-ogd",
        "pnorm",
        "ons-full",
        "ons-diag",
        "sc-ogd",
    ];

    pub fn adagrad_full(b: f64, epsilon: f64) -> Result<Self> {
        Ok(Self::AdagradFull {
            b: positive("b", b)?,
            epsilon: nonnegative("epsilon", epsilon)?,
        })
    }

    pub fn adagrad_diag(b_inf: f64, epsilon: f64) -> Result<Self> {
        Ok(Self::AdagradDiag {
            b_inf: positive("b_inf", b_inf)?,
            epsilon: nonnegative("epsilon", epsilon)?,
        })
    }

    pub fn adaptive_ogd(c: f64) -> Result<Self> {
        Ok(Self::AdaptiveOgd {
            c: positive("c", c)?,
        })
    }

    pub fn pnorm(b: f64, p: f64, eta: Option<f64>, epsilon: f64) -> Result<Self> {
        if let Some(e) = eta {
            positive("eta", e)?;
        }
        SpectralPotential::pnorm(eta.unwrap_or(1.0), p)?;
        Ok(Self::PNorm {
            b: positive("b", b)?,
            p,
            eta,
            epsilon: nonnegative("epsilon", epsilon)?,
        })
    }

    pub fn ons_full(beta: f64, b: f64, gamma: f64) -> Result<Self> {
        Ok(Self::OnsFull {
            beta: positive("beta", beta)?,
            b: positive("b", b)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn ons_diag(beta: f64, b: f64, gamma: f64) -> Result<Self> {
        Ok(Self::OnsDiag {
            beta: positive("beta", beta)?,
            b: positive("b", b)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn sc_ogd(alpha: f64, gamma: f64) -> Result<Self> {
        Ok(Self::ScOgd {
            alpha: positive("alpha", alpha)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::AdagradFull { .. } => "adagrad-full",
            Self::AdagradDiag { .. } => "adagrad-diag",
            Self::AdaptiveOgd { .. } => "adaptive-ogd",
            Self::PNorm { .. } => "pnorm",
            Self::OnsFull { .. } => "ons-full",
            Self::OnsDiag { .. } => "ons-diag",
            Self::ScOgd { .. } => "sc-ogd",
        }
    }

    /// ε as fixed by the preset for dimension `d`.
    pub fn epsilon(&self, d: usize) -> f64 {
        let df = d as f64;
        match *self {
            Self::AdagradFull { epsilon, .. }
            | Self::AdagradDiag { epsilon, .. }
            | Self::PNorm { epsilon, .. } => epsilon,
            Self::AdaptiveOgd { .. } => 0.0,
            Self::OnsFull { beta, b, .. } | Self::OnsDiag { beta, b, .. } => {
                df / (beta * beta * b * b)
            }
            Self::ScOgd { gamma, .. } => gamma * gamma,
        }
    }

    /// β of the ONS-family presets (`αd/γ²` for `sc-ogd`).
    pub fn beta(&self, d: usize) -> Option<f64> {
        match *self {
            Self::OnsFull { beta, .. } | Self::OnsDiag { beta, .. } => Some(beta),
            Self::ScOgd { alpha, gamma } => Some(alpha * d as f64 / (gamma * gamma)),
            _ => None,
        }
    }

    pub fn potential(&self, d: usize) -> Result<SpectralPotential> {
        let s2 = std::f64::consts::SQRT_2;
        match *self {
            Self::AdagradFull { b, .. } => SpectralPotential::adagrad(b / s2),
            Self::AdagradDiag { b_inf, .. } => SpectralPotential::adagrad(b_inf / s2),
            Self::AdaptiveOgd { c } => SpectralPotential::adagrad(c / (d as f64).sqrt()),
            Self::PNorm { p, eta, .. } => match eta {
                Some(eta) => SpectralPotential::pnorm(eta, p),
                None => Err(Error::Config(
                    "p-norm preset needs η; tune it from G_T before building the config".into(),
                )),
            },
            Self::OnsFull { .. } | Self::OnsDiag { .. } | Self::ScOgd { .. } => {
                SpectralPotential::ons(self.beta(d).expect("ONS family has β"))
            }
        }
    }

    pub fn domain(&self) -> RegularizerDomain {
        match self {
            Self::AdagradFull { .. } | Self::PNorm { .. } | Self::OnsFull { .. } => {
                RegularizerDomain::Full
            }
            Self::AdagradDiag { .. } | Self::OnsDiag { .. } => RegularizerDomain::Diagonal,
            Self::AdaptiveOgd { .. } | Self::ScOgd { .. } => RegularizerDomain::Isotropic,
        }
    }

    pub fn g0(&self, d: usize) -> SymmetricMatrix {
        let eps = self.epsilon(d);
        match self {
            Self::ScOgd { .. } => SymmetricMatrix::scaled_identity(d, eps / d as f64),
            _ => SymmetricMatrix::scaled_identity(d, eps),
        }
    }

    pub fn config(&self, feasible_set: FeasibleSet, x1: Vector) -> Result<AdaRegConfig> {
        let d = x1.len();
        AdaRegConfig::new(
            self.potential(d)?,
            self.domain(),
            feasible_set,
            x1,
            self.g0(d),
            self.epsilon(d),
        )
    }

    /// The same preset with η filled in (p-norm only).
    pub fn with_eta(self, new_eta: f64) -> Result<Self> {
        match self {
            Self::PNorm { b, p, epsilon, .. } => Self::pnorm(b, p, Some(new_eta), epsilon),
            other => Err(Error::Config(format!("{} has no free η", other.id()))),
        }
    }
}
