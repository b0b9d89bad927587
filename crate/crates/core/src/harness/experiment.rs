//! Building and running one experiment from a flat parameter record.

use serde::{Deserialize, Serialize};

use crate::engine::{run, Preset, RunOutput, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::linalg::{rank_one_update, SymmetricMatrix, Vector};
use crate::oracles::bounds::pnorm_optimal_eta;
use crate::oracles::{preset_bound, BoundCertificate, BoundFormula};
use crate::problems::{
    best_fixed_comparator, regret, Comparator, OnlineProblem, ProblemKind, RegretRecord,
};
use crate::sets::{FeasibleSet, NormKind};

pub const DEFAULT_P: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Ball,
    Box,
    Unconstrained,
}

impl SetKind {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Ball => "ball",
            Self::Box => "box",
            Self::Unconstrained => "unconstrained",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        match s {
            "ball" => Some(Self::Ball),
            "box" => Some(Self::Box),
            "unconstrained" => Some(Self::Unconstrained),
            _ => None,
        }
    }
}

/// Everything needed to reproduce a run. Optional parameters left as `None`
/// take the defaults of the chosen preset and problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algo: String,
    /// Defaults to the problem family matched to `algo`.
    pub problem: Option<String>,
    pub dim: usize,
    pub horizon: usize,
    pub seed: u64,
    pub set: SetKind,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            algo: "adagrad-full".into(),
            problem: None,
            dim: 10,
            horizon: 1000,
            seed: 0,
            set: SetKind::Ball,
            radius: 1.0,
            lower: -1.0,
            upper: 1.0,
            epsilon: None,
            eta: None,
            beta: None,
            p: None,
            alpha: None,
            gamma: None,
        }
    }
}

/// The problem family each preset is designed for.
pub fn matched_problem(algo: &str) -> Option<ProblemKind> {
    match algo {
        "adagrad-full" | "adagrad-diag" | "adaptive-ogd" | "pnorm" => Some(ProblemKind::AdvLinear),
        "ons-full" => Some(ProblemKind::SqLoss),
        "ons-diag" => Some(ProblemKind::SepSqLoss),
        "sc-ogd" => Some(ProblemKind::RotQuadratic),
        _ => None,
    }
}

fn reject(algo: &str, name: &str, given: Option<f64>) -> Result<()> {
    match given {
        Some(_) => Err(Error::Config(format!(
            "{algo} fixes {name}; it cannot be set"
        ))),
        None => Ok(()),
    }
}

impl ExperimentSpec {
    pub fn feasible_set(&self) -> Result<FeasibleSet> {
        match self.set {
            SetKind::Ball => FeasibleSet::centered_ball(self.dim, self.radius),
            SetKind::Box => FeasibleSet::uniform_box(self.dim, self.lower, self.upper),
            SetKind::Unconstrained => Ok(FeasibleSet::unconstrained(None)),
        }
    }

    pub fn problem_kind(&self) -> Result<ProblemKind> {
        match &self.problem {
            Some(id) => ProblemKind::from_id(id).ok_or_else(|| {
                Error::Config(format!(
                    "unknown problem {id:?}; expected one of {}",
                    ProblemKind::IDS.join(", ")
                ))
            }),
            None => matched_problem(&self.algo).ok_or_else(|| self.unknown_algo()),
        }
    }

    fn unknown_algo(&self) -> Error {
        Error::Config(format!(
            "unknown algorithm {:?}; expected one of {}",
            self.algo,
            Preset::IDS.join(", ")
        ))
    }

    /// The preset with its parameters resolved from the set and problem.
    /// For `pnorm` without `--eta`, η is still `None` here.
    pub fn preset(&self, set: &FeasibleSet, problem: &OnlineProblem) -> Result<Preset> {
        let a = self.algo.as_str();
        let c = problem.constants();
        let b = || set.diameter(NormKind::Euclidean);
        if a != "pnorm" {
            reject(a, "eta", self.eta)?;
            reject(a, "p", self.p)?;
        }
        if !matches!(a, "ons-full" | "ons-diag") {
            reject(a, "beta", self.beta)?;
        }
        if a != "sc-ogd" {
            reject(a, "alpha", self.alpha)?;
            reject(a, "gamma", self.gamma)?;
        }
        if !matches!(a, "adagrad-full" | "adagrad-diag" | "pnorm") {
            reject(a, "epsilon", self.epsilon)?;
        }
        let eps = self.epsilon.unwrap_or(DEFAULT_EPSILON);
        let declared = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| {
                Error::Config(format!(
                    "{a} needs a problem with a declared {name}; {} has none",
                    problem.name()
                ))
            })
        };
        match a {
            "adagrad-full" => Preset::adagrad_full(b()?, eps),
            "adagrad-diag" => Preset::adagrad_diag(set.diameter(NormKind::Infinity)?, eps),
            "adaptive-ogd" => Preset::adaptive_ogd(b()? / std::f64::consts::SQRT_2),
            "pnorm" => Preset::pnorm(b()?, self.p.unwrap_or(DEFAULT_P), self.eta, eps),
            "ons-full" | "ons-diag" => {
                let declared_beta = if a == "ons-full" {
                    declared("beta", c.beta)?
                } else {
                    declared("coordinate-wise beta", c.beta_coo)?
                };
                let beta = self.beta.unwrap_or(declared_beta);
                if beta > declared_beta {
                    return Err(Error::Config(format!(
                        "beta = {beta} exceeds the declared {declared_beta} of {}",
                        problem.name()
                    )));
                }
                if a == "ons-full" {
                    Preset::ons_full(beta, b()?, c.gamma)
                } else {
                    Preset::ons_diag(beta, b()?, c.gamma)
                }
            }
            "sc-ogd" => {
                let declared_alpha = declared("alpha", c.alpha.filter(|v| *v > 0.0))?;
                let alpha = self.alpha.unwrap_or(declared_alpha);
                let gamma = self.gamma.unwrap_or(c.gamma);
                if alpha > declared_alpha || gamma < c.gamma {
                    return Err(Error::Config(format!(
                        "sc-ogd needs alpha ≤ {declared_alpha} and gamma ≥ {}",
                        c.gamma
                    )));
                }
                Preset::sc_ogd(alpha, gamma)
            }
            _ => Err(self.unknown_algo()),
        }
    }
}

/// A resolved experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub set: FeasibleSet,
    pub problem: OnlineProblem,
    pub preset: Preset,
}

impl Experiment {
    pub fn build(spec: ExperimentSpec) -> Result<Self> {
        if spec.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if spec.dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        // resolve the algorithm name before doing any work
        if !Preset::IDS.contains(&spec.algo.as_str()) {
            return Err(spec.unknown_algo());
        }
        let set = spec.feasible_set()?;
        let problem = OnlineProblem::new(spec.problem_kind()?, spec.dim, spec.seed, set.clone())?;
        let preset = spec.preset(&set, &problem)?;
        Ok(Self {
            spec,
            set,
            problem,
            preset,
        })
    }

    pub fn x1(&self) -> Vector {
        self.set.center(self.spec.dim)
    }

    /// Runs the experiment. A `pnorm` preset without η is run twice: once
    /// with `η = b` to collect `G_T` and again with the tuned η.
    pub fn run(&self) -> Result<ExperimentResult> {
        let mut preset = self.preset;
        let mut tuned_eta = None;
        if let Preset::PNorm {
            b, p, eta: None, ..
        } = preset
        {
            let pilot = run(
                preset.with_eta(b)?.config(self.set.clone(), self.x1())?,
                &self.problem,
                self.spec.horizon,
            )?;
            let eta = pnorm_optimal_eta(pilot.state.g_acc(), b, p)?;
            tuned_eta = Some(eta);
            preset = preset.with_eta(eta)?;
        }
        let output = run(
            preset.config(self.set.clone(), self.x1())?,
            &self.problem,
            self.spec.horizon,
        )?;
        let comparator = best_fixed_comparator(&self.problem, self.spec.horizon, &self.set)?;
        let regret = regret(&output.trajectory, &self.problem, &comparator.point)?;

        let mut g = preset.g0(self.spec.dim);
        let mut bound_prefix = Vec::with_capacity(self.spec.horizon);
        let mut formula = None;
        for (i, round) in output.trajectory.rounds.iter().enumerate() {
            g = rank_one_update(&g, &round.gradient)?;
            match preset_bound(&preset, &g, i + 1) {
                Ok((f, v)) => {
                    formula = Some(f);
                    bound_prefix.push(Some(v));
                }
                Err(Error::Validation(_)) => bound_prefix.push(None),
                Err(e) => return Err(e),
            }
        }
        let certificate = bound_prefix
            .last()
            .copied()
            .flatten()
            .zip(formula)
            .map(|(bound, f)| BoundCertificate::new(f, bound, regret.final_regret()));
        Ok(ExperimentResult {
            preset,
            tuned_eta,
            g_final: g,
            output,
            comparator,
            regret,
            bound_prefix,
            certificate,
        })
    }
}

pub struct ExperimentResult {
    /// The preset actually run, with a tuned η filled in.
    pub preset: Preset,
    pub tuned_eta: Option<f64>,
    pub g_final: SymmetricMatrix,
    pub output: RunOutput,
    pub comparator: Comparator,
    pub regret: RegretRecord,
    /// The bound at each prefix `t`, `None` where its premises fail.
    pub bound_prefix: Vec<Option<f64>>,
    /// Final regret against the final bound; `None` if the bound does not
    /// apply at the horizon.
    pub certificate: Option<BoundCertificate>,
}

impl ExperimentResult {
    pub fn formula(&self) -> Option<BoundFormula> {
        self.certificate.as_ref().map(|c| c.formula)
    }
}

pub fn run_experiment(spec: ExperimentSpec) -> Result<ExperimentResult> {
    Experiment::build(spec)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_algorithm_runs_on_its_matched_problem() {
        for algo in Preset::IDS {
            let spec = ExperimentSpec {
                algo: algo.into(),
                dim: 3,
                horizon: 60,
                set: if algo == "ons-diag" {
                    SetKind::Box
                } else {
                    SetKind::Ball
                },
                ..Default::default()
            };
            let r = run_experiment(spec).unwrap();
            assert_eq!(r.regret.cumulative_regret.len(), 60);
            let cert = r.certificate.unwrap();
            assert!(cert.satisfied, "{algo}: {cert:?}");
        }
    }

    #[test]
    fn fixed_parameters_are_rejected() {
        let spec = ExperimentSpec {
            algo: "adagrad-full".into(),
            eta: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(Experiment::build(spec), Err(Error::Config(_))));
        let spec = ExperimentSpec {
            algo: "ons-full".into(),
            epsilon: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(Experiment::build(spec), Err(Error::Config(_))));
        let spec = ExperimentSpec {
            algo: "nope".into(),
            ..Default::default()
        };
        assert!(matches!(Experiment::build(spec), Err(Error::Config(_))));
    }

    #[test]
    fn pnorm_tuning_uses_two_passes() {
        let spec = ExperimentSpec {
            algo: "pnorm".into(),
            dim: 4,
            horizon: 100,
            ..Default::default()
        };
        let r = run_experiment(spec.clone()).unwrap();
        let eta = r.tuned_eta.unwrap();
        // oblivious losses: both passes see the same G_T, so η is optimal for the final run
        let b = 2.0;
        let again = pnorm_optimal_eta(&r.g_final, b, DEFAULT_P).unwrap();
        assert!((eta - again).abs() < 1e-10 * eta);
        let fixed = run_experiment(ExperimentSpec {
            eta: Some(eta),
            ..spec
        })
        .unwrap();
        assert_eq!(fixed.regret.final_regret(), r.regret.final_regret());
    }
}
