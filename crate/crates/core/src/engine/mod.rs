//! The adaptive-regularization meta-algorithm.
//!
//! Each round receives `g_t`, accumulates `G_t = G_{t-1} + g_t g_tᵀ`, picks
//! the regularizer `H_t = argmin_H G_t • H + Φ(H)` and moves to
//! `x_{t+1} = Π_X^{H_t⁻¹}(x_t - H_t g_t)`.

mod presets;

pub use presets::{Preset, DEFAULT_EPSILON};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, rank_one_update, SymmetricMatrix, Vector};
use crate::potentials::{minimize_regularizer, RegularizerDomain, SpectralPotential};
use crate::problems::OnlineProblem;
use crate::sets::FeasibleSet;

const MEMBERSHIP_TOL: f64 = 1e-9;
const ARGMIN_MAX_ITERS: usize = 200_000;
const ARGMIN_STEP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaRegConfig {
    pub potential: SpectralPotential,
    pub domain: RegularizerDomain,
    pub feasible_set: FeasibleSet,
    pub x1: Vec<f64>,
    pub g0: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl AdaRegConfig {
    pub fn new(
        potential: SpectralPotential,
        domain: RegularizerDomain,
        feasible_set: FeasibleSet,
        x1: Vector,
        g0: SymmetricMatrix,
        epsilon: f64,
    ) -> Result<Self> {
        if let Some(d) = feasible_set.dim() {
            Error::check_dim(d, x1.len())?;
        }
        Error::check_dim(x1.len(), g0.dim())?;
        if !feasible_set.contains(&x1, MEMBERSHIP_TOL) {
            return Err(Error::Config("x1 must lie in the feasible set".into()));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        if g0.min_eigenvalue() < -1e-12 * (1.0 + g0.max_abs()) {
            return Err(Error::Config("G0 must be positive semidefinite".into()));
        }
        let d = g0.dim();
        Ok(Self {
            potential,
            domain,
            feasible_set,
            x1: x1.as_slice().to_vec(),
            g0: (0..d)
                .map(|i| (0..d).map(|j| g0.get(i, j)).collect())
                .collect(),
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.x1.len()
    }

    pub fn x1(&self) -> Vector {
        Vector::from_column_slice(&self.x1)
    }

    pub fn g0(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&self.g0).expect("G0 validated on construction")
    }
}

/// The regularizer of one round together with its inverse (the dual-norm
/// metric used for projection and for `Δ_t`).
#[derive(Clone, Debug)]
pub struct Regularizer {
    pub h: SymmetricMatrix,
    pub h_inv: SymmetricMatrix,
}

impl Regularizer {
    fn new(h: SymmetricMatrix) -> Result<Self> {
        let h_inv = h.inverse()?;
        Ok(Self { h, h_inv })
    }
}

#[derive(Clone, Debug)]
pub struct AdaRegState {
    t: usize,
    x: Vector,
    g_acc: SymmetricMatrix,
    regularizer: Option<Regularizer>,
    initial_potential: f64,
    config: AdaRegConfig,
}

/// What one call to [`AdaRegState::step`] produced.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub x_prev: Vector,
    pub x_next: Vector,
    /// `None` for deferred rounds of an isotropic run started from `G_0 = 0`.
    pub regularizer: Option<Regularizer>,
}

impl AdaRegState {
    /// Sets `t = 0`, `x = x_1` and `H_0 = argmin G_0 • H + Φ(H)`.
    ///
    /// With the isotropic domain and `tr(G_0) = 0` the regularizer is
    /// deferred until the first nonzero gradient; `Φ(H_0)` is then taken as
    /// its infimum over the domain, which is 0 for the AdaGrad and p-norm
    /// potentials.
    pub fn init(config: AdaRegConfig) -> Result<Self> {
        let g0 = config.g0();
        let (regularizer, initial_potential) =
            match minimize_regularizer(&config.potential, &g0, config.domain) {
                Ok(h) => {
                    let phi = config.potential.value(&h)?;
                    (Some(Regularizer::new(h)?), phi)
                }
                Err(Error::Singular(_))
                    if config.domain == RegularizerDomain::Isotropic && g0.trace() == 0.0 =>
                {
                    if matches!(config.potential, SpectralPotential::Ons { .. }) {
                        return Err(Error::Config(
                            "the ONS potential is unbounded below without G0 ≻ 0".into(),
                        ));
                    }
                    (None, 0.0)
                }
                Err(Error::Singular(msg)) => {
                    return Err(Error::Config(format!(
                        "G0 unusable for the initial regularizer: {msg}"
                    )))
                }
                Err(e) => return Err(e),
            };
        Ok(Self {
            t: 0,
            x: config.x1(),
            g_acc: g0,
            regularizer,
            initial_potential,
            config,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn g_acc(&self) -> &SymmetricMatrix {
        &self.g_acc
    }

    pub fn regularizer(&self) -> Option<&Regularizer> {
        self.regularizer.as_ref()
    }

    pub fn is_deferred(&self) -> bool {
        self.regularizer.is_none()
    }

    pub fn config(&self) -> &AdaRegConfig {
        &self.config
    }

    /// `Φ(H_0)`.
    pub fn initial_potential(&self) -> f64 {
        self.initial_potential
    }

    /// `G_t • H_t + Φ(H_t)` for the current round, 0 while deferred.
    pub fn potential_term(&self) -> Result<f64> {
        match &self.regularizer {
            Some(r) => Ok(frobenius_inner(&self.g_acc, &r.h)? + self.config.potential.value(&r.h)?),
            None => Ok(0.0),
        }
    }

    pub fn step(&mut self, g: &Vector) -> Result<StepOutcome> {
        Error::check_dim(self.x.len(), g.len())?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("gradient has non-finite entries"));
        }
        self.g_acc = rank_one_update(&self.g_acc, g)?;
        self.t += 1;
        let x_prev = self.x.clone();

        if self.config.domain == RegularizerDomain::Isotropic && self.g_acc.trace() == 0.0 {
            self.regularizer = None;
            return Ok(StepOutcome {
                x_next: x_prev.clone(),
                x_prev,
                regularizer: None,
            });
        }

        let h = minimize_regularizer(&self.config.potential, &self.g_acc, self.config.domain)?;
        let reg = Regularizer::new(h)?;
        let target = &self.x - reg.h.mul_vec(g)?;
        self.x = self.config.feasible_set.project(&target, &reg.h_inv)?;
        self.regularizer = Some(reg.clone());
        Ok(StepOutcome {
            x_prev,
            x_next: self.x.clone(),
            regularizer: Some(reg),
        })
    }
}

/// Solves `argmin_{x ∈ X} g·x + ½‖x - x_t‖²_{H⁻¹}` directly, by accelerated
/// projected gradient with Euclidean projections and adaptive restart.
///
/// Independent of [`FeasibleSet::project`]; the two must agree.
pub fn mirror_step_argmin(
    x_t: &Vector,
    g_t: &Vector,
    h_t: &SymmetricMatrix,
    set: &FeasibleSet,
) -> Result<Vector> {
    Error::check_dim(x_t.len(), g_t.len())?;
    Error::check_dim(x_t.len(), h_t.dim())?;
    if g_t.iter().all(|v| *v == 0.0) && set.contains(x_t, 0.0) {
        return Ok(x_t.clone());
    }
    if matches!(set, FeasibleSet::Unconstrained { .. }) {
        return Ok(x_t - h_t.mul_vec(g_t)?);
    }
    let metric = h_t.inverse()?;
    let m = metric.as_matrix();
    let lip = metric.max_eigenvalue();
    let grad = |x: &Vector| g_t + m * (x - x_t);

    let mut x = set.euclidean_project(x_t)?;
    let mut y = x.clone();
    let mut momentum = 1.0_f64;
    let mut residual = f64::INFINITY;
    for _ in 0..ARGMIN_MAX_ITERS {
        let next = set.euclidean_project(&(&y - grad(&y) / lip))?;
        // gradient mapping at y
        let step = &y - &next;
        residual = step.norm();
        if residual <= ARGMIN_STEP_TOL * (1.0 + y.norm()) {
            return Ok(next);
        }
        if step.dot(&(&next - &x)) > 0.0 {
            momentum = 1.0;
            y = x.clone();
            continue;
        }
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        y = &next + (&next - &x) * ((momentum - 1.0) / next_momentum);
        momentum = next_momentum;
        x = next;
    }
    Err(Error::Convergence {
        solver: "mirror-step argmin (accelerated projected gradient)",
        iterations: ARGMIN_MAX_ITERS,
        residual,
    })
}

/// One round of a run.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    /// `x_t`, the point played.
    pub x: Vector,
    pub gradient: Vector,
    /// `f_t(x_t)`.
    pub loss: f64,
    pub regularizer: Option<Regularizer>,
    /// `‖g_t‖²_{H_t}`.
    pub grad_norm_sq: f64,
    /// `G_t • H_t + Φ(H_t)`.
    pub potential_term: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rounds: Vec<RoundRecord>,
    /// `x_{T+1}`.
    pub final_x: Vector,
    /// `Φ(H_0)`.
    pub initial_potential: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `x_{t+1}` for a zero-based round index.
    pub fn next_x(&self, idx: usize) -> &Vector {
        self.rounds
            .get(idx + 1)
            .map(|r| &r.x)
            .unwrap_or(&self.final_x)
    }

    /// `Δ_t(x⋆) = ‖x_t - x⋆‖²_{H_t⁻¹} - ‖x_{t+1} - x⋆‖²_{H_t⁻¹}` per round.
    pub fn deltas(&self, x_ref: &Vector) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| match &self.rounds[i].regularizer {
                Some(r) => {
                    let a = r.h_inv.quad_form(&(&self.rounds[i].x - x_ref))?;
                    let b = r.h_inv.quad_form(&(self.next_x(i) - x_ref))?;
                    Ok(a - b)
                }
                None => Ok(0.0),
            })
            .collect()
    }

    pub fn iterates(&self) -> Vec<Vector> {
        self.rounds.iter().map(|r| r.x.clone()).collect()
    }
}

pub struct RunOutput {
    pub trajectory: Trajectory,
    pub state: AdaRegState,
}

/// Plays `horizon` rounds of `problem`.
pub fn run(config: AdaRegConfig, problem: &OnlineProblem, horizon: usize) -> Result<RunOutput> {
    if horizon == 0 {
        return Err(Error::validation("horizon must be at least 1"));
    }
    Error::check_dim(config.dim(), problem.dim())?;
    let mut state = AdaRegState::init(config)?;
    let initial_potential = state.initial_potential();
    let mut rounds = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let x = state.x().clone();
        let (loss, gradient) = problem.loss_and_gradient(t, &x)?;
        let outcome = state.step(&gradient)?;
        let grad_norm_sq = match &outcome.regularizer {
            Some(r) => r.h.quad_form(&gradient)?,
            None => 0.0,
        };
        rounds.push(RoundRecord {
            x,
            gradient,
            loss,
            regularizer: outcome.regularizer,
            grad_norm_sq,
            potential_term: state.potential_term()?,
        });
    }
    Ok(RunOutput {
        trajectory: Trajectory {
            rounds,
            final_x: state.x().clone(),
            initial_potential,
        },
        state,
    })
}
