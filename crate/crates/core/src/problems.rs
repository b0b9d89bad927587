//! Online loss sequences with declared curvature constants, the best fixed
//! comparator in hindsight, regret bookkeeping and sampled checks of the
//! curvature inequalities.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{SymmetricMatrix, Vector};
use crate::sampling;
use crate::sets::FeasibleSet;

/// Pairs sampled on construction to validate the declared constants.
pub const VALIDATION_PAIRS: usize = 1000;
const CHECK_TOL: f64 = 1e-9;
const COMPARATOR_MAX_ITERS: usize = 100_000;
const COMPARATOR_STEP_TOL: f64 = 1e-13;
const DEFAULT_MAX_ROUNDS: usize = 100_000_000;

pub trait Loss {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
}

/// A loss given by closures, mostly for tests.
pub struct FnLoss<F, G> {
    pub dim: usize,
    pub f: F,
    pub grad: G,
}

impl<F, G> Loss for FnLoss<F, G>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }
}

/// The loss revealed on one round.
#[derive(Clone, Debug)]
pub enum RoundLoss {
    /// `g · x`
    Linear { g: Vector },
    /// `½ (x - z)ᵀ A (x - z)`
    Quadratic { a: SymmetricMatrix, z: Vector },
    /// `(w · x - y)²`
    Squared { w: Vector, y: f64 },
    /// `Σ_i (w_i x_i - y_i)²`
    Separable { w: Vector, y: Vector },
}

impl Loss for RoundLoss {
    fn dim(&self) -> usize {
        match self {
            Self::Linear { g } => g.len(),
            Self::Quadratic { z, .. } => z.len(),
            Self::Squared { w, .. } | Self::Separable { w, .. } => w.len(),
        }
    }

    fn value(&self, x: &Vector) -> f64 {
        match self {
            Self::Linear { g } => g.dot(x),
            Self::Quadratic { a, z } => {
                let r = x - z;
                0.5 * r.dot(&(a.as_matrix() * &r))
            }
            Self::Squared { w, y } => (w.dot(x) - y).powi(2),
            Self::Separable { w, y } => w.component_mul(x).zip_map(y, |a, b| (a - b).powi(2)).sum(),
        }
    }

    fn gradient(&self, x: &Vector) -> Vector {
        match self {
            Self::Linear { g } => g.clone(),
            Self::Quadratic { a, z } => a.as_matrix() * (x - z),
            Self::Squared { w, y } => w * (2.0 * (w.dot(x) - y)),
            Self::Separable { w, y } => (w.component_mul(x) - y).component_mul(w) * 2.0,
        }
    }
}

impl RoundLoss {
    /// Adds this loss to a running sum.
    pub fn add_to(&self, agg: &mut QuadraticAggregate) {
        match self {
            Self::Linear { g } => agg.lin -= g,
            Self::Quadratic { a, z } => {
                let az = a.as_matrix() * z;
                agg.quad += a.as_matrix();
                agg.constant += 0.5 * z.dot(&az);
                agg.lin += az;
            }
            Self::Squared { w, y } => {
                agg.quad += w * w.transpose() * 2.0;
                agg.lin += w * (2.0 * y);
                agg.constant += y * y;
            }
            Self::Separable { w, y } => {
                agg.quad += DMatrix::from_diagonal(&w.component_mul(w)) * 2.0;
                agg.lin += w.component_mul(y) * 2.0;
                agg.constant += y.dot(y);
            }
        }
        agg.grad_scale += agg_scale(self);
    }
}

fn agg_scale(l: &RoundLoss) -> f64 {
    match l {
        RoundLoss::Linear { g } => g.norm(),
        RoundLoss::Quadratic { a, .. } => a.max_abs(),
        RoundLoss::Squared { w, .. } | RoundLoss::Separable { w, .. } => w.norm_squared(),
    }
}

/// `F(x) = ½ xᵀQx - qᵀx + c`, the sum of quadratic round losses.
#[derive(Clone, Debug)]
pub struct QuadraticAggregate {
    pub quad: DMatrix<f64>,
    pub lin: Vector,
    pub constant: f64,
    grad_scale: f64,
}

impl QuadraticAggregate {
    pub fn new(dim: usize) -> Self {
        Self {
            quad: DMatrix::zeros(dim, dim),
            lin: Vector::zeros(dim),
            constant: 0.0,
            grad_scale: 0.0,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.quad * x)) - self.lin.dot(x) + self.constant
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        &self.quad * x - &self.lin
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Linear losses with biased random signs on sparse coordinates.
    AdvLinear,
    /// `½(x - z_t)ᵀA_t(x - z_t)` with randomly rotated `A_t`; strongly convex.
    RotQuadratic,
    /// `(w_t · x - y_t)²` with unit `w_t` and sign noise; exp-concave on bounded sets.
    SqLoss,
    /// `Σ_i (w_{t,i} x_i - y_{t,i})²`; coordinate-wise exp-concave.
    SepSqLoss,
}

impl ProblemKind {
    pub const IDS: [&'static str; 4] = ["adv-linear", "rot-quadratic", "sq-loss", "sep-sq-loss"];

    pub fn id(&self) -> &'static str {
        match self {
            Self::AdvLinear => "adv-linear",
            Self::RotQuadratic => "rot-quadratic",
            Self::SqLoss => "sq-loss",
            Self::SepSqLoss => "sep-sq-loss",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "adv-linear" => Some(Self::AdvLinear),
            "rot-quadratic" => Some(Self::RotQuadratic),
            "sq-loss" => Some(Self::SqLoss),
            "sep-sq-loss" => Some(Self::SepSqLoss),
            _ => None,
        }
    }
}

/// Declared constants: Lipschitz bound γ and optional curvature constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub beta_coo: Option<f64>,
}

#[derive(Clone, Debug)]
enum FamilyParams {
    Linear {
        active_prob: Vec<f64>,
        plus_prob: Vec<f64>,
    },
    Quadratic {
        alpha: f64,
        alpha_max: f64,
        target_center: Vector,
        target_spread: f64,
    },
    Squared {
        theta: Vector,
        noise: f64,
    },
    Separable {
        theta: Vector,
        noise: f64,
    },
}

/// A seeded online problem. Round `t` is generated from its own RNG stream,
/// so any round can be reproduced without replaying the sequence.
#[derive(Clone, Debug)]
pub struct OnlineProblem {
    kind: ProblemKind,
    dim: usize,
    seed: u64,
    domain: FeasibleSet,
    constants: ProblemConstants,
    params: FamilyParams,
    max_rounds: usize,
}

impl OnlineProblem {
    /// Builds a problem over `domain` and validates its declared constants
    /// with [`VALIDATION_PAIRS`] sampled pairs.
    pub fn new(kind: ProblemKind, dim: usize, seed: u64, domain: FeasibleSet) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("problem dimension must be positive"));
        }
        if let Some(d) = domain.dim() {
            Error::check_dim(d, dim)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let (params, constants) = match kind {
            ProblemKind::AdvLinear => {
                let active_prob = (0..dim).map(|i| 1.0 / ((i + 1) as f64).sqrt()).collect();
                let plus_prob = (0..dim)
                    .map(|_| 0.5 + rng.random_range(-0.3..0.3))
                    .collect();
                (
                    FamilyParams::Linear {
                        active_prob,
                        plus_prob,
                    },
                    ProblemConstants {
                        gamma: 1.0,
                        alpha: Some(0.0),
                        beta: None,
                        beta_coo: None,
                    },
                )
            }
            ProblemKind::RotQuadratic => {
                let r = domain.max_norm()?;
                let (alpha, alpha_max) = (0.5, 2.0);
                let target_center = sampling::random_unit_vector(&mut rng, dim) * (0.7 * r);
                let target_spread = 0.5 * r;
                let z_max = 0.7 * r + target_spread;
                (
                    FamilyParams::Quadratic {
                        alpha,
                        alpha_max,
                        target_center,
                        target_spread,
                    },
                    ProblemConstants {
                        gamma: alpha_max * (r + z_max),
                        alpha: Some(alpha),
                        beta: None,
                        beta_coo: None,
                    },
                )
            }
            ProblemKind::SqLoss => {
                // Noise-dominated targets keep E[g gᵀ] as large as the declared
                // β allows, which shortens the phase where G_0 = εI dominates.
                let r = domain.max_norm()?;
                let theta = sampling::random_unit_vector(&mut rng, dim) * (0.1 * r);
                let noise = 0.9 * r;
                // |w·x - y| ≤ ‖w‖‖x‖ + ‖θ‖ + noise with ‖w‖ = 1
                let a_max = r + 0.1 * r + noise;
                (
                    FamilyParams::Squared { theta, noise },
                    ProblemConstants {
                        gamma: 2.0 * a_max,
                        alpha: None,
                        beta: Some(1.0 / (2.0 * a_max * a_max)),
                        beta_coo: None,
                    },
                )
            }
            ProblemKind::SepSqLoss => {
                let xmax = domain.max_abs_coordinates()?;
                let theta = Vector::from_iterator(
                    dim,
                    xmax.iter().map(|m| 0.8 * m * rng.random_range(-1.0..1.0)),
                );
                let noise = 0.2;
                // per coordinate |w_i x_i - y_i| ≤ m_i + 0.8 m_i + noise with |w_i| ≤ 1
                let a: Vec<f64> = xmax.iter().map(|m| 1.8 * m + noise).collect();
                let a_max = a.iter().cloned().fold(0.0, f64::max);
                let gamma = 2.0 * a.iter().map(|v| v * v).sum::<f64>().sqrt();
                (
                    FamilyParams::Separable { theta, noise },
                    ProblemConstants {
                        gamma,
                        alpha: None,
                        beta: None,
                        beta_coo: Some(1.0 / (2.0 * a_max * a_max)),
                    },
                )
            }
        };
        let problem = Self {
            kind,
            dim,
            seed,
            domain,
            constants,
            params,
            max_rounds: DEFAULT_MAX_ROUNDS,
        };
        problem.validate_constants()?;
        Ok(problem)
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.id()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> &FeasibleSet {
        &self.domain
    }

    pub fn constants(&self) -> ProblemConstants {
        self.constants
    }

    fn round_rng(&self, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        rng
    }

    /// The loss of round `t ≥ 1`.
    pub fn round(&self, t: usize) -> Result<RoundLoss> {
        if t == 0 || t > self.max_rounds {
            return Err(Error::RoundOutOfRange {
                round: t,
                max: self.max_rounds,
            });
        }
        let mut rng = self.round_rng(t);
        let d = self.dim;
        Ok(match &self.params {
            FamilyParams::Linear {
                active_prob,
                plus_prob,
            } => {
                let scale = 1.0 / (d as f64).sqrt();
                let g = Vector::from_fn(d, |i, _| {
                    if rng.random_bool(active_prob[i]) {
                        if rng.random_bool(plus_prob[i]) {
                            scale
                        } else {
                            -scale
                        }
                    } else {
                        0.0
                    }
                });
                RoundLoss::Linear { g }
            }
            FamilyParams::Quadratic {
                alpha,
                alpha_max,
                target_center,
                target_spread,
            } => {
                let eigs: Vec<f64> = (0..d)
                    .map(|_| rng.random_range(*alpha..=*alpha_max))
                    .collect();
                let a = sampling::with_spectrum(&mut rng, &eigs);
                let u = sampling::random_unit_vector(&mut rng, d);
                let rad = target_spread * rng.random::<f64>().powf(1.0 / d as f64);
                RoundLoss::Quadratic {
                    a,
                    z: target_center + u * rad,
                }
            }
            FamilyParams::Squared { theta, noise } => {
                let w = sampling::random_unit_vector(&mut rng, d);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let y = w.dot(theta) + sign * noise;
                RoundLoss::Squared { w, y }
            }
            FamilyParams::Separable { theta, noise } => {
                let w = Vector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
                let y = Vector::from_fn(d, |i, _| {
                    w[i] * theta[i] + rng.random_range(-*noise..=*noise)
                });
                RoundLoss::Separable { w, y }
            }
        })
    }

    pub fn loss_and_gradient(&self, t: usize, x: &Vector) -> Result<(f64, Vector)> {
        Error::check_dim(self.dim, x.len())?;
        let loss = self.round(t)?;
        Ok((loss.value(x), loss.gradient(x)))
    }

    fn validate_constants(&self) -> Result<()> {
        let checks: [(&str, Option<f64>, Curvature); 3] = [
            ("alpha", self.constants.alpha, Curvature::StronglyConvex),
            ("beta", self.constants.beta, Curvature::ExpConcave),
            (
                "beta_coo",
                self.constants.beta_coo,
                Curvature::CoordinateExpConcave,
            ),
        ];
        if matches!(
            self.domain,
            FeasibleSet::Unconstrained {
                declared_euclidean_diameter: None
            }
        ) {
            return Ok(());
        }
        let rounds = 10;
        for (name, value, curvature) in checks {
            let Some(c) = value else { continue };
            for t in 1..=rounds {
                let loss = self.round(t)?;
                let ok = check_curvature(
                    &loss,
                    c,
                    &self.domain,
                    VALIDATION_PAIRS / rounds,
                    self.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    curvature,
                )?;
                if !ok {
                    return Err(Error::validation(format!(
                        "declared {name} = {c} violated by {} round {t}",
                        self.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Curvature {
    ExpConcave,
    CoordinateExpConcave,
    StronglyConvex,
}

fn check_curvature(
    f: &impl Loss,
    c: f64,
    set: &FeasibleSet,
    n_samples: usize,
    seed: u64,
    curvature: Curvature,
) -> Result<bool> {
    let d = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let x = set.sample(&mut rng, d)?;
        let y = set.sample(&mut rng, d)?;
        let (fx, fy) = (f.value(&x), f.value(&y));
        let g = f.gradient(&x);
        let diff = &x - &y;
        let lin = g.dot(&diff);
        let curv = match curvature {
            Curvature::ExpConcave => 0.5 * c * lin * lin,
            Curvature::CoordinateExpConcave => {
                0.5 * c * g.component_mul(&g).dot(&diff.component_mul(&diff))
            }
            Curvature::StronglyConvex => 0.5 * c * diff.norm_squared(),
        };
        let scale = 1.0 + fx.abs() + fy.abs() + lin.abs();
        if fx - fy > lin - curv + CHECK_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Samples pairs from `set` and checks
/// `f(x) - f(y) ≤ ∇f(x)·(x-y) - (β/2)(∇f(x)·(x-y))²`.
pub fn check_exp_concave(
    f: &impl Loss,
    beta: f64,
    set: &FeasibleSet,
    n_samples: usize,
    seed: u64,
) -> Result<bool> {
    check_curvature(f, beta, set, n_samples, seed, Curvature::ExpConcave)
}

/// Coordinate-wise variant: the curvature term is `(β/2) ∇f(x)² · (x-y)²`
/// with entrywise squares.
pub fn check_coordinatewise_exp_concave(
    f: &impl Loss,
    beta: f64,
    set: &FeasibleSet,
    n_samples: usize,
    seed: u64,
) -> Result<bool> {
    check_curvature(
        f,
        beta,
        set,
        n_samples,
        seed,
        Curvature::CoordinateExpConcave,
    )
}

/// `f(x) - f(y) ≤ ∇f(x)·(x-y) - (α/2)‖x-y‖²`.
pub fn check_strongly_convex(
    f: &impl Loss,
    alpha: f64,
    set: &FeasibleSet,
    n_samples: usize,
    seed: u64,
) -> Result<bool> {
    check_curvature(f, alpha, set, n_samples, seed, Curvature::StronglyConvex)
}

#[derive(Clone, Debug)]
pub struct Comparator {
    pub point: Vector,
    /// `Σ_t f_t(x⋆)` as evaluated by the aggregate quadratic.
    pub objective: f64,
    /// The cumulative loss is constant over the set; `point` is the set center.
    pub flat: bool,
}

/// Sum of the first `horizon` losses.
pub fn aggregate(problem: &OnlineProblem, horizon: usize) -> Result<QuadraticAggregate> {
    let mut agg = QuadraticAggregate::new(problem.dim());
    for t in 1..=horizon {
        problem.round(t)?.add_to(&mut agg);
    }
    Ok(agg)
}

/// `x⋆ = argmin_{x ∈ set} Σ_{t ≤ T} f_t(x)`.
pub fn best_fixed_comparator(
    problem: &OnlineProblem,
    horizon: usize,
    set: &FeasibleSet,
) -> Result<Comparator> {
    minimize_aggregate(&aggregate(problem, horizon)?, set)
}

/// Minimizes a convex quadratic aggregate over `set`: closed forms for linear
/// objectives and interior minimizers, accelerated projected gradient otherwise.
pub fn minimize_aggregate(agg: &QuadraticAggregate, set: &FeasibleSet) -> Result<Comparator> {
    let d = agg.lin.len();
    let done = |point: Vector, flat: bool| Comparator {
        objective: agg.value(&point),
        point,
        flat,
    };
    if agg.quad.amax() == 0.0 {
        if agg.lin.norm() <= 1e-12 * agg.grad_scale.max(1.0) {
            return Ok(done(set.center(d), true));
        }
        return Ok(done(set.linear_minimizer(&-&agg.lin)?, false));
    }
    let q = SymmetricMatrix::new(agg.quad.clone())?;
    let eig = q.eig();
    let lip = eig.eigenvalues.max();
    if eig.eigenvalues.min() > 1e-12 * lip {
        if let Some(chol) = agg.quad.clone().cholesky() {
            let x = chol.solve(&agg.lin);
            if set.contains(&x, 0.0) {
                return Ok(done(x, false));
            }
        }
    }
    if matches!(set, FeasibleSet::Unconstrained { .. }) {
        return Err(Error::Unbounded(
            "singular quadratic objective over an unconstrained set".into(),
        ));
    }
    let mut x = set.center(d);
    let mut y = x.clone();
    let mut momentum = 1.0_f64;
    let mut residual = f64::INFINITY;
    for _ in 0..COMPARATOR_MAX_ITERS {
        let next = set.euclidean_project(&(&y - agg.gradient(&y) / lip))?;
        // gradient mapping at y
        let step = &y - &next;
        residual = step.norm();
        if residual <= COMPARATOR_STEP_TOL * (1.0 + y.norm()) {
            return Ok(done(next, false));
        }
        if step.dot(&(&next - &x)) > 0.0 {
            momentum = 1.0;
            y = x.clone();
            continue;
        }
        let nm = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        y = &next + (&next - &x) * ((momentum - 1.0) / nm);
        momentum = nm;
        x = next;
    }
    Err(Error::Convergence {
        solver: "comparator (accelerated projected gradient)",
        iterations: COMPARATOR_MAX_ITERS,
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegretRecord {
    /// `f_t(x_t)`.
    pub losses: Vec<f64>,
    pub comparator: Vec<f64>,
    /// `f_t(x⋆)`.
    pub comparator_losses: Vec<f64>,
    /// `R_t = Σ_{s ≤ t} f_s(x_s) - f_s(x⋆)`.
    pub cumulative_regret: Vec<f64>,
    /// `Δ_t(x⋆)`.
    pub deltas: Vec<f64>,
}

impl RegretRecord {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// Regret of a trajectory against a fixed `x⋆`, with the `Δ_t(x⋆)` terms
/// computed from the trajectory's regularizers.
pub fn regret(
    trajectory: &Trajectory,
    problem: &OnlineProblem,
    x_star: &Vector,
) -> Result<RegretRecord> {
    let mut losses = Vec::with_capacity(trajectory.len());
    let mut comparator_losses = Vec::with_capacity(trajectory.len());
    let mut cumulative_regret = Vec::with_capacity(trajectory.len());
    let mut total = 0.0;
    for (i, round) in trajectory.rounds.iter().enumerate() {
        let loss = problem.round(i + 1)?;
        let played = loss.value(&round.x);
        let reference = loss.value(x_star);
        total += played - reference;
        losses.push(played);
        comparator_losses.push(reference);
        cumulative_regret.push(total);
    }
    Ok(RegretRecord {
        losses,
        comparator: x_star.as_slice().to_vec(),
        comparator_losses,
        cumulative_regret,
        deltas: trajectory.deltas(x_star)?,
    })
}

/// Uniform average of the played iterates `x_1..x_T`.
pub fn online_to_batch(trajectory: &Trajectory) -> Result<Vector> {
    let first = trajectory
        .rounds
        .first()
        .ok_or_else(|| Error::validation("online-to-batch needs a nonempty trajectory"))?;
    let mut sum = Vector::zeros(first.x.len());
    for r in &trajectory.rounds {
        sum += &r.x;
    }
    Ok(sum / trajectory.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Preset};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn all_problems(d: usize, seed: u64) -> Vec<OnlineProblem> {
        let ball = FeasibleSet::centered_ball(d, 1.0).unwrap();
        let cube = FeasibleSet::uniform_box(d, -1.0, 1.0).unwrap();
        vec![
            OnlineProblem::new(ProblemKind::AdvLinear, d, seed, ball.clone()).unwrap(),
            OnlineProblem::new(ProblemKind::RotQuadratic, d, seed, ball.clone()).unwrap(),
            OnlineProblem::new(ProblemKind::SqLoss, d, seed, ball).unwrap(),
            OnlineProblem::new(ProblemKind::SepSqLoss, d, seed, cube).unwrap(),
        ]
    }

    #[test]
    fn direct_evaluations() {
        let lin = RoundLoss::Linear { g: v(&[1.0, -1.0]) };
        let x = v(&[2.0, 3.0]);
        assert_eq!(lin.value(&x), -1.0);
        assert_eq!(lin.gradient(&x), v(&[1.0, -1.0]));
        let z = v(&[0.5, -0.25]);
        let quad = RoundLoss::Quadratic {
            a: SymmetricMatrix::identity(2),
            z: z.clone(),
        };
        assert_eq!(quad.value(&z), 0.0);
        assert_eq!(quad.gradient(&z), Vector::zeros(2));
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for p in all_problems(4, 12) {
            for t in 1..=100 {
                let loss = p.round(t).unwrap();
                let x = p.domain().sample(&mut rng, 4).unwrap();
                let g = loss.gradient(&x);
                let h = 1e-5;
                for i in 0..4 {
                    let mut e = Vector::zeros(4);
                    e[i] = h;
                    let fd = (loss.value(&(&x + &e)) - loss.value(&(&x - &e))) / (2.0 * h);
                    assert!(
                        (fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()),
                        "{} t={t}: {fd} vs {}",
                        p.name(),
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn gradients_respect_declared_lipschitz_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in all_problems(5, 3) {
            let gamma = p.constants().gamma;
            for t in 1..=200 {
                let x = p.domain().sample(&mut rng, 5).unwrap();
                let (_, g) = p.loss_and_gradient(t, &x).unwrap();
                assert!(
                    g.norm() <= gamma + 1e-9,
                    "{}: {} > {gamma}",
                    p.name(),
                    g.norm()
                );
            }
        }
    }

    #[test]
    fn declared_curvature_constants_hold() {
        for p in all_problems(3, 99) {
            let c = p.constants();
            for t in 1..=20 {
                let loss = p.round(t).unwrap();
                if let Some(b) = c.beta {
                    assert!(check_exp_concave(&loss, b, p.domain(), 1000, t as u64).unwrap());
                }
                if let Some(b) = c.beta_coo {
                    assert!(
                        check_coordinatewise_exp_concave(&loss, b, p.domain(), 1000, t as u64)
                            .unwrap()
                    );
                }
                if let Some(a) = c.alpha {
                    assert!(check_strongly_convex(&loss, a, p.domain(), 1000, t as u64).unwrap());
                }
            }
        }
    }

    #[test]
    fn checker_examples() {
        let sq = FnLoss {
            dim: 1,
            f: |x: &Vector| x[0] * x[0],
            grad: |x: &Vector| x * 2.0,
        };
        let interval = FeasibleSet::uniform_box(1, -1.0, 1.0).unwrap();
        assert!(check_exp_concave(&sq, 0.5, &interval, 1000, 1).unwrap());
        assert!(!check_exp_concave(&sq, 0.6, &interval, 1000, 1).unwrap());
        assert!(check_strongly_convex(&sq, 2.0, &interval, 1000, 1).unwrap());
        assert!(!check_strongly_convex(&sq, 3.0, &interval, 1000, 1).unwrap());
        let lin = RoundLoss::Linear { g: v(&[0.3]) };
        assert!(check_strongly_convex(&lin, 0.0, &interval, 1000, 1).unwrap());
        // (x, y) = (1, 0): 1 ≤ 2 - 1 holds with equality
        let (fx, fy, lin_term) = (1.0, 0.0, 2.0);
        assert_eq!(fx - fy, lin_term - 0.5 * 0.5 * lin_term * lin_term);
    }

    #[test]
    fn rounds_are_reproducible_and_bounded() {
        let p = &all_problems(3, 5)[2];
        let a = p.loss_and_gradient(17, &v(&[0.1, 0.2, 0.3])).unwrap();
        let b = p.loss_and_gradient(17, &v(&[0.1, 0.2, 0.3])).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!(matches!(p.round(0), Err(Error::RoundOutOfRange { .. })));
        let capped = p.clone().with_max_rounds(10);
        assert!(capped.round(11).is_err());
    }

    #[test]
    fn comparator_closed_forms() {
        let mut agg = QuadraticAggregate::new(1);
        for z in [1.0, 3.0] {
            RoundLoss::Quadratic {
                a: SymmetricMatrix::identity(1),
                z: v(&[z]),
            }
            .add_to(&mut agg);
        }
        let c = minimize_aggregate(&agg, &FeasibleSet::unconstrained(None)).unwrap();
        assert!((c.point[0] - 2.0).abs() < 1e-14);

        let mut agg = QuadraticAggregate::new(1);
        for g in [1.0, -1.0] {
            RoundLoss::Linear { g: v(&[g]) }.add_to(&mut agg);
        }
        let c = minimize_aggregate(&agg, &FeasibleSet::uniform_box(1, -1.0, 1.0).unwrap()).unwrap();
        assert!(c.flat);
        assert_eq!(c.point[0], 0.0);
    }

    #[test]
    fn comparator_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..6 {
            let d = 2;
            let set = if seed % 2 == 0 {
                FeasibleSet::centered_ball(d, 1.0).unwrap()
            } else {
                FeasibleSet::uniform_box(d, -1.0, 1.0).unwrap()
            };
            let mut agg = QuadraticAggregate::new(d);
            for _ in 0..5 {
                let loss = if rng.random_bool(0.5) {
                    RoundLoss::Linear {
                        g: sampling::random_vector(&mut rng, d),
                    }
                } else {
                    RoundLoss::Squared {
                        w: sampling::random_vector(&mut rng, d),
                        y: 3.0 * sampling::normal(&mut rng),
                    }
                };
                loss.add_to(&mut agg);
            }
            let c = minimize_aggregate(&agg, &set).unwrap();
            let mut best = f64::INFINITY;
            let n = 2000;
            for i in 0..=n {
                for j in 0..=n {
                    let p = v(&[
                        -1.0 + 2.0 * i as f64 / n as f64,
                        -1.0 + 2.0 * j as f64 / n as f64,
                    ]);
                    if set.contains(&p, 0.0) {
                        best = best.min(agg.value(&p));
                    }
                }
            }
            assert!(c.objective <= best + 1e-3, "{} vs {best}", c.objective);
            assert!(c.objective >= best - 1e-3 * (1.0 + best.abs()));
        }
    }

    #[test]
    fn comparator_satisfies_variational_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in all_problems(4, 8) {
            let agg = aggregate(&p, 200).unwrap();
            let c = minimize_aggregate(&agg, p.domain()).unwrap();
            let g = agg.gradient(&c.point);
            for _ in 0..100 {
                let y = p.domain().sample(&mut rng, 4).unwrap();
                assert!(g.dot(&(&y - &c.point)) >= -1e-6, "{}", p.name());
            }
        }
    }

    #[test]
    fn regret_bookkeeping() {
        let d = 3;
        let set = FeasibleSet::centered_ball(d, 1.0).unwrap();
        let p = OnlineProblem::new(ProblemKind::AdvLinear, d, 1, set.clone()).unwrap();
        let cfg = Preset::adagrad_full(2.0, 1e-8)
            .unwrap()
            .config(set.clone(), Vector::zeros(d))
            .unwrap();
        let out = run(cfg, &p, 50).unwrap();
        let cmp = best_fixed_comparator(&p, 50, &set).unwrap();
        let rec = regret(&out.trajectory, &p, &cmp.point).unwrap();
        let recomputed: f64 = (1..=50)
            .map(|t| {
                let l = p.round(t).unwrap();
                l.value(&out.trajectory.rounds[t - 1].x) - l.value(&cmp.point)
            })
            .sum();
        assert!((rec.final_regret() - recomputed).abs() < 1e-9);

        // comparator equal to the single point played: zero regret
        let out1 = run(
            Preset::adagrad_full(2.0, 1e-8)
                .unwrap()
                .config(set.clone(), Vector::zeros(d))
                .unwrap(),
            &p,
            1,
        )
        .unwrap();
        let rec1 = regret(&out1.trajectory, &p, &Vector::zeros(d)).unwrap();
        assert_eq!(rec1.final_regret(), 0.0);
    }

    #[test]
    fn online_to_batch_examples() {
        use crate::engine::{RoundRecord, Trajectory};
        let rec = |x: f64| RoundRecord {
            x: v(&[x]),
            gradient: v(&[0.0]),
            loss: 0.0,
            regularizer: None,
            grad_norm_sq: 0.0,
            potential_term: 0.0,
        };
        let traj = Trajectory {
            rounds: vec![rec(1.0), rec(3.0)],
            final_x: v(&[3.0]),
            initial_potential: 0.0,
        };
        assert_eq!(online_to_batch(&traj).unwrap()[0], 2.0);
        let flat = Trajectory {
            rounds: vec![rec(0.7); 4],
            final_x: v(&[0.7]),
            initial_potential: 0.0,
        };
        assert!((online_to_batch(&flat).unwrap()[0] - 0.7).abs() < 1e-15);
        let empty = Trajectory {
            rounds: vec![],
            final_x: v(&[0.0]),
            initial_potential: 0.0,
        };
        assert!(online_to_batch(&empty).is_err());
    }

    #[test]
    fn averaged_iterate_suboptimality_is_at_most_average_regret() {
        let d = 3;
        let set = FeasibleSet::centered_ball(d, 1.0).unwrap();
        let p = OnlineProblem::new(ProblemKind::RotQuadratic, d, 21, set.clone()).unwrap();
        let c = p.constants();
        let cfg = Preset::sc_ogd(c.alpha.unwrap(), c.gamma)
            .unwrap()
            .config(set.clone(), Vector::zeros(d))
            .unwrap();
        let horizon = 300;
        let out = run(cfg, &p, horizon).unwrap();
        let cmp = best_fixed_comparator(&p, horizon, &set).unwrap();
        let rec = regret(&out.trajectory, &p, &cmp.point).unwrap();
        let avg = online_to_batch(&out.trajectory).unwrap();
        // on the realized samples, F(x̄)/T - F(x⋆)/T ≤ R_T/T by convexity
        let total = |x: &Vector| {
            (1..=horizon)
                .map(|t| p.round(t).unwrap().value(x))
                .sum::<f64>()
        };
        let subopt = (total(&avg) - total(&cmp.point)) / horizon as f64;
        assert!(subopt <= rec.final_regret() / horizon as f64 + 1e-9);
    }
}
