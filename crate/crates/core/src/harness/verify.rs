//! Randomized verification suites. Trial `i` draws from its own RNG stream,
//! so results are identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{mirror_step_argmin, run, Preset};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_scalar_fn, max_abs_diff, power_tolerance, psd_geq, FnDomain, SymmetricMatrix, Vector,
};
use crate::oracles::bounds::{pnorm_optimal_eta, pnorm_traces};
use crate::oracles::{
    ftl_btl_check, mirror_lemma_trajectory, numeric_potential_argmin, regret_bound,
    regret_decomposition_check, trace_product_check, ArgminOptions, BoundCertificate, BoundFormula,
    BoundInputs, SeparableTerm,
};
use crate::potentials::{minimize_regularizer, RegularizerDomain, SpectralPotential};
use crate::problems::{
    best_fixed_comparator, check_coordinatewise_exp_concave, check_exp_concave,
    check_strongly_convex, regret, OnlineProblem, ProblemKind,
};
use crate::sampling;
use crate::sets::FeasibleSet;

use super::experiment::{ExperimentSpec, SetKind};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
const FAULT_SCALE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemmas,
    Argmin,
    Bounds,
    Matrix,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lemmas, Suite::Argmin, Suite::Bounds, Suite::Matrix];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Lemmas => "lemmas",
            Self::Argmin => "argmin",
            Self::Bounds => "bounds",
            Self::Matrix => "matrix",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.id() == s)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suites: Vec<Suite>,
    pub trials: usize,
    /// Relative tolerance for numerical agreement checks.
    pub tolerance: f64,
    pub seed: u64,
    /// Scales every bound by 0.9, to show that the suite notices.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            trials: 20,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub check: &'static str,
    pub trial: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    /// One `suite: passed/total` line per suite run.
    pub fn suite_lines(&self, suites: &[Suite]) -> Vec<String> {
        suites
            .iter()
            .map(|s| {
                let all: Vec<_> = self.outcomes.iter().filter(|o| o.suite == *s).collect();
                let ok = all.iter().filter(|o| o.passed).count();
                let status = if ok == all.len() { "PASS" } else { "FAIL" };
                format!("{status} {}: {ok}/{} checks passed", s.id(), all.len())
            })
            .collect()
    }

    pub fn manifest(&self) -> Vec<String> {
        self.failures()
            .map(|o| {
                format!(
                    "{}/{} trial {}: {}",
                    o.suite.id(),
                    o.check,
                    o.trial,
                    o.detail
                )
            })
            .collect()
    }
}

struct Ctx {
    tol: f64,
    fault: f64,
}

type Outcomes = Vec<(&'static str, bool, String)>;

fn outcome(check: &'static str, r: Result<(bool, String)>) -> (&'static str, bool, String) {
    match r {
        Ok((ok, detail)) => (check, ok, detail),
        Err(e) => (check, false, format!("error: {e}")),
    }
}

pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let ctx = Ctx {
        tol: opts.tolerance,
        fault: if opts.inject_fault { FAULT_SCALE } else { 1.0 },
    };
    let mut report = VerifyReport::default();
    for (k, &suite) in opts.suites.iter().enumerate() {
        let per_trial: Vec<Outcomes> = (0..opts.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((k as u64 + 1) << 48));
                rng.set_stream(trial as u64);
                match suite {
                    Suite::Lemmas => lemmas(&ctx, trial, &mut rng),
                    Suite::Argmin => argmin(&ctx, &mut rng),
                    Suite::Bounds => bounds(&ctx, trial, &mut rng),
                    Suite::Matrix => matrix(&ctx, trial, &mut rng),
                }
            })
            .collect();
        for (trial, outs) in per_trial.into_iter().enumerate() {
            for (check, passed, detail) in outs {
                report.outcomes.push(CheckOutcome {
                    suite,
                    check,
                    trial,
                    passed,
                    detail,
                });
            }
        }
    }
    Ok(report)
}

fn random_set(rng: &mut ChaCha8Rng, d: usize) -> FeasibleSet {
    if rng.random_bool(0.5) {
        FeasibleSet::centered_ball(d, rng.random_range(0.3..2.0)).expect("valid radius")
    } else {
        let h = rng.random_range(0.3..2.0);
        FeasibleSet::uniform_box(d, -h, h).expect("valid box")
    }
}

fn lemmas(_ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> Outcomes {
    let mut out = Vec::new();
    let d = rng.random_range(1..=4);

    out.push(outcome(
        "ftl-btl",
        (|| {
            let terms: Vec<_> = (0..25)
                .map(|_| SeparableTerm::random(&mut *rng, d))
                .collect();
            let r = ftl_btl_check(&terms, &vec![-1.0; d], &vec![1.0; d])?;
            Ok((r.holds, format!("min slack {:e}", r.min_slack)))
        })(),
    ));

    let set = random_set(rng, d);
    let presets = ["adagrad-full", "adagrad-diag", "adaptive-ogd"];
    out.push(outcome(
        "mirror-descent",
        (|| {
            let p = OnlineProblem::new(ProblemKind::AdvLinear, d, rng.random(), set.clone())?;
            let b = set.diameter(crate::sets::NormKind::Euclidean)?;
            let preset = match presets[trial % 3] {
                "adagrad-full" => Preset::adagrad_full(b, 1e-8)?,
                "adagrad-diag" => {
                    Preset::adagrad_diag(set.diameter(crate::sets::NormKind::Infinity)?, 1e-8)?
                }
                _ => Preset::adaptive_ogd(b / std::f64::consts::SQRT_2)?,
            };
            let outp = run(preset.config(set.clone(), set.center(d))?, &p, 60)?;
            let pts: Vec<Vector> = (0..6)
                .map(|_| set.sample(&mut *rng, d))
                .collect::<Result<_>>()?;
            let r = mirror_lemma_trajectory(&outp.trajectory, &pts)?;
            Ok((
                r.holds,
                format!("{}: worst step slack {:e}", preset.id(), r.worst_step),
            ))
        })(),
    ));

    out.push(outcome(
        "regret-decomposition",
        (|| {
            let algo = Preset::IDS[trial % Preset::IDS.len()];
            let spec = ExperimentSpec {
                algo: algo.into(),
                dim: d,
                horizon: 60,
                seed: rng.random(),
                set: if rng.random_bool(0.5) {
                    SetKind::Ball
                } else {
                    SetKind::Box
                },
                radius: rng.random_range(0.5..1.5),
                ..Default::default()
            };
            let exp = super::experiment::Experiment::build(spec)?;
            let preset = match exp.preset {
                Preset::PNorm { b, .. } => exp.preset.with_eta(b)?,
                other => other,
            };
            let outp = run(preset.config(exp.set.clone(), exp.x1())?, &exp.problem, 60)?;
            let mut pts = vec![best_fixed_comparator(&exp.problem, 60, &exp.set)?.point];
            for _ in 0..5 {
                pts.push(exp.set.sample(&mut *rng, d)?);
            }
            let r = regret_decomposition_check(&outp.trajectory, &exp.problem, &pts)?;
            Ok((
                r.holds,
                format!("{algo}: min slack {:e} at {:?}", r.min_slack, r.worst),
            ))
        })(),
    ));

    out.push(outcome(
        "curvature-constants",
        (|| {
            let ball = FeasibleSet::centered_ball(d, 1.0)?;
            let cube = FeasibleSet::uniform_box(d, -1.0, 1.0)?;
            let seed: u64 = rng.random();
            let t = rng.random_range(1..1000);
            let sq = OnlineProblem::new(ProblemKind::SqLoss, d, seed, ball.clone())?;
            let sep = OnlineProblem::new(ProblemKind::SepSqLoss, d, seed, cube.clone())?;
            let quad = OnlineProblem::new(ProblemKind::RotQuadratic, d, seed, ball.clone())?;
            let ok = check_exp_concave(
                &sq.round(t)?,
                sq.constants().beta.expect("declared"),
                &ball,
                200,
                seed,
            )? && check_coordinatewise_exp_concave(
                &sep.round(t)?,
                sep.constants().beta_coo.expect("declared"),
                &cube,
                200,
                seed,
            )? && check_strongly_convex(
                &quad.round(t)?,
                quad.constants().alpha.expect("declared"),
                &ball,
                200,
                seed,
            )?;
            Ok((ok, format!("round {t}")))
        })(),
    ));
    out
}

fn random_potential(rng: &mut ChaCha8Rng) -> SpectralPotential {
    match rng.random_range(0..3) {
        0 => SpectralPotential::adagrad(rng.random_range(0.1..3.0)),
        1 => SpectralPotential::ons(rng.random_range(0.1..3.0)),
        _ => SpectralPotential::pnorm(rng.random_range(0.1..3.0), rng.random_range(0.5..8.0)),
    }
    .expect("valid potential parameters")
}

fn argmin(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcomes {
    let mut out = Vec::new();
    let d = rng.random_range(1..=5);
    let pot = random_potential(rng);
    let domain = [
        RegularizerDomain::Full,
        RegularizerDomain::Diagonal,
        RegularizerDomain::Isotropic,
    ][rng.random_range(0..3)];
    let g = sampling::random_pd(rng, d, 0.05, 20.0);
    out.push(outcome(
        "closed-form-vs-numeric",
        (|| {
            let exact = minimize_regularizer(&pot, &g, domain)?;
            let num = numeric_potential_argmin(&pot, &g, domain, ArgminOptions::default())?;
            let rel = max_abs_diff(&exact, &num) / exact.max_abs();
            Ok((
                rel <= ctx.tol,
                format!(
                    "{} {}: relative difference {rel:e}",
                    pot.name(),
                    domain.name()
                ),
            ))
        })(),
    ));

    out.push(outcome(
        "mirror-step-vs-projection",
        (|| {
            let set = random_set(rng, d);
            let h = sampling::random_pd(rng, d, 0.1, 10.0);
            let x = set.sample(&mut *rng, d)?;
            let gv = sampling::random_vector(rng, d) * 3.0;
            let proj = set.project(&(&x - h.mul_vec(&gv)?), &h.inverse()?)?;
            let direct = mirror_step_argmin(&x, &gv, &h, &set)?;
            let diff = (&proj - &direct).amax();
            Ok((
                diff <= ctx.tol * (1.0 + proj.amax()),
                format!("{}: max difference {diff:e}", set.name()),
            ))
        })(),
    ));
    out
}

fn bounds(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> Outcomes {
    let mut out = Vec::new();
    let bound = |f: BoundFormula, i: &BoundInputs| regret_bound(f, i).map(|v| v * ctx.fault);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + b.abs());

    if trial == 0 {
        out.push(outcome(
            "golden-values",
            (|| {
                let g = SymmetricMatrix::from_diagonal(&[4.0, 9.0]);
                let s2 = std::f64::consts::SQRT_2;
                let mk = |b: f64| BoundInputs {
                    g_acc: Some(g.clone()),
                    dim: 2,
                    horizon: 100,
                    b: Some(b),
                    p: Some(1.0),
                    beta: Some(1.0),
                    gamma: Some(1.0),
                    alpha: Some(0.5),
                    ..Default::default()
                };
                let cases = [
                    (BoundFormula::AdagradFull, s2 * 2.0 * 5.0),
                    (BoundFormula::AdagradDiag, s2 * 2.0 * 5.0),
                    (BoundFormula::AdaptiveOgd, s2 * 2.0 * 13f64.sqrt()),
                    (BoundFormula::PNorm, s2 * 2.0 * 5.0),
                    (BoundFormula::OnsFull, 2.0 * (1.0 + 200f64.ln())),
                    (BoundFormula::ScOgd, 2.0 * (8.0 + 100f64.ln())),
                ];
                let mut bad = Vec::new();
                for (f, want) in cases {
                    let got = bound(f, &mk(2.0))?;
                    if !close(got, want) {
                        bad.push(format!("{} = {got} (expected {want})", f.id()));
                    }
                }
                Ok((bad.is_empty(), bad.join("; ")))
            })(),
        ));
    }

    let d = rng.random_range(1..=5);
    let g = sampling::random_pd(rng, d, 0.01, 50.0);
    let p = rng.random_range(0.3..10.0);
    let b = rng.random_range(0.5..4.0);
    out.push(outcome(
        "tuned-eta-identity",
        (|| {
            let eta = pnorm_optimal_eta(&g, b, p)?;
            let (lo, hi) = pnorm_traces(&g, p)?;
            let inputs = BoundInputs {
                g_acc: Some(g.clone()),
                dim: d,
                b: Some(b),
                p: Some(p),
                eta: Some(eta),
                ..Default::default()
            };
            let fixed = bound(BoundFormula::PNormFixedEta, &inputs)?;
            let closed = b * ((p + 1.0) / p * lo * hi).sqrt();
            let nudged = bound(
                BoundFormula::PNormFixedEta,
                &BoundInputs {
                    eta: Some(eta * 1.05),
                    ..inputs.clone()
                },
            )?;
            Ok((
                close(fixed, closed) && nudged >= fixed,
                format!("p = {p:.3}: bound at tuned eta {fixed} vs closed form {closed}"),
            ))
        })(),
    ));

    out.push(outcome(
        "trace-product",
        (|| {
            let (lhs, rhs, ok) = trace_product_check(&g, p)?;
            Ok((ok, format!("p = {p:.3}: {lhs} vs {rhs}")))
        })(),
    ));

    out.push(outcome(
        "run-certificate",
        (|| {
            let algo = Preset::IDS[trial % Preset::IDS.len()];
            let spec = ExperimentSpec {
                algo: algo.into(),
                dim: rng.random_range(1..=4),
                horizon: 80,
                seed: rng.random(),
                set: if rng.random_bool(0.5) {
                    SetKind::Ball
                } else {
                    SetKind::Box
                },
                ..Default::default()
            };
            let exp = super::experiment::Experiment::build(spec)?;
            let res = exp.run()?;
            let Some(cert) = res.certificate else {
                return Ok((true, format!("{algo}: bound not applicable at T = 80")));
            };
            let cert = BoundCertificate::new(cert.formula, cert.bound * ctx.fault, cert.realized);
            // regret recomputed independently of the result record
            let again = regret(&res.output.trajectory, &exp.problem, &res.comparator.point)?;
            Ok((
                cert.satisfied && close(again.final_regret(), cert.realized),
                format!("{algo}: regret {} vs bound {}", cert.realized, cert.bound),
            ))
        })(),
    ));
    out
}

fn matrix(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> Outcomes {
    let mut out = Vec::new();
    let d = rng.random_range(1..=6);
    if trial == 0 {
        out.push(outcome(
            "square-is-not-monotone",
            (|| {
                let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]])?;
                let b = SymmetricMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]])?;
                let ordered = psd_geq(&a, &b, 1e-12)?;
                let squared = psd_geq(&a.powf(2.0)?, &b.powf(2.0)?, 1e-12)?;
                Ok((
                    ordered && !squared,
                    format!("A ≥ B: {ordered}, A² ≥ B²: {squared}"),
                ))
            })(),
        ));
    }
    out.push(outcome(
        "lowner-heinz",
        (|| {
            let b = sampling::random_psd(rng, d);
            let a = b.add(&sampling::random_psd(rng, d))?;
            let alpha = rng.random_range(0.01..=1.0);
            let ok = psd_geq(&a.powf(alpha)?, &b.powf(alpha)?, power_tolerance(&a, alpha))?;
            Ok((ok, format!("d = {d}, alpha = {alpha:.4}")))
        })(),
    ));
    out.push(outcome(
        "spectral-reconstruction",
        (|| {
            let a = sampling::random_symmetric(rng, d);
            let err = max_abs_diff(&a.eig().reconstruct(), &a);
            let ident = apply_scalar_fn(&a, |x| x, FnDomain::Real)?;
            let err2 = max_abs_diff(&ident, &a);
            let lim = ctx.tol.min(1e-10) * (1.0 + a.max_abs());
            Ok((
                err <= lim && err2 <= lim,
                format!("reconstruction error {err:e}, identity map error {err2:e}"),
            ))
        })(),
    ));
    out.push(outcome(
        "inverse-root-consistency",
        (|| {
            let a = sampling::random_pd(rng, d, 0.1, 10.0);
            let inv = a.inverse()?;
            let root = a.powf(0.5)?;
            let prod = SymmetricMatrix::new(root.as_matrix() * root.as_matrix())?;
            let e1 = max_abs_diff(
                &SymmetricMatrix::new(a.as_matrix() * inv.as_matrix())?,
                &SymmetricMatrix::identity(d),
            );
            let e2 = max_abs_diff(&prod, &a) / a.max_abs();
            Ok((
                e1 <= ctx.tol && e2 <= ctx.tol,
                format!("A A⁻¹ error {e1:e}, root error {e2:e}"),
            ))
        })(),
    ));
    out
}
