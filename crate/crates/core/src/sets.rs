//! Convex feasible sets and projection under the norm induced by a positive
//! definite matrix: `Π_X^H(x) = argmin_{x' ∈ X} ‖x' - x‖_H`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymmetricMatrix, Vector};
use crate::sampling;

const BOX_MAX_ITERS: usize = 500;
const BOX_GAP_TOL: f64 = 1e-10;
const BISECTION_ITERS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Euclidean,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Unconstrained {
        declared_euclidean_diameter: Option<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl FeasibleSet {
    pub fn unconstrained(declared_euclidean_diameter: Option<f64>) -> Self {
        Self::Unconstrained {
            declared_euclidean_diameter,
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::validation(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.is_empty() || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(
                "ball center must be a nonempty finite vector",
            ));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Ball of the given radius around the origin of `R^dim`.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::validation(
                "box bounds must be nonempty and of equal length",
            ));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(Error::validation(format!(
                    "box requires lower < upper, violated at coordinate {i} ({l} vs {u})"
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::cube(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Unconstrained { .. } => None,
            Self::Ball { center, .. } => Some(center.len()),
            Self::Box { lower, .. } => Some(lower.len()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unconstrained { .. } => "unconstrained",
            Self::Ball { .. } => "ball",
            Self::Box { .. } => "box",
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        match self.dim() {
            Some(d) => Error::check_dim(d, x.len()),
            None => Ok(()),
        }
    }

    pub fn diameter(&self, norm: NormKind) -> Result<f64> {
        match self {
            Self::Unconstrained {
                declared_euclidean_diameter,
            } => match (norm, declared_euclidean_diameter) {
                (NormKind::Euclidean, Some(b)) => Ok(*b),
                _ => Err(Error::Unbounded(
                    "unconstrained set has no declared diameter for this norm".into(),
                )),
            },
            Self::Ball { radius, .. } => Ok(2.0 * radius),
            Self::Box { lower, upper } => {
                let widths = upper.iter().zip(lower).map(|(u, l)| u - l);
                Ok(match norm {
                    NormKind::Euclidean => widths.map(|w| w * w).sum::<f64>().sqrt(),
                    NormKind::Infinity => widths.fold(0.0, f64::max),
                })
            }
        }
    }

    /// Largest Euclidean norm of a point of the set.
    pub fn max_norm(&self) -> Result<f64> {
        match self {
            Self::Unconstrained { .. } => Err(Error::Unbounded("unconstrained set".into())),
            Self::Ball { center, radius } => Ok(Vector::from_column_slice(center).norm() + radius),
            Self::Box { lower, upper } => Ok(lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l.abs().max(u.abs()).powi(2))
                .sum::<f64>()
                .sqrt()),
        }
    }

    /// Per-coordinate bound `max |x_i|` over the set.
    pub fn max_abs_coordinates(&self) -> Result<Vec<f64>> {
        match self {
            Self::Unconstrained { .. } => Err(Error::Unbounded("unconstrained set".into())),
            Self::Ball { center, radius } => Ok(center.iter().map(|c| c.abs() + radius).collect()),
            Self::Box { lower, upper } => Ok(lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l.abs().max(u.abs()))
                .collect()),
        }
    }

    /// Ball center, box midpoint, or the origin for unconstrained sets.
    pub fn center(&self, dim: usize) -> Vector {
        match self {
            Self::Unconstrained { .. } => Vector::zeros(dim),
            Self::Ball { center, .. } => Vector::from_column_slice(center),
            Self::Box { lower, upper } => Vector::from_iterator(
                lower.len(),
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)),
            ),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if self.check_dim(x).is_err() {
            return false;
        }
        match self {
            Self::Unconstrained { .. } => x.iter().all(|v| v.is_finite()),
            Self::Ball { center, radius } => {
                (x - Vector::from_column_slice(center)).norm() <= radius + tol
            }
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
        }
    }

    /// Euclidean projection `Π_X(x)`.
    pub fn euclidean_project(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Unconstrained { .. } => x.clone(),
            Self::Ball { center, radius } => {
                let c = Vector::from_column_slice(center);
                let z = x - &c;
                let n = z.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    c + z * (*radius / n)
                }
            }
            Self::Box { lower, upper } => clip(x, lower, upper),
        })
    }

    /// `argmin_{v ∈ X} c · v`, used for Frank–Wolfe duality gaps.
    pub fn linear_minimizer(&self, c: &Vector) -> Result<Vector> {
        self.check_dim(c)?;
        match self {
            Self::Unconstrained { .. } => Err(Error::Unbounded(
                "linear objective over an unconstrained set".into(),
            )),
            Self::Ball { center, radius } => {
                let n = c.norm();
                let ctr = Vector::from_column_slice(center);
                Ok(if n == 0.0 {
                    ctr
                } else {
                    ctr - c * (*radius / n)
                })
            }
            Self::Box { lower, upper } => Ok(Vector::from_iterator(
                c.len(),
                c.iter().zip(lower.iter().zip(upper)).map(|(ci, (l, u))| {
                    if *ci > 0.0 {
                        *l
                    } else if *ci < 0.0 {
                        *u
                    } else {
                        0.5 * (l + u)
                    }
                }),
            )),
        }
    }

    /// Draws a point of the set. Half of the draws land on the boundary
    /// (sphere or box faces/vertices), where curvature checks are tightest.
    pub fn sample(&self, rng: &mut impl Rng, dim: usize) -> Result<Vector> {
        match self {
            Self::Unconstrained {
                declared_euclidean_diameter: Some(b),
            } => Self::centered_ball(dim, b / 2.0)?.sample(rng, dim),
            Self::Unconstrained { .. } => {
                Err(Error::Unbounded("cannot sample an unbounded set".into()))
            }
            Self::Ball { center, radius } => {
                let u = sampling::random_unit_vector(rng, center.len());
                let r = if rng.random_bool(0.5) {
                    *radius
                } else {
                    radius * rng.random::<f64>().powf(1.0 / center.len() as f64)
                };
                Ok(Vector::from_column_slice(center) + u * r)
            }
            Self::Box { lower, upper } => {
                let corner = rng.random_bool(0.5);
                Ok(Vector::from_iterator(
                    lower.len(),
                    lower.iter().zip(upper).map(|(l, u)| {
                        if corner && rng.random_bool(0.7) {
                            if rng.random_bool(0.5) {
                                *l
                            } else {
                                *u
                            }
                        } else {
                            rng.random_range(*l..=*u)
                        }
                    }),
                ))
            }
        }
    }

    /// `Π_X^H(x)` for positive definite `H`.
    pub fn project(&self, x: &Vector, h: &SymmetricMatrix) -> Result<Vector> {
        self.check_dim(x)?;
        Error::check_dim(x.len(), h.dim())?;
        if matches!(self, Self::Unconstrained { .. }) {
            return Ok(x.clone());
        }
        if self.contains(x, 0.0) {
            return Ok(x.clone());
        }
        match self {
            Self::Unconstrained { .. } => unreachable!(),
            Self::Ball { center, radius } => project_ball(x, center, *radius, h),
            Self::Box { lower, upper } => {
                require_pd(h)?;
                if h.is_diagonal() {
                    Ok(clip(x, lower, upper))
                } else {
                    project_box_newton(x, lower, upper, h)
                }
            }
        }
    }
}

fn clip(x: &Vector, lower: &[f64], upper: &[f64]) -> Vector {
    Vector::from_iterator(
        x.len(),
        x.iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (l, u))| v.clamp(*l, *u)),
    )
}

fn require_pd(h: &SymmetricMatrix) -> Result<()> {
    let m = h.min_eigenvalue();
    if m > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            context: "projection metric must be positive definite".into(),
            eigenvalue: m,
        })
    }
}

/// In the eigenbasis `H = QΛQᵀ` the KKT point is
/// `v_i = λ_i w_i / (λ_i + μ)` with `w = Qᵀ(x - c)`; the multiplier `μ > 0`
/// solves `‖v(μ)‖ = r`, which is monotone in `μ` and found by bisection.
fn project_ball(x: &Vector, center: &[f64], radius: f64, h: &SymmetricMatrix) -> Result<Vector> {
    let eig = h.eig();
    let lam_min = eig.eigenvalues.min();
    if !(lam_min > 0.0) {
        return Err(Error::Domain {
            context: "projection metric must be positive definite".into(),
            eigenvalue: lam_min,
        });
    }
    let c = Vector::from_column_slice(center);
    let z = x - &c;
    let q = &eig.eigenvectors;
    let w = q.transpose() * &z;
    let lam = &eig.eigenvalues;
    let point = |mu: f64| Vector::from_fn(w.len(), |i, _| lam[i] * w[i] / (lam[i] + mu));

    let mut lo = 0.0_f64;
    // at this multiplier every |v_i| ≤ |w_i| r/‖z‖, hence ‖v‖ ≤ r
    let mut hi = eig.eigenvalues.max() * z.norm() / radius;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if point(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut v = point(hi);
    let n = v.norm();
    if n > radius {
        v *= radius / n;
    }
    Ok(c + q * v)
}

fn box_objective(y: &Vector, x: &Vector, h: &DMatrix<f64>) -> f64 {
    let r = y - x;
    0.5 * r.dot(&(h * &r))
}

/// Projected Newton for `min ½(y-x)ᵀH(y-x)` over a box, with the
/// Frank–Wolfe gap as the stopping certificate.
fn project_box_newton(
    x: &Vector,
    lower: &[f64],
    upper: &[f64],
    h: &SymmetricMatrix,
) -> Result<Vector> {
    let hm = h.as_matrix();
    let d = x.len();
    let mut y = clip(x, lower, upper);
    let mut gap = f64::INFINITY;
    for _ in 0..BOX_MAX_ITERS {
        let grad = hm * (&y - x);
        gap = (0..d)
            .map(|i| {
                let v = if grad[i] > 0.0 { lower[i] } else { upper[i] };
                grad[i] * (y[i] - v)
            })
            .sum::<f64>();
        if gap <= BOX_GAP_TOL {
            return Ok(y);
        }
        let pg = (&y - clip(&(&y - &grad), lower, upper)).amax();
        let eps = pg.min(1e-6);
        let binding: Vec<bool> = (0..d)
            .map(|i| {
                (y[i] <= lower[i] + eps && grad[i] > 0.0)
                    || (y[i] >= upper[i] - eps && grad[i] < 0.0)
            })
            .collect();
        let free: Vec<usize> = (0..d).filter(|&i| !binding[i]).collect();
        let mut dir = Vector::zeros(d);
        for i in 0..d {
            if binding[i] {
                dir[i] = -grad[i] / hm[(i, i)];
            }
        }
        if !free.is_empty() {
            let sub = DMatrix::from_fn(free.len(), free.len(), |a, b| hm[(free[a], free[b])]);
            let rhs = Vector::from_iterator(free.len(), free.iter().map(|&i| -grad[i]));
            let step = sub
                .cholesky()
                .ok_or_else(|| Error::Singular("box projection metric".into()))?
                .solve(&rhs);
            for (k, &i) in free.iter().enumerate() {
                dir[i] = step[k];
            }
        }
        let f0 = box_objective(&y, x, hm);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = clip(&(&y + &dir * alpha), lower, upper);
            let decrease: f64 = (0..d)
                .map(|i| {
                    if binding[i] {
                        grad[i] * (y[i] - cand[i])
                    } else {
                        -alpha * grad[i] * dir[i]
                    }
                })
                .sum();
            if f0 - box_objective(&cand, x, hm) >= 1e-4 * decrease {
                accepted = Some(cand);
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(next) if next != y => y = next,
            // no progress possible at machine precision
            _ => return Ok(y),
        }
    }
    Err(Error::Convergence {
        solver: "box projection (projected Newton)",
        iterations: BOX_MAX_ITERS,
        residual: gap,
    })
}
