//! Numerical minimization of `G • H + Φ(H)` over positive definite `H`,
//! independent of the closed-form `(φ′)⁻¹` solution.
//!
//! Projected gradient steps on the entries of `H`, restricted to the
//! admissible subspace, with Barzilai-Borwein step sizes and Armijo
//! backtracking that also keeps `H` positive definite.

use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_fn, frobenius_inner, FnDomain, SymmetricMatrix};
use crate::potentials::{RegularizerDomain, SpectralPotential};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArgminOptions {
    /// Stop when `‖P(G - φ′(H))‖_F ≤ tol · (1 + ‖G‖_F)`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ArgminOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

fn restrict(m: &SymmetricMatrix, domain: RegularizerDomain) -> SymmetricMatrix {
    match domain {
        RegularizerDomain::Full => m.clone(),
        RegularizerDomain::Diagonal => m.diag_part(),
        RegularizerDomain::Isotropic => {
            SymmetricMatrix::scaled_identity(m.dim(), m.trace() / m.dim() as f64)
        }
    }
}

fn objective(pot: &SpectralPotential, g: &SymmetricMatrix, h: &SymmetricMatrix) -> Option<f64> {
    if h.min_eigenvalue() <= 0.0 {
        return None;
    }
    pot.regularized_objective(g, h)
        .ok()
        .filter(|v| v.is_finite())
}

/// Gradient of the objective restricted to the domain: `P(G - φ′(H))`.
fn gradient(
    pot: &SpectralPotential,
    g: &SymmetricMatrix,
    h: &SymmetricMatrix,
    domain: RegularizerDomain,
) -> Result<SymmetricMatrix> {
    let dphi = apply_scalar_fn(h, |x| pot.phi_prime(x), FnDomain::Positive)?;
    Ok(restrict(&g.sub(&dphi)?, domain))
}

pub fn numeric_potential_argmin(
    pot: &SpectralPotential,
    g: &SymmetricMatrix,
    domain: RegularizerDomain,
    opts: ArgminOptions,
) -> Result<SymmetricMatrix> {
    let d = g.dim();
    let target = opts.tol * (1.0 + g.frobenius_norm());
    // start from the identity, which is in every domain
    let mut h = SymmetricMatrix::identity(d);
    let mut f =
        objective(pot, g, &h).ok_or_else(|| Error::validation("objective undefined at I"))?;
    let mut grad = gradient(pot, g, &h, domain)?;
    let mut step = 1.0 / (1.0 + grad.frobenius_norm());
    let mut residual = grad.frobenius_norm();
    let mut history = std::collections::VecDeque::from([f]);
    for _ in 0..opts.max_iters {
        if residual <= target {
            return Ok(h);
        }
        let gn2 = grad.frobenius_norm().powi(2);
        // nonmonotone reference value, with room for rounding in the objective
        let f_ref = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 8.0 * f64::EPSILON * (1.0 + f_ref.abs());
        let mut accepted = None;
        let mut s = step;
        for _ in 0..200 {
            let cand = h.sub(&grad.scale(s))?;
            if let Some(fc) = objective(pot, g, &cand) {
                if fc <= f_ref - 1e-4 * s * gn2 + slack {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((next, fn_)) = accepted else {
            // no descent possible at working precision
            break;
        };
        let next_grad = gradient(pot, g, &next, domain)?;
        let dh = next.sub(&h)?;
        let dg = next_grad.sub(&grad)?;
        let curv = frobenius_inner(&dh, &dg)?;
        step = if curv > 0.0 {
            frobenius_inner(&dh, &dh)? / curv
        } else {
            2.0 * s
        };
        h = next;
        f = fn_;
        history.push_back(f);
        if history.len() > 10 {
            history.pop_front();
        }
        grad = next_grad;
        residual = grad.frobenius_norm();
    }
    if residual <= target {
        return Ok(h);
    }
    Err(Error::Convergence {
        solver: "numeric potential argmin",
        iterations: opts.max_iters,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::potentials::minimize_regularizer;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pots = [
            SpectralPotential::adagrad(0.7).unwrap(),
            SpectralPotential::ons(2.0).unwrap(),
            SpectralPotential::pnorm(1.3, 3.0).unwrap(),
        ];
        for pot in &pots {
            for domain in [
                RegularizerDomain::Full,
                RegularizerDomain::Diagonal,
                RegularizerDomain::Isotropic,
            ] {
                for _ in 0..5 {
                    let g = sampling::random_pd(&mut rng, 4, 0.1, 10.0);
                    let exact = minimize_regularizer(pot, &g, domain).unwrap();
                    let num = numeric_potential_argmin(pot, &g, domain, ArgminOptions::default())
                        .unwrap();
                    let rel = max_abs_diff(&exact, &num) / exact.max_abs();
                    assert!(rel < 1e-6, "{} {}: {rel}", pot.name(), domain.name());
                }
            }
        }
    }

    #[test]
    fn reports_non_convergence() {
        let g = SymmetricMatrix::from_diagonal(&[1.0, 4.0]);
        let pot = SpectralPotential::adagrad(1.0).unwrap();
        let opts = ArgminOptions {
            tol: 1e-10,
            max_iters: 1,
        };
        assert!(matches!(
            numeric_potential_argmin(&pot, &g, RegularizerDomain::Full, opts),
            Err(Error::Convergence { .. })
        ));
    }
}
