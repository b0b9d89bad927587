//! Spectral potentials `Φ(H) = -tr(φ(H))` and the closed-form minimizer of
//! `G • H + Φ(H)` over the full, diagonal and isotropic positive definite cones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply_scalar_fn, FnDomain, SymmetricMatrix};

/// Largest supported exponent of the p-norm potential.
pub const MAX_P: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralPotential {
    /// `φ(x) = -η² x⁻¹`, i.e. `Φ(H) = η² tr(H⁻¹)`.
    AdaGrad { eta: f64 },
    /// `φ(x) = β⁻¹ log x`, i.e. `Φ(H) = -β⁻¹ log det H`.
    Ons { beta: f64 },
    /// `φ(x) = -(η^{p+1}/p) x^{-p}`.
    PNorm { eta: f64, p: f64 },
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

impl SpectralPotential {
    pub fn adagrad(eta: f64) -> Result<Self> {
        Ok(Self::AdaGrad {
            eta: positive("eta", eta)?,
        })
    }

    pub fn ons(beta: f64) -> Result<Self> {
        Ok(Self::Ons {
            beta: positive("beta", beta)?,
        })
    }

    pub fn pnorm(eta: f64, p: f64) -> Result<Self> {
        let p = positive("p", p)?;
        if p > MAX_P {
            return Err(Error::validation(format!(
                "p must be in (0, {MAX_P}], got {p}"
            )));
        }
        Ok(Self::PNorm {
            eta: positive("eta", eta)?,
            p,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::AdaGrad { .. } => "adagrad",
            Self::Ons { .. } => "ons",
            Self::PNorm { .. } => "pnorm",
        }
    }

    /// The scalar generator `φ` on `(0, ∞)`.
    pub fn phi(&self, x: f64) -> f64 {
        match *self {
            Self::AdaGrad { eta } => -eta * eta / x,
            Self::Ons { beta } => x.ln() / beta,
            Self::PNorm { eta, p } => -(eta.powf(p + 1.0) / p) * x.powf(-p),
        }
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        match *self {
            Self::AdaGrad { eta } => eta * eta / (x * x),
            Self::Ons { beta } => 1.0 / (beta * x),
            Self::PNorm { eta, p } => eta.powf(p + 1.0) * x.powf(-p - 1.0),
        }
    }

    /// `(φ′)⁻¹(y)` for `y > 0`.
    pub fn phi_prime_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Domain {
                context: format!("({} φ′)⁻¹", self.name()),
                eigenvalue: y,
            });
        }
        Ok(self.phi_prime_inverse_unchecked(y))
    }

    fn phi_prime_inverse_unchecked(&self, y: f64) -> f64 {
        match *self {
            Self::AdaGrad { eta } => eta / y.sqrt(),
            Self::Ons { beta } => 1.0 / (beta * y),
            Self::PNorm { eta, p } => eta * y.powf(-1.0 / (p + 1.0)),
        }
    }

    /// `Φ(H) = -Σ φ(λ_i(H))`; `H` must be positive definite.
    pub fn value(&self, h: &SymmetricMatrix) -> Result<f64> {
        let eig = h.eig();
        let scale = 1.0 + eig.eigenvalues.amax();
        let mut total = 0.0;
        for &lam in eig.eigenvalues.iter() {
            if lam <= 1e-12 * scale {
                return Err(Error::Domain {
                    context: format!("{} potential", self.name()),
                    eigenvalue: lam,
                });
            }
            total -= self.phi(lam);
        }
        Ok(total)
    }

    /// `G • H + Φ(H)`, the quantity minimized to obtain the regularizer.
    pub fn regularized_objective(&self, g: &SymmetricMatrix, h: &SymmetricMatrix) -> Result<f64> {
        Ok(crate::linalg::frobenius_inner(g, h)? + self.value(h)?)
    }
}

/// The admissible set of regularizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerDomain {
    Full,
    Diagonal,
    Isotropic,
}

impl RegularizerDomain {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Diagonal => "diagonal",
            Self::Isotropic => "isotropic",
        }
    }
}

/// `argmin_{H ∈ domain} G • H + Φ(H)` in closed form.
///
/// Full: `(φ′)⁻¹` applied spectrally to `G`. Diagonal: `(φ′)⁻¹` applied to
/// the entries of `diag(G)`. Isotropic: `(φ′)⁻¹(tr(G)/d) · I`.
pub fn minimize_regularizer(
    potential: &SpectralPotential,
    g: &SymmetricMatrix,
    domain: RegularizerDomain,
) -> Result<SymmetricMatrix> {
    let d = g.dim();
    let singular = |what: &str, v: f64| {
        Error::Singular(format!(
            "{what} of G must be positive for the {} domain, found {v:e}",
            domain.name()
        ))
    };
    match domain {
        RegularizerDomain::Full => apply_scalar_fn(
            g,
            |y| potential.phi_prime_inverse_unchecked(y),
            FnDomain::Positive,
        )
        .map_err(|e| match e {
            Error::Domain { eigenvalue, .. } => singular("every eigenvalue", eigenvalue),
            other => other,
        }),
        RegularizerDomain::Diagonal => {
            let diag = g.diagonal();
            let mut out = Vec::with_capacity(d);
            for &y in diag.iter() {
                if !(y > 0.0) {
                    return Err(singular("every diagonal entry", y));
                }
                out.push(potential.phi_prime_inverse_unchecked(y));
            }
            Ok(SymmetricMatrix::from_diagonal(&out))
        }
        RegularizerDomain::Isotropic => {
            let mean = g.trace() / d as f64;
            if !(mean > 0.0) {
                return Err(singular("the trace", g.trace()));
            }
            Ok(SymmetricMatrix::scaled_identity(
                d,
                potential.phi_prime_inverse_unchecked(mean),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, psd_geq};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn potentials() -> Vec<SpectralPotential> {
        vec![
            SpectralPotential::adagrad(0.7).unwrap(),
            SpectralPotential::ons(1.3).unwrap(),
            SpectralPotential::pnorm(0.9, 2.5).unwrap(),
        ]
    }

    #[test]
    fn parameter_validation() {
        assert!(SpectralPotential::adagrad(0.0).is_err());
        assert!(SpectralPotential::ons(-1.0).is_err());
        assert!(SpectralPotential::pnorm(1.0, 17.0).is_err());
        assert!(SpectralPotential::pnorm(1.0, f64::NAN).is_err());
        assert!(SpectralPotential::pnorm(1.0, 16.0).is_ok());
    }

    #[test]
    fn potential_values() {
        let ag = SpectralPotential::adagrad(1.0).unwrap();
        assert!((ag.value(&SymmetricMatrix::identity(3)).unwrap() - 3.0).abs() < 1e-12);
        let ons = SpectralPotential::ons(1.0).unwrap();
        assert!(ons.value(&SymmetricMatrix::identity(3)).unwrap().abs() < 1e-12);
        let ag2 = SpectralPotential::adagrad(2.0).unwrap();
        let v = ag2
            .value(&SymmetricMatrix::from_diagonal(&[1.0, 2.0]))
            .unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        assert!(ag
            .value(&SymmetricMatrix::from_diagonal(&[1.0, 0.0]))
            .is_err());
    }

    #[test]
    fn phi_prime_inverse_examples() {
        let ag = SpectralPotential::adagrad(1.0).unwrap();
        assert_eq!(ag.phi_prime_inverse(4.0).unwrap(), 0.5);
        let ons = SpectralPotential::ons(2.0).unwrap();
        assert_eq!(ons.phi_prime_inverse(0.25).unwrap(), 2.0);
        let pn = SpectralPotential::pnorm(1.0, 2.0).unwrap();
        assert!((pn.phi_prime_inverse(8.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(ag.phi_prime_inverse(0.0).is_err());
        assert!(ons.phi_prime_inverse(-1.0).is_err());
    }

    #[test]
    fn phi_prime_inverse_inverts_phi_prime() {
        for pot in potentials() {
            for &x in &[0.01, 0.3, 1.0, 7.5, 120.0] {
                let y = pot.phi_prime(x);
                let back = pot.phi_prime_inverse(y).unwrap();
                assert!((back - x).abs() < 1e-10 * x, "{pot:?} at {x}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let ag = SpectralPotential::adagrad(1.0).unwrap();
        let h = minimize_regularizer(
            &ag,
            &SymmetricMatrix::from_diagonal(&[4.0, 9.0]),
            RegularizerDomain::Full,
        )
        .unwrap();
        assert!(max_abs_diff(&h, &SymmetricMatrix::from_diagonal(&[0.5, 1.0 / 3.0])) < 1e-14);

        let ons = SpectralPotential::ons(1.0).unwrap();
        let h = minimize_regularizer(&ons, &SymmetricMatrix::identity(3), RegularizerDomain::Full)
            .unwrap();
        assert!(max_abs_diff(&h, &SymmetricMatrix::identity(3)) < 1e-14);

        let h = minimize_regularizer(
            &ag,
            &SymmetricMatrix::from_diagonal(&[1.0, 3.0]),
            RegularizerDomain::Isotropic,
        )
        .unwrap();
        assert!(max_abs_diff(&h, &SymmetricMatrix::scaled_identity(2, 0.5f64.sqrt())) < 1e-15);
    }

    #[test]
    fn singular_inputs_are_rejected() {
        let ag = SpectralPotential::adagrad(1.0).unwrap();
        let g = SymmetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            minimize_regularizer(&ag, &g, RegularizerDomain::Full),
            Err(Error::Singular(_))
        ));
        let g = SymmetricMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(minimize_regularizer(&ag, &g, RegularizerDomain::Diagonal).is_err());
        assert!(minimize_regularizer(
            &ag,
            &SymmetricMatrix::zeros(2),
            RegularizerDomain::Isotropic
        )
        .is_err());
    }

    #[test]
    fn full_domain_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for pot in potentials() {
            for _ in 0..20 {
                let g = sampling::random_pd(&mut rng, 4, 0.05, 20.0);
                let h = minimize_regularizer(&pot, &g, RegularizerDomain::Full).unwrap();
                let grad = apply_scalar_fn(&h, |x| pot.phi_prime(x), FnDomain::Positive).unwrap();
                let resid = g.sub(&grad).unwrap().frobenius_norm();
                assert!(resid <= 1e-6 * g.frobenius_norm(), "{pot:?}: {resid:e}");
            }
        }
    }

    #[test]
    fn closed_form_beats_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for pot in potentials() {
            let g = sampling::random_pd(&mut rng, 3, 0.1, 10.0);
            let h = minimize_regularizer(&pot, &g, RegularizerDomain::Full).unwrap();
            let best = pot.regularized_objective(&g, &h).unwrap();
            let scale = h.frobenius_norm();
            for _ in 0..100 {
                let dir = sampling::random_symmetric(&mut rng, 3);
                let dir = dir.scale(1e-2 * scale / dir.frobenius_norm());
                let cand = h.add(&dir).unwrap();
                if !cand.is_positive_definite() {
                    continue;
                }
                let v = pot.regularized_objective(&g, &cand).unwrap();
                assert!(v >= best - 1e-9, "{pot:?}: {v} < {best}");
            }
        }
    }

    #[test]
    fn domain_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for pot in potentials() {
            let g = sampling::random_pd(&mut rng, 4, 0.1, 10.0);
            let h = minimize_regularizer(&pot, &g, RegularizerDomain::Diagonal).unwrap();
            assert!(h.is_diagonal());
            let h = minimize_regularizer(&pot, &g, RegularizerDomain::Isotropic).unwrap();
            let d = h.diagonal();
            assert!(d.iter().all(|v| (v - d[0]).abs() <= 1e-12));
            assert!(h.is_diagonal());
        }
    }

    #[test]
    fn larger_g_gives_smaller_regularizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for pot in potentials() {
            for _ in 0..30 {
                let g = sampling::random_pd(&mut rng, 4, 0.1, 10.0);
                let bump = sampling::random_psd(&mut rng, 4);
                let g2 = g.add(&bump).unwrap();
                let h = minimize_regularizer(&pot, &g, RegularizerDomain::Full).unwrap();
                let h2 = minimize_regularizer(&pot, &g2, RegularizerDomain::Full).unwrap();
                assert!(psd_geq(&h, &h2, 1e-8).unwrap(), "{pot:?}");
            }
        }
    }

    #[test]
    fn p_one_is_adagrad() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let ag = SpectralPotential::adagrad(0.8).unwrap();
        let pn = SpectralPotential::pnorm(0.8, 1.0).unwrap();
        for domain in [
            RegularizerDomain::Full,
            RegularizerDomain::Diagonal,
            RegularizerDomain::Isotropic,
        ] {
            let g = sampling::random_pd(&mut rng, 4, 0.1, 10.0);
            let a = minimize_regularizer(&ag, &g, domain).unwrap();
            let b = minimize_regularizer(&pn, &g, domain).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-12);
        }
    }
}
