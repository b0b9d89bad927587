//! Follow-the-leader / be-the-leader: with `x_t = argmin_x Σ_{s=0}^t ψ_s(x)`,
//!
//! `Σ_{t=1}^T ψ_t(x_t) ≤ Σ_{t=1}^T ψ_t(x_T) + ψ_0(x_T) - ψ_0(x_0)`.
//!
//! Checked on separable convex terms over a box, where every prefix
//! minimizer is computed exactly one coordinate at a time.

use rand::Rng;

use crate::error::{Error, Result};

/// `ψ(x) = Σ_i ½a_i (x_i - c_i)² + b_i |x_i - k_i| + l_i x_i` with `a, b ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub k: Vec<f64>,
    pub l: Vec<f64>,
}

impl SeparableTerm {
    pub fn new(a: Vec<f64>, c: Vec<f64>, b: Vec<f64>, k: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        let d = a.len();
        for v in [&c, &b, &k, &l] {
            Error::check_dim(d, v.len())?;
        }
        if a.iter().chain(&b).any(|v| !(*v >= 0.0)) {
            return Err(Error::validation("separable term needs a, b ≥ 0"));
        }
        Ok(Self { a, c, b, k, l })
    }

    pub fn random(rng: &mut impl Rng, d: usize) -> Self {
        let mut draw =
            |lo: f64, hi: f64| (0..d).map(|_| rng.random_range(lo..hi)).collect::<Vec<_>>();
        // some terms are purely linear or purely absolute value
        let a = draw(0.0, 2.0)
            .into_iter()
            .map(|v| if v < 0.5 { 0.0 } else { v })
            .collect();
        let c = draw(-1.5, 1.5);
        let b = draw(0.0, 1.0)
            .into_iter()
            .map(|v| if v < 0.3 { 0.0 } else { v })
            .collect();
        let k = draw(-1.5, 1.5);
        let l = draw(-1.0, 1.0);
        Self { a, c, b, k, l }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                0.5 * self.a[i] * (x[i] - self.c[i]).powi(2)
                    + self.b[i] * (x[i] - self.k[i]).abs()
                    + self.l[i] * x[i]
            })
            .sum()
    }
}

/// Running sum of terms, one coordinate at a time:
/// `½ A x² + B x + Σ_j b_j |x - k_j|` (constants dropped).
#[derive(Clone, Debug)]
struct CoordinateSum {
    quad: f64,
    lin: f64,
    kinks: Vec<(f64, f64)>,
}

impl CoordinateSum {
    fn value(&self, x: f64) -> f64 {
        0.5 * self.quad * x * x
            + self.lin * x
            + self
                .kinks
                .iter()
                .map(|(b, k)| b * (x - k).abs())
                .sum::<f64>()
    }

    /// Exact minimizer over `[lo, hi]`: on each segment between kinks the
    /// function is a quadratic, minimized by clipping its vertex.
    fn argmin(&self, lo: f64, hi: f64) -> f64 {
        let mut points: Vec<f64> = self
            .kinks
            .iter()
            .map(|&(_, k)| k)
            .filter(|k| *k > lo && *k < hi)
            .collect();
        points.push(lo);
        points.push(hi);
        points.sort_by(f64::total_cmp);
        let mut best = (lo, self.value(lo));
        for w in points.windows(2) {
            let (s, e) = (w[0], w[1]);
            let mid = 0.5 * (s + e);
            // slope of the absolute values is constant on the open segment
            let slope: f64 = self
                .kinks
                .iter()
                .map(|(b, k)| if mid > *k { *b } else { -*b })
                .sum();
            let mut cands = vec![s, e];
            if self.quad > 0.0 {
                cands.push((-(self.lin + slope) / self.quad).clamp(s, e));
            }
            for x in cands {
                let v = self.value(x);
                if v < best.1 {
                    best = (x, v);
                }
            }
        }
        best.0
    }
}

#[derive(Clone, Debug)]
pub struct FtlBtlReport {
    /// Per prefix `T`: `(lhs, rhs)`.
    pub prefixes: Vec<(f64, f64)>,
    pub min_slack: f64,
    pub holds: bool,
}

/// Checks the inequality for every prefix of `terms`, where `terms[0]` is ψ_0.
pub fn ftl_btl_check(
    terms: &[SeparableTerm],
    lower: &[f64],
    upper: &[f64],
) -> Result<FtlBtlReport> {
    let first = terms
        .first()
        .ok_or_else(|| Error::validation("need at least the initial term"))?;
    let d = first.dim();
    Error::check_dim(d, lower.len())?;
    Error::check_dim(d, upper.len())?;
    if terms.iter().any(|t| t.dim() != d) {
        return Err(Error::validation("terms have mixed dimensions"));
    }
    if (0..d).any(|i| !(lower[i] <= upper[i])) {
        return Err(Error::validation("box needs lower ≤ upper"));
    }
    let mut sums = vec![
        CoordinateSum {
            quad: 0.0,
            lin: 0.0,
            kinks: Vec::new(),
        };
        d
    ];
    let mut leaders = Vec::with_capacity(terms.len());
    for term in terms {
        for (i, s) in sums.iter_mut().enumerate() {
            s.quad += term.a[i];
            s.lin += term.l[i] - term.a[i] * term.c[i];
            if term.b[i] > 0.0 {
                s.kinks.push((term.b[i], term.k[i]));
            }
        }
        leaders.push(
            (0..d)
                .map(|i| sums[i].argmin(lower[i], upper[i]))
                .collect::<Vec<_>>(),
        );
    }

    let psi0 = &terms[0];
    let mut lhs = 0.0;
    let mut prefixes = Vec::with_capacity(terms.len() - 1);
    let mut min_slack = f64::INFINITY;
    let mut holds = true;
    for t in 1..terms.len() {
        lhs += terms[t].value(&leaders[t]);
        let x_t = &leaders[t];
        let rhs: f64 = terms[1..=t].iter().map(|s| s.value(x_t)).sum::<f64>() + psi0.value(x_t)
            - psi0.value(&leaders[0]);
        let slack = rhs - lhs;
        let scale = terms[1..=t].iter().map(|s| s.value(x_t).abs()).sum::<f64>() + lhs.abs();
        holds &= super::slack_ok(slack, scale);
        min_slack = min_slack.min(slack);
        prefixes.push((lhs, rhs));
    }
    Ok(FtlBtlReport {
        prefixes,
        min_slack,
        holds,
    })
}
