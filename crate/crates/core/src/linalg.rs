//! Dense symmetric matrices and spectral calculus.
//!
//! Every matrix-valued quantity of the engine (accumulated gradient outer
//! products, regularizers, their inverses) is a [`SymmetricMatrix`]. Scalar
//! functions are lifted to matrices through the eigendecomposition:
//! `φ(A) = Σ φ(λ_i) u_i u_iᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Relative tolerance of the symmetry check performed on construction.
const SYMMETRY_TOL: f64 = 1e-12;
/// Relative width of the band of negative eigenvalues treated as round-off.
const CLAMP_TOL: f64 = 1e-12;
/// Quadratic forms below `-INDEFINITE_TOL` are rejected by [`mahalanobis_norm`].
pub const INDEFINITE_TOL: f64 = 1e-10;

/// A dense, finite, symmetric `d × d` matrix.
///
/// Construction checks symmetry up to `1e-12 · (1 + max|A|)` and then
/// replaces the input by `(A + Aᵀ)/2`, so the stored entries are exactly
/// symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    inner: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::validation(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::validation("matrix dimension must be positive"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        let scale = 1.0 + m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::validation(format!(
                "matrix is not symmetric (max |A - Aᵀ| = {asym:e})"
            )));
        }
        Ok(Self::from_symmetric_unchecked((&m + m.transpose()) * 0.5))
    }

    /// Builds from row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation("rows must form a square matrix"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub(crate) fn from_symmetric_unchecked(inner: DMatrix<f64>) -> Self {
        Self { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_symmetric_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_symmetric_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self::from_symmetric_unchecked(DMatrix::identity(dim, dim) * s)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_symmetric_unchecked(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// The rank-one matrix `g gᵀ`.
    pub fn outer(g: &Vector) -> Self {
        Self::from_symmetric_unchecked(g * g.transpose())
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn diagonal(&self) -> Vector {
        self.inner.diagonal()
    }

    /// `diag(A)`: the diagonal part, off-diagonal entries zeroed.
    pub fn diag_part(&self) -> Self {
        Self::from_symmetric_unchecked(DMatrix::from_diagonal(&self.inner.diagonal()))
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.inner[(i, j)] == 0.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_symmetric_unchecked(&self.inner * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(Self::from_symmetric_unchecked(&self.inner + &other.inner))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(Self::from_symmetric_unchecked(&self.inner - &other.inner))
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(&self.inner * x)
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &Vector) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(x.dot(&(&self.inner * x)))
    }

    pub fn eig(&self) -> SpectralDecomposition {
        let eig = SymmetricEigen::new(self.inner.clone());
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = Vector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(d, d);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.inner.clone()).eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.inner.clone()).eigenvalues.max()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// Spectral inverse; requires a positive definite matrix.
    pub fn inverse(&self) -> Result<Self> {
        apply_scalar_fn(self, |x| 1.0 / x, FnDomain::Positive)
    }

    /// `A^α` for a positive semidefinite `A`.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let domain = if alpha > 0.0 {
            FnDomain::NonNegative
        } else {
            FnDomain::Positive
        };
        apply_scalar_fn(self, |x| x.powf(alpha), domain)
    }
}

/// Eigenvalues sorted in descending order with matching orthonormal
/// eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vector,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// `U · diag(f(λ)) · Uᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let mapped = self.eigenvalues.map(f);
        let u = &self.eigenvectors;
        let scaled = u * DMatrix::from_diagonal(&mapped);
        let m = &scaled * u.transpose();
        SymmetricMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Where a lifted scalar function is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnDomain {
    Real,
    NonNegative,
    Positive,
}

pub fn eig_sym(a: &SymmetricMatrix) -> SpectralDecomposition {
    a.eig()
}

/// Lifts `f` to the matrix `Σ f(λ_i) u_i u_iᵀ`.
///
/// For the restricted domains, eigenvalues in `(-1e-12·scale, 0)` are
/// clamped to zero first; anything further outside the domain, or a
/// non-finite `f(λ)`, is a [`Error::Domain`] naming the eigenvalue.
pub fn apply_scalar_fn(
    a: &SymmetricMatrix,
    f: impl Fn(f64) -> f64,
    domain: FnDomain,
) -> Result<SymmetricMatrix> {
    let mut eig = a.eig();
    let scale = 1.0 + eig.eigenvalues.amax();
    for lam in eig.eigenvalues.iter_mut() {
        if domain != FnDomain::Real && *lam < 0.0 && *lam > -CLAMP_TOL * scale {
            *lam = 0.0;
        }
        let outside = match domain {
            FnDomain::Real => false,
            FnDomain::NonNegative => *lam < 0.0,
            FnDomain::Positive => *lam <= 0.0,
        };
        if outside {
            return Err(Error::Domain {
                context: "scalar function".into(),
                eigenvalue: *lam,
            });
        }
        let v = f(*lam);
        if !v.is_finite() {
            return Err(Error::Domain {
                context: "scalar function".into(),
                eigenvalue: *lam,
            });
        }
    }
    Ok(eig.reconstruct_with(f))
}

/// `A • B = tr(AᵀB)`.
pub fn frobenius_inner(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    Ok(a.inner.dot(&b.inner))
}

/// `‖x‖_H = √(xᵀHx)` for positive semidefinite `H`.
pub fn mahalanobis_norm(x: &Vector, h: &SymmetricMatrix) -> Result<f64> {
    let q = h.quad_form(x)?;
    if q < -INDEFINITE_TOL {
        return Err(Error::Indefinite { value: q });
    }
    Ok(q.max(0.0).sqrt())
}

/// `G + g gᵀ`.
pub fn rank_one_update(g_acc: &SymmetricMatrix, g: &Vector) -> Result<SymmetricMatrix> {
    Error::check_dim(g_acc.dim(), g.len())?;
    let ggt = g * g.transpose();
    Ok(SymmetricMatrix::from_symmetric_unchecked(
        &g_acc.inner + ggt,
    ))
}

/// `A ⪰ B` up to `tol`: the smallest eigenvalue of `A - B` is at least `-tol`.
pub fn psd_geq(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) -> Result<bool> {
    Ok(a.sub(b)?.min_eigenvalue() >= -tol)
}

/// Maximum absolute entrywise difference.
/// Tolerance for comparing `A^α` with `B^α` computed from eigendecompositions:
/// `‖A^α - B^α‖ ≤ ‖A - B‖^α`, so a backward error `δ‖A‖` in the
/// eigensolver becomes `(δ‖A‖)^α` after the power.
pub fn power_tolerance(a: &SymmetricMatrix, alpha: f64) -> f64 {
    let scale = 1.0 + a.max_abs() * a.dim() as f64;
    (1e-14 * scale).powf(alpha.min(1.0)) + 1e-9 * scale
}

pub fn max_abs_diff(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    (&a.inner - &b.inner).amax()
}
