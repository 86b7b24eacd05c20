//! Dense Hermitian linear algebra.
//!
//! Every operator in the solver (problem data, slack operators, thermal
//! operators) is a [`HermitianMatrix`]. Matrix functions are evaluated by
//! diagonalizing once into an [`EigenSystem`] and mapping the spectrum.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues within this fraction of the spectral norm are treated as zero
/// when a PSD spectrum is requested.
pub const PSD_CLIP_TOL: f64 = 1e-12;

/// Dense complex Hermitian matrix.
///
/// Construction averages the input with its conjugate transpose; the
/// pre-averaging residual is kept in [`HermitianMatrix::asymmetry`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    entries: CMatrix,
    asymmetry: f64,
}

impl HermitianMatrix {
    /// Validates and symmetrizes `entries`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                context: "hermitian matrix must be square",
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        for col in 0..entries.ncols() {
            for row in 0..entries.nrows() {
                let z = entries[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let residual = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = max_abs(&entries);
        let tolerance = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
        if residual > tolerance {
            return Err(Error::NotHermitian {
                residual,
                tolerance,
            });
        }
        Ok(Self::symmetrized(entries, residual))
    }

    /// Builds from matrices that are Hermitian by construction (products of
    /// the form `V D V†`, sums of Hermitian matrices).
    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        Self::symmetrized(entries, 0.0)
    }

    fn symmetrized(entries: CMatrix, asymmetry: f64) -> Self {
        let adj = entries.adjoint();
        let entries = (entries + adj).scale(0.5);
        Self { entries, asymmetry }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self::from_trusted(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_trusted(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_trusted(CMatrix::zeros(dim, dim))
    }

    /// Rank-one projector `|v><v|` (not normalized).
    pub fn outer(v: &nalgebra::DVector<C64>) -> Self {
        Self::from_trusted(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Largest entrywise deviation from Hermiticity seen at construction.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_trusted(self.entries.scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other, "matrix sum")?;
        Ok(Self::from_trusted(&self.entries + &other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other, "matrix difference")?;
        Ok(Self::from_trusted(&self.entries - &other.entries))
    }

    /// `self + shift * I`.
    pub fn shift(&self, shift: f64) -> Self {
        let mut m = self.entries.clone();
        for i in 0..self.dim() {
            m[(i, i)] += C64::new(shift, 0.0);
        }
        Self::from_trusted(m)
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "unitary conjugation",
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        Ok(Self::from_trusted(unitary * &self.entries * unitary.adjoint()))
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut out = CMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.entries);
        out.view_mut((n, n), (m, m)).copy_from(&other.entries);
        Self::from_trusted(out)
    }

    pub fn eigen(&self) -> Result<EigenSystem> {
        eigendecompose(self)
    }
}

/// Eigenvalues sorted ascending with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Operator norm `max |λ|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Trace norm `Σ |λ|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).sum()
    }

    /// Eigenvalues of a nominally PSD matrix, with round-off negatives clipped
    /// to zero. Fails when an eigenvalue is negative beyond the clip tolerance.
    pub fn psd_eigenvalues(&self) -> Result<Vec<f64>> {
        let tol = PSD_CLIP_TOL * self.spectral_norm();
        self.eigenvalues
            .iter()
            .map(|&x| {
                if x >= 0.0 {
                    Ok(x)
                } else if -x <= tol {
                    Ok(0.0)
                } else {
                    Err(Error::NotPsd { eigenvalue: x })
                }
            })
            .collect()
    }

    /// `V diag(f(λ)) V†`. Fails if `f` is non-finite on the spectrum.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&x| {
                let y = f(x);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Domain { eigenvalue: x })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.reconstruct(&values))
    }

    /// `V diag(values) V†` for an externally mapped spectrum.
    pub fn reconstruct(&self, values: &[f64]) -> HermitianMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::from_trusted(scaled * self.eigenvectors.adjoint())
    }

    /// `V† A V`: `a` expressed in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &HermitianMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a.entries() * &self.eigenvectors
    }

    /// Diagonal of `V† A V`, i.e. `<v_j|A|v_j>` for every eigenvector.
    pub fn diagonal_in_eigenbasis(&self, a: &HermitianMatrix) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let v = self.eigenvectors.column(j);
                (v.adjoint() * a.entries() * v)[(0, 0)].re
            })
            .collect()
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn eigendecompose(a: &HermitianMatrix) -> Result<EigenSystem> {
    let n = a.dim();
    let eig = SymmetricEigen::try_new(a.entries().clone(), f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies a real scalar function through the spectral decomposition.
pub fn spectral_apply<F: Fn(f64) -> f64>(a: &HermitianMatrix, f: F) -> Result<HermitianMatrix> {
    eigendecompose(a)?.apply(f)
}

/// `Re Tr[AB]`.
pub fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a, b, "trace product")?;
    let z = trace_product_complex(a.entries(), b.entries());
    let scale = 1.0_f64.max(a.frobenius_norm() * b.frobenius_norm());
    assert!(
        z.im.abs() <= 1e-12 * scale,
        "Tr[AB] of Hermitian operands has imaginary part {:e}",
        z.im
    );
    Ok(z.re)
}

/// `Tr[AB] = Σ_ij A_ij B_ji` without forming the product.
pub fn trace_product_complex(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix, context: &'static str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}
