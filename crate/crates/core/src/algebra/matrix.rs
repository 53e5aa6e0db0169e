use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;

use super::AlgebraError;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance on `‖U†U − 1‖` and `|det U − 1|` accepted by [`UnitaryMatrix::new`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on `‖H − H†‖` accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|Tr H|` accepted by [`HermitianMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;

/// Hilbert–Schmidt norm `[Tr(A†A)]^{1/2}`.
pub fn hs_norm(a: &CMatrix) -> Result<f64, AlgebraError> {
    if a.nrows() != a.ncols() {
        return Err(AlgebraError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(frobenius(a.as_slice()))
}

/// Hilbert–Schmidt distance `‖A − B‖` between two square matrices of equal size.
pub fn hs_distance(a: &CMatrix, b: &CMatrix) -> Result<f64, AlgebraError> {
    if a.shape() != b.shape() {
        return Err(AlgebraError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    hs_norm(a)?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub(crate) fn frobenius(entries: &[C64]) -> f64 {
    entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense special-unitary matrix, `U†U = 1` and `det U = 1`.
#[derive(Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self, AlgebraError> {
        let d = square_dim(&m)?;
        if d < 2 {
            return Err(AlgebraError::DimensionTooSmall(d));
        }
        let dev = frobenius((m.adjoint() * &m - CMatrix::identity(d, d)).as_slice());
        if !(dev <= UNITARY_TOL) {
            return Err(AlgebraError::NotUnitary(dev));
        }
        let det = m.determinant();
        if !((det - C64::new(1.0, 0.0)).norm() <= UNITARY_TOL) {
            return Err(AlgebraError::NotSpecial(det));
        }
        Ok(Self(m))
    }

    /// Wraps a product of validated unitaries without re-checking. Rounding
    /// drift after `k` products is of order `k·1e-16`.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        hs_distance(&self.0, &other.0).expect("unitaries of equal dimension")
    }
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitaryMatrix{}", self.0)
    }
}

/// Traceless Hermitian matrix, an element `iH` of the Lie algebra.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self, AlgebraError> {
        square_dim(&m)?;
        let dev = frobenius((&m - m.adjoint()).as_slice());
        if !(dev <= HERMITIAN_TOL) {
            return Err(AlgebraError::NotHermitian(dev));
        }
        let tr = m.trace();
        if !(tr.norm() <= TRACE_TOL) {
            return Err(AlgebraError::NotTraceless(tr.norm()));
        }
        Ok(Self(m))
    }

    /// Symmetrizes `m` and removes its trace before validating.
    pub fn from_approx(m: CMatrix) -> Result<Self, AlgebraError> {
        let d = square_dim(&m)?;
        let mut h = (&m + m.adjoint()).scale(0.5);
        let shift = h.trace() / d as f64;
        for i in 0..d {
            h[(i, i)] -= shift;
        }
        Self::new(h)
    }

    pub fn zero(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.0)
    }
}

pub(crate) fn square_dim(m: &CMatrix) -> Result<usize, AlgebraError> {
    if m.nrows() != m.ncols() {
        return Err(AlgebraError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}
