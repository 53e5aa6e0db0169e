//! Exponentials, logarithms and the bi-invariant distance, all through dense
//! eigendecompositions.

use nalgebra::{DVector, Schur, SymmetricEigen};
use std::f64::consts::PI;

use super::matrix::{square_dim, CMatrix, HermitianMatrix, UnitaryMatrix, C64};
use super::AlgebraError;

/// Phases closer than this to `±π` are rejected by [`principal_log`].
pub const BRANCH_CUT_TOL: f64 = 1e-12;

/// `e^{−iHt}`.
pub fn mat_exp(h: &HermitianMatrix, t: f64) -> UnitaryMatrix {
    UnitaryMatrix::from_raw(ExpDerivative::new(h.matrix(), t).exp)
}

/// Logarithm of a special unitary together with its phase bookkeeping.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    /// Traceless `H` with `e^{iH} = U`.
    pub generator: HermitianMatrix,
    /// Eigenphases of `generator`, ascending.
    pub phases: Vec<f64>,
    /// Integer `k` with `Σ principal phases = 2πk`; `k` phases were moved by
    /// `∓2π` to make the generator traceless.
    pub wraps: i64,
}

/// Minimal-norm traceless `H` with `e^{iH} = U`.
///
/// Principal eigenphases lie in `(−π, π]`. When they sum to `2πk ≠ 0` (only
/// possible for `d > 2`) the `|k|` phases nearest the cut are shifted by
/// `∓2π`, which is the least-norm traceless choice.
pub fn principal_log(u: &UnitaryMatrix) -> Result<UnitaryLog, AlgebraError> {
    let d = u.dim();
    let (q, t) = Schur::new(u.matrix().clone()).unpack();
    let mut phases: Vec<(f64, usize)> = (0..d)
        .map(|j| {
            let lambda = t[(j, j)];
            let mut theta = lambda.arg();
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            (theta, j)
        })
        .collect();
    if let Some(&(theta, _)) = phases
        .iter()
        .find(|(theta, _)| PI - theta.abs() < BRANCH_CUT_TOL)
    {
        return Err(AlgebraError::BranchCut(theta));
    }
    let total: f64 = phases.iter().map(|p| p.0).sum();
    let wraps = (total / (2.0 * PI)).round() as i64;
    phases.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = wraps.unsigned_abs() as usize;
    if wraps > 0 {
        for p in phases.iter_mut().rev().take(k) {
            p.0 -= 2.0 * PI;
        }
    } else if wraps < 0 {
        for p in phases.iter_mut().take(k) {
            p.0 += 2.0 * PI;
        }
    }
    let mut diag = DVector::from_element(d, C64::new(0.0, 0.0));
    for &(theta, j) in &phases {
        diag[j] = C64::new(theta, 0.0);
    }
    let h = &q * CMatrix::from_diagonal(&diag) * q.adjoint();
    let generator = HermitianMatrix::from_approx(h)?;
    let mut sorted: Vec<f64> = phases.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(UnitaryLog {
        generator,
        phases: sorted,
        wraps,
    })
}

/// `[Σ_j θ_j² / d]^{1/2}` over the eigenphases of `U†V`.
pub fn biinvariant_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64, AlgebraError> {
    if u.dim() != v.dim() {
        return Err(AlgebraError::DimensionMismatch(u.dim(), v.dim()));
    }
    let log = principal_log(&u.adjoint().mul(v))?;
    let sum: f64 = log.phases.iter().map(|t| t * t).sum();
    Ok((sum / u.dim() as f64).sqrt())
}

/// `e^{−iHΔt}` for a Hermitian `H`, with the eigendecomposition kept for
/// directional derivatives.
#[derive(Debug, Clone)]
pub struct ExpDerivative {
    pub exp: CMatrix,
    vectors: CMatrix,
    /// Divided differences of `x ↦ e^{−ixΔt}` on the eigenvalues.
    divided: CMatrix,
}

impl ExpDerivative {
    pub fn new(h: &CMatrix, dt: f64) -> Self {
        let d = square_dim(h).expect("square Hermitian input");
        let eig = SymmetricEigen::new(h.clone());
        let lambda = eig.eigenvalues;
        let vectors = eig.eigenvectors;
        let phases = DVector::from_iterator(d, lambda.iter().map(|&l| C64::from_polar(1.0, -l * dt)));
        let exp = &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint();
        let divided = CMatrix::from_fn(d, d, |j, k| {
            let mid = 0.5 * (lambda[j] + lambda[k]);
            let half = 0.5 * dt * (lambda[j] - lambda[k]);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            C64::new(0.0, -dt) * C64::from_polar(sinc, -mid * dt)
        });
        Self {
            exp,
            vectors,
            divided,
        }
    }

    /// Derivative of `e^{−iHΔt}` with respect to `H` in the direction `P`.
    pub fn directional(&self, p: &CMatrix) -> CMatrix {
        let rotated = self.vectors.adjoint() * p * &self.vectors;
        let inner = rotated.component_mul(&self.divided);
        &self.vectors * inner * self.vectors.adjoint()
    }
}
