use super::matrix::UnitaryMatrix;
use super::AlgebraError;

const DEGENERATE_TOL: f64 = 1e-12;

/// Angles `(χ₁, χ₂, χ₃)` with `U = e^{iχ₁Z} e^{iχ₂Y} e^{iχ₃Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub chi1: f64,
    pub chi2: f64,
    pub chi3: f64,
}

impl EulerAngles {
    pub fn to_unitary(&self) -> UnitaryMatrix {
        use super::matrix::{CMatrix, C64};
        let rz = |a: f64| {
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::from_polar(1.0, a),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::from_polar(1.0, -a),
                ],
            )
        };
        let (s, c) = self.chi2.sin_cos();
        let ry = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
        );
        UnitaryMatrix::from_raw(rz(self.chi1) * ry * rz(self.chi3))
    }
}

/// Euler angles of an `SU(2)` element on the branch `χ₂ ∈ [0, π/2]`.
///
/// Writing `U = [[a, b], [−b*, a*]]`, `cos χ₂ = |a|`, `χ₁ + χ₃ = arg a` and
/// `χ₁ − χ₃ = arg b`. When one of `a`, `b` vanishes the split is fixed by
/// `χ₃ = 0`.
pub fn euler_decompose(u: &UnitaryMatrix) -> Result<EulerAngles, AlgebraError> {
    if u.dim() != 2 {
        return Err(AlgebraError::DimensionMismatch(u.dim(), 2));
    }
    let a = u.matrix()[(0, 0)];
    let b = u.matrix()[(0, 1)];
    let chi2 = b.norm().atan2(a.norm());
    let angles = if b.norm() < DEGENERATE_TOL {
        EulerAngles {
            chi1: a.arg(),
            chi2: 0.0,
            chi3: 0.0,
        }
    } else if a.norm() < DEGENERATE_TOL {
        EulerAngles {
            chi1: b.arg(),
            chi2: std::f64::consts::FRAC_PI_2,
            chi3: 0.0,
        }
    } else {
        let (sum, diff) = (a.arg(), b.arg());
        EulerAngles {
            chi1: 0.5 * (sum + diff),
            chi2,
            chi3: 0.5 * (sum - diff),
        }
    };
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli::Pauli;
    use crate::algebra::random::haar_unitary;
    use crate::algebra::spectral::mat_exp;
    use crate::algebra::HermitianMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_decomposes_to_zero() {
        let e = euler_decompose(&UnitaryMatrix::identity(2)).unwrap();
        assert_eq!((e.chi1, e.chi2, e.chi3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn y_rotation() {
        let y = HermitianMatrix::new(Pauli::Y.matrix()).unwrap();
        for theta in [0.1, 0.7, 1.5] {
            let u = mat_exp(&y, -theta);
            let e = euler_decompose(&u).unwrap();
            assert!(e.chi1.abs() < 1e-12 && e.chi3.abs() < 1e-12);
            assert!((e.chi2 - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_input_folds_into_chi1() {
        let z = HermitianMatrix::new(Pauli::Z.matrix()).unwrap();
        let e = euler_decompose(&mat_exp(&z, -0.4)).unwrap();
        assert!((e.chi1 - 0.4).abs() < 1e-12);
        assert_eq!((e.chi2, e.chi3), (0.0, 0.0));
    }

    #[test]
    fn haar_samples_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = haar_unitary(2, &mut rng);
            let e = euler_decompose(&u).unwrap();
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&e.chi2));
            assert!(e.to_unitary().distance(&u) < 1e-9);
        }
    }

    #[test]
    fn rejects_larger_dimensions() {
        assert!(euler_decompose(&UnitaryMatrix::identity(4)).is_err());
    }
}
