//! Seeded samplers for test and experiment inputs.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, HermitianMatrix, UnitaryMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed element of `SU(d)` (QR of a Ginibre matrix, phases fixed
/// from the diagonal of `R`, then divided by a `d`-th root of the determinant).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let (q, r) = g.qr().unpack();
    let phases = DVector::from_iterator(
        d,
        (0..d).map(|i| {
            let x = r[(i, i)];
            if x.norm() > 0.0 {
                x / x.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        }),
    );
    let mut u = q * CMatrix::from_diagonal(&phases);
    let det = u.determinant();
    let root = C64::from_polar(1.0, -det.arg() / d as f64);
    u *= root;
    UnitaryMatrix::new(u).expect("Haar sample is special unitary")
}

/// Traceless Hermitian matrix with Gaussian entries of scale `sigma`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, sigma: f64, rng: &mut R) -> HermitianMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(gaussian(rng) * sigma, gaussian(rng) * sigma)
    });
    HermitianMatrix::from_approx(g).expect("symmetrized matrix is Hermitian")
}
