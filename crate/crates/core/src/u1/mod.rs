//! Gate complexity on `U(1)` generated by a single rotation `e^{iα}`.

mod continued_fraction;
mod lattice;

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::fit::linear_fit;

pub use continued_fraction::{continued_fraction, ContinuedFraction, MAX_DEPTH};
pub use lattice::lattice_complexity;

#[derive(Debug, Error)]
pub enum U1Error {
    #[error("no |n| ≤ {n_max} is within tolerance")]
    NotFound { n_max: u64 },
    #[error("need {needed} resolved points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

/// A phase `φ ∈ [0, 2π)`, the point `e^{iφ}` of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(phi: f64) -> Self {
        let r = phi.rem_euclid(TAU);
        Self(if r >= TAU { 0.0 } else { r })
    }

    pub fn phase(self) -> f64 {
        self.0
    }
}

fn check_inputs(alpha: f64, epsilon: f64) -> Result<(), U1Error> {
    if !alpha.is_finite() {
        return Err(U1Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(U1Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `|e^{iφ} − e^{inα}| = 2|sin((φ − nα)/2)|`.
pub fn chord(phi: CirclePoint, alpha: f64, n: i64) -> f64 {
    2.0 * ((phi.phase() - n as f64 * alpha) / 2.0).sin().abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct U1Hit {
    pub n: i64,
    pub complexity: u64,
    pub distance: f64,
}

/// Exact `C_ε(e^{iφ})` by scanning `n = 0, 1, −1, 2, −2, …` up to `|n| = n_max`.
pub fn u1_complexity(
    phi: CirclePoint,
    alpha: f64,
    epsilon: f64,
    n_max: u64,
) -> Result<U1Hit, U1Error> {
    check_inputs(alpha, epsilon)?;
    for k in 0..=n_max as i64 {
        for n in if k == 0 { vec![0] } else { vec![k, -k] } {
            let distance = chord(phi, alpha, n);
            if distance < epsilon {
                return Ok(U1Hit {
                    n,
                    complexity: k as u64,
                    distance,
                });
            }
        }
    }
    Err(U1Error::NotFound { n_max })
}

/// The integer `m = ⌊(φ − nα)/2π + 1/2⌋` and the reduced offset
/// `|φ/2π − nα/2π − m|` of an accepted `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainCheck {
    pub m: i64,
    pub half_chord: f64,
    pub offset: f64,
    /// `|sin((φ − nα)/2)| < ε/2` implies `offset < ε/4`.
    pub holds: bool,
}

pub fn chain_check(phi: CirclePoint, alpha: f64, epsilon: f64, n: i64) -> ChainCheck {
    let t = (phi.phase() - n as f64 * alpha) / TAU;
    let m = (t + 0.5).floor() as i64;
    let offset = (t - m as f64).abs();
    let half_chord = chord(phi, alpha, n) / 2.0;
    ChainCheck {
        m,
        half_chord,
        offset,
        holds: !(half_chord < epsilon / 2.0) || offset < epsilon / 4.0,
    }
}

/// `Some((p, q))` when `α/2π` is within rounding of a fraction with
/// denominator at most `10⁶`.
pub fn rational_rotation(alpha: f64) -> Option<(i64, i64)> {
    let cf = continued_fraction(alpha / TAU, MAX_DEPTH).ok()?;
    let &(p, q) = cf.convergents.last()?;
    (!cf.truncated && q <= 1_000_000).then_some((p, q))
}

/// Lower envelope `|x − nθ − m| > K/(|n| + |m| + 1)^τ` fitted to hits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub k: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct U1ScanPoint {
    pub epsilon: f64,
    pub complexity: Option<u64>,
    pub n: Option<i64>,
    pub chain: Option<ChainCheck>,
    /// `(1/3)·ln(1/ε)`.
    pub reference_line: f64,
    /// Least complexity compatible with the fitted envelope.
    pub implied_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct U1Scan {
    pub points: Vec<U1ScanPoint>,
    /// Slope of `C_ε` against `ln(1/ε)`.
    pub slope: f64,
    /// Slope of `ln C_ε` against `ln(1/ε)` over points with `C_ε ≥ 1`.
    pub loglog_slope: Option<f64>,
    pub envelope: Option<Envelope>,
    pub envelope_holds: bool,
    pub rational_alpha: bool,
}

pub fn u1_scaling_scan(
    phi: CirclePoint,
    alpha: f64,
    eps_grid: &[f64],
    n_max: u64,
) -> Result<U1Scan, U1Error> {
    for &e in eps_grid {
        check_inputs(alpha, e)?;
    }
    let hits: Vec<Result<Option<U1Hit>, U1Error>> = eps_grid
        .par_iter()
        .map(|&e| match u1_complexity(phi, alpha, e, n_max) {
            Ok(h) => Ok(Some(h)),
            Err(U1Error::NotFound { .. }) => Ok(None),
            Err(err) => Err(err),
        })
        .collect();
    let mut points = Vec::with_capacity(eps_grid.len());
    for (&epsilon, hit) in eps_grid.iter().zip(hits) {
        let hit = hit?;
        points.push(U1ScanPoint {
            epsilon,
            complexity: hit.map(|h| h.complexity),
            n: hit.map(|h| h.n),
            chain: hit.map(|h| chain_check(phi, alpha, epsilon, h.n)),
            reference_line: (1.0 / epsilon).ln() / 3.0,
            implied_bound: None,
        });
    }
    let resolved: Vec<&U1ScanPoint> = points.iter().filter(|p| p.complexity.is_some()).collect();
    if resolved.len() < 3 {
        return Err(U1Error::InsufficientData {
            needed: 3,
            got: resolved.len(),
        });
    }
    let x: Vec<f64> = resolved.iter().map(|p| (1.0 / p.epsilon).ln()).collect();
    let c: Vec<f64> = resolved.iter().map(|p| p.complexity.unwrap() as f64).collect();
    let slope = linear_fit(&x, &c).map_or(0.0, |f| f.slope);
    let (lx, lc): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&c)
        .filter(|(_, &c)| c >= 1.0)
        .map(|(&x, &c)| (x, c.ln()))
        .unzip();
    let loglog_slope = linear_fit(&lx, &lc).map(|f| f.slope);
    let envelope = fit_envelope(&resolved);
    let theta = (alpha / TAU).abs();
    let x0 = phi.phase() / TAU;
    if let Some(env) = envelope {
        for p in points.iter_mut().filter(|p| p.complexity.is_some()) {
            let reach = (4.0 * env.k / p.epsilon).powf(1.0 / env.tau);
            p.implied_bound = Some(((reach - 1.5 - x0) / (1.0 + theta)).max(0.0));
        }
    }
    let envelope_holds = points.iter().all(|p| match (p.complexity, p.implied_bound) {
        (Some(c), Some(b)) => c as f64 >= b,
        _ => true,
    });
    Ok(U1Scan {
        points,
        slope,
        loglog_slope,
        envelope,
        envelope_holds,
        rational_alpha: rational_rotation(alpha).is_some(),
    })
}

fn fit_envelope(resolved: &[&U1ScanPoint]) -> Option<Envelope> {
    let pts: Vec<(f64, f64)> = resolved
        .iter()
        .filter_map(|p| {
            let ch = p.chain?;
            let size = (p.n?.unsigned_abs() + ch.m.unsigned_abs() + 1) as f64;
            (ch.offset > 0.0).then(|| (size, ch.offset))
        })
        .collect();
    let (ls, lo): (Vec<f64>, Vec<f64>) = pts.iter().map(|(s, o)| (s.ln(), o.ln())).unzip();
    let tau = -linear_fit(&ls, &lo)?.slope;
    if !(tau > 0.0) {
        return None;
    }
    let k = pts
        .iter()
        .map(|(s, o)| o * s.powf(tau))
        .fold(f64::INFINITY, f64::min);
    Some(Envelope { k, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden_alpha() -> f64 {
        TAU * (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn trivial_cases() {
        let a = golden_alpha();
        assert_eq!(u1_complexity(CirclePoint::new(0.0), a, 1e-6, 10).unwrap().complexity, 0);
        let one = u1_complexity(CirclePoint::new(a), a, 1e-9, 10).unwrap();
        assert_eq!((one.n, one.complexity), (1, 1));
        let minus = u1_complexity(CirclePoint::new(-a), a, 1e-9, 10).unwrap();
        assert_eq!((minus.n, minus.complexity), (-1, 1));
        assert!(matches!(
            u1_complexity(CirclePoint::new(1.0), a, 1e-9, 5),
            Err(U1Error::NotFound { n_max: 5 })
        ));
    }

    #[test]
    fn circle_point_reduction() {
        assert_eq!(CirclePoint::new(TAU).phase(), 0.0);
        assert!((CirclePoint::new(-1.0).phase() - (TAU - 1.0)).abs() < 1e-15);
        let a = golden_alpha();
        for phi in [0.3, 2.0, 5.5] {
            let c1 = u1_complexity(CirclePoint::new(phi), a, 1e-3, 100_000).unwrap();
            let c2 = u1_complexity(CirclePoint::new(phi + TAU), a, 1e-3, 100_000).unwrap();
            assert_eq!(c1.complexity, c2.complexity);
        }
    }

    #[test]
    fn oracle_matches_scan_on_reference_input() {
        let x = 1.0 / 2f64.sqrt();
        let phi = CirclePoint::new(TAU * (x - x.floor()));
        let a = golden_alpha();
        let scan = u1_complexity(phi, a, 1e-4, 1_000_000).unwrap();
        let oracle = lattice_complexity(phi, a, 1e-4, 1_000_000).unwrap();
        assert_eq!(oracle, Some(scan.n));
        assert!(chain_check(phi, a, 1e-4, scan.n).holds);
    }

    #[test]
    fn oracle_reports_misses() {
        let a = golden_alpha();
        assert_eq!(lattice_complexity(CirclePoint::new(1.0), a, 1e-9, 5).unwrap(), None);
        assert_eq!(lattice_complexity(CirclePoint::new(1.0), a, 3.0, 5).unwrap(), Some(0));
    }

    #[test]
    fn oracle_handles_rational_rotation() {
        let a = TAU * 3.0 / 7.0;
        assert_eq!(rational_rotation(a), Some((3, 7)));
        assert_eq!(rational_rotation(golden_alpha()), None);
        let phi = CirclePoint::new(TAU * 5.0 / 7.0 + 1e-5);
        let scan = u1_complexity(phi, a, 1e-3, 50).unwrap();
        assert_eq!(lattice_complexity(phi, a, 1e-3, 50).unwrap(), Some(scan.n));
        assert_eq!(scan.n, -3);
    }

    #[test]
    fn orbit_point_gives_flat_tail() {
        let a = golden_alpha();
        let phi = CirclePoint::new(7.0 * a);
        let grid: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
        let s = u1_scaling_scan(phi, a, &grid, 100).unwrap();
        let tail: Vec<_> = s.points[4..].iter().map(|p| p.complexity).collect();
        assert!(tail.iter().all(|c| *c == Some(7)));
    }

    #[test]
    fn quadratic_rotation_scan_grows() {
        let a = golden_alpha();
        let phi = CirclePoint::new(TAU * (3f64.sqrt() - 1.0));
        let grid: Vec<f64> = (0..9).map(|k| 0.1 * 10f64.powf(-0.5 * k as f64)).collect();
        let s = u1_scaling_scan(phi, a, &grid, 10_000_000).unwrap();
        assert!(s.slope > 0.0);
        let ll = s.loglog_slope.unwrap();
        assert!(ll > 0.5 && ll < 1.5, "log-log slope {ll}");
        assert!(s.envelope.is_some() && s.envelope_holds);
        assert!(!s.rational_alpha);
        for p in &s.points {
            assert!(p.chain.unwrap().holds);
            assert!(p.complexity.unwrap() as f64 >= p.implied_bound.unwrap());
        }
    }

    #[test]
    fn random_triples_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let phi = CirclePoint::new(rng.random_range(0.0..TAU));
            let alpha = rng.random_range(0.0..TAU);
            let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
            let scan = u1_complexity(phi, alpha, eps, 200_000).ok().map(|h| h.n);
            let oracle = lattice_complexity(phi, alpha, eps, 200_000).unwrap();
            assert_eq!(scan, oracle, "phi {phi:?} alpha {alpha} eps {eps}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn accepted_n_satisfy_chain(phi in 0.0f64..TAU, alpha in 0.01f64..6.2, le in -4.0f64..-0.5) {
            let eps = 10f64.powf(le);
            if let Ok(hit) = u1_complexity(CirclePoint::new(phi), alpha, eps, 100_000) {
                let ch = chain_check(CirclePoint::new(phi), alpha, eps, hit.n);
                prop_assert!(ch.half_chord < eps / 2.0);
                prop_assert!(ch.holds);
            }
        }

        #[test]
        fn range_reduction_is_invisible(phi in -20.0f64..20.0, k in -3i32..3) {
            let a = golden_alpha();
            let c1 = u1_complexity(CirclePoint::new(phi), a, 1e-2, 10_000).map(|h| h.complexity).ok();
            let c2 = u1_complexity(CirclePoint::new(phi + TAU * k as f64), a, 1e-2, 10_000).map(|h| h.complexity).ok();
            prop_assert_eq!(c1, c2);
        }
    }
}
