//! Scaling experiments along a single Pauli direction: the Hölder exponent of
//! the horizontal distance and the penalty scaling of the crossover between
//! the straight and the commutator routes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_bvp, GeodesicError, Penalty, PenaltyMetric, Result, SolverConfig};
use crate::algebra::{mat_exp, HermitianMatrix, PauliString, UnitaryMatrix, C64};
use crate::fit::{linear_fit, LinearFit};
use crate::subriemannian::{grow_flag, Distribution};

/// `C_q(δ)/(√w·δ)` at which the crossover is declared.
pub const CROSSOVER_RATIO: f64 = 0.5;

/// Confidence level of the reported slope interval.
const CONFIDENCE: f64 = 0.95;

/// `e^{−iδP}`.
fn rotation(p: &PauliString, delta: f64) -> Result<UnitaryMatrix> {
    let h = HermitianMatrix::new(p.to_matrix()? * C64::new(delta, 0.0))?;
    Ok(mat_exp(&h, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderPoint {
    pub delta: f64,
    pub distance: f64,
    pub endpoint_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderResult {
    pub direction: String,
    /// `1/d` for the degree `d` of the direction in the flag.
    pub expected: Option<f64>,
    pub points: Vec<HolderPoint>,
    /// `log C` against `log δ` over the converged points.
    pub fit: LinearFit,
    pub slope_interval: (f64, f64),
}

/// `C(1, e^{−iδP})` over the grid and its log-log slope. Unconverged grid
/// points are kept in the output but left out of the fit.
pub fn holder_experiment(
    metric: &PenaltyMetric,
    direction: &PauliString,
    config: &HolderConfig,
) -> Result<HolderResult> {
    if direction.n_qubits() != metric.n_qubits() || direction.is_identity() {
        return Err(GeodesicError::InvalidArgument(format!(
            "{direction} is not a direction on {} qubits",
            metric.n_qubits()
        )));
    }
    if config.deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(GeodesicError::InvalidArgument("deltas must be positive".into()));
    }
    let id = UnitaryMatrix::identity(metric.dim());
    let points = config
        .deltas
        .par_iter()
        .map(|&delta| {
            let v = rotation(direction, delta)?;
            match solve_bvp(&id, &v, metric, &config.solver) {
                Ok(est) => Ok(HolderPoint {
                    delta,
                    distance: est.value,
                    endpoint_error: est.endpoint_error,
                    converged: true,
                }),
                Err(GeodesicError::NoConvergence { best }) => Ok(HolderPoint {
                    delta,
                    distance: best.value,
                    endpoint_error: best.endpoint_error,
                    converged: false,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.converged && p.distance > 0.0)
        .map(|p| (p.delta.ln(), p.distance.ln()))
        .unzip();
    if x.len() < 4 {
        return Err(GeodesicError::InsufficientData {
            needed: 4,
            got: x.len(),
        });
    }
    let fit = linear_fit(&x, &y).ok_or(GeodesicError::InsufficientData {
        needed: 4,
        got: x.len(),
    })?;
    let expected = grow_flag(metric.easy_set())
        .degree(direction)
        .map(|d| 1.0 / d as f64);
    Ok(HolderResult {
        direction: direction.to_string(),
        expected,
        points,
        fit,
        slope_interval: fit.slope_interval(CONFIDENCE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutLocusConfig {
    pub q_grid: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points_per_decade: usize,
    pub bisection_steps: usize,
    pub solver: SolverConfig,
}

impl Default for CutLocusConfig {
    fn default() -> Self {
        Self {
            q_grid: vec![1e1, 1e2, 1e3, 1e4],
            delta_min: 1e-6,
            delta_max: 3.0,
            points_per_decade: 4,
            bisection_steps: 10,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossoverPoint {
    pub q: f64,
    pub delta_star: f64,
    /// `C_q` at `δ*`.
    pub distance: f64,
    pub direct: f64,
    /// Horizontal distance at `δ*`.
    pub horizontal: f64,
    pub endpoint_error: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CutLocusResult {
    pub direction: String,
    pub points: Vec<CrossoverPoint>,
    /// Penalty factors without a bracketed crossover.
    pub dropped: Vec<f64>,
    /// `log δ*` against `log q`.
    pub fit: LinearFit,
}

/// For each `q`, the `δ` at which `C_q(1, e^{−iδP})` falls to
/// [`CROSSOVER_RATIO`] times the straight-line value `√q·δ`, and the slope of
/// `log δ*` against `log q`.
pub fn cutlocus_experiment(
    easy: &Distribution,
    direction: &PauliString,
    config: &CutLocusConfig,
) -> Result<CutLocusResult> {
    if easy.contains(direction) || direction.is_identity() || direction.n_qubits() != easy.n_qubits() {
        return Err(GeodesicError::InvalidArgument(format!("{direction} is not a hard direction")));
    }
    let (qmin, qmax) = config
        .q_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    if config.q_grid.is_empty() || !(qmin >= 1.0) || !(qmax >= 100.0 * qmin) {
        return Err(GeodesicError::InvalidArgument(
            "q grid must be at least 1 and span two decades".into(),
        ));
    }
    if !(config.delta_min > 0.0 && config.delta_max > config.delta_min) || config.points_per_decade == 0 {
        return Err(GeodesicError::InvalidArgument("invalid delta range".into()));
    }
    let horizontal = PenaltyMetric::new(easy.clone(), Penalty::Infinity)?;
    let outcomes = config
        .q_grid
        .par_iter()
        .map(|&q| crossover(easy, direction, q, &horizontal, config))
        .collect::<Vec<_>>();
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for (q, outcome) in config.q_grid.iter().zip(outcomes) {
        match outcome {
            Ok(p) => points.push(p),
            Err(GeodesicError::BracketError { .. } | GeodesicError::NoConvergence { .. }) => {
                dropped.push(*q)
            }
            Err(e) => return Err(e),
        }
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.q.ln(), p.delta_star.ln())).unzip();
    let fit = linear_fit(&x, &y).ok_or(GeodesicError::InsufficientData {
        needed: 2,
        got: x.len(),
    })?;
    Ok(CutLocusResult {
        direction: direction.to_string(),
        points,
        dropped,
        fit,
    })
}

fn crossover(
    easy: &Distribution,
    direction: &PauliString,
    q: f64,
    horizontal: &PenaltyMetric,
    config: &CutLocusConfig,
) -> Result<CrossoverPoint> {
    let metric = PenaltyMetric::new(easy.clone(), Penalty::Finite(q))?;
    let id = UnitaryMatrix::identity(metric.dim());
    let sqrt_q = q.sqrt();
    let ratio = |delta: f64| -> Result<(f64, f64, f64)> {
        let est = solve_bvp(&id, &rotation(direction, delta)?, &metric, &config.solver)?;
        Ok((est.value / (sqrt_q * delta), est.value, est.endpoint_error))
    };
    let decades = (config.delta_max / config.delta_min).log10();
    let n = (decades * config.points_per_decade as f64).ceil() as usize + 1;
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            config.delta_min * (config.delta_max / config.delta_min).powf(f)
        })
        .collect();
    // first grid point below the threshold
    let mut lo = None;
    let mut hi = None;
    for (i, &delta) in grid.iter().enumerate() {
        let (r, _, _) = ratio(delta)?;
        if r < CROSSOVER_RATIO {
            if i > 0 {
                lo = Some(grid[i - 1]);
                hi = Some(delta);
            }
            break;
        }
    }
    let (Some(mut lo), Some(mut hi)) = (lo, hi) else {
        return Err(GeodesicError::BracketError { q });
    };
    for _ in 0..config.bisection_steps {
        let mid = (lo * hi).sqrt();
        if ratio(mid)?.0 < CROSSOVER_RATIO {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let delta_star = (lo * hi).sqrt();
    let (_, distance, endpoint_error) = ratio(delta_star)?;
    let v = rotation(direction, delta_star)?;
    let flat = solve_bvp(&id, &v, horizontal, &config.solver)?.value;
    Ok(CrossoverPoint {
        q,
        delta_star,
        distance,
        direct: sqrt_q * delta_star,
        horizontal: flat,
        endpoint_error,
        bracket: (lo, hi),
    })
}
