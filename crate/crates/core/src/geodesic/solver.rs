//! Energy minimization with a quadratic endpoint penalty.
//!
//! Unknowns are the scaled coefficients `z = √w·h` of every segment, so the
//! energy is `Σ Δt_k ‖z_k‖²` whatever the penalty factor. The residual
//! `[√Δt·z ; √μ·vec(W − T)]` is driven down by Levenberg–Marquardt for
//! increasing `μ`, then a minimum-norm Gauss–Newton step removes what is
//! left of the endpoint error.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{path_cost, path_endpoint, ControlPath, GeodesicError, PenaltyMetric, Result, Segment};
use crate::algebra::{
    biinvariant_distance, principal_log, AlgebraError, CMatrix, ExpDerivative, UnitaryMatrix, C64,
};

const MU_START: f64 = 10.0;
const MU_GROWTH: f64 = 10.0;
const MU_MAX: f64 = 1e13;
const POLISH_STEPS: usize = 8;
/// Singular values below this fraction of the largest are dropped in the
/// minimum-norm step.
const PINV_RTOL: f64 = 1e-10;
const LAMBDA_MIN: f64 = 1e-15;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub segments: usize,
    pub starts: usize,
    /// Levenberg–Marquardt iterations per penalty stage.
    pub max_iterations: usize,
    /// Endpoint tolerance in Hilbert–Schmidt distance.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            segments: 16,
            starts: 8,
            max_iterations: 300,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.segments == 0 || self.starts == 0 || self.max_iterations == 0 {
            return Err(GeodesicError::InvalidArgument(
                "segments, starts and max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(GeodesicError::InvalidArgument(format!(
                "tolerance {} is not positive",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceEstimate {
    /// Length of the best path, an upper bound on the distance.
    pub value: f64,
    pub endpoint_error: f64,
    /// Spread of the values reached by the converged starts.
    pub multistart_spread: f64,
    /// Constant-speed reparameterization of the best path.
    pub path: ControlPath,
    pub converged: bool,
    pub converged_starts: usize,
}

/// `∂W/∂h_{k,a}` for every segment `k` and basis direction `a`, with
/// `W = path_endpoint(path, start)`.
pub fn endpoint_derivatives(
    path: &ControlPath,
    start: &UnitaryMatrix,
    metric: &PenaltyMetric,
) -> Result<(UnitaryMatrix, Vec<Vec<CMatrix>>)> {
    let end = path_endpoint(path, start)?;
    let dirs = metric
        .basis()
        .iter()
        .map(|p| p.to_matrix())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let exps = path.exponentials(metric.basis())?;
    let (_, cols) = chain_derivatives(&exps, &dirs);
    let per_segment = dirs.len();
    let mut out = Vec::with_capacity(exps.len());
    let mut it = cols.into_iter();
    for _ in 0..exps.len() {
        out.push(
            it.by_ref()
                .take(per_segment)
                .map(|c| c * start.matrix())
                .collect(),
        );
    }
    Ok((end, out))
}

/// Product `E_m···E_1` and its derivatives along `dirs` in every segment,
/// segment-major.
fn chain_derivatives(exps: &[ExpDerivative], dirs: &[CMatrix]) -> (CMatrix, Vec<CMatrix>) {
    let m = exps.len();
    let d = dirs[0].nrows();
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(CMatrix::identity(d, d));
    for e in exps {
        let next = &e.exp * prefix.last().unwrap();
        prefix.push(next);
    }
    let mut suffix = vec![CMatrix::identity(d, d); m + 1];
    for k in (0..m).rev() {
        suffix[k] = &suffix[k + 1] * &exps[k].exp;
    }
    let mut cols = Vec::with_capacity(m * dirs.len());
    for k in 0..m {
        for p in dirs {
            cols.push(&suffix[k + 1] * exps[k].directional(p) * &prefix[k]);
        }
    }
    (prefix.pop().unwrap(), cols)
}

/// Path from the identity to `target` in the scaled free coordinates.
struct Problem {
    n_qubits: usize,
    n_basis: usize,
    target: CMatrix,
    /// Basis indices with finite weight.
    free: Vec<usize>,
    /// `1/√w` per free index.
    scale: Vec<f64>,
    dirs: Vec<CMatrix>,
    dts: Vec<f64>,
}

impl Problem {
    fn new(metric: &PenaltyMetric, target: CMatrix, m: usize) -> Result<Self> {
        let mut free = Vec::new();
        let mut scale = Vec::new();
        let mut dirs = Vec::new();
        for (a, p) in metric.basis().iter().enumerate() {
            if let Some(w) = metric.weight(a) {
                free.push(a);
                scale.push(1.0 / w.sqrt());
                dirs.push(p.to_matrix()?);
            }
        }
        let dts = ControlPath::zero(metric.n_qubits(), m)?
            .segments()
            .iter()
            .map(|s| s.dt)
            .collect();
        Ok(Self {
            n_qubits: metric.n_qubits(),
            n_basis: metric.basis().len(),
            target,
            free,
            scale,
            dirs,
            dts,
        })
    }

    fn nf(&self) -> usize {
        self.free.len()
    }

    fn n(&self) -> usize {
        self.nf() * self.dts.len()
    }

    fn exponentials(&self, x: &DVector<f64>) -> Vec<ExpDerivative> {
        let d = self.target.nrows();
        let nf = self.nf();
        self.dts
            .iter()
            .enumerate()
            .map(|(k, &dt)| {
                let mut h = CMatrix::zeros(d, d);
                for j in 0..nf {
                    let c = x[k * nf + j] * self.scale[j];
                    if c != 0.0 {
                        h += &self.dirs[j] * C64::new(c, 0.0);
                    }
                }
                ExpDerivative::new(&h, dt)
            })
            .collect()
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        let nf = self.nf();
        self.dts
            .iter()
            .enumerate()
            .map(|(k, dt)| dt * x.rows(k * nf, nf).norm_squared())
            .sum()
    }

    fn residual(&self, w: &CMatrix) -> DVector<f64> {
        let diff = w - &self.target;
        DVector::from_iterator(2 * diff.len(), diff.iter().flat_map(|z| [z.re, z.im]))
    }

    fn constraint(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut w = CMatrix::identity(self.target.nrows(), self.target.nrows());
        for e in self.exponentials(x) {
            w = &e.exp * w;
        }
        self.residual(&w)
    }

    fn constraint_jacobian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let exps = self.exponentials(x);
        let (w, cols) = chain_derivatives(&exps, &self.dirs);
        let nf = self.nf();
        let rows = 2 * w.len();
        let mut jac = DMatrix::zeros(rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            let s = self.scale[c % nf];
            for (i, z) in col.iter().enumerate() {
                jac[(2 * i, c)] = z.re * s;
                jac[(2 * i + 1, c)] = z.im * s;
            }
        }
        (self.residual(&w), jac)
    }

    fn dt_of(&self, i: usize) -> f64 {
        self.dts[i / self.nf()]
    }

    /// Levenberg–Marquardt on `energy + μ‖c‖²` from `x`.
    fn minimize(&self, mut x: DVector<f64>, mu: f64, max_iter: usize) -> DVector<f64> {
        let n = self.n();
        let mut lambda = 1e-3;
        let (mut c, mut jac) = self.constraint_jacobian(&x);
        let mut cost = self.energy(&x) + mu * c.norm_squared();
        for _ in 0..max_iter {
            let mut a = jac.tr_mul(&jac) * mu;
            let mut g = jac.tr_mul(&c) * mu;
            for i in 0..n {
                let dt = self.dt_of(i);
                a[(i, i)] += dt;
                g[i] += dt * x[i];
            }
            if g.amax() <= 1e-15 * (1.0 + cost) {
                break;
            }
            let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].max(1e-12)).collect();
            let mut accepted = None;
            while lambda < LAMBDA_MAX {
                let mut damped = a.clone();
                for (i, &di) in diag.iter().enumerate() {
                    damped[(i, i)] += lambda * di;
                }
                let Some(chol) = damped.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let step = -chol.solve(&g);
                let trial = &x + &step;
                let trial_cost = self.energy(&trial) + mu * self.constraint(&trial).norm_squared();
                if trial_cost < cost {
                    lambda = (lambda / 3.0).max(LAMBDA_MIN);
                    accepted = Some((trial, trial_cost, step.norm()));
                    break;
                }
                lambda *= 4.0;
            }
            let Some((trial, trial_cost, step_norm)) = accepted else {
                break;
            };
            let decrease = cost - trial_cost;
            x = trial;
            cost = trial_cost;
            (c, jac) = self.constraint_jacobian(&x);
            if decrease <= 1e-14 * cost || step_norm <= 1e-13 * (x.norm() + 1e-13) {
                break;
            }
        }
        x
    }

    /// Minimum-norm Gauss–Newton steps on the endpoint constraint alone.
    fn polish(&self, mut x: DVector<f64>) -> DVector<f64> {
        let mut err = self.constraint(&x).norm();
        for _ in 0..POLISH_STEPS {
            if err < 1e-14 {
                break;
            }
            let (c, jac) = self.constraint_jacobian(&x);
            let svd = jac.svd(true, true);
            let smax = svd.singular_values.max();
            let Ok(step) = svd.solve(&c, smax * PINV_RTOL) else {
                break;
            };
            let trial = &x - step;
            let trial_err = self.constraint(&trial).norm();
            if !(trial_err < err) {
                break;
            }
            x = trial;
            err = trial_err;
        }
        x
    }

    fn to_path(&self, x: &DVector<f64>) -> Result<ControlPath> {
        let nf = self.nf();
        let segments = self
            .dts
            .iter()
            .enumerate()
            .map(|(k, &dt)| {
                let mut coefficients = vec![0.0; self.n_basis];
                for (j, &a) in self.free.iter().enumerate() {
                    coefficients[a] = x[k * nf + j] * self.scale[j];
                }
                Segment { coefficients, dt }
            })
            .collect();
        ControlPath::new(self.n_qubits, segments)
    }

    /// Scaled coordinates of the constant path `H` on every segment.
    fn constant(&self, h: &[f64]) -> DVector<f64> {
        let nf = self.nf();
        DVector::from_fn(self.n(), |i, _| {
            let j = i % nf;
            h[self.free[j]] / self.scale[j]
        })
    }
}

struct StartResult {
    value: f64,
    endpoint_error: f64,
    path: ControlPath,
}

/// Shortest path from `U` to `V` found by multistart penalty continuation.
///
/// A result whose best start misses the tolerance comes back as
/// [`GeodesicError::NoConvergence`] carrying that attempt.
pub fn solve_bvp(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    metric: &PenaltyMetric,
    config: &SolverConfig,
) -> Result<DistanceEstimate> {
    config.validate()?;
    if u.dim() != v.dim() {
        return Err(AlgebraError::DimensionMismatch(u.dim(), v.dim()).into());
    }
    if u.dim() != metric.dim() {
        return Err(AlgebraError::DimensionMismatch(u.dim(), metric.dim()).into());
    }
    let target = v.mul(&u.adjoint());
    let problem = Problem::new(metric, target.matrix().clone(), config.segments)?;
    let basis_len = metric.basis().len();
    let d = metric.dim() as f64;
    // start 0: the straight line e^{−iHt} with e^{−iH} = V U†
    let straight = match principal_log(&target) {
        Ok(log) => metric
            .basis()
            .iter()
            .map(|p| {
                let pm = p.to_matrix()?;
                Ok(-(&pm * log.generator.matrix()).trace().re / d)
            })
            .collect::<Result<Vec<f64>>>()?,
        Err(AlgebraError::BranchCut(_)) => vec![0.0; basis_len],
        Err(e) => return Err(e.into()),
    };
    let scale = biinvariant_distance(u, v).unwrap_or(1.0).max(0.05);
    let sigma = scale / (problem.nf() as f64).sqrt();

    let results: Vec<Result<StartResult>> = (0..config.starts)
        .into_par_iter()
        .map(|s| {
            let x0 = if s == 0 {
                problem.constant(&straight)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(s as u64);
                let normal = Normal::new(0.0, sigma).expect("positive spread");
                DVector::from_fn(problem.n(), |_, _| normal.sample(&mut rng))
            };
            run_start(&problem, x0, u, v, metric, config)
        })
        .collect();

    let mut all = Vec::with_capacity(results.len());
    for r in results {
        all.push(r?);
    }
    let converged: Vec<&StartResult> = all
        .iter()
        .filter(|r| r.endpoint_error < config.tolerance)
        .collect();
    if converged.is_empty() {
        let best = all
            .iter()
            .min_by(|a, b| a.endpoint_error.total_cmp(&b.endpoint_error))
            .expect("at least one start");
        return Err(GeodesicError::NoConvergence {
            best: Box::new(DistanceEstimate {
                value: best.value,
                endpoint_error: best.endpoint_error,
                multistart_spread: 0.0,
                path: best.path.clone(),
                converged: false,
                converged_starts: 0,
            }),
        });
    }
    let best = converged
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("nonempty");
    let worst = converged
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DistanceEstimate {
        value: best.value,
        endpoint_error: best.endpoint_error,
        multistart_spread: worst - best.value,
        path: best.path.clone(),
        converged: true,
        converged_starts: converged.len(),
    })
}

fn run_start(
    problem: &Problem,
    mut x: DVector<f64>,
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    metric: &PenaltyMetric,
    config: &SolverConfig,
) -> Result<StartResult> {
    // the penalty must outweigh the energy of any path at the start, or
    // small targets collapse onto the zero path
    let initial = problem.constraint(&DVector::zeros(problem.n())).norm_squared();
    let mut mu = (MU_START / initial.min(1.0)).min(MU_MAX);
    loop {
        x = problem.minimize(x, mu, config.max_iterations);
        let err = problem.constraint(&x).norm();
        if err < config.tolerance || mu >= MU_MAX {
            break;
        }
        mu *= MU_GROWTH;
    }
    x = problem.polish(x);
    let path = problem.to_path(&x)?.constant_speed(metric)?;
    let value = path_cost(&path, metric)?.length;
    let endpoint_error = path_endpoint(&path, u)?.distance(v);
    Ok(StartResult {
        value,
        endpoint_error,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{hermitian_from_coefficients, mat_exp, pauli_basis, random::haar_unitary};
    use crate::geodesic::Penalty;
    use crate::locality::Locality;
    use crate::subriemannian::{build_distribution, parse_distribution};
    use rand::Rng;
    use std::f64::consts::FRAC_PI_2;

    fn metric(n: usize, pattern: &str, penalty: Penalty) -> PenaltyMetric {
        PenaltyMetric::new(parse_distribution(n, pattern).unwrap(), penalty).unwrap()
    }

    fn exp_of(n: usize, coeffs: &[f64]) -> UnitaryMatrix {
        let basis = pauli_basis(n).unwrap();
        mat_exp(&hermitian_from_coefficients(&basis, coeffs).unwrap(), 1.0)
    }

    fn check_gradient(n: usize, m: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = (1 << (2 * n)) - 1;
        let coeffs: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let path = ControlPath::uniform(n, coeffs.clone()).unwrap();
        let start = haar_unitary(1 << n, &mut rng);
        let met = PenaltyMetric::new(
            build_distribution(n, Locality::AllToAll).unwrap(),
            Penalty::Finite(1.0),
        )
        .unwrap();
        let (_, analytic) = endpoint_derivatives(&path, &start, &met).unwrap();
        let h = 1e-5;
        for k in 0..m {
            for a in 0..p {
                let shifted = |s: f64| {
                    let mut c = coeffs.clone();
                    c[k][a] += s;
                    path_endpoint(&ControlPath::uniform(n, c).unwrap(), &start)
                        .unwrap()
                        .into_matrix()
                };
                let fd = (shifted(h) - shifted(-h)) / C64::new(2.0 * h, 0.0);
                let diff = (&fd - &analytic[k][a]).norm();
                assert!(
                    diff <= 1e-5 * analytic[k][a].norm(),
                    "segment {k} direction {a}: {diff:e}"
                );
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        check_gradient(1, 8, 1);
        check_gradient(1, 3, 2);
        check_gradient(2, 4, 3);
    }

    #[test]
    fn identity_target_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(2, &mut rng);
        let est = solve_bvp(&u, &u, &metric(1, "Y,Z", Penalty::Finite(1.0)), &SolverConfig::default())
            .unwrap();
        assert!(est.value < 1e-9);
        assert!(est.endpoint_error < 1e-9);
    }

    #[test]
    fn half_pi_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = haar_unitary(2, &mut rng);
        let v = exp_of(1, &[0.0, 0.0, FRAC_PI_2]).mul(&u);
        let est = solve_bvp(&u, &v, &metric(1, "Y,Z", Penalty::Finite(1.0)), &SolverConfig::default())
            .unwrap();
        assert!((est.value - FRAC_PI_2).abs() < 0.01 * FRAC_PI_2, "{}", est.value);
        assert!(est.endpoint_error < 1e-6);
    }

    #[test]
    fn q_one_matches_biinvariant_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let met = metric(1, "Y,Z", Penalty::Finite(1.0));
        let config = SolverConfig {
            seed: 7,
            ..SolverConfig::default()
        };
        for _ in 0..5 {
            let u = haar_unitary(2, &mut rng);
            let v = haar_unitary(2, &mut rng);
            let exact = biinvariant_distance(&u, &v).unwrap();
            let est = solve_bvp(&u, &v, &met, &config).unwrap();
            assert!((est.value - exact).abs() <= 0.01 * exact, "{} vs {exact}", est.value);
        }
    }

    #[test]
    fn penalty_raises_hard_distance() {
        let u = UnitaryMatrix::identity(2);
        let v = exp_of(1, &[0.3, 0.0, 0.0]);
        let config = SolverConfig::default();
        let low = solve_bvp(&u, &v, &metric(1, "Y,Z", Penalty::Finite(1.0)), &config).unwrap();
        let high = solve_bvp(&u, &v, &metric(1, "Y,Z", Penalty::Finite(9.0)), &config).unwrap();
        assert!((low.value - 0.3).abs() < 1e-3);
        assert!(high.value > low.value + 0.1);
        assert!(high.value <= 0.9 + 1e-6);
    }

    #[test]
    fn horizontal_hard_rotation_follows_loop_law() {
        let u = UnitaryMatrix::identity(2);
        let delta = 0.01;
        let v = exp_of(1, &[delta, 0.0, 0.0]);
        let est = solve_bvp(&u, &v, &metric(1, "Y,Z", Penalty::Infinity), &SolverConfig::default())
            .unwrap();
        let circle = (2.0 * std::f64::consts::PI * delta).sqrt();
        assert!(est.value >= circle * (1.0 - 1e-3), "{}", est.value);
        assert!(est.value <= circle * 1.02, "{} vs {circle}", est.value);
        assert!(est.path.segments().iter().all(|s| s.coefficients[0] == 0.0));
    }

    #[test]
    fn invalid_config_rejected() {
        let u = UnitaryMatrix::identity(2);
        let met = metric(1, "Y,Z", Penalty::Finite(1.0));
        let bad = SolverConfig {
            starts: 0,
            ..SolverConfig::default()
        };
        assert!(solve_bvp(&u, &u, &met, &bad).is_err());
        assert!(solve_bvp(&u, &UnitaryMatrix::identity(4), &met, &SolverConfig::default()).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let met = metric(1, "Y,Z", Penalty::Finite(4.0));
        let config = SolverConfig {
            seed: 99,
            ..SolverConfig::default()
        };
        let a = solve_bvp(&u, &v, &met, &config).unwrap();
        let b = solve_bvp(&u, &v, &met, &config).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.path, b.path);
    }
}
