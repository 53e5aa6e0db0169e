use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::fmt::{Display, Write};

use super::{module_error, Experiment, ExperimentConfig, HarnessError, Output};
use crate::algebra::random::haar_unitary;
use crate::algebra::{biinvariant_distance, PauliString};
use crate::geodesic::{
    cutlocus_experiment, holder_experiment, solve_bvp, CutLocusConfig, GeodesicError, HolderConfig,
    Penalty, PenaltyMetric, SolverConfig,
};
use crate::subriemannian::{grow_flag, parse_distribution};
use crate::u1::{u1_scaling_scan, CirclePoint};
use crate::words::{
    algebraic_target_scans, build_su2_gateset, cayley_growth, diophantine_report, free_group_check,
    growth_comparison, EnumerationBudget, GateSet, FLOOR_SLACK,
};

type Result<T> = std::result::Result<T, HarnessError>;

fn default_angle() -> String {
    "1/3".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiophParams {
    /// `cos πα` as a fraction.
    pub cos_pi_alpha: String,
    pub l_max: usize,
}

impl Default for DiophParams {
    fn default() -> Self {
        Self {
            cos_pi_alpha: default_angle(),
            l_max: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeCheckParams {
    pub cos_pi_alpha: String,
    pub max_cost: usize,
    pub tolerance: f64,
}

impl Default for FreeCheckParams {
    fn default() -> Self {
        Self {
            cos_pi_alpha: default_angle(),
            max_cost: 10,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CayleyParams {
    pub r_max: usize,
    pub generators: usize,
    /// Exponent of the polynomial `r^{n_H}` compared against.
    pub hausdorff_dim: u32,
}

impl Default for CayleyParams {
    fn default() -> Self {
        Self {
            r_max: 10,
            generators: 2,
            hausdorff_dim: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct U1Params {
    pub alpha: f64,
    /// Drawn uniformly from the seed when absent.
    pub phi: Option<f64>,
    pub eps_max: f64,
    pub eps_min: f64,
    pub points: usize,
    pub n_max: u64,
}

impl Default for U1Params {
    fn default() -> Self {
        Self {
            alpha: TAU * (5f64.sqrt() - 1.0) / 2.0,
            phi: None,
            eps_max: 1e-1,
            eps_min: 1e-6,
            points: 11,
            n_max: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityParams {
    pub cos_pi_alpha: String,
    pub base_points: usize,
    pub denominators: Vec<i64>,
    pub radius: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub points: usize,
    pub max_cost: usize,
    /// Length range of the Diophantine fit behind the lower-bound line; 0
    /// leaves the line out.
    pub dioph_l_max: usize,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            cos_pi_alpha: default_angle(),
            base_points: 3,
            denominators: (8..=24).collect(),
            radius: 0.3,
            eps_max: 1e-1,
            eps_min: 1e-3,
            points: 7,
            max_cost: 14,
            dioph_l_max: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlagParams {
    pub n_qubits: usize,
    /// `all-to-all`, `ring` or a comma-separated list of strings.
    pub pattern: String,
}

impl Default for FlagParams {
    fn default() -> Self {
        Self {
            n_qubits: 1,
            pattern: "Y,Z".into(),
        }
    }
}

/// A penalty factor, or the string `"inf"` for the horizontal restriction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PenaltyParam {
    Finite(f64),
    Named(InfinityName),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfinityName {
    #[serde(rename = "inf")]
    Inf,
}

impl PenaltyParam {
    fn penalty(self) -> Penalty {
        match self {
            PenaltyParam::Finite(q) => Penalty::Finite(q),
            PenaltyParam::Named(InfinityName::Inf) => Penalty::Infinity,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicParams {
    pub n_qubits: usize,
    pub easy: String,
    pub q: PenaltyParam,
    pub pairs: usize,
    pub solver: SolverConfig,
}

impl Default for GeodesicParams {
    fn default() -> Self {
        Self {
            n_qubits: 1,
            easy: "Y,Z".into(),
            q: PenaltyParam::Finite(1.0),
            pairs: 5,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderParams {
    pub n_qubits: usize,
    pub easy: String,
    pub direction: String,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub solver: SolverConfig,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self {
            n_qubits: 1,
            easy: "Y,Z".into(),
            direction: "X".into(),
            delta_min: 1e-3,
            delta_max: 1e-1,
            points: 9,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutlocParams {
    pub n_qubits: usize,
    pub easy: String,
    pub direction: String,
    pub q_grid: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points_per_decade: usize,
    pub bisection_steps: usize,
    pub solver: SolverConfig,
}

impl Default for CutlocParams {
    fn default() -> Self {
        let c = CutLocusConfig::default();
        Self {
            n_qubits: 1,
            easy: "Y,Z".into(),
            direction: "X".into(),
            q_grid: c.q_grid,
            delta_min: c.delta_min,
            delta_max: c.delta_max,
            points_per_decade: c.points_per_decade,
            bisection_steps: c.bisection_steps,
            solver: c.solver,
        }
    }
}

pub(crate) enum Params {
    Dioph(DiophParams),
    FreeCheck(FreeCheckParams),
    Cayley(CayleyParams),
    U1(U1Params),
    Complexity(ComplexityParams),
    Flag(FlagParams),
    Geodesic(GeodesicParams),
    Holder(HolderParams),
    Cutloc(CutlocParams),
}

fn parse<T: DeserializeOwned>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| HarnessError::Config(format!("params: {e}")))
}

pub(crate) fn parse_params(config: &ExperimentConfig) -> Result<Params> {
    let p = &config.params;
    let params = match config.experiment {
        Experiment::DiophScan => Params::Dioph(parse(p)?),
        Experiment::FreeCheck => Params::FreeCheck(parse(p)?),
        Experiment::Cayley => Params::Cayley(parse(p)?),
        Experiment::U1Scan => {
            let u: U1Params = parse(p)?;
            if u.phi.is_none() && config.seed.is_none() {
                return Err(HarnessError::Config("u1-scan needs phi or a seed".into()));
            }
            Params::U1(u)
        }
        Experiment::ComplexityScan => Params::Complexity(parse(p)?),
        Experiment::Flag => Params::Flag(parse(p)?),
        Experiment::Geodesic => Params::Geodesic(parse(p)?),
        Experiment::Holder => Params::Holder(parse(p)?),
        Experiment::Cutloc => Params::Cutloc(parse(p)?),
    };
    Ok(params)
}

pub(crate) fn dispatch(config: &ExperimentConfig) -> Result<Output> {
    config.validate()?;
    let seed = config.seed;
    match parse_params(config)? {
        Params::Dioph(p) => dioph_scan(&p),
        Params::FreeCheck(p) => free_check(&p),
        Params::Cayley(p) => cayley(&p),
        Params::U1(p) => u1_scan(&p, seed),
        Params::Complexity(p) => complexity_scan(&p, seed.expect("validated")),
        Params::Flag(p) => flag(&p),
        Params::Geodesic(p) => geodesic(&p, seed.expect("validated")),
        Params::Holder(p) => holder(&p, seed.expect("validated")),
        Params::Cutloc(p) => cutloc(&p, seed.expect("validated")),
    }
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn gateset(cos_pi_alpha: &str) -> Result<GateSet> {
    let r: Ratio<i64> = cos_pi_alpha
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("cos_pi_alpha {cos_pi_alpha:?} is not a fraction")))?;
    build_su2_gateset(r).map_err(module_error)
}

/// `points` values from `hi` down to `lo`, evenly spaced in `log`.
fn log_grid(hi: f64, lo: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(HarnessError::Config(format!(
            "grid needs 0 < min < max and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    Ok((0..points)
        .map(|i| hi * (lo / hi).powf(i as f64 / (points - 1) as f64))
        .collect())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn dioph_scan(p: &DiophParams) -> Result<Output> {
    let gates = gateset(&p.cos_pi_alpha)?;
    let (points, report) = diophantine_report(&gates, p.l_max).map_err(module_error)?;
    let mut csv = String::from("l,min_gap,floor,fitted_gap,relative_residual,center\n");
    for (pt, res) in points.iter().zip(&report.relative_residuals) {
        let l = pt.l as f64;
        let floor = report.fitted_d.powf(-l) / FLOOR_SLACK;
        let fitted = (-report.intercept - l * report.fitted_d.ln()).exp();
        writeln!(csv, "{},{},{},{},{},{}", pt.l, pt.min_gap, floor, fitted, res, pt.center).unwrap();
    }
    let witnesses: Vec<Value> = points.iter().map(|pt| pt.witness.to_json(&gates)).collect();
    let summary = json!({ "report": report, "witnesses": witnesses });
    Ok(Output {
        files: vec![("dioph-scan.csv".into(), csv), ("dioph-scan.json".into(), pretty(&summary))],
        total: points.len(),
        failed: 0,
        failure: "NotFound",
    })
}

fn free_check(p: &FreeCheckParams) -> Result<Output> {
    let gates = gateset(&p.cos_pi_alpha)?;
    let census = free_group_check(&gates, p.max_cost, p.tolerance, EnumerationBudget::default())
        .map_err(module_error)?;
    let mut csv = String::from("l,words,distinct,expected\n");
    for l in 0..census.word_counts.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            l + 1,
            census.word_counts[l],
            census.distinct_counts[l],
            census.expected_counts[l]
        )
        .unwrap();
    }
    let summary = json!({
        "free": census.free,
        "tol": census.tol,
        "collision_count": census.collision_count,
        "collisions": census.collisions.iter().map(|c| json!({
            "first": c.first.to_json(&gates),
            "second": c.second.to_json(&gates),
            "distance": c.distance,
        })).collect::<Vec<_>>(),
    });
    Ok(Output {
        files: vec![("free-check.csv".into(), csv), ("free-check.json".into(), pretty(&summary))],
        total: 0,
        failed: 0,
        failure: "NotFound",
    })
}

fn cayley(p: &CayleyParams) -> Result<Output> {
    let shells = cayley_growth(p.r_max, p.generators).map_err(module_error)?;
    let cmp = growth_comparison(p.r_max, p.generators, p.hausdorff_dim).map_err(module_error)?;
    let mut csv = String::from("r,shell,ball,ball_ratio,polynomial,ball_over_polynomial\n");
    let mut prev: Option<u128> = None;
    for (s, c) in shells.iter().zip(&cmp) {
        let ratio = prev.map(|b| s.ball as f64 / b as f64);
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            s.radius,
            s.shell,
            s.ball,
            opt(ratio),
            c.polynomial,
            c.ratio
        )
        .unwrap();
        prev = Some(s.ball);
    }
    Ok(Output {
        files: vec![("cayley.csv".into(), csv)],
        total: 0,
        failed: 0,
        failure: "NotFound",
    })
}

fn u1_scan(p: &U1Params, seed: Option<u64>) -> Result<Output> {
    let phi = match p.phi {
        Some(phi) => phi,
        None => ChaCha8Rng::seed_from_u64(seed.expect("validated")).random_range(0.0..TAU),
    };
    let grid = log_grid(p.eps_max, p.eps_min, p.points)?;
    let scan = u1_scaling_scan(CirclePoint::new(phi), p.alpha, &grid, p.n_max).map_err(module_error)?;
    let mut csv = String::from("epsilon,complexity,reference_line,n,m,offset,chain_holds,implied_bound\n");
    for pt in &scan.points {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            pt.epsilon,
            opt(pt.complexity),
            pt.reference_line,
            opt(pt.n),
            opt(pt.chain.map(|c| c.m)),
            opt(pt.chain.map(|c| c.offset)),
            opt(pt.chain.map(|c| c.holds)),
            opt(pt.implied_bound)
        )
        .unwrap();
    }
    let failed = scan.points.iter().filter(|p| p.complexity.is_none()).count();
    let summary = json!({
        "phi": phi,
        "alpha": p.alpha,
        "slope": scan.slope,
        "loglog_slope": scan.loglog_slope,
        "envelope": scan.envelope,
        "envelope_holds": scan.envelope_holds,
        "rational_alpha": scan.rational_alpha,
    });
    Ok(Output {
        files: vec![("u1-scan.csv".into(), csv), ("u1-scan.json".into(), pretty(&summary))],
        total: scan.points.len(),
        failed,
        failure: "NotFound",
    })
}

fn complexity_scan(p: &ComplexityParams, seed: u64) -> Result<Output> {
    let gates = gateset(&p.cos_pi_alpha)?;
    let grid = log_grid(p.eps_max, p.eps_min, p.points)?;
    let report = if p.dioph_l_max > 0 {
        Some(diophantine_report(&gates, p.dioph_l_max).map_err(module_error)?.1)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases: Vec<_> = (0..p.base_points).map(|_| haar_unitary(2, &mut rng)).collect();
    let scans = algebraic_target_scans(&gates, &bases, &p.denominators, p.radius, &grid, p.max_cost, report.as_ref())
        .map_err(module_error)?;
    let mut csv = String::from(
        "base,denominator,quaternion,base_distance,epsilon,complexity,lower_bound_line,accepted\n",
    );
    for s in &scans {
        let q = s.quaternion.map(|v| v.to_string()).join(" ");
        for (i, &eps) in grid.iter().enumerate() {
            let pt = s.scan.as_ref().map(|sc| &sc.points[i]);
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                s.base,
                s.denominator,
                q,
                s.base_distance,
                eps,
                opt(pt.and_then(|p| p.complexity)),
                opt(pt.and_then(|p| p.lower_bound_line)),
                s.accepted
            )
            .unwrap();
        }
    }
    let accepted: Vec<Value> = (0..bases.len())
        .map(|b| {
            let hit = scans.iter().find(|s| s.base == b && s.accepted);
            json!({
                "base": b,
                "tried": scans.iter().filter(|s| s.base == b).count(),
                "denominator": hit.map(|s| s.denominator),
                "slope": hit.and_then(|s| s.scan.as_ref()).map(|s| s.slope),
            })
        })
        .collect();
    let failed = accepted.iter().filter(|a| a["denominator"].is_null()).count();
    let summary = json!({
        "fitted_d": report.as_ref().map(|r| r.fitted_d),
        "bases": accepted,
        "scans": scans,
    });
    Ok(Output {
        files: vec![
            ("complexity-scan.csv".into(), csv),
            ("complexity-scan.json".into(), pretty(&summary)),
        ],
        total: bases.len(),
        failed,
        failure: "NotFound",
    })
}

fn flag(p: &FlagParams) -> Result<Output> {
    let dist = parse_distribution(p.n_qubits, &p.pattern).map_err(module_error)?;
    let flag = grow_flag(&dist);
    let mut csv = String::from("string,degree\n");
    for s in flag.adapted_frame() {
        writeln!(csv, "{},{}", s, opt(flag.degree(&s))).unwrap();
    }
    let summary = serde_json::to_value(flag.summary()).expect("summary serializes");
    Ok(Output {
        files: vec![("flag.csv".into(), csv), ("flag.json".into(), pretty(&summary))],
        total: 0,
        failed: 0,
        failure: "NotFound",
    })
}

fn metric(n_qubits: usize, easy: &str, penalty: Penalty) -> Result<PenaltyMetric> {
    let dist = parse_distribution(n_qubits, easy).map_err(module_error)?;
    PenaltyMetric::new(dist, penalty).map_err(module_error)
}

fn direction(n_qubits: usize, s: &str) -> Result<PauliString> {
    let p: PauliString = s.parse().map_err(module_error)?;
    if p.n_qubits() != n_qubits {
        return Err(HarnessError::Config(format!("{s} does not act on {n_qubits} qubits")));
    }
    Ok(p)
}

fn seeded(solver: &SolverConfig, seed: u64) -> SolverConfig {
    SolverConfig {
        seed,
        ..solver.clone()
    }
}

fn geodesic(p: &GeodesicParams, seed: u64) -> Result<Output> {
    let penalty = p.q.penalty();
    let metric = metric(p.n_qubits, &p.easy, penalty)?;
    let solver = seeded(&p.solver, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..p.pairs)
        .map(|_| (haar_unitary(metric.dim(), &mut rng), haar_unitary(metric.dim(), &mut rng)))
        .collect();
    let mut csv = String::from("q,delta,distance,endpoint_error,converged,pair,lower_bound_ok\n");
    let mut failed = 0;
    for (i, (u, v)) in pairs.iter().enumerate() {
        let bi = biinvariant_distance(u, v).map_err(module_error)?;
        let (est, converged) = match solve_bvp(u, v, &metric, &solver) {
            Ok(e) => (e, true),
            Err(GeodesicError::NoConvergence { best }) => (*best, false),
            Err(e) => return Err(module_error(e)),
        };
        failed += usize::from(!converged);
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            penalty,
            bi,
            est.value,
            est.endpoint_error,
            converged,
            i,
            est.value >= bi - 1e-6
        )
        .unwrap();
    }
    Ok(Output {
        files: vec![("geodesic.csv".into(), csv)],
        total: pairs.len(),
        failed,
        failure: "NoConvergence",
    })
}

fn holder(p: &HolderParams, seed: u64) -> Result<Output> {
    let metric = metric(p.n_qubits, &p.easy, Penalty::Infinity)?;
    let dir = direction(p.n_qubits, &p.direction)?;
    let config = HolderConfig {
        deltas: log_grid(p.delta_max, p.delta_min, p.points)?.into_iter().rev().collect(),
        solver: seeded(&p.solver, seed),
    };
    let res = holder_experiment(&metric, &dir, &config).map_err(module_error)?;
    let mut csv = String::from("q,delta,distance,endpoint_error,converged\n");
    for pt in &res.points {
        writeln!(
            csv,
            "{},{},{},{},{}",
            Penalty::Infinity,
            pt.delta,
            pt.distance,
            pt.endpoint_error,
            pt.converged
        )
        .unwrap();
    }
    let failed = res.points.iter().filter(|p| !p.converged).count();
    let summary = json!({
        "direction": res.direction,
        "expected": res.expected,
        "fit": res.fit,
        "slope_interval": res.slope_interval,
    });
    Ok(Output {
        files: vec![("holder.csv".into(), csv), ("holder.json".into(), pretty(&summary))],
        total: res.points.len(),
        failed,
        failure: "NoConvergence",
    })
}

fn cutloc(p: &CutlocParams, seed: u64) -> Result<Output> {
    let easy = parse_distribution(p.n_qubits, &p.easy).map_err(module_error)?;
    let dir = direction(p.n_qubits, &p.direction)?;
    let config = CutLocusConfig {
        q_grid: p.q_grid.clone(),
        delta_min: p.delta_min,
        delta_max: p.delta_max,
        points_per_decade: p.points_per_decade,
        bisection_steps: p.bisection_steps,
        solver: seeded(&p.solver, seed),
    };
    let res = cutlocus_experiment(&easy, &dir, &config).map_err(module_error)?;
    let mut csv = String::from("q,delta,distance,endpoint_error,converged,direct,horizontal\n");
    for &q in &p.q_grid {
        match res.points.iter().find(|pt| pt.q == q) {
            Some(pt) => writeln!(
                csv,
                "{},{},{},{},true,{},{}",
                pt.q, pt.delta_star, pt.distance, pt.endpoint_error, pt.direct, pt.horizontal
            ),
            None => writeln!(csv, "{q},,,,false,,"),
        }
        .unwrap();
    }
    let summary = json!({
        "direction": res.direction,
        "fit": res.fit,
        "dropped": res.dropped,
        "points": res.points,
    });
    Ok(Output {
        files: vec![("cutloc.csv".into(), csv), ("cutloc.json".into(), pretty(&summary))],
        total: p.q_grid.len(),
        failed: res.dropped.len(),
        failure: "BracketError",
    })
}
