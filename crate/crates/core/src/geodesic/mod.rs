//! Complexity distance under the penalty metric: piecewise-constant control
//! paths, their cost, and a multistart boundary-value solver.
//!
//! Paths follow `dγ/dt = −iH(t)γ`, so a single segment `(H, Δt)` multiplies
//! by `e^{−iHΔt}` on the left.

mod experiments;
mod solver;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::algebra::{
    hermitian_from_coefficients, pauli_basis, AlgebraError, CMatrix, ExpDerivative, PauliString,
    UnitaryMatrix,
};
use crate::subriemannian::{Distribution, SubRiemannianError};

pub use experiments::{
    cutlocus_experiment, holder_experiment, CrossoverPoint, CutLocusConfig, CutLocusResult,
    HolderConfig, HolderPoint, HolderResult, CROSSOVER_RATIO,
};
pub use solver::{endpoint_derivatives, solve_bvp, DistanceEstimate, SolverConfig};

/// Largest qubit count the solver accepts.
pub const SOLVER_QUBIT_CAP: usize = 2;

/// Tolerance on `Σ Δt = 1`.
const TIME_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    SubRiemannian(#[from] SubRiemannianError),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("coefficient {coefficient:e} along hard direction {string} in horizontal mode")]
    HorizontalityViolation { string: String, coefficient: f64 },
    #[error("no start reached the endpoint tolerance (best error {:e})", best.endpoint_error)]
    NoConvergence { best: Box<DistanceEstimate> },
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("crossover not bracketed for q = {q}")]
    BracketError { q: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GeodesicError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Finite(f64),
    /// Exact horizontal restriction: hard coefficients must vanish.
    Infinity,
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(q) => write!(f, "{q}"),
            Penalty::Infinity => f.write_str("inf"),
        }
    }
}

/// `⟨H₁, H₂⟩ = [Tr(H₁𝒫H₂) + q Tr(H₁𝒬H₂)]/2^N` on coefficient vectors over
/// the full Pauli basis.
#[derive(Debug, Clone)]
pub struct PenaltyMetric {
    n_qubits: usize,
    penalty: Penalty,
    easy: Distribution,
    basis: Vec<PauliString>,
    easy_mask: Vec<bool>,
}

impl PenaltyMetric {
    pub fn new(easy: Distribution, penalty: Penalty) -> Result<Self> {
        if let Penalty::Finite(q) = penalty {
            if !(q >= 1.0) || !q.is_finite() {
                return Err(GeodesicError::InvalidArgument(format!("penalty factor {q} is below 1")));
            }
        }
        let n_qubits = easy.n_qubits();
        if n_qubits > SOLVER_QUBIT_CAP {
            return Err(AlgebraError::DimensionCap(n_qubits).into());
        }
        let basis = pauli_basis(n_qubits)?;
        let easy_mask = basis.iter().map(|p| easy.contains(p)).collect();
        Ok(Self {
            n_qubits,
            penalty,
            easy,
            basis,
            easy_mask,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    pub fn easy_set(&self) -> &Distribution {
        &self.easy
    }

    pub fn basis(&self) -> &[PauliString] {
        &self.basis
    }

    pub fn is_easy(&self, a: usize) -> bool {
        self.easy_mask[a]
    }

    pub fn is_horizontal(&self) -> bool {
        self.penalty == Penalty::Infinity
    }

    /// Weight of basis direction `a`; `None` for a hard direction in
    /// horizontal mode.
    pub fn weight(&self, a: usize) -> Option<f64> {
        match (self.easy_mask[a], self.penalty) {
            (true, _) => Some(1.0),
            (false, Penalty::Finite(q)) => Some(q),
            (false, Penalty::Infinity) => None,
        }
    }

    /// Index in [`Self::basis`] of a string.
    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        self.basis.binary_search(p).ok()
    }

    fn check_len(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.basis.len() {
            return Err(GeodesicError::InvalidPath(format!(
                "expected {} coefficients, got {}",
                self.basis.len(),
                h.len()
            )));
        }
        Ok(())
    }

    fn check_horizontal(&self, h: &[f64]) -> Result<()> {
        for (a, &c) in h.iter().enumerate() {
            if c != 0.0 && self.weight(a).is_none() {
                return Err(GeodesicError::HorizontalityViolation {
                    string: self.basis[a].to_string(),
                    coefficient: c,
                });
            }
        }
        Ok(())
    }
}

pub fn metric_inner(h1: &[f64], h2: &[f64], metric: &PenaltyMetric) -> Result<f64> {
    metric.check_len(h1)?;
    metric.check_len(h2)?;
    metric.check_horizontal(h1)?;
    metric.check_horizontal(h2)?;
    Ok(h1
        .iter()
        .zip(h2)
        .enumerate()
        .map(|(a, (x, y))| metric.weight(a).map_or(0.0, |w| w * x * y))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub coefficients: Vec<f64>,
    pub dt: f64,
}

/// Piecewise-constant Hamiltonian on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    n_qubits: usize,
    segments: Vec<Segment>,
}

impl ControlPath {
    pub fn new(n_qubits: usize, segments: Vec<Segment>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > SOLVER_QUBIT_CAP {
            return Err(AlgebraError::DimensionCap(n_qubits).into());
        }
        let p = (1usize << (2 * n_qubits)) - 1;
        if segments.is_empty() {
            return Err(GeodesicError::InvalidPath("no segments".into()));
        }
        let mut total = 0.0;
        for (k, s) in segments.iter().enumerate() {
            if !(s.dt > 0.0) || !s.dt.is_finite() {
                return Err(GeodesicError::InvalidPath(format!("segment {k} has duration {}", s.dt)));
            }
            if s.coefficients.len() != p {
                return Err(GeodesicError::InvalidPath(format!(
                    "segment {k} has {} coefficients, expected {p}",
                    s.coefficients.len()
                )));
            }
            if s.coefficients.iter().any(|c| !c.is_finite()) {
                return Err(GeodesicError::InvalidPath(format!("segment {k} is not finite")));
            }
            total += s.dt;
        }
        if (total - 1.0).abs() > TIME_TOL {
            return Err(GeodesicError::InvalidPath(format!("durations sum to {total}")));
        }
        Ok(Self { n_qubits, segments })
    }

    /// `m` zero segments of equal length.
    pub fn zero(n_qubits: usize, m: usize) -> Result<Self> {
        let p = (1usize << (2 * n_qubits)) - 1;
        Self::uniform(n_qubits, vec![vec![0.0; p]; m])
    }

    /// Segments of equal duration `1/m` with the given coefficients.
    pub fn uniform(n_qubits: usize, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let m = coefficients.len();
        let dt = 1.0 / m as f64;
        let mut segments: Vec<Segment> = coefficients
            .into_iter()
            .map(|coefficients| Segment { coefficients, dt })
            .collect();
        // absorb the rounding of m·(1/m)
        if let Some(last) = segments.last_mut() {
            last.dt = 1.0 - dt * (m - 1) as f64;
        }
        Self::new(n_qubits, segments)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Splits segment `k` at fraction `f ∈ (0, 1)` of its duration.
    pub fn split(&self, k: usize, f: f64) -> Result<Self> {
        if k >= self.segments.len() || !(f > 0.0 && f < 1.0) {
            return Err(GeodesicError::InvalidArgument(format!("cannot split segment {k} at {f}")));
        }
        let mut segments = self.segments.clone();
        let s = segments[k].clone();
        segments[k].dt = s.dt * f;
        segments.insert(
            k + 1,
            Segment {
                coefficients: s.coefficients,
                dt: s.dt * (1.0 - f),
            },
        );
        Self::new(self.n_qubits, segments)
    }

    /// Every segment halved, so the endpoint is unchanged.
    pub fn refine(&self) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .flat_map(|s| {
                let half = Segment {
                    coefficients: s.coefficients.clone(),
                    dt: 0.5 * s.dt,
                };
                [half.clone(), half]
            })
            .collect();
        Self::new(self.n_qubits, segments)
    }

    /// Same endpoint with every segment traversed at the mean speed, so that
    /// `length² = energy`. Zero-speed segments are dropped unless all are.
    pub fn constant_speed(&self, metric: &PenaltyMetric) -> Result<Self> {
        let speeds = self
            .segments
            .iter()
            .map(|s| metric_inner(&s.coefficients, &s.coefficients, metric).map(f64::sqrt))
            .collect::<Result<Vec<f64>>>()?;
        let length: f64 = self.segments.iter().zip(&speeds).map(|(s, v)| s.dt * v).sum();
        if length == 0.0 {
            return Ok(self.clone());
        }
        let mut segments: Vec<Segment> = self
            .segments
            .iter()
            .zip(&speeds)
            .filter(|(_, &v)| v > 0.0)
            .map(|(s, &v)| Segment {
                coefficients: s.coefficients.iter().map(|c| c * length / v).collect(),
                dt: s.dt * v / length,
            })
            .collect();
        let total: f64 = segments.iter().map(|s| s.dt).sum();
        for s in &mut segments {
            s.dt /= total;
            s.coefficients.iter_mut().for_each(|c| *c *= total);
        }
        Self::new(self.n_qubits, segments)
    }

    fn exponentials(&self, basis: &[PauliString]) -> Result<Vec<ExpDerivative>> {
        self.segments
            .iter()
            .map(|s| {
                let h = hermitian_from_coefficients(basis, &s.coefficients)?;
                Ok(ExpDerivative::new(h.matrix(), s.dt))
            })
            .collect()
    }
}

/// `e^{−iH_mΔt_m}···e^{−iH₁Δt₁}·start`.
pub fn path_endpoint(path: &ControlPath, start: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    if start.dim() != 1 << path.n_qubits {
        return Err(AlgebraError::DimensionMismatch(start.dim(), 1 << path.n_qubits).into());
    }
    let basis = pauli_basis(path.n_qubits)?;
    let mut w: CMatrix = start.matrix().clone();
    for e in path.exponentials(&basis)? {
        w = &e.exp * w;
    }
    Ok(UnitaryMatrix::new(w)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathCost {
    pub length: f64,
    pub energy: f64,
}

/// `length = Σ Δt·⟨H,H⟩^{1/2}`, `energy = Σ Δt·⟨H,H⟩`.
pub fn path_cost(path: &ControlPath, metric: &PenaltyMetric) -> Result<PathCost> {
    if path.n_qubits != metric.n_qubits {
        return Err(AlgebraError::DimensionMismatch(path.n_qubits, metric.n_qubits).into());
    }
    let mut cost = PathCost {
        length: 0.0,
        energy: 0.0,
    };
    for s in &path.segments {
        let e = metric_inner(&s.coefficients, &s.coefficients, metric)?;
        cost.length += s.dt * e.sqrt();
        cost.energy += s.dt * e;
    }
    Ok(cost)
}
