use num_rational::Ratio;
use std::collections::HashSet;

use super::WordError;
use crate::algebra::{CMatrix, UnitaryMatrix, C64, DENSE_QUBIT_CAP};
use crate::locality::Locality;

/// Distance below which a gate counts as `±1`.
const TRIVIAL_GATE_TOL: f64 = 1e-12;

/// Labeled generators `g₁ … g_r` of a subgroup of `SU(d)`.
#[derive(Debug, Clone)]
pub struct GateSet {
    labels: Vec<String>,
    gates: Vec<UnitaryMatrix>,
    dim: usize,
    algebraic: bool,
}

impl GateSet {
    pub fn new(gates: Vec<(String, UnitaryMatrix)>, algebraic: bool) -> Result<Self, WordError> {
        let Some(dim) = gates.first().map(|(_, g)| g.dim()) else {
            return Err(WordError::EmptyGateSet);
        };
        let mut seen = HashSet::new();
        let identity = CMatrix::identity(dim, dim);
        for (label, g) in &gates {
            if !seen.insert(label.clone()) {
                return Err(WordError::DuplicateLabel(label.clone()));
            }
            if g.dim() != dim {
                return Err(WordError::DimensionMismatch(dim, g.dim()));
            }
            let plus = (g.matrix() - &identity).norm();
            let minus = (g.matrix() + &identity).norm();
            if plus < TRIVIAL_GATE_TOL || minus < TRIVIAL_GATE_TOL {
                return Err(WordError::TrivialGate(label.clone()));
            }
        }
        let (labels, gates) = gates.into_iter().unzip();
        Ok(Self {
            labels,
            gates,
            dim,
            algebraic,
        })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_algebraic(&self) -> bool {
        self.algebraic
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gate(&self, i: usize) -> &UnitaryMatrix {
        &self.gates[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Size of the alphabet `{g_i^{±1}}`.
    pub fn alphabet_size(&self) -> usize {
        2 * self.gates.len()
    }
}

fn excluded_by_niven(c: Ratio<i64>) -> bool {
    let half = Ratio::new(1, 2);
    c == Ratio::from_integer(0)
        || c == half
        || c == -half
        || c >= Ratio::from_integer(1)
        || c <= Ratio::from_integer(-1)
}

/// `{e^{iπαZ}, e^{iπαY}}` with `cos πα` rational and `sin πα > 0`.
///
/// `cos πα ∈ {0, ±1/2, ±1}` makes `α` rational and the gates of finite
/// order, so those values are rejected.
pub fn build_su2_gateset(cos_pi_alpha: Ratio<i64>) -> Result<GateSet, WordError> {
    if excluded_by_niven(cos_pi_alpha) {
        return Err(WordError::InvalidAngle(cos_pi_alpha));
    }
    let c = *cos_pi_alpha.numer() as f64 / *cos_pi_alpha.denom() as f64;
    let s = (1.0 - c * c).sqrt();
    let zero = C64::new(0.0, 0.0);
    let gz = CMatrix::from_row_slice(2, 2, &[C64::new(c, s), zero, zero, C64::new(c, -s)]);
    let gy = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
    );
    GateSet::new(
        vec![
            ("z".to_string(), UnitaryMatrix::new(gz)?),
            ("y".to_string(), UnitaryMatrix::new(gy)?),
        ],
        true,
    )
}

/// Block embedding `β_j(M) = diag(1_{j−2}, M, 1_{d−j})` of an `SU(2)` element
/// into `SU(d)`, for `2 ≤ j ≤ d`.
pub fn embed_gate(m: &UnitaryMatrix, j: usize, d: usize) -> Result<UnitaryMatrix, WordError> {
    if m.dim() != 2 {
        return Err(WordError::DimensionMismatch(2, m.dim()));
    }
    if j < 2 || j > d {
        return Err(WordError::IndexOutOfRange { j, d });
    }
    let mut out = CMatrix::identity(d, d);
    out.view_mut((j - 2, j - 2), (2, 2)).copy_from(m.matrix());
    Ok(UnitaryMatrix::from_raw(out))
}

/// Lifts a two-qubit operator acting on qubits `(a, b)` to the full register.
fn lift_pair(m4: &CMatrix, a: usize, b: usize, n_qubits: usize) -> CMatrix {
    let d = 1usize << n_qubits;
    let bit = |x: usize, q: usize| (x >> (n_qubits - 1 - q)) & 1;
    let rest = |x: usize| {
        x & !((1 << (n_qubits - 1 - a)) | (1 << (n_qubits - 1 - b)))
    };
    CMatrix::from_fn(d, d, |r, c| {
        if rest(r) != rest(c) {
            return C64::new(0.0, 0.0);
        }
        let sr = bit(r, a) << 1 | bit(r, b);
        let sc = bit(c, a) << 1 | bit(c, b);
        m4[(sr, sc)]
    })
}

/// The `6K` gates `β_j(M)`, `j = 2, 3, 4`, `M ∈ A₂`, placed on each of the
/// `K` qubit pairs selected by `locality`. Dense, so `N ≤ 3`.
pub fn build_local_gateset(
    n_qubits: usize,
    cos_pi_alpha: Ratio<i64>,
    locality: Locality,
) -> Result<GateSet, WordError> {
    if n_qubits < 2 {
        return Err(WordError::InvalidArgument(format!(
            "local gate set needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if n_qubits > DENSE_QUBIT_CAP {
        return Err(WordError::DimensionCap(n_qubits));
    }
    let base = build_su2_gateset(cos_pi_alpha)?;
    let mut gates = Vec::new();
    for (a, b) in locality.pairs(n_qubits) {
        for j in 2..=4 {
            for g in 0..base.len() {
                let block = embed_gate(base.gate(g), j, 4)?;
                let full = lift_pair(block.matrix(), a, b, n_qubits);
                let label = format!("q{a}q{b}:b{j}{}", base.label(g));
                gates.push((label, UnitaryMatrix::new(full)?));
            }
        }
    }
    GateSet::new(gates, true)
}
