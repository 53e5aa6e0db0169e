use serde::Serialize;

use super::U1Error;

/// Depth beyond which double precision no longer determines the expansion.
pub const MAX_DEPTH: usize = 40;

/// Stop once `q²` exceeds this; the remainder is dominated by rounding.
const Q_SQUARED_CAP: f64 = 1e15;

/// A remainder this close to an integer ends the expansion.
const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuedFraction {
    pub value: f64,
    /// `[a₀; a₁, a₂, …]`; every entry after `a₀` is positive.
    pub partial_quotients: Vec<i64>,
    /// Convergents `p_k/q_k` in lowest terms with `q_k` increasing.
    pub convergents: Vec<(i64, i64)>,
    /// `true` when the expansion stopped for precision, not because it ended.
    pub truncated: bool,
}

impl ContinuedFraction {
    pub fn expand(x: f64, depth: usize) -> Result<Self, U1Error> {
        if !x.is_finite() {
            return Err(U1Error::InvalidArgument(format!("cannot expand {x}")));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(U1Error::InvalidArgument(format!(
                "depth must be in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        let mut quotients = Vec::new();
        let mut convergents: Vec<(i64, i64)> = Vec::new();
        let (mut p_prev, mut q_prev) = (0i64, 1i64);
        let (mut p, mut q) = (1i64, 0i64);
        let mut r = x;
        let mut truncated = true;
        for _ in 0..depth {
            let nearest = r.round();
            let exact = (r - nearest).abs() < EXACT_TOL;
            let a = if exact { nearest } else { r.floor() };
            let a_int = a as i64;
            let (p_next, q_next) = match (
                a_int.checked_mul(p).and_then(|v| v.checked_add(p_prev)),
                a_int.checked_mul(q).and_then(|v| v.checked_add(q_prev)),
            ) {
                (Some(pn), Some(qn)) => (pn, qn),
                _ => break,
            };
            if (q_next as f64).powi(2) > Q_SQUARED_CAP {
                break;
            }
            let err = (x - p_next as f64 / q_next as f64).abs();
            if !exact && !(err < 1.0 / (q_next as f64).powi(2)) {
                break;
            }
            quotients.push(a_int);
            convergents.push((p_next, q_next));
            (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
            if exact {
                truncated = false;
                break;
            }
            r = 1.0 / (r - a);
        }
        if quotients.is_empty() {
            return Err(U1Error::InvalidArgument(format!(
                "{x} exceeds the integer range of the expansion"
            )));
        }
        Ok(Self {
            value: x,
            partial_quotients: quotients,
            convergents,
            truncated,
        })
    }
}

pub fn continued_fraction(x: f64, depth: usize) -> Result<ContinuedFraction, U1Error> {
    ContinuedFraction::expand(x, depth)
}
