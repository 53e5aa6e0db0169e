use serde_json::{json, Value};
use std::cmp::Ordering;

use super::gateset::GateSet;
use super::WordError;
use crate::algebra::UnitaryMatrix;

/// Letter `2i` is `g_i`, letter `2i + 1` is `g_i^{-1}`.
pub(crate) type Letter = u8;

pub(crate) fn inverse(l: Letter) -> Letter {
    l ^ 1
}

/// Reduced word `g_{i₁}^{n₁} ⋯ g_{i_k}^{n_k}` with adjacent indices distinct
/// and nonzero powers. Cost is `Σ|n_j|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    factors: Vec<(usize, i64)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a word from arbitrary factors, merging equal neighbours and
    /// dropping zero powers until the result is reduced.
    pub fn from_factors(factors: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (i, n) in factors {
            if n == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == i => {
                    last.1 += n;
                    if last.1 == 0 {
                        out.pop();
                    }
                }
                _ => out.push((i, n)),
            }
        }
        Self { factors: out }
    }

    pub(crate) fn from_letters(letters: &[Letter]) -> Self {
        Self::from_factors(
            letters
                .iter()
                .map(|&l| ((l >> 1) as usize, if l & 1 == 0 { 1 } else { -1 })),
        )
    }

    #[cfg(test)]
    pub(crate) fn letters(&self) -> Vec<Letter> {
        self.factors
            .iter()
            .flat_map(|&(i, n)| {
                let l = (2 * i + usize::from(n < 0)) as Letter;
                std::iter::repeat_n(l, n.unsigned_abs() as usize)
            })
            .collect()
    }

    pub fn factors(&self) -> &[(usize, i64)] {
        &self.factors
    }

    pub fn cost(&self) -> u64 {
        self.factors.iter().map(|f| f.1.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            factors: self.factors.iter().rev().map(|&(i, n)| (i, -n)).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self::from_factors(self.factors.iter().chain(&other.factors).copied())
    }

    /// Evaluates the word as a product of gate matrices, left to right.
    pub fn evaluate(&self, gates: &GateSet) -> Result<UnitaryMatrix, WordError> {
        let mut acc = UnitaryMatrix::identity(gates.dim());
        for &(i, n) in &self.factors {
            if i >= gates.len() {
                return Err(WordError::UnknownGate(i));
            }
            let g = if n > 0 {
                gates.gate(i).clone()
            } else {
                gates.gate(i).adjoint()
            };
            for _ in 0..n.unsigned_abs() {
                acc = acc.mul(&g);
            }
        }
        Ok(acc)
    }

    /// JSON array of `[label, power]` pairs.
    pub fn to_json(&self, gates: &GateSet) -> Value {
        Value::Array(
            self.factors
                .iter()
                .map(|&(i, n)| json!([gates.label(i), n]))
                .collect(),
        )
    }

    pub fn from_json(value: &Value, gates: &GateSet) -> Result<Self, WordError> {
        let bad = || WordError::InvalidArgument(format!("malformed word {value}"));
        let items = value.as_array().ok_or_else(bad)?;
        let factors = items
            .iter()
            .map(|item| {
                let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
                let label = pair[0].as_str().ok_or_else(bad)?;
                let power = pair[1].as_i64().ok_or_else(bad)?;
                let idx = gates
                    .index_of(label)
                    .ok_or_else(|| WordError::InvalidArgument(format!("unknown label {label}")))?;
                Ok((idx, power))
            })
            .collect::<Result<Vec<_>, WordError>>()?;
        Ok(Self::from_factors(factors))
    }
}

/// Serializes as index pairs; use [`Word::to_json`] for labeled output.
impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.factors.serialize(serializer)
    }
}

/// Orders by cost, then lexicographically on the factor sequence.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost()
            .cmp(&other.cost())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::build_su2_gateset;
    use num_rational::Ratio;
    use proptest::prelude::*;

    #[test]
    fn reduction_and_cost() {
        let w = Word::from_factors([(0, 2), (0, -1), (1, 3), (1, -3), (0, 1)]);
        assert_eq!(w.factors(), &[(0, 2)]);
        assert_eq!(w.cost(), 2);
        assert!(Word::empty().is_empty());
        assert_eq!(Word::empty().cost(), 0);
    }

    #[test]
    fn letters_merge_into_powers() {
        let w = Word::from_letters(&[0, 0, 3, 3, 3, 1]);
        assert_eq!(w.factors(), &[(0, 2), (1, -3), (0, -1)]);
        assert_eq!(w.letters(), vec![0, 0, 3, 3, 3, 1]);
    }

    #[test]
    fn json_witness_format() {
        let gs = build_su2_gateset(Ratio::new(1, 3)).unwrap();
        let w = Word::from_factors([(0, 2), (1, -1)]);
        let js = w.to_json(&gs);
        assert_eq!(js.to_string(), r#"[["z",2],["y",-1]]"#);
        assert_eq!(Word::from_json(&js, &gs).unwrap(), w);
        assert!(Word::from_json(&json!([["q", 1]]), &gs).is_err());
    }

    #[test]
    fn inverse_evaluates_to_adjoint() {
        let gs = build_su2_gateset(Ratio::new(1, 3)).unwrap();
        let w = Word::from_factors([(0, 2), (1, -1), (0, 1)]);
        let prod = w.evaluate(&gs).unwrap().mul(&w.inverse().evaluate(&gs).unwrap());
        assert!(prod.distance(&UnitaryMatrix::identity(2)) < 1e-14);
        assert!(w.concat(&w.inverse()).is_empty());
    }

    proptest! {
        #[test]
        fn reduced_form_invariants(raw in prop::collection::vec((0usize..3, -3i64..=3), 0..12)) {
            let w = Word::from_factors(raw);
            for pair in w.factors().windows(2) {
                prop_assert_ne!(pair[0].0, pair[1].0);
            }
            prop_assert!(w.factors().iter().all(|f| f.1 != 0));
            prop_assert_eq!(w.cost() == 0, w.is_empty());
            prop_assert_eq!(Word::from_letters(&w.letters()), w.clone());
            prop_assert_eq!(w.letters().len() as u64, w.cost());
        }
    }
}
