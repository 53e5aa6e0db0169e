//! Easy-direction distributions spanned by Pauli strings and their
//! commutator flags.
//!
//! The commutator of two Pauli strings is zero or a nonzero multiple of a
//! single string, so spans of strings are plain sets and every rank below is
//! an exact integer.

mod dense;

use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::algebra::{AlgebraError, Pauli, PauliString};
use crate::locality::Locality;

pub use dense::dense_flag_ranks;

#[derive(Debug, Error)]
pub enum SubRiemannianError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("distribution is not bracket generating")]
    NotGenerating,
    #[error("zero coefficient vector")]
    ZeroVector,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("unknown pattern {0:?}")]
    UnknownPattern(String),
}

/// `[P, Q] ∝ R` for the returned `R`, or `None` when `P` and `Q` commute.
pub fn pauli_commutator(p: &PauliString, q: &PauliString) -> Option<PauliString> {
    (!p.commutes_with(q)).then(|| p.product(q))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Local(Locality),
    Explicit,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Local(Locality::AllToAll) => f.write_str("all-to-all"),
            Pattern::Local(Locality::Ring) => f.write_str("ring"),
            Pattern::Explicit => f.write_str("explicit"),
        }
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The easy directions: a duplicate-free set of non-identity strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    n_qubits: usize,
    strings: BTreeSet<PauliString>,
    pattern: Pattern,
}

impl Distribution {
    pub fn explicit(
        n_qubits: usize,
        strings: impl IntoIterator<Item = PauliString>,
    ) -> Result<Self, SubRiemannianError> {
        let strings: BTreeSet<PauliString> = strings.into_iter().collect();
        if strings.is_empty() {
            return Err(SubRiemannianError::InvalidDistribution("no strings".into()));
        }
        for s in &strings {
            if s.n_qubits() != n_qubits {
                return Err(SubRiemannianError::InvalidDistribution(format!(
                    "{s} does not act on {n_qubits} qubits"
                )));
            }
            if s.is_identity() {
                return Err(SubRiemannianError::InvalidDistribution(
                    "identity is not a direction".into(),
                ));
            }
        }
        Ok(Self {
            n_qubits,
            strings,
            pattern: Pattern::Explicit,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn strings(&self) -> &BTreeSet<PauliString> {
        &self.strings
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.strings.contains(p)
    }
}

/// All weight-1 strings plus the weight-2 strings on the pairs selected by
/// `locality`.
pub fn build_distribution(
    n_qubits: usize,
    locality: Locality,
) -> Result<Distribution, SubRiemannianError> {
    if n_qubits == 0 || n_qubits > 64 {
        return Err(SubRiemannianError::InvalidDistribution(format!(
            "unsupported qubit count {n_qubits}"
        )));
    }
    const LETTERS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut strings = BTreeSet::new();
    for q in 0..n_qubits {
        for p in LETTERS {
            strings.insert(PauliString::single(n_qubits, q, p));
        }
    }
    for (a, b) in locality.pairs(n_qubits) {
        for p in LETTERS {
            for r in LETTERS {
                strings.insert(PauliString::single(n_qubits, a, p).with_letter(b, r));
            }
        }
    }
    Ok(Distribution {
        n_qubits,
        strings,
        pattern: Pattern::Local(locality),
    })
}

/// Parses `all-to-all`, `ring`, or a comma-separated list of strings such as
/// `Y,Z`.
pub fn parse_distribution(n_qubits: usize, pattern: &str) -> Result<Distribution, SubRiemannianError> {
    match pattern {
        "all-to-all" => build_distribution(n_qubits, Locality::AllToAll),
        "ring" => build_distribution(n_qubits, Locality::Ring),
        list => {
            let strings = list
                .split(',')
                .map(|s| PauliString::from_str(s.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| SubRiemannianError::UnknownPattern(pattern.to_string()))?;
            Distribution::explicit(n_qubits, strings)
        }
    }
}

/// The filtration `Δ^[1] ⊂ Δ^[2] ⊂ …` of iterated commutators.
#[derive(Debug, Clone)]
pub struct Flag {
    pub n_qubits: usize,
    pub pattern: Pattern,
    /// Cumulative sets `Δ^[k]`.
    pub levels: Vec<BTreeSet<PauliString>>,
    /// `m_k = |Δ^[k]|`.
    pub m: Vec<usize>,
    /// `d_j`, the first level containing each reached string.
    pub degrees: BTreeMap<PauliString, u32>,
    pub step: u32,
    /// `Σ_j d_j` over reached strings.
    pub hausdorff: u64,
    /// `true` when the closure reaches all `4^N − 1` strings.
    pub generating: bool,
}

impl Flag {
    pub fn degree(&self, p: &PauliString) -> Option<u32> {
        self.degrees.get(p).copied()
    }

    /// The reached strings sorted by degree, then lexicographically.
    pub fn adapted_frame(&self) -> Vec<PauliString> {
        let mut frame: Vec<PauliString> = self.degrees.keys().copied().collect();
        frame.sort_by_key(|p| (self.degrees[p], *p));
        frame
    }

    pub fn summary(&self) -> FlagSummary {
        let mut histogram = BTreeMap::new();
        for d in self.degrees.values() {
            *histogram.entry(*d).or_insert(0usize) += 1;
        }
        FlagSummary {
            n_qubits: self.n_qubits,
            pattern: self.pattern.to_string(),
            m: self.m.clone(),
            s: self.step,
            n_h: self.hausdorff,
            generating: self.generating,
            degree_histogram: histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagSummary {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    pub pattern: String,
    pub m: Vec<usize>,
    pub s: u32,
    #[serde(rename = "n_H")]
    pub n_h: u64,
    pub generating: bool,
    pub degree_histogram: BTreeMap<u32, usize>,
}

fn algebra_dimension(n_qubits: usize) -> u128 {
    (1u128 << (2 * n_qubits)) - 1
}

/// Grows `Δ^{[k+1]} = Δ^{[k]} ∪ [Δ, Δ^{[k]}]` until it stops changing.
///
/// Only the newest layer needs bracketing with `Δ`: brackets with older
/// layers already lie in `Δ^{[k]}`.
pub fn grow_flag(dist: &Distribution) -> Flag {
    let easy: Vec<PauliString> = dist.strings.iter().copied().collect();
    let mut current = dist.strings.clone();
    let mut degrees: BTreeMap<PauliString, u32> = current.iter().map(|p| (*p, 1)).collect();
    let mut levels = vec![current.clone()];
    let mut frontier: Vec<PauliString> = easy.clone();
    let mut k = 1u32;
    loop {
        let brackets: BTreeSet<PauliString> = frontier
            .par_iter()
            .flat_map_iter(|y| easy.iter().filter_map(move |x| pauli_commutator(x, y)))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|r| !current.contains(r))
            .collect();
        if brackets.is_empty() {
            break;
        }
        k += 1;
        for r in &brackets {
            degrees.insert(*r, k);
        }
        current.extend(brackets.iter().copied());
        levels.push(current.clone());
        frontier = brackets.into_iter().collect();
    }
    let m: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let hausdorff = degrees.values().map(|&d| u64::from(d)).sum();
    Flag {
        n_qubits: dist.n_qubits,
        pattern: dist.pattern.clone(),
        generating: current.len() as u128 == algebra_dimension(dist.n_qubits),
        levels,
        m,
        degrees,
        step: k,
        hausdorff,
    }
}

/// Exponent of `vol Box(r) ∼ r^{Σ d_j}`.
pub fn box_exponent(flag: &Flag) -> Result<u64, SubRiemannianError> {
    if !flag.generating {
        return Err(SubRiemannianError::NotGenerating);
    }
    Ok(flag.hausdorff)
}

/// Commutator depth of `Σ_a h_a P_a`: the largest degree over its support.
pub fn degree_of_direction(
    basis: &[PauliString],
    coeffs: &[f64],
    flag: &Flag,
) -> Result<u32, SubRiemannianError> {
    if basis.len() != coeffs.len() {
        return Err(AlgebraError::DimensionMismatch(basis.len(), coeffs.len()).into());
    }
    let mut degree = None;
    for (p, &c) in basis.iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        let d = flag.degree(p).ok_or(SubRiemannianError::NotGenerating)?;
        degree = Some(degree.map_or(d, |e: u32| e.max(d)));
    }
    degree.ok_or(SubRiemannianError::ZeroVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_basis, CMatrix};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn single_qubit_yz() -> Distribution {
        Distribution::explicit(1, [ps("Y"), ps("Z")]).unwrap()
    }

    #[test]
    fn commutator_examples() {
        assert_eq!(pauli_commutator(&ps("X"), &ps("Y")), Some(ps("Z")));
        assert_eq!(pauli_commutator(&ps("XI"), &ps("IZ")), None);
        assert_eq!(pauli_commutator(&ps("XX"), &ps("ZZ")), None);
        assert_eq!(pauli_commutator(&ps("XX"), &ps("ZI")), Some(ps("YX")));
    }

    #[test]
    fn commutator_matches_dense_support() {
        let basis = pauli_basis(2).unwrap();
        for p in &basis {
            for q in &basis {
                let (mp, mq) = (p.to_matrix().unwrap(), q.to_matrix().unwrap());
                let c: CMatrix = &mp * &mq - &mq * &mp;
                match pauli_commutator(p, q) {
                    None => assert!(c.norm() < 1e-12),
                    Some(r) => {
                        let mr = r.to_matrix().unwrap();
                        // [P, Q] = ±2i R, so ‖[P, Q]‖ = 2‖R‖ and Tr(R[P,Q]) = ±2i·4
                        assert!((c.norm() - 2.0 * mr.norm()).abs() < 1e-12);
                        let overlap = (&mr * &c).trace();
                        assert!((overlap.norm() - 8.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn distribution_sizes() {
        assert_eq!(build_distribution(2, Locality::AllToAll).unwrap().len(), 15);
        assert_eq!(build_distribution(3, Locality::AllToAll).unwrap().len(), 36);
        for n in 3..=6 {
            let all = build_distribution(n, Locality::AllToAll).unwrap();
            assert_eq!(all.len(), 3 * n + 9 * n * (n - 1) / 2);
            let ring = build_distribution(n, Locality::Ring).unwrap();
            assert_eq!(ring.len(), 12 * n);
            assert!(ring.strings().iter().all(|s| s.weight() <= 2 && s.weight() >= 1));
        }
        assert_eq!(single_qubit_yz().len(), 2);
        assert!(Distribution::explicit(1, [PauliString::identity(1)]).is_err());
        assert!(Distribution::explicit(2, [ps("X")]).is_err());
    }

    #[test]
    fn parsing_patterns() {
        assert_eq!(parse_distribution(1, "Y,Z").unwrap(), single_qubit_yz());
        assert_eq!(parse_distribution(3, "ring").unwrap().len(), 36);
        assert!(matches!(
            parse_distribution(2, "bogus"),
            Err(SubRiemannianError::UnknownPattern(_))
        ));
    }

    #[test]
    fn single_qubit_flag() {
        let f = grow_flag(&single_qubit_yz());
        assert_eq!(f.m, vec![2, 3]);
        assert_eq!(f.step, 2);
        assert_eq!(f.hausdorff, 4);
        assert!(f.generating);
        assert_eq!(f.degree(&ps("X")), Some(2));
        assert_eq!(box_exponent(&f).unwrap(), 4);
        let frame: Vec<String> = f.adapted_frame().iter().map(|p| p.to_string()).collect();
        assert_eq!(frame, ["Y", "Z", "X"]);
    }

    #[test]
    fn riemannian_cases() {
        let f = grow_flag(&build_distribution(2, Locality::AllToAll).unwrap());
        assert_eq!((f.step, f.hausdorff), (1, 15));
        let f1 = grow_flag(&build_distribution(1, Locality::AllToAll).unwrap());
        assert_eq!(box_exponent(&f1).unwrap(), 3);
    }

    #[test]
    fn three_qubit_all_to_all() {
        let f = grow_flag(&build_distribution(3, Locality::AllToAll).unwrap());
        assert_eq!(f.m, vec![36, 63]);
        assert_eq!((f.step, f.hausdorff), (2, 90));
        assert_eq!(f.degree(&ps("XXX")), Some(2));
        let s = f.summary();
        assert_eq!(s.degree_histogram, BTreeMap::from([(1, 36), (2, 27)]));
        let js = serde_json::to_value(&s).unwrap();
        assert_eq!(js["N"], 3);
        assert_eq!(js["n_H"], 90);
        assert_eq!(js["pattern"], "all-to-all");
    }

    #[test]
    fn non_generating_distribution() {
        let d = Distribution::explicit(2, [ps("ZI"), ps("IZ"), ps("ZZ")]).unwrap();
        let f = grow_flag(&d);
        assert!(!f.generating);
        assert_eq!(f.m, vec![3]);
        assert!(matches!(box_exponent(&f), Err(SubRiemannianError::NotGenerating)));
    }

    #[test]
    fn direction_degrees() {
        let f = grow_flag(&single_qubit_yz());
        let basis = pauli_basis(1).unwrap();
        assert_eq!(degree_of_direction(&basis, &[0.0, 1.0, 0.0], &f).unwrap(), 1);
        assert_eq!(degree_of_direction(&basis, &[1.0, 0.0, 0.0], &f).unwrap(), 2);
        assert_eq!(degree_of_direction(&basis, &[0.3, 0.0, 2.0], &f).unwrap(), 2);
        assert!(matches!(
            degree_of_direction(&basis, &[0.0; 3], &f),
            Err(SubRiemannianError::ZeroVector)
        ));
    }

    #[test]
    fn symbolic_levels_match_dense_ranks() {
        for d in [
            single_qubit_yz(),
            build_distribution(2, Locality::AllToAll).unwrap(),
            Distribution::explicit(2, [ps("XI"), ps("IX"), ps("ZZ")]).unwrap(),
            Distribution::explicit(2, [ps("ZI"), ps("IZ"), ps("ZZ")]).unwrap(),
        ] {
            let f = grow_flag(&d);
            assert_eq!(dense_flag_ranks(&d).unwrap(), f.m);
        }
    }

    #[test]
    fn flags_are_monotone_and_degrees_consistent() {
        for n in 1..=5 {
            for loc in [Locality::AllToAll, Locality::Ring] {
                let f = grow_flag(&build_distribution(n, loc).unwrap());
                assert!(f.generating, "N={n} {loc:?}");
                assert!(f.m.windows(2).all(|w| w[1] > w[0]));
                assert!(f.levels.windows(2).all(|w| w[0].is_subset(&w[1])));
                for (k, level) in f.levels.iter().enumerate() {
                    for p in level {
                        assert!(f.degrees[p] as usize <= k + 1);
                    }
                }
                let dim = (1u64 << (2 * n)) - 1;
                assert_eq!(f.hausdorff == dim, f.step == 1);
                assert!(f.hausdorff >= dim);
            }
        }
    }

    #[test]
    fn locality_raises_hausdorff_dimension() {
        for n in [4, 5] {
            let all = grow_flag(&build_distribution(n, Locality::AllToAll).unwrap());
            let ring = grow_flag(&build_distribution(n, Locality::Ring).unwrap());
            assert!(ring.hausdorff > all.hausdorff, "N={n}: {} vs {}", ring.hausdorff, all.hausdorff);
        }
    }
}
