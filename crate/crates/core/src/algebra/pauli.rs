//! Pauli strings in symplectic (x, z) bit form.
//!
//! Qubit 0 is the leftmost letter and the most significant tensor factor of
//! the dense realization.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::matrix::{CMatrix, HermitianMatrix, C64};
use super::AlgebraError;

/// Largest qubit count for which dense matrices are built (d = 8).
pub const DENSE_QUBIT_CAP: usize = 3;
/// Largest qubit count accepted by [`pauli_basis`].
pub const BASIS_QUBIT_CAP: usize = 10;
const MAX_QUBITS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn matrix(self) -> CMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, without phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        Self {
            n: n_qubits as u8,
            x: 0,
            z: 0,
        }
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self, AlgebraError> {
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(AlgebraError::InvalidPauli(format!(
                "{} letters",
                letters.len()
            )));
        }
        let mut s = Self::identity(letters.len());
        for (q, p) in letters.iter().enumerate() {
            s = s.with_letter(q, *p);
        }
        Ok(s)
    }

    /// Single non-identity letter `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Self {
        assert!(q < n_qubits);
        Self::identity(n_qubits).with_letter(q, p)
    }

    pub fn with_letter(mut self, q: usize, p: Pauli) -> Self {
        let (bx, bz) = p.bits();
        let mask = 1u64 << q;
        self.x = if bx { self.x | mask } else { self.x & !mask };
        self.z = if bz { self.z | mask } else { self.z & !mask };
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits()).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// The string proportional to the product `PQ`, phase dropped.
    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    /// Dense `2^N × 2^N` realization, capped at [`DENSE_QUBIT_CAP`] qubits.
    pub fn to_matrix(&self) -> Result<CMatrix, AlgebraError> {
        if self.n_qubits() > DENSE_QUBIT_CAP {
            return Err(AlgebraError::DimensionCap(self.n_qubits()));
        }
        let mut m = CMatrix::identity(1, 1);
        for p in self.letters() {
            m = m.kronecker(&p.matrix());
        }
        Ok(m)
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            (0..self.n_qubits())
                .map(|q| self.letter(q).cmp(&other.letter(q)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters().into_iter().map(Pauli::as_char).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(AlgebraError::InvalidPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_letters(&letters).map_err(|_| AlgebraError::InvalidPauli(s.to_string()))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All `4^N − 1` non-identity strings on `N` qubits in lexicographic order
/// (`I < X < Y < Z`, qubit 0 most significant).
pub fn pauli_basis(n_qubits: usize) -> Result<Vec<PauliString>, AlgebraError> {
    if n_qubits == 0 || n_qubits > BASIS_QUBIT_CAP {
        return Err(AlgebraError::DimensionCap(n_qubits));
    }
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let total = 1usize << (2 * n_qubits);
    Ok((1..total)
        .map(|idx| {
            let mut s = PauliString::identity(n_qubits);
            for q in 0..n_qubits {
                let digit = idx >> (2 * (n_qubits - 1 - q)) & 3;
                s = s.with_letter(q, LETTERS[digit]);
            }
            s
        })
        .collect())
}

/// Dense `Σ_a h_a P_a` over `basis`.
pub fn hermitian_from_coefficients(
    basis: &[PauliString],
    coeffs: &[f64],
) -> Result<HermitianMatrix, AlgebraError> {
    if basis.len() != coeffs.len() || basis.is_empty() {
        return Err(AlgebraError::DimensionMismatch(basis.len(), coeffs.len()));
    }
    let d = 1usize << basis[0].n_qubits();
    let mut h = CMatrix::zeros(d, d);
    for (p, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            h += p.to_matrix()? * C64::new(c, 0.0);
        }
    }
    HermitianMatrix::new(h)
}
