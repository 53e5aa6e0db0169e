use serde::{Deserialize, Serialize};

/// Which qubit pairs carry two-qubit "easy" operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locality {
    /// Every pair `i < j`.
    AllToAll,
    /// Nearest neighbours on a ring; a single pair for two qubits.
    Ring,
}

impl Locality {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Locality::AllToAll => (0..n_qubits)
                .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
                .collect(),
            Locality::Ring => match n_qubits {
                0 | 1 => Vec::new(),
                2 => vec![(0, 1)],
                n => (0..n)
                    .map(|i| {
                        let j = (i + 1) % n;
                        (i.min(j), i.max(j))
                    })
                    .collect(),
            },
        }
    }
}
