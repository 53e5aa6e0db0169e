use rayon::prelude::*;
use serde::Serialize;

use super::gateset::GateSet;
use super::search::{dist_sqr, from_row_major, identity_row_major, mul_into, Alphabet, ProximityIndex};
use super::word::{inverse, Letter, Word};
use super::WordError;
use crate::algebra::{UnitaryMatrix, C64};

/// Caps on stored group elements and on words visited by depth-first scans.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_elements: usize,
    pub max_words: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_elements: 5_000_000,
            max_words: 2_000_000_000,
        }
    }
}

impl EnumerationBudget {
    /// Fails if the reduced words of cost `≤ max_cost` outnumber `max_words`.
    pub(crate) fn check_scan(&self, generators: usize, max_cost: usize) -> Result<(), WordError> {
        let over = WordError::BudgetExceeded {
            limit: self.max_words,
        };
        match cayley_growth(max_cost, generators) {
            Ok(shells) => match shells.last() {
                Some(s) if s.ball > self.max_words as u128 => Err(over),
                _ => Ok(()),
            },
            Err(WordError::Overflow) => Err(over),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: UnitaryMatrix,
}

/// Elements of `⟨A⟩` up to a cost cutoff, each with its cheapest known word.
///
/// Elements are sorted by the canonical word order: cost, then factor
/// sequence.
#[derive(Debug, Clone)]
pub struct GroupEnumeration {
    pub max_cost: usize,
    pub dedup_tol: f64,
    pub elements: Vec<GroupElement>,
}

impl GroupEnumeration {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Number of stored elements whose representative has cost `l`.
    pub fn shell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.max_cost + 1];
        for e in &self.elements {
            sizes[e.word.cost() as usize] += 1;
        }
        sizes
    }

    pub fn get(&self, word: &Word) -> Option<&UnitaryMatrix> {
        self.elements
            .iter()
            .find(|e| &e.word == word)
            .map(|e| &e.matrix)
    }
}

struct Node {
    letters: Vec<Letter>,
    mat: Vec<C64>,
}

/// Breadth-first realization of `⟨A⟩` by cost.
///
/// With `dedup_tol > 0`, a new matrix within `dedup_tol` of a stored one is
/// merged into it; the survivor is the cheaper word, ties going to the
/// lexicographically smaller factor sequence. `dedup_tol = 0` keeps every
/// reduced word.
pub fn enumerate_group_elements(
    gates: &GateSet,
    max_cost: usize,
    dedup_tol: f64,
    budget: EnumerationBudget,
) -> Result<GroupEnumeration, WordError> {
    if !(dedup_tol >= 0.0) {
        return Err(WordError::InvalidArgument(format!(
            "dedup_tol must be nonnegative, got {dedup_tol}"
        )));
    }
    let nodes = breadth_first(gates, max_cost, dedup_tol, budget)?;
    let d = gates.dim();
    let mut elements: Vec<GroupElement> = nodes
        .into_iter()
        .map(|n| GroupElement {
            word: Word::from_letters(&n.letters),
            matrix: UnitaryMatrix::from_raw(from_row_major(d, &n.mat)),
        })
        .collect();
    elements.sort_by(|a, b| a.word.cmp(&b.word));
    Ok(GroupEnumeration {
        max_cost,
        dedup_tol,
        elements,
    })
}

fn breadth_first(
    gates: &GateSet,
    max_cost: usize,
    dedup_tol: f64,
    budget: EnumerationBudget,
) -> Result<Vec<Node>, WordError> {
    let alphabet = Alphabet::new(gates);
    let d = alphabet.d;
    let mut nodes = vec![Node {
        letters: Vec::new(),
        mat: identity_row_major(d),
    }];
    let mut index = (dedup_tol > 0.0).then(|| {
        let mut idx = ProximityIndex::new(d, dedup_tol);
        idx.insert(&nodes[0].mat, 0);
        idx
    });
    let mut frontier = 0..1;
    for _cost in 1..=max_cost {
        let children: Vec<Node> = nodes[frontier.clone()]
            .par_iter()
            .flat_map_iter(|parent| {
                let last = parent.letters.last().copied();
                (0..alphabet.len() as Letter)
                    .filter(move |&l| last.is_none_or(|p| l != inverse(p)))
                    .map(|l| {
                        let mut mat = vec![C64::new(0.0, 0.0); d * d];
                        mul_into(&parent.mat, &alphabet.mats[l as usize], &mut mat, d);
                        let mut letters = parent.letters.clone();
                        letters.push(l);
                        Node { letters, mat }
                    })
            })
            .collect();
        let shell_start = nodes.len();
        let tol_sqr = dedup_tol * dedup_tol;
        for child in children {
            if let Some(idx) = index.as_mut() {
                let hit = idx
                    .candidates(&child.mat)
                    .find(|&id| dist_sqr(&nodes[id].mat, &child.mat) <= tol_sqr);
                if let Some(id) = hit {
                    let existing = &nodes[id];
                    if existing.letters.len() == child.letters.len()
                        && Word::from_letters(&child.letters) < Word::from_letters(&existing.letters)
                    {
                        idx.remove(&nodes[id].mat, id);
                        idx.insert(&child.mat, id);
                        nodes[id] = child;
                    }
                    continue;
                }
                idx.insert(&child.mat, nodes.len());
            }
            if nodes.len() >= budget.max_elements {
                return Err(WordError::BudgetExceeded {
                    limit: budget.max_elements,
                });
            }
            nodes.push(child);
        }
        frontier = shell_start..nodes.len();
    }
    Ok(nodes)
}

/// A pair of distinct reduced words whose matrices nearly coincide.
#[derive(Debug, Clone, Serialize)]
pub struct Collision {
    pub first: Word,
    pub second: Word,
    pub distance: f64,
}

/// Census of near-coincidences among all reduced words up to a cost.
#[derive(Debug, Clone, Serialize)]
pub struct FreeGroupCensus {
    pub free: bool,
    pub tol: f64,
    /// Reduced words of cost `l`, index 0 being the empty word.
    pub word_counts: Vec<u64>,
    /// Words of cost `l` not within `tol` of any earlier word.
    pub distinct_counts: Vec<u64>,
    /// `2r(2r−1)^{l−1}`.
    pub expected_counts: Vec<u64>,
    pub collision_count: u64,
    /// First collisions found, at most [`FreeGroupCensus::MAX_REPORTED`].
    pub collisions: Vec<Collision>,
}

impl FreeGroupCensus {
    pub const MAX_REPORTED: usize = 100;
}

/// Checks that all reduced words of cost `≤ max_cost` are pairwise more than
/// `tol` apart and that the cost shells have the tree sizes of a free group.
pub fn free_group_check(
    gates: &GateSet,
    max_cost: usize,
    tol: f64,
    budget: EnumerationBudget,
) -> Result<FreeGroupCensus, WordError> {
    if max_cost == 0 {
        return Err(WordError::InvalidArgument("max_cost must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(WordError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let nodes = breadth_first(gates, max_cost, 0.0, budget)?;
    let mut index = ProximityIndex::new(gates.dim(), tol);
    let mut word_counts = vec![0u64; max_cost + 1];
    let mut distinct_counts = vec![0u64; max_cost + 1];
    let mut collisions = Vec::new();
    let mut collision_count = 0u64;
    let tol_sqr = tol * tol;
    for (id, node) in nodes.iter().enumerate() {
        let cost = node.letters.len();
        word_counts[cost] += 1;
        let mut distinct = true;
        for other in index.candidates(&node.mat) {
            let dsq = dist_sqr(&nodes[other].mat, &node.mat);
            if dsq <= tol_sqr {
                distinct = false;
                collision_count += 1;
                if collisions.len() < FreeGroupCensus::MAX_REPORTED {
                    collisions.push(Collision {
                        first: Word::from_letters(&nodes[other].letters),
                        second: Word::from_letters(&node.letters),
                        distance: dsq.sqrt(),
                    });
                }
            }
        }
        distinct_counts[cost] += u64::from(distinct);
        index.insert(&node.mat, id);
    }
    let expected_counts: Vec<u64> = std::iter::once(1)
        .chain(
            cayley_growth(max_cost, gates.len())?
                .into_iter()
                .map(|s| u64::try_from(s.shell).unwrap_or(u64::MAX)),
        )
        .collect();
    let free = collision_count == 0 && distinct_counts == expected_counts;
    Ok(FreeGroupCensus {
        free,
        tol,
        word_counts,
        distinct_counts,
        expected_counts,
        collision_count,
        collisions,
    })
}

/// Sphere and ball sizes of the Cayley tree of a free group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CayleyShell {
    pub radius: usize,
    /// `2r(2r−1)^{l−1}` reduced words of length exactly `radius`.
    pub shell: u128,
    /// Words of length `≤ radius`, the empty word included.
    pub ball: u128,
}

pub fn cayley_growth(r_max: usize, generators: usize) -> Result<Vec<CayleyShell>, WordError> {
    if generators < 1 {
        return Err(WordError::InvalidArgument("need at least one generator".into()));
    }
    let z = 2 * generators as u128;
    let mut shell = z;
    let mut ball: u128 = 1;
    let mut out = Vec::with_capacity(r_max);
    for radius in 1..=r_max {
        if radius > 1 {
            shell = shell.checked_mul(z - 1).ok_or(WordError::Overflow)?;
        }
        ball = ball.checked_add(shell).ok_or(WordError::Overflow)?;
        out.push(CayleyShell {
            radius,
            shell,
            ball,
        });
    }
    Ok(out)
}

/// Cayley ball size against the polynomial `r^{n_H}` of a complexity ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthComparison {
    pub radius: usize,
    pub cayley_ball: u128,
    pub polynomial: f64,
    pub ratio: f64,
}

pub fn growth_comparison(
    r_max: usize,
    generators: usize,
    hausdorff_dim: u32,
) -> Result<Vec<GrowthComparison>, WordError> {
    Ok(cayley_growth(r_max, generators)?
        .into_iter()
        .map(|s| {
            let polynomial = (s.radius as f64).powi(hausdorff_dim as i32);
            GrowthComparison {
                radius: s.radius,
                cayley_ball: s.ball,
                polynomial,
                ratio: s.ball as f64 / polynomial,
            }
        })
        .collect())
}
