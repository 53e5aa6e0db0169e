use serde::Serialize;

use super::diophantine::DiophantineReport;
use super::enumerate::{enumerate_group_elements, EnumerationBudget};
use super::gateset::GateSet;
use super::search::{dist_sqr, identity_row_major, row_major, traverse, Alphabet, ProximityIndex};
use super::word::{Letter, Word};
use super::WordError;
use crate::algebra::{CMatrix, UnitaryMatrix, C64};
use crate::fit::linear_fit;

/// A word and its Hilbert–Schmidt distance to some target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    pub cost: u64,
    pub word: Word,
    pub distance: f64,
}

fn check_target(gates: &GateSet, target: &UnitaryMatrix) -> Result<(), WordError> {
    if target.dim() != gates.dim() {
        return Err(WordError::DimensionMismatch(gates.dim(), target.dim()));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<(), WordError> {
    if !(epsilon > 0.0) {
        return Err(WordError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Exact `C_ε(U)`: the least cost of a word strictly within `epsilon` of
/// `target`, with the smallest such word in canonical order as witness.
///
/// Every reduced word of cost `≤ max_cost` is either visited or lies below
/// a word of no greater cost that already hit, so the answer is exact.
pub fn gate_complexity(
    gates: &GateSet,
    target: &UnitaryMatrix,
    epsilon: f64,
    max_cost: usize,
) -> Result<Approximation, WordError> {
    check_epsilon(epsilon)?;
    check_target(gates, target)?;
    EnumerationBudget::default().check_scan(gates.len(), max_cost)?;
    let t = row_major(target.matrix());
    let eps_sqr = epsilon * epsilon;
    let root = dist_sqr(&identity_row_major(gates.dim()), &t);
    if root < eps_sqr {
        return Ok(Approximation {
            cost: 0,
            word: Word::empty(),
            distance: root.sqrt(),
        });
    }
    let alphabet = Alphabet::new(gates);
    let states = traverse(
        &alphabet,
        max_cost,
        || None::<(Word, f64)>,
        |best, letters, m| {
            let depth = letters.len() as u64;
            let bound = best.as_ref().map(|(w, _)| w.cost());
            if bound.is_some_and(|b| depth > b) {
                return false;
            }
            let dsq = dist_sqr(m, &t);
            if dsq < eps_sqr {
                let w = Word::from_letters(letters);
                if best.as_ref().is_none_or(|(b, _)| w < *b) {
                    *best = Some((w, dsq));
                }
                return false;
            }
            bound.is_none_or(|b| depth < b)
        },
    );
    states
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(word, dsq)| Approximation {
            cost: word.cost(),
            word,
            distance: dsq.sqrt(),
        })
        .ok_or(WordError::NotFound { max_cost })
}

/// Closest word of each exact cost `0 ..= max_cost` to one target.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceProfile {
    pub best: Vec<Approximation>,
}

impl DistanceProfile {
    /// `C_ε` read off the profile: the first cost whose best word is
    /// strictly within `epsilon`.
    pub fn complexity(&self, epsilon: f64) -> Option<&Approximation> {
        self.best.iter().find(|a| a.distance < epsilon)
    }

    /// Smallest distance reached by any word in the profile.
    pub fn closest(&self) -> f64 {
        self.best.iter().map(|a| a.distance).fold(f64::INFINITY, f64::min)
    }
}

/// Profiles for several targets from one traversal of all reduced words of
/// cost `≤ max_cost`.
pub fn distance_profile(
    gates: &GateSet,
    targets: &[UnitaryMatrix],
    max_cost: usize,
) -> Result<Vec<DistanceProfile>, WordError> {
    for t in targets {
        check_target(gates, t)?;
    }
    EnumerationBudget::default().check_scan(gates.len(), max_cost)?;
    let ts: Vec<Vec<C64>> = targets.iter().map(|t| row_major(t.matrix())).collect();
    let alphabet = Alphabet::new(gates);
    let init = || vec![vec![(f64::INFINITY, Vec::<Letter>::new()); max_cost + 1]; ts.len()];
    let states = traverse(&alphabet, max_cost, init, |best, letters, m| {
        let c = letters.len();
        for (k, t) in ts.iter().enumerate() {
            let dsq = dist_sqr(m, t);
            let slot = &mut best[k][c];
            if dsq < slot.0 || (dsq == slot.0 && letters < slot.1.as_slice()) {
                *slot = (dsq, letters.to_vec());
            }
        }
        true
    });
    let id = identity_row_major(gates.dim());
    Ok(ts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let mut best = vec![Approximation {
                cost: 0,
                word: Word::empty(),
                distance: dist_sqr(&id, t).sqrt(),
            }];
            for c in 1..=max_cost {
                let (dsq, letters) = states
                    .iter()
                    .map(|s| &s[k][c])
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .expect("at least one letter");
                best.push(Approximation {
                    cost: c as u64,
                    word: Word::from_letters(letters),
                    distance: dsq.sqrt(),
                });
            }
            DistanceProfile { best }
        })
        .collect())
}

/// Result of a meet-in-the-middle search.
#[derive(Debug, Clone, Serialize)]
pub struct MitmApproximation {
    pub approximation: Approximation,
    /// `false` once an exhaustive pass has shown no cheaper word exists.
    pub upper_bound: bool,
}

/// Searches words `W₁W₂` with both halves of cost `≤ half_cost` by matching
/// `W₁` against `U W₂†` at tolerance `epsilon`. The result is confirmed by an
/// exhaustive search when its cost is at most `confirm_up_to`.
pub fn gate_complexity_mitm(
    gates: &GateSet,
    target: &UnitaryMatrix,
    epsilon: f64,
    half_cost: usize,
    confirm_up_to: usize,
    budget: EnumerationBudget,
) -> Result<MitmApproximation, WordError> {
    check_epsilon(epsilon)?;
    check_target(gates, target)?;
    let ball = enumerate_group_elements(gates, half_cost, 0.0, budget)?;
    let rows: Vec<Vec<C64>> = ball.elements.iter().map(|e| row_major(e.matrix.matrix())).collect();
    let mut index = ProximityIndex::new(gates.dim(), epsilon);
    for (id, m) in rows.iter().enumerate() {
        index.insert(m, id);
    }
    let eps_sqr = epsilon * epsilon;
    let mut best: Option<(Word, f64)> = None;
    for second in &ball.elements {
        let probe: CMatrix = target.matrix() * second.matrix.matrix().adjoint();
        let probe = row_major(&probe);
        for id in index.candidates(&probe) {
            let dsq = dist_sqr(&rows[id], &probe);
            if dsq >= eps_sqr {
                continue;
            }
            let w = ball.elements[id].word.concat(&second.word);
            if best.as_ref().is_none_or(|(b, _)| w < *b) {
                best = Some((w, dsq));
            }
        }
    }
    let (word, dsq) = best.ok_or(WordError::NotFound {
        max_cost: 2 * half_cost,
    })?;
    let found = Approximation {
        cost: word.cost(),
        word,
        distance: dsq.sqrt(),
    };
    if found.cost as usize > confirm_up_to {
        return Ok(MitmApproximation {
            approximation: found,
            upper_bound: true,
        });
    }
    let approximation = match gate_complexity(gates, target, epsilon, found.cost as usize) {
        Ok(exact) => exact,
        Err(WordError::NotFound { .. }) => found,
        Err(e) => return Err(e),
    };
    Ok(MitmApproximation {
        approximation,
        upper_bound: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub epsilon: f64,
    pub complexity: Option<u64>,
    pub witness: Option<Word>,
    /// `ln(1/ε)/ln D` when a Diophantine constant was supplied.
    pub lower_bound_line: Option<f64>,
}

/// `C_ε` over a grid of tolerances with a least-squares slope against
/// `ln(1/ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingScan {
    pub points: Vec<ScanPoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Strictly increasing over resolved points, in grid order.
    pub strictly_increasing: bool,
}

impl ScalingScan {
    pub fn from_profile(
        profile: &DistanceProfile,
        eps_grid: &[f64],
        dioph: Option<&DiophantineReport>,
    ) -> Result<Self, WordError> {
        check_grid(eps_grid)?;
        let log_d = dioph.map(|r| r.fitted_d.ln());
        let points: Vec<ScanPoint> = eps_grid
            .iter()
            .map(|&epsilon| {
                let hit = profile.complexity(epsilon);
                ScanPoint {
                    epsilon,
                    complexity: hit.map(|a| a.cost),
                    witness: hit.map(|a| a.word.clone()),
                    lower_bound_line: log_d.map(|l| (1.0 / epsilon).ln() / l),
                }
            })
            .collect();
        let resolved: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| p.complexity.map(|c| ((1.0 / p.epsilon).ln(), c as f64)))
            .collect();
        if resolved.len() < 3 {
            return Err(WordError::InsufficientData {
                needed: 3,
                got: resolved.len(),
            });
        }
        let (x, y): (Vec<f64>, Vec<f64>) = resolved.iter().copied().unzip();
        let fit = linear_fit(&x, &y).ok_or(WordError::FitDegenerate)?;
        Ok(Self {
            strictly_increasing: y.windows(2).all(|w| w[1] > w[0]),
            points,
            slope: fit.slope,
            intercept: fit.intercept,
        })
    }
}

fn check_grid(eps_grid: &[f64]) -> Result<(), WordError> {
    if eps_grid.iter().any(|e| !(*e > 0.0)) || eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(WordError::InvalidArgument(
            "eps_grid must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

pub fn complexity_scaling_scan(
    gates: &GateSet,
    target: &UnitaryMatrix,
    eps_grid: &[f64],
    max_cost: usize,
    dioph: Option<&DiophantineReport>,
) -> Result<ScalingScan, WordError> {
    check_grid(eps_grid)?;
    let profile = distance_profile(gates, std::slice::from_ref(target), max_cost)?;
    ScalingScan::from_profile(&profile[0], eps_grid, dioph)
}

/// The `SU(2)` element `[[a + ib, c + id], [−c + id, a − ib]]/√(a²+b²+c²+d²)`
/// with integer quaternion coordinates nearest `denominator·base`.
///
/// Entries are algebraic, and for generic `base` the element lies outside
/// any group generated by gates with entries in a fixed number field.
pub fn rational_quaternion_target(
    base: &UnitaryMatrix,
    denominator: i64,
) -> Result<(UnitaryMatrix, [i64; 4]), WordError> {
    if base.dim() != 2 {
        return Err(WordError::DimensionMismatch(2, base.dim()));
    }
    if denominator < 1 {
        return Err(WordError::InvalidArgument("denominator must be positive".into()));
    }
    let m = base.matrix();
    let scale = denominator as f64;
    let q = [m[(0, 0)].re, m[(0, 0)].im, m[(0, 1)].re, m[(0, 1)].im].map(|v| (v * scale).round() as i64);
    let norm_sqr: i64 = q.iter().map(|v| v * v).sum();
    if norm_sqr == 0 {
        return Err(WordError::InvalidArgument("quaternion rounds to zero".into()));
    }
    let n = (norm_sqr as f64).sqrt();
    let [a, b, c, d] = q.map(|v| v as f64 / n);
    let u = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(a, b), C64::new(c, d), C64::new(-c, d), C64::new(a, -b)],
    );
    Ok((UnitaryMatrix::new(u)?, q))
}

/// One algebraic target near a base point and its scan.
#[derive(Debug, Clone, Serialize)]
pub struct TargetScan {
    pub base: usize,
    pub denominator: i64,
    pub quaternion: [i64; 4],
    pub base_distance: f64,
    /// `None` when fewer than three grid points resolve.
    pub scan: Option<ScalingScan>,
    /// Resolved, strictly increasing and with positive slope.
    pub accepted: bool,
}

/// For each base point, tries the rational quaternion targets of the given
/// denominators in order, skipping those farther than `radius` and repeats,
/// until one target's scan is accepted. All candidates tried are returned.
pub fn algebraic_target_scans(
    gates: &GateSet,
    bases: &[UnitaryMatrix],
    denominators: &[i64],
    radius: f64,
    eps_grid: &[f64],
    max_cost: usize,
    dioph: Option<&DiophantineReport>,
) -> Result<Vec<TargetScan>, WordError> {
    check_grid(eps_grid)?;
    let mut candidates: Vec<Vec<(i64, [i64; 4], UnitaryMatrix, f64)>> = Vec::new();
    for base in bases {
        let mut list: Vec<(i64, [i64; 4], UnitaryMatrix, f64)> = Vec::new();
        for &den in denominators {
            let (t, q) = rational_quaternion_target(base, den)?;
            let dist = t.distance(base);
            let g = q.iter().fold(0i64, |a, &b| gcd(a, b));
            let primitive = q.map(|v| v / g.max(1));
            let repeat = list.iter().any(|(_, p, _, _)| {
                let h = p.iter().fold(0i64, |a, &b| gcd(a, b)).max(1);
                p.map(|v| v / h) == primitive
            });
            if dist <= radius && !repeat {
                list.push((den, q, t, dist));
            }
        }
        candidates.push(list);
    }
    let mut out = Vec::new();
    let mut open: Vec<usize> = (0..bases.len()).collect();
    let mut round = 0;
    while !open.is_empty() {
        let batch: Vec<usize> = open.iter().copied().filter(|&b| round < candidates[b].len()).collect();
        if batch.is_empty() {
            break;
        }
        let targets: Vec<UnitaryMatrix> = batch.iter().map(|&b| candidates[b][round].2.clone()).collect();
        let profiles = distance_profile(gates, &targets, max_cost)?;
        for (&b, profile) in batch.iter().zip(&profiles) {
            let (den, q, _, dist) = &candidates[b][round];
            let scan = match ScalingScan::from_profile(profile, eps_grid, dioph) {
                Ok(s) => Some(s),
                Err(WordError::InsufficientData { .. }) => None,
                Err(e) => return Err(e),
            };
            let accepted = scan.as_ref().is_some_and(|s| s.strictly_increasing && s.slope > 0.0);
            out.push(TargetScan {
                base: b,
                denominator: *den,
                quaternion: *q,
                base_distance: *dist,
                scan,
                accepted,
            });
            if accepted {
                open.retain(|&o| o != b);
            }
        }
        round += 1;
    }
    Ok(out)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}
