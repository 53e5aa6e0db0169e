use serde::Serialize;
use std::f64::consts::TAU;

use super::enumerate::EnumerationBudget;
use super::gateset::GateSet;
use super::search::{traverse, Alphabet};
use super::word::{Letter, Word};
use super::WordError;
use crate::algebra::C64;
use crate::fit::linear_fit;

/// Words closer than this to a center element count as equal to it.
const CENTER_TOL: f64 = 1e-10;

/// Slack on the floor `min_gap(l) ≥ D^{−l}/FLOOR_SLACK`.
pub const FLOOR_SLACK: f64 = 10.0;

/// Closest approach of cost-`l` words to the center `{ω^k·1}` of `SU(d)`.
#[derive(Debug, Clone, Serialize)]
pub struct GapPoint {
    pub l: usize,
    pub min_gap: f64,
    pub witness: Word,
    /// Index `k` of the nearest center element `e^{2πik/d}·1`.
    pub center: usize,
}

/// `min_gap(l)` for every `l = 1 ..= l_max`, excluding words equal to a
/// center element. For `d = 2` the center is `{±1}`.
pub fn min_gaps(gates: &GateSet, l_max: usize) -> Result<Vec<GapPoint>, WordError> {
    if l_max == 0 {
        return Err(WordError::InvalidArgument("l must be at least 1".into()));
    }
    EnumerationBudget::default().check_scan(gates.len(), l_max)?;
    let d = gates.dim();
    let omegas: Vec<C64> = (0..d)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / d as f64))
        .collect();
    let alphabet = Alphabet::new(gates);
    let init = || vec![(f64::INFINITY, 0usize, Vec::<Letter>::new()); l_max + 1];
    let states = traverse(&alphabet, l_max, init, |best, letters, m| {
        let tr: C64 = (0..d).map(|i| m[i * d + i]).sum();
        // ‖W − ω1‖² = 2d − 2 Re(ω̄ Tr W) for unitary W
        let (k, dsq) = omegas
            .iter()
            .map(|w| (2.0 * d as f64 - 2.0 * (w.conj() * tr).re).max(0.0))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty center");
        let slot = &mut best[letters.len()];
        if dsq.sqrt() > CENTER_TOL && (dsq < slot.0 || (dsq == slot.0 && letters < slot.2.as_slice())) {
            *slot = (dsq, k, letters.to_vec());
        }
        true
    });
    (1..=l_max)
        .map(|l| {
            let (dsq, center, letters) = states
                .iter()
                .map(|s| &s[l])
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("at least one letter");
            if !dsq.is_finite() {
                return Err(WordError::InvalidArgument(format!(
                    "every word of cost {l} is central"
                )));
            }
            Ok(GapPoint {
                l,
                min_gap: dsq.sqrt(),
                witness: Word::from_letters(letters),
                center: *center,
            })
        })
        .collect()
}

/// `min_gap(l)` for a single cost `l`.
pub fn min_distance_to_targets(gates: &GateSet, l: usize) -> Result<f64, WordError> {
    Ok(min_gaps(gates, l)?[l - 1].min_gap)
}

/// Least-squares fit of `−ln min_gap(l) = l·ln D + b`.
#[derive(Debug, Clone, Serialize)]
pub struct DiophantineReport {
    pub lengths: Vec<usize>,
    pub min_gaps: Vec<f64>,
    pub fitted_d: f64,
    pub intercept: f64,
    /// Per-point `|ĝ(l) − g(l)|/g(l)` with `ĝ = e^{−b} D^{−l}`.
    pub relative_residuals: Vec<f64>,
    /// Largest entry of `relative_residuals`.
    pub fit_residual: f64,
    /// `min_gap(l) ≥ D^{−l}/FLOOR_SLACK` at every measured `l`.
    pub floor_holds: bool,
    /// `min_gap` is non-increasing in `l`.
    pub monotone: bool,
}

pub fn fit_diophantine_constant(
    lengths: &[usize],
    gaps: &[f64],
) -> Result<DiophantineReport, WordError> {
    if lengths.len() != gaps.len() {
        return Err(WordError::InvalidArgument(format!(
            "{} lengths but {} gaps",
            lengths.len(),
            gaps.len()
        )));
    }
    if lengths.len() < 4 {
        return Err(WordError::InsufficientData {
            needed: 4,
            got: lengths.len(),
        });
    }
    if gaps.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(WordError::InvalidArgument("gaps must be positive and finite".into()));
    }
    if gaps.iter().all(|g| *g == gaps[0]) {
        return Err(WordError::FitDegenerate);
    }
    let x: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let y: Vec<f64> = gaps.iter().map(|g| -g.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or(WordError::FitDegenerate)?;
    let fitted_d = fit.slope.exp();
    let relative_residuals: Vec<f64> = x
        .iter()
        .zip(gaps)
        .map(|(&l, &g)| ((-fit.predict(l)).exp() - g).abs() / g)
        .collect();
    let fit_residual = relative_residuals.iter().copied().fold(0.0, f64::max);
    let floor_holds = x
        .iter()
        .zip(gaps)
        .all(|(&l, &g)| g >= fitted_d.powf(-l) / FLOOR_SLACK);
    Ok(DiophantineReport {
        lengths: lengths.to_vec(),
        min_gaps: gaps.to_vec(),
        fitted_d,
        intercept: fit.intercept,
        relative_residuals,
        fit_residual,
        floor_holds,
        monotone: gaps.windows(2).all(|w| w[1] <= w[0]),
    })
}

/// Measures `min_gap(l)` for `l = 1 ..= l_max` and fits the constant.
pub fn diophantine_report(
    gates: &GateSet,
    l_max: usize,
) -> Result<(Vec<GapPoint>, DiophantineReport), WordError> {
    let points = min_gaps(gates, l_max)?;
    let lengths: Vec<usize> = points.iter().map(|p| p.l).collect();
    let gaps: Vec<f64> = points.iter().map(|p| p.min_gap).collect();
    let report = fit_diophantine_constant(&lengths, &gaps)?;
    Ok((points, report))
}
