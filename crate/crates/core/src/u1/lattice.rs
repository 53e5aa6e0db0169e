//! Continued-fraction oracle for `C_ε` on `U(1)`.
//!
//! Hits are the points `(n, nθ − m − x)` of an affine lattice inside the box
//! `|n| ≤ N`, `|y| < η`. Consecutive convergent vectors `(q_k, q_kθ − p_k)`
//! form a basis of the lattice adapted to the box, so the search only touches
//! a handful of coefficient pairs per window.

use std::f64::consts::{PI, TAU};

use super::continued_fraction::{continued_fraction, MAX_DEPTH};
use super::{CirclePoint, U1Error};

/// Largest number of coefficient pairs examined in one window.
const WINDOW_CAP: f64 = 1e8;

#[derive(Clone, Copy)]
struct Basis {
    q: i64,
    e: f64,
}

/// Least `|n| ≤ n_max` with `|e^{iφ} − e^{inα}| < ε`, positive `n` first on
/// ties; `None` if there is none.
pub fn lattice_complexity(
    phi: CirclePoint,
    alpha: f64,
    epsilon: f64,
    n_max: u64,
) -> Result<Option<i64>, U1Error> {
    super::check_inputs(alpha, epsilon)?;
    if epsilon > 2.0 {
        return Ok(Some(0));
    }
    let eta = (epsilon / 2.0).asin() / PI;
    let theta = (alpha / TAU).rem_euclid(1.0);
    let x = phi.phase() / TAU;
    let n_max = i64::try_from(n_max).map_err(|_| U1Error::InvalidArgument("n_max too large".into()))?;
    let cf = continued_fraction(theta, MAX_DEPTH)?;
    let mut basis = vec![Basis { q: 0, e: 1.0 }];
    basis.extend(cf.convergents.iter().map(|&(p, q)| Basis {
        q,
        e: q as f64 * theta - p as f64,
    }));
    for k in 0..basis.len() - 1 {
        let last = k + 2 == basis.len();
        let window = if last { n_max } else { basis[k + 1].q.min(n_max) };
        if let Some(n) = search_window(basis[k], basis[k + 1], x, eta, window)? {
            return Ok(Some(n));
        }
        if window >= n_max {
            break;
        }
    }
    Ok(None)
}

fn search_window(u: Basis, v: Basis, x: f64, eta: f64, window: i64) -> Result<Option<i64>, U1Error> {
    // (n, y + x) = a·(u.q, u.e) + b·(v.q, v.e)
    let det = u.q as f64 * v.e - v.q as f64 * u.e;
    let solve = |n: f64, w: f64| ((v.e * n - v.q as f64 * w) / det, (u.q as f64 * w - u.e * n) / det);
    let nf = window as f64;
    let corners = [(-nf, x - eta), (-nf, x + eta), (nf, x - eta), (nf, x + eta)];
    let (mut a_lo, mut a_hi, mut b_lo, mut b_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (n, w) in corners {
        let (a, b) = solve(n, w);
        a_lo = a_lo.min(a);
        a_hi = a_hi.max(a);
        b_lo = b_lo.min(b);
        b_hi = b_hi.max(b);
    }
    let (a_lo, a_hi) = (a_lo.floor() - 1.0, a_hi.ceil() + 1.0);
    let (b_lo, b_hi) = (b_lo.floor() - 1.0, b_hi.ceil() + 1.0);
    if (a_hi - a_lo + 1.0) * (b_hi - b_lo + 1.0) > WINDOW_CAP {
        return Err(U1Error::InvalidArgument("oracle window too large".into()));
    }
    let mut best: Option<i64> = None;
    for a in a_lo as i64..=a_hi as i64 {
        for b in b_lo as i64..=b_hi as i64 {
            let n = a * u.q + b * v.q;
            if n.abs() > window {
                continue;
            }
            let y = a as f64 * u.e + b as f64 * v.e - x;
            if y.abs() >= eta {
                continue;
            }
            let better = match best {
                None => true,
                Some(c) => n.abs() < c.abs() || (n.abs() == c.abs() && n > c),
            };
            if better {
                best = Some(n);
            }
        }
    }
    Ok(best)
}
