use super::{Distribution, SubRiemannianError};
use crate::algebra::{CMatrix, C64};

/// A vector counts as new if less than this fraction of its norm survives
/// projection onto the current span.
const RANK_TOL: f64 = 1e-8;

/// Real dimensions `m_k` of the flag computed from dense matrices: each
/// level is the real span of `Δ^{[k]}` and `i[X, Y]`, `X ∈ Δ`, `Y ∈ Δ^{[k]}`.
/// Needs the dense realization, so `N ≤ 3`.
pub fn dense_flag_ranks(dist: &Distribution) -> Result<Vec<usize>, SubRiemannianError> {
    let easy = dist
        .strings()
        .iter()
        .map(|p| p.to_matrix())
        .collect::<Result<Vec<CMatrix>, _>>()?;
    let mut span = Span::default();
    for m in &easy {
        span.absorb(m);
    }
    let mut ranks = vec![span.len()];
    loop {
        let mut next = span.clone();
        for x in &easy {
            for y in &span.mats {
                let c = (x * y - y * x) * C64::new(0.0, 1.0);
                next.absorb(&c);
            }
        }
        if next.len() == span.len() {
            break;
        }
        ranks.push(next.len());
        span = next;
    }
    Ok(ranks)
}

/// Orthonormal basis of a real span of Hermitian matrices, kept both as
/// flattened real vectors and as matrices.
#[derive(Clone, Default)]
struct Span {
    vecs: Vec<Vec<f64>>,
    mats: Vec<CMatrix>,
}

impl Span {
    fn len(&self) -> usize {
        self.vecs.len()
    }

    fn absorb(&mut self, m: &CMatrix) {
        let mut v: Vec<f64> = m.iter().flat_map(|z| [z.re, z.im]).collect();
        let norm0 = norm(&v);
        if norm0 == 0.0 {
            return;
        }
        // two Gram–Schmidt passes
        for _ in 0..2 {
            for b in &self.vecs {
                let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let rest = norm(&v);
        if rest <= RANK_TOL * norm0 {
            return;
        }
        v.iter_mut().for_each(|a| *a /= rest);
        let d = m.nrows();
        let mat = CMatrix::from_iterator(d, d, v.chunks(2).map(|c| C64::new(c[0], c[1])));
        self.vecs.push(v);
        self.mats.push(mat);
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
