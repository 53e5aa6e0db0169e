//! Depth-first traversal of reduced words and a spatial index for
//! tolerance-based matrix matching.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::HashMap;

use super::gateset::GateSet;
use super::word::{inverse, Letter};
use crate::algebra::C64;

/// Row-major `d × d` matrices of every letter `g_i^{±1}`.
pub(crate) struct Alphabet {
    pub d: usize,
    pub mats: Vec<Vec<C64>>,
}

impl Alphabet {
    pub fn new(gates: &GateSet) -> Self {
        let d = gates.dim();
        let mats = (0..gates.len())
            .flat_map(|i| {
                let g = gates.gate(i).matrix();
                [row_major(g), row_major(&g.adjoint())]
            })
            .collect();
        Self { d, mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }
}

pub(crate) fn row_major(m: &crate::algebra::CMatrix) -> Vec<C64> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).collect()
}

pub(crate) fn from_row_major(d: usize, v: &[C64]) -> crate::algebra::CMatrix {
    crate::algebra::CMatrix::from_row_slice(d, d, v)
}

pub(crate) fn identity_row_major(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(1.0, 0.0);
    }
    v
}

#[inline]
pub(crate) fn mul_into(a: &[C64], b: &[C64], out: &mut [C64], d: usize) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

#[inline]
pub(crate) fn dist_sqr(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Visits every nonempty reduced word of cost `≤ max_cost` in depth-first
/// lexicographic order. Subtrees under each first letter run in parallel;
/// states come back in letter order. `visit` returns `false` to prune the
/// subtree below the current word.
pub(crate) fn traverse<S, I, V>(
    alphabet: &Alphabet,
    max_cost: usize,
    init: I,
    visit: V,
) -> Vec<S>
where
    S: Send,
    I: Fn() -> S + Sync,
    V: Fn(&mut S, &[Letter], &[C64]) -> bool + Sync,
{
    if max_cost == 0 {
        return Vec::new();
    }
    (0..alphabet.len())
        .into_par_iter()
        .map(|first| {
            let mut state = init();
            walk_subtree(alphabet, max_cost, first as Letter, &mut state, &visit);
            state
        })
        .collect()
}

fn walk_subtree<S, V>(alphabet: &Alphabet, max_cost: usize, first: Letter, state: &mut S, visit: &V)
where
    V: Fn(&mut S, &[Letter], &[C64]) -> bool,
{
    let d = alphabet.d;
    let n_letters = alphabet.len() as Letter;
    let mut mats = vec![vec![C64::new(0.0, 0.0); d * d]; max_cost + 1];
    mats[1].copy_from_slice(&alphabet.mats[first as usize]);
    let mut letters = vec![first];
    if !visit(state, &letters, &mats[1]) {
        return;
    }
    let mut next = vec![0 as Letter; max_cost + 1];
    let mut depth = 1;
    loop {
        if depth == max_cost || next[depth] == n_letters {
            if depth == 1 {
                break;
            }
            letters.pop();
            depth -= 1;
            continue;
        }
        let l = next[depth];
        next[depth] += 1;
        if l == inverse(letters[depth - 1]) {
            continue;
        }
        let (lo, hi) = mats.split_at_mut(depth + 1);
        mul_into(&lo[depth], &alphabet.mats[l as usize], &mut hi[0], d);
        letters.push(l);
        depth += 1;
        next[depth] = 0;
        if !visit(state, &letters, &mats[depth]) {
            letters.pop();
            depth -= 1;
        }
    }
}

/// Buckets matrices by a 3-dimensional linear projection quantized at `cell`.
///
/// Each projection has unit coefficient norm, so it is 1-Lipschitz in the
/// Hilbert–Schmidt norm and any pair within `cell` lands in adjacent buckets.
pub(crate) struct ProximityIndex {
    cell: f64,
    projections: Vec<Vec<C64>>,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl ProximityIndex {
    pub fn new(d: usize, cell: f64) -> Self {
        assert!(cell > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let projections = (0..3)
            .map(|_| {
                let v: Vec<C64> = (0..d * d)
                    .map(|_| {
                        C64::new(
                            StandardNormal.sample(&mut rng),
                            StandardNormal.sample(&mut rng),
                        )
                    })
                    .collect();
                let norm = crate::algebra::frobenius(&v);
                v.into_iter().map(|z| z / norm).collect()
            })
            .collect();
        Self {
            cell,
            projections,
            buckets: HashMap::new(),
        }
    }

    fn coords(&self, m: &[C64]) -> [i64; 3] {
        let mut key = [0i64; 3];
        for (k, p) in self.projections.iter().enumerate() {
            let x: f64 = p.iter().zip(m).map(|(c, z)| (c.conj() * z).re).sum();
            key[k] = (x / self.cell).floor() as i64;
        }
        key
    }

    pub fn insert(&mut self, m: &[C64], id: usize) {
        let key = self.coords(m);
        self.buckets.entry(key).or_default().push(id);
    }

    pub fn remove(&mut self, m: &[C64], id: usize) {
        let key = self.coords(m);
        if let Some(bucket) = self.buckets.get_mut(&key) {
            bucket.retain(|&x| x != id);
        }
    }

    /// Ids whose bucket neighbours the bucket of `m`; a superset of every
    /// stored matrix within `cell` of `m`.
    pub fn candidates<'a>(&'a self, m: &[C64]) -> impl Iterator<Item = usize> + 'a {
        let key = self.coords(m);
        (0..27).flat_map(move |n| {
            let offset = [n % 3 - 1, n / 3 % 3 - 1, n / 9 - 1];
            let k = [key[0] + offset[0], key[1] + offset[1], key[2] + offset[2]];
            self.buckets.get(&k).into_iter().flatten().copied()
        })
    }
}
