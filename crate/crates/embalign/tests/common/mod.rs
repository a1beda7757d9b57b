//! Shared fixtures and reference implementations for the integration tests.
//!
//! The oracles here are deliberately naive (exhaustive search, O(n^2) pair
//! counting) and share no code with the production paths they check.
#![allow(dead_code)]

use std::cmp::Ordering;

use embalign::{EmbeddingTable, Segment};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maximum total weight over all injective assignments of the smaller side
/// of a `rows x cols` row-major matrix, by exhaustive recursion.
pub fn brute_force_max_total(weights: &[f64], rows: usize, cols: usize) -> f64 {
    assert_eq!(weights.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows > cols {
        let mut flipped = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                flipped[j * rows + i] = weights[i * cols + j];
            }
        }
        return brute_force_max_total(&flipped, cols, rows);
    }

    fn recurse(weights: &[f64], rows: usize, cols: usize, row: usize, used: &mut [bool]) -> f64 {
        if row == rows {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..cols {
            if !used[j] {
                used[j] = true;
                let total = weights[row * cols + j] + recurse(weights, rows, cols, row + 1, used);
                used[j] = false;
                if total > best {
                    best = total;
                }
            }
        }
        best
    }

    let mut used = vec![false; cols];
    recurse(weights, rows, cols, 0, &mut used)
}

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Word similarity under the surface-match fallback for missing tokens.
pub fn oracle_word_similarity(a: &str, b: &str, table: &EmbeddingTable) -> f64 {
    match (table.lookup(a, false), table.lookup(b, false)) {
        (Some(u), Some(v)) => oracle_cosine(u.components(), v.components()),
        _ => {
            if a == b {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// One-to-one alignment score by trying every injective alignment.
pub fn oracle_has(x: &Segment, y: &Segment, table: &EmbeddingTable, theta: f64) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let rows = x.len();
    let cols = y.len();
    let mut weights = Vec::with_capacity(rows * cols);
    for a in x.tokens() {
        for b in y.tokens() {
            let s = oracle_word_similarity(a, b, table);
            weights.push(if s < theta { 0.0 } else { s });
        }
    }
    brute_force_max_total(&weights, rows, cols) / rows.min(cols) as f64
}

/// Tie-corrected Kendall correlation by classifying every pair; `None` when
/// either side has zero variance.
pub fn oracle_tau_b(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let (mut c, mut d, mut th, mut tm) = (0_i64, 0_i64, 0_i64, 0_i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dh = pairs[i].0.partial_cmp(&pairs[j].0).expect("finite");
            let dm = pairs[i].1.partial_cmp(&pairs[j].1).expect("finite");
            match (dh, dm) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => th += 1,
                (_, Ordering::Equal) => tm += 1,
                (a, b) if a == b => c += 1,
                _ => d += 1,
            }
        }
    }
    if c + d + tm == 0 || c + d + th == 0 {
        return None;
    }
    let tau = (c - d) as f64 / (((c + d + th) as f64) * ((c + d + tm) as f64)).sqrt();
    Some(tau.clamp(-1.0, 1.0))
}

pub fn token_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("w{i}")).collect()
}

/// Table of `names.len()` random vectors with components in [-1, 1].
pub fn random_table(rng: &mut impl Rng, dimension: usize, names: &[String]) -> EmbeddingTable {
    let mut table = EmbeddingTable::new(dimension).unwrap();
    for name in names {
        let components: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        table.insert(name, components).unwrap();
    }
    table
}

/// Segment of `len` tokens drawn (with repetition) from `names`.
pub fn random_segment(rng: &mut impl Rng, names: &[String], len: usize) -> Segment {
    let tokens: Vec<String> = (0..len)
        .map(|_| names[rng.gen_range(0..names.len())].clone())
        .collect();
    Segment::from_tokens(tokens)
}
