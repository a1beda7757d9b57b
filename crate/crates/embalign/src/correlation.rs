//! Kendall rank correlation (tau-b) between human and metric scores.
//!
//! The tie-corrected form is used: with C concordant pairs, D discordant
//! pairs, and T_h / T_m the pairs tied only in the human or only in the
//! metric scores,
//!
//! ```text
//! tau = (C - D) / sqrt((C + D + T_h) * (C + D + T_m))
//! ```
//!
//! Pairs tied on both sides count toward neither term. Counting runs in
//! O(n log n): pairs are sorted by the first score and discordances fall out
//! of merge-sorting the second.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorrelationError {
    #[error("need at least 2 score pairs, got {0}")]
    TooFewPairs(usize),
    #[error("score pair {0} is not finite")]
    NonFinite(usize),
    #[error("human scores are all tied; correlation is undefined")]
    ConstantHuman,
    #[error("metric scores are all tied; correlation is undefined")]
    ConstantMetric,
}

/// One segment's identifier with its human judgment and metric score.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgedSegment {
    pub segment_id: String,
    pub human_score: f64,
    pub metric_score: f64,
}

/// Tau-b over `(human_score, metric_score)` pairs, in `[-1, 1]`.
pub fn kendall_tau_b(pairs: &[(f64, f64)]) -> Result<f64, CorrelationError> {
    let n = pairs.len();
    if n < 2 {
        return Err(CorrelationError::TooFewPairs(n));
    }
    for (i, &(h, m)) in pairs.iter().enumerate() {
        if !h.is_finite() || !m.is_finite() {
            return Err(CorrelationError::NonFinite(i));
        }
    }

    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = pair_count(n as u64);
    let (tie_h, tie_both) = human_tie_counts(&sorted);

    let mut metric_scores: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = metric_scores.clone();
    let discordant = merge_count_inversions(&mut metric_scores, &mut buf);
    let tie_m = sorted_run_pairs(&metric_scores);

    let h_factor = n0 - tie_h;
    let m_factor = n0 - tie_m;
    if h_factor == 0 {
        return Err(CorrelationError::ConstantHuman);
    }
    if m_factor == 0 {
        return Err(CorrelationError::ConstantMetric);
    }

    // C + D = n0 - tie_h - tie_m + tie_both, so C - D follows from the
    // discordance count alone.
    let numerator = n0 as i64 - tie_h as i64 - tie_m as i64 + tie_both as i64
        - 2 * discordant as i64;
    let denominator = (h_factor as f64 * m_factor as f64).sqrt();
    Ok((numerator as f64 / denominator).clamp(-1.0, 1.0))
}

pub fn kendall_tau_b_judged(items: &[JudgedSegment]) -> Result<f64, CorrelationError> {
    let pairs: Vec<(f64, f64)> = items
        .iter()
        .map(|s| (s.human_score, s.metric_score))
        .collect();
    kendall_tau_b(&pairs)
}

fn pair_count(k: u64) -> u64 {
    k * (k.saturating_sub(1)) / 2
}

/// Tied-pair counts over the human side: all human ties, and ties on both
/// sides jointly. Input must be sorted by (human, metric).
fn human_tie_counts(sorted: &[(f64, f64)]) -> (u64, u64) {
    let n = sorted.len();
    let mut tie_h = 0;
    let mut tie_both = 0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        tie_h += pair_count((j - i) as u64);
        let mut a = i;
        while a < j {
            let mut b = a + 1;
            while b < j && sorted[b].1 == sorted[a].1 {
                b += 1;
            }
            tie_both += pair_count((b - a) as u64);
            a = b;
        }
        i = j;
    }
    (tie_h, tie_both)
}

fn sorted_run_pairs(sorted: &[f64]) -> u64 {
    let n = sorted.len();
    let mut ties = 0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        ties += pair_count((j - i) as u64);
        i = j;
    }
    ties
}

/// Sorts in place, returning the number of strict inversions. Equal values
/// never count as inverted.
fn merge_count_inversions(values: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inversions = {
        let (left, right) = values.split_at_mut(mid);
        let (buf_left, buf_right) = buf.split_at_mut(mid);
        merge_count_inversions(left, buf_left) + merge_count_inversions(right, buf_right)
    };

    let mut i = 0;
    let mut j = mid;
    let mut k = 0;
    while i < mid && j < n {
        if values[i] <= values[j] {
            buf[k] = values[i];
            i += 1;
        } else {
            buf[k] = values[j];
            j += 1;
            inversions += (mid - i) as u64;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = values[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = values[j];
        j += 1;
        k += 1;
    }
    values.copy_from_slice(&buf[..n]);
    inversions
}
