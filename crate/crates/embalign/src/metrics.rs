//! Segment-pair similarity scores built from word-level cosine similarity.
//!
//! All three metrics start from the same matrix of word similarities between
//! a hypothesis and a reference. Entries below the configured threshold are
//! cut to zero before aggregation (denominators are not affected):
//!
//! * AAS averages the whole matrix,
//! * MAS averages each side's per-word maxima and then the two directions,
//! * HAS averages the matched weights of a maximum one-to-one assignment
//!   over the smaller side's length.
//!
//! Scoring is symmetric in its two segments, bit for bit. MAS gets this from
//! averaging both directions; AAS and HAS get it by computing on a canonical
//! orientation of the matrix so both argument orders share one float path.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::assignment::solve_max_assignment;
use crate::embedding::{cosine, EmbeddingTable, WordVector};
use crate::text::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Aas,
    Mas,
    Has,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Aas, Metric::Mas, Metric::Has];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Aas => "AAS",
            Metric::Mas => "MAS",
            Metric::Has => "HAS",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a word-pair similarity should be when either token has no vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    /// 1 when the two token strings are byte-identical, else 0.
    SurfaceMatch,
    /// Always 0.
    Zero,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
}

/// Metric selection plus the knobs shared by all scoring entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    metric: Metric,
    threshold: f64,
    oov_policy: OovPolicy,
    lowercase_fallback: bool,
}

impl MetricConfig {
    pub fn new(metric: Metric, threshold: f64) -> Result<Self, MetricError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(MetricError::InvalidThreshold(threshold));
        }
        Ok(Self {
            metric,
            threshold,
            oov_policy: OovPolicy::SurfaceMatch,
            lowercase_fallback: false,
        })
    }

    pub fn with_oov_policy(mut self, policy: OovPolicy) -> Self {
        self.oov_policy = policy;
        self
    }

    pub fn with_lowercase_fallback(mut self, enabled: bool) -> Self {
        self.lowercase_fallback = enabled;
        self
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov_policy
    }

    pub fn lowercase_fallback(&self) -> bool {
        self.lowercase_fallback
    }
}

/// Word-pair similarities for one segment pair, kept unthresholded so a
/// threshold sweep can reuse the matrix.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    threshold: f64,
    oov_row_tokens: usize,
    oov_col_tokens: usize,
}

impl SimilarityMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Raw similarity, which may be negative.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    /// Similarity with the matrix's own threshold applied.
    pub fn thresholded(&self, i: usize, j: usize) -> f64 {
        cut(self.value(i, j), self.threshold)
    }

    /// Similarity with an arbitrary threshold applied.
    pub fn thresholded_at(&self, i: usize, j: usize, theta: f64) -> f64 {
        cut(self.value(i, j), theta)
    }

    /// Tokens on either side that resolved to no vector.
    pub fn oov_tokens(&self) -> usize {
        self.oov_row_tokens + self.oov_col_tokens
    }

    /// Tokens on both sides combined.
    pub fn token_count(&self) -> usize {
        self.rows + self.cols
    }
}

/// Entries strictly below the threshold are cut; entries at it survive.
fn cut(value: f64, theta: f64) -> f64 {
    if value < theta {
        0.0
    } else {
        value
    }
}

fn resolve<'t>(
    segment: &Segment,
    table: &'t EmbeddingTable,
    config: MetricConfig,
) -> (Vec<Option<&'t WordVector>>, usize) {
    let vectors: Vec<Option<&WordVector>> = segment
        .tokens()
        .iter()
        .map(|t| table.lookup(t, config.lowercase_fallback))
        .collect();
    let misses = vectors.iter().filter(|v| v.is_none()).count();
    (vectors, misses)
}

fn oov_similarity(a: &str, b: &str, policy: OovPolicy) -> f64 {
    match policy {
        OovPolicy::SurfaceMatch => {
            if a == b {
                1.0
            } else {
                0.0
            }
        }
        OovPolicy::Zero => 0.0,
    }
}

/// Similarity of two tokens: cosine when both have vectors, otherwise the
/// configured out-of-vocabulary value.
pub fn word_similarity(a: &str, b: &str, table: &EmbeddingTable, config: MetricConfig) -> f64 {
    let u = table.lookup(a, config.lowercase_fallback);
    let v = table.lookup(b, config.lowercase_fallback);
    match (u, v) {
        (Some(u), Some(v)) => cosine(u, v),
        _ => oov_similarity(a, b, config.oov_policy()),
    }
}

/// Builds the `|x| x |y|` similarity matrix with rows for `x` and columns
/// for `y`.
pub fn build_matrix(
    x: &Segment,
    y: &Segment,
    table: &EmbeddingTable,
    config: MetricConfig,
) -> SimilarityMatrix {
    let (xs, oov_x) = resolve(x, table, config);
    let (ys, oov_y) = resolve(y, table, config);
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for (i, xv) in xs.iter().enumerate() {
        for (j, yv) in ys.iter().enumerate() {
            values.push(match (xv, yv) {
                (Some(u), Some(v)) => cosine(u, v),
                _ => oov_similarity(&x.tokens()[i], &y.tokens()[j], config.oov_policy()),
            });
        }
    }
    SimilarityMatrix {
        rows: xs.len(),
        cols: ys.len(),
        values,
        threshold: config.threshold(),
        oov_row_tokens: oov_x,
        oov_col_tokens: oov_y,
    }
}

/// Like [`build_matrix`] but in a fixed orientation: the lexicographically
/// smaller token sequence supplies the rows. Scores computed from the result
/// are identical bit for bit no matter which order the segments came in.
pub fn canonical_matrix(
    x: &Segment,
    y: &Segment,
    table: &EmbeddingTable,
    config: MetricConfig,
) -> SimilarityMatrix {
    if y.tokens() < x.tokens() {
        build_matrix(y, x, table, config)
    } else {
        build_matrix(x, y, table, config)
    }
}

/// AAS of a prebuilt matrix at threshold `theta`.
pub fn aas_from(m: &SimilarityMatrix, theta: f64) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            sum += m.thresholded_at(i, j, theta);
        }
    }
    sum / (m.rows * m.cols) as f64
}

fn row_maxima_mean(m: &SimilarityMatrix, theta: f64) -> f64 {
    if m.rows == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..m.rows {
        let mut best = 0.0_f64;
        for j in 0..m.cols {
            best = best.max(m.thresholded_at(i, j, theta));
        }
        sum += best;
    }
    sum / m.rows as f64
}

fn col_maxima_mean(m: &SimilarityMatrix, theta: f64) -> f64 {
    if m.cols == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 0..m.cols {
        let mut best = 0.0_f64;
        for i in 0..m.rows {
            best = best.max(m.thresholded_at(i, j, theta));
        }
        sum += best;
    }
    sum / m.cols as f64
}

/// MAS of a prebuilt matrix at threshold `theta`: the mean of the row-wise
/// and column-wise maxima averages.
pub fn mas_from(m: &SimilarityMatrix, theta: f64) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    (row_maxima_mean(m, theta) + col_maxima_mean(m, theta)) / 2.0
}

/// HAS of a prebuilt matrix at threshold `theta`: maximum-assignment weight
/// over the smaller side's length.
pub fn has_from(m: &SimilarityMatrix, theta: f64) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    let weights: Vec<f64> = (0..m.rows)
        .flat_map(|i| (0..m.cols).map(move |j| m.thresholded_at(i, j, theta)))
        .collect();
    let solved = solve_max_assignment(&weights, m.rows, m.cols)
        .expect("thresholded similarities are finite and the matrix is nonempty");
    solved.total_weight() / m.rows.min(m.cols) as f64
}

/// Dispatches on the metric for a prebuilt matrix.
pub fn score_from(metric: Metric, m: &SimilarityMatrix, theta: f64) -> f64 {
    match metric {
        Metric::Aas => aas_from(m, theta),
        Metric::Mas => mas_from(m, theta),
        Metric::Has => has_from(m, theta),
    }
}

/// Scores a segment pair with the configured metric. Empty segments score 0.
pub fn score(x: &Segment, y: &Segment, table: &EmbeddingTable, config: MetricConfig) -> f64 {
    score_from(
        config.metric(),
        &canonical_matrix(x, y, table, config),
        config.threshold(),
    )
}

/// Mean over all word pairs.
pub fn score_aas(x: &Segment, y: &Segment, table: &EmbeddingTable, config: MetricConfig) -> f64 {
    aas_from(&canonical_matrix(x, y, table, config), config.threshold())
}

/// One direction of MAS: each word of `a` takes its best match in `b`.
pub fn score_mas_asym(
    a: &Segment,
    b: &Segment,
    table: &EmbeddingTable,
    config: MetricConfig,
) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    row_maxima_mean(&build_matrix(a, b, table, config), config.threshold())
}

/// Symmetrized MAS.
pub fn score_mas(x: &Segment, y: &Segment, table: &EmbeddingTable, config: MetricConfig) -> f64 {
    mas_from(&canonical_matrix(x, y, table, config), config.threshold())
}

/// One-to-one alignment score via maximum-weight assignment.
pub fn score_has(x: &Segment, y: &Segment, table: &EmbeddingTable, config: MetricConfig) -> f64 {
    has_from(&canonical_matrix(x, y, table, config), config.threshold())
}

/// Builds the canonical matrix for every pair in parallel, preserving input
/// order.
pub fn canonical_matrices(
    pairs: &[(Segment, Segment)],
    table: &EmbeddingTable,
    config: MetricConfig,
) -> Vec<SimilarityMatrix> {
    pairs
        .par_iter()
        .map(|(x, y)| canonical_matrix(x, y, table, config))
        .collect()
}

/// Scores prebuilt matrices at one threshold in parallel, preserving input
/// order.
pub fn scores_at(matrices: &[SimilarityMatrix], metric: Metric, theta: f64) -> Vec<f64> {
    matrices
        .par_iter()
        .map(|m| score_from(metric, m, theta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::load_text_format;
    use crate::text::Segment;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn fixture_table() -> EmbeddingTable {
        let text = format!("a 1.0 0.0\nb 0.0 1.0\nc {INV_SQRT2} {INV_SQRT2}\nneg -1.0 0.0\n");
        load_text_format(text.as_bytes()).unwrap()
    }

    fn seg(tokens: &[&str]) -> Segment {
        Segment::from_tokens(tokens.iter().map(|t| t.to_string()).collect())
    }

    fn config(metric: Metric, theta: f64) -> MetricConfig {
        MetricConfig::new(metric, theta).unwrap()
    }

    #[test]
    fn threshold_outside_unit_interval_is_rejected() {
        assert!(MetricConfig::new(Metric::Aas, -0.1).is_err());
        assert!(MetricConfig::new(Metric::Aas, 1.1).is_err());
        assert!(MetricConfig::new(Metric::Aas, f64::NAN).is_err());
        assert!(MetricConfig::new(Metric::Aas, 1.0).is_ok());
    }

    #[test]
    fn word_similarity_cases() {
        let t = fixture_table();
        let cfg = config(Metric::Aas, 0.0);
        assert_eq!(word_similarity("a", "b", &t, cfg), 0.0);
        assert_relative_eq!(word_similarity("a", "c", &t, cfg), INV_SQRT2, epsilon = 1e-12);
        assert_eq!(word_similarity("zxqv", "zxqv", &t, cfg), 1.0);
        assert_eq!(word_similarity("zxqv", "wxyz", &t, cfg), 0.0);
        assert_eq!(word_similarity("zxqv", "a", &t, cfg), 0.0);

        let zero = cfg.with_oov_policy(OovPolicy::Zero);
        assert_eq!(word_similarity("zxqv", "zxqv", &t, zero), 0.0);
    }

    #[test]
    fn matrix_example_with_cutoff() {
        let t = fixture_table();
        let m = build_matrix(&seg(&["a", "c"]), &seg(&["a", "b"]), &t, config(Metric::Aas, 0.8));
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.value(0, 0), 1.0);
        assert_eq!(m.value(0, 1), 0.0);
        assert_relative_eq!(m.value(1, 0), INV_SQRT2, epsilon = 1e-12);
        assert_relative_eq!(m.value(1, 1), INV_SQRT2, epsilon = 1e-12);
        assert_eq!(m.thresholded(0, 0), 1.0);
        assert_eq!(m.thresholded(1, 0), 0.0);
        assert_eq!(m.thresholded(1, 1), 0.0);
    }

    #[test]
    fn empty_segment_gives_empty_matrix_and_zero_scores() {
        let t = fixture_table();
        let cfg = config(Metric::Aas, 0.0);
        let m = build_matrix(&seg(&[]), &seg(&["a"]), &t, cfg);
        assert_eq!((m.rows(), m.cols()), (0, 1));
        for metric in Metric::ALL {
            assert_eq!(score(&seg(&[]), &seg(&["a"]), &t, config(metric, 0.0)), 0.0);
            assert_eq!(score(&seg(&[]), &seg(&[]), &t, config(metric, 0.0)), 0.0);
        }
    }

    #[test]
    fn aas_fixture_values() {
        let t = fixture_table();
        let x = seg(&["a", "c"]);
        let y = seg(&["a", "b"]);
        assert_relative_eq!(
            score_aas(&x, &y, &t, config(Metric::Aas, 0.0)),
            0.60355339,
            epsilon = 1e-8
        );
        assert_eq!(score_aas(&x, &y, &t, config(Metric::Aas, 0.8)), 0.25);
    }

    #[test]
    fn mas_fixture_values() {
        let t = fixture_table();
        let x = seg(&["a", "c"]);
        let y = seg(&["a", "b"]);
        let cfg = config(Metric::Mas, 0.0);
        assert_relative_eq!(score_mas_asym(&x, &y, &t, cfg), 0.85355339, epsilon = 1e-8);
        assert_relative_eq!(score_mas(&x, &y, &t, cfg), 0.85355339, epsilon = 1e-8);
        assert_eq!(score_mas(&x, &y, &t, config(Metric::Mas, 0.8)), 0.5);
    }

    #[test]
    fn mas_is_the_mean_of_both_directions() {
        let t = fixture_table();
        let x = seg(&["a", "c", "zxqv"]);
        let y = seg(&["b", "a"]);
        let cfg = config(Metric::Mas, 0.3);
        let expected = (score_mas_asym(&x, &y, &t, cfg) + score_mas_asym(&y, &x, &t, cfg)) / 2.0;
        assert_eq!(score_mas(&x, &y, &t, cfg), expected);
    }

    #[test]
    fn mas_asym_with_empty_other_side() {
        let t = fixture_table();
        assert_eq!(score_mas_asym(&seg(&["a"]), &seg(&[]), &t, config(Metric::Mas, 0.0)), 0.0);
        assert_eq!(score_mas_asym(&seg(&[]), &seg(&["a"]), &t, config(Metric::Mas, 0.0)), 0.0);
    }

    #[test]
    fn has_fixture_values() {
        let t = fixture_table();
        let x = seg(&["a", "c"]);
        let y = seg(&["a", "b"]);
        assert_relative_eq!(
            score_has(&x, &y, &t, config(Metric::Has, 0.0)),
            0.85355339,
            epsilon = 1e-8
        );
        assert_eq!(score_has(&x, &y, &t, config(Metric::Has, 0.8)), 0.5);
    }

    #[test]
    fn has_cut_below_threshold_scores_zero() {
        let t = fixture_table();
        let r = score_has(&seg(&["a"]), &seg(&["b"]), &t, config(Metric::Has, 0.5));
        assert_eq!(r, 0.0);
    }

    #[test]
    fn identical_in_vocab_segments_saturate_mas_and_has() {
        let t = fixture_table();
        let x = seg(&["a", "b", "c"]);
        for theta in [0.0, 0.8] {
            assert_relative_eq!(score_mas(&x, &x, &t, config(Metric::Mas, theta)), 1.0, epsilon = 1e-9);
            assert_relative_eq!(score_has(&x, &x, &t, config(Metric::Has, theta)), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn oov_surface_match_survives_threshold_one() {
        let t = fixture_table();
        let x = seg(&["zxqv"]);
        assert_eq!(score_aas(&x, &x, &t, config(Metric::Aas, 1.0)), 1.0);
    }

    #[test]
    fn negative_similarity_is_kept_raw_but_cut_at_zero_threshold() {
        let t = fixture_table();
        let m = build_matrix(&seg(&["a"]), &seg(&["neg"]), &t, config(Metric::Aas, 0.0));
        assert_eq!(m.value(0, 0), -1.0);
        assert_eq!(m.thresholded(0, 0), 0.0);
        assert_eq!(score_aas(&seg(&["a"]), &seg(&["neg"]), &t, config(Metric::Aas, 0.0)), 0.0);
    }

    #[test]
    fn oov_tokens_are_counted_per_lookup_after_fallback() {
        let text = "cat 1.0 0.0\n";
        let t = load_text_format(text.as_bytes()).unwrap();
        let x = seg(&["Cat", "dog"]);
        let y = seg(&["cat"]);

        let plain = build_matrix(&x, &y, &t, config(Metric::Aas, 0.0));
        assert_eq!(plain.oov_tokens(), 2);
        assert_eq!(plain.token_count(), 3);

        let fallback = build_matrix(
            &x,
            &y,
            &t,
            config(Metric::Aas, 0.0).with_lowercase_fallback(true),
        );
        assert_eq!(fallback.oov_tokens(), 1);
    }

    #[test]
    fn batch_paths_match_direct_scoring() {
        let t = fixture_table();
        let pairs = vec![
            (seg(&["a", "c"]), seg(&["a", "b"])),
            (seg(&["b"]), seg(&["c", "a", "zxqv"])),
            (seg(&[]), seg(&["a"])),
        ];
        let cfg = config(Metric::Has, 0.2);
        let matrices = canonical_matrices(&pairs, &t, cfg);
        let batch = scores_at(&matrices, Metric::Has, 0.2);
        for (i, (x, y)) in pairs.iter().enumerate() {
            assert_eq!(batch[i], score_has(x, y, &t, cfg));
        }
    }

    fn arb_segment() -> impl Strategy<Value = Segment> {
        prop::collection::vec(
            prop::sample::select(vec!["a", "b", "c", "neg", "zxqv", "wxyz", "Cat"]),
            0..6,
        )
        .prop_map(|tokens| Segment::from_tokens(tokens.into_iter().map(String::from).collect()))
    }

    proptest! {
        #[test]
        fn scores_are_symmetric_bounded_and_monotone(
            x in arb_segment(),
            y in arb_segment(),
        ) {
            let t = fixture_table();
            for metric in Metric::ALL {
                let mut previous = f64::INFINITY;
                for k in 0..10 {
                    let theta = k as f64 / 10.0;
                    let cfg = config(metric, theta);
                    let forward = score(&x, &y, &t, cfg);
                    let backward = score(&y, &x, &t, cfg);
                    prop_assert_eq!(forward, backward);
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&forward));
                    prop_assert!(forward <= previous + 1e-12);
                    previous = forward;
                }
            }
        }

        #[test]
        fn aas_never_exceeds_mas(x in arb_segment(), y in arb_segment(), k in 0_usize..10) {
            let t = fixture_table();
            let theta = k as f64 / 10.0;
            let aas = score_aas(&x, &y, &t, config(Metric::Aas, theta));
            let mas = score_mas(&x, &y, &t, config(Metric::Mas, theta));
            prop_assert!(aas <= mas + 1e-12);
        }

        /// Scaling every embedding vector by a positive factor leaves cosine
        /// similarities, and therefore scores, essentially unchanged.
        #[test]
        fn scores_ignore_embedding_scale(
            x in arb_segment(),
            y in arb_segment(),
            factor in prop::sample::select(vec![0.25_f64, 3.0, 117.0]),
        ) {
            let base = fixture_table();
            let mut scaled = EmbeddingTable::new(base.dimension()).unwrap();
            for (token, vector) in base.iter() {
                let comps: Vec<f64> = vector.components().iter().map(|c| c * factor).collect();
                scaled.insert(token, comps).unwrap();
            }
            for metric in Metric::ALL {
                let cfg = config(metric, 0.2);
                let a = score(&x, &y, &base, cfg);
                let b = score(&x, &y, &scaled, cfg);
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
