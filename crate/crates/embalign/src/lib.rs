//! Sentence similarity for machine translation output, computed by aligning
//! words of a hypothesis to words of a reference in embedding space.
//!
//! Three scores are provided, all built on cosine similarity between word
//! vectors and an alignment cutoff threshold:
//!
//! * **AAS** averages similarity over every hypothesis/reference word pair.
//! * **MAS** aligns each word to its most similar counterpart on the other
//!   side and averages the two directions.
//! * **HAS** aligns words one-to-one with a maximum-weight assignment and
//!   averages the matched similarities.
//!
//! Supporting pieces: a word2vec-format embedding store ([`embedding`]), a
//! tokenizer ([`text`]), a rectangular assignment solver ([`assignment`]),
//! Kendall tau-b for comparing metric scores against human judgments
//! ([`correlation`]), and TSV/CSV dataset handling ([`dataset`]).

pub mod assignment;
pub mod correlation;
pub mod dataset;
pub mod embedding;
pub mod metrics;
pub mod text;

pub use assignment::{solve_max_assignment, AssignmentResult};
pub use correlation::kendall_tau_b;
pub use dataset::{EvaluationItem, EvaluationSet};
pub use embedding::{cosine, EmbeddingTable, WordVector};
pub use metrics::{Metric, MetricConfig, OovPolicy, SimilarityMatrix};
pub use text::{tokenize, Segment, TokenizePolicy};
