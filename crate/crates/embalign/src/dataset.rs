//! Reading evaluation datasets and writing score and sweep files.
//!
//! Datasets are tab-separated with three or four columns per line:
//! `segment_id`, `hypothesis`, `reference`, and an optional human score.
//! Lines starting with `#` are comments; blank lines are skipped. Line
//! numbers in errors count every physical line, comments included.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: expected 3 or 4 tab-separated fields, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: duplicate segment id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: invalid human score {value:?}")]
    InvalidScore { line: usize, value: String },
    #[error("duplicate segment id {id:?}")]
    DuplicateIdInSet { id: String },
    #[error("{scores} scores for {items} items")]
    LengthMismatch { scores: usize, items: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One dataset row: a hypothesis/reference text pair under a unique id.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationItem {
    pub segment_id: String,
    pub hypothesis: String,
    pub reference: String,
    pub human_score: Option<f64>,
}

/// A named collection of items with unique segment ids, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    name: String,
    items: Vec<EvaluationItem>,
}

impl EvaluationSet {
    pub fn new(
        name: impl Into<String>,
        items: Vec<EvaluationItem>,
    ) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for item in &items {
            if !seen.insert(item.segment_id.as_str()) {
                return Err(DatasetError::DuplicateIdInSet {
                    id: item.segment_id.clone(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            items,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[EvaluationItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Parses a dataset stream. Every non-comment, non-blank line becomes an
/// item or an error; nothing is dropped silently.
pub fn read_tsv<R: BufRead>(
    reader: R,
    name: impl Into<String>,
) -> Result<EvaluationSet, DatasetError> {
    let mut items = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(DatasetError::ColumnCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let segment_id = fields[0].to_string();
        if !seen.insert(segment_id.clone()) {
            return Err(DatasetError::DuplicateId {
                line: line_no,
                id: segment_id,
            });
        }
        let human_score = match fields.get(3) {
            None => None,
            Some(raw) => {
                let value: f64 = raw.parse().map_err(|_| DatasetError::InvalidScore {
                    line: line_no,
                    value: raw.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(DatasetError::InvalidScore {
                        line: line_no,
                        value: raw.to_string(),
                    });
                }
                Some(value)
            }
        };
        items.push(EvaluationItem {
            segment_id,
            hypothesis: fields[1].to_string(),
            reference: fields[2].to_string(),
            human_score,
        });
    }

    Ok(EvaluationSet {
        name: name.into(),
        items,
    })
}

/// Writes one `segment_id<TAB>score` line per item, scores to six decimal
/// places, in item order.
pub fn write_scores<W: Write>(
    set: &EvaluationSet,
    scores: &[f64],
    mut w: W,
) -> Result<(), DatasetError> {
    if scores.len() != set.len() {
        return Err(DatasetError::LengthMismatch {
            scores: scores.len(),
            items: set.len(),
        });
    }
    for (item, score) in set.items().iter().zip(scores) {
        writeln!(w, "{}\t{score:.6}", item.segment_id)?;
    }
    Ok(())
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub metric: String,
    pub tau: f64,
}

/// Writes sweep results as CSV: a `threshold,metric,tau` header, thresholds
/// to two decimals, tau to four.
pub fn write_sweep<W: Write>(rows: &[SweepRow], mut w: W) -> Result<(), DatasetError> {
    writeln!(w, "threshold,metric,tau")?;
    for row in rows {
        writeln!(w, "{:.2},{},{:.4}", row.threshold, row.metric, row.tau)?;
    }
    Ok(())
}
