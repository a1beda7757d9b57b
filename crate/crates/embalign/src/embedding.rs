//! Word embedding storage with word2vec text/binary readers and cosine
//! similarity.
//!
//! Vectors are widened to `f64` on load and kept that way throughout; the
//! Euclidean norm of every vector is computed once at insertion so repeated
//! cosine evaluations only pay for the dot product.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding source contains no vectors")]
    Empty,
    #[error("invalid header line: {0}")]
    Header(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unexpected end of stream in record {record}")]
    Truncated { record: usize },
    #[error("token in record {record} is not valid UTF-8")]
    TokenEncoding { record: usize },
    #[error("vector for {token:?} has {found} components, expected {expected}")]
    WrongDimension {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error("vector for {token:?} has a non-finite component")]
    NonFinite { token: String },
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single embedding vector with its cached Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector {
    components: Vec<f64>,
    norm: f64,
}

impl WordVector {
    pub fn new(components: Vec<f64>) -> Self {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self { components, norm }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Cosine similarity between two vectors, clamped to `[-1, 1]`.
///
/// If either vector has zero norm the similarity is 0: there is no direction
/// to compare against, and 0 keeps downstream averages well defined.
pub fn cosine(u: &WordVector, v: &WordVector) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    if u.norm == 0.0 || v.norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = u
        .components
        .iter()
        .zip(&v.components)
        .map(|(a, b)| a * b)
        .sum();
    (dot / (u.norm * v.norm)).clamp(-1.0, 1.0)
}

/// In-memory token-to-vector map with a fixed dimension.
///
/// Insertion order is preserved, so iteration and serialization are
/// deterministic. Duplicate tokens keep their first vector; the number of
/// duplicates seen is tracked for reporting.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    vectors: Vec<WordVector>,
    duplicates: usize,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self, EmbeddingError> {
        if dimension == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self {
            dimension,
            index: HashMap::new(),
            tokens: Vec::new(),
            vectors: Vec::new(),
            duplicates: 0,
        })
    }

    /// Adds a vector, returning `false` when the token was already present
    /// (the earlier vector wins and the duplicate counter is bumped).
    pub fn insert(&mut self, token: &str, components: Vec<f64>) -> Result<bool, EmbeddingError> {
        if components.len() != self.dimension {
            return Err(EmbeddingError::WrongDimension {
                token: token.to_string(),
                expected: self.dimension,
                found: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                token: token.to_string(),
            });
        }
        if self.index.contains_key(token) {
            self.duplicates += 1;
            return Ok(false);
        }
        self.index.insert(token.to_string(), self.vectors.len());
        self.tokens.push(token.to_string());
        self.vectors.push(WordVector::new(components));
        Ok(true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Number of duplicate tokens skipped during inserts.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Looks a token up by exact surface form, optionally retrying with the
    /// lowercased form when the exact form is absent.
    pub fn lookup(&self, token: &str, fallback_lowercase: bool) -> Option<&WordVector> {
        if let Some(&i) = self.index.get(token) {
            return Some(&self.vectors[i]);
        }
        if fallback_lowercase {
            if let Some(&i) = self.index.get(&token.to_lowercase()) {
                return Some(&self.vectors[i]);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WordVector)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter())
    }
}

/// Reads the text format: an optional `"<count> <dimension>"` header line,
/// then one `token v1 .. vD` line per vector.
pub fn load_text_format<R: BufRead>(reader: R) -> Result<EmbeddingTable, EmbeddingError> {
    load_text_filtered(reader, None)
}

/// Text-format reader restricted to a token set.
///
/// Rows outside `vocab` are still checked structurally (token present,
/// component count) but their components are not parsed, which is what makes
/// loading a multi-gigabyte model for a small dataset affordable.
///
/// A first line consisting of exactly two unsigned integers is taken to be
/// the header; a one-dimensional row whose token also looks like an integer
/// is therefore misread, which matches how word2vec tools treat the format.
pub fn load_text_filtered<R: BufRead>(
    reader: R,
    vocab: Option<&HashSet<String>>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let mut table: Option<EmbeddingTable> = None;
    let mut declared_dim: Option<usize> = None;
    let mut saw_row = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();

        if idx == 0 && fields.len() == 2 {
            if let (Ok(_count), Ok(dim)) =
                (fields[0].parse::<usize>(), fields[1].parse::<usize>())
            {
                if dim == 0 {
                    return Err(EmbeddingError::ZeroDimension);
                }
                declared_dim = Some(dim);
                continue;
            }
        }

        if fields.is_empty() {
            return Err(EmbeddingError::Parse {
                line: line_no,
                message: "blank line in vector data".to_string(),
            });
        }
        let token = fields[0];
        let components = &fields[1..];

        let dim = match declared_dim {
            Some(d) => d,
            None => {
                if components.is_empty() {
                    return Err(EmbeddingError::Parse {
                        line: line_no,
                        message: format!("row for {token:?} has no components"),
                    });
                }
                declared_dim = Some(components.len());
                components.len()
            }
        };
        if components.len() != dim {
            return Err(EmbeddingError::Parse {
                line: line_no,
                message: format!(
                    "expected {dim} components, found {} for {token:?}",
                    components.len()
                ),
            });
        }
        saw_row = true;
        if table.is_none() {
            table = Some(EmbeddingTable::new(dim)?);
        }

        if vocab.is_none_or(|v| v.contains(token)) {
            let mut values = Vec::with_capacity(dim);
            for raw in components {
                let value: f64 = raw.parse().map_err(|_| EmbeddingError::Parse {
                    line: line_no,
                    message: format!("invalid component {raw:?}"),
                })?;
                if !value.is_finite() {
                    return Err(EmbeddingError::Parse {
                        line: line_no,
                        message: format!("non-finite component {raw:?}"),
                    });
                }
                values.push(value);
            }
            table
                .as_mut()
                .expect("created above")
                .insert(token, values)?;
        }
    }

    if !saw_row {
        return Err(EmbeddingError::Empty);
    }
    Ok(table.expect("table exists once a row was seen"))
}

/// Reads the binary format: an ASCII `"<count> <dimension>\n"` header, then
/// per record the token bytes, a single space, and `dimension` little-endian
/// `f32` values, optionally followed by a newline.
pub fn load_binary_format<R: BufRead>(reader: R) -> Result<EmbeddingTable, EmbeddingError> {
    load_binary_filtered(reader, None)
}

/// Binary-format reader restricted to a token set. Every record is still
/// consumed (the format is positional) but filtered-out vectors skip the
/// float conversion.
pub fn load_binary_filtered<R: BufRead>(
    mut reader: R,
    vocab: Option<&HashSet<String>>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.is_empty() {
        return Err(EmbeddingError::Empty);
    }
    let header_text = String::from_utf8(header)
        .map_err(|_| EmbeddingError::Header("not valid UTF-8".to_string()))?;
    let fields: Vec<&str> = header_text.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(EmbeddingError::Header(header_text.trim_end().to_string()));
    }
    let count: usize = fields[0]
        .parse()
        .map_err(|_| EmbeddingError::Header(header_text.trim_end().to_string()))?;
    let dim: usize = fields[1]
        .parse()
        .map_err(|_| EmbeddingError::Header(header_text.trim_end().to_string()))?;
    if dim == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    if count == 0 {
        return Err(EmbeddingError::Empty);
    }

    let mut table = EmbeddingTable::new(dim)?;
    let mut raw = vec![0u8; 4 * dim];
    for record in 0..count {
        let mut token_bytes = Vec::new();
        reader.read_until(b' ', &mut token_bytes)?;
        if token_bytes.last() != Some(&b' ') {
            return Err(EmbeddingError::Truncated { record });
        }
        token_bytes.pop();
        // A record may end with '\n'; it shows up as a prefix of the next token.
        while token_bytes.first() == Some(&b'\n') {
            token_bytes.remove(0);
        }
        let token = String::from_utf8(token_bytes)
            .map_err(|_| EmbeddingError::TokenEncoding { record })?;
        if token.is_empty() {
            return Err(EmbeddingError::TokenEncoding { record });
        }

        reader
            .read_exact(&mut raw)
            .map_err(|_| EmbeddingError::Truncated { record })?;
        if vocab.is_none_or(|v| v.contains(&token)) {
            let values: Vec<f64> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            table.insert(&token, values)?;
        }
    }
    Ok(table)
}

/// Writes the text format with a header line. Components are printed with
/// the shortest representation that round-trips through `f64`.
pub fn write_text_format<W: Write>(table: &EmbeddingTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dimension())?;
    for (token, vector) in table.iter() {
        write!(w, "{token}")?;
        for c in vector.components() {
            write!(w, " {c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes the binary format. Components are narrowed to `f32`, so values
/// that did not come from a binary file lose precision here.
pub fn write_binary_format<W: Write>(table: &EmbeddingTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dimension())?;
    for (token, vector) in table.iter() {
        w.write_all(token.as_bytes())?;
        w.write_all(b" ")?;
        for c in vector.components() {
            w.write_all(&(*c as f32).to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}
