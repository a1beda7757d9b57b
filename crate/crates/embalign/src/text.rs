//! Splitting sentences into token segments.

/// How raw text is cut into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizePolicy {
    /// Split on Unicode whitespace only.
    Whitespace,
    /// Split on whitespace, then peel leading and trailing ASCII punctuation
    /// off each token into tokens of their own. Interior punctuation (as in
    /// "don't" or "U.S") stays attached.
    WhitespacePunct,
}

/// An ordered token sequence together with the text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    tokens: Vec<String>,
    source: String,
}

impl Segment {
    /// Builds a segment directly from tokens; the source text is their
    /// space-joined form. Intended for fixtures and tests.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        assert!(tokens.iter().all(|t| !t.is_empty()));
        let source = tokens.join(" ");
        Self { tokens, source }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn source_text(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenizes `text` under `policy`. Whitespace-only input yields an empty
/// segment; no case folding is applied.
pub fn tokenize(text: &str, policy: TokenizePolicy) -> Segment {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        match policy {
            TokenizePolicy::Whitespace => tokens.push(word.to_string()),
            TokenizePolicy::WhitespacePunct => split_punctuation(word, &mut tokens),
        }
    }
    Segment {
        tokens,
        source: text.to_string(),
    }
}

fn split_punctuation(word: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut start = 0;
    let mut end = chars.len();
    while start < end && chars[start].is_ascii_punctuation() {
        start += 1;
    }
    while end > start && chars[end - 1].is_ascii_punctuation() {
        end -= 1;
    }
    for c in &chars[..start] {
        out.push(c.to_string());
    }
    if start < end {
        out.push(chars[start..end].iter().collect());
    }
    for c in &chars[end..] {
        out.push(c.to_string());
    }
}
