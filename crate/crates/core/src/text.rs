//! Text utilities shared across the crate: normalization for string
//! comparison, code-point slicing, and a whitespace/punctuation tokenizer.

use unicode_normalization::UnicodeNormalization;

/// Normalizes a surface string for comparison.
///
/// Applies canonical composition (NFC), lower-cases, collapses every run of
/// whitespace to a single space and trims both ends.
///
/// ```
/// assert_eq!(qed_core::normalize_text("  The   Big\tHouse "), "the big house");
/// ```
pub fn normalize_text(s: &str) -> String {
    let composed: String = s.nfc().collect();
    let lowered = composed.to_lowercase();
    // Lower-casing can produce decomposed sequences for a handful of code
    // points, so compose again before collapsing whitespace.
    let recomposed: String = lowered.nfc().collect();
    recomposed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slices `host` by code-point offsets `[start, end)`.
///
/// Returns `None` when the range is empty, inverted or out of bounds.
pub fn char_slice(host: &str, start: usize, end: usize) -> Option<&str> {
    if start >= end {
        return None;
    }
    let mut indices = host.char_indices().map(|(i, _)| i).chain(std::iter::once(host.len()));
    let begin = indices.nth(start)?;
    let finish = indices.nth(end - start - 1)?;
    Some(&host[begin..finish])
}

/// A whitespace-delimited word with surrounding punctuation stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Splits `s` into words on whitespace, trimming leading and trailing
/// non-alphanumeric characters from each word. Offsets are code points.
/// Internal punctuation is kept, so `107,601.` yields `107,601`.
pub fn tokenize(s: &str) -> Vec<Token> {
    let chars: Vec<char> = s.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let word_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let mut start = word_start;
        let mut end = i;
        while start < end && !chars[start].is_alphanumeric() {
            start += 1;
        }
        while end > start && !chars[end - 1].is_alphanumeric() {
            end -= 1;
        }
        if start < end {
            tokens.push(Token {
                start,
                end,
                text: chars[start..end].iter().collect(),
            });
        }
    }
    tokens
}

/// Rule-based sentence splitter returning code-point spans that cover the
/// passage up to inter-sentence whitespace. A sentence ends at `.`, `!` or
/// `?` (optionally followed by closing quotes or brackets) when the next
/// character is whitespace.
pub fn split_sentences(passage: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = passage.chars().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        if i == chars.len() {
            break;
        }
        let start = i;
        let mut end = chars.len();
        while i < chars.len() {
            if matches!(chars[i], '.' | '!' | '?') {
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j], '"' | '\'' | '”' | '’' | ')' | ']') {
                    j += 1;
                }
                if j == chars.len() || chars[j].is_whitespace() {
                    end = j;
                    break;
                }
            }
            i += 1;
        }
        let mut trimmed = end.min(chars.len());
        while trimmed > start && chars[trimmed - 1].is_whitespace() {
            trimmed -= 1;
        }
        spans.push((start, trimmed));
        i = end;
    }
    spans
}
