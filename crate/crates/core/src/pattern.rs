//! Entailment-pattern extraction.
//!
//! Question phrases that take part in a referential equality become
//! placeholders `X1 … Xn`, numbered by order of appearance in the question.
//! In the selected sentence the matching mention receives the same
//! placeholder and every answer span becomes `ANSWER`. Implicit mentions have
//! no surface text, so their placeholder is inserted:
//!
//! * phrase-level: `"<anchor> <prep> Xk"` right after the anchor,
//! * sentence-level: `"<prep> Xk"` before the sentence-final punctuation,
//! * title links: `"(Xk)"` before the sentence-final punctuation.
//!
//! An explicit mention followed by a possessive `'s` absorbs the marker, and
//! possessive pronouns ("Its") are replaced whole; such slots are flagged.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ExplanationLabel, PassageMention, QedExample, TextSpan};
use crate::text::char_slice;

pub const ANSWER_TOKEN: &str = "ANSWER";

const POSSESSIVE_PRONOUNS: [&str; 8] = ["its", "his", "her", "their", "whose", "my", "your", "our"];

/// Per-placeholder bookkeeping, enough to undo the abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSlot {
    /// 1-based placeholder number (`X{index}`).
    pub index: usize,
    pub question_text: String,
    /// Mention kind as in the corpus schema.
    pub mention_kind: String,
    /// Replaced sentence text for explicit mentions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_text: Option<String>,
    /// Text inserted into the sentence for implicit mentions and title links.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inserted: Option<String>,
    /// Possessive suffix swallowed by the placeholder, e.g. `'s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absorbed: Option<String>,
    /// The mention was possessive (pronoun or `'s`) and was normalized.
    #[serde(default)]
    pub possessive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailmentPattern {
    pub question_template: String,
    pub sentence_template: String,
    pub slots: Vec<PatternSlot>,
    /// Answer span texts in sentence order, one per `ANSWER` occurrence.
    pub answers: Vec<String>,
}

impl EntailmentPattern {
    pub fn placeholder(index: usize) -> String {
        format!("X{index}")
    }

    /// True if any slot went through possessive normalization.
    pub fn possessive_normalized(&self) -> bool {
        self.slots.iter().any(|s| s.possessive)
    }

    /// Puts the abstracted texts back, returning `(question, sentence)`.
    ///
    /// Works on the rendered template strings, so it also serves as a check
    /// that every placeholder was rendered where expected.
    pub fn reinsert(&self) -> (String, String) {
        let mut question = self.question_template.clone();
        let mut sentence = self.sentence_template.clone();
        let mut slots: Vec<&PatternSlot> = self.slots.iter().collect();
        // X10 must be handled before X1.
        slots.sort_by_key(|s| std::cmp::Reverse(s.index));
        for slot in &slots {
            let ph = Self::placeholder(slot.index);
            question = replace_token(&question, &ph, &slot.question_text);
            if let Some(inserted) = &slot.inserted {
                sentence = sentence.replacen(inserted.as_str(), "", 1);
            }
            if let Some(text) = &slot.sentence_text {
                let restored = format!("{text}{}", slot.absorbed.as_deref().unwrap_or(""));
                sentence = replace_token(&sentence, &ph, &restored);
            }
        }
        for answer in &self.answers {
            sentence = sentence.replacen(ANSWER_TOKEN, answer, 1);
        }
        (question, sentence)
    }
}

/// Replaces the first occurrence of `token` that is not followed by a digit.
fn replace_token(haystack: &str, token: &str, with: &str) -> String {
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(token) {
        let at = from + pos;
        let after = haystack[at + token.len()..].chars().next();
        if !after.is_some_and(|c| c.is_ascii_digit()) {
            return format!("{}{}{}", &haystack[..at], with, &haystack[at + token.len()..]);
        }
        from = at + token.len();
    }
    haystack.to_owned()
}

enum Edit {
    Replace {
        start: usize,
        end: usize,
        with: String,
    },
    Insert {
        at: usize,
        text: String,
    },
}

impl Edit {
    fn position(&self) -> usize {
        match self {
            Edit::Replace { start, .. } => *start,
            Edit::Insert { at, .. } => *at,
        }
    }
}

/// Extracts the question and sentence templates of an explained example.
pub fn extract_pattern(example: &QedExample) -> Result<EntailmentPattern, Error> {
    let exp = match (&example.label, &example.explanation) {
        (ExplanationLabel::ValidExplanation, Some(e)) => e,
        _ => return Err(Error::NotExplained(example.id.clone())),
    };
    let sentence_span = exp.selected_sentence.span();
    let sentence = char_slice(&example.passage, sentence_span.start, sentence_span.end)
        .ok_or_else(|| Error::InvalidExample(format!("{}: selected sentence out of range", example.id)))?;
    let sentence_chars: Vec<char> = sentence.chars().collect();

    // Number equalities by the position of their question phrase.
    let mut order: Vec<usize> = (0..exp.equalities.len()).collect();
    order.sort_by_key(|&i| {
        let q = &exp.equalities[i].question_span;
        (q.start, q.end, i)
    });
    let question_spans: Vec<&TextSpan> =
        order.iter().map(|&i| &exp.equalities[i].question_span).collect();
    check_disjoint("question", &question_spans)?;

    let question_edits = question_spans
        .iter()
        .enumerate()
        .map(|(k, span)| Edit::Replace {
            start: span.start,
            end: span.end,
            with: EntailmentPattern::placeholder(k + 1),
        })
        .collect();
    let question_template = apply_edits(&example.question, question_edits);

    let relative = |span: &TextSpan, what: &str| -> Result<(usize, usize), Error> {
        if sentence_span.contains(span) {
            Ok((span.start - sentence_span.start, span.end - sentence_span.start))
        } else {
            Err(Error::InvalidExample(format!(
                "{}: {what} [{}, {}) outside the selected sentence",
                example.id, span.start, span.end
            )))
        }
    };
    let tail = sentence_tail(&sentence_chars);

    let mut replaced: Vec<(usize, usize)> = Vec::new();
    let mut edits = Vec::new();
    let mut slots = Vec::with_capacity(order.len());
    let mut inserts: Vec<(usize, usize, String)> = Vec::new();

    for (k, &i) in order.iter().enumerate() {
        let eq = &exp.equalities[i];
        let index = k + 1;
        let ph = EntailmentPattern::placeholder(index);
        let mut slot = PatternSlot {
            index,
            question_text: eq.question_span.text.clone(),
            mention_kind: eq.passage_mention.kind_name().to_owned(),
            sentence_text: None,
            inserted: None,
            absorbed: None,
            possessive: false,
        };
        match &eq.passage_mention {
            PassageMention::Explicit { span } => {
                let (start, mut end) = relative(span, "mention")?;
                let suffix = possessive_suffix(&sentence_chars, end);
                if let Some(s) = &suffix {
                    end += s.chars().count();
                    slot.possessive = true;
                }
                if POSSESSIVE_PRONOUNS.contains(&span.text.to_lowercase().as_str()) {
                    slot.possessive = true;
                }
                slot.sentence_text = Some(span.text.clone());
                slot.absorbed = suffix;
                replaced.push((start, end));
                edits.push(Edit::Replace { start, end, with: ph });
            }
            PassageMention::ImplicitPhrase { anchor, prep } => {
                let (_, end) = relative(anchor, "anchor")?;
                let text = format!(" {prep} {ph}");
                slot.inserted = Some(text.clone());
                inserts.push((end, index, text));
            }
            PassageMention::ImplicitSentence { prep } => {
                let text = format!(" {prep} {ph}");
                slot.inserted = Some(text.clone());
                inserts.push((tail, index, text));
            }
            PassageMention::TitleLink { .. } => {
                let text = format!(" ({ph})");
                slot.inserted = Some(text.clone());
                inserts.push((tail, index, text));
            }
        }
        slots.push(slot);
    }

    let mut answer_spans: Vec<(usize, usize, String)> = Vec::new();
    for a in &exp.answers {
        let (start, end) = relative(&a.answer_span, "answer")?;
        answer_spans.push((start, end, a.answer_span.text.clone()));
    }
    answer_spans.sort();
    for (start, end, _) in &answer_spans {
        replaced.push((*start, *end));
        edits.push(Edit::Replace {
            start: *start,
            end: *end,
            with: ANSWER_TOKEN.to_owned(),
        });
    }

    let sentence_offset = sentence_span.start;
    let mut sorted = replaced.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(overlap("sentence", sentence_offset, w[0], w[1]));
        }
    }
    for (at, _, _) in &inserts {
        if let Some(r) = replaced.iter().find(|r| r.0 < *at && *at < r.1) {
            return Err(overlap("sentence", sentence_offset, *r, (*at, *at)));
        }
    }

    inserts.sort_by_key(|(at, index, _)| (*at, *index));
    edits.extend(
        inserts
            .into_iter()
            .map(|(at, _, text)| Edit::Insert { at, text }),
    );
    let sentence_template = apply_edits(sentence, edits);

    Ok(EntailmentPattern {
        question_template,
        sentence_template,
        slots,
        answers: answer_spans.into_iter().map(|(_, _, t)| t).collect(),
    })
}

fn overlap(host: &'static str, offset: usize, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::OverlappingSpans {
        host,
        first_start: a.0 + offset,
        first_end: a.1 + offset,
        second_start: b.0 + offset,
        second_end: b.1 + offset,
    }
}

fn check_disjoint(host: &'static str, spans: &[&TextSpan]) -> Result<(), Error> {
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(overlap(host, 0, w[0].offsets(), w[1].offsets()));
        }
    }
    Ok(())
}

/// `'s` (straight or curly apostrophe) directly after `end`, ending a word.
fn possessive_suffix(chars: &[char], end: usize) -> Option<String> {
    let apostrophe = *chars.get(end)?;
    if !matches!(apostrophe, '\'' | '’') || !matches!(chars.get(end + 1), Some('s')) {
        return None;
    }
    if chars.get(end + 2).is_some_and(|c| c.is_alphanumeric()) {
        return None;
    }
    Some(format!("{apostrophe}s"))
}

/// Offset where sentence-final material (terminal punctuation, closing
/// quotes, trailing whitespace) begins.
fn sentence_tail(chars: &[char]) -> usize {
    let mut i = chars.len();
    while i > 0 && chars[i - 1].is_whitespace() {
        i -= 1;
    }
    let mut j = i;
    while j > 0 && matches!(chars[j - 1], '"' | '”' | '’' | '\'' | ')' | ']') {
        j -= 1;
    }
    if j > 0 && matches!(chars[j - 1], '.' | '!' | '?') {
        while j > 0 && matches!(chars[j - 1], '.' | '!' | '?') {
            j -= 1;
        }
        j
    } else {
        i
    }
}

/// Applies non-overlapping edits given in code-point offsets. Insertions at
/// the same offset keep their relative order, go after a replacement that
/// ends there and before one that starts there.
fn apply_edits(text: &str, mut edits: Vec<Edit>) -> String {
    let chars: Vec<char> = text.chars().collect();
    edits.sort_by_key(|e| (e.position(), matches!(e, Edit::Replace { .. })));
    let mut out = String::with_capacity(text.len() + 16);
    let mut cursor = 0;
    for edit in edits {
        match edit {
            Edit::Replace { start, end, with } => {
                out.extend(&chars[cursor..start]);
                out.push_str(&with);
                cursor = end;
            }
            Edit::Insert { at, text } => {
                if at > cursor {
                    out.extend(&chars[cursor..at]);
                    cursor = at;
                }
                out.push_str(&text);
            }
        }
    }
    out.extend(&chars[cursor..]);
    out
}
