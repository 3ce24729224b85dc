//! Domain types for QED annotations.
//!
//! An [`Explanation`] is the triple of a selected sentence, a list of
//! referential equalities linking question phrases to passage mentions, and
//! one or more answer annotations. All offsets are code-point based and every
//! span carries its surface text so integrity can be checked against the host
//! string.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::text::char_slice;

/// Half-open `[start, end)` range of code points plus the cached surface text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TextSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl TextSpan {
    pub fn new(start: usize, end: usize, text: impl Into<String>) -> Self {
        Self {
            start,
            end,
            text: text.into(),
        }
    }

    /// Builds a span by slicing `host`; `None` if the range is not a
    /// non-empty in-bounds range.
    pub fn from_host(host: &str, start: usize, end: usize) -> Option<Self> {
        char_slice(host, start, end).map(|t| Self::new(start, end, t))
    }

    /// Locates the `nth` occurrence (0-based) of `needle` in `host`.
    pub fn find(host: &str, needle: &str, nth: usize) -> Option<Self> {
        let (byte_idx, _) = host.match_indices(needle).nth(nth)?;
        let start = host[..byte_idx].chars().count();
        let end = start + needle.chars().count();
        Some(Self::new(start, end, needle))
    }

    pub fn offsets(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// True if `other` lies entirely inside `self`.
    pub fn contains(&self, other: &TextSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &TextSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Re-derives `text` from `host` when it is missing. Out-of-range spans
    /// are left untouched for the validator to report.
    pub(crate) fn hydrate(&mut self, host: &str) {
        if self.text.is_empty() {
            if let Some(t) = char_slice(host, self.start, self.end) {
                self.text = t.to_owned();
            }
        }
    }
}

impl Serialize for TextSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(3)?;
        tup.serialize_element(&self.start)?;
        tup.serialize_element(&self.end)?;
        tup.serialize_element(&self.text)?;
        tup.end()
    }
}

impl<'de> Deserialize<'de> for TextSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SpanVisitor;

        impl<'de> Visitor<'de> for SpanVisitor {
            type Value = TextSpan;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a span [start, end] or [start, end, text]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<TextSpan, A::Error> {
                let start = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let end = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let text: Option<String> = seq.next_element()?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(4, &self));
                }
                Ok(TextSpan::new(start, end, text.unwrap_or_default()))
            }
        }

        deserializer.deserialize_seq(SpanVisitor)
    }
}

/// The sentence selected by the annotator; its offsets must coincide with
/// one of the example's sentence boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentenceSpan(pub TextSpan);

impl SentenceSpan {
    pub fn span(&self) -> &TextSpan {
        &self.0
    }
}

/// Prepositions accepted for implicit (bridging) mentions unless a validator
/// is configured with a different vocabulary.
pub const DEFAULT_PREPOSITIONS: [&str; 10] = [
    "of", "in", "at", "on", "by", "for", "from", "to", "with", "during",
];

/// A preposition attached to an implicit mention. Membership in the
/// vocabulary is checked by the validator, not at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Preposition(pub String);

impl Preposition {
    pub fn new(p: impl Into<String>) -> Self {
        Self(p.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Preposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The passage side of a referential equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PassageMention {
    /// A phrase inside the selected sentence.
    Explicit { span: TextSpan },
    /// An implicit noun phrase modifying `anchor` through `prep`,
    /// e.g. "the winner [of X]".
    ImplicitPhrase { anchor: TextSpan, prep: Preposition },
    /// An implicit noun phrase modifying the whole sentence through `prep`.
    ImplicitSentence { prep: Preposition },
    /// A span of the page title. Produced by models that route implicit
    /// arguments to the title.
    #[serde(rename = "title")]
    TitleLink { span: TextSpan },
}

impl PassageMention {
    pub fn explicit(span: TextSpan) -> Self {
        Self::Explicit { span }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, Self::ImplicitPhrase { .. } | Self::ImplicitSentence { .. })
    }

    /// Surface text of the mention, if it has one in the passage or title.
    pub fn surface(&self) -> Option<&str> {
        match self {
            Self::Explicit { span } | Self::TitleLink { span } => Some(&span.text),
            Self::ImplicitPhrase { .. } | Self::ImplicitSentence { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Explicit { .. } => "explicit",
            Self::ImplicitPhrase { .. } => "implicit_phrase",
            Self::ImplicitSentence { .. } => "implicit_sentence",
            Self::TitleLink { .. } => "title",
        }
    }
}

/// A question phrase and a passage mention that refer to the same entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReferentialEquality {
    #[serde(rename = "question")]
    pub question_span: TextSpan,
    #[serde(rename = "mention")]
    pub passage_mention: PassageMention,
}

impl ReferentialEquality {
    pub fn new(question_span: TextSpan, passage_mention: PassageMention) -> Self {
        Self {
            question_span,
            passage_mention,
        }
    }
}

/// An answer span inside the selected sentence together with the phrase it
/// resolves to once coreference is taken into account.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AnswerAnnotation {
    #[serde(rename = "span")]
    pub answer_span: TextSpan,
    #[serde(rename = "resolved")]
    pub resolved_span: TextSpan,
}

impl AnswerAnnotation {
    /// An answer that needs no coreference resolution.
    pub fn direct(span: TextSpan) -> Self {
        Self {
            resolved_span: span.clone(),
            answer_span: span,
        }
    }

    pub fn resolved(answer_span: TextSpan, resolved_span: TextSpan) -> Self {
        Self {
            answer_span,
            resolved_span,
        }
    }
}

impl<'de> Deserialize<'de> for AnswerAnnotation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            span: TextSpan,
            resolved: Option<TextSpan>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Ok(match raw.resolved {
            Some(resolved) => AnswerAnnotation::resolved(raw.span, resolved),
            None => AnswerAnnotation::direct(raw.span),
        })
    }
}

/// The ⟨sentence, equalities, answers⟩ triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    #[serde(rename = "sentence")]
    pub selected_sentence: SentenceSpan,
    #[serde(default)]
    pub equalities: Vec<ReferentialEquality>,
    #[serde(default)]
    pub answers: Vec<AnswerAnnotation>,
}

/// Annotator judgment of whether an example admits a single-sentence
/// explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationLabel {
    /// Category 1: an answer exists and a valid explanation exists for it.
    ValidExplanation,
    /// Category 2: an answer exists but no single-sentence explanation.
    AnswerOnly,
    /// Category 3: the passage holds no valid answer.
    NoAnswer,
}

impl ExplanationLabel {
    pub const ALL: [ExplanationLabel; 3] = [
        ExplanationLabel::ValidExplanation,
        ExplanationLabel::AnswerOnly,
        ExplanationLabel::NoAnswer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ValidExplanation => "valid_explanation",
            Self::AnswerOnly => "answer_only",
            Self::NoAnswer => "no_answer",
        }
    }

    /// Numeric category (1, 2 or 3).
    pub fn category(self) -> u8 {
        match self {
            Self::ValidExplanation => 1,
            Self::AnswerOnly => 2,
            Self::NoAnswer => 3,
        }
    }
}

impl fmt::Display for ExplanationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One question/passage instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QedExample {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub question: String,
    pub passage: String,
    #[serde(default)]
    pub sentence_boundaries: Vec<TextSpan>,
    pub label: ExplanationLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<Explanation>,
    /// Answer spans for examples labelled `answer_only`, which have an
    /// answer but no explanation to carry it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub answers: Vec<AnswerAnnotation>,
}

impl QedExample {
    /// Answer annotations regardless of where they are stored.
    pub fn answer_annotations(&self) -> &[AnswerAnnotation] {
        match &self.explanation {
            Some(e) if !e.answers.is_empty() => &e.answers,
            _ => &self.answers,
        }
    }

    /// Index of the sentence boundary containing `span`, if any.
    pub fn sentence_index_of(&self, span: &TextSpan) -> Option<usize> {
        self.sentence_boundaries.iter().position(|b| b.contains(span))
    }

    /// Fills in missing cached span texts from the host strings.
    pub fn hydrate(&mut self) {
        for b in &mut self.sentence_boundaries {
            b.hydrate(&self.passage);
        }
        for a in &mut self.answers {
            a.answer_span.hydrate(&self.passage);
            a.resolved_span.hydrate(&self.passage);
        }
        if let Some(e) = &mut self.explanation {
            e.hydrate(&self.question, &self.passage, &self.title);
        }
    }
}

impl Explanation {
    pub(crate) fn hydrate(&mut self, question: &str, passage: &str, title: &str) {
        self.selected_sentence.0.hydrate(passage);
        for eq in &mut self.equalities {
            eq.question_span.hydrate(question);
            match &mut eq.passage_mention {
                PassageMention::Explicit { span } => span.hydrate(passage),
                PassageMention::ImplicitPhrase { anchor, .. } => anchor.hydrate(passage),
                PassageMention::ImplicitSentence { .. } => {}
                PassageMention::TitleLink { span } => span.hydrate(title),
            }
        }
        for a in &mut self.answers {
            a.answer_span.hydrate(passage);
            a.resolved_span.hydrate(passage);
        }
    }
}

/// Returns the resolved answer text for each answer annotation, in order.
pub fn resolve_answer(example: &QedExample) -> Result<Vec<String>, Error> {
    match (&example.label, &example.explanation) {
        (ExplanationLabel::ValidExplanation, Some(exp)) => Ok(exp
            .answers
            .iter()
            .map(|a| a.resolved_span.text.clone())
            .collect()),
        _ => Err(Error::NotExplained(example.id.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn span_find_and_contains() {
        let host = "Simona Halep is a female tennis player. She won Wimbledon in 2019.";
        let she = TextSpan::find(host, "She", 0).unwrap();
        assert_eq!((she.start, she.end), (40, 43));
        let sentence = TextSpan::find(host, "She won Wimbledon in 2019.", 0).unwrap();
        assert!(sentence.contains(&she));
        assert!(!she.contains(&sentence));
        assert!(she.overlaps(&sentence));
    }

    #[test]
    fn span_serde_accepts_both_arities() {
        let a: TextSpan = serde_json::from_str("[3, 7]").unwrap();
        assert_eq!(a, TextSpan::new(3, 7, ""));
        let b: TextSpan = serde_json::from_str(r#"[3, 7, "abcd"]"#).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"[3,7,"abcd"]"#);
        assert!(serde_json::from_str::<TextSpan>("[3]").is_err());
        assert!(serde_json::from_str::<TextSpan>(r#"[3,4,"x",5]"#).is_err());
    }

    #[test]
    fn resolve_wimbledon() {
        assert_eq!(resolve_answer(&samples::wimbledon()).unwrap(), ["Simona Halep"]);
    }

    #[test]
    fn resolve_michigan() {
        assert_eq!(resolve_answer(&samples::michigan()).unwrap(), ["107,601"]);
    }

    #[test]
    fn resolve_keeps_answer_order() {
        let mut ex = samples::wimbledon();
        let exp = ex.explanation.as_mut().unwrap();
        let year = TextSpan::find(&ex.passage, "2019", 0).unwrap();
        exp.answers.push(AnswerAnnotation::direct(year));
        assert_eq!(resolve_answer(&ex).unwrap(), ["Simona Halep", "2019"]);
    }

    #[test]
    fn resolve_rejects_unexplained() {
        let mut ex = samples::wimbledon();
        ex.label = ExplanationLabel::AnswerOnly;
        let err = resolve_answer(&ex).unwrap_err();
        assert_eq!(err.code(), "NOT_EXPLAINED");
    }

    #[test]
    fn mention_wire_format() {
        let m = PassageMention::ImplicitSentence {
            prep: Preposition::new("at"),
        };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"kind":"implicit_sentence","prep":"at"}"#
        );
        let t: PassageMention =
            serde_json::from_str(r#"{"kind":"title","span":[0,4]}"#).unwrap();
        assert_eq!(t.kind_name(), "title");
    }
}
