//! Structural validation of [`QedExample`]s.
//!
//! Violations are data: the validator never fails, it returns every broken
//! invariant with a stable code and a location. Each span is checked in a
//! fixed order (well-formed, in bounds, cached text, containment) and only
//! the first failing check is reported for it, so a single corruption yields
//! a single violation.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    ExplanationLabel, PassageMention, QedExample, TextSpan, DEFAULT_PREPOSITIONS,
};
use crate::text::{char_len, char_slice};

/// Stable violation codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyId,
    InvalidSpan,
    SpanOutOfBounds,
    SpanTextMismatch,
    BoundaryOverlap,
    BoundaryGap,
    SentenceNotABoundary,
    SpanOutOfSentence,
    UnknownPreposition,
    TitleLinkInGold,
    MissingExplanation,
    UnexpectedExplanation,
    UnexpectedAnswer,
    MissingAnswer,
    DuplicateEquality,
    DuplicateId,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EmptyId => "EMPTY_ID",
            Self::InvalidSpan => "INVALID_SPAN",
            Self::SpanOutOfBounds => "SPAN_OUT_OF_BOUNDS",
            Self::SpanTextMismatch => "SPAN_TEXT_MISMATCH",
            Self::BoundaryOverlap => "BOUNDARY_OVERLAP",
            Self::BoundaryGap => "BOUNDARY_GAP",
            Self::SentenceNotABoundary => "SENTENCE_NOT_A_BOUNDARY",
            Self::SpanOutOfSentence => "SPAN_OUT_OF_SENTENCE",
            Self::UnknownPreposition => "UNKNOWN_PREPOSITION",
            Self::TitleLinkInGold => "TITLE_LINK_IN_GOLD",
            Self::MissingExplanation => "MISSING_EXPLANATION",
            Self::UnexpectedExplanation => "UNEXPECTED_EXPLANATION",
            Self::UnexpectedAnswer => "UNEXPECTED_ANSWER",
            Self::MissingAnswer => "MISSING_ANSWER",
            Self::DuplicateEquality => "DUPLICATE_EQUALITY",
            Self::DuplicateId => "DUPLICATE_ID",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    /// Dotted field path, e.g. `explanation.equalities[0].question`.
    pub field: String,
    /// Code-point offset the violation refers to, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code, self.field)?;
        if let Some(o) = self.offset {
            write!(f, "@{o}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// All violations found in one example, sorted by field then offset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// No violations at all, warnings included.
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// No error-level violations.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

/// Whether the example comes from a gold corpus or from system output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Gold,
    Prediction,
}

#[derive(Debug, Clone)]
pub struct Validator {
    prepositions: BTreeSet<String>,
    mode: ValidationMode,
}

impl Default for Validator {
    fn default() -> Self {
        Self {
            prepositions: DEFAULT_PREPOSITIONS.iter().map(|p| p.to_string()).collect(),
            mode: ValidationMode::Gold,
        }
    }
}

/// Validates an example with the default vocabulary in gold mode.
pub fn validate_example(example: &QedExample) -> ValidationReport {
    Validator::default().validate(example)
}

impl Validator {
    pub fn new(mode: ValidationMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    /// Adds extra prepositions to the accepted vocabulary.
    pub fn with_prepositions<I, S>(mut self, extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.prepositions.extend(extra.into_iter().map(Into::into));
        self
    }

    pub fn prepositions(&self) -> impl Iterator<Item = &str> {
        self.prepositions.iter().map(String::as_str)
    }

    pub fn validate(&self, ex: &QedExample) -> ValidationReport {
        let mut ck = Checker {
            out: Vec::new(),
            validator: self,
        };
        ck.example(ex);
        let mut violations = ck.out;
        violations.sort_by(|a, b| {
            (&a.field, a.offset, a.code).cmp(&(&b.field, b.offset, b.code))
        });
        ValidationReport { violations }
    }

    /// Validates every example and additionally reports duplicate ids.
    /// Returned reports are keyed by position in `examples`.
    pub fn validate_corpus<'a, I>(&self, examples: I) -> Vec<(usize, ValidationReport)>
    where
        I: IntoIterator<Item = &'a QedExample>,
    {
        let mut seen = HashSet::new();
        examples
            .into_iter()
            .enumerate()
            .map(|(i, ex)| {
                let mut report = self.validate(ex);
                if !seen.insert(ex.id.as_str()) {
                    report.violations.insert(
                        0,
                        Violation {
                            code: ViolationCode::DuplicateId,
                            severity: Severity::Error,
                            field: "id".into(),
                            offset: None,
                            message: format!("id {:?} already used", ex.id),
                        },
                    );
                }
                (i, report)
            })
            .collect()
    }
}

struct Checker<'v> {
    out: Vec<Violation>,
    validator: &'v Validator,
}

impl Checker<'_> {
    fn push(&mut self, code: ViolationCode, field: &str, offset: Option<usize>, message: String) {
        let severity = match code {
            ViolationCode::TitleLinkInGold => Severity::Warning,
            _ => Severity::Error,
        };
        self.out.push(Violation {
            code,
            severity,
            field: field.to_owned(),
            offset,
            message,
        });
    }

    /// Checks that `span` is a non-empty in-bounds range of `host` whose
    /// cached text matches. Returns whether the span is sound.
    fn span(&mut self, host: &str, host_name: &str, span: &TextSpan, field: &str) -> bool {
        if span.start >= span.end {
            self.push(
                ViolationCode::InvalidSpan,
                field,
                Some(span.start),
                format!("empty or inverted span [{}, {})", span.start, span.end),
            );
            return false;
        }
        let len = char_len(host);
        if span.end > len {
            self.push(
                ViolationCode::SpanOutOfBounds,
                field,
                Some(span.start),
                format!("span [{}, {}) exceeds {host_name} length {len}", span.start, span.end),
            );
            return false;
        }
        let actual = char_slice(host, span.start, span.end).unwrap_or_default();
        if actual != span.text {
            self.push(
                ViolationCode::SpanTextMismatch,
                field,
                Some(span.start),
                format!("cached text {:?} but {host_name} has {actual:?}", span.text),
            );
            return false;
        }
        true
    }

    fn inside_sentence(&mut self, sentence: Option<&TextSpan>, span: &TextSpan, field: &str) {
        if let Some(s) = sentence {
            if !s.contains(span) {
                self.push(
                    ViolationCode::SpanOutOfSentence,
                    field,
                    Some(span.start),
                    format!(
                        "span [{}, {}) outside selected sentence [{}, {})",
                        span.start, span.end, s.start, s.end
                    ),
                );
            }
        }
    }

    fn preposition(&mut self, prep: &str, field: &str) {
        if !self.validator.prepositions.contains(prep) {
            self.push(
                ViolationCode::UnknownPreposition,
                field,
                None,
                format!("{prep:?} is not in the preposition vocabulary"),
            );
        }
    }

    fn boundaries(&mut self, ex: &QedExample) {
        let passage: Vec<char> = ex.passage.chars().collect();
        let blank = |from: usize, to: usize| {
            passage
                .get(from..to.min(passage.len()))
                .is_none_or(|s| s.iter().all(|c| c.is_whitespace()))
        };
        let mut cursor = 0usize;
        for (i, b) in ex.sentence_boundaries.iter().enumerate() {
            let field = format!("sentence_boundaries[{i}]");
            if !self.span(&ex.passage, "passage", b, &field) {
                continue;
            }
            if b.start < cursor {
                self.push(
                    ViolationCode::BoundaryOverlap,
                    &field,
                    Some(b.start),
                    format!("sentence starts at {} before previous end {cursor}", b.start),
                );
            } else if !blank(cursor, b.start) {
                self.push(
                    ViolationCode::BoundaryGap,
                    &field,
                    Some(cursor),
                    format!("non-whitespace text in [{cursor}, {}) is not covered", b.start),
                );
            }
            cursor = cursor.max(b.end);
        }
        if !blank(cursor, passage.len()) {
            self.push(
                ViolationCode::BoundaryGap,
                "sentence_boundaries",
                Some(cursor),
                format!("non-whitespace text after offset {cursor} is not covered"),
            );
        }
    }

    fn example(&mut self, ex: &QedExample) {
        if ex.id.trim().is_empty() {
            self.push(ViolationCode::EmptyId, "id", None, "id is empty".into());
        }
        self.boundaries(ex);

        match (ex.label, &ex.explanation) {
            (ExplanationLabel::ValidExplanation, None) => self.push(
                ViolationCode::MissingExplanation,
                "explanation",
                None,
                "label valid_explanation requires an explanation".into(),
            ),
            (label, Some(_)) if label != ExplanationLabel::ValidExplanation => self.push(
                ViolationCode::UnexpectedExplanation,
                "explanation",
                None,
                format!("label {label} must not carry an explanation"),
            ),
            _ => {}
        }
        if !ex.answers.is_empty() && ex.label != ExplanationLabel::AnswerOnly {
            self.push(
                ViolationCode::UnexpectedAnswer,
                "answers",
                None,
                format!("top-level answers are only allowed with label answer_only, not {}", ex.label),
            );
        }
        for (i, a) in ex.answers.iter().enumerate() {
            self.span(&ex.passage, "passage", &a.answer_span, &format!("answers[{i}].span"));
            self.span(&ex.passage, "passage", &a.resolved_span, &format!("answers[{i}].resolved"));
        }

        let Some(exp) = &ex.explanation else { return };

        let sentence_span = exp.selected_sentence.span();
        let sentence = if self.span(&ex.passage, "passage", sentence_span, "explanation.sentence") {
            if !ex
                .sentence_boundaries
                .iter()
                .any(|b| b.offsets() == sentence_span.offsets())
            {
                self.push(
                    ViolationCode::SentenceNotABoundary,
                    "explanation.sentence",
                    Some(sentence_span.start),
                    "selected sentence does not match any sentence boundary".into(),
                );
            }
            Some(sentence_span)
        } else {
            None
        };

        let mut seen = HashSet::new();
        for (i, eq) in exp.equalities.iter().enumerate() {
            let base = format!("explanation.equalities[{i}]");
            self.span(&ex.question, "question", &eq.question_span, &format!("{base}.question"));
            let mention_field = format!("{base}.mention");
            match &eq.passage_mention {
                PassageMention::Explicit { span } => {
                    if self.span(&ex.passage, "passage", span, &mention_field) {
                        self.inside_sentence(sentence, span, &mention_field);
                    }
                }
                PassageMention::ImplicitPhrase { anchor, prep } => {
                    if self.span(&ex.passage, "passage", anchor, &mention_field) {
                        self.inside_sentence(sentence, anchor, &mention_field);
                    }
                    self.preposition(prep.as_str(), &format!("{mention_field}.prep"));
                }
                PassageMention::ImplicitSentence { prep } => {
                    self.preposition(prep.as_str(), &format!("{mention_field}.prep"));
                }
                PassageMention::TitleLink { span } => {
                    if self.span(&ex.title, "title", span, &mention_field)
                        && self.validator.mode == ValidationMode::Gold
                    {
                        self.push(
                            ViolationCode::TitleLinkInGold,
                            &mention_field,
                            Some(span.start),
                            "title links are a model convention; gold data should use implicit mentions".into(),
                        );
                    }
                }
            }
            let key = (eq.question_span.offsets(), mention_identity(&eq.passage_mention));
            if !seen.insert(key) {
                self.push(
                    ViolationCode::DuplicateEquality,
                    &base,
                    Some(eq.question_span.start),
                    "equality repeats an earlier (question, mention) pair".into(),
                );
            }
        }

        if exp.answers.is_empty() {
            self.push(
                ViolationCode::MissingAnswer,
                "explanation.answers",
                None,
                "an explanation needs at least one answer".into(),
            );
        }
        for (i, a) in exp.answers.iter().enumerate() {
            let base = format!("explanation.answers[{i}]");
            let field = format!("{base}.span");
            if self.span(&ex.passage, "passage", &a.answer_span, &field) {
                self.inside_sentence(sentence, &a.answer_span, &field);
            }
            self.span(&ex.passage, "passage", &a.resolved_span, &format!("{base}.resolved"));
        }
    }
}

fn mention_identity(m: &PassageMention) -> (u8, usize, usize, String) {
    match m {
        PassageMention::Explicit { span } => (0, span.start, span.end, String::new()),
        PassageMention::ImplicitPhrase { anchor, prep } => {
            (1, anchor.start, anchor.end, prep.0.clone())
        }
        PassageMention::ImplicitSentence { prep } => (2, 0, 0, prep.0.clone()),
        PassageMention::TitleLink { span } => (3, span.start, span.end, String::new()),
    }
}
