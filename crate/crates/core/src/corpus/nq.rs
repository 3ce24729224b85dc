//! Best-effort import of the released QED data files.
//!
//! The released records carry `example_id`, `title_text`, `url`,
//! `question_text`, `paragraph_text`, `sentence_starts`,
//! `original_nq_answers` and an `annotation` object with `explanation_type`,
//! `selected_sentence`, `referential_equalities` and `answer`.
//!
//! The bridging encoding is provisional: a `bridge` field holding a
//! preposition marks an implicit mention, anchored to `[start, end)` when the
//! range is non-empty and sentence-level otherwise. `bridge: true` without a
//! preposition is imported with "of".

use std::io::BufRead;

use serde::Deserialize;
use serde_json::Value;

use super::{CorpusDocument, ParseError, Records};
use crate::error::Error;
use crate::model::{
    AnswerAnnotation, Explanation, ExplanationLabel, PassageMention, Preposition, QedExample,
    ReferentialEquality, SentenceSpan, TextSpan,
};
use crate::text::char_len;

#[derive(Deserialize)]
struct RawExample {
    example_id: Value,
    #[serde(default)]
    title_text: String,
    url: Option<String>,
    question_text: String,
    paragraph_text: String,
    #[serde(default)]
    sentence_starts: Vec<usize>,
    #[serde(default)]
    original_nq_answers: Vec<Vec<RawRef>>,
    annotation: Option<RawAnnotation>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    explanation_type: String,
    selected_sentence: Option<RawRef>,
    #[serde(default)]
    referential_equalities: Vec<RawEquality>,
    #[serde(default)]
    answer: Vec<RawAnswer>,
}

#[derive(Deserialize)]
struct RawEquality {
    question_reference: RawRef,
    sentence_reference: RawRef,
}

#[derive(Deserialize)]
struct RawAnswer {
    sentence_reference: RawRef,
    paragraph_reference: Option<RawRef>,
}

#[derive(Deserialize)]
struct RawRef {
    start: i64,
    end: i64,
    #[serde(default)]
    string: Option<String>,
    #[serde(default)]
    bridge: Option<Value>,
}

impl RawRef {
    fn span(&self) -> Result<TextSpan, String> {
        if self.start < 0 || self.end < 0 {
            return Err(format!("negative offsets [{}, {})", self.start, self.end));
        }
        Ok(TextSpan::new(
            self.start as usize,
            self.end as usize,
            self.string.clone().unwrap_or_default(),
        ))
    }

    fn bridge_prep(&self) -> Option<String> {
        match &self.bridge {
            Some(Value::String(p)) if !p.is_empty() => Some(p.to_lowercase()),
            Some(Value::Bool(true)) => Some("of".to_owned()),
            _ => None,
        }
    }
}

fn label_of(explanation_type: &str) -> Result<ExplanationLabel, String> {
    match explanation_type {
        "single_sentence" => Ok(ExplanationLabel::ValidExplanation),
        "multi_sentence" => Ok(ExplanationLabel::AnswerOnly),
        "none" => Ok(ExplanationLabel::NoAnswer),
        other => Err(format!("unknown explanation_type {other:?}")),
    }
}

fn boundaries(passage: &str, starts: &[usize]) -> Vec<TextSpan> {
    let chars: Vec<char> = passage.chars().collect();
    let len = chars.len();
    let mut out = Vec::with_capacity(starts.len());
    for (i, &start) in starts.iter().enumerate() {
        let mut s = start.min(len);
        let mut e = starts.get(i + 1).copied().unwrap_or(len).min(len);
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            out.push(TextSpan::new(s, e, chars[s..e].iter().collect::<String>()));
        }
    }
    out
}

/// Converts one released-format line.
pub fn import_released_line(line: &str) -> Result<QedExample, String> {
    let raw: RawExample = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let id = match &raw.example_id {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(format!("unsupported example_id {other}")),
    };
    let annotation = raw
        .annotation
        .ok_or_else(|| "record has no annotation".to_owned())?;
    let label = label_of(&annotation.explanation_type)?;

    let mut ex = QedExample {
        id,
        title: raw.title_text,
        url: raw.url,
        question: raw.question_text,
        sentence_boundaries: boundaries(&raw.paragraph_text, &raw.sentence_starts),
        passage: raw.paragraph_text,
        label,
        explanation: None,
        answers: Vec::new(),
    };
    if ex.sentence_boundaries.is_empty() && char_len(&ex.passage) > 0 {
        ex.sentence_boundaries = crate::text::split_sentences(&ex.passage)
            .into_iter()
            .filter_map(|(s, e)| TextSpan::from_host(&ex.passage, s, e))
            .collect();
    }

    match label {
        ExplanationLabel::ValidExplanation => {
            let sentence = annotation
                .selected_sentence
                .as_ref()
                .ok_or_else(|| "single_sentence record without selected_sentence".to_owned())?
                .span()?;
            // Snap to the containing boundary: released sentences may differ
            // from the boundaries in trailing whitespace.
            let sentence = ex
                .sentence_boundaries
                .iter()
                .find(|b| b.start <= sentence.start && sentence.start < b.end)
                .cloned()
                .unwrap_or(sentence);
            let mut equalities = Vec::with_capacity(annotation.referential_equalities.len());
            for eq in &annotation.referential_equalities {
                let question_span = eq.question_reference.span()?;
                let r = &eq.sentence_reference;
                let mention = match r.bridge_prep() {
                    Some(prep) if r.start >= 0 && r.end > r.start => PassageMention::ImplicitPhrase {
                        anchor: r.span()?,
                        prep: Preposition::new(prep),
                    },
                    Some(prep) => PassageMention::ImplicitSentence {
                        prep: Preposition::new(prep),
                    },
                    None => PassageMention::Explicit { span: r.span()? },
                };
                equalities.push(ReferentialEquality::new(question_span, mention));
            }
            let mut answers = Vec::with_capacity(annotation.answer.len());
            for a in &annotation.answer {
                let pi = a.sentence_reference.span()?;
                let xi = match &a.paragraph_reference {
                    Some(p) => p.span()?,
                    None => pi.clone(),
                };
                answers.push(AnswerAnnotation::resolved(pi, xi));
            }
            ex.explanation = Some(Explanation {
                selected_sentence: SentenceSpan(sentence),
                equalities,
                answers,
            });
        }
        ExplanationLabel::AnswerOnly => {
            if let Some(first) = raw.original_nq_answers.first() {
                for r in first {
                    ex.answers.push(AnswerAnnotation::direct(r.span()?));
                }
            }
        }
        ExplanationLabel::NoAnswer => {}
    }
    // Released strings may be whitespace-tokenized, so re-derive cached text
    // from the hosts rather than trusting it.
    clear_texts(&mut ex);
    ex.hydrate();
    Ok(ex)
}

fn clear_texts(ex: &mut QedExample) {
    for a in &mut ex.answers {
        a.answer_span.text.clear();
        a.resolved_span.text.clear();
    }
    if let Some(exp) = &mut ex.explanation {
        exp.selected_sentence.0.text.clear();
        for eq in &mut exp.equalities {
            eq.question_span.text.clear();
            match &mut eq.passage_mention {
                PassageMention::Explicit { span } | PassageMention::TitleLink { span } => {
                    span.text.clear()
                }
                PassageMention::ImplicitPhrase { anchor, .. } => anchor.text.clear(),
                PassageMention::ImplicitSentence { .. } => {}
            }
        }
        for a in &mut exp.answers {
            a.answer_span.text.clear();
            a.resolved_span.text.clear();
        }
    }
}

/// Imports a released-format file, isolating bad lines like
/// [`super::parse_corpus`].
pub fn import_released<R: BufRead>(reader: R, provenance: &str) -> Result<CorpusDocument, Error> {
    let mut doc = CorpusDocument {
        provenance: provenance.to_owned(),
        ..CorpusDocument::default()
    };
    for item in Records::new(reader, import_released_line) {
        match item? {
            (_, Ok(ex)) => doc.examples.push(ex),
            (line, Err(message)) => doc.parse_errors.push(ParseError { line, message }),
        }
    }
    Ok(doc)
}
