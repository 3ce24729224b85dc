//! Lexical Task 1 baseline.
//!
//! Given the gold answer, select the sentence holding the first answer span
//! and align question word n-grams to identical (after normalization)
//! n-grams of that sentence. Candidates consist of content words only, at
//! most `max_len` of them. Matches are taken greedily, longest first, ties
//! broken by leftmost question position and then leftmost sentence position,
//! skipping any match that overlaps an earlier pick on either side or
//! touches an answer span.

use std::collections::BTreeSet;

use crate::corpus::PredictionRecord;
use crate::error::Error;
use crate::model::{
    Explanation, ExplanationLabel, PassageMention, QedExample, ReferentialEquality, SentenceSpan,
    TextSpan,
};
use crate::text::{normalize_text, tokenize, Token};

/// Function words, question words and a handful of frequent question
/// predicates. Predicates are included so that "who won X" aligns X rather
/// than "won X".
pub const DEFAULT_STOPWORDS: &[&str] = &[
    // articles, determiners, pronouns
    "a", "an", "the", "this", "that", "these", "those", "it", "its", "they", "them", "their",
    "he", "him", "his", "she", "her", "hers", "we", "us", "our", "you", "your", "i", "me", "my",
    "some", "any", "each", "every", "all", "both", "no", "not", "other", "such",
    // prepositions and conjunctions
    "of", "in", "at", "on", "by", "for", "from", "to", "with", "during", "into", "onto", "about",
    "as", "than", "over", "under", "after", "before", "between", "through", "and", "or", "but",
    "if", "so", "up", "out", "off", "down",
    // question words
    "who", "whom", "whose", "what", "which", "when", "where", "why", "how", "many", "much",
    // auxiliaries
    "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "done", "has",
    "have", "had", "having", "will", "would", "shall", "should", "can", "could", "may", "might",
    "must",
    // frequent question predicates
    "won", "win", "wins", "wrote", "write", "writes", "sang", "sing", "sings", "sung", "played",
    "play", "plays", "made", "make", "makes", "came", "come", "comes", "went", "go", "goes",
    "get", "gets", "got", "called", "named", "mean", "means", "say", "says", "said",
];

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    /// Longest n-gram considered, in words.
    pub max_len: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            max_len: 6,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl BaselineConfig {
    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    len: usize,
    q_start: usize,
    q_end: usize,
    s_start: usize,
    s_end: usize,
}

/// Word n-grams of content tokens: `(first token, last token, normalized words)`.
fn ngrams(tokens: &[(Token, bool)], max_len: usize) -> Vec<(usize, usize, Vec<String>)> {
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        let mut words = Vec::new();
        for (j, (tok, usable)) in tokens.iter().enumerate().skip(i).take(max_len) {
            if !usable {
                break;
            }
            words.push(normalize_text(&tok.text));
            out.push((i, j, words.clone()));
        }
    }
    out
}

/// All question/sentence n-gram pairs with equal normalized words.
fn candidates(
    question: &[(Token, bool)],
    sentence: &[(Token, bool)],
    max_len: usize,
) -> Vec<Candidate> {
    let s_grams = ngrams(sentence, max_len);
    let mut out = Vec::new();
    for (qi, qj, qw) in ngrams(question, max_len) {
        for (si, sj, sw) in &s_grams {
            if *sw == qw {
                out.push(Candidate {
                    len: qw.len(),
                    q_start: question[qi].0.start,
                    q_end: question[qj].0.end,
                    s_start: sentence[*si].0.start,
                    s_end: sentence[*sj].0.end,
                });
            }
        }
    }
    out
}

fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// Predicts an explanation for `example` from its answer spans.
pub fn predict_explanation(
    example: &QedExample,
    config: &BaselineConfig,
) -> Result<PredictionRecord, Error> {
    let answers = example.answer_annotations();
    let first = answers
        .first()
        .ok_or_else(|| Error::InvalidExample(format!("{}: no answer span", example.id)))?;
    let sentence_idx = example
        .sentence_index_of(&first.answer_span)
        .ok_or_else(|| Error::NoSentence(example.id.clone()))?;
    let sentence = &example.sentence_boundaries[sentence_idx];

    let kept_answers: Vec<_> = answers
        .iter()
        .filter(|a| sentence.contains(&a.answer_span))
        .cloned()
        .collect();
    let answer_ranges: Vec<(usize, usize)> =
        kept_answers.iter().map(|a| a.answer_span.offsets()).collect();

    let is_content = |t: &Token| !config.stopwords.contains(&normalize_text(&t.text));
    let question: Vec<(Token, bool)> = tokenize(&example.question)
        .into_iter()
        .map(|t| {
            let ok = is_content(&t);
            (t, ok)
        })
        .collect();
    let sentence_tokens: Vec<(Token, bool)> = tokenize(&sentence.text)
        .into_iter()
        .map(|mut t| {
            t.start += sentence.start;
            t.end += sentence.start;
            let in_answer = answer_ranges.iter().any(|&r| overlaps(r, (t.start, t.end)));
            let ok = is_content(&t) && !in_answer;
            (t, ok)
        })
        .collect();

    let mut found = candidates(&question, &sentence_tokens, config.max_len.max(1));
    found.sort_by(|a, b| {
        b.len
            .cmp(&a.len)
            .then(a.q_start.cmp(&b.q_start))
            .then(a.s_start.cmp(&b.s_start))
    });

    let mut taken: Vec<&Candidate> = Vec::new();
    for c in &found {
        let clash = taken.iter().any(|t| {
            overlaps((t.q_start, t.q_end), (c.q_start, c.q_end))
                || overlaps((t.s_start, t.s_end), (c.s_start, c.s_end))
        });
        if !clash {
            taken.push(c);
        }
    }
    taken.sort_by_key(|c| (c.q_start, c.s_start));

    let equalities = taken
        .into_iter()
        .map(|c| {
            let q = TextSpan::from_host(&example.question, c.q_start, c.q_end)
                .expect("token offsets lie inside the question");
            let s = TextSpan::from_host(&example.passage, c.s_start, c.s_end)
                .expect("token offsets lie inside the passage");
            ReferentialEquality::new(q, PassageMention::explicit(s))
        })
        .collect();

    Ok(PredictionRecord {
        example_id: example.id.clone(),
        predicted_label: Some(ExplanationLabel::ValidExplanation),
        predicted_explanation: Some(Explanation {
            selected_sentence: SentenceSpan(sentence.clone()),
            equalities,
            answers: kept_answers,
        }),
        predicted_answer_spans: None,
    })
}

/// Runs the baseline over every example that has answer spans, skipping
/// those it cannot handle. Output order follows the input.
pub fn predict_corpus<'a, I>(examples: I, config: &BaselineConfig) -> Vec<PredictionRecord>
where
    I: IntoIterator<Item = &'a QedExample>,
{
    examples
        .into_iter()
        .filter(|ex| !ex.answer_annotations().is_empty())
        .filter_map(|ex| predict_explanation(ex, config).ok())
        .collect()
}
