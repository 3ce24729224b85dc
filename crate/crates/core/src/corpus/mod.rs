//! Line-delimited JSON corpus codec.
//!
//! One record per line; a malformed line is reported with its 1-based line
//! number and parsing continues. Serialization is canonical: struct field
//! order, spans as `[start, end, "text"]`, one record per line with a
//! trailing newline.

mod nq;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ExplanationLabel, Explanation, QedExample, TextSpan};
use crate::validate::{ValidationReport, Validator};

pub use nq::{import_released, import_released_line};

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusDocument {
    pub examples: Vec<QedExample>,
    pub provenance: String,
    pub parse_errors: Vec<ParseError>,
}

impl CorpusDocument {
    pub fn new(examples: Vec<QedExample>, provenance: impl Into<String>) -> Self {
        Self {
            examples,
            provenance: provenance.into(),
            parse_errors: Vec::new(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&QedExample> {
        self.examples.iter().find(|e| e.id == id)
    }

    /// Map from id to example; fails on the first duplicate id.
    pub fn index(&self) -> Result<HashMap<&str, &QedExample>, Error> {
        let mut map = HashMap::with_capacity(self.examples.len());
        for ex in &self.examples {
            if map.insert(ex.id.as_str(), ex).is_some() {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
        }
        Ok(map)
    }
}

/// System output for one example. Every field but the id is optional so the
/// same format carries label-only, explanation-only and answer predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(rename = "id")]
    pub example_id: String,
    #[serde(rename = "label", default, skip_serializing_if = "Option::is_none")]
    pub predicted_label: Option<ExplanationLabel>,
    #[serde(rename = "explanation", default, skip_serializing_if = "Option::is_none")]
    pub predicted_explanation: Option<Explanation>,
    #[serde(rename = "answers", default, skip_serializing_if = "Option::is_none")]
    pub predicted_answer_spans: Option<Vec<TextSpan>>,
}

impl PredictionRecord {
    pub fn label_only(id: impl Into<String>, label: ExplanationLabel) -> Self {
        Self {
            example_id: id.into(),
            predicted_label: Some(label),
            predicted_explanation: None,
            predicted_answer_spans: None,
        }
    }

    /// Answer spans from the `answers` field, falling back to the answer
    /// annotations of the predicted explanation.
    pub fn answer_spans(&self) -> Option<Vec<&TextSpan>> {
        if let Some(spans) = &self.predicted_answer_spans {
            return Some(spans.iter().collect());
        }
        self.predicted_explanation
            .as_ref()
            .filter(|e| !e.answers.is_empty())
            .map(|e| e.answers.iter().map(|a| &a.answer_span).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionDocument {
    pub records: Vec<PredictionRecord>,
    pub provenance: String,
    pub parse_errors: Vec<ParseError>,
}

/// Streams records out of a line-delimited reader.
///
/// Yields `Ok((line_number, Ok(record)))` for good lines,
/// `Ok((line_number, Err(message)))` for malformed ones and `Err` only for
/// unreadable input or invalid UTF-8. Blank lines are skipped.
pub struct Records<R, T> {
    reader: R,
    line: usize,
    buf: Vec<u8>,
    decode: fn(&str) -> Result<T, String>,
}

impl<R: BufRead, T> Records<R, T> {
    pub fn new(reader: R, decode: fn(&str) -> Result<T, String>) -> Self {
        Self {
            reader,
            line: 0,
            buf: Vec::new(),
            decode,
        }
    }
}

impl<R: BufRead, T> Iterator for Records<R, T> {
    type Item = Result<(usize, Result<T, String>), Error>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::Io(e))),
            }
            self.line += 1;
            let text = match std::str::from_utf8(&self.buf) {
                Ok(t) => t.trim_end_matches(['\n', '\r']),
                Err(_) => return Some(Err(Error::Encoding { line: self.line })),
            };
            if text.trim().is_empty() {
                continue;
            }
            return Some(Ok((self.line, (self.decode)(text))));
        }
    }
}

fn decode_example(line: &str) -> Result<QedExample, String> {
    let mut ex: QedExample = serde_json::from_str(line).map_err(|e| e.to_string())?;
    ex.hydrate();
    Ok(ex)
}

fn decode_prediction(line: &str) -> Result<PredictionRecord, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

fn collect<R: BufRead, T>(
    reader: R,
    decode: fn(&str) -> Result<T, String>,
) -> Result<(Vec<T>, Vec<ParseError>), Error> {
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for item in Records::new(reader, decode) {
        match item? {
            (_, Ok(v)) => items.push(v),
            (line, Err(message)) => errors.push(ParseError { line, message }),
        }
    }
    Ok((items, errors))
}

/// Parses a canonical corpus. Only I/O failures and invalid UTF-8 abort.
pub fn parse_corpus<R: BufRead>(reader: R, provenance: &str) -> Result<CorpusDocument, Error> {
    let (examples, parse_errors) = collect(reader, decode_example)?;
    Ok(CorpusDocument {
        examples,
        provenance: provenance.to_owned(),
        parse_errors,
    })
}

pub fn parse_corpus_str(text: &str) -> Result<CorpusDocument, Error> {
    parse_corpus(text.as_bytes(), "<memory>")
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusDocument, Error> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_corpus(BufReader::new(file), &path.display().to_string())
}

pub fn parse_predictions<R: BufRead>(
    reader: R,
    provenance: &str,
) -> Result<PredictionDocument, Error> {
    let (records, parse_errors) = collect(reader, decode_prediction)?;
    Ok(PredictionDocument {
        records,
        provenance: provenance.to_owned(),
        parse_errors,
    })
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<PredictionDocument, Error> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_predictions(BufReader::new(file), &path.display().to_string())
}

/// Canonical single-line encoding of one example (no newline).
pub fn example_to_line(example: &QedExample) -> String {
    serde_json::to_string(example).expect("example serialization is infallible")
}

/// Writes examples one per line in canonical form.
pub fn write_examples<'a, W, I>(mut writer: W, examples: I) -> Result<(), Error>
where
    W: Write,
    I: IntoIterator<Item = &'a QedExample>,
{
    for ex in examples {
        writer.write_all(example_to_line(ex).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Canonical bytes of a whole corpus. Parse errors are not serialized.
pub fn serialize_corpus(doc: &CorpusDocument) -> Vec<u8> {
    let mut out = Vec::new();
    write_examples(&mut out, &doc.examples).expect("writing to a Vec cannot fail");
    out
}

pub fn write_predictions<'a, W, I>(mut writer: W, records: I) -> Result<(), Error>
where
    W: Write,
    I: IntoIterator<Item = &'a PredictionRecord>,
{
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// The gold example with the prediction's label and explanation swapped in,
/// span texts re-derived from the gold hosts.
pub fn merge_prediction(gold: &QedExample, pred: &PredictionRecord) -> QedExample {
    let mut merged = gold.clone();
    if let Some(label) = pred.predicted_label {
        merged.label = label;
    }
    if let Some(exp) = &pred.predicted_explanation {
        let mut exp = exp.clone();
        exp.hydrate(&gold.question, &gold.passage, &gold.title);
        merged.explanation = Some(exp);
        if pred.predicted_label.is_none() {
            merged.label = ExplanationLabel::ValidExplanation;
        }
        merged.answers.clear();
    }
    merged
}

/// Validates a prediction against the gold example it refers to.
pub fn validate_prediction(
    validator: &Validator,
    gold: &QedExample,
    pred: &PredictionRecord,
) -> ValidationReport {
    validator.validate(&merge_prediction(gold, pred))
}
