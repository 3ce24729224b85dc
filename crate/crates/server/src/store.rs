//! File-backed state: append-only JSONL logs under one directory.
//!
//! - `annotations.jsonl`: one [`AnnotationEntry`] per accepted write
//! - `judgments.jsonl`: one [`JudgmentRecord`] per verdict
//! - `sessions.jsonl`: one [`SessionEntry`] per judging session
//!
//! Superseded annotation entries are dropped on open by rewriting the log to
//! a temporary file and renaming it over the original.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use qed_core::corpus::CorpusDocument;
use qed_core::rater::{Condition, JudgmentRecord};
use qed_core::{AnswerAnnotation, Explanation, ExplanationLabel, QedExample};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

const ANNOTATIONS: &str = "annotations.jsonl";
const JUDGMENTS: &str = "judgments.jsonl";
const SESSIONS: &str = "sessions.jsonl";

/// An accepted annotation of one example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub id: String,
    pub version: u64,
    pub label: ExplanationLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<Explanation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub answers: Vec<AnswerAnnotation>,
}

impl AnnotationEntry {
    pub fn apply(&self, base: &QedExample) -> QedExample {
        QedExample {
            label: self.label,
            explanation: self.explanation.clone(),
            answers: self.answers.clone(),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub session: String,
    pub condition: Condition,
}

/// One item to be judged: a candidate answer for an example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeInstance {
    pub instance_id: String,
    pub example_id: String,
    /// Candidate answer offsets in the passage.
    pub answer: (usize, usize),
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<qed_core::rater::ErrorType>,
}

impl JudgeInstance {
    /// One instance per explained example, showing its gold answer.
    pub fn from_corpus(corpus: &CorpusDocument) -> Vec<JudgeInstance> {
        corpus
            .examples
            .iter()
            .filter(|ex| ex.label == ExplanationLabel::ValidExplanation)
            .filter_map(|ex| {
                let a = ex.explanation.as_ref()?.answers.first()?;
                Some(JudgeInstance {
                    instance_id: ex.id.clone(),
                    example_id: ex.id.clone(),
                    answer: a.answer_span.offsets(),
                    correct: true,
                    error_type: None,
                })
            })
            .collect()
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    let lines: Vec<String> = BufReader::new(file).lines().collect::<io::Result<_>>()?;
    let last = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => out.push(v),
            // a torn final write is dropped; anything else is corruption
            Err(_) if i + 1 == last => {
                eprintln!("{}: ignoring incomplete last line", path.display());
            }
            Err(e) => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), i + 1),
                ))
            }
        }
    }
    Ok(out)
}

fn to_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut line = serde_json::to_vec(value).expect("state entries serialize");
    line.push(b'\n');
    line
}

fn append(path: &Path, line: &[u8]) -> io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(line)?;
    file.sync_data()
}

/// Rewrites `path` with `lines` atomically.
fn replace(path: &Path, lines: &[Vec<u8>]) -> io::Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut file = File::create(&tmp)?;
        for line in lines {
            file.write_all(line)?;
        }
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// In-memory view of the state directory.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    pub annotations: HashMap<String, AnnotationEntry>,
    pub judgments: Vec<JudgmentRecord>,
    pub sessions: BTreeMap<String, Condition>,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let entries: Vec<AnnotationEntry> = read_jsonl(&dir.join(ANNOTATIONS))?;
        let count = entries.len();
        let mut annotations = HashMap::new();
        let mut order = Vec::new();
        for e in entries {
            if !annotations.contains_key(&e.id) {
                order.push(e.id.clone());
            }
            annotations.insert(e.id.clone(), e);
        }
        let judgments = read_jsonl(&dir.join(JUDGMENTS))?;
        let sessions = read_jsonl::<SessionEntry>(&dir.join(SESSIONS))?
            .into_iter()
            .map(|s| (s.session, s.condition))
            .collect();
        let store = Self {
            dir,
            annotations,
            judgments,
            sessions,
        };
        if count > store.annotations.len() {
            let lines: Vec<_> = order.iter().map(|id| to_line(&store.annotations[id])).collect();
            replace(&store.dir.join(ANNOTATIONS), &lines)?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn version(&self, id: &str) -> u64 {
        self.annotations.get(id).map_or(0, |e| e.version)
    }

    pub fn put_annotation(&mut self, entry: AnnotationEntry) -> io::Result<()> {
        append(&self.dir.join(ANNOTATIONS), &to_line(&entry))?;
        self.annotations.insert(entry.id.clone(), entry);
        Ok(())
    }

    pub fn put_judgment(&mut self, record: JudgmentRecord) -> io::Result<()> {
        append(&self.dir.join(JUDGMENTS), &to_line(&record))?;
        self.judgments.push(record);
        Ok(())
    }

    pub fn put_session(&mut self, session: &str, condition: Condition) -> io::Result<()> {
        let entry = SessionEntry {
            session: session.to_owned(),
            condition,
        };
        append(&self.dir.join(SESSIONS), &to_line(&entry))?;
        self.sessions.insert(entry.session, condition);
        Ok(())
    }
}
