//! Aggregation of human judgment logs.
//!
//! Each [`JudgmentRecord`] is one rater's verdict on whether a model answer
//! is correct, given the highlighting of one [`Condition`]. Reports give
//! accuracies per condition, split by gold correctness and error type, the
//! F1 of flagging incorrect answers, and per-question accuracies with Wilson
//! score intervals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Error;
use crate::eval::Fraction;

/// Highlighting shown to a rater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// Answer span only.
    #[serde(alias = "None")]
    None,
    /// Answer plus the selected sentence.
    #[serde(alias = "Sentence")]
    Sentence,
    /// Answer, sentence and referential equalities.
    #[serde(alias = "QED", alias = "Qed")]
    Qed,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::None, Condition::Sentence, Condition::Qed];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::None => "none",
            Condition::Sentence => "sentence",
            Condition::Qed => "qed",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Condition::None => "None",
            Condition::Sentence => "Sentence",
            Condition::Qed => "QED",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Condition::None),
            "sentence" => Ok(Condition::Sentence),
            "qed" => Ok(Condition::Qed),
            other => Err(Error::Usage(format!("unknown condition `{other}`"))),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why an incorrect model answer is incorrect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    /// The prediction is wrong.
    #[serde(alias = "Pred")]
    Pred,
    /// The reference answer is wrong or missing.
    #[serde(alias = "Ref")]
    Ref,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub rater_id: String,
    pub instance_id: String,
    pub condition: Condition,
    /// Whether the model answer shown was in fact correct.
    pub instance_correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<ErrorType>,
    /// Whether the rater marked the answer correct.
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<u8>,
}

impl JudgmentRecord {
    pub fn is_accurate(&self) -> bool {
        self.verdict == self.instance_correct
    }

    /// Checks that `error_type` is present exactly for incorrect instances.
    pub fn check(&self) -> Result<(), Error> {
        match (self.instance_correct, self.error_type) {
            (true, Some(_)) => Err(Error::InvalidJudgment(format!(
                "{}/{}: error_type on a correct instance",
                self.rater_id, self.instance_id
            ))),
            (false, None) => Err(Error::InvalidJudgment(format!(
                "{}/{}: incorrect instance without error_type",
                self.rater_id, self.instance_id
            ))),
            _ => Ok(()),
        }
    }
}

/// Verdict counts split by the truth of the judged instance.
/// `*_yes` counts verdicts of "correct", `*_no` verdicts of "incorrect".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub correct_yes: u64,
    pub correct_no: u64,
    pub pred_yes: u64,
    pub pred_no: u64,
    pub ref_yes: u64,
    pub ref_no: u64,
}

impl Confusion {
    pub fn add(&mut self, r: &JudgmentRecord) {
        let cell = match (r.instance_correct, r.error_type, r.verdict) {
            (true, _, true) => &mut self.correct_yes,
            (true, _, false) => &mut self.correct_no,
            (false, Some(ErrorType::Ref), true) => &mut self.ref_yes,
            (false, Some(ErrorType::Ref), false) => &mut self.ref_no,
            (false, _, true) => &mut self.pred_yes,
            (false, _, false) => &mut self.pred_no,
        };
        *cell += 1;
    }

    pub fn total(&self) -> u64 {
        self.correct() + self.incorrect()
    }

    pub fn correct(&self) -> u64 {
        self.correct_yes + self.correct_no
    }

    pub fn incorrect(&self) -> u64 {
        self.pred_yes + self.pred_no + self.ref_yes + self.ref_no
    }

    fn accuracy(hits: u64, total: u64) -> Option<f64> {
        (total > 0).then(|| Fraction::ratio(hits, total, total).percent())
    }

    pub fn accuracy_all(&self) -> Option<f64> {
        Self::accuracy(self.correct_yes + self.pred_no + self.ref_no, self.total())
    }

    pub fn accuracy_correct(&self) -> Option<f64> {
        Self::accuracy(self.correct_yes, self.correct())
    }

    pub fn accuracy_incorrect(&self) -> Option<f64> {
        Self::accuracy(self.pred_no + self.ref_no, self.incorrect())
    }

    pub fn accuracy_incorrect_pred(&self) -> Option<f64> {
        Self::accuracy(self.pred_no, self.pred_yes + self.pred_no)
    }

    pub fn accuracy_incorrect_ref(&self) -> Option<f64> {
        Self::accuracy(self.ref_no, self.ref_yes + self.ref_no)
    }

    /// F1 of "incorrect" verdicts as predictions of incorrect instances,
    /// as an exact fraction.
    pub fn f1_incorrect_fraction(&self) -> Fraction {
        let true_flags = self.pred_no + self.ref_no;
        let flags = true_flags + self.correct_no;
        let gold = self.incorrect();
        Fraction::harmonic(
            Fraction::ratio(true_flags, flags, gold),
            Fraction::ratio(true_flags, gold, flags),
        )
    }

    pub fn f1_incorrect(&self) -> f64 {
        self.f1_incorrect_fraction().percent()
    }
}

/// How records are combined into a group accuracy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every record counts once.
    #[default]
    Judgment,
    /// Per-rater values are averaged, each rater counting once.
    Rater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionAccuracy {
    pub instance_id: String,
    pub judgments: u64,
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub judgments: u64,
    pub raters: u64,
    pub counts: Confusion,
    pub accuracy_all: Option<f64>,
    pub accuracy_correct: Option<f64>,
    pub accuracy_incorrect: Option<f64>,
    pub accuracy_incorrect_pred: Option<f64>,
    pub accuracy_incorrect_ref: Option<f64>,
    pub f1_incorrect: f64,
    pub questions: Vec<QuestionAccuracy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterReport {
    pub weighting: Weighting,
    pub judgments: u64,
    /// One entry per condition present in the log, in [`Condition::ALL`] order.
    pub conditions: Vec<ConditionReport>,
}

impl RaterReport {
    pub fn condition(&self, c: Condition) -> Option<&ConditionReport> {
        self.conditions.iter().find(|r| r.condition == c)
    }

    /// Text table with one row per condition.
    pub fn to_table(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>8} {:>8} {:>10} {:>6} {:>6} {:>6}",
            "Condition", "n", "All", "Correct", "Incorrect", "Pred", "Ref", "F1"
        );
        for c in &self.conditions {
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>8} {:>8} {:>10} {:>6} {:>6} {:>6.1}",
                c.condition.display_name(),
                c.judgments,
                cell(c.accuracy_all),
                cell(c.accuracy_correct),
                cell(c.accuracy_incorrect),
                cell(c.accuracy_incorrect_pred),
                cell(c.accuracy_incorrect_ref),
                c.f1_incorrect
            );
        }
        out
    }
}

impl fmt::Display for RaterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

/// Checks per-record invariants, `(rater_id, instance_id)` uniqueness and
/// that every instance has a single gold correctness.
pub fn validate_log(log: &[JudgmentRecord]) -> Result<(), Error> {
    let mut seen = BTreeSet::new();
    let mut gold: HashMap<&str, bool> = HashMap::new();
    for r in log {
        r.check()?;
        if !seen.insert((r.rater_id.as_str(), r.instance_id.as_str())) {
            return Err(Error::DuplicateJudgment {
                rater: r.rater_id.clone(),
                instance: r.instance_id.clone(),
            });
        }
        if *gold.entry(&r.instance_id).or_insert(r.instance_correct) != r.instance_correct {
            return Err(Error::InconsistentGold(r.instance_id.clone()));
        }
    }
    Ok(())
}

/// Two-sided 95% standard normal quantile.
pub fn z95() -> f64 {
    Normal::standard().inverse_cdf(0.975)
}

/// Wilson score interval for `successes` out of `n` at quantile `z`.
/// `n = 0` gives the uninformative `[0, 1]`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Accuracy per instance over all given records, with Wilson 95% intervals,
/// sorted by accuracy and then instance id.
pub fn per_question_accuracy<'a, I>(log: I) -> Vec<QuestionAccuracy>
where
    I: IntoIterator<Item = &'a JudgmentRecord>,
{
    let mut tally: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for r in log {
        let t = tally.entry(&r.instance_id).or_default();
        t.0 += r.is_accurate() as u64;
        t.1 += 1;
    }
    let z = z95();
    let mut out: Vec<_> = tally
        .into_iter()
        .map(|(id, (hits, n))| {
            let (ci_low, ci_high) = wilson_interval(hits, n, z);
            QuestionAccuracy {
                instance_id: id.to_string(),
                judgments: n,
                accuracy: hits as f64 / n as f64,
                ci_low,
                ci_high,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.accuracy
            .total_cmp(&b.accuracy)
            .then_with(|| a.instance_id.cmp(&b.instance_id))
    });
    out
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0u64), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn condition_report(
    condition: Condition,
    records: &[&JudgmentRecord],
    weighting: Weighting,
) -> ConditionReport {
    let mut counts = Confusion::default();
    let mut by_rater: BTreeMap<&str, Confusion> = BTreeMap::new();
    for r in records {
        counts.add(r);
        by_rater.entry(&r.rater_id).or_default().add(r);
    }
    let questions = per_question_accuracy(records.iter().copied());
    let base = ConditionReport {
        condition,
        judgments: counts.total(),
        raters: by_rater.len() as u64,
        counts,
        accuracy_all: counts.accuracy_all(),
        accuracy_correct: counts.accuracy_correct(),
        accuracy_incorrect: counts.accuracy_incorrect(),
        accuracy_incorrect_pred: counts.accuracy_incorrect_pred(),
        accuracy_incorrect_ref: counts.accuracy_incorrect_ref(),
        f1_incorrect: counts.f1_incorrect(),
        questions,
    };
    match weighting {
        Weighting::Judgment => base,
        Weighting::Rater => {
            let raters = || by_rater.values();
            ConditionReport {
                accuracy_all: mean(raters().map(Confusion::accuracy_all)),
                accuracy_correct: mean(raters().map(Confusion::accuracy_correct)),
                accuracy_incorrect: mean(raters().map(Confusion::accuracy_incorrect)),
                accuracy_incorrect_pred: mean(raters().map(Confusion::accuracy_incorrect_pred)),
                accuracy_incorrect_ref: mean(raters().map(Confusion::accuracy_incorrect_ref)),
                f1_incorrect: mean(raters().map(|c| Some(c.f1_incorrect()))).unwrap_or(0.0),
                ..base
            }
        }
    }
}

/// Aggregates a judgment log with the given weighting.
pub fn aggregate_judgments_with(
    log: &[JudgmentRecord],
    weighting: Weighting,
) -> Result<RaterReport, Error> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    validate_log(log)?;
    let conditions = Condition::ALL
        .iter()
        .filter_map(|&c| {
            let records: Vec<_> = log.iter().filter(|r| r.condition == c).collect();
            (!records.is_empty()).then(|| condition_report(c, &records, weighting))
        })
        .collect();
    Ok(RaterReport {
        weighting,
        judgments: log.len() as u64,
        conditions,
    })
}

/// Aggregates a judgment log, each record counting once.
pub fn aggregate_judgments(log: &[JudgmentRecord]) -> Result<RaterReport, Error> {
    aggregate_judgments_with(log, Weighting::Judgment)
}

/// Reads one JSON record per line; blank lines are skipped.
pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<JudgmentRecord>, Error> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Encoding { line: i + 1 },
            _ => Error::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JudgmentRecord = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidJudgment(format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_log<W: Write>(mut writer: W, log: &[JudgmentRecord]) -> Result<(), Error> {
    for r in log {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
