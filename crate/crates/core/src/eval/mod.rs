//! Scoring of explanation predictions.
//!
//! Mentions are compared by exact offsets. A predicted title link may stand
//! in for a gold implicit mention when [`MatchPolicy::title_equivalence`] is
//! on; this relation is one-directional, so under it a single title link can
//! cover several gold implicit mentions. Precision counts predictions that
//! have a compatible gold item, recall counts gold items that have a
//! compatible prediction.

mod agreement;
mod report;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusDocument, PredictionRecord};
use crate::error::Error;
use crate::model::{Explanation, ExplanationLabel, PassageMention, Preposition};

pub use agreement::{classification_accuracy, pairwise_agreement, AgreementReport, PairAgreement};
pub use report::{Averaging, Counts, ExactPrf, Fraction, MetricReport, Prf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Question,
    Passage,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MentionShape {
    Span { start: usize, end: usize },
    ImplicitPhrase { start: usize, end: usize, prep: Preposition },
    ImplicitSentence { prep: Preposition },
    Title { start: usize, end: usize },
}

/// Canonical identity of a mention for scoring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MentionKey {
    pub side: Side,
    pub shape: MentionShape,
}

impl MentionKey {
    pub fn question(start: usize, end: usize) -> Self {
        Self {
            side: Side::Question,
            shape: MentionShape::Span { start, end },
        }
    }

    pub fn passage(start: usize, end: usize) -> Self {
        Self {
            side: Side::Passage,
            shape: MentionShape::Span { start, end },
        }
    }

    pub fn from_mention(m: &PassageMention) -> Self {
        let shape = match m {
            PassageMention::Explicit { span } => MentionShape::Span {
                start: span.start,
                end: span.end,
            },
            PassageMention::ImplicitPhrase { anchor, prep } => MentionShape::ImplicitPhrase {
                start: anchor.start,
                end: anchor.end,
                prep: prep.clone(),
            },
            PassageMention::ImplicitSentence { prep } => MentionShape::ImplicitSentence {
                prep: prep.clone(),
            },
            PassageMention::TitleLink { span } => MentionShape::Title {
                start: span.start,
                end: span.end,
            },
        };
        Self {
            side: Side::Passage,
            shape,
        }
    }

    fn is_implicit(&self) -> bool {
        matches!(
            self.shape,
            MentionShape::ImplicitPhrase { .. } | MentionShape::ImplicitSentence { .. }
        )
    }

    fn is_title(&self) -> bool {
        matches!(self.shape, MentionShape::Title { .. })
    }
}

/// Span equality criterion. Only exact matching is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanMatching {
    #[default]
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPolicy {
    pub span_matching: SpanMatching,
    pub title_equivalence: bool,
    pub averaging: Averaging,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        Self {
            span_matching: SpanMatching::Exact,
            title_equivalence: true,
            averaging: Averaging::Micro,
        }
    }
}

impl MatchPolicy {
    /// Exact variant equality, micro averaging.
    pub fn strict() -> Self {
        Self {
            title_equivalence: false,
            ..Self::default()
        }
    }

    /// Whether predicted `pred` counts as a hit for gold `gold`.
    pub fn compatible(&self, gold: &MentionKey, pred: &MentionKey) -> bool {
        gold == pred
            || (self.title_equivalence
                && gold.side == pred.side
                && pred.is_title()
                && gold.is_implicit())
    }
}

pub type PairKey = (MentionKey, MentionKey);

/// Deduplicated mention set of an explanation (both sides).
pub fn mention_set(exp: &Explanation) -> BTreeSet<MentionKey> {
    let mut set = BTreeSet::new();
    for eq in &exp.equalities {
        set.insert(MentionKey::question(eq.question_span.start, eq.question_span.end));
        set.insert(MentionKey::from_mention(&eq.passage_mention));
    }
    set
}

/// Deduplicated equality pairs of an explanation.
pub fn pair_set(exp: &Explanation) -> BTreeSet<PairKey> {
    exp.equalities
        .iter()
        .map(|eq| {
            (
                MentionKey::question(eq.question_span.start, eq.question_span.end),
                MentionKey::from_mention(&eq.passage_mention),
            )
        })
        .collect()
}

fn matched<'a, T, F>(from: &'a BTreeSet<T>, against: &BTreeSet<T>, hit: F) -> Vec<&'a T>
where
    F: Fn(&T, &T) -> bool,
{
    from.iter()
        .filter(|x| against.iter().any(|y| hit(x, y)))
        .collect()
}

/// Precision, recall and F1 (as fractions in `[0, 1]`) of mention
/// identification under exact matching.
pub fn mention_identification_prf(
    gold: &BTreeSet<MentionKey>,
    pred: &BTreeSet<MentionKey>,
) -> (f64, f64, f64) {
    mention_identification_with(gold, pred, &MatchPolicy::strict())
}

pub fn mention_identification_with(
    gold: &BTreeSet<MentionKey>,
    pred: &BTreeSet<MentionKey>,
    policy: &MatchPolicy,
) -> (f64, f64, f64) {
    let mp = matched(pred, gold, |p, g| policy.compatible(g, p)).len() as u64;
    let mg = matched(gold, pred, |g, p| policy.compatible(g, p)).len() as u64;
    unit_prf(mp, mg, pred.len() as u64, gold.len() as u64)
}

/// Precision, recall and F1 (as fractions) of equality-pair alignment.
pub fn mention_alignment_prf(
    gold: &BTreeSet<PairKey>,
    pred: &BTreeSet<PairKey>,
    policy: &MatchPolicy,
) -> (f64, f64, f64) {
    let hit = |g: &PairKey, p: &PairKey| g.0 == p.0 && policy.compatible(&g.1, &p.1);
    let mp = matched(pred, gold, |p, g| hit(g, p)).len() as u64;
    let mg = matched(gold, pred, |g, p| hit(g, p)).len() as u64;
    unit_prf(mp, mg, pred.len() as u64, gold.len() as u64)
}

fn unit_prf(matched_pred: u64, matched_gold: u64, pred: u64, gold: u64) -> (f64, f64, f64) {
    let p = Fraction::ratio(matched_pred, pred, gold);
    let r = Fraction::ratio(matched_gold, gold, pred);
    (p.value(), r.value(), Fraction::harmonic(p, r).value())
}

/// Scoring detail for one example.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExampleScore {
    pub counts: Counts,
    pub matched_pred_mentions: BTreeSet<MentionKey>,
    pub matched_pred_pairs: BTreeSet<PairKey>,
}

/// Scores one predicted explanation against gold; a missing side counts as
/// an empty explanation.
pub fn score_example(
    gold: Option<&Explanation>,
    pred: Option<&Explanation>,
    policy: &MatchPolicy,
) -> ExampleScore {
    let gold_m = gold.map(mention_set).unwrap_or_default();
    let pred_m = pred.map(mention_set).unwrap_or_default();
    let gold_p = gold.map(pair_set).unwrap_or_default();
    let pred_p = pred.map(pair_set).unwrap_or_default();

    let hit_m = |g: &MentionKey, p: &MentionKey| policy.compatible(g, p);
    let hit_p = |g: &PairKey, p: &PairKey| g.0 == p.0 && policy.compatible(&g.1, &p.1);

    let matched_pred_mentions: BTreeSet<MentionKey> =
        matched(&pred_m, &gold_m, |p, g| hit_m(g, p)).into_iter().cloned().collect();
    let matched_pred_pairs: BTreeSet<PairKey> =
        matched(&pred_p, &gold_p, |p, g| hit_p(g, p)).into_iter().cloned().collect();

    let counts = Counts {
        gold_mentions: gold_m.len() as u64,
        pred_mentions: pred_m.len() as u64,
        matched_pred_mentions: matched_pred_mentions.len() as u64,
        matched_gold_mentions: matched(&gold_m, &pred_m, hit_m).len() as u64,
        gold_pairs: gold_p.len() as u64,
        pred_pairs: pred_p.len() as u64,
        matched_pred_pairs: matched_pred_pairs.len() as u64,
        matched_gold_pairs: matched(&gold_p, &pred_p, hit_p).len() as u64,
        examples: 1,
    };
    ExampleScore {
        counts,
        matched_pred_mentions,
        matched_pred_pairs,
    }
}

/// Resolves predictions against gold, keeping gold order and only
/// `valid_explanation` examples.
fn align<'a>(
    gold: &'a CorpusDocument,
    preds: &'a [PredictionRecord],
) -> Result<Vec<(&'a crate::model::QedExample, Option<&'a PredictionRecord>)>, Error> {
    let index = gold.index()?;
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::with_capacity(preds.len());
    for p in preds {
        if !index.contains_key(p.example_id.as_str()) {
            return Err(Error::UnknownId(p.example_id.clone()));
        }
        if by_id.insert(p.example_id.as_str(), p).is_some() {
            return Err(Error::DuplicateId(p.example_id.clone()));
        }
    }
    Ok(gold
        .examples
        .iter()
        .filter(|ex| ex.label == ExplanationLabel::ValidExplanation)
        .map(|ex| (ex, by_id.get(ex.id.as_str()).copied()))
        .collect())
}

fn build_report(scores: &[ExampleScore], averaging: Averaging) -> MetricReport {
    let mut counts = Counts::default();
    for s in scores {
        counts += s.counts;
    }
    let (mention_id, alignment) = match averaging {
        Averaging::Micro => {
            let m = counts.mention_fractions();
            let a = counts.pair_fractions();
            (
                Prf::from_fractions(m.precision, m.recall),
                Prf::from_fractions(a.precision, a.recall),
            )
        }
        Averaging::Macro => {
            let n = scores.len().max(1) as f64;
            let mean = |f: &dyn Fn(&Counts) -> ExactPrf| {
                let (mut p, mut r, mut f1) = (0.0, 0.0, 0.0);
                for s in scores {
                    let x = f(&s.counts);
                    p += x.precision.percent();
                    r += x.recall.percent();
                    f1 += x.f1.percent();
                }
                Prf {
                    precision: p / n,
                    recall: r / n,
                    f1: f1 / n,
                }
            };
            (
                mean(&|c: &Counts| c.mention_fractions()),
                mean(&|c: &Counts| c.pair_fractions()),
            )
        }
    };
    MetricReport {
        averaging,
        mention_id,
        alignment,
        answer_accuracy: None,
        counts,
    }
}

/// Task 1: the answer is given; score the predicted referential equalities.
pub fn evaluate_task1(
    gold: &CorpusDocument,
    preds: &[PredictionRecord],
    policy: &MatchPolicy,
) -> Result<MetricReport, Error> {
    let aligned = align(gold, preds)?;
    let scores: Vec<ExampleScore> = aligned
        .iter()
        .map(|(ex, pred)| {
            score_example(
                ex.explanation.as_ref(),
                pred.and_then(|p| p.predicted_explanation.as_ref()),
                policy,
            )
        })
        .collect();
    Ok(build_report(&scores, policy.averaging))
}

/// Task 2: answer and explanation are both predicted. Answer accuracy is the
/// share of examples whose predicted answer offsets equal the gold answer
/// offsets as sets.
pub fn evaluate_task2(
    gold: &CorpusDocument,
    preds: &[PredictionRecord],
    policy: &MatchPolicy,
) -> Result<MetricReport, Error> {
    let aligned = align(gold, preds)?;
    let mut report = evaluate_task1(gold, preds, policy)?;
    let mut correct = 0u64;
    for (ex, pred) in &aligned {
        let gold_set: BTreeSet<(usize, usize)> = ex
            .answer_annotations()
            .iter()
            .map(|a| a.answer_span.offsets())
            .collect();
        let pred_set: Option<BTreeSet<(usize, usize)>> = pred
            .and_then(|p| p.answer_spans())
            .map(|spans| spans.iter().map(|s| s.offsets()).collect());
        if pred_set.as_ref() == Some(&gold_set) {
            correct += 1;
        }
    }
    report.answer_accuracy = Some(
        Fraction::ratio(correct, aligned.len() as u64, aligned.len() as u64).percent(),
    );
    Ok(report)
}
