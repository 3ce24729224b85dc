//! Inter-annotator agreement over corpora annotated on a shared id set.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{score_example, Counts, Fraction, MatchPolicy};
use crate::corpus::CorpusDocument;
use crate::error::Error;
use crate::model::{ExplanationLabel, QedExample};

fn by_id(doc: &CorpusDocument) -> Result<HashMap<&str, &QedExample>, Error> {
    doc.index()
}

fn same_ids<'a>(
    a: &HashMap<&'a str, &'a QedExample>,
    b: &HashMap<&'a str, &'a QedExample>,
) -> Result<BTreeSet<&'a str>, Error> {
    let ka: BTreeSet<&str> = a.keys().copied().collect();
    let kb: BTreeSet<&str> = b.keys().copied().collect();
    if ka != kb {
        let missing: Vec<_> = ka.symmetric_difference(&kb).take(5).copied().collect();
        return Err(Error::IdMismatch(format!("ids not shared: {}", missing.join(", "))));
    }
    Ok(ka)
}

/// Percentage of ids whose labels agree between two annotations of the same
/// examples. An empty id set agrees trivially.
pub fn classification_accuracy(a: &CorpusDocument, b: &CorpusDocument) -> Result<f64, Error> {
    let (ia, ib) = (by_id(a)?, by_id(b)?);
    let ids = same_ids(&ia, &ib)?;
    let agree = ids.iter().filter(|id| ia[*id].label == ib[*id].label).count() as u64;
    Ok(Fraction::ratio(agree, ids.len() as u64, ids.len() as u64).percent())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub first: usize,
    pub second: usize,
    pub classification_accuracy: f64,
    /// Ids both annotators labelled `valid_explanation`.
    pub shared_valid: usize,
    pub identification_f1: f64,
    pub alignment_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub pairs: Vec<PairAgreement>,
    pub mean_classification_accuracy: f64,
    pub mean_identification_f1: f64,
    pub mean_alignment_f1: f64,
}

/// Agreement for every unordered pair of annotators. Mention F1 values are
/// pooled over the ids both annotators consider explainable; with exact
/// matching F1 does not depend on which side is taken as reference.
pub fn pairwise_agreement(
    annotators: &[CorpusDocument],
    policy: &MatchPolicy,
) -> Result<AgreementReport, Error> {
    if annotators.len() < 2 {
        return Err(Error::Usage("agreement needs at least two annotators".into()));
    }
    let indexes = annotators.iter().map(by_id).collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::new();
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            let (a, b) = (&indexes[i], &indexes[j]);
            let ids = same_ids(a, b)?;
            let agree = ids.iter().filter(|id| a[*id].label == b[*id].label).count() as u64;
            let mut counts = Counts::default();
            let mut shared_valid = 0;
            for id in &ids {
                let (x, y) = (a[*id], b[*id]);
                if x.label == ExplanationLabel::ValidExplanation
                    && y.label == ExplanationLabel::ValidExplanation
                {
                    shared_valid += 1;
                    counts += score_example(x.explanation.as_ref(), y.explanation.as_ref(), policy)
                        .counts;
                }
            }
            pairs.push(PairAgreement {
                first: i,
                second: j,
                classification_accuracy: Fraction::ratio(agree, ids.len() as u64, ids.len() as u64)
                    .percent(),
                shared_valid,
                identification_f1: counts.mention_fractions().f1.percent(),
                alignment_f1: counts.pair_fractions().f1.percent(),
            });
        }
    }
    let n = pairs.len() as f64;
    let mean = |f: fn(&PairAgreement) -> f64| pairs.iter().map(f).sum::<f64>() / n;
    Ok(AgreementReport {
        mean_classification_accuracy: mean(|p| p.classification_accuracy),
        mean_identification_f1: mean(|p| p.identification_f1),
        mean_alignment_f1: mean(|p| p.alignment_f1),
        pairs,
    })
}
