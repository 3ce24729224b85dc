//! Scores predictions against gold with both matching policies.
//!
//! With two arguments, reads gold and prediction files; otherwise scores a
//! hand-made system on the samples.

use qed_core::corpus::{read_corpus, read_predictions, CorpusDocument, PredictionRecord};
use qed_core::eval::{evaluate_task2, Averaging, MatchPolicy};
use qed_core::{samples, PassageMention, TextSpan};

fn demo() -> (CorpusDocument, Vec<PredictionRecord>) {
    let gold = CorpusDocument::new(samples::all(), "samples");
    let preds = gold
        .examples
        .iter()
        .filter_map(|ex| {
            let mut exp = ex.explanation.clone()?;
            if ex.id == "agt-season-11" {
                // title link in place of the gold implicit mention
                exp.equalities[0].passage_mention = PassageMention::TitleLink {
                    span: TextSpan::find(&ex.title, "America's Got Talent", 0)?,
                };
            }
            if ex.id == "wimbledon-2019" {
                exp.equalities.pop();
            }
            Some(PredictionRecord {
                example_id: ex.id.clone(),
                predicted_label: Some(ex.label),
                predicted_explanation: Some(exp),
                predicted_answer_spans: None,
            })
        })
        .collect();
    (gold, preds)
}

fn main() -> qed_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (gold, preds) = match args.as_slice() {
        [g, p] => (read_corpus(g)?, read_predictions(p)?.records),
        _ => demo(),
    };
    for (name, policy) in [
        ("title-equiv", MatchPolicy::default()),
        ("strict", MatchPolicy::strict()),
        ("macro", MatchPolicy { averaging: Averaging::Macro, ..MatchPolicy::default() }),
    ] {
        let report = evaluate_task2(&gold, &preds, &policy)?;
        print!("{}", report.to_table(name));
        println!();
    }
    Ok(())
}
