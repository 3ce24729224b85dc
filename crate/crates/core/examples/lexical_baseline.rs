//! Runs the lexical baseline on the samples and scores it.

use qed_core::baseline::{predict_corpus, BaselineConfig};
use qed_core::corpus::CorpusDocument;
use qed_core::eval::{evaluate_task1, MatchPolicy};
use qed_core::samples;

fn main() -> qed_core::Result<()> {
    let gold = CorpusDocument::new(samples::all(), "samples");
    let preds = predict_corpus(&gold.examples, &BaselineConfig::default());
    for pred in &preds {
        let exp = pred.predicted_explanation.as_ref().unwrap();
        let pairs: Vec<String> = exp
            .equalities
            .iter()
            .map(|e| format!("{:?}={:?}", e.question_span.text, e.passage_mention.surface().unwrap_or("")))
            .collect();
        println!("{:<28} {}", pred.example_id, pairs.join(", "));
    }
    println!();
    print!("{}", evaluate_task1(&gold, &preds, &MatchPolicy::default())?.to_table("lexical"));
    Ok(())
}
