//! Label counts, link-count histogram, exact-match rate and the expression
//! type cross-tabulation for a corpus (samples by default).

use qed_core::analysis::{classify_expression, corpus_stats, Expression};
use qed_core::corpus::{read_corpus, CorpusDocument};
use qed_core::samples;

fn main() -> qed_core::Result<()> {
    let doc = match std::env::args().nth(1) {
        Some(path) => read_corpus(path)?,
        None => CorpusDocument::new(samples::all(), "samples"),
    };
    print!("{}", corpus_stats(&doc, 100, 0).to_text());

    println!("\nPer-equality types");
    for ex in &doc.examples {
        for eq in ex.explanation.iter().flat_map(|e| &e.equalities) {
            let q = classify_expression(Expression::Question(&eq.question_span), ex);
            let p = classify_expression(Expression::Passage(&eq.passage_mention), ex);
            println!(
                "  {:<36} {:<4} {:<28} {}",
                eq.question_span.text,
                q.abbrev(),
                eq.passage_mention.surface().unwrap_or("(implicit)"),
                p.abbrev()
            );
        }
    }
    Ok(())
}
