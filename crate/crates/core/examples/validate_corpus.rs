//! Validates a JSONL corpus, or the bundled samples when no path is given.
//!
//! ```bash
//! cargo run -p qed-core --example validate_corpus -- data/dev.jsonl
//! ```

use qed_core::corpus::{read_corpus, CorpusDocument};
use qed_core::validate::Validator;
use qed_core::{samples, PassageMention, Preposition};

fn main() -> qed_core::Result<()> {
    let doc = match std::env::args().nth(1) {
        Some(path) => read_corpus(path)?,
        None => {
            // one broken example so there is something to report
            let mut bad = samples::world_series();
            bad.id = "world-series-broken".into();
            bad.explanation.as_mut().unwrap().equalities[1].passage_mention =
                PassageMention::ImplicitSentence { prep: Preposition::new("atop") };
            let mut examples = samples::all();
            examples.push(bad);
            CorpusDocument::new(examples, "samples")
        }
    };

    for err in &doc.parse_errors {
        println!("line {}: {}", err.line, err.message);
    }
    let validator = Validator::default();
    let mut failing = 0;
    for (i, report) in validator.validate_corpus(&doc.examples) {
        if report.is_empty() {
            continue;
        }
        failing += usize::from(!report.is_valid());
        for v in &report.violations {
            println!("{}\t{}\t{}\t{}", doc.examples[i].id, v.code.as_str(), v.field, v.message);
        }
    }
    println!(
        "{} examples, {} with errors, {} unparsable lines",
        doc.examples.len(),
        failing,
        doc.parse_errors.len()
    );
    Ok(())
}
