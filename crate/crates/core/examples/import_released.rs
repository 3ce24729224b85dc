//! Converts the released JSONL format into the canonical corpus format.
//!
//! ```bash
//! cargo run -p qed-core --example import_released -- qed-dev.jsonlines > dev.jsonl
//! ```

use std::fs::File;
use std::io::{self, BufReader};

use qed_core::corpus::{import_released, import_released_line, write_examples};

const RELEASED: &str = r#"{"example_id": 42, "title_text": "Wimbledon 2019", "url": "https://en.wikipedia.org/wiki/2019_Wimbledon_Championships", "question_text": "who won wimbledon in 2019", "paragraph_text": "Simona Halep won the women's title. She beat Serena Williams.", "sentence_starts": [0, 36], "original_nq_answers": [[{"start": 0, "end": 12, "string": "Simona Halep"}]], "annotation": {"explanation_type": "single_sentence", "selected_sentence": {"start": 0, "end": 35, "string": "Simona Halep won the women's title."}, "answer": [{"sentence_reference": {"start": 0, "end": 12, "bridge": false, "string": "Simona Halep"}, "paragraph_reference": {"start": 0, "end": 12, "string": "Simona Halep"}}], "referential_equalities": [{"question_reference": {"start": 8, "end": 17, "string": "wimbledon"}, "sentence_reference": {"start": 0, "end": 0, "bridge": "at", "string": ""}}]}}"#;

fn main() -> qed_core::Result<()> {
    let stdout = io::stdout().lock();
    match std::env::args().nth(1) {
        Some(path) => {
            let doc = import_released(BufReader::new(File::open(path)?), "released")?;
            for e in &doc.parse_errors {
                eprintln!("line {}: {}", e.line, e.message);
            }
            write_examples(stdout, &doc.examples)?;
        }
        None => {
            let ex = import_released_line(RELEASED).map_err(qed_core::Error::InvalidExample)?;
            write_examples(stdout, [&ex])?;
        }
    }
    Ok(())
}
