//! Extracts question and sentence templates from the annotated samples.

use qed_core::{extract_pattern, samples};

fn main() {
    for ex in samples::all() {
        let pattern = match extract_pattern(&ex) {
            Ok(p) => p,
            Err(e) => {
                println!("{:<28} {}", ex.id, e.code());
                continue;
            }
        };
        println!("{}", ex.id);
        println!("  question: {}", pattern.question_template);
        println!("  sentence: {}", pattern.sentence_template);
        for slot in &pattern.slots {
            println!(
                "  X{} = {:?} ({}{})",
                slot.index,
                slot.question_text,
                slot.mention_kind,
                if slot.possessive { ", possessive" } else { "" }
            );
        }
        println!("  answer: {}", pattern.answers.join(" | "));
        let (q, s) = pattern.reinsert();
        assert_eq!(q, ex.question);
        assert_eq!(&s, &ex.explanation.as_ref().unwrap().selected_sentence.0.text);
    }
}
