//! Aggregates a judgment log (simulated unless a path is given).

use std::fs::File;
use std::io::BufReader;

use qed_core::rater::{
    aggregate_judgments, aggregate_judgments_with, read_log, Condition, ErrorType, JudgmentRecord,
    Weighting,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Simulated raters who spot wrong answers more often when shown more.
fn simulate() -> Vec<JudgmentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut log = Vec::new();
    for (r, condition) in Condition::ALL.iter().cycle().take(30).enumerate() {
        let catch = match condition {
            Condition::None => 0.45,
            Condition::Sentence => 0.5,
            Condition::Qed => 0.55,
        };
        for i in 0..40 {
            let correct = i % 2 == 0;
            let error_type = (!correct).then_some(if i % 3 == 0 { ErrorType::Ref } else { ErrorType::Pred });
            let verdict = if correct { rng.random_bool(0.9) } else { !rng.random_bool(catch) };
            log.push(JudgmentRecord {
                rater_id: format!("rater-{r:02}"),
                instance_id: format!("q{i:02}"),
                condition: *condition,
                instance_correct: correct,
                error_type,
                verdict,
                confidence: Some(rng.random_range(1..=5)),
            });
        }
    }
    log
}

fn main() -> qed_core::Result<()> {
    let log = match std::env::args().nth(1) {
        Some(path) => read_log(BufReader::new(File::open(path)?))?,
        None => simulate(),
    };
    let report = aggregate_judgments(&log)?;
    println!("judgment-weighted\n{report}");
    println!("rater-weighted\n{}", aggregate_judgments_with(&log, Weighting::Rater)?);

    if let Some(qed) = report.condition(Condition::Qed) {
        println!("hardest questions under QED");
        for q in qed.questions.iter().take(5) {
            println!("  {} {:.2} [{:.3}, {:.3}] n={}", q.instance_id, q.accuracy, q.ci_low, q.ci_high, q.judgments);
        }
    }
    Ok(())
}
