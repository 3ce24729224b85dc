//! Toolkit for QED explanations of question-answering examples.
//!
//! A QED explanation links a question to its answer through a single passage
//! sentence: question phrases are paired with the passage mentions they
//! refer to, and the answer is marked inside the sentence. This crate holds
//! the data model and validator, the line-delimited corpus codec, explanation
//! metrics, corpus statistics, a lexical baseline predictor and aggregation
//! of human rater studies.
//!
//! Runnable examples live in `crates/core/examples/`:
//!
//! ```bash
//! cargo run -p qed-core --example validate_corpus
//! cargo run -p qed-core --example entailment_patterns
//! cargo run -p qed-core --example evaluate_predictions
//! cargo run -p qed-core --example corpus_statistics
//! cargo run -p qed-core --example lexical_baseline
//! cargo run -p qed-core --example rater_study
//! cargo run -p qed-core --example import_released
//! ```

pub mod analysis;
pub mod baseline;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod pattern;
pub mod rater;
pub mod samples;
pub mod text;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    resolve_answer, AnswerAnnotation, Explanation, ExplanationLabel, PassageMention, Preposition,
    QedExample, ReferentialEquality, SentenceSpan, TextSpan,
};
pub use pattern::{extract_pattern, EntailmentPattern};
pub use text::normalize_text;
pub use validate::{validate_example, ValidationReport, Validator, Violation, ViolationCode};
