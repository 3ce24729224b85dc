//! Corpus statistics: label counts, the referential-link histogram, the
//! exact-match rate of equalities and a heuristic cross-tabulation of
//! expression types.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusDocument;
use crate::model::{ExplanationLabel, PassageMention, QedExample, ReferentialEquality, TextSpan};
use crate::text::{char_slice, normalize_text, tokenize};

/// Closed pronoun list used by [`classify_expression`].
pub const PRONOUNS: [&str; 17] = [
    "it", "its", "they", "their", "them", "he", "his", "him", "she", "her", "hers", "this",
    "that", "these", "those", "who", "which",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExpressionType {
    Proper,
    DefNonAnaphoric,
    DefAnaphoric,
    Generic,
    Pronoun,
    Bridge,
    Misc,
}

impl ExpressionType {
    pub const ALL: [ExpressionType; 7] = [
        ExpressionType::Proper,
        ExpressionType::DefNonAnaphoric,
        ExpressionType::DefAnaphoric,
        ExpressionType::Generic,
        ExpressionType::Pronoun,
        ExpressionType::Bridge,
        ExpressionType::Misc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn abbrev(self) -> &'static str {
        match self {
            Self::Proper => "P",
            Self::DefNonAnaphoric => "N",
            Self::DefAnaphoric => "A",
            Self::Generic => "G",
            Self::Pronoun => "Pn",
            Self::Bridge => "B",
            Self::Misc => "M",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Proper => "Proper",
            Self::DefNonAnaphoric => "Def.(Non-Ana)",
            Self::DefAnaphoric => "Def.(Ana)",
            Self::Generic => "Generic",
            Self::Pronoun => "Pronoun",
            Self::Bridge => "Bridge",
            Self::Misc => "Misc",
        }
    }
}

/// The expression being typed.
#[derive(Debug, Clone, Copy)]
pub enum Expression<'a> {
    Question(&'a TextSpan),
    Passage(&'a PassageMention),
}

/// Rule cascade, first match wins:
///
/// 1. implicit mentions and title links are `Bridge`;
/// 2. a surface in [`PRONOUNS`] is `Pronoun`;
/// 3. a leading "the" gives `DefAnaphoric` when the last word also occurs in
///    earlier passage text (before the mention, or before the selected
///    sentence for question phrases), otherwise `DefNonAnaphoric`;
/// 4. a capitalized last word, a phrase whose words all occur in the page
///    title, or a question phrase found in the passage with a capitalized
///    last word, is `Proper`;
/// 5. a leading "a"/"an", or a lower-case bare plural, is `Generic`;
/// 6. anything else is `Misc`.
pub fn classify_expression(expr: Expression<'_>, context: &QedExample) -> ExpressionType {
    let span = match expr {
        Expression::Question(span) => span,
        Expression::Passage(PassageMention::Explicit { span }) => span,
        Expression::Passage(_) => return ExpressionType::Bridge,
    };
    let surface = span.text.as_str();
    let normalized = normalize_text(surface);
    if PRONOUNS.contains(&normalized.as_str()) {
        return ExpressionType::Pronoun;
    }
    let raw_tokens = tokenize(surface);
    let words: Vec<String> = raw_tokens.iter().map(|t| normalize_text(&t.text)).collect();
    let Some(last) = words.last() else {
        return ExpressionType::Misc;
    };

    if words.len() > 1 && words[0] == "the" {
        let prior_end = match expr {
            Expression::Question(_) => context
                .explanation
                .as_ref()
                .map_or(0, |e| e.selected_sentence.span().start),
            Expression::Passage(_) => span.start,
        };
        let prior = char_slice(&context.passage, 0, prior_end).unwrap_or("");
        let seen: HashSet<String> = tokenize(prior).iter().map(|t| normalize_text(&t.text)).collect();
        return if seen.contains(last) {
            ExpressionType::DefAnaphoric
        } else {
            ExpressionType::DefNonAnaphoric
        };
    }

    let head = &raw_tokens[raw_tokens.len() - 1].text;
    let title_words: HashSet<String> = tokenize(&context.title)
        .iter()
        .map(|t| normalize_text(&t.text))
        .collect();
    let capitalized = |t: &str| t.chars().next().is_some_and(char::is_uppercase);
    let cased_in_passage = || {
        let passage = tokenize(&context.passage);
        passage.windows(words.len()).any(|w| {
            capitalized(&w[w.len() - 1].text)
                && w.iter().zip(&words).all(|(t, q)| normalize_text(&t.text) == *q)
        })
    };
    if capitalized(head)
        || (!title_words.is_empty() && words.iter().all(|w| title_words.contains(w)))
        || (matches!(expr, Expression::Question(_)) && cased_in_passage())
    {
        return ExpressionType::Proper;
    }

    let indefinite = words.len() > 1 && (words[0] == "a" || words[0] == "an");
    let bare_plural = head.chars().all(|c| c.is_lowercase())
        && last.len() > 3
        && last.ends_with('s')
        && !last.ends_with("ss");
    if indefinite || bare_plural {
        return ExpressionType::Generic;
    }
    ExpressionType::Misc
}

pub fn label_counts(corpus: &CorpusDocument) -> BTreeMap<ExplanationLabel, u64> {
    let mut counts: BTreeMap<ExplanationLabel, u64> =
        ExplanationLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for ex in &corpus.examples {
        *counts.entry(ex.label).or_default() += 1;
    }
    counts
}

fn explained(corpus: &CorpusDocument) -> impl Iterator<Item = &QedExample> {
    corpus
        .examples
        .iter()
        .filter(|ex| ex.label == ExplanationLabel::ValidExplanation)
}

/// Number of `valid_explanation` examples per equality count.
pub fn link_count_distribution(corpus: &CorpusDocument) -> BTreeMap<usize, u64> {
    let mut hist = BTreeMap::new();
    for ex in explained(corpus) {
        let n = ex.explanation.as_ref().map_or(0, |e| e.equalities.len());
        *hist.entry(n).or_default() += 1;
    }
    hist
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMatchCount {
    pub matches: u64,
    pub equalities: u64,
}

impl ExactMatchCount {
    pub fn rate(self) -> f64 {
        if self.equalities == 0 {
            0.0
        } else {
            self.matches as f64 / self.equalities as f64
        }
    }
}

/// Whether question and passage surfaces agree after normalization.
/// Implicit mentions never match.
pub fn is_exact_match(eq: &ReferentialEquality) -> bool {
    match &eq.passage_mention {
        PassageMention::Explicit { span } => {
            normalize_text(&eq.question_span.text) == normalize_text(&span.text)
        }
        _ => false,
    }
}

pub fn exact_match_counts(corpus: &CorpusDocument) -> ExactMatchCount {
    let mut c = ExactMatchCount::default();
    for ex in explained(corpus) {
        for eq in ex.explanation.iter().flat_map(|e| &e.equalities) {
            c.equalities += 1;
            c.matches += u64::from(is_exact_match(eq));
        }
    }
    c
}

pub fn exact_match_rate(corpus: &CorpusDocument) -> f64 {
    exact_match_counts(corpus).rate()
}

/// Question-side type (rows) against passage-side type (columns).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crosstab {
    pub cells: [[u64; 7]; 7],
}

impl Crosstab {
    pub fn add(&mut self, question: ExpressionType, passage: ExpressionType) {
        self.cells[question.index()][passage.index()] += 1;
    }

    pub fn row_total(&self, t: ExpressionType) -> u64 {
        self.cells[t.index()].iter().sum()
    }

    pub fn column_total(&self, t: ExpressionType) -> u64 {
        self.cells.iter().map(|row| row[t.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:14}", "Qu. \\ Ps.");
        for t in ExpressionType::ALL {
            let _ = write!(out, " {:>4}", t.abbrev());
        }
        let _ = writeln!(out, " {:>5}", "T");
        for q in ExpressionType::ALL {
            let _ = write!(out, "{:14}", q.name());
            for p in ExpressionType::ALL {
                let _ = write!(out, " {:>4}", self.cells[q.index()][p.index()]);
            }
            let _ = writeln!(out, " {:>5}", self.row_total(q));
        }
        let _ = write!(out, "{:14}", "Total");
        for p in ExpressionType::ALL {
            let _ = write!(out, " {:>4}", self.column_total(p));
        }
        let _ = writeln!(out, " {:>5}", self.total());
        out
    }
}

/// Types a seeded random sample of `sample_size` equalities (all of them if
/// the corpus has fewer).
pub fn expression_type_crosstab(corpus: &CorpusDocument, sample_size: usize, seed: u64) -> Crosstab {
    let mut pool: Vec<(&QedExample, &ReferentialEquality)> = explained(corpus)
        .flat_map(|ex| ex.explanation.iter().flat_map(move |e| e.equalities.iter().map(move |eq| (ex, eq))))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut tab = Crosstab::default();
    for (ex, eq) in pool.into_iter().take(sample_size) {
        tab.add(
            classify_expression(Expression::Question(&eq.question_span), ex),
            classify_expression(Expression::Passage(&eq.passage_mention), ex),
        );
    }
    tab
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub label_counts: BTreeMap<ExplanationLabel, u64>,
    pub link_histogram: BTreeMap<usize, u64>,
    pub exact_match: ExactMatchCount,
    pub exact_match_rate: f64,
    pub crosstab: Crosstab,
    pub sample_size: usize,
    pub seed: u64,
}

pub fn corpus_stats(corpus: &CorpusDocument, sample_size: usize, seed: u64) -> StatsReport {
    let exact_match = exact_match_counts(corpus);
    StatsReport {
        label_counts: label_counts(corpus),
        link_histogram: link_count_distribution(corpus),
        exact_match,
        exact_match_rate: exact_match.rate(),
        crosstab: expression_type_crosstab(corpus, sample_size, seed),
        sample_size,
        seed,
    }
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Labels");
        for (label, n) in &self.label_counts {
            let _ = writeln!(out, "{label} {n}");
        }
        let _ = writeln!(out, "\nReferential link count");
        let keys: Vec<_> = self.link_histogram.keys().collect();
        let _ = write!(out, "{:10}", "");
        for k in &keys {
            let _ = write!(out, " {:>6}", k);
        }
        let _ = write!(out, "\n{:10}", "Instances");
        for k in &keys {
            let _ = write!(out, " {:>6}", self.link_histogram[k]);
        }
        let _ = writeln!(
            out,
            "\n\nExact match {}/{} ({:.1}%)",
            self.exact_match.matches,
            self.exact_match.equalities,
            100.0 * self.exact_match_rate
        );
        let _ = writeln!(
            out,
            "\nExpression types (sample of {}, seed {})",
            self.crosstab.total(),
            self.seed
        );
        out.push_str(&self.crosstab.to_table());
        out
    }
}
