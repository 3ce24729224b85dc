//! Generators and brute-force oracles shared by the integration tests. The
//! oracles deliberately avoid the library's scoring and aggregation code.

#![allow(dead_code)]

use num_rational::Ratio;
use qed_core::corpus::{CorpusDocument, PredictionRecord};
use qed_core::model::{
    AnswerAnnotation, Explanation, ExplanationLabel, PassageMention, Preposition, QedExample,
    ReferentialEquality, SentenceSpan, TextSpan,
};
use qed_core::rater::{Condition, ErrorType, JudgmentRecord};
use rand::seq::IndexedRandom;
use rand::Rng;

pub type Q = Ratio<u128>;

// ---------------------------------------------------------------------------
// random explanation instances

const QUESTION: &str = "abcdefghijklmnopqrstuvwxyz0123";
const PASSAGE: &str = "the quick brown fox jumps over the lazy dog while \
                       seven wizards hex five jolly boxing kangaroos nearby";
const TITLE: &str = "Some Article Title";

const Q_RANGES: [(usize, usize); 6] = [(0, 3), (0, 5), (4, 9), (10, 14), (10, 12), (15, 20)];
const P_RANGES: [(usize, usize); 6] = [(0, 3), (4, 9), (4, 15), (20, 25), (31, 39), (40, 43)];
const ANCHORS: [(usize, usize); 2] = [(4, 9), (50, 55)];
const TITLE_RANGES: [(usize, usize); 2] = [(0, 4), (0, 12)];
const PREPS: [&str; 3] = ["of", "in", "at"];
const ANSWERS: [(usize, usize); 3] = [(56, 63), (68, 72), (73, 78)];

fn span(host: &str, (s, e): (usize, usize)) -> TextSpan {
    TextSpan::from_host(host, s, e).expect("pool range inside host")
}

fn random_mention<R: Rng>(rng: &mut R) -> PassageMention {
    match rng.random_range(0..20) {
        0..=9 => PassageMention::explicit(span(PASSAGE, *P_RANGES.choose(rng).unwrap())),
        10..=13 => PassageMention::ImplicitPhrase {
            anchor: span(PASSAGE, *ANCHORS.choose(rng).unwrap()),
            prep: Preposition::new(*PREPS.choose(rng).unwrap()),
        },
        14..=16 => PassageMention::ImplicitSentence {
            prep: Preposition::new(*PREPS.choose(rng).unwrap()),
        },
        _ => PassageMention::TitleLink {
            span: span(TITLE, *TITLE_RANGES.choose(rng).unwrap()),
        },
    }
}

fn random_equality<R: Rng>(rng: &mut R) -> ReferentialEquality {
    ReferentialEquality::new(span(QUESTION, *Q_RANGES.choose(rng).unwrap()), random_mention(rng))
}

fn random_answers<R: Rng>(rng: &mut R) -> Vec<AnswerAnnotation> {
    let n = rng.random_range(1..=2);
    let mut ranges: Vec<_> = ANSWERS.choose_multiple(rng, n).copied().collect();
    ranges.sort();
    ranges.into_iter().map(|r| AnswerAnnotation::direct(span(PASSAGE, r))).collect()
}

fn random_explanation<R: Rng>(rng: &mut R) -> Explanation {
    let n = rng.random_range(0..=4);
    Explanation {
        selected_sentence: SentenceSpan(span(PASSAGE, (0, PASSAGE.chars().count()))),
        equalities: (0..n).map(|_| random_equality(rng)).collect(),
        answers: random_answers(rng),
    }
}

/// A prediction near `gold`: equalities dropped, replaced or added.
fn perturbed<R: Rng>(rng: &mut R, gold: &Explanation) -> Explanation {
    let mut out = gold.clone();
    out.equalities.retain(|_| rng.random_bool(0.7));
    for eq in &mut out.equalities {
        if rng.random_bool(0.2) {
            eq.passage_mention = random_mention(rng);
        }
    }
    while out.equalities.len() < 4 && rng.random_bool(0.3) {
        out.equalities.push(random_equality(rng));
    }
    if rng.random_bool(0.3) {
        out.answers = random_answers(rng);
    }
    out
}

/// One scoring instance: a small gold corpus and a prediction list.
pub fn random_instance<R: Rng>(rng: &mut R, tag: usize) -> (CorpusDocument, Vec<PredictionRecord>) {
    let n = rng.random_range(1..=5);
    let mut gold = Vec::new();
    let mut preds = Vec::new();
    for k in 0..n {
        let id = format!("ex-{tag}-{k}");
        let mut ex = QedExample {
            id: id.clone(),
            title: TITLE.into(),
            url: None,
            question: QUESTION.into(),
            passage: PASSAGE.into(),
            sentence_boundaries: vec![span(PASSAGE, (0, PASSAGE.chars().count()))],
            label: ExplanationLabel::ValidExplanation,
            explanation: None,
            answers: Vec::new(),
        };
        if rng.random_bool(0.15) {
            ex.label = ExplanationLabel::AnswerOnly;
            ex.answers = random_answers(rng);
        } else {
            ex.explanation = Some(random_explanation(rng));
        }
        let pred = match rng.random_range(0..20) {
            0..=1 => None,
            2 => Some(PredictionRecord::label_only(&id, ExplanationLabel::NoAnswer)),
            r => {
                let exp = match (&ex.explanation, r % 2) {
                    (Some(g), 0) => perturbed(rng, g),
                    _ => random_explanation(rng),
                };
                let answers = rng.random_bool(0.2).then(|| {
                    random_answers(rng).into_iter().map(|a| a.answer_span).collect()
                });
                Some(PredictionRecord {
                    example_id: id.clone(),
                    predicted_label: Some(ExplanationLabel::ValidExplanation),
                    predicted_explanation: Some(exp),
                    predicted_answer_spans: answers,
                })
            }
        };
        gold.push(ex);
        preds.extend(pred);
    }
    (CorpusDocument::new(gold, "random"), preds)
}

// ---------------------------------------------------------------------------
// scoring oracle

fn question_key(s: &TextSpan) -> String {
    format!("Q:{}-{}", s.start, s.end)
}

fn passage_key(m: &PassageMention) -> String {
    match m {
        PassageMention::Explicit { span } => format!("P:E:{}-{}", span.start, span.end),
        PassageMention::ImplicitPhrase { anchor, prep } => {
            format!("P:IP:{}-{}:{}", anchor.start, anchor.end, prep.as_str())
        }
        PassageMention::ImplicitSentence { prep } => format!("P:IS:{}", prep.as_str()),
        PassageMention::TitleLink { span } => format!("P:T:{}-{}", span.start, span.end),
    }
}

fn hits(gold: &str, pred: &str, title_equiv: bool) -> bool {
    gold == pred
        || (title_equiv
            && pred.starts_with("P:T:")
            && (gold.starts_with("P:IP:") || gold.starts_with("P:IS:")))
}

fn uniq(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v.dedup();
    v
}

fn mentions(e: Option<&Explanation>) -> Vec<String> {
    let mut out = Vec::new();
    for eq in e.iter().flat_map(|e| &e.equalities) {
        out.push(question_key(&eq.question_span));
        out.push(passage_key(&eq.passage_mention));
    }
    uniq(out)
}

fn pairs(e: Option<&Explanation>) -> Vec<String> {
    uniq(
        e.iter()
            .flat_map(|e| &e.equalities)
            .map(|eq| format!("{}|{}", question_key(&eq.question_span), passage_key(&eq.passage_mention)))
            .collect(),
    )
}

fn pair_hits(gold: &str, pred: &str, title_equiv: bool) -> bool {
    let (gq, gp) = gold.split_once('|').unwrap();
    let (pq, pp) = pred.split_once('|').unwrap();
    gq == pq && hits(gp, pp, title_equiv)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub gold: u64,
    pub pred: u64,
    pub matched_pred: u64,
    pub matched_gold: u64,
}

impl Tally {
    fn of(gold: &[String], pred: &[String], hit: impl Fn(&str, &str) -> bool) -> Self {
        let mut t = Tally {
            gold: gold.len() as u64,
            pred: pred.len() as u64,
            ..Tally::default()
        };
        for p in pred {
            if gold.iter().any(|g| hit(g, p)) {
                t.matched_pred += 1;
            }
        }
        for g in gold {
            if pred.iter().any(|p| hit(g, p)) {
                t.matched_gold += 1;
            }
        }
        t
    }

    fn add(&mut self, o: Tally) {
        self.gold += o.gold;
        self.pred += o.pred;
        self.matched_pred += o.matched_pred;
        self.matched_gold += o.matched_gold;
    }

    /// Exact precision, recall, F1.
    pub fn prf(&self) -> (Q, Q, Q) {
        let frac = |num: u64, den: u64, other: u64| -> Q {
            if den == 0 {
                Q::from_integer(if other == 0 { 1 } else { 0 })
            } else {
                Q::new(num as u128, den as u128)
            }
        };
        let p = frac(self.matched_pred, self.pred, self.gold);
        let r = frac(self.matched_gold, self.gold, self.pred);
        let zero = Q::from_integer(0);
        let f = if p + r == zero {
            zero
        } else {
            Q::from_integer(2) * p * r / (p + r)
        };
        (p, r, f)
    }
}

pub fn pct(q: Q) -> f64 {
    100.0 * (*q.numer() as f64 / *q.denom() as f64)
}

#[derive(Debug, Clone, Default)]
pub struct OracleScores {
    pub mentions: Tally,
    pub pairs: Tally,
    pub per_example: Vec<(Tally, Tally)>,
    pub answers_correct: u64,
}

impl OracleScores {
    pub fn macro_prf(&self, pick: impl Fn(&(Tally, Tally)) -> Tally) -> (f64, f64, f64) {
        let n = self.per_example.len().max(1) as f64;
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for e in &self.per_example {
            let (a, b, c) = pick(e).prf();
            p += pct(a);
            r += pct(b);
            f += pct(c);
        }
        (p / n, r / n, f / n)
    }
}

/// Brute-force scores over the `valid_explanation` gold examples.
pub fn oracle_scores(gold: &CorpusDocument, preds: &[PredictionRecord], title_equiv: bool) -> OracleScores {
    let mut out = OracleScores::default();
    for ex in gold.examples.iter().filter(|e| e.label == ExplanationLabel::ValidExplanation) {
        let pred = preds.iter().find(|p| p.example_id == ex.id);
        let pe = pred.and_then(|p| p.predicted_explanation.as_ref());
        let ge = ex.explanation.as_ref();
        let m = Tally::of(&mentions(ge), &mentions(pe), |g, p| hits(g, p, title_equiv));
        let a = Tally::of(&pairs(ge), &pairs(pe), |g, p| pair_hits(g, p, title_equiv));
        out.mentions.add(m);
        out.pairs.add(a);
        out.per_example.push((m, a));

        let mut gold_answers: Vec<(usize, usize)> =
            ge.unwrap().answers.iter().map(|a| (a.answer_span.start, a.answer_span.end)).collect();
        gold_answers.sort();
        gold_answers.dedup();
        let pred_answers: Option<Vec<(usize, usize)>> = pred.and_then(|p| {
            let spans: Vec<&TextSpan> = match (&p.predicted_answer_spans, pe) {
                (Some(s), _) => s.iter().collect(),
                (None, Some(e)) if !e.answers.is_empty() => e.answers.iter().map(|a| &a.answer_span).collect(),
                _ => return None,
            };
            let mut v: Vec<_> = spans.iter().map(|s| (s.start, s.end)).collect();
            v.sort();
            v.dedup();
            Some(v)
        });
        if pred_answers.as_ref() == Some(&gold_answers) {
            out.answers_correct += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// judgment logs

/// A random log over `raters` x `instances` with each pair judged at most once.
pub fn random_log<R: Rng>(rng: &mut R, raters: usize, instances: usize) -> Vec<JudgmentRecord> {
    let truth: Vec<(bool, Option<ErrorType>)> = (0..instances)
        .map(|_| {
            if rng.random_bool(0.5) {
                (true, None)
            } else if rng.random_bool(0.6) {
                (false, Some(ErrorType::Pred))
            } else {
                (false, Some(ErrorType::Ref))
            }
        })
        .collect();
    let mut log = Vec::new();
    for r in 0..raters {
        let condition = *Condition::ALL.choose(rng).unwrap();
        for (i, &(correct, error_type)) in truth.iter().enumerate() {
            if rng.random_bool(0.6) {
                log.push(JudgmentRecord {
                    rater_id: format!("r{r}"),
                    instance_id: format!("q{i:02}"),
                    condition,
                    instance_correct: correct,
                    error_type,
                    verdict: rng.random_bool(if correct { 0.8 } else { 0.45 }),
                    confidence: rng.random_bool(0.5).then(|| rng.random_range(1..=5)),
                });
            }
        }
    }
    if log.is_empty() {
        log.push(JudgmentRecord {
            rater_id: "r0".into(),
            instance_id: "q00".into(),
            condition: Condition::None,
            instance_correct: truth[0].0,
            error_type: truth[0].1,
            verdict: true,
            confidence: None,
        });
    }
    log
}

/// Wilson bounds as the roots of `(1 + z²/n) p² - (2p̂ + z²/n) p + p̂² = 0`.
pub fn wilson_roots(successes: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let ph = successes as f64 / n;
    let a = 1.0 + Z * Z / n;
    let b = -(2.0 * ph + Z * Z / n);
    let c = ph * ph;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    (((-b - disc) / (2.0 * a)).max(0.0), ((-b + disc) / (2.0 * a)).min(1.0))
}

// ---------------------------------------------------------------------------
// fixture corpora

/// The sample fixtures plus a title-link example and a multi-answer example,
/// covering every mention variant and label.
pub fn codec_fixtures() -> Vec<QedExample> {
    use qed_core::samples::{self, p, sentence_with, unannotated};
    let mut out = samples::all();

    let mut title = samples::americas_got_talent();
    title.id = "agt-title-link".into();
    title.explanation.as_mut().unwrap().equalities[0].passage_mention = PassageMention::TitleLink {
        span: TextSpan::find(&title.title, "America's Got Talent", 0).unwrap(),
    };
    out.push(title);

    let mut multi = unannotated(
        "beatles-members",
        "The Beatles",
        "who were the members of the beatles",
        "The Beatles were an English rock band formed in Liverpool in 1960. The group's best-known \
         line-up comprised John Lennon, Paul McCartney, George Harrison and Ringo Starr.",
    );
    let sentence = sentence_with(&multi, "John Lennon");
    let answers = ["John Lennon", "Paul McCartney", "George Harrison", "Ringo Starr"]
        .iter()
        .map(|a| AnswerAnnotation::direct(p(&multi, a)))
        .collect();
    let eq = ReferentialEquality::new(
        samples::q(&multi, "the beatles"),
        PassageMention::explicit(TextSpan::find(&multi.passage, "The group", 0).unwrap()),
    );
    multi.label = ExplanationLabel::ValidExplanation;
    multi.explanation = Some(Explanation {
        selected_sentence: sentence,
        equalities: vec![eq],
        answers,
    });
    out.push(multi);
    out
}

/// Known composition of [`synthetic_corpus`].
pub struct SyntheticPlan {
    pub valid: u64,
    pub answer_only: u64,
    pub no_answer: u64,
    /// Every `exact_every`-th equality (by global index) copies the question text.
    pub exact_every: usize,
}

pub const SYNTHETIC_PLAN: SyntheticPlan = SyntheticPlan {
    valid: 680,
    answer_only: 200,
    no_answer: 120,
    exact_every: 8,
};

/// `(links, examples)` for the valid examples of [`synthetic_corpus`].
pub const HISTOGRAM: [(usize, u64); 4] = [(1, 340), (2, 204), (3, 102), (4, 34)];

const WORDS: [&str; 12] = [
    "river", "castle", "album", "season", "stadium", "anthem", "novel", "bridge", "island",
    "treaty", "planet", "opera",
];

/// A 1000-example corpus built from [`SYNTHETIC_PLAN`] and [`HISTOGRAM`].
pub fn synthetic_corpus() -> Vec<QedExample> {
    use qed_core::samples::unannotated;
    let mut out = Vec::new();
    let mut eq_index = 0usize;
    let mut n = 0usize;
    for &(links, count) in &HISTOGRAM {
        for _ in 0..count {
            let topics: Vec<&str> = (0..links).map(|k| WORDS[(n + k) % WORDS.len()]).collect();
            let question = format!("what about {}", topics.iter().map(|t| format!("the {t}")).collect::<Vec<_>>().join(" and "));
            let mut mentions = Vec::new();
            for t in &topics {
                let exact = eq_index.is_multiple_of(SYNTHETIC_PLAN.exact_every);
                mentions.push(if exact { format!("the {t}") } else { format!("that {t}") });
                eq_index += 1;
            }
            let passage = format!("Intro line {n}. In {} the value was {}.", mentions.join(" and "), 1000 + n);
            let mut ex = unannotated(&format!("syn-{n:04}"), "Synthetic", &question, &passage);
            let sentence = qed_core::samples::sentence_with(&ex, "the value");
            let mut equalities = Vec::new();
            let mut q_from = 0;
            let mut p_from = 0;
            for (t, m) in topics.iter().zip(&mentions) {
                let qs = nth_after(&ex.question, &format!("the {t}"), q_from);
                q_from = qs.end;
                let ps = nth_after(&ex.passage, m, p_from.max(sentence.0.start));
                p_from = ps.end;
                equalities.push(ReferentialEquality::new(qs, PassageMention::explicit(ps)));
            }
            let answer = qed_core::samples::p(&ex, &(1000 + n).to_string());
            ex.label = ExplanationLabel::ValidExplanation;
            ex.explanation = Some(Explanation {
                selected_sentence: sentence,
                equalities,
                answers: vec![AnswerAnnotation::direct(answer)],
            });
            out.push(ex);
            n += 1;
        }
    }
    for k in 0..SYNTHETIC_PLAN.answer_only {
        let mut ex = unannotated(
            &format!("syn-{n:04}"),
            "Synthetic",
            "where is it",
            &format!("It started in one place. It moved to Town{k} later."),
        );
        ex.answers = vec![AnswerAnnotation::direct(qed_core::samples::p(&ex, &format!("Town{k}")))];
        out.push(ex);
        n += 1;
    }
    for _ in 0..SYNTHETIC_PLAN.no_answer {
        let mut ex = unannotated(&format!("syn-{n:04}"), "Synthetic", "who knows", "Nothing to see here.");
        ex.label = ExplanationLabel::NoAnswer;
        out.push(ex);
        n += 1;
    }
    out
}

/// First occurrence of `needle` in `host` at or after code point `from`.
fn nth_after(host: &str, needle: &str, from: usize) -> TextSpan {
    (0..)
        .map_while(|k| TextSpan::find(host, needle, k))
        .find(|s| s.start >= from)
        .unwrap_or_else(|| panic!("{needle:?} not found after {from} in {host:?}"))
}
