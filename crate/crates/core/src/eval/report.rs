use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

/// Non-negative rational with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u128,
    pub den: u128,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    /// `matched / total`, with the zero-denominator convention: 1 when the
    /// other set is empty too, 0 otherwise.
    pub fn ratio(matched: u64, total: u64, other_total: u64) -> Self {
        match (total, other_total) {
            (0, 0) => Self::ONE,
            (0, _) => Self::ZERO,
            _ => Self {
                num: matched as u128,
                den: total as u128,
            },
        }
    }

    /// Harmonic mean `2pr / (p + r)`, zero when both are zero.
    pub fn harmonic(p: Fraction, r: Fraction) -> Self {
        let num = 2 * p.num * r.num;
        let den = p.num * r.den + r.num * p.den;
        if num == 0 {
            Self::ZERO
        } else {
            Self { num, den }
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn percent(self) -> f64 {
        100.0 * self.value()
    }

    /// Reduced to lowest terms.
    pub fn reduced(self) -> Self {
        fn gcd(mut a: u128, mut b: u128) -> u128 {
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a
        }
        let g = gcd(self.num, self.den).max(1);
        Self {
            num: self.num / g,
            den: self.den / g,
        }
    }
}

/// Precision, recall and F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_fractions(p: Fraction, r: Fraction) -> Self {
        Self {
            precision: p.percent(),
            recall: r.percent(),
            f1: Fraction::harmonic(p, r).percent(),
        }
    }

    /// From already-computed percentages; F1 is derived from `p` and `r`.
    pub fn from_percentages(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Exact micro-averaged fractions behind a [`Prf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPrf {
    pub precision: Fraction,
    pub recall: Fraction,
    pub f1: Fraction,
}

impl ExactPrf {
    pub fn new(precision: Fraction, recall: Fraction) -> Self {
        Self {
            precision,
            recall,
            f1: Fraction::harmonic(precision, recall),
        }
    }
}

/// Raw match counts. `matched_pred_*` counts predictions with a compatible
/// gold item; `matched_gold_*` counts gold items with a compatible
/// prediction. The two coincide under exact matching.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub gold_mentions: u64,
    pub pred_mentions: u64,
    pub matched_pred_mentions: u64,
    pub matched_gold_mentions: u64,
    pub gold_pairs: u64,
    pub pred_pairs: u64,
    pub matched_pred_pairs: u64,
    pub matched_gold_pairs: u64,
    pub examples: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.gold_mentions += o.gold_mentions;
        self.pred_mentions += o.pred_mentions;
        self.matched_pred_mentions += o.matched_pred_mentions;
        self.matched_gold_mentions += o.matched_gold_mentions;
        self.gold_pairs += o.gold_pairs;
        self.pred_pairs += o.pred_pairs;
        self.matched_pred_pairs += o.matched_pred_pairs;
        self.matched_gold_pairs += o.matched_gold_pairs;
        self.examples += o.examples;
    }
}

impl Counts {
    pub fn mention_fractions(&self) -> ExactPrf {
        ExactPrf::new(
            Fraction::ratio(self.matched_pred_mentions, self.pred_mentions, self.gold_mentions),
            Fraction::ratio(self.matched_gold_mentions, self.gold_mentions, self.pred_mentions),
        )
    }

    pub fn pair_fractions(&self) -> ExactPrf {
        ExactPrf::new(
            Fraction::ratio(self.matched_pred_pairs, self.pred_pairs, self.gold_pairs),
            Fraction::ratio(self.matched_gold_pairs, self.gold_pairs, self.pred_pairs),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Pool counts over the corpus, then divide.
    #[default]
    Micro,
    /// Average per-example scores.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub averaging: Averaging,
    pub mention_id: Prf,
    pub alignment: Prf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer_accuracy: Option<f64>,
    pub counts: Counts,
}

impl MetricReport {
    /// Aligned text table with one row for `system`.
    pub fn to_table(&self, system: &str) -> String {
        let mut out = String::new();
        let width = system.len().max(6);
        let answer = self.answer_accuracy.is_some();
        let _ = write!(
            out,
            "{:width$}  {:^20}  {:^20}",
            "", "Mention Ident.", "Mention Align."
        );
        if answer {
            let _ = write!(out, "  {:>6}", "Answer");
        }
        out.push('\n');
        let _ = write!(
            out,
            "{:width$}  {:>6} {:>6} {:>6}  {:>6} {:>6} {:>6}",
            "System", "P", "R", "F1", "P", "R", "F1"
        );
        if answer {
            let _ = write!(out, "  {:>6}", "Acc");
        }
        out.push('\n');
        let m = &self.mention_id;
        let a = &self.alignment;
        let _ = write!(
            out,
            "{:width$}  {:>6.1} {:>6.1} {:>6.1}  {:>6.1} {:>6.1} {:>6.1}",
            system, m.precision, m.recall, m.f1, a.precision, a.recall, a.f1
        );
        if let Some(acc) = self.answer_accuracy {
            let _ = write!(out, "  {:>6.1}", acc);
        }
        out.push('\n');
        out
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table("system"))
    }
}
