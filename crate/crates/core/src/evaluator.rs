//! Exact-match span scoring.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::Result;
use crate::model::Model;
use crate::scalar::Scalar;
use crate::tagscheme::TargetSpan;

pub use crate::experiment::{ablation_table, AblationRow, Variant};

/// Span counts; summing them across sentences gives micro averages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            n_pred: self.n_pred + o.n_pred,
            n_gold: self.n_gold + o.n_gold,
        }
    }
}

impl Counts {
    pub fn prf(self) -> Prf {
        Prf::from_counts(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub tp: usize,
    pub n_pred: usize,
    pub n_gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Zero denominators give a zero score.
    pub fn from_counts(c: Counts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.tp, c.n_pred);
        let recall = ratio(c.tp, c.n_gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            tp: c.tp,
            n_pred: c.n_pred,
            n_gold: c.n_gold,
            precision,
            recall,
            f1,
        }
    }

    pub fn counts(&self) -> Counts {
        Counts {
            tp: self.tp,
            n_pred: self.n_pred,
            n_gold: self.n_gold,
        }
    }
}

/// A prediction is a hit iff a not-yet-matched gold span has the same start,
/// end and sentiment.
pub fn exact_match(gold: &[TargetSpan], pred: &[TargetSpan]) -> Counts {
    let mut remaining: HashMap<&TargetSpan, usize> = HashMap::new();
    for g in gold {
        *remaining.entry(g).or_default() += 1;
    }
    let mut tp = 0;
    for p in pred {
        if let Some(n) = remaining.get_mut(p) {
            if *n > 0 {
                *n -= 1;
                tp += 1;
            }
        }
    }
    Counts {
        tp,
        n_pred: pred.len(),
        n_gold: gold.len(),
    }
}

/// Micro scores of the unified output and, for diagnostics, of the boundary
/// tagger with sentiment ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub unified: Prf,
    pub boundary: Prf,
}

pub fn evaluate_corpus<T: Scalar>(model: &Model<T>, sentences: &[Sentence]) -> Result<CorpusScores> {
    let (u, b) = sentences
        .par_iter()
        .map(|s| {
            let pred = model.predict(&s.tokens)?;
            let gold_b: Vec<TargetSpan> = s.spans.iter().map(|sp| sp.without_sentiment()).collect();
            Ok::<_, crate::Error>((exact_match(&s.spans, &pred.spans), exact_match(&gold_b, &pred.boundary_spans())))
        })
        .try_reduce(
            || (Counts::default(), Counts::default()),
            |a, b| Ok((a.0 + b.0, a.1 + b.1)),
        )?;
    Ok(CorpusScores {
        unified: u.prf(),
        boundary: b.prf(),
    })
}

/// One line of a machine-readable evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub dataset: String,
    pub config: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl EvalRecord {
    pub fn new(dataset: impl Into<String>, config: impl Into<String>, prf: &Prf) -> Self {
        EvalRecord {
            dataset: dataset.into(),
            config: config.into(),
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
            tp: prf.tp,
            n_pred: prf.n_pred,
            n_gold: prf.n_gold,
        }
    }
}

pub fn records_to_jsonl(records: &[EvalRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Percentages with two decimals, one row per record.
pub fn format_table(records: &[EvalRecord]) -> String {
    let w = records.iter().map(|r| r.config.len()).chain([6]).max().unwrap_or(6);
    let d = records.iter().map(|r| r.dataset.len()).chain([7]).max().unwrap_or(7);
    let mut out = String::new();
    let _ = writeln!(out, "{:<d$}  {:<w$}  {:>7}  {:>7}  {:>7}", "dataset", "config", "P", "R", "F1");
    for r in records {
        let _ = writeln!(
            out,
            "{:<d$}  {:<w$}  {:>7.2}  {:>7.2}  {:>7.2}",
            r.dataset,
            r.config,
            100.0 * r.precision,
            100.0 * r.recall,
            100.0 * r.f1
        );
    }
    out
}
