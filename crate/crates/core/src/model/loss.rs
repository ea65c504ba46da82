use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ForwardTrace, ModelConfig};
use crate::numcore::cross_entropy;
use crate::scalar::Scalar;
use crate::tagscheme::{BoundaryTag, UnifiedTag};

/// Per-task mean token cross-entropies and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossParts<T> {
    pub boundary: T,
    pub unified: T,
    pub opinion: Option<T>,
    pub total: T,
}

fn mean_ce<T: Scalar>(probs: &[Vec<T>], gold: impl Iterator<Item = usize>) -> Result<T> {
    let mut sum = T::zero();
    for (p, y) in probs.iter().zip(gold) {
        sum = sum + cross_entropy(p, y)?;
    }
    Ok(sum / T::lit(probs.len() as f64))
}

/// Joint objective from a recorded trace. The unified term is taken on the
/// final (mixed) scores; the opinion term is present only when the opinion
/// head is on.
pub fn joint_loss<T: Scalar>(
    trace: &ForwardTrace<T>,
    gold_boundary: &[BoundaryTag],
    gold_unified: &[UnifiedTag],
    gold_opinion: Option<&[u8]>,
    config: &ModelConfig,
) -> Result<LossParts<T>> {
    let n = trace.len();
    if gold_boundary.len() != n || gold_unified.len() != n {
        return Err(Error::Shape(format!(
            "gold sequences of length {}/{} against a trace of {n}",
            gold_boundary.len(),
            gold_unified.len()
        )));
    }
    let boundary = mean_ce(&trace.z_boundary, gold_boundary.iter().map(|b| b.index()))?;
    let unified = mean_ce(&trace.z_mixed, gold_unified.iter().map(|u| u.index()))?;
    let opinion = if config.opinion_enhanced {
        let z = trace
            .z_opinion
            .as_ref()
            .ok_or_else(|| Error::Config("trace has no opinion scores".into()))?;
        let gold = gold_opinion
            .ok_or_else(|| Error::Config("opinion labels required when the opinion head is on".into()))?;
        if gold.len() != n {
            return Err(Error::Shape(format!("{} opinion labels against {n} tokens", gold.len())));
        }
        Some(mean_ce(z, gold.iter().map(|&y| y as usize))?)
    } else {
        None
    };
    let total = unified + boundary + opinion.unwrap_or_else(T::zero);
    Ok(LossParts {
        boundary,
        unified,
        opinion,
        total,
    })
}
