//! Component ablations and the epsilon / window sweep. Every run starts from
//! the same seed and the same splits.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, EmbeddingTable, OpinionLexicon};
use crate::error::Result;
use crate::evaluator::{evaluate_corpus, Prf};
use crate::model::{Model, ModelConfig};
use crate::scalar::Scalar;
use crate::trainer::{train, TrainConfig, TrainHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Base,
    Bg,
    BgSc,
    BgOe,
    Full,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Base, Variant::Bg, Variant::BgSc, Variant::BgOe, Variant::Full];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Base => "Base",
            Variant::Bg => "+BG",
            Variant::BgSc => "+BG+SC",
            Variant::BgOe => "+BG+OE",
            Variant::Full => "Full",
        }
    }

    /// `base` with the component switches set for this row.
    pub fn apply(self, base: &ModelConfig) -> ModelConfig {
        let (bg, sc, oe) = match self {
            Variant::Base => (false, false, false),
            Variant::Bg => (true, false, false),
            Variant::BgSc => (true, true, false),
            Variant::BgOe => (true, false, true),
            Variant::Full => (true, true, true),
        };
        ModelConfig {
            boundary_guidance: bg,
            sentiment_consistency: sc,
            opinion_enhanced: oe,
            ..base.clone()
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub config: ModelConfig,
    pub dev: Prf,
    /// Scores on the test split; `None` when the dataset has none.
    pub test: Option<Prf>,
    pub history: TrainHistory,
}

/// Trains and evaluates a single configuration.
pub fn run_config<T: Scalar>(
    dataset: &Dataset,
    lexicon: Option<&OpinionLexicon>,
    embeddings: &EmbeddingTable<T>,
    config: ModelConfig,
    train_config: &TrainConfig,
) -> Result<(Model<T>, Prf, Option<Prf>, TrainHistory)> {
    let model = Model::new(config, embeddings.clone())?;
    let (best, history) = train(model, &dataset.train, &dataset.dev, lexicon, train_config)?;
    let dev = history.best().map(|r| r.dev).unwrap_or_default();
    let test = if dataset.test.is_empty() {
        None
    } else {
        Some(evaluate_corpus(&best, &dataset.test)?.unified)
    };
    Ok((best, dev, test, history))
}

/// One row per [`Variant`], in table order.
pub fn ablation_table<T: Scalar>(
    dataset: &Dataset,
    lexicon: Option<&OpinionLexicon>,
    embeddings: &EmbeddingTable<T>,
    base: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    Variant::ALL
        .par_iter()
        .map(|&variant| {
            let config = variant.apply(base);
            let (_, dev, test, history) =
                run_config(dataset, lexicon, embeddings, config.clone(), train_config)?;
            Ok(AblationRow {
                variant,
                config,
                dev,
                test,
                history,
            })
        })
        .collect()
}

pub const DEFAULT_EPSILONS: [f64; 7] = [0.0, 0.3, 0.4, 0.5, 0.6, 0.7, 1.0];
pub const DEFAULT_WINDOWS: [usize; 5] = [1, 2, 3, 4, 5];

/// Grid of a sweep. With `no_bg_reference`, one guidance-off run per
/// window is added, recorded at epsilon 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub epsilons: Vec<f64>,
    pub windows: Vec<usize>,
    pub no_bg_reference: bool,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            epsilons: DEFAULT_EPSILONS.to_vec(),
            windows: DEFAULT_WINDOWS.to_vec(),
            no_bg_reference: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub window: usize,
    pub boundary_guidance: bool,
    pub dev: Prf,
}

/// Best dev scores over `grid.epsilons x grid.windows`, sorted by
/// (epsilon, window); a guidance-off reference sorts after its guided twin.
pub fn sweep<T: Scalar>(
    dataset: &Dataset,
    lexicon: Option<&OpinionLexicon>,
    embeddings: &EmbeddingTable<T>,
    base: &ModelConfig,
    train_config: &TrainConfig,
    grid: &SweepGrid,
) -> Result<Vec<SweepRecord>> {
    let windows = &grid.windows;
    let mut points: Vec<(f64, usize, bool)> = grid
        .epsilons
        .iter()
        .flat_map(|&e| windows.iter().map(move |&s| (e, s, true)))
        .collect();
    if grid.no_bg_reference {
        points.extend(windows.iter().map(|&s| (0.0, s, false)));
    }
    for &(epsilon, window, bg) in &points {
        ModelConfig {
            epsilon,
            window,
            boundary_guidance: bg,
            ..base.clone()
        }
        .validate()?;
    }
    let mut records = points
        .par_iter()
        .map(|&(epsilon, window, boundary_guidance)| {
            let config = ModelConfig {
                epsilon,
                window,
                boundary_guidance,
                ..base.clone()
            };
            let (_, dev, _, _) = run_config(dataset, lexicon, embeddings, config, train_config)?;
            Ok(SweepRecord {
                epsilon,
                window,
                boundary_guidance,
                dev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| {
        a.epsilon
            .total_cmp(&b.epsilon)
            .then(a.window.cmp(&b.window))
            .then(b.boundary_guidance.cmp(&a.boundary_guidance))
    });
    Ok(records)
}
