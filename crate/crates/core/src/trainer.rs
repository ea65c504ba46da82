//! Per-sentence Adam training with dev-based model selection, and a
//! finite-difference gradient check.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{OpinionLexicon, Sentence};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate_corpus, Prf};
use crate::model::{Instance, Model, ParamId};
use crate::numcore::{AdamState, Tensor};
use crate::scalar::Scalar;
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Per-epoch decay: `lr_e = lr / (1 + decay * e)`.
    pub decay: f64,
    /// Gradients are averaged over a batch before each update.
    pub batch_size: usize,
    pub seed: u64,
    /// Max L2 norm of the full gradient; no clipping when absent.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.9,
            adam_epsilon: 1e-8,
            decay: 0.05,
            batch_size: 1,
            seed: 1,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning rate must be positive");
        }
        if self.decay.is_nan() || self.decay < 0.0 {
            return bad("decay must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("Adam epsilon must be positive");
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return bad("clip norm must be positive");
            }
        }
        Ok(())
    }
}

pub fn lr_at(epoch: usize, config: &TrainConfig) -> f64 {
    config.learning_rate / (1.0 + config.decay * epoch as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training losses over the epoch's sentences.
    pub loss_boundary: f64,
    pub loss_unified: f64,
    pub loss_opinion: Option<f64>,
    pub dev: Prf,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.get(self.best_epoch)
    }

    /// A header line with `header` (typically the resolved configuration),
    /// then one line per epoch.
    pub fn to_jsonl(&self, header: &serde_json::Value) -> Result<String> {
        let mut out = serde_json::to_string(header)?;
        out.push('\n');
        for r in &self.epochs {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn instances<T: Scalar>(
    model: &Model<T>,
    sentences: &[Sentence],
    lexicon: Option<&OpinionLexicon>,
) -> Result<Vec<Instance>> {
    sentences.iter().map(|s| model.instance(s, lexicon)).collect()
}

fn clip<T: Scalar>(grads: &mut [Tensor<T>], max_norm: f64) {
    let norm = grads.iter().map(|g| g.squared_norm().as_f64()).sum::<f64>().sqrt();
    if norm > max_norm {
        let k = T::lit(max_norm / norm);
        for g in grads {
            g.scale(k);
        }
    }
}

/// Trains `model` in place of a copy and returns the parameters of the epoch
/// with the highest dev exact-match F1 (the earliest on ties).
pub fn train<T: Scalar>(
    mut model: Model<T>,
    train: &[Sentence],
    dev: &[Sentence],
    lexicon: Option<&OpinionLexicon>,
    config: &TrainConfig,
) -> Result<(Model<T>, TrainHistory)> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Config("training and dev sets must be non-empty".into()));
    }
    let data = instances(&model, train, lexicon)?;
    let mut rng = seeded_rng(config.seed);
    let mut adam = AdamState::new(&model.params, config.beta1, config.beta2, config.adam_epsilon);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, Model<T>)> = None;

    for epoch in 0..config.epochs {
        let lr = lr_at(epoch, config);
        order.shuffle(&mut rng);
        let (mut lb, mut lu, mut lo) = (0.0, 0.0, 0.0);
        for batch in order.chunks(config.batch_size) {
            let mut acc: Option<Vec<Tensor<T>>> = None;
            for &i in batch {
                let inst = &data[i];
                let (parts, grads) = model.loss_and_gradients(inst, true, &mut rng)?;
                if !parts.total.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        sentence_id: inst.id.clone(),
                    });
                }
                lb += parts.boundary.as_f64();
                lu += parts.unified.as_f64();
                lo += parts.opinion.map_or(0.0, |v| v.as_f64());
                match acc.as_mut() {
                    None => acc = Some(grads),
                    Some(a) => a.iter_mut().zip(&grads).for_each(|(a, g)| a.add_assign(g)),
                }
            }
            let mut grads = acc.expect("non-empty batch");
            if batch.len() > 1 {
                let k = T::one() / T::lit(batch.len() as f64);
                grads.iter_mut().for_each(|g| g.scale(k));
            }
            if let Some(c) = config.clip_norm {
                clip(&mut grads, c);
            }
            adam.step(&mut model.params, &grads, lr)?;
        }
        let n = data.len() as f64;
        let dev_scores = evaluate_corpus(&model, dev)?.unified;
        history.epochs.push(EpochRecord {
            epoch,
            loss_boundary: lb / n,
            loss_unified: lu / n,
            loss_opinion: model.config.opinion_enhanced.then_some(lo / n),
            dev: dev_scores,
            lr,
        });
        if best.as_ref().is_none_or(|(f, _)| dev_scores.f1 > *f) {
            best = Some((dev_scores.f1, model.clone()));
            history.best_epoch = epoch;
        }
    }
    let (_, best_model) = best.expect("at least one epoch");
    Ok((best_model, history))
}

/// Largest relative error within one parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCheck {
    pub name: String,
    pub entries: usize,
    pub max_rel_error: f64,
    pub max_abs_analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub step: f64,
    pub groups: Vec<GroupCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }
}

/// Finite-difference step.
pub const GRAD_CHECK_STEP: f64 = 1e-5;
/// Magnitude below which differences are measured absolutely.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR)
}

/// Compares analytic gradients of the joint objective with central
/// differences for every entry of every parameter group. Dropout is active
/// with masks fixed by re-seeding before every evaluation.
pub fn grad_check(model: &Model<f64>, inst: &Instance, tolerance: f64) -> Result<GradCheckReport> {
    grad_check_with(model, inst, tolerance, |_| {})
}

/// As [`grad_check`], with `tamper` applied to the analytic gradients first.
pub fn grad_check_with(
    model: &Model<f64>,
    inst: &Instance,
    tolerance: f64,
    tamper: impl FnOnce(&mut [Tensor<f64>]),
) -> Result<GradCheckReport> {
    const MASK_SEED: u64 = 0x6772_6164;
    let (_, mut analytic) = model.loss_and_gradients(inst, true, &mut seeded_rng(MASK_SEED))?;
    tamper(&mut analytic);
    let mut probe = model.clone();
    let mut groups = Vec::with_capacity(ParamId::ALL.len());
    for id in ParamId::ALL {
        let p = id.index();
        let frozen = id == ParamId::TransitionLogits && !model.config.train_transition;
        let mut worst: f64 = 0.0;
        let mut biggest: f64 = 0.0;
        for k in 0..probe.params[p].len() {
            let x = probe.params[p].data()[k];
            probe.params[p].data_mut()[k] = x + GRAD_CHECK_STEP;
            let up = probe.loss(inst, true, &mut seeded_rng(MASK_SEED))?.total;
            probe.params[p].data_mut()[k] = x - GRAD_CHECK_STEP;
            let down = probe.loss(inst, true, &mut seeded_rng(MASK_SEED))?.total;
            probe.params[p].data_mut()[k] = x;
            let numeric = if frozen { 0.0 } else { (up - down) / (2.0 * GRAD_CHECK_STEP) };
            let a = analytic[p].data()[k];
            worst = worst.max(relative_error(a, numeric));
            biggest = biggest.max(a.abs());
        }
        groups.push(GroupCheck {
            name: id.name().to_string(),
            entries: probe.params[p].len(),
            max_rel_error: worst,
            max_abs_analytic: biggest,
        });
    }
    Ok(GradCheckReport {
        tolerance,
        step: GRAD_CHECK_STEP,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_embeddings, Vocabulary};
    use crate::model::ModelConfig;
    use crate::tagscheme::{Sentiment, TargetSpan};

    #[test]
    fn schedule() {
        let c = TrainConfig::default();
        assert_eq!(lr_at(0, &c), 1e-3);
        assert!((lr_at(10, &c) - 1e-3 / 1.5).abs() < 1e-18);
        let flat = TrainConfig { decay: 0.0, ..c.clone() };
        assert!((0..100).all(|e| lr_at(e, &flat) == 1e-3));
        assert!((0..100).all(|e| lr_at(e + 1, &c) <= lr_at(e, &c)));
    }

    #[test]
    fn config_rejections() {
        for c in [
            TrainConfig { epochs: 0, ..TrainConfig::default() },
            TrainConfig { learning_rate: 0.0, ..TrainConfig::default() },
            TrainConfig { decay: -0.1, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { clip_norm: Some(0.0), ..TrainConfig::default() },
        ] {
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }

    fn tiny(config: ModelConfig) -> (Model<f64>, Vec<Sentence>) {
        let sents = vec![
            Sentence::new(
                "a",
                ["the", "battery", "life", "is", "great"].map(String::from).to_vec(),
                vec![TargetSpan::new(1, 2, Sentiment::Pos)],
            )
            .unwrap(),
            Sentence::new(
                "b",
                ["screen", "is", "bad"].map(String::from).to_vec(),
                vec![TargetSpan::new(0, 0, Sentiment::Neg)],
            )
            .unwrap(),
        ];
        let vocab = Vocabulary::from_sentences([sents.as_slice()]);
        let table = load_embeddings(None, &vocab, config.embedding_dim, 3).unwrap();
        (Model::new(config, table).unwrap(), sents)
    }

    fn small() -> ModelConfig {
        ModelConfig {
            embedding_dim: 4,
            boundary_hidden: 4,
            unified_hidden: 4,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn history_and_selection() {
        let lex = OpinionLexicon::from_words(["great", "bad"]);
        let (m, s) = tiny(small());
        let cfg = TrainConfig { epochs: 4, learning_rate: 0.02, ..TrainConfig::default() };
        let dev_before = s.clone();
        let (best, h) = train(m, &s, &s, Some(&lex), &cfg).unwrap();
        assert_eq!(s, dev_before);
        assert_eq!(h.epochs.len(), 4);
        let max = h.epochs.iter().map(|r| r.dev.f1).fold(f64::MIN, f64::max);
        assert_eq!(h.best().unwrap().dev.f1, max);
        let first_max = h.epochs.iter().position(|r| r.dev.f1 == max).unwrap();
        assert_eq!(h.best_epoch, first_max);
        assert_eq!(evaluate_corpus(&best, &s).unwrap().unified.f1, max);
        assert!(h.epochs.iter().all(|r| r.loss_opinion.is_some()));
        let jsonl = h.to_jsonl(&serde_json::json!({"seed": 1})).unwrap();
        assert_eq!(jsonl.lines().count(), 5);
    }

    #[test]
    fn training_is_reproducible() {
        let lex = OpinionLexicon::from_words(["great"]);
        let cfg = TrainConfig { epochs: 2, batch_size: 2, clip_norm: Some(1.0), ..TrainConfig::default() };
        let (m1, s) = tiny(small());
        let (m2, _) = tiny(small());
        let a = train(m1, &s, &s, Some(&lex), &cfg).unwrap();
        let b = train(m2, &s, &s, Some(&lex), &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn rejects_empty_splits_and_zero_epochs() {
        let (m, s) = tiny(small().base());
        assert!(train(m.clone(), &s, &[], None, &TrainConfig::default()).is_err());
        let zero = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(train(m, &s, &s, None, &zero), Err(Error::Config(_))));
    }

    #[test]
    fn divergence_guard_names_the_sentence() {
        let (mut m, s) = tiny(small().base());
        m.param_mut(ParamId::UnifiedHead).fill(f64::NAN);
        let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
        match train(m, &s[..1], &s, None, &cfg) {
            Err(Error::NonFiniteLoss { sentence_id }) => assert_eq!(sentence_id, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gradient_check_passes_and_detects_corruption() {
        let lex = OpinionLexicon::from_words(["great"]);
        for config in [small(), ModelConfig { sentiment_consistency: false, ..small() }] {
            let (m, s) = tiny(config);
            let inst = m.instance(&s[0], Some(&lex)).unwrap();
            let r = grad_check(&m, &inst, 1e-4).unwrap();
            assert!(r.passed(), "{r:#?}");
            assert_eq!(r.groups.len(), ParamId::ALL.len());
        }
        let (m, s) = tiny(small());
        let inst = m.instance(&s[0], Some(&lex)).unwrap();
        let r = grad_check_with(&m, &inst, 1e-4, |g| {
            g[ParamId::GateWeight.index()].scale(-1.0);
        })
        .unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-15);
        assert!((relative_error(1e-9, 0.0) - 1e-3).abs() < 1e-15);
    }
}
