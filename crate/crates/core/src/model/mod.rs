//! The unified tagging network.
//!
//! ```text
//! embeddings -> BiLSTM(boundary) -> h_T -> softmax(W_T h_T)          = z_T
//!                                      \-> softmax(W_O h_T)          = z_O   (opinion head)
//!                        h_T -> BiLSTM(unified) -> h_S -> gate -> h~_S
//!                                        softmax(W_S dropout(h~_S))  = z_S
//!   z~_S = alpha * W_tr^T z_T + (1 - alpha) * z_S,   alpha = eps * <z_T, z_T>
//! ```

pub mod checkpoint;
pub mod components;
mod loss;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{opinion_labels, EmbeddingTable, OpinionLexicon, Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::numcore::lstm::{tape_bilstm, LstmVars};
use crate::numcore::ops::argmax;
use crate::numcore::{dropout_mask, uniform_init, LstmParams, Tape, Tensor, Var};
use crate::scalar::Scalar;
use crate::seeded_rng;
use crate::tagscheme::{
    decode_boundary, decode_unified, transition_mask_flat, BoundaryTag, TargetSpan,
    TransitionMatrix, UnifiedTag,
};

pub use components::{boundary_confidence, mix_scores, sc_gate, transition_scores};
pub use loss::{joint_loss, LossParts};

/// Half-width of the uniform initialiser for the non-recurrent weights.
pub const HEAD_INIT_RANGE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    /// Concatenated width of the boundary BiLSTM (split evenly across directions).
    pub boundary_hidden: usize,
    /// Concatenated width of the unified BiLSTM.
    pub unified_hidden: usize,
    /// Largest share the boundary-derived scores may take in the final scores.
    pub epsilon: f64,
    /// Opinion-word window on each side of a token.
    pub window: usize,
    pub dropout: f64,
    pub boundary_guidance: bool,
    pub sentiment_consistency: bool,
    pub opinion_enhanced: bool,
    pub train_transition: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embedding_dim: 300,
            boundary_hidden: 50,
            unified_hidden: 50,
            epsilon: 0.5,
            window: 3,
            dropout: 0.5,
            boundary_guidance: true,
            sentiment_consistency: true,
            opinion_enhanced: true,
            train_transition: true,
            seed: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.embedding_dim == 0 {
            return bad("embedding dimension must be positive".into());
        }
        for (name, h) in [("boundary", self.boundary_hidden), ("unified", self.unified_hidden)] {
            if h == 0 || h % 2 != 0 {
                return bad(format!("{name} hidden size {h} must be a positive even number"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon {} not in [0, 1]", self.epsilon));
        }
        if self.window == 0 {
            return bad("opinion window must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} not in [0, 1)", self.dropout));
        }
        Ok(())
    }

    /// All three components switched off: the plain stacked BiLSTM tagger.
    pub fn base(mut self) -> Self {
        self.boundary_guidance = false;
        self.sentiment_consistency = false;
        self.opinion_enhanced = false;
        self
    }
}

/// Parameter groups, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    Embedding,
    BoundaryFwdInput,
    BoundaryFwdRecurrent,
    BoundaryFwdBias,
    BoundaryBwdInput,
    BoundaryBwdRecurrent,
    BoundaryBwdBias,
    UnifiedFwdInput,
    UnifiedFwdRecurrent,
    UnifiedFwdBias,
    UnifiedBwdInput,
    UnifiedBwdRecurrent,
    UnifiedBwdBias,
    BoundaryHead,
    UnifiedHead,
    OpinionHead,
    GateWeight,
    GateBias,
    TransitionLogits,
}

impl ParamId {
    pub const ALL: [ParamId; 19] = [
        ParamId::Embedding,
        ParamId::BoundaryFwdInput,
        ParamId::BoundaryFwdRecurrent,
        ParamId::BoundaryFwdBias,
        ParamId::BoundaryBwdInput,
        ParamId::BoundaryBwdRecurrent,
        ParamId::BoundaryBwdBias,
        ParamId::UnifiedFwdInput,
        ParamId::UnifiedFwdRecurrent,
        ParamId::UnifiedFwdBias,
        ParamId::UnifiedBwdInput,
        ParamId::UnifiedBwdRecurrent,
        ParamId::UnifiedBwdBias,
        ParamId::BoundaryHead,
        ParamId::UnifiedHead,
        ParamId::OpinionHead,
        ParamId::GateWeight,
        ParamId::GateBias,
        ParamId::TransitionLogits,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamId::Embedding => "embedding",
            ParamId::BoundaryFwdInput => "boundary_lstm.fwd.w_input",
            ParamId::BoundaryFwdRecurrent => "boundary_lstm.fwd.w_recurrent",
            ParamId::BoundaryFwdBias => "boundary_lstm.fwd.bias",
            ParamId::BoundaryBwdInput => "boundary_lstm.bwd.w_input",
            ParamId::BoundaryBwdRecurrent => "boundary_lstm.bwd.w_recurrent",
            ParamId::BoundaryBwdBias => "boundary_lstm.bwd.bias",
            ParamId::UnifiedFwdInput => "unified_lstm.fwd.w_input",
            ParamId::UnifiedFwdRecurrent => "unified_lstm.fwd.w_recurrent",
            ParamId::UnifiedFwdBias => "unified_lstm.fwd.bias",
            ParamId::UnifiedBwdInput => "unified_lstm.bwd.w_input",
            ParamId::UnifiedBwdRecurrent => "unified_lstm.bwd.w_recurrent",
            ParamId::UnifiedBwdBias => "unified_lstm.bwd.bias",
            ParamId::BoundaryHead => "boundary_head",
            ParamId::UnifiedHead => "unified_head",
            ParamId::OpinionHead => "opinion_head",
            ParamId::GateWeight => "gate.weight",
            ParamId::GateBias => "gate.bias",
            ParamId::TransitionLogits => "transition.logits",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn is_boundary_lstm(self) -> bool {
        (1..=6).contains(&self.index())
    }
}

/// Per-token quantities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T> {
    pub h_boundary: Vec<Vec<T>>,
    pub h_unified: Vec<Vec<T>>,
    /// Gated features; equal to `h_unified` when the gate is off.
    pub h_tilde: Vec<Vec<T>>,
    pub gate: Option<Vec<Vec<T>>>,
    pub z_boundary: Vec<Vec<T>>,
    pub z_unified: Vec<Vec<T>>,
    pub z_transition: Option<Vec<Vec<T>>>,
    /// Zero when boundary guidance is off.
    pub alpha: Vec<T>,
    /// Final unified scores.
    pub z_mixed: Vec<Vec<T>>,
    pub z_opinion: Option<Vec<Vec<T>>>,
}

impl<T> ForwardTrace<T> {
    pub fn len(&self) -> usize {
        self.z_mixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_mixed.is_empty()
    }
}

/// A sentence prepared for training: token ids plus the three gold sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub token_ids: Vec<usize>,
    pub boundary: Vec<BoundaryTag>,
    pub unified: Vec<UnifiedTag>,
    pub opinion: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub unified: Vec<UnifiedTag>,
    pub boundary: Vec<BoundaryTag>,
    pub spans: Vec<TargetSpan>,
}

impl Prediction {
    /// Target spans read off the auxiliary boundary tagger.
    pub fn boundary_spans(&self) -> Vec<TargetSpan> {
        decode_boundary(&self.boundary)
    }
}

/// Tape nodes of one forward pass.
#[derive(Debug, Clone)]
pub struct GraphOutputs {
    pub h_boundary: Vec<Var>,
    pub h_unified: Vec<Var>,
    pub h_tilde: Vec<Var>,
    pub gate: Option<Vec<Var>>,
    pub z_boundary: Vec<Var>,
    pub z_unified: Vec<Var>,
    pub z_transition: Option<Vec<Var>>,
    pub alpha: Option<Vec<Var>>,
    pub z_mixed: Vec<Var>,
    pub z_opinion: Option<Vec<Var>>,
}

/// Loss nodes; `total` is what training differentiates.
#[derive(Debug, Clone, Copy)]
pub struct LossVars {
    pub boundary: Var,
    pub unified: Var,
    pub opinion: Option<Var>,
    pub total: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub config: ModelConfig,
    pub vocabulary: Vocabulary,
    pub params: Vec<Tensor<T>>,
}

impl<T: Scalar> Model<T> {
    /// Fresh model over a pre-built embedding table. All parameter groups are
    /// allocated and initialised in a fixed order whatever the component
    /// switches, so equal seeds give equal initial weights.
    pub fn new(config: ModelConfig, embeddings: EmbeddingTable<T>) -> Result<Self> {
        config.validate()?;
        if embeddings.dim() != config.embedding_dim {
            return Err(Error::Config(format!(
                "embedding table has dimension {}, config says {}",
                embeddings.dim(),
                config.embedding_dim
            )));
        }
        let mut rng = seeded_rng(config.seed);
        let d = config.embedding_dim;
        let ht = config.boundary_hidden;
        let hs = config.unified_hidden;
        let mut params = Vec::with_capacity(ParamId::ALL.len());
        params.push(embeddings.vectors);
        for (input, hidden) in [(d, ht / 2), (d, ht / 2), (ht, hs / 2), (ht, hs / 2)] {
            let p = LstmParams::<T>::glorot(input, hidden, &mut rng);
            params.extend([p.w_input, p.w_recurrent, p.bias]);
        }
        params.push(uniform_init(BoundaryTag::COUNT, ht, HEAD_INIT_RANGE, &mut rng));
        params.push(uniform_init(UnifiedTag::COUNT, hs, HEAD_INIT_RANGE, &mut rng));
        params.push(uniform_init(2, ht, HEAD_INIT_RANGE, &mut rng));
        params.push(uniform_init(hs, hs, HEAD_INIT_RANGE, &mut rng));
        params.push(Tensor::zeros(vec![hs]));
        params.push(Tensor::zeros(vec![
            TransitionMatrix::<T>::ROWS,
            TransitionMatrix::<T>::COLS,
        ]));
        Ok(Model {
            config,
            vocabulary: embeddings.vocabulary,
            params,
        })
    }

    pub fn param(&self, id: ParamId) -> &Tensor<T> {
        &self.params[id.index()]
    }

    pub fn param_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.params[id.index()]
    }

    pub fn transition(&self) -> TransitionMatrix<T> {
        TransitionMatrix {
            logits: self.param(ParamId::TransitionLogits).data().to_vec(),
            trainable: self.config.train_transition,
        }
    }

    pub fn token_ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.vocabulary.lookup(t.as_ref())).collect()
    }

    /// Token ids and gold sequences for `sentence`. Opinion labels are only
    /// produced when the opinion head is on.
    pub fn instance(&self, sentence: &Sentence, lexicon: Option<&OpinionLexicon>) -> Result<Instance> {
        let opinion = if self.config.opinion_enhanced {
            let lex = lexicon.ok_or_else(|| {
                Error::Config("the opinion-enhanced head needs an opinion lexicon".into())
            })?;
            Some(opinion_labels(&sentence.tokens, lex, self.config.window))
        } else {
            None
        };
        Ok(Instance {
            id: sentence.id.clone(),
            token_ids: self.token_ids(&sentence.tokens),
            boundary: sentence.boundary_tags()?,
            unified: sentence.unified_tags()?,
            opinion,
        })
    }

    /// Records the forward pass on `tape`. Dropout masks are drawn from
    /// `rng` only in training mode.
    pub fn build<R: Rng + ?Sized>(
        &self,
        tape: &mut Tape<'_, T>,
        token_ids: &[usize],
        training: bool,
        rng: &mut R,
    ) -> Result<GraphOutputs> {
        if token_ids.is_empty() {
            return Err(Error::EmptySequence);
        }
        let cfg = &self.config;
        let use_dropout = training && cfg.dropout > 0.0;
        let p = |id: ParamId| id.index();

        let mut x = Vec::with_capacity(token_ids.len());
        for &id in token_ids {
            let e = tape.row(p(ParamId::Embedding), id);
            let e = if use_dropout {
                let mask = dropout_mask(cfg.embedding_dim, cfg.dropout, rng);
                tape.mask_mul(e, mask)?
            } else {
                e
            };
            x.push(e);
        }

        let bt_f = LstmVars::register(tape, p(ParamId::BoundaryFwdInput), cfg.boundary_hidden / 2);
        let bt_b = LstmVars::register(tape, p(ParamId::BoundaryBwdInput), cfg.boundary_hidden / 2);
        let h_boundary = tape_bilstm(tape, &x, &bt_f, &bt_b)?;

        let w_t = tape.param(p(ParamId::BoundaryHead));
        let z_boundary = h_boundary
            .iter()
            .map(|&h| {
                let l = tape.mat_vec(w_t, h)?;
                Ok(tape.softmax(l))
            })
            .collect::<Result<Vec<_>>>()?;

        let us_f = LstmVars::register(tape, p(ParamId::UnifiedFwdInput), cfg.unified_hidden / 2);
        let us_b = LstmVars::register(tape, p(ParamId::UnifiedBwdInput), cfg.unified_hidden / 2);
        let h_unified = tape_bilstm(tape, &h_boundary, &us_f, &us_b)?;

        let (h_tilde, gate) = if cfg.sentiment_consistency {
            let w_g = tape.param(p(ParamId::GateWeight));
            let b_g = tape.param(p(ParamId::GateBias));
            let mut out: Vec<Var> = Vec::with_capacity(h_unified.len());
            let mut gates = Vec::with_capacity(h_unified.len());
            for (t, &h) in h_unified.iter().enumerate() {
                let a = tape.mat_vec(w_g, h)?;
                let a = tape.add(a, b_g)?;
                let g = tape.sigmoid(a);
                let blended = if t == 0 {
                    h
                } else {
                    let cur = tape.mul(g, h)?;
                    let carry = tape.one_minus(g);
                    let carry = tape.mul(carry, out[t - 1])?;
                    tape.add(cur, carry)?
                };
                out.push(blended);
                gates.push(g);
            }
            (out, Some(gates))
        } else {
            (h_unified.clone(), None)
        };

        let w_s = tape.param(p(ParamId::UnifiedHead));
        let mut z_unified = Vec::with_capacity(h_tilde.len());
        for &h in &h_tilde {
            let h = if use_dropout {
                let mask = dropout_mask(cfg.unified_hidden, cfg.dropout, rng);
                tape.mask_mul(h, mask)?
            } else {
                h
            };
            let l = tape.mat_vec(w_s, h)?;
            z_unified.push(tape.softmax(l));
        }

        let (z_mixed, z_transition, alpha) = if cfg.boundary_guidance {
            let logits = tape.param(p(ParamId::TransitionLogits));
            let w_tr = tape.masked_row_softmax(logits, transition_mask_flat())?;
            let eps = T::lit(cfg.epsilon);
            let mut mixed = Vec::with_capacity(z_unified.len());
            let mut trans = Vec::with_capacity(z_unified.len());
            let mut alphas = Vec::with_capacity(z_unified.len());
            for (&zt, &zs) in z_boundary.iter().zip(&z_unified) {
                let zp = tape.mat_t_vec(w_tr, zt)?;
                let c = tape.dot(zt, zt)?;
                let a = tape.scale(c, eps);
                let keep = tape.one_minus(a);
                let left = tape.scale_by(a, zp)?;
                let right = tape.scale_by(keep, zs)?;
                mixed.push(tape.add(left, right)?);
                trans.push(zp);
                alphas.push(a);
            }
            (mixed, Some(trans), Some(alphas))
        } else {
            (z_unified.clone(), None, None)
        };

        let z_opinion = if cfg.opinion_enhanced {
            let w_o = tape.param(p(ParamId::OpinionHead));
            Some(
                h_boundary
                    .iter()
                    .map(|&h| {
                        let l = tape.mat_vec(w_o, h)?;
                        Ok(tape.softmax(l))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };

        Ok(GraphOutputs {
            h_boundary,
            h_unified,
            h_tilde,
            gate,
            z_boundary,
            z_unified,
            z_transition,
            alpha,
            z_mixed,
            z_opinion,
        })
    }

    /// Records the per-task mean cross-entropies and their sum.
    pub fn build_loss(
        &self,
        tape: &mut Tape<'_, T>,
        out: &GraphOutputs,
        inst: &Instance,
    ) -> Result<LossVars> {
        let n = out.z_mixed.len();
        if inst.boundary.len() != n || inst.unified.len() != n {
            return Err(Error::Shape(format!(
                "gold sequences of length {}/{} against {n} tokens",
                inst.boundary.len(),
                inst.unified.len()
            )));
        }
        let inv = T::one() / T::lit(n as f64);
        let mean_ce = |tape: &mut Tape<'_, T>, probs: &[Var], gold: &mut dyn Iterator<Item = usize>| {
            let terms = probs
                .iter()
                .zip(gold)
                .map(|(&p, y)| tape.neg_log_pick(p, y))
                .collect::<Result<Vec<_>>>()?;
            let s = tape.sum(terms)?;
            Ok::<Var, Error>(tape.scale(s, inv))
        };
        let boundary = mean_ce(tape, &out.z_boundary, &mut inst.boundary.iter().map(|b| b.index()))?;
        let unified = mean_ce(tape, &out.z_mixed, &mut inst.unified.iter().map(|u| u.index()))?;
        let opinion = match &out.z_opinion {
            Some(z) => {
                let gold = inst.opinion.as_ref().ok_or_else(|| {
                    Error::Config(format!("sentence `{}` has no opinion labels", inst.id))
                })?;
                if gold.len() != n {
                    return Err(Error::Shape("opinion labels length".into()));
                }
                Some(mean_ce(tape, z, &mut gold.iter().map(|&y| y as usize))?)
            }
            None => None,
        };
        let mut terms = vec![unified, boundary];
        terms.extend(opinion);
        let total = tape.sum(terms)?;
        Ok(LossVars {
            boundary,
            unified,
            opinion,
            total,
        })
    }

    pub fn trace_from(&self, tape: &Tape<'_, T>, out: &GraphOutputs) -> ForwardTrace<T> {
        let vals = |vs: &[Var]| vs.iter().map(|&v| tape.value(v).to_vec()).collect::<Vec<_>>();
        ForwardTrace {
            h_boundary: vals(&out.h_boundary),
            h_unified: vals(&out.h_unified),
            h_tilde: vals(&out.h_tilde),
            gate: out.gate.as_deref().map(vals),
            z_boundary: vals(&out.z_boundary),
            z_unified: vals(&out.z_unified),
            z_transition: out.z_transition.as_deref().map(vals),
            alpha: match &out.alpha {
                Some(a) => a.iter().map(|&v| tape.scalar(v)).collect(),
                None => vec![T::zero(); out.z_mixed.len()],
            },
            z_mixed: vals(&out.z_mixed),
            z_opinion: out.z_opinion.as_deref().map(vals),
        }
    }

    pub fn forward<S: AsRef<str>, R: Rng + ?Sized>(
        &self,
        tokens: &[S],
        training: bool,
        rng: &mut R,
    ) -> Result<ForwardTrace<T>> {
        self.forward_ids(&self.token_ids(tokens), training, rng)
    }

    pub fn forward_ids<R: Rng + ?Sized>(
        &self,
        token_ids: &[usize],
        training: bool,
        rng: &mut R,
    ) -> Result<ForwardTrace<T>> {
        let mut tape = Tape::new(&self.params);
        let out = self.build(&mut tape, token_ids, training, rng)?;
        Ok(self.trace_from(&tape, &out))
    }

    /// Loss components and gradients of the joint objective for one sentence.
    /// The transition logits get zero gradient when they are frozen.
    pub fn loss_and_gradients<R: Rng + ?Sized>(
        &self,
        inst: &Instance,
        training: bool,
        rng: &mut R,
    ) -> Result<(LossParts<T>, Vec<Tensor<T>>)> {
        let mut tape = Tape::new(&self.params);
        let out = self.build(&mut tape, &inst.token_ids, training, rng)?;
        let loss = self.build_loss(&mut tape, &out, inst)?;
        let mut grads = tape.backward(loss.total)?;
        if !self.config.train_transition {
            grads[ParamId::TransitionLogits.index()].fill(T::zero());
        }
        let parts = LossParts {
            boundary: tape.scalar(loss.boundary),
            unified: tape.scalar(loss.unified),
            opinion: loss.opinion.map(|v| tape.scalar(v)),
            total: tape.scalar(loss.total),
        };
        Ok((parts, grads))
    }

    /// Joint objective only, without gradients.
    pub fn loss<R: Rng + ?Sized>(&self, inst: &Instance, training: bool, rng: &mut R) -> Result<LossParts<T>> {
        let mut tape = Tape::new(&self.params);
        let out = self.build(&mut tape, &inst.token_ids, training, rng)?;
        let loss = self.build_loss(&mut tape, &out, inst)?;
        Ok(LossParts {
            boundary: tape.scalar(loss.boundary),
            unified: tape.scalar(loss.unified),
            opinion: loss.opinion.map(|v| tape.scalar(v)),
            total: tape.scalar(loss.total),
        })
    }

    /// Inference-mode tagging: per-token argmax of the final unified scores
    /// and of the boundary scores, then lenient span decoding.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Prediction> {
        self.predict_ids(&self.token_ids(tokens))
    }

    pub fn predict_ids(&self, token_ids: &[usize]) -> Result<Prediction> {
        // Inference draws no randomness; the generator is never touched.
        let mut rng = seeded_rng(0);
        let trace = self.forward_ids(token_ids, false, &mut rng)?;
        Ok(prediction_from_trace(&trace))
    }
}

pub fn prediction_from_trace<T: Scalar>(trace: &ForwardTrace<T>) -> Prediction {
    let unified: Vec<UnifiedTag> = trace
        .z_mixed
        .iter()
        .map(|z| UnifiedTag::from_index(argmax(z)).expect("13 scores"))
        .collect();
    let boundary = trace
        .z_boundary
        .iter()
        .map(|z| BoundaryTag::from_index(argmax(z)).expect("5 scores"))
        .collect();
    let spans = decode_unified(&unified);
    Prediction {
        unified,
        boundary,
        spans,
    }
}
