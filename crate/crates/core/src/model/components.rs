//! Boundary guidance and sentiment consistency as plain functions over
//! per-token vectors. The network records the same computations on a tape;
//! these are the reference forms.

use crate::error::{Error, Result};
use crate::numcore::ops::{mat_t_vec, mat_vec, sigmoid};
use crate::numcore::Tensor;
use crate::scalar::Scalar;
use crate::tagscheme::{TransitionMatrix, UnifiedTag};

/// Confidence `c = <z, z>` of a boundary distribution and the mixing
/// weight `alpha = epsilon * c`.
pub fn boundary_confidence<T: Scalar>(z_boundary: &[T], epsilon: T) -> (T, T) {
    let c: T = z_boundary.iter().map(|&p| p * p).sum();
    (c, epsilon * c)
}

/// Maps a boundary distribution into unified-tag space: `W_tr^T z`.
pub fn transition_scores<T: Scalar>(z_boundary: &[T], transition: &TransitionMatrix<T>) -> Vec<T> {
    mat_t_vec(&transition.realize(), UnifiedTag::COUNT, z_boundary)
}

/// `alpha * z_transition + (1 - alpha) * z_unified`.
pub fn mix_scores<T: Scalar>(z_transition: &[T], z_unified: &[T], alpha: T) -> Vec<T> {
    z_transition
        .iter()
        .zip(z_unified)
        .map(|(&a, &b)| alpha * a + (T::one() - alpha) * b)
        .collect()
}

/// Per-token feature vectors.
pub type Sequence<T> = Vec<Vec<T>>;

/// Gated carry-over of unified-task features. The first step passes
/// through unchanged; later steps blend `h_t` with the previous output.
/// Returns the blended sequence and the gate activations
/// (the first gate is reported even though it is unused).
pub fn sc_gate<T: Scalar>(
    h: &[Vec<T>],
    w_gate: &Tensor<T>,
    b_gate: &[T],
) -> Result<(Sequence<T>, Sequence<T>)> {
    if h.is_empty() {
        return Err(Error::EmptySequence);
    }
    let dim = h[0].len();
    if w_gate.rows() != dim || w_gate.cols() != dim || b_gate.len() != dim {
        return Err(Error::Shape("sc_gate: gate parameters do not match feature width".into()));
    }
    let mut out: Vec<Vec<T>> = Vec::with_capacity(h.len());
    let mut gates = Vec::with_capacity(h.len());
    for (t, ht) in h.iter().enumerate() {
        let g: Vec<T> = mat_vec(w_gate.data(), dim, ht)
            .into_iter()
            .zip(b_gate)
            .map(|(a, &b)| sigmoid(a + b))
            .collect();
        let blended = if t == 0 {
            ht.clone()
        } else {
            let prev = &out[t - 1];
            g.iter()
                .zip(ht)
                .zip(prev)
                .map(|((&gk, &hk), &pk)| gk * hk + (T::one() - gk) * pk)
                .collect()
        };
        out.push(blended);
        gates.push(g);
    }
    Ok((out, gates))
}
