use crate::error::{Error, Result};
use crate::numcore::tensor::Tensor;
use crate::scalar::Scalar;

/// Lower clamp applied to a probability before taking its log.
pub const LOG_PROB_FLOOR: f64 = 1e-12;

/// `W x` for a row-major `rows x cols` matrix.
pub(crate) fn mat_vec<T: Scalar>(w: &[T], cols: usize, x: &[T]) -> Vec<T> {
    w.chunks_exact(cols)
        .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
        .collect()
}

/// `W^T x` for a row-major `rows x cols` matrix.
pub(crate) fn mat_t_vec<T: Scalar>(w: &[T], cols: usize, x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); cols];
    for (row, &xi) in w.chunks_exact(cols).zip(x) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o = *o + a * xi;
        }
    }
    out
}

/// Bias-free affine map `W x`.
pub fn linear<T: Scalar>(w: &Tensor<T>, x: &[T]) -> Result<Vec<T>> {
    if w.shape().len() != 2 || w.cols() != x.len() {
        return Err(Error::Shape(format!(
            "linear: matrix {:?} against vector of length {}",
            w.shape(),
            x.len()
        )));
    }
    Ok(mat_vec(w.data(), w.cols(), x))
}

pub fn softmax<T: Scalar>(v: &[T]) -> Vec<T> {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = v.iter().map(|&x| (x - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `-ln p[y]` with `p[y]` clamped below at [`LOG_PROB_FLOOR`]. NaN stays NaN.
pub fn cross_entropy<T: Scalar>(p: &[T], y: usize) -> Result<T> {
    let py = *p.get(y).ok_or(Error::InvalidIndex {
        index: y,
        size: p.len(),
    })?;
    Ok(-clamp_prob(py).ln())
}

pub(crate) fn clamp_prob<T: Scalar>(p: T) -> T {
    if p < T::lit(LOG_PROB_FLOOR) {
        T::lit(LOG_PROB_FLOOR)
    } else {
        p
    }
}

/// Softmax over each row restricted to the entries where `mask` is set;
/// masked entries come out as exact zeros.
pub fn masked_row_softmax<T: Scalar>(logits: &[T], mask: &[bool], cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); logits.len()];
    for ((row, m), o) in logits
        .chunks_exact(cols)
        .zip(mask.chunks_exact(cols))
        .zip(out.chunks_exact_mut(cols))
    {
        let max = row
            .iter()
            .zip(m)
            .filter(|(_, &keep)| keep)
            .map(|(&x, _)| x)
            .fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for ((&x, &keep), slot) in row.iter().zip(m).zip(o.iter_mut()) {
            if keep {
                *slot = (x - max).exp();
                total = total + *slot;
            }
        }
        for (slot, &keep) in o.iter_mut().zip(m) {
            if keep {
                *slot = *slot / total;
            }
        }
    }
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
