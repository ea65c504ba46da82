use rand::Rng;

use crate::numcore::tensor::Tensor;
use crate::scalar::Scalar;

/// `rows x cols` matrix with i.i.d. `U(-half, half)` entries.
pub fn uniform_init<T: Scalar, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    half: f64,
    rng: &mut R,
) -> Tensor<T> {
    let data = (0..rows * cols)
        .map(|_| T::lit(rng.gen_range(-half..half)))
        .collect();
    Tensor::matrix(rows, cols, data).expect("consistent shape")
}

/// Glorot/Xavier uniform: `U(-a, a)` with `a = sqrt(6 / (rows + cols))`.
pub fn glorot_init<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor<T> {
    assert!(rows >= 1 && cols >= 1, "glorot_init needs a non-empty shape");
    let a = (6.0 / (rows + cols) as f64).sqrt();
    uniform_init(rows, cols, a, rng)
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else `1 / (1 - rate)`.
pub fn dropout_mask<T: Scalar, R: Rng + ?Sized>(n: usize, rate: f64, rng: &mut R) -> Vec<T> {
    let keep = T::lit(1.0 / (1.0 - rate));
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < rate {
                T::zero()
            } else {
                keep
            }
        })
        .collect()
}

/// Applies inverted dropout in training mode; identity otherwise.
pub fn dropout<T: Scalar, R: Rng + ?Sized>(v: &[T], rate: f64, rng: &mut R, training: bool) -> Vec<T> {
    if !training || rate == 0.0 {
        return v.to_vec();
    }
    dropout_mask::<T, R>(v.len(), rate, rng)
        .into_iter()
        .zip(v)
        .map(|(m, &x)| m * x)
        .collect()
}
