//! LSTM cell and bidirectional LSTM, both as plain functions and as tape
//! recordings. Gate blocks are stacked in the order input, forget, output,
//! candidate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::init::glorot_init;
use crate::numcore::ops::{mat_vec, sigmoid};
use crate::numcore::tape::{Tape, Var};
use crate::numcore::tensor::Tensor;
use crate::scalar::Scalar;

/// Weights of one LSTM direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    /// `4H x input`
    pub w_input: Tensor<T>,
    /// `4H x H`
    pub w_recurrent: Tensor<T>,
    /// `4H`
    pub bias: Tensor<T>,
}

impl<T: Scalar> LstmParams<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            w_input: Tensor::zeros(vec![4 * hidden, input]),
            w_recurrent: Tensor::zeros(vec![4 * hidden, hidden]),
            bias: Tensor::zeros(vec![4 * hidden]),
        }
    }

    /// Glorot-uniform gate matrices (bounds computed per `H x in` gate block),
    /// zero biases.
    pub fn glorot<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let stack = |cols: usize, rng: &mut R| {
            let mut data = Vec::with_capacity(4 * hidden * cols);
            for _ in 0..4 {
                data.extend(glorot_init::<T, R>(hidden, cols, rng).into_data());
            }
            Tensor::matrix(4 * hidden, cols, data).expect("consistent shape")
        };
        let w_input = stack(input, rng);
        let w_recurrent = stack(hidden, rng);
        LstmParams {
            w_input,
            w_recurrent,
            bias: Tensor::zeros(vec![4 * hidden]),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_recurrent.cols()
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden_size();
        if self.w_recurrent.rows() != 4 * h
            || self.w_input.rows() != 4 * h
            || self.bias.len() != 4 * h
        {
            return Err(Error::Shape("inconsistent LSTM parameter shapes".into()));
        }
        Ok(())
    }
}

/// One LSTM step: returns `(h, c)`.
pub fn lstm_cell<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    p: &LstmParams<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    p.check()?;
    let hs = p.hidden_size();
    if x.len() != p.input_size() || h_prev.len() != hs || c_prev.len() != hs {
        return Err(Error::Shape(format!(
            "lstm_cell: x={}, h={}, c={} against input {} hidden {hs}",
            x.len(),
            h_prev.len(),
            c_prev.len(),
            p.input_size()
        )));
    }
    let wx = mat_vec(p.w_input.data(), p.input_size(), x);
    let wh = mat_vec(p.w_recurrent.data(), hs, h_prev);
    let pre: Vec<T> = wx
        .iter()
        .zip(&wh)
        .zip(p.bias.data())
        .map(|((&a, &b), &c)| a + b + c)
        .collect();
    let mut h = Vec::with_capacity(hs);
    let mut c = Vec::with_capacity(hs);
    for k in 0..hs {
        let i = sigmoid(pre[k]);
        let f = sigmoid(pre[hs + k]);
        let o = sigmoid(pre[2 * hs + k]);
        let g = pre[3 * hs + k].tanh();
        let ck = f * c_prev[k] + i * g;
        c.push(ck);
        h.push(o * ck.tanh());
    }
    Ok((h, c))
}

fn run_direction<T: Scalar>(
    seq: &[Vec<T>],
    p: &LstmParams<T>,
    reverse: bool,
) -> Result<Vec<Vec<T>>> {
    let hs = p.hidden_size();
    let mut h = vec![T::zero(); hs];
    let mut c = vec![T::zero(); hs];
    let mut out = vec![Vec::new(); seq.len()];
    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new((0..seq.len()).rev())
    } else {
        Box::new(0..seq.len())
    };
    for t in order {
        let (nh, nc) = lstm_cell(&seq[t], &h, &c, p)?;
        out[t] = nh.clone();
        h = nh;
        c = nc;
    }
    Ok(out)
}

/// Bidirectional LSTM: output `t` is `[forward_t ; backward_t]`.
pub fn bilstm<T: Scalar>(
    seq: &[Vec<T>],
    fwd: &LstmParams<T>,
    bwd: &LstmParams<T>,
) -> Result<Vec<Vec<T>>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if fwd.hidden_size() != bwd.hidden_size() {
        return Err(Error::Shape("bilstm directions differ in hidden size".into()));
    }
    let f = run_direction(seq, fwd, false)?;
    let b = run_direction(seq, bwd, true)?;
    Ok(f.into_iter()
        .zip(b)
        .map(|(mut a, b)| {
            a.extend(b);
            a
        })
        .collect())
}

/// Tape handles for one LSTM direction.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub w_input: Var,
    pub w_recurrent: Var,
    pub bias: Var,
    pub hidden: usize,
}

impl LstmVars {
    /// Registers the three parameter tensors at `first..first + 3`.
    pub fn register<T: Scalar>(tape: &mut Tape<'_, T>, first: usize, hidden: usize) -> Self {
        LstmVars {
            w_input: tape.param(first),
            w_recurrent: tape.param(first + 1),
            bias: tape.param(first + 2),
            hidden,
        }
    }
}

pub fn tape_lstm_cell<T: Scalar>(
    tape: &mut Tape<'_, T>,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmVars,
) -> Result<(Var, Var)> {
    let hs = p.hidden;
    let wx = tape.mat_vec(p.w_input, x)?;
    let wh = tape.mat_vec(p.w_recurrent, h_prev)?;
    let s = tape.add(wx, wh)?;
    let pre = tape.add(s, p.bias)?;
    let i = tape.slice(pre, 0, hs)?;
    let i = tape.sigmoid(i);
    let f = tape.slice(pre, hs, hs)?;
    let f = tape.sigmoid(f);
    let o = tape.slice(pre, 2 * hs, hs)?;
    let o = tape.sigmoid(o);
    let g = tape.slice(pre, 3 * hs, hs)?;
    let g = tape.tanh(g);
    let keep = tape.mul(f, c_prev)?;
    let write = tape.mul(i, g)?;
    let c = tape.add(keep, write)?;
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

pub fn tape_bilstm<T: Scalar>(
    tape: &mut Tape<'_, T>,
    seq: &[Var],
    fwd: &LstmVars,
    bwd: &LstmVars,
) -> Result<Vec<Var>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut run = |p: &LstmVars, reverse: bool| -> Result<Vec<Var>> {
        let mut h = tape.constant(vec![T::zero(); p.hidden]);
        let mut c = tape.constant(vec![T::zero(); p.hidden]);
        let mut out = vec![h; seq.len()];
        let order: Vec<usize> = if reverse {
            (0..seq.len()).rev().collect()
        } else {
            (0..seq.len()).collect()
        };
        for t in order {
            let (nh, nc) = tape_lstm_cell(tape, seq[t], h, c, p)?;
            out[t] = nh;
            h = nh;
            c = nc;
        }
        Ok(out)
    };
    let f = run(fwd, false)?;
    let b = run(bwd, true)?;
    Ok(f.into_iter().zip(b).map(|(a, b)| tape.concat(a, b)).collect())
}
