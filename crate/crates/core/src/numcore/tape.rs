//! Reverse-mode differentiation over vector-valued nodes.
//!
//! A [`Tape`] borrows a slice of parameter tensors, records every operation
//! as a node holding its forward value, and [`Tape::backward`] walks the
//! nodes in reverse to produce one gradient tensor per parameter.

use crate::error::{Error, Result};
use crate::numcore::ops::{self, mat_t_vec, mat_vec, sigmoid};
use crate::numcore::tensor::Tensor;
use crate::scalar::Scalar;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op<T> {
    Param(usize),
    Const,
    Row { param: usize, row: usize },
    MatVec { w: Var, x: Var },
    MatTVec { w: Var, x: Var },
    Add(Var, Var),
    Mul(Var, Var),
    OneMinus(Var),
    Scale(Var, T),
    ScaleBy { s: Var, x: Var },
    MaskMul(Var, Vec<T>),
    Sigmoid(Var),
    Tanh(Var),
    Softmax(Var),
    MaskedRowSoftmax { logits: Var, mask: Vec<bool> },
    Dot(Var, Var),
    Concat(Var, Var),
    Slice { x: Var, start: usize },
    NegLogPick { p: Var, index: usize },
    Sum(Vec<Var>),
}

#[derive(Debug, Clone)]
struct Node<T> {
    op: Op<T>,
    /// Empty for parameter leaves, whose value lives in the borrowed slice.
    value: Vec<T>,
    rows: usize,
    cols: usize,
}

pub struct Tape<'p, T> {
    params: &'p [Tensor<T>],
    nodes: Vec<Node<T>>,
}

impl<'p, T: Scalar> Tape<'p, T> {
    pub fn new(params: &'p [Tensor<T>]) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[T] {
        let node = &self.nodes[v.0];
        match node.op {
            Op::Param(p) => self.params[p].data(),
            _ => &node.value,
        }
    }

    /// Value of a single-element node.
    pub fn scalar(&self, v: Var) -> T {
        self.value(v)[0]
    }

    fn dims(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    fn len_of(&self, v: Var) -> usize {
        let (r, c) = self.dims(v);
        r * c
    }

    fn push(&mut self, op: Op<T>, value: Vec<T>, rows: usize, cols: usize) -> Var {
        debug_assert!(matches!(op, Op::Param(_)) || value.len() == rows * cols);
        self.nodes.push(Node {
            op,
            value,
            rows,
            cols,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_vec(&mut self, op: Op<T>, value: Vec<T>) -> Var {
        let n = value.len();
        self.push(op, value, n, 1)
    }

    fn same_len(&self, what: &str, a: Var, b: Var) -> Result<()> {
        if self.len_of(a) != self.len_of(b) {
            return Err(Error::Shape(format!(
                "{what}: lengths {} and {}",
                self.len_of(a),
                self.len_of(b)
            )));
        }
        Ok(())
    }

    pub fn param(&mut self, index: usize) -> Var {
        let t = &self.params[index];
        let (rows, cols) = (t.rows(), t.cols());
        self.push(Op::Param(index), Vec::new(), rows, cols)
    }

    pub fn constant(&mut self, value: Vec<T>) -> Var {
        self.push_vec(Op::Const, value)
    }

    /// One row of a matrix parameter, e.g. an embedding lookup.
    pub fn row(&mut self, param: usize, row: usize) -> Var {
        let value = self.params[param].row(row).to_vec();
        self.push_vec(Op::Row { param, row }, value)
    }

    pub fn mat_vec(&mut self, w: Var, x: Var) -> Result<Var> {
        let (rows, cols) = self.dims(w);
        if cols != self.len_of(x) {
            return Err(Error::Shape(format!(
                "mat_vec: {rows}x{cols} matrix against length {}",
                self.len_of(x)
            )));
        }
        let value = mat_vec(self.value(w), cols, self.value(x));
        Ok(self.push_vec(Op::MatVec { w, x }, value))
    }

    pub fn mat_t_vec(&mut self, w: Var, x: Var) -> Result<Var> {
        let (rows, cols) = self.dims(w);
        if rows != self.len_of(x) {
            return Err(Error::Shape(format!(
                "mat_t_vec: {rows}x{cols} matrix against length {}",
                self.len_of(x)
            )));
        }
        let value = mat_t_vec(self.value(w), cols, self.value(x));
        Ok(self.push_vec(Op::MatTVec { w, x }, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_len("add", a, b)?;
        let value = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| x + y)
            .collect();
        Ok(self.push_vec(Op::Add(a, b), value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_len("mul", a, b)?;
        let value = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| x * y)
            .collect();
        Ok(self.push_vec(Op::Mul(a, b), value))
    }

    /// `1 - x` elementwise.
    pub fn one_minus(&mut self, x: Var) -> Var {
        let value = self.value(x).iter().map(|&v| T::one() - v).collect();
        self.push_vec(Op::OneMinus(x), value)
    }

    pub fn scale(&mut self, x: Var, k: T) -> Var {
        let value = self.value(x).iter().map(|&v| v * k).collect();
        self.push_vec(Op::Scale(x, k), value)
    }

    /// `s * x` for a single-element node `s`.
    pub fn scale_by(&mut self, s: Var, x: Var) -> Result<Var> {
        if self.len_of(s) != 1 {
            return Err(Error::Shape("scale_by: scale must have one element".into()));
        }
        let k = self.scalar(s);
        let value = self.value(x).iter().map(|&v| k * v).collect();
        Ok(self.push_vec(Op::ScaleBy { s, x }, value))
    }

    /// Elementwise product with a constant mask (dropout).
    pub fn mask_mul(&mut self, x: Var, mask: Vec<T>) -> Result<Var> {
        if mask.len() != self.len_of(x) {
            return Err(Error::Shape("mask_mul: mask length".into()));
        }
        let value = self.value(x).iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        Ok(self.push_vec(Op::MaskMul(x, mask), value))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let value = self.value(x).iter().map(|&v| sigmoid(v)).collect();
        self.push_vec(Op::Sigmoid(x), value)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let value = self.value(x).iter().map(|&v| v.tanh()).collect();
        self.push_vec(Op::Tanh(x), value)
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let value = ops::softmax(self.value(x));
        self.push_vec(Op::Softmax(x), value)
    }

    /// Per-row softmax over the unmasked entries of a matrix node; masked
    /// entries are exactly zero and receive no gradient.
    pub fn masked_row_softmax(&mut self, logits: Var, mask: Vec<bool>) -> Result<Var> {
        let (rows, cols) = self.dims(logits);
        if mask.len() != rows * cols {
            return Err(Error::Shape("masked_row_softmax: mask shape".into()));
        }
        let value = ops::masked_row_softmax(self.value(logits), &mask, cols);
        Ok(self.push(Op::MaskedRowSoftmax { logits, mask }, value, rows, cols))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_len("dot", a, b)?;
        let value = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| x * y)
            .sum();
        Ok(self.push_vec(Op::Dot(a, b), vec![value]))
    }

    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let mut value = self.value(a).to_vec();
        value.extend_from_slice(self.value(b));
        self.push_vec(Op::Concat(a, b), value)
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        if start + len > self.len_of(x) {
            return Err(Error::Shape("slice out of range".into()));
        }
        let value = self.value(x)[start..start + len].to_vec();
        Ok(self.push_vec(Op::Slice { x, start }, value))
    }

    /// Clamped cross-entropy `-ln max(p[index], floor)` of a probability node.
    pub fn neg_log_pick(&mut self, p: Var, index: usize) -> Result<Var> {
        let value = ops::cross_entropy(self.value(p), index)?;
        Ok(self.push_vec(Op::NegLogPick { p, index }, vec![value]))
    }

    /// Sum of single-element nodes.
    pub fn sum(&mut self, xs: Vec<Var>) -> Result<Var> {
        if xs.iter().any(|&x| self.len_of(x) != 1) {
            return Err(Error::Shape("sum expects single-element nodes".into()));
        }
        let value = xs.iter().map(|&x| self.scalar(x)).sum();
        Ok(self.push_vec(Op::Sum(xs), vec![value]))
    }

    /// Gradients of the single-element node `loss` with respect to every
    /// parameter. Parameters that `loss` does not depend on get exact zeros.
    pub fn backward(&self, loss: Var) -> Result<Vec<Tensor<T>>> {
        if self.len_of(loss) != 1 {
            return Err(Error::Shape(format!(
                "backward needs a scalar loss, got {} elements",
                self.len_of(loss)
            )));
        }
        let mut param_grads: Vec<Tensor<T>> = self.params.iter().map(Tensor::zeros_like).collect();
        let mut grads: Vec<Option<Vec<T>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![T::one()]);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Param(p) => {
                    for (a, &b) in param_grads[*p].data_mut().iter_mut().zip(&g) {
                        *a = *a + b;
                    }
                }
                Op::Const => {}
                Op::Row { param, row } => {
                    for (a, &b) in param_grads[*param].row_mut(*row).iter_mut().zip(&g) {
                        *a = *a + b;
                    }
                }
                Op::MatVec { w, x } => {
                    let cols = self.nodes[w.0].cols;
                    let wv = self.value(*w);
                    let xv = self.value(*x);
                    let gx = mat_t_vec(wv, cols, &g);
                    let gw: Vec<T> = g
                        .iter()
                        .flat_map(|&gi| xv.iter().map(move |&xj| gi * xj))
                        .collect();
                    accumulate(&mut grads, *w, &gw);
                    accumulate(&mut grads, *x, &gx);
                }
                Op::MatTVec { w, x } => {
                    let cols = self.nodes[w.0].cols;
                    let wv = self.value(*w);
                    let xv = self.value(*x);
                    let gx = mat_vec(wv, cols, &g);
                    let gw: Vec<T> = xv
                        .iter()
                        .flat_map(|&xi| g.iter().map(move |&gj| xi * gj))
                        .collect();
                    accumulate(&mut grads, *w, &gw);
                    accumulate(&mut grads, *x, &gx);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, &g);
                    accumulate(&mut grads, *b, &g);
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    let ga: Vec<T> = g.iter().zip(bv).map(|(&gi, &y)| gi * y).collect();
                    let gb: Vec<T> = g.iter().zip(av).map(|(&gi, &x)| gi * x).collect();
                    accumulate(&mut grads, *a, &ga);
                    accumulate(&mut grads, *b, &gb);
                }
                Op::OneMinus(x) => {
                    let gx: Vec<T> = g.iter().map(|&gi| -gi).collect();
                    accumulate(&mut grads, *x, &gx);
                }
                Op::Scale(x, k) => {
                    let gx: Vec<T> = g.iter().map(|&gi| gi * *k).collect();
                    accumulate(&mut grads, *x, &gx);
                }
                Op::ScaleBy { s, x } => {
                    let k = self.scalar(*s);
                    let xv = self.value(*x);
                    let gs: T = g.iter().zip(xv).map(|(&gi, &v)| gi * v).sum();
                    let gx: Vec<T> = g.iter().map(|&gi| gi * k).collect();
                    accumulate(&mut grads, *s, &[gs]);
                    accumulate(&mut grads, *x, &gx);
                }
                Op::MaskMul(x, mask) => {
                    let gx: Vec<T> = g.iter().zip(mask).map(|(&gi, &m)| gi * m).collect();
                    accumulate(&mut grads, *x, &gx);
                }
                Op::Sigmoid(x) => {
                    let gx: Vec<T> = g
                        .iter()
                        .zip(&node.value)
                        .map(|(&gi, &y)| gi * y * (T::one() - y))
                        .collect();
                    accumulate(&mut grads, *x, &gx);
                }
                Op::Tanh(x) => {
                    let gx: Vec<T> = g
                        .iter()
                        .zip(&node.value)
                        .map(|(&gi, &y)| gi * (T::one() - y * y))
                        .collect();
                    accumulate(&mut grads, *x, &gx);
                }
                Op::Softmax(x) => {
                    let gx = softmax_backward(&node.value, &g);
                    accumulate(&mut grads, *x, &gx);
                }
                Op::MaskedRowSoftmax { logits, mask } => {
                    let cols = node.cols;
                    let mut gl = vec![T::zero(); node.value.len()];
                    for ((y, gy), (m, out)) in node
                        .value
                        .chunks_exact(cols)
                        .zip(g.chunks_exact(cols))
                        .zip(mask.chunks_exact(cols).zip(gl.chunks_exact_mut(cols)))
                    {
                        let inner: T = y
                            .iter()
                            .zip(gy)
                            .zip(m)
                            .filter(|(_, &keep)| keep)
                            .map(|((&yi, &gi), _)| yi * gi)
                            .sum();
                        for (((o, &yi), &gi), &keep) in out.iter_mut().zip(y).zip(gy).zip(m) {
                            if keep {
                                *o = yi * (gi - inner);
                            }
                        }
                    }
                    accumulate(&mut grads, *logits, &gl);
                }
                Op::Dot(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    let ga: Vec<T> = bv.iter().map(|&y| g[0] * y).collect();
                    let gb: Vec<T> = av.iter().map(|&x| g[0] * x).collect();
                    accumulate(&mut grads, *a, &ga);
                    accumulate(&mut grads, *b, &gb);
                }
                Op::Concat(a, b) => {
                    let n = self.len_of(*a);
                    accumulate(&mut grads, *a, &g[..n]);
                    accumulate(&mut grads, *b, &g[n..]);
                }
                Op::Slice { x, start } => {
                    let mut gx = vec![T::zero(); self.len_of(*x)];
                    gx[*start..*start + g.len()].copy_from_slice(&g);
                    accumulate(&mut grads, *x, &gx);
                }
                Op::NegLogPick { p, index } => {
                    let pv = self.value(*p);
                    let mut gp = vec![T::zero(); pv.len()];
                    let py = pv[*index];
                    if py > T::lit(ops::LOG_PROB_FLOOR) {
                        gp[*index] = -g[0] / py;
                    }
                    accumulate(&mut grads, *p, &gp);
                }
                Op::Sum(xs) => {
                    for &x in xs {
                        accumulate(&mut grads, x, &g);
                    }
                }
            }
        }
        Ok(param_grads)
    }
}

fn accumulate<T: Scalar>(grads: &mut [Option<Vec<T>>], v: Var, g: &[T]) {
    match &mut grads[v.0] {
        Some(acc) => {
            for (a, &b) in acc.iter_mut().zip(g) {
                *a = *a + b;
            }
        }
        slot @ None => *slot = Some(g.to_vec()),
    }
}

/// `dx = y * (dy - <dy, y>)` for `y = softmax(x)`.
fn softmax_backward<T: Scalar>(y: &[T], dy: &[T]) -> Vec<T> {
    let inner: T = y.iter().zip(dy).map(|(&a, &b)| a * b).sum();
    y.iter().zip(dy).map(|(&yi, &gi)| yi * (gi - inner)).collect()
}
