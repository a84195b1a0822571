//! Matrix-level reverse-mode tape.
//!
//! Every node holds its forward value; `backward` walks the nodes in reverse
//! and accumulates parameter gradients into a [`Gradients`] buffer.

use super::params::{Gradients, ModelParams};
use super::tensor::{self, Matrix};

pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    /// Constant input (basis features); no gradient flows into it.
    Leaf,
    /// Rows of a parameter table.
    Embed { table: usize, rows: Vec<usize> },
    Linear { x: NodeId, w: usize, b: Option<usize> },
    Swish { x: NodeId },
    Mul { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    /// `out[i] = x[rows[i]]`
    Gather { x: NodeId, rows: Vec<usize> },
    /// `out[rows[i]] += x[i]`
    Scatter { x: NodeId, rows: Vec<usize> },
    /// Column-wise concatenation.
    Concat { parts: Vec<NodeId> },
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: Matrix,
    /// Whether any parameter lies upstream of this node.
    tracked: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Matrix {
        &self.nodes[id].value
    }

    fn push(&mut self, op: Op, value: Matrix, tracked: bool) -> NodeId {
        self.nodes.push(Node { op, value, tracked });
        self.nodes.len() - 1
    }

    fn tracked(&self, id: NodeId) -> bool {
        self.nodes[id].tracked
    }

    pub fn leaf(&mut self, value: Matrix) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    pub fn embed(&mut self, params: &ModelParams, table: usize, rows: &[usize]) -> NodeId {
        let t = params.tensor(table);
        let mut out = Matrix::zeros(rows.len(), t.cols());
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(t.row(r));
        }
        self.push(Op::Embed { table, rows: rows.to_vec() }, out, true)
    }

    pub fn linear(&mut self, params: &ModelParams, x: NodeId, w: usize, b: Option<usize>) -> NodeId {
        let out = tensor::linear(self.value(x), params.tensor(w), b.map(|b| params.tensor(b)));
        self.push(Op::Linear { x, w, b }, out, true)
    }

    pub fn swish(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x);
        let out = Matrix::from_vec(v.rows(), v.cols(), v.data().iter().map(|&t| tensor::swish(t)).collect());
        let tracked = self.tracked(x);
        self.push(Op::Swish { x }, out, tracked)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "mul shape");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let out = Matrix::from_vec(va.rows(), va.cols(), data);
        let tracked = self.tracked(a) || self.tracked(b);
        self.push(Op::Mul { a, b }, out, tracked)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "add shape");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x + y).collect();
        let out = Matrix::from_vec(va.rows(), va.cols(), data);
        let tracked = self.tracked(a) || self.tracked(b);
        self.push(Op::Add { a, b }, out, tracked)
    }

    pub fn gather(&mut self, x: NodeId, rows: &[usize]) -> NodeId {
        let v = self.value(x);
        let mut out = Matrix::zeros(rows.len(), v.cols());
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(v.row(r));
        }
        let tracked = self.tracked(x);
        self.push(Op::Gather { x, rows: rows.to_vec() }, out, tracked)
    }

    /// Sum rows of `x` into `n_out` buckets, in row order.
    pub fn scatter_add(&mut self, x: NodeId, rows: &[usize], n_out: usize) -> NodeId {
        let v = self.value(x);
        assert_eq!(v.rows(), rows.len(), "scatter index length");
        let mut out = Matrix::zeros(n_out, v.cols());
        for (i, &r) in rows.iter().enumerate() {
            tensor::axpy(1.0, v.row(i), out.row_mut(r));
        }
        let tracked = self.tracked(x);
        self.push(Op::Scatter { x, rows: rows.to_vec() }, out, tracked)
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let mut at = 0;
            for &p in parts {
                let src = self.value(p).row(i);
                out.row_mut(i)[at..at + src.len()].copy_from_slice(src);
                at += src.len();
            }
        }
        let tracked = parts.iter().any(|&p| self.tracked(p));
        self.push(Op::Concat { parts: parts.to_vec() }, out, tracked)
    }

    /// Reverse sweep from `output`, seeded with `seed` (same shape as the
    /// output), adding parameter gradients into `grads`.
    pub fn backward(&self, params: &ModelParams, output: NodeId, seed: Matrix, grads: &mut Gradients) {
        assert_eq!(seed.shape(), self.value(output).shape(), "seed shape");
        let mut g: Vec<Option<Matrix>> = vec![None; output + 1];
        g[output] = Some(seed);
        for id in (0..=output).rev() {
            let Some(gy) = g[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.tracked {
                continue;
            }
            match &node.op {
                Op::Leaf => {}
                Op::Embed { table, rows } => {
                    let gt = grads.tensor_mut(*table);
                    for (i, &r) in rows.iter().enumerate() {
                        tensor::axpy(1.0, gy.row(i), gt.row_mut(r));
                    }
                }
                Op::Linear { x, w, b } => {
                    let want_gx = self.tracked(*x);
                    let (gw, gb) = grads.pair_mut(*w, *b);
                    let gx = tensor::linear_backward(
                        self.value(*x),
                        params.tensor(*w),
                        &gy,
                        gw,
                        gb,
                        want_gx,
                    );
                    if let Some(gx) = gx {
                        accumulate(&mut g, *x, gx);
                    }
                }
                Op::Swish { x } => {
                    let xv = self.value(*x);
                    let data = gy.data().iter().zip(xv.data()).map(|(d, &t)| d * tensor::swish_grad(t)).collect();
                    accumulate(&mut g, *x, Matrix::from_vec(gy.rows(), gy.cols(), data));
                }
                Op::Mul { a, b } => {
                    if self.tracked(*a) {
                        let data = gy.data().iter().zip(self.value(*b).data()).map(|(d, v)| d * v).collect();
                        accumulate(&mut g, *a, Matrix::from_vec(gy.rows(), gy.cols(), data));
                    }
                    if self.tracked(*b) {
                        let data = gy.data().iter().zip(self.value(*a).data()).map(|(d, v)| d * v).collect();
                        accumulate(&mut g, *b, Matrix::from_vec(gy.rows(), gy.cols(), data));
                    }
                }
                Op::Add { a, b } => {
                    if self.tracked(*a) {
                        accumulate(&mut g, *a, gy.clone());
                    }
                    if self.tracked(*b) {
                        accumulate(&mut g, *b, gy);
                    }
                }
                Op::Gather { x, rows } => {
                    let xv = self.value(*x);
                    let mut gx = Matrix::zeros(xv.rows(), xv.cols());
                    for (i, &r) in rows.iter().enumerate() {
                        tensor::axpy(1.0, gy.row(i), gx.row_mut(r));
                    }
                    accumulate(&mut g, *x, gx);
                }
                Op::Scatter { x, rows } => {
                    let mut gx = Matrix::zeros(rows.len(), gy.cols());
                    for (i, &r) in rows.iter().enumerate() {
                        gx.row_mut(i).copy_from_slice(gy.row(r));
                    }
                    accumulate(&mut g, *x, gx);
                }
                Op::Concat { parts } => {
                    let mut at = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        if self.tracked(p) {
                            let mut gp = Matrix::zeros(gy.rows(), w);
                            for i in 0..gy.rows() {
                                gp.row_mut(i).copy_from_slice(&gy.row(i)[at..at + w]);
                            }
                            accumulate(&mut g, p, gp);
                        }
                        at += w;
                    }
                }
            }
        }
    }
}

fn accumulate(g: &mut [Option<Matrix>], id: NodeId, delta: Matrix) {
    match &mut g[id] {
        Some(existing) => existing.add_assign(&delta),
        slot => *slot = Some(delta),
    }
}
