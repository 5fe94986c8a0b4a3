//! Tape-based reverse-mode automatic differentiation.
//!
//! A [`Tape`] records every operation of one forward pass in order. The
//! backward pass walks the records in exact reverse order and accumulates
//! adjoints deterministically, so identical inputs produce bit-identical
//! gradients. A tape is consumed by [`Tape::backward`]; record a fresh one
//! per training step.
//!
//! Adjoints are only propagated into nodes that can reach a gradient leaf,
//! which is what keeps frozen weights free: they enter as non-gradient
//! leaves, so no weight adjoint is ever formed.

use crate::error::{Error, Result};
use crate::hardconcrete::GateParams;
use crate::scalar::Scalar;
use crate::tensor::{mse, softmax_xent, Tensor};

/// Handle to a recorded tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op<T: Scalar> {
    Leaf,
    Matmul {
        a: usize,
        b: usize,
    },
    AddBias {
        a: usize,
        bias: usize,
    },
    Relu {
        a: usize,
    },
    Flatten {
        a: usize,
    },
    Scale {
        a: usize,
        g: usize,
    },
    Add {
        a: usize,
        b: usize,
    },
    AddConst {
        a: usize,
    },
    MulConst {
        a: usize,
        c: T,
    },
    Sum {
        a: usize,
    },
    /// Gated sum of branches sharing one shape. Branches whose gate value
    /// is exactly 0 are skipped outright and get no adjoint; a gate of
    /// exactly 1 passes its branch through without arithmetic, which makes
    /// one-hot selection bit-exact.
    Combine {
        parts: Vec<(usize, usize)>,
    },
    SoftmaxXent {
        logits: usize,
        probs: Tensor<T>,
        labels: Vec<usize>,
    },
    Mse {
        pred: usize,
        target: Tensor<T>,
    },
    SampleGate {
        log_alpha: usize,
        u_beta: usize,
        params: GateParams<T>,
        u: T,
    },
    DetGate {
        log_alpha: usize,
        params: GateParams<T>,
    },
}

struct Node<T: Scalar> {
    value: Tensor<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Records one forward pass and differentiates it in reverse.
pub struct Tape<T: Scalar> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Tensor<T>>>,
    consumed: bool,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            grads: Vec::new(),
            consumed: false,
        }
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    /// Registers an input tensor. Gradients are accumulated for it only
    /// when `requires_grad` is set.
    pub fn leaf(&mut self, value: Tensor<T>, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Non-gradient input, e.g. data batches and frozen weights.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` target w.r.t. `v`, if one was
    /// accumulated.
    pub fn grad(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads[v.0].as_ref()
    }

    fn needs(&self, idx: usize) -> bool {
        self.nodes[idx].needs_grad
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let needs = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(value, Op::Matmul { a: a.0, b: b.0 }, needs))
    }

    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let value = self.value(a).add_bias(self.value(bias))?;
        let needs = self.needs(a.0) || self.needs(bias.0);
        Ok(self.push(
            value,
            Op::AddBias {
                a: a.0,
                bias: bias.0,
            },
            needs,
        ))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).relu();
        let needs = self.needs(a.0);
        self.push(value, Op::Relu { a: a.0 }, needs)
    }

    pub fn flatten(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).flatten()?;
        let needs = self.needs(a.0);
        Ok(self.push(value, Op::Flatten { a: a.0 }, needs))
    }

    /// Multiplies tensor `a` by the rank-0 gate `g`; the backward pass
    /// routes adjoints to both.
    pub fn scale(&mut self, a: Var, g: Var) -> Result<Var> {
        let gv = self.value(g).item()?;
        let value = self.value(a).scale(gv);
        let needs = self.needs(a.0) || self.needs(g.0);
        Ok(self.push(value, Op::Scale { a: a.0, g: g.0 }, needs))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        let needs = self.needs(a.0) || self.needs(b.0);
        Ok(self.push(value, Op::Add { a: a.0, b: b.0 }, needs))
    }

    pub fn add_const(&mut self, a: Var, c: T) -> Var {
        let mut value = self.value(a).clone();
        for v in value.data_mut() {
            *v += c;
        }
        let needs = self.needs(a.0);
        self.push(value, Op::AddConst { a: a.0 }, needs)
    }

    pub fn mul_const(&mut self, a: Var, c: T) -> Var {
        let value = self.value(a).scale(c);
        let needs = self.needs(a.0);
        self.push(value, Op::MulConst { a: a.0, c }, needs)
    }

    /// Sum of all elements, as a rank-0 tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let total: T = self.value(a).data().iter().cloned().sum();
        let needs = self.needs(a.0);
        self.push(Tensor::scalar(total), Op::Sum { a: a.0 }, needs)
    }

    /// Gated combination `sum_j gate_j * branch_j` over same-shape
    /// branches. Gates must be rank-0 recorded values. Zero gates short
    /// circuit: the branch value is never touched, so non-finite values in
    /// a switched-off branch cannot leak into the output.
    pub fn combine(&mut self, parts: &[(Var, Var)]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::InvalidMergeSpec(
                "combine requires at least one branch".into(),
            ));
        }
        let shape = self.value(parts[0].0).shape().to_vec();
        for &(branch, gate) in parts {
            if self.value(branch).shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch {
                    op: "combine",
                    lhs: shape,
                    rhs: self.value(branch).shape().to_vec(),
                });
            }
            self.value(gate).item()?;
        }
        let mut acc: Option<Tensor<T>> = None;
        for &(branch, gate) in parts {
            let g = self.value(gate).item()?;
            if g == T::zero() {
                continue;
            }
            let term = if g == T::one() {
                self.value(branch).clone()
            } else {
                self.value(branch).scale(g)
            };
            acc = Some(match acc {
                None => term,
                Some(prev) => prev.add(&term)?,
            });
        }
        let value = acc.unwrap_or_else(|| Tensor::zeros(&shape));
        let needs = parts
            .iter()
            .any(|&(b, g)| self.needs(b.0) || self.needs(g.0));
        Ok(self.push(
            value,
            Op::Combine {
                parts: parts.iter().map(|&(b, g)| (b.0, g.0)).collect(),
            },
            needs,
        ))
    }

    pub fn softmax_xent(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let (loss, probs) = softmax_xent(self.value(logits), labels)?;
        let needs = self.needs(logits.0);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::SoftmaxXent {
                logits: logits.0,
                probs,
                labels: labels.to_vec(),
            },
            needs,
        ))
    }

    pub fn mse(&mut self, pred: Var, target: &Tensor<T>) -> Result<Var> {
        let loss = mse(self.value(pred), target)?;
        let needs = self.needs(pred.0);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::Mse {
                pred: pred.0,
                target: target.clone(),
            },
            needs,
        ))
    }

    /// Records a stochastic hard-concrete gate draw at fixed noise `u`.
    /// `log_alpha` and `u_beta` must be rank-0 nodes holding the same
    /// values as `params`.
    pub fn sample_gate(
        &mut self,
        log_alpha: Var,
        u_beta: Var,
        params: GateParams<T>,
        u: T,
    ) -> Result<Var> {
        let g = params.sample_gate_grad(u)?;
        let needs = self.needs(log_alpha.0) || self.needs(u_beta.0);
        Ok(self.push(
            Tensor::scalar(g.gate),
            Op::SampleGate {
                log_alpha: log_alpha.0,
                u_beta: u_beta.0,
                params,
                u,
            },
            needs,
        ))
    }

    /// Records the deterministic (test-time) gate.
    pub fn det_gate(&mut self, log_alpha: Var, params: GateParams<T>) -> Result<Var> {
        let g = params.deterministic_gate_grad();
        let needs = self.needs(log_alpha.0);
        Ok(self.push(
            Tensor::scalar(g.gate),
            Op::DetGate {
                log_alpha: log_alpha.0,
                params,
            },
            needs,
        ))
    }

    fn accumulate(&mut self, idx: usize, delta: Tensor<T>) -> Result<()> {
        if !self.nodes[idx].needs_grad {
            return Ok(());
        }
        match &mut self.grads[idx] {
            Some(g) => {
                *g = g.add(&delta)?;
            }
            slot @ None => *slot = Some(delta),
        }
        Ok(())
    }

    /// Propagates adjoints from the scalar `loss` back to every leaf with
    /// `requires_grad`. Consumes the tape: a second call is an error.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        self.consumed = true;
        let loss_value = self.value(loss);
        if !loss_value.is_scalar() {
            return Err(Error::LossNotScalar(loss_value.shape().to_vec()));
        }
        self.grads[loss.0] = Some(Tensor::scalar(T::one()));
        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let Some(go) = self.grads[idx].clone() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Leaf => {}
                Op::Matmul { a, b } => {
                    let (a, b) = (*a, *b);
                    if self.needs(a) {
                        let da = go.matmul_nt(&self.nodes[b].value)?;
                        self.accumulate(a, da)?;
                    }
                    if self.needs(b) {
                        let db = self.nodes[a].value.matmul_tn(&go)?;
                        self.accumulate(b, db)?;
                    }
                }
                Op::AddBias { a, bias } => {
                    let (a, bias) = (*a, *bias);
                    if self.needs(a) {
                        self.accumulate(a, go.clone())?;
                    }
                    if self.needs(bias) {
                        let n = self.nodes[bias].value.len();
                        let mut col = vec![T::zero(); n];
                        for row in go.data().chunks(n) {
                            for (c, &g) in col.iter_mut().zip(row) {
                                *c += g;
                            }
                        }
                        self.accumulate(bias, Tensor::from_vec(&[n], col)?)?;
                    }
                }
                Op::Relu { a } => {
                    let a = *a;
                    let mut da = go.clone();
                    for (d, &x) in da.data_mut().iter_mut().zip(self.nodes[a].value.data()) {
                        if x <= T::zero() {
                            *d = T::zero();
                        }
                    }
                    self.accumulate(a, da)?;
                }
                Op::Flatten { a } => {
                    let a = *a;
                    let da = go.reshaped(self.nodes[a].value.shape())?;
                    self.accumulate(a, da)?;
                }
                Op::Scale { a, g } => {
                    let (a, g) = (*a, *g);
                    let gv = self.nodes[g].value.item()?;
                    if self.needs(a) {
                        self.accumulate(a, go.scale(gv))?;
                    }
                    if self.needs(g) {
                        let dg = go.dot(&self.nodes[a].value)?;
                        self.accumulate(g, Tensor::scalar(dg))?;
                    }
                }
                Op::Add { a, b } => {
                    let (a, b) = (*a, *b);
                    if self.needs(a) {
                        self.accumulate(a, go.clone())?;
                    }
                    if self.needs(b) {
                        self.accumulate(b, go)?;
                    }
                }
                Op::AddConst { a } => {
                    let a = *a;
                    self.accumulate(a, go)?;
                }
                Op::MulConst { a, c } => {
                    let (a, c) = (*a, *c);
                    self.accumulate(a, go.scale(c))?;
                }
                Op::Sum { a } => {
                    let a = *a;
                    let s = go.item()?;
                    let mut da = Tensor::zeros(self.nodes[a].value.shape());
                    for v in da.data_mut() {
                        *v = s;
                    }
                    self.accumulate(a, da)?;
                }
                Op::Combine { parts } => {
                    for (branch, gate) in parts.clone() {
                        let gv = self.nodes[gate].value.item()?;
                        if gv == T::zero() {
                            continue;
                        }
                        if self.needs(branch) {
                            let da = if gv == T::one() {
                                go.clone()
                            } else {
                                go.scale(gv)
                            };
                            self.accumulate(branch, da)?;
                        }
                        if self.needs(gate) {
                            let dg = go.dot(&self.nodes[branch].value)?;
                            self.accumulate(gate, Tensor::scalar(dg))?;
                        }
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    probs,
                    labels,
                } => {
                    let logits = *logits;
                    let upstream = go.item()?;
                    let c = probs.shape()[1];
                    let b = T::from_f64(labels.len() as f64);
                    let mut da = probs.clone();
                    for (i, &label) in labels.iter().enumerate() {
                        da.data_mut()[i * c + label] -= T::one();
                    }
                    for v in da.data_mut() {
                        *v = *v * upstream / b;
                    }
                    self.accumulate(logits, da)?;
                }
                Op::Mse { pred, target } => {
                    let pred = *pred;
                    let upstream = go.item()?;
                    let n = T::from_f64(target.len() as f64);
                    let two = T::from_f64(2.0);
                    let mut da = self.nodes[pred].value.clone();
                    for (v, &t) in da.data_mut().iter_mut().zip(target.data()) {
                        *v = two * (*v - t) * upstream / n;
                    }
                    self.accumulate(pred, da)?;
                }
                Op::SampleGate {
                    log_alpha,
                    u_beta,
                    params,
                    u,
                } => {
                    let (log_alpha, u_beta) = (*log_alpha, *u_beta);
                    let upstream = go.item()?;
                    let g = params.sample_gate_grad(*u)?;
                    if self.needs(log_alpha) {
                        self.accumulate(log_alpha, Tensor::scalar(upstream * g.d_log_alpha))?;
                    }
                    if self.needs(u_beta) {
                        self.accumulate(u_beta, Tensor::scalar(upstream * g.d_u_beta))?;
                    }
                }
                Op::DetGate { log_alpha, params } => {
                    let log_alpha = *log_alpha;
                    let upstream = go.item()?;
                    let g = params.deterministic_gate_grad();
                    self.accumulate(log_alpha, Tensor::scalar(upstream * g.d_log_alpha))?;
                }
            }
        }
        Ok(())
    }
}
