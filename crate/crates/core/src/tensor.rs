//! Dense row-major tensors and the forward kernels shared by the plain
//! and recorded (autodiff) execution paths.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real array. Rank-0 tensors (empty shape, one element) are used
/// for scalars such as losses and gate values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T: Scalar> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                op: "from_vec",
                lhs: shape.to_vec(),
                rhs: vec![data.len()],
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Rank-0 tensor holding a single value.
    pub fn scalar(v: T) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![v],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.shape.iter().product::<usize>() == 1
    }

    /// The single element of a scalar tensor.
    pub fn item(&self) -> Result<T> {
        if self.is_scalar() {
            Ok(self.data[0])
        } else {
            Err(Error::LossNotScalar(self.shape.clone()))
        }
    }

    fn check_matrix(&self, op: &'static str) -> Result<(usize, usize)> {
        if self.shape.len() == 2 {
            Ok((self.shape[0], self.shape[1]))
        } else {
            Err(Error::ShapeMismatch {
                op,
                lhs: self.shape.clone(),
                rhs: vec![],
            })
        }
    }

    /// `[m x k] . [k x n] -> [m x n]`, accumulation in fixed k-order.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        let (m, k) = self.check_matrix("matmul")?;
        let (k2, n) = rhs.check_matrix("matmul")?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: self.shape.clone(),
                rhs: rhs.shape.clone(),
            });
        }
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            for p in 0..k {
                let a = self.data[i * k + p];
                let row = &rhs.data[p * n..(p + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Tensor::from_vec(&[m, n], out)
    }

    /// `[m x k] . [n x k]^T -> [m x n]` (used by backward passes).
    pub(crate) fn matmul_nt(&self, rhs: &Self) -> Result<Self> {
        let (m, k) = self.check_matrix("matmul_nt")?;
        let (n, k2) = rhs.check_matrix("matmul_nt")?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul_nt",
                lhs: self.shape.clone(),
                rhs: rhs.shape.clone(),
            });
        }
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = T::zero();
                for p in 0..k {
                    acc += self.data[i * k + p] * rhs.data[j * k + p];
                }
                out[i * n + j] = acc;
            }
        }
        Tensor::from_vec(&[m, n], out)
    }

    /// `[k x m]^T . [k x n] -> [m x n]` (used by backward passes).
    pub(crate) fn matmul_tn(&self, rhs: &Self) -> Result<Self> {
        let (k, m) = self.check_matrix("matmul_tn")?;
        let (k2, n) = rhs.check_matrix("matmul_tn")?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul_tn",
                lhs: self.shape.clone(),
                rhs: rhs.shape.clone(),
            });
        }
        let mut out = vec![T::zero(); m * n];
        for p in 0..k {
            for i in 0..m {
                let a = self.data[p * m + i];
                let row = &rhs.data[p * n..(p + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Tensor::from_vec(&[m, n], out)
    }

    /// Adds a `[n]` bias to every row of a `[m x n]` matrix.
    pub fn add_bias(&self, bias: &Self) -> Result<Self> {
        let (_, n) = self.check_matrix("add_bias")?;
        if bias.shape != [n] {
            return Err(Error::ShapeMismatch {
                op: "add_bias",
                lhs: self.shape.clone(),
                rhs: bias.shape.clone(),
            });
        }
        let mut out = self.clone();
        for row in out.data.chunks_mut(n) {
            for (d, &b) in row.iter_mut().zip(&bias.data) {
                *d += b;
            }
        }
        Ok(out)
    }

    pub fn relu(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        out
    }

    /// Collapses `[b, d1, d2, ...]` into `[b, d1*d2*...]`; rank-1 tensors
    /// become `[b, 1]`.
    pub fn flatten(&self) -> Result<Self> {
        if self.shape.is_empty() {
            return Err(Error::ShapeMismatch {
                op: "flatten",
                lhs: self.shape.clone(),
                rhs: vec![],
            });
        }
        let b = self.shape[0];
        let rest: usize = self.shape[1..].iter().product();
        Tensor::from_vec(&[b, rest], self.data.clone())
    }

    /// Reinterprets the buffer with a new shape of identical length.
    pub(crate) fn reshaped(&self, shape: &[usize]) -> Result<Self> {
        Tensor::from_vec(shape, self.data.clone())
    }

    /// Elementwise multiplication by a scalar value.
    pub fn scale(&self, g: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = *v * g;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.shape != rhs.shape {
            return Err(Error::ShapeMismatch {
                op: "add",
                lhs: self.shape.clone(),
                rhs: rhs.shape.clone(),
            });
        }
        let mut out = self.clone();
        for (d, &b) in out.data.iter_mut().zip(&rhs.data) {
            *d += b;
        }
        Ok(out)
    }

    /// Index of the largest element in each row of a `[m x n]` matrix;
    /// ties resolve to the lowest index.
    pub fn argmax_rows(&self) -> Result<Vec<usize>> {
        let (_, n) = self.check_matrix("argmax_rows")?;
        Ok(self
            .data
            .chunks(n)
            .map(|row| {
                let mut best = 0;
                for (i, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect())
    }

    /// Sum of elementwise products; shapes must match.
    pub(crate) fn dot(&self, rhs: &Self) -> Result<T> {
        if self.shape != rhs.shape {
            return Err(Error::ShapeMismatch {
                op: "dot",
                lhs: self.shape.clone(),
                rhs: rhs.shape.clone(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a * b)
            .sum())
    }

    pub fn iter_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Mean negative log-softmax of the true class, with the row-max shift so
/// arbitrarily large logits stay finite. Returns the loss and the softmax
/// probabilities (saved for the backward pass).
pub fn softmax_xent<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<(T, Tensor<T>)> {
    let shape = logits.shape();
    if shape.len() != 2 {
        return Err(Error::ShapeMismatch {
            op: "softmax_xent",
            lhs: shape.to_vec(),
            rhs: vec![labels.len()],
        });
    }
    let (b, c) = (shape[0], shape[1]);
    if labels.len() != b {
        return Err(Error::ShapeMismatch {
            op: "softmax_xent",
            lhs: shape.to_vec(),
            rhs: vec![labels.len()],
        });
    }
    let mut probs = vec![T::zero(); b * c];
    let mut loss = T::zero();
    for (i, (&label, row)) in labels.iter().zip(logits.data().chunks(c)).enumerate() {
        if label >= c {
            return Err(Error::LabelOutOfRange { label, classes: c });
        }
        let max = row.iter().cloned().fold(T::neg_infinity(), T::max);
        let mut denom = T::zero();
        for (j, &z) in row.iter().enumerate() {
            let e = (z - max).exp();
            probs[i * c + j] = e;
            denom += e;
        }
        for p in &mut probs[i * c..(i + 1) * c] {
            *p = *p / denom;
        }
        // -log softmax[label] = log(denom) - (z_label - max)
        loss += denom.ln() - (row[label] - max);
    }
    let batch = T::from_f64(b as f64);
    Ok((loss / batch, Tensor::from_vec(&[b, c], probs)?))
}

/// Mean squared error over all elements.
pub fn mse<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<T> {
    if pred.shape() != target.shape() {
        return Err(Error::ShapeMismatch {
            op: "mse",
            lhs: pred.shape().to_vec(),
            rhs: target.shape().to_vec(),
        });
    }
    let n = T::from_f64(pred.len() as f64);
    let acc: T = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(acc / n)
}
