use rand::Rng;
use serde::{Deserialize, Serialize};

/// A named, row-major matrix inside the flat parameter buffer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// All trainable parameters in one contiguous buffer.
///
/// Values are kept representable in single precision (see [`Params::round`])
/// so that checkpoints, which store `f32`, reproduce them exactly; arithmetic
/// is carried out in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub tensors: Vec<TensorSpec>,
    pub values: Vec<f64>,
}

impl Params {
    pub fn new() -> Self {
        Self {
            tensors: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a zero tensor and returns its offset.
    pub fn add(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> usize {
        let offset = self.values.len();
        self.tensors.push(TensorSpec {
            name: name.into(),
            rows,
            cols,
            offset,
        });
        self.values.resize(offset + rows * cols, 0.0);
        offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorSpec> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn slice(&self, name: &str) -> &[f64] {
        let t = self
            .tensor(name)
            .unwrap_or_else(|| panic!("no tensor {name}"));
        &self.values[t.range()]
    }

    pub fn slice_mut(&mut self, name: &str) -> &mut [f64] {
        let range = self
            .tensor(name)
            .unwrap_or_else(|| panic!("no tensor {name}"))
            .range();
        &mut self.values[range]
    }

    pub fn fill_uniform<R: Rng>(&mut self, name: &str, r: f64, rng: &mut R) {
        for v in self.slice_mut(name) {
            *v = rng.gen_range(-r..=r);
        }
    }

    pub fn round(&mut self) {
        for v in &mut self.values {
            *v = *v as f32 as f64;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl Default for Params {
    fn default() -> Self {
        Self::new()
    }
}

/// Glorot/Xavier uniform range.
pub fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

pub fn global_norm(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn clip_to_norm(g: &mut [f64], max_norm: f64) -> f64 {
    let norm = global_norm(g);
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        g.iter_mut().for_each(|x| *x *= scale);
    }
    norm
}

/// `y += x · W` for a row vector `x` and a row-major `W` of shape `x.len() × y.len()`.
#[inline]
pub fn vec_mat_acc(x: &[f64], w: &[f64], y: &mut [f64]) {
    let cols = y.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &w[i * cols..(i + 1) * cols];
        for (yj, wj) in y.iter_mut().zip(row) {
            *yj += xi * wj;
        }
    }
}

/// `dx += W · dy`, the transpose product used in backpropagation.
#[inline]
pub fn mat_vec_acc(w: &[f64], dy: &[f64], dx: &mut [f64]) {
    let cols = dy.len();
    for (i, dxi) in dx.iter_mut().enumerate() {
        let row = &w[i * cols..(i + 1) * cols];
        *dxi += row.iter().zip(dy).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `dW += xᵀ · dy`.
#[inline]
pub fn outer_acc(x: &[f64], dy: &[f64], dw: &mut [f64]) {
    let cols = dy.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &mut dw[i * cols..(i + 1) * cols];
        for (r, d) in row.iter_mut().zip(dy) {
            *r += xi * d;
        }
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_agree_with_naive_loops() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut y = [0.0; 3];
        vec_mat_acc(&[1.0, -1.0], &w, &mut y);
        assert_eq!(y, [-3.0, -3.0, -3.0]);
        let mut dx = [0.0; 2];
        mat_vec_acc(&w, &[1.0, 0.0, 1.0], &mut dx);
        assert_eq!(dx, [4.0, 10.0]);
        let mut dw = [0.0; 6];
        outer_acc(&[2.0, 3.0], &[1.0, 0.0, -1.0], &mut dw);
        assert_eq!(dw, [2.0, 0.0, -2.0, 3.0, 0.0, -3.0]);
    }

    #[test]
    fn clipping_caps_norm() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_to_norm(&mut g, 1.0), 5.0);
        assert!((global_norm(&g) - 1.0).abs() < 1e-12);
        let mut small = vec![0.3, 0.4];
        clip_to_norm(&mut small, 1.0);
        assert_eq!(small, [0.3, 0.4]);
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut z = [0.0; 4];
        softmax_in_place(&mut z);
        assert!(z.iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }
}
