//! Row-major dense matrices with fixed-order kernels.
//!
//! Every output element is accumulated in the same order regardless of how
//! many rows the operands have, so a graph's values do not depend on what
//! else is in the batch.

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape");
        axpy(1.0, &other.data, &mut self.data);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `x Wᵀ (+ b)` with `W` stored `out × in`.
pub(crate) fn linear(x: &Matrix, w: &Matrix, b: Option<&Matrix>) -> Matrix {
    assert_eq!(x.cols, w.cols, "linear: input width {} vs weight {}x{}", x.cols, w.rows, w.cols);
    let mut y = Matrix::zeros(x.rows, w.rows);
    for i in 0..x.rows {
        let xi = x.row(i);
        let yi = &mut y.data[i * w.rows..(i + 1) * w.rows];
        for (o, yo) in yi.iter_mut().enumerate() {
            *yo = dot(xi, w.row(o));
        }
        if let Some(b) = b {
            for (yo, bo) in yi.iter_mut().zip(&b.data) {
                *yo += bo;
            }
        }
    }
    y
}

/// Backward of [`linear`]: accumulate `dW += dYᵀ x`, `db += Σ dY`, and
/// return `dX = dY W` when requested.
pub(crate) fn linear_backward(
    x: &Matrix,
    w: &Matrix,
    gy: &Matrix,
    gw: &mut Matrix,
    gb: Option<&mut Matrix>,
    want_gx: bool,
) -> Option<Matrix> {
    for i in 0..x.rows {
        let xi = x.row(i);
        let gyi = gy.row(i);
        for (o, &g) in gyi.iter().enumerate() {
            if g != 0.0 {
                axpy(g, xi, gw.row_mut(o));
            }
        }
    }
    if let Some(gb) = gb {
        for i in 0..gy.rows {
            axpy(1.0, gy.row(i), &mut gb.data);
        }
    }
    if !want_gx {
        return None;
    }
    let mut gx = Matrix::zeros(x.rows, x.cols);
    for i in 0..x.rows {
        let gyi = gy.row(i);
        let gxi = &mut gx.data[i * x.cols..(i + 1) * x.cols];
        for (o, &g) in gyi.iter().enumerate() {
            if g != 0.0 {
                axpy(g, w.row(o), gxi);
            }
        }
    }
    Some(gx)
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `x σ(x)`
#[inline]
pub(crate) fn swish(x: f64) -> f64 {
    x * sigmoid(x)
}

#[inline]
pub(crate) fn swish_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}
