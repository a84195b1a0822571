use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Matrix;
use super::NetworkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Dense weight `out × in`, drawn from `U(-1/√in, 1/√in)`.
    Weight,
    /// Zero-initialized bias row.
    Bias,
    /// Embedding table, drawn from `U(-1, 1)`.
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub kind: ParamKind,
}

/// Ordered, named parameter shapes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    specs: Vec<ParamSpec>,
    index: HashMap<String, usize>,
}

impl Layout {
    pub(crate) fn register(&mut self, name: String, rows: usize, cols: usize, kind: ParamKind) -> usize {
        assert!(!self.index.contains_key(&name), "duplicate parameter {name}");
        let id = self.specs.len();
        self.index.insert(name.clone(), id);
        self.specs.push(ParamSpec { name, rows, cols, kind });
        id
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_scalars(&self) -> usize {
        self.specs.iter().map(|s| s.rows * s.cols).sum()
    }
}

/// 64-bit FNV-1a; keys each tensor's random stream by its name so shared
/// tensors start identical across ablation modes.
fn name_stream(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layout: Arc<Layout>,
    tensors: Vec<Matrix>,
}

impl ModelParams {
    pub fn zeros(layout: Arc<Layout>) -> Self {
        let tensors = layout.specs.iter().map(|s| Matrix::zeros(s.rows, s.cols)).collect();
        Self { layout, tensors }
    }

    /// Deterministic initialization: one ChaCha8 stream per tensor, keyed by
    /// `(seed, name)`.
    pub fn init(layout: Arc<Layout>, seed: u64) -> Self {
        let mut params = Self::zeros(layout.clone());
        for (spec, t) in layout.specs.iter().zip(params.tensors.iter_mut()) {
            let bound = match spec.kind {
                ParamKind::Bias => continue,
                ParamKind::Table => 1.0,
                ParamKind::Weight => 1.0 / (spec.cols as f64).sqrt(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(name_stream(&spec.name));
            for v in t.data_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        params
    }

    pub fn from_tensors(layout: Arc<Layout>, tensors: Vec<Matrix>) -> Result<Self, NetworkError> {
        let p = Self { layout, tensors };
        p.audit()?;
        Ok(p)
    }

    /// Check that every tensor has the shape its spec declares.
    pub fn audit(&self) -> Result<(), NetworkError> {
        if self.tensors.len() != self.layout.len() {
            return Err(NetworkError::Shape(format!(
                "{} tensors for {} parameters",
                self.tensors.len(),
                self.layout.len()
            )));
        }
        for (spec, t) in self.layout.specs.iter().zip(&self.tensors) {
            if t.shape() != (spec.rows, spec.cols) {
                return Err(NetworkError::Shape(format!(
                    "{} is {:?}, expected {:?}",
                    spec.name,
                    t.shape(),
                    (spec.rows, spec.cols)
                )));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn tensor(&self, id: usize) -> &Matrix {
        &self.tensors[id]
    }

    pub fn tensor_mut(&mut self, id: usize) -> &mut Matrix {
        &mut self.tensors[id]
    }

    pub fn tensors(&self) -> &[Matrix] {
        &self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.layout.find(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.layout.find(name).map(move |i| &mut self.tensors[i])
    }

    /// Flat view over all scalars in layout order.
    pub fn scalars(&self) -> impl Iterator<Item = f64> + '_ {
        self.tensors.iter().flat_map(|t| t.data().iter().copied())
    }
}

/// Gradient buffers mirroring a [`ModelParams`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    tensors: Vec<Matrix>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self { tensors: params.tensors.iter().map(|t| Matrix::zeros(t.rows(), t.cols())).collect() }
    }

    pub fn tensor(&self, id: usize) -> &Matrix {
        &self.tensors[id]
    }

    pub fn tensor_mut(&mut self, id: usize) -> &mut Matrix {
        &mut self.tensors[id]
    }

    pub fn tensors(&self) -> &[Matrix] {
        &self.tensors
    }

    /// Weight and optional bias buffers at once.
    pub(crate) fn pair_mut(&mut self, w: usize, b: Option<usize>) -> (&mut Matrix, Option<&mut Matrix>) {
        match b {
            None => (&mut self.tensors[w], None),
            Some(b) => {
                assert_ne!(w, b);
                if w < b {
                    let (lo, hi) = self.tensors.split_at_mut(b);
                    (&mut lo[w], Some(&mut hi[0]))
                } else {
                    let (lo, hi) = self.tensors.split_at_mut(w);
                    (&mut hi[0], Some(&mut lo[b]))
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn zero(&mut self) {
        for t in &mut self.tensors {
            t.fill(0.0);
        }
    }

    pub fn scalars(&self) -> impl Iterator<Item = f64> + '_ {
        self.tensors.iter().flat_map(|t| t.data().iter().copied())
    }
}
