use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::SparseVector;
use crate::losses::sigmoid;
use crate::matrix::Matrix;
use crate::{Error, Real, Result};

/// `z = W x + b` with `W` of shape `C x D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct LinearModel<F> {
    pub weights: Matrix<F>,
    pub bias: Vec<F>,
    /// Per-class logit shift subtracted before the sigmoid at inference
    /// (the NTR class bias `v`; zero for other losses).
    pub class_shift: Vec<F>,
}

impl<F: Real> LinearModel<F> {
    /// `W ~ U[-1/√D, 1/√D]`, `b = 0`.
    pub fn init(dim: usize, classes: usize, seed: u64) -> Result<Self> {
        if dim == 0 || classes == 0 {
            return Err(Error::invalid("dims", format!("need D, C > 0, got D={dim}, C={classes}")));
        }
        let scale = 1.0 / (dim as f64).sqrt();
        let dist = Uniform::new_inclusive(-scale, scale);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = Matrix::from_fn(classes, dim, |_, _| F::lit(dist.sample(&mut rng)));
        Ok(Self {
            weights,
            bias: vec![F::zero(); classes],
            class_shift: vec![F::zero(); classes],
        })
    }

    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            weights: Matrix::zeros(classes, dim),
            bias: vec![F::zero(); classes],
            class_shift: vec![F::zero(); classes],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn logits_one(&self, x: &SparseVector<F>, out: &mut [F]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = x.dot_dense(self.weights.row(c)) + self.bias[c];
        }
    }

    pub fn forward(&self, xs: &[SparseVector<F>]) -> Result<Matrix<F>> {
        let c = self.num_classes();
        let mut z = Matrix::zeros(xs.len(), c);
        for (k, x) in xs.iter().enumerate() {
            if x.dim() != self.dim() {
                return Err(Error::ShapeMismatch {
                    expected: format!("feature dimension {}", self.dim()),
                    got: format!("{} (row {k})", x.dim()),
                });
            }
            self.logits_one(x, z.row_mut(k));
        }
        Ok(z)
    }

    /// `σ(z - shift)` elementwise.
    pub fn probabilities(&self, xs: &[SparseVector<F>]) -> Result<Matrix<F>> {
        let mut z = self.forward(xs)?;
        for k in 0..z.rows() {
            for (i, v) in z.row_mut(k).iter_mut().enumerate() {
                *v = sigmoid(*v - self.class_shift[i]);
            }
        }
        Ok(z)
    }

    pub fn all_finite(&self) -> bool {
        self.weights.all_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub weights: Matrix<F>,
    pub bias: Vec<F>,
}

impl<F: Real> Gradients<F> {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            weights: Matrix::zeros(classes, dim),
            bias: vec![F::zero(); classes],
        }
    }

    fn add_rows(&mut self, xs: &[SparseVector<F>], grad_logits: &Matrix<F>, rows: std::ops::Range<usize>) {
        for k in rows {
            let g = grad_logits.row(k);
            for (c, &gc) in g.iter().enumerate() {
                if gc == F::zero() {
                    continue;
                }
                self.bias[c] += gc;
                let w = self.weights.row_mut(c);
                for (j, x) in xs[k].iter() {
                    w[j] += gc * x;
                }
            }
        }
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, &b) in self.weights.as_mut_slice().iter_mut().zip(other.weights.as_slice()) {
            *a += b;
        }
        for (a, &b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.all_finite() && self.bias.iter().all(|b| b.is_finite())
    }
}

/// Back-propagates logit gradients into parameter gradients.
///
/// Rows are split into `workers` contiguous chunks that are reduced in chunk
/// order, so the result depends only on `workers`, not on scheduling.
pub fn accumulate_gradients<F: Real>(
    model: &LinearModel<F>,
    xs: &[SparseVector<F>],
    grad_logits: &Matrix<F>,
    workers: usize,
) -> Result<Gradients<F>> {
    if grad_logits.shape() != (xs.len(), model.num_classes()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", xs.len(), model.num_classes()),
            got: format!("{:?}", grad_logits.shape()),
        });
    }
    let (d, c) = (model.dim(), model.num_classes());
    let workers = workers.clamp(1, xs.len().max(1));
    if workers == 1 {
        let mut g = Gradients::zeros(d, c);
        g.add_rows(xs, grad_logits, 0..xs.len());
        return Ok(g);
    }
    let chunk = xs.len().div_ceil(workers);
    let partials: Vec<Gradients<F>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let rows = (w * chunk).min(xs.len())..((w + 1) * chunk).min(xs.len());
                scope.spawn(move || {
                    let mut g = Gradients::zeros(d, c);
                    g.add_rows(xs, grad_logits, rows);
                    g
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("gradient worker panicked")).collect()
    });
    let mut total = Gradients::zeros(d, c);
    for p in &partials {
        total.add_assign(p);
    }
    Ok(total)
}
