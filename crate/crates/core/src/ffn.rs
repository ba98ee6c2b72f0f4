//! Two-layer feedforward head with drop-connect on the second layer.
//!
//! In train mode a fresh 0/1 mask over the second-layer weights is sampled
//! per call; in eval mode the weights are scaled by the keep probability so
//! the output matches the mask expectation.

use crate::error::Result;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::tensor::TensorBuffer;

/// `w1` is (hidden_units x in), `w2` is (out x hidden_units).
/// `drop_connect_prob` is the probability of zeroing a `w2` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams<T> {
    pub w1: TensorBuffer<T>,
    pub b1: TensorBuffer<T>,
    pub w2: TensorBuffer<T>,
    pub b2: TensorBuffer<T>,
    pub drop_connect_prob: f64,
}

#[derive(Debug, Clone)]
pub struct FfnGrads<T> {
    pub w1: TensorBuffer<T>,
    pub b1: TensorBuffer<T>,
    pub w2: TensorBuffer<T>,
    pub b2: TensorBuffer<T>,
}

#[derive(Debug, Clone)]
pub struct FfnCache<T> {
    input: TensorBuffer<T>,
    hidden: TensorBuffer<T>,
    /// Elementwise multiplier applied to w2: the sampled 0/1 mask in train
    /// mode, the constant keep probability in eval mode.
    w2_factor: TensorBuffer<T>,
}

impl<T: Scalar> FfnParams<T> {
    pub fn init(
        in_dim: usize,
        hidden_units: usize,
        out_dim: usize,
        drop_connect_prob: f64,
        scale: f64,
        rng: &mut RngStream,
    ) -> Self {
        let mut mat = |rows: usize, cols: usize| {
            TensorBuffer::new(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| T::from_f64(rng.uniform(-scale, scale)))
                    .collect(),
            )
        };
        FfnParams {
            w1: mat(hidden_units, in_dim),
            b1: TensorBuffer::zeros(1, hidden_units),
            w2: mat(out_dim, hidden_units),
            b2: TensorBuffer::zeros(1, out_dim),
            drop_connect_prob,
        }
    }

    pub fn zero_grads(&self) -> FfnGrads<T> {
        FfnGrads {
            w1: self.w1.zeros_like(),
            b1: self.b1.zeros_like(),
            w2: self.w2.zeros_like(),
            b2: self.b2.zeros_like(),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.w2.rows()
    }
}

/// layer1 -> rectifier -> layer2 with drop-connect.
pub fn classifier_forward<T: Scalar>(
    ffn: &FfnParams<T>,
    input: &TensorBuffer<T>,
    rng: &mut RngStream,
    train_mode: bool,
) -> Result<(TensorBuffer<T>, FfnCache<T>)> {
    let mut hidden = ffn.w1.matvec(input)?;
    hidden.add_scaled(&ffn.b1, T::one());
    for v in hidden.data_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }

    let keep = 1.0 - ffn.drop_connect_prob;
    let mut w2_factor = ffn.w2.zeros_like();
    if train_mode {
        for v in w2_factor.data_mut() {
            *v = if rng.bernoulli(keep) { T::one() } else { T::zero() };
        }
    } else {
        w2_factor.fill(T::from_f64(keep));
    }

    let mut logits = TensorBuffer::zeros(1, ffn.w2.rows());
    for r in 0..ffn.w2.rows() {
        let mut acc = ffn.b2.data()[r];
        for (k, &h) in hidden.data().iter().enumerate() {
            acc += ffn.w2.at(r, k) * w2_factor.at(r, k) * h;
        }
        logits.data_mut()[r] = acc;
    }

    let cache = FfnCache {
        input: input.clone(),
        hidden,
        w2_factor,
    };
    Ok((logits, cache))
}

/// Returns the gradient w.r.t. the input vector.
pub fn classifier_backward<T: Scalar>(
    ffn: &FfnParams<T>,
    cache: &FfnCache<T>,
    d_logits: &TensorBuffer<T>,
    grads: &mut FfnGrads<T>,
) -> TensorBuffer<T> {
    let hidden_units = cache.hidden.cols();

    grads.b2.add_scaled(d_logits, T::one());
    let mut d_hidden = TensorBuffer::zeros(1, hidden_units);
    for r in 0..ffn.w2.rows() {
        let dl = d_logits.data()[r];
        if dl == T::zero() {
            continue;
        }
        for k in 0..hidden_units {
            let factor = cache.w2_factor.at(r, k);
            let g = grads.w2.at(r, k) + dl * factor * cache.hidden.data()[k];
            grads.w2.set(r, k, g);
            d_hidden.data_mut()[k] += dl * factor * ffn.w2.at(r, k);
        }
    }

    // Rectifier gate: pass gradient only where the unit was active.
    for (d, &h) in d_hidden.data_mut().iter_mut().zip(cache.hidden.data()) {
        if h == T::zero() {
            *d = T::zero();
        }
    }

    grads.b1.add_scaled(&d_hidden, T::one());
    grads.w1.add_outer_scaled(&d_hidden, &cache.input, T::one());
    ffn.w1.matvec_transposed(&d_hidden).expect("ffn backward")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{finite_difference_gradient, max_relative_error};

    fn sample_ffn(p: f64, seed: u64) -> FfnParams<f64> {
        let mut rng = RngStream::new(seed);
        FfnParams::init(4, 6, 3, p, 0.6, &mut rng)
    }

    #[test]
    fn no_drop_makes_train_and_eval_identical() {
        let ffn = sample_ffn(0.0, 1);
        let x = TensorBuffer::vector(vec![0.2, -0.4, 1.0, 0.7]);
        let (train, _) = classifier_forward(&ffn, &x, &mut RngStream::new(5), true).unwrap();
        let (eval, _) = classifier_forward(&ffn, &x, &mut RngStream::new(6), false).unwrap();
        assert_eq!(train.data(), eval.data());
    }

    #[test]
    fn full_drop_leaves_only_bias() {
        let mut ffn = sample_ffn(1.0, 2);
        ffn.b2 = TensorBuffer::vector(vec![0.5, -0.25, 2.0]);
        let x = TensorBuffer::vector(vec![1.0, 1.0, 1.0, 1.0]);
        let (train, _) = classifier_forward(&ffn, &x, &mut RngStream::new(5), true).unwrap();
        assert_eq!(train.data(), ffn.b2.data());
        let (eval, _) = classifier_forward(&ffn, &x, &mut RngStream::new(5), false).unwrap();
        assert_eq!(eval.data(), ffn.b2.data());
    }

    #[test]
    fn same_rng_state_replays_the_same_mask() {
        let ffn = sample_ffn(0.5, 3);
        let x = TensorBuffer::vector(vec![0.9, -0.1, 0.3, 0.0]);
        let (a, _) = classifier_forward(&ffn, &x, &mut RngStream::new(77), true).unwrap();
        let (b, _) = classifier_forward(&ffn, &x, &mut RngStream::new(77), true).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn backward_matches_finite_differences_with_fixed_mask() {
        let ffn = sample_ffn(0.5, 4);
        let x: Vec<f64> = vec![0.3, -0.9, 0.5, 1.2];
        // Fixing the rng seed fixes the mask, making the map differentiable.
        let loss = |ffn: &FfnParams<f64>, x: &[f64]| {
            let mut rng = RngStream::new(123);
            let (logits, _) =
                classifier_forward(ffn, &TensorBuffer::vector(x.to_vec()), &mut rng, true)
                    .unwrap();
            logits.data().iter().map(|v| v * v).sum::<f64>()
        };

        let mut rng = RngStream::new(123);
        let (logits, cache) =
            classifier_forward(&ffn, &TensorBuffer::vector(x.clone()), &mut rng, true).unwrap();
        let d_logits = logits.map(|v| 2.0 * v);
        let mut grads = ffn.zero_grads();
        let dx = classifier_backward(&ffn, &cache, &d_logits, &mut grads);

        let fd_x = finite_difference_gradient(|x| loss(&ffn, x), &x, 1e-5).unwrap();
        assert!(max_relative_error(dx.data(), &fd_x) < 1e-6);

        let theta: Vec<f64> = ffn.w2.data().to_vec();
        let fd_w2 = finite_difference_gradient(
            |w| {
                let mut f = ffn.clone();
                f.w2.data_mut().copy_from_slice(w);
                loss(&f, &x)
            },
            &theta,
            1e-5,
        )
        .unwrap();
        assert!(max_relative_error(grads.w2.data(), &fd_w2) < 1e-6);

        let theta: Vec<f64> = ffn.w1.data().to_vec();
        let fd_w1 = finite_difference_gradient(
            |w| {
                let mut f = ffn.clone();
                f.w1.data_mut().copy_from_slice(w);
                loss(&f, &x)
            },
            &theta,
            1e-5,
        )
        .unwrap();
        assert!(max_relative_error(grads.w1.data(), &fd_w1) < 1e-6);
    }

    use crate::rng::RngStream;
}
