//! Token-level losses and their analytic gradients.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::TensorBuffer;

/// Cross-entropy of a logit vector against a class index, stabilized by
/// max-subtraction. Returns the loss and the gradient w.r.t. the logits
/// (softmax minus one-hot).
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &TensorBuffer<T>,
    target_index: usize,
) -> Result<(T, TensorBuffer<T>)> {
    if logits.rows() != 1 {
        return Err(Error::dim("softmax_cross_entropy", logits.shape(), (1, 0)));
    }
    if target_index >= logits.cols() {
        return Err(Error::Index {
            what: "class logits",
            index: target_index,
            len: logits.cols(),
        });
    }
    let max = logits
        .data()
        .iter()
        .cloned()
        .fold(T::neg_infinity(), T::max);
    let mut grad = logits.map(|v| (v - max).exp());
    let z = grad.data().iter().fold(T::zero(), |a, &b| a + b);
    let loss = z.ln() - (logits.data()[target_index] - max);
    let inv_z = T::one() / z;
    for v in grad.data_mut().iter_mut() {
        *v = *v * inv_z;
    }
    grad.data_mut()[target_index] -= T::one();
    Ok((loss, grad))
}

/// Softmax probabilities alone (used when decoding greedy predictions).
pub fn softmax<T: Scalar>(logits: &TensorBuffer<T>) -> TensorBuffer<T> {
    let max = logits
        .data()
        .iter()
        .cloned()
        .fold(T::neg_infinity(), T::max);
    let mut out = logits.map(|v| (v - max).exp());
    let z = out.data().iter().fold(T::zero(), |a, &b| a + b);
    out.scale_in_place(T::one() / z);
    out
}

/// Squared L2 distance between a prediction and a target vector:
/// loss = sum (p_i - t_i)^2, grad = 2 (p - t).
pub fn l2_token_loss<T: Scalar>(
    prediction: &TensorBuffer<T>,
    target: &TensorBuffer<T>,
) -> Result<(T, TensorBuffer<T>)> {
    if prediction.shape() != target.shape() {
        return Err(Error::dim(
            "l2_token_loss",
            prediction.shape(),
            target.shape(),
        ));
    }
    let mut grad = prediction.clone();
    grad.add_scaled(target, -T::one());
    let loss = grad.squared_norm();
    grad.scale_in_place(T::from_f64(2.0));
    Ok((loss, grad))
}
