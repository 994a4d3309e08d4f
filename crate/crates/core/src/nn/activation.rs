use super::Tensor;

/// Probabilities are floored here before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

pub fn relu(x: &Tensor) -> Tensor {
    Tensor::new(x.shape().to_vec(), x.data().iter().map(|&v| v.max(0.0)).collect())
        .expect("same shape")
}

/// Passes gradient where the pre-activation was positive.
pub fn relu_backward(grad_y: &Tensor, pre: &Tensor) -> Tensor {
    let data = grad_y
        .data()
        .iter()
        .zip(pre.data())
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(pre.shape().to_vec(), data).expect("same shape")
}

/// Softmax with max subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// `-ln p[target]` with the probability floored at [`PROB_FLOOR`].
pub fn cross_entropy(probs: &[f64], target: usize) -> f64 {
    -probs[target].max(PROB_FLOOR).ln()
}

/// Gradient of `cross_entropy(softmax(z), target)` with respect to `z`.
pub fn softmax_cross_entropy_backward(probs: &[f64], target: usize) -> Vec<f64> {
    let mut g = probs.to_vec();
    g[target] -= 1.0;
    g
}
