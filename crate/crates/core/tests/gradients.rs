mod common;

use common::*;
use ser_core::nn::ModelConfig;

#[test]
fn every_layer_matches_finite_differences() {
    for seed in [1, 20, 300] {
        let rep = layer_gradients(seed);
        for (name, err) in &rep.layers {
            assert!(*err < 1e-5, "{name}: {err:e} (seed {seed})");
        }
    }
}

#[test]
fn small_model_end_to_end() {
    let cfg = ModelConfig {
        input_channels: 4,
        seq_len: 9,
        n_globals: 3,
        n_classes: 5,
        conv_filters: vec![3, 4, 4],
        kernel: 3,
        lstm_units: vec![4, 3],
        seed: 9,
        ..Default::default()
    };
    let (err, probed) = model_grad_error(&cfg, 1.0, 4);
    assert!(probed > 100);
    assert!(err < 1e-5, "{err:e}");
}
