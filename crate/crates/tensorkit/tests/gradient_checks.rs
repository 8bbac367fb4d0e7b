//! Finite-difference checks of every backward pass, in both precisions.
//!
//! The check bodies live in `tensorkit::gradcheck` so downstream crates can
//! rerun them; see that module for why the dyadic input grid makes the 1e-3
//! (f32) and 1e-6 (f64) per-entry tolerances robust rather than flaky.

use tensorkit::gradcheck::{
    check_conv_gradients, check_dropout_gradients, check_leaky_relu_gradients, check_maxpool_gradients,
    check_mse_gradients,
};

const INSTANCES: u64 = 20;

#[test]
fn conv2d_gradients_f32() {
    check_conv_gradients::<f32>(1e-3, INSTANCES);
}

#[test]
fn conv2d_gradients_f64() {
    check_conv_gradients::<f64>(1e-6, INSTANCES);
}

#[test]
fn leaky_relu_gradients_f32() {
    check_leaky_relu_gradients::<f32>(1e-3, INSTANCES);
}

#[test]
fn leaky_relu_gradients_f64() {
    check_leaky_relu_gradients::<f64>(1e-6, INSTANCES);
}

#[test]
fn maxpool_gradients_f32() {
    check_maxpool_gradients::<f32>(1e-3, INSTANCES);
}

#[test]
fn maxpool_gradients_f64() {
    check_maxpool_gradients::<f64>(1e-6, INSTANCES);
}

#[test]
fn dropout_gradients_f32() {
    check_dropout_gradients::<f32>(1e-3, INSTANCES);
}

#[test]
fn dropout_gradients_f64() {
    check_dropout_gradients::<f64>(1e-6, INSTANCES);
}

#[test]
fn mse_gradients_f32() {
    check_mse_gradients::<f32>(1e-3, INSTANCES);
}

#[test]
fn mse_gradients_f64() {
    check_mse_gradients::<f64>(1e-6, INSTANCES);
}
