use crate::{Result, Scalar, TensorError};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-5, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Optimizer state: step counter plus first/second moment estimates, one
/// array per parameter tensor, in the caller's parameter order.
#[derive(Debug, Clone)]
pub struct AdamState<T: Scalar = f32> {
    config: AdamConfig,
    step: u64,
    first_moment: Vec<Vec<T>>,
    second_moment: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Zero-initialized state for parameters of the given sizes.
    pub fn new(param_sizes: &[usize], config: AdamConfig) -> Self {
        assert!(config.beta1 > 0.0 && config.beta1 < 1.0, "beta1 out of (0,1)");
        assert!(config.beta2 > 0.0 && config.beta2 < 1.0, "beta2 out of (0,1)");
        AdamState {
            config,
            step: 0,
            first_moment: param_sizes.iter().map(|&s| vec![T::ZERO; s]).collect(),
            second_moment: param_sizes.iter().map(|&s| vec![T::ZERO; s]).collect(),
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update with bias correction.
///
/// `params[i]` and `grads[i]` must match the sizes the state was built with.
/// The update is `p -= lr * m̂ / (sqrt(v̂) + ε)` where `m̂`, `v̂` are the
/// bias-corrected moment estimates.
pub fn adam_step<T: Scalar>(state: &mut AdamState<T>, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
    if params.len() != state.first_moment.len() || grads.len() != params.len() {
        return Err(TensorError::ShapeMismatch {
            context: "adam_step",
            expected: format!("{} parameter arrays", state.first_moment.len()),
            got: format!("{} params / {} grads", params.len(), grads.len()),
        });
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != state.first_moment[i].len() || g.len() != p.len() {
            return Err(TensorError::ShapeMismatch {
                context: "adam_step",
                expected: format!("array {} of length {}", i, state.first_moment[i].len()),
                got: format!("param {} / grad {}", p.len(), g.len()),
            });
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let cfg = state.config;
    let corr1 = 1.0 / (1.0 - cfg.beta1.powi(t));
    let corr2 = 1.0 / (1.0 - cfg.beta2.powi(t));
    let (b1, b2) = (T::from_f64(cfg.beta1), T::from_f64(cfg.beta2));
    let (nb1, nb2) = (T::from_f64(1.0 - cfg.beta1), T::from_f64(1.0 - cfg.beta2));
    let (c1, c2) = (T::from_f64(corr1), T::from_f64(corr2));
    let lr = T::from_f64(cfg.lr);
    let eps = T::from_f64(cfg.epsilon);

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + nb1 * gi;
            v[i] = b2 * v[i] + nb2 * gi * gi;
            let m_hat = m[i] * c1;
            let v_hat = v[i] * c2;
            p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
