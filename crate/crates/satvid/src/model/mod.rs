//! Heatmap-regression CNNs: construction, inference, the training-time
//! forward/backward pair, and weight serialization.

mod arch;
mod io;

pub use arch::{ArchDescriptor, Activation, DEFAULT_LEAKY_SLOPE, FILTERS, LAYERS};

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;
use crate::seeds;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tensorkit::{
    conv2d_backward, conv2d_forward, dropout_with_mask, leaky_relu, leaky_relu_backward, maxpool2x2,
    maxpool2x2_backward, Tensor4,
};

/// A model: its architecture plus per-layer kernel and bias arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub descriptor: ArchDescriptor,
    /// One [out_ch, in_ch, k, k] tensor per layer.
    pub kernels: Vec<Tensor4>,
    /// One bias vector per layer, length out_ch.
    pub biases: Vec<Vec<f32>>,
}

/// Builds a model with fan-in-scaled normal init (std = sqrt(2 / fan_in),
/// biases zero), deterministic per seed.
pub fn build(descriptor: &ArchDescriptor, init_seed: u64) -> Result<ModelWeights> {
    descriptor.validate()?;
    let mut kernels = Vec::with_capacity(LAYERS);
    let mut biases = Vec::with_capacity(LAYERS);
    for i in 0..LAYERS {
        let k = descriptor.kernels[i];
        let in_ch = descriptor.layer_in_channels(i);
        let out_ch = descriptor.filters[i];
        let fan_in = (k * k * in_ch) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive_indexed(init_seed, "layer-init", i as u64));
        let data: Vec<f32> = (0..out_ch * in_ch * k * k).map(|_| normal.sample(&mut rng) as f32).collect();
        kernels.push(Tensor4::from_vec([out_ch, in_ch, k, k], data)?);
        biases.push(vec![0.0; out_ch]);
    }
    Ok(ModelWeights { descriptor: descriptor.clone(), kernels, biases })
}

/// Per-layer gradients, shaped like the weights.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub kernels: Vec<Tensor4>,
    pub biases: Vec<Vec<f32>>,
}

impl Gradients {
    pub fn zeros_like(weights: &ModelWeights) -> Self {
        Gradients {
            kernels: weights.kernels.iter().map(|k| Tensor4::zeros(k.shape())).collect(),
            biases: weights.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Accumulates `other`, element-wise.
    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.kernels.iter_mut().zip(&other.kernels) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Everything the backward pass needs from a training forward pass.
pub struct ForwardTrace {
    /// Input to each layer's convolution.
    layer_inputs: Vec<Tensor4>,
    /// Each layer's convolution output (pre-activation).
    pre_activations: Vec<Tensor4>,
    /// Argmax indices and input shape of the single max-pool, when present.
    pool: Option<(Vec<usize>, [usize; 4])>,
    /// Dropout masks for layers that had dropout applied.
    dropout_masks: Vec<Option<Vec<f32>>>,
}

impl ModelWeights {
    pub fn param_count(&self) -> usize {
        self.kernels.iter().map(|k| k.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, input: &Tensor4) -> Result<()> {
        let [_, c, _, _] = input.shape();
        if c != self.descriptor.channels_in {
            return Err(Error::data(
                "forward",
                format!("stack has {c} channels, model expects {}", self.descriptor.channels_in),
            ));
        }
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in input.data() {
            if !v.is_finite() {
                return Err(Error::data("forward", "input contains non-finite values".to_string()));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo < -1e-6 || hi > 1.0 + 1e-6 {
            return Err(Error::data("forward", format!("input not normalized to [0,1]: range [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Inference or training forward pass. Dropout only fires with
    /// `training = true`; inference is deterministic and seed-independent.
    pub fn forward(&self, input: &Tensor4, training: bool, seed: u64) -> Result<Tensor4> {
        let (out, _) = self.forward_inner(input, training, seed, false)?;
        Ok(out)
    }

    /// Forward pass that records everything `backward` needs.
    pub fn forward_trace(&self, input: &Tensor4, training: bool, seed: u64) -> Result<(Tensor4, ForwardTrace)> {
        let (out, trace) = self.forward_inner(input, training, seed, true)?;
        Ok((out, trace.expect("trace requested")))
    }

    fn forward_inner(
        &self,
        input: &Tensor4,
        training: bool,
        seed: u64,
        want_trace: bool,
    ) -> Result<(Tensor4, Option<ForwardTrace>)> {
        self.check_input(input)?;
        let slope = self.descriptor.activation.slope();
        let mut trace = want_trace.then(|| ForwardTrace {
            layer_inputs: Vec::with_capacity(LAYERS),
            pre_activations: Vec::with_capacity(LAYERS),
            pool: None,
            dropout_masks: vec![None; LAYERS],
        });

        let mut x = input.clone();
        for i in 0..LAYERS {
            let pad = self.descriptor.kernels[i] / 2;
            let pre = conv2d_forward(&x, &self.kernels[i], &self.biases[i], pad)?;
            if let Some(t) = trace.as_mut() {
                t.layer_inputs.push(x);
                t.pre_activations.push(pre.clone());
            }
            // The last layer stays linear; everything else is activated.
            let mut y = if i < LAYERS - 1 { leaky_relu(&pre, slope) } else { pre };
            if i == 0 && self.descriptor.pool_after_layer1 {
                let in_shape = y.shape();
                let (pooled, argmax) = maxpool2x2(&y);
                if let Some(t) = trace.as_mut() {
                    t.pool = Some((argmax, in_shape));
                }
                y = pooled;
            }
            if training && self.descriptor.dropout_layers.contains(&(i + 1)) {
                let drop_seed = seeds::derive_indexed(seed, "dropout", i as u64);
                let (dropped, mask) = dropout_with_mask(&y, self.descriptor.dropout_rate, drop_seed, true)?;
                if let Some(t) = trace.as_mut() {
                    t.dropout_masks[i] = Some(mask);
                }
                y = dropped;
            }
            x = y;
        }
        Ok((x, trace))
    }

    /// Backpropagates `grad_output` through a traced forward pass, returning
    /// weight gradients.
    pub fn backward(&self, trace: &ForwardTrace, grad_output: &Tensor4) -> Result<Gradients> {
        let slope = self.descriptor.activation.slope();
        let mut grads = Gradients {
            kernels: Vec::with_capacity(LAYERS),
            biases: Vec::with_capacity(LAYERS),
        };
        let mut up = grad_output.clone();
        for i in (0..LAYERS).rev() {
            if let Some(mask) = &trace.dropout_masks[i] {
                let data = up.data().iter().zip(mask).map(|(&u, &m)| u * m).collect();
                up = Tensor4::from_vec(up.shape(), data)?;
            }
            if i == 0 {
                if let Some((argmax, in_shape)) = &trace.pool {
                    up = maxpool2x2_backward(&up, argmax, *in_shape);
                }
            }
            if i < LAYERS - 1 {
                up = leaky_relu_backward(&up, &trace.pre_activations[i], slope);
            }
            let pad = self.descriptor.kernels[i] / 2;
            let layer = conv2d_backward(&up, &trace.layer_inputs[i], &self.kernels[i], pad)?;
            grads.kernels.push(layer.grad_kernel);
            grads.biases.push(layer.grad_bias);
            up = layer.grad_input;
        }
        grads.kernels.reverse();
        grads.biases.reverse();
        Ok(grads)
    }

    /// Inference on a single stack, wrapped as a [`Heatmap`] carrying the
    /// architecture's downsampling exponent.
    pub fn forward_heatmap(&self, stack: &Tensor4) -> Result<Heatmap> {
        let [batch, _, _, _] = stack.shape();
        if batch != 1 {
            return Err(Error::data("forward_heatmap", format!("expected a single stack, got batch {batch}")));
        }
        let out = self.forward(stack, false, 0)?;
        let [_, _, h, w] = out.shape();
        Ok(Heatmap::from_vec(w, h, self.descriptor.output_scale_exp(), out.into_data()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_input(c: usize, h: usize, w: usize) -> Tensor4 {
        Tensor4::from_fn([1, c, h, w], |_, ch, y, x| ((ch + y + x) % 7) as f32 / 7.0)
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let d = ArchDescriptor::foveanet4sat(3).unwrap();
        let a = build(&d, 11).unwrap();
        let b = build(&d, 11).unwrap();
        let c = build(&d, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.kernels[0].data(), c.kernels[0].data());
    }

    #[test]
    fn walked_param_count_matches_descriptor_formula() {
        for c in [1, 3, 5, 7] {
            let d = ArchDescriptor::foveanet4sat(c).unwrap();
            let w = build(&d, 1).unwrap();
            assert_eq!(w.param_count(), d.param_count());
        }
    }

    #[test]
    fn full_resolution_output_shape() {
        let d = ArchDescriptor::foveanet4sat(5).unwrap();
        let w = build(&d, 2).unwrap();
        let out = w.forward(&tiny_input(5, 16, 16), false, 0).unwrap();
        assert_eq!(out.shape(), [1, 1, 16, 16]);
    }

    #[test]
    fn pooled_output_is_half_resolution() {
        let d = ArchDescriptor::foveanet(5).unwrap();
        let w = build(&d, 2).unwrap();
        let out = w.forward(&tiny_input(5, 32, 32), false, 0).unwrap();
        assert_eq!(out.shape(), [1, 1, 16, 16]);
        assert_eq!(w.forward_heatmap(&tiny_input(5, 32, 32)).unwrap().scale_exp(), 1);
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let d = ArchDescriptor::foveanet4sat(3).unwrap();
        let mut w = build(&d, 3).unwrap();
        for k in &mut w.kernels {
            for v in k.data_mut() {
                *v = 0.0;
            }
        }
        let out = w.forward(&tiny_input(3, 8, 8), false, 0).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_channel_count_rejected() {
        let d = ArchDescriptor::foveanet4sat(5).unwrap();
        let w = build(&d, 4).unwrap();
        assert!(w.forward(&tiny_input(3, 8, 8), false, 0).is_err());
    }

    #[test]
    fn unnormalized_input_rejected() {
        let d = ArchDescriptor::foveanet4sat(3).unwrap();
        let w = build(&d, 4).unwrap();
        let bad = Tensor4::from_fn([1, 3, 8, 8], |_, _, _, _| 2.0f32);
        assert!(w.forward(&bad, false, 0).is_err());
    }

    #[test]
    fn inference_is_deterministic_and_ignores_seed() {
        let d = ArchDescriptor::foveanet4sat(3).unwrap();
        let w = build(&d, 5).unwrap();
        let x = tiny_input(3, 12, 12);
        let a = w.forward(&x, false, 1).unwrap();
        let b = w.forward(&x, false, 999).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn training_dropout_changes_with_seed() {
        let d = ArchDescriptor::foveanet4sat(3).unwrap();
        let w = build(&d, 5).unwrap();
        let x = tiny_input(3, 8, 8);
        let a = w.forward(&x, true, 1).unwrap();
        let b = w.forward(&x, true, 2).unwrap();
        assert_ne!(a.data(), b.data());
    }
}
