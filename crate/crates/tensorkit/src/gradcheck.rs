//! Central finite-difference gradient checking.
//!
//! The harness reduces an op's output to a scalar through a fixed random
//! weighting, differentiates that scalar numerically, and compares against
//! the op's analytic backward pass.
//!
//! Two details make the 32-bit checks meaningful rather than noise-bound:
//!
//! * Test tensors are drawn on a dyadic grid (multiples of 1/128) and the
//!   step is `h = 2⁻¹⁰ ≈ 1e-3`, so perturbed inputs are exactly
//!   representable and, for the piecewise-multilinear ops in this crate,
//!   the central difference has no truncation term at all.
//! * The scalar reduction accumulates in `f64` regardless of the tensor
//!   element type, so the subtraction `L(x+h) − L(x−h)` does not lose the
//!   signal to rounding of unchanged terms.

use crate::{
    conv2d_backward, conv2d_forward, dropout_with_mask, leaky_relu, leaky_relu_backward, maxpool2x2,
    maxpool2x2_backward, mse_loss, mse_loss_backward, Scalar, Tensor4,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Step for central differences: a power of two close to 1e-3.
pub const FD_STEP: f64 = 9.765625e-4; // 2^-10

/// Random tensor on the dyadic grid `{-128..=128}/128`, i.e. values in
/// `[-1, 1]` with at most 7 fractional bits.
pub fn dyadic_tensor<T: Scalar>(shape: [usize; 4], seed: u64) -> Tensor4<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = shape.iter().product();
    let data = (0..len).map(|_| T::from_f64(rng.gen_range(-128i32..=128) as f64 / 128.0)).collect();
    Tensor4::from_vec(shape, data).expect("length matches shape")
}

/// Like [`dyadic_tensor`] but without zeros, keeping every value at least
/// 1/128 (= 8 FD steps) away from the ReLU kink.
pub fn dyadic_tensor_nonzero<T: Scalar>(shape: [usize; 4], seed: u64) -> Tensor4<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = shape.iter().product();
    let data = (0..len)
        .map(|_| {
            let mag = rng.gen_range(1i32..=128);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            T::from_f64(sign * mag as f64 / 128.0)
        })
        .collect();
    Tensor4::from_vec(shape, data).expect("length matches shape")
}

/// Dyadic random tensor whose 2×2 pooling windows contain pairwise distinct
/// values, so a ±h perturbation can never change an argmax decision.
pub fn dyadic_tensor_pool_safe<T: Scalar>(shape: [usize; 4], seed: u64) -> Tensor4<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [n, c, h, w] = shape;
    let mut t = Tensor4::<T>::zeros(shape);
    for nn in 0..n {
        for cc in 0..c {
            for y0 in (0..h).step_by(2) {
                for x0 in (0..w).step_by(2) {
                    loop {
                        let mut vals = Vec::with_capacity(4);
                        for dy in 0..2 {
                            for dx in 0..2 {
                                if y0 + dy < h && x0 + dx < w {
                                    vals.push(rng.gen_range(-128i32..=128));
                                }
                            }
                        }
                        let mut sorted = vals.clone();
                        sorted.sort_unstable();
                        sorted.dedup();
                        if sorted.len() == vals.len() {
                            let mut it = vals.into_iter();
                            for dy in 0..2 {
                                for dx in 0..2 {
                                    if y0 + dy < h && x0 + dx < w {
                                        t.set(nn, cc, y0 + dy, x0 + dx, T::from_f64(it.next().unwrap() as f64 / 128.0));
                                    }
                                }
                            }
                            break;
                        }
                    }
                }
            }
        }
    }
    t
}

/// Loss weights in `{±1, ±0.5}` (exact in both precisions).
pub fn loss_weights(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| [1.0, -1.0, 0.5, -0.5][rng.gen_range(0..4)]).collect()
}

/// Scalar reduction `mean(out ⊙ w)`, accumulated in f64.
pub fn weighted_loss<T: Scalar>(out: &Tensor4<T>, w: &[f64]) -> f64 {
    assert_eq!(out.len(), w.len(), "weighted_loss: weight length mismatch");
    let sum: f64 = out.data().iter().zip(w).map(|(&o, &wi)| o.to_f64() * wi).sum();
    sum / w.len() as f64
}

/// The gradient of [`weighted_loss`] with respect to `out`: `w / N`,
/// shaped like the output. Feed this to the op's backward pass.
pub fn upstream_from_weights<T: Scalar>(shape: [usize; 4], w: &[f64]) -> Tensor4<T> {
    let n = w.len() as f64;
    Tensor4::from_vec(shape, w.iter().map(|&wi| T::from_f64(wi / n)).collect()).expect("length matches shape")
}

/// Central-difference gradient of `f` with respect to every element of `x`.
pub fn central_diff<T: Scalar>(x: &Tensor4<T>, h: f64, mut f: impl FnMut(&Tensor4<T>) -> f64) -> Vec<f64> {
    let mut grads = Vec::with_capacity(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let orig = xp.data()[i];
        xp.data_mut()[i] = T::from_f64(orig.to_f64() + h);
        let lp = f(&xp);
        xp.data_mut()[i] = T::from_f64(orig.to_f64() - h);
        let lm = f(&xp);
        xp.data_mut()[i] = orig;
        grads.push((lp - lm) / (2.0 * h));
    }
    grads
}

/// [`central_diff`] for flat parameter slices (bias vectors).
pub fn central_diff_slice<T: Scalar>(x: &[T], h: f64, mut f: impl FnMut(&[T]) -> f64) -> Vec<f64> {
    let mut grads = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = T::from_f64(orig.to_f64() + h);
        let lp = f(&xp);
        xp[i] = T::from_f64(orig.to_f64() - h);
        let lm = f(&xp);
        xp[i] = orig;
        grads.push((lp - lm) / (2.0 * h));
    }
    grads
}

/// Worst per-entry relative error `|num − ana| / max(|num| + |ana|, 1e-4)`.
///
/// The 1e-4 floor turns the comparison absolute for gradients that cancel
/// to (near) zero, where a relative measure would only amplify rounding
/// noise in whichever side is fuzzier.
pub fn max_rel_err<T: Scalar>(numeric: &[f64], analytic: &[T]) -> f64 {
    assert_eq!(numeric.len(), analytic.len(), "max_rel_err: length mismatch");
    numeric
        .iter()
        .zip(analytic)
        .map(|(&n, &a)| {
            let a = a.to_f64();
            (n - a).abs() / (n.abs() + a.abs()).max(1e-4)
        })
        .fold(0.0, f64::max)
}

/// Dyadic-grid bias vector, same distribution as [`dyadic_tensor`].
pub fn dyadic_vec<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| T::from_f64(rng.gen_range(-128i32..=128) as f64 / 128.0)).collect()
}

fn small_shape(rng: &mut ChaCha8Rng, min_hw: usize) -> [usize; 4] {
    [
        rng.gen_range(1..=2),
        rng.gen_range(1..=2),
        rng.gen_range(min_hw..=min_hw + 4),
        rng.gen_range(min_hw..=min_hw + 4),
    ]
}

/// Checks `conv2d_backward` against central differences on `instances`
/// random small instances, covering both kernel sizes and both padding
/// modes. Panics with the offending instance and error if any gradient
/// exceeds `tol`.
pub fn check_conv_gradients<T: Scalar>(tol: f64, instances: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0_11);
    for i in 0..instances {
        let k = [1, 3][rng.gen_range(0..2)];
        let shape = small_shape(&mut rng, k);
        let out_ch = rng.gen_range(1..=3);
        let padding = if rng.gen::<bool>() { k / 2 } else { 0 };
        let input: Tensor4<T> = dyadic_tensor(shape, 100 + i);
        let kernel: Tensor4<T> = dyadic_tensor([out_ch, shape[1], k, k], 200 + i);
        let bias: Vec<T> = dyadic_vec(out_ch, 300 + i);

        let out = conv2d_forward(&input, &kernel, &bias, padding).unwrap();
        let w = loss_weights(out.len(), 400 + i);
        let upstream = upstream_from_weights(out.shape(), &w);
        let grads = conv2d_backward(&upstream, &input, &kernel, padding).unwrap();

        let num_input = central_diff(&input, FD_STEP, |x| {
            weighted_loss(&conv2d_forward(x, &kernel, &bias, padding).unwrap(), &w)
        });
        let num_kernel = central_diff(&kernel, FD_STEP, |kk| {
            weighted_loss(&conv2d_forward(&input, kk, &bias, padding).unwrap(), &w)
        });
        let num_bias = central_diff_slice(&bias, FD_STEP, |b| {
            weighted_loss(&conv2d_forward(&input, &kernel, b, padding).unwrap(), &w)
        });

        let e_in = max_rel_err(&num_input, grads.grad_input.data());
        let e_k = max_rel_err(&num_kernel, grads.grad_kernel.data());
        let e_b = max_rel_err(&num_bias, &grads.grad_bias);
        assert!(e_in < tol, "instance {i}: grad_input rel err {e_in}");
        assert!(e_k < tol, "instance {i}: grad_kernel rel err {e_k}");
        assert!(e_b < tol, "instance {i}: grad_bias rel err {e_b}");
    }
}

/// Checks `leaky_relu_backward` on `instances` random instances, cycling
/// through slopes 0, 0.25, and 0.01. Inputs avoid the kink by 8 FD steps.
pub fn check_leaky_relu_gradients<T: Scalar>(tol: f64, instances: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e_1d);
    for i in 0..instances {
        let shape = small_shape(&mut rng, 2);
        let input: Tensor4<T> = dyadic_tensor_nonzero(shape, 500 + i);
        let slope = T::from_f64([0.0, 0.25, 0.01][(i % 3) as usize]);

        let out = leaky_relu(&input, slope);
        let w = loss_weights(out.len(), 600 + i);
        let upstream = upstream_from_weights(out.shape(), &w);
        let analytic = leaky_relu_backward(&upstream, &input, slope);

        let numeric = central_diff(&input, FD_STEP, |x| weighted_loss(&leaky_relu(x, slope), &w));
        let e = max_rel_err(&numeric, analytic.data());
        assert!(e < tol, "instance {i}: rel err {e}");
    }
}

/// Checks `maxpool2x2_backward` on `instances` random instances whose
/// pooling windows hold pairwise distinct values, so probes cannot flip an
/// argmax.
pub fn check_maxpool_gradients<T: Scalar>(tol: f64, instances: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x90_01);
    for i in 0..instances {
        let shape = small_shape(&mut rng, 2);
        let input: Tensor4<T> = dyadic_tensor_pool_safe(shape, 700 + i);

        let (out, argmax) = maxpool2x2(&input);
        let w = loss_weights(out.len(), 800 + i);
        let upstream: Tensor4<T> = upstream_from_weights(out.shape(), &w);
        let analytic = maxpool2x2_backward(&upstream, &argmax, input.shape());

        let numeric = central_diff(&input, FD_STEP, |x| weighted_loss(&maxpool2x2(x).0, &w));
        let e = max_rel_err(&numeric, analytic.data());
        assert!(e < tol, "instance {i}: rel err {e}");
    }
}

/// Checks the dropout gradient on `instances` random instances. The mask is
/// a pure function of seed and length, so it stays fixed across the probe
/// evaluations and the op is linear in the input.
pub fn check_dropout_gradients<T: Scalar>(tol: f64, instances: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0_07);
    for i in 0..instances {
        let shape = small_shape(&mut rng, 2);
        let input: Tensor4<T> = dyadic_tensor(shape, 900 + i);
        let mask_seed = 1000 + i;

        let (out, mask) = dropout_with_mask(&input, 0.5, mask_seed, true).unwrap();
        let w = loss_weights(out.len(), 1100 + i);
        let upstream: Tensor4<T> = upstream_from_weights(out.shape(), &w);
        let analytic: Vec<T> = upstream.data().iter().zip(&mask).map(|(&u, &m)| u * m).collect();

        let numeric = central_diff(&input, FD_STEP, |x| {
            weighted_loss(&dropout_with_mask(x, 0.5, mask_seed, true).unwrap().0, &w)
        });
        let e = max_rel_err(&numeric, &analytic);
        assert!(e < tol, "instance {i}: rel err {e}");
    }
}

/// Checks `mse_loss_backward` on `instances` random instances, probing
/// through an f64 restatement of the loss so the numeric side stays exact
/// even when the op's scalar return rounds to `T`.
pub fn check_mse_gradients<T: Scalar>(tol: f64, instances: u64) {
    fn mse_f64<T: Scalar>(pred: &Tensor4<T>, target: &Tensor4<T>) -> f64 {
        let sum: f64 = pred
            .data()
            .iter()
            .zip(target.data())
            .map(|(&p, &t)| {
                let d = p.to_f64() - t.to_f64();
                d * d
            })
            .sum();
        sum / pred.len() as f64
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x53_3d);
    for i in 0..instances {
        let shape = small_shape(&mut rng, 2);
        let pred: Tensor4<T> = dyadic_tensor(shape, 1200 + i);
        let target: Tensor4<T> = dyadic_tensor(shape, 1300 + i);

        let forward = mse_loss(&pred, &target).unwrap().to_f64();
        assert!((forward - mse_f64(&pred, &target)).abs() < 1e-6, "instance {i}: forward drift");

        let analytic = mse_loss_backward(&pred, &target).unwrap();
        let numeric = central_diff(&pred, FD_STEP, |p| mse_f64(p, &target));
        let e = max_rel_err(&numeric, analytic.data());
        assert!(e < tol, "instance {i}: rel err {e}");
    }
}
