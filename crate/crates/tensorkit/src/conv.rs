use crate::{Result, Scalar, Tensor4, TensorError};

/// Gradients of [`conv2d_forward`] with respect to its differentiable inputs.
#[derive(Debug, Clone)]
pub struct ConvGrads<T: Scalar = f32> {
    pub grad_input: Tensor4<T>,
    pub grad_kernel: Tensor4<T>,
    pub grad_bias: Vec<T>,
}

fn out_dim(input: usize, k: usize, padding: usize) -> Result<usize> {
    let padded = input + 2 * padding;
    if padded < k {
        return Err(TensorError::InvalidArgument {
            context: "conv2d",
            message: format!("kernel size {k} exceeds padded input extent {padded}"),
        });
    }
    Ok(padded - k + 1)
}

fn check_conv_shapes<T: Scalar>(input: &Tensor4<T>, kernel: &Tensor4<T>, bias: &[T]) -> Result<(usize, usize)> {
    let [_, in_ch, h, w] = input.shape();
    let [out_ch, k_in, kh, kw] = kernel.shape();
    if in_ch != k_in {
        return Err(TensorError::ShapeMismatch {
            context: "conv2d",
            expected: format!("kernel in_ch {in_ch}"),
            got: format!("{k_in}"),
        });
    }
    if bias.len() != out_ch {
        return Err(TensorError::ShapeMismatch {
            context: "conv2d",
            expected: format!("bias length {out_ch}"),
            got: format!("{}", bias.len()),
        });
    }
    let _ = (h, w, kh, kw);
    Ok((in_ch, out_ch))
}

/// Writes the im2col matrix of one sample: row `(c*kh + ky)*kw + kx`,
/// column `y*wo + x` holds `input[c, y + ky - p, x + kx - p]` (zero outside).
fn im2col<T: Scalar>(sample: &[T], in_ch: usize, h: usize, w: usize, kh: usize, kw: usize, p: usize, ho: usize, wo: usize, cols: &mut [T]) {
    debug_assert_eq!(cols.len(), in_ch * kh * kw * ho * wo);
    let mut row = 0;
    for c in 0..in_ch {
        let plane = &sample[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            for kx in 0..kw {
                let dst_base = row * ho * wo;
                for y in 0..ho {
                    let sy = y + ky;
                    let dst = &mut cols[dst_base + y * wo..dst_base + (y + 1) * wo];
                    if sy < p || sy >= h + p {
                        dst.fill(T::ZERO);
                        continue;
                    }
                    let src_row = &plane[(sy - p) * w..(sy - p + 1) * w];
                    // x + kx - p must land in [0, w): x in [lo, hi).
                    let lo = p.saturating_sub(kx);
                    let hi = (w + p - kx).min(wo);
                    if lo >= hi {
                        dst.fill(T::ZERO);
                        continue;
                    }
                    dst[..lo].fill(T::ZERO);
                    dst[lo..hi].copy_from_slice(&src_row[lo + kx - p..hi + kx - p]);
                    dst[hi..].fill(T::ZERO);
                }
                row += 1;
            }
        }
    }
}

/// Scatter-adds an im2col-layout gradient back onto one input sample
/// (the exact adjoint of [`im2col`]).
fn col2im_add<T: Scalar>(cols: &[T], in_ch: usize, h: usize, w: usize, kh: usize, kw: usize, p: usize, ho: usize, wo: usize, sample: &mut [T]) {
    let mut row = 0;
    for c in 0..in_ch {
        let plane = &mut sample[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            for kx in 0..kw {
                let src_base = row * ho * wo;
                for y in 0..ho {
                    let sy = y + ky;
                    if sy < p || sy >= h + p {
                        continue;
                    }
                    let lo = p.saturating_sub(kx);
                    let hi = (w + p - kx).min(wo);
                    if lo >= hi {
                        continue;
                    }
                    let src = &cols[src_base + y * wo + lo..src_base + y * wo + hi];
                    let dst = &mut plane[(sy - p) * w + lo + kx - p..(sy - p) * w + hi + kx - p];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += *s;
                    }
                }
                row += 1;
            }
        }
    }
}

/// 2D cross-correlation with stride 1 and symmetric zero padding.
///
/// `input` is `(batch, in_ch, h, w)`, `kernel` is `(out_ch, in_ch, kh, kw)`,
/// `bias` has one entry per output channel. With `padding = kh/2` for odd
/// kernels the spatial size is preserved ("same" mode). Each output value is
/// the windowed sum of products plus the channel bias.
pub fn conv2d_forward<T: Scalar>(input: &Tensor4<T>, kernel: &Tensor4<T>, bias: &[T], padding: usize) -> Result<Tensor4<T>> {
    let (in_ch, out_ch) = check_conv_shapes(input, kernel, bias)?;
    let [batch, _, h, w] = input.shape();
    let [_, _, kh, kw] = kernel.shape();
    let ho = out_dim(h, kh, padding)?;
    let wo = out_dim(w, kw, padding)?;
    let howo = ho * wo;
    let kdim = in_ch * kh * kw;

    let mut out = Tensor4::zeros([batch, out_ch, ho, wo]);
    let direct_1x1 = kh == 1 && kw == 1 && padding == 0;
    let mut cols = if direct_1x1 { Vec::new() } else { vec![T::ZERO; kdim * howo] };

    for n in 0..batch {
        {
            let b_mat: &[T] = if direct_1x1 {
                input.sample(n)
            } else {
                im2col(input.sample(n), in_ch, h, w, kh, kw, padding, ho, wo, &mut cols);
                &cols
            };
            let out_sample = out.sample_mut(n);
            T::gemm(out_ch, kdim, howo, T::ONE, kernel.data(), b_mat, T::ZERO, out_sample);
        }
        let out_sample = out.sample_mut(n);
        for oc in 0..out_ch {
            let b = bias[oc];
            for v in &mut out_sample[oc * howo..(oc + 1) * howo] {
                *v += b;
            }
        }
    }
    Ok(out)
}

/// Analytic gradients of [`conv2d_forward`].
///
/// `upstream` is the loss gradient at the conv output; `saved_input` and
/// `kernel` are the forward operands. Returns gradients for input, kernel
/// and bias. Batch contributions to the weight gradients accumulate in
/// sample order, so results are deterministic.
pub fn conv2d_backward<T: Scalar>(upstream: &Tensor4<T>, saved_input: &Tensor4<T>, kernel: &Tensor4<T>, padding: usize) -> Result<ConvGrads<T>> {
    let [batch, in_ch, h, w] = saved_input.shape();
    let [out_ch, k_in, kh, kw] = kernel.shape();
    if k_in != in_ch {
        return Err(TensorError::ShapeMismatch {
            context: "conv2d_backward",
            expected: format!("kernel in_ch {in_ch}"),
            got: format!("{k_in}"),
        });
    }
    let ho = out_dim(h, kh, padding)?;
    let wo = out_dim(w, kw, padding)?;
    if upstream.shape() != [batch, out_ch, ho, wo] {
        return Err(TensorError::ShapeMismatch {
            context: "conv2d_backward",
            expected: format!("upstream {:?}", [batch, out_ch, ho, wo]),
            got: format!("{:?}", upstream.shape()),
        });
    }
    let howo = ho * wo;
    let kdim = in_ch * kh * kw;

    let mut grads = ConvGrads {
        grad_input: Tensor4::zeros(saved_input.shape()),
        grad_kernel: Tensor4::zeros(kernel.shape()),
        grad_bias: vec![T::ZERO; out_ch],
    };

    let direct_1x1 = kh == 1 && kw == 1 && padding == 0;
    let mut cols = if direct_1x1 { Vec::new() } else { vec![T::ZERO; kdim * howo] };
    let mut grad_cols = vec![T::ZERO; kdim * howo];

    for n in 0..batch {
        let up = upstream.sample(n);

        // grad_bias[oc] += sum over the spatial map.
        for oc in 0..out_ch {
            let mut acc = T::ZERO;
            for &v in &up[oc * howo..(oc + 1) * howo] {
                acc += v;
            }
            grads.grad_bias[oc] += acc;
        }

        // grad_kernel += upstream_n (out_ch × howo) @ colsᵀ (howo × kdim).
        if direct_1x1 {
            let cols_view = saved_input.sample(n);
            T::gemm_strided(out_ch, howo, kdim, T::ONE, up, howo, 1, cols_view, 1, howo, T::ONE, grads.grad_kernel.data_mut());
        } else {
            im2col(saved_input.sample(n), in_ch, h, w, kh, kw, padding, ho, wo, &mut cols);
            T::gemm_strided(out_ch, howo, kdim, T::ONE, up, howo, 1, &cols, 1, howo, T::ONE, grads.grad_kernel.data_mut());
        }

        // grad_cols = kernelᵀ (kdim × out_ch) @ upstream_n (out_ch × howo),
        // then scatter back onto the input raster.
        T::gemm_strided(kdim, out_ch, howo, T::ONE, kernel.data(), 1, kdim, up, howo, 1, T::ZERO, &mut grad_cols);
        if direct_1x1 {
            for (d, s) in grads.grad_input.sample_mut(n).iter_mut().zip(&grad_cols) {
                *d += *s;
            }
        } else {
            col2im_add(&grad_cols, in_ch, h, w, kh, kw, padding, ho, wo, grads.grad_input.sample_mut(n));
        }
    }
    Ok(grads)
}
