use crate::{Scalar, Tensor4};

/// 2×2 max pooling with stride 2.
///
/// Output spatial dims are `ceil(h/2) × ceil(w/2)`; odd inputs behave as if
/// padded right/bottom with −∞. Returns the pooled tensor plus, per output
/// element, the flat index into `input.data()` of the element that won its
/// window. Ties go to the first element in row-major window order, which is
/// where the gradient routes.
pub fn maxpool2x2<T: Scalar>(input: &Tensor4<T>) -> (Tensor4<T>, Vec<usize>) {
    let [n, c, h, w] = input.shape();
    let ho = h.div_ceil(2);
    let wo = w.div_ceil(2);
    let mut out = Tensor4::zeros([n, c, ho, wo]);
    let mut argmax = vec![0usize; out.len()];

    let mut oi = 0;
    for nn in 0..n {
        for cc in 0..c {
            let base = input.index(nn, cc, 0, 0);
            for oy in 0..ho {
                for ox in 0..wo {
                    let y0 = oy * 2;
                    let x0 = ox * 2;
                    let mut best_idx = base + y0 * w + x0;
                    let mut best = input.data()[best_idx];
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let (y, x) = (y0 + dy, x0 + dx);
                            if y >= h || x >= w {
                                continue;
                            }
                            let idx = base + y * w + x;
                            let v = input.data()[idx];
                            if v > best {
                                best = v;
                                best_idx = idx;
                            }
                        }
                    }
                    out.data_mut()[oi] = best;
                    argmax[oi] = best_idx;
                    oi += 1;
                }
            }
        }
    }
    (out, argmax)
}

/// Routes each upstream value to the input position recorded in `argmax`.
/// Every window deposits into exactly one location, so the sum of the
/// returned gradient equals the sum of `upstream`.
pub fn maxpool2x2_backward<T: Scalar>(upstream: &Tensor4<T>, argmax: &[usize], input_shape: [usize; 4]) -> Tensor4<T> {
    assert_eq!(upstream.len(), argmax.len(), "maxpool2x2_backward: argmax length mismatch");
    let mut grad = Tensor4::zeros(input_shape);
    for (&idx, &g) in argmax.iter().zip(upstream.data()) {
        grad.data_mut()[idx] += g;
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_window_takes_max() {
        let t = Tensor4::<f32>::from_vec([1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool2x2(&t);
        assert_eq!(out.shape(), [1, 1, 1, 1]);
        assert_eq!(out.data(), &[4.0]);
        assert_eq!(argmax, vec![3]);
    }

    #[test]
    fn constant_input_routes_to_first_of_window() {
        let t = Tensor4::<f32>::from_vec([1, 1, 2, 4], vec![7.0; 8]).unwrap();
        let (out, argmax) = maxpool2x2(&t);
        assert_eq!(out.data(), &[7.0, 7.0]);
        assert_eq!(argmax, vec![0, 2]);
        let up = Tensor4::<f32>::from_vec([1, 1, 1, 2], vec![1.0, 2.0]).unwrap();
        let g = maxpool2x2_backward(&up, &argmax, [1, 1, 2, 4]);
        assert_eq!(g.data(), &[1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn odd_dims_pad_with_neg_infinity_semantics() {
        let t = Tensor4::<f32>::from_vec([1, 1, 3, 3], vec![-9.0, -8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0]).unwrap();
        let (out, _) = maxpool2x2(&t);
        assert_eq!(out.shape(), [1, 1, 2, 2]);
        // Bottom-right window contains only the single element -1.
        assert_eq!(out.data(), &[-5.0, -4.0, -2.0, -1.0]);
    }

    #[test]
    fn grad_mass_is_conserved() {
        let t = Tensor4::<f32>::from_fn([2, 3, 4, 6], |n, c, y, x| ((n * 31 + c * 17 + y * 7 + x * 3) % 13) as f32);
        let (out, argmax) = maxpool2x2(&t);
        let up = Tensor4::<f32>::from_fn(out.shape(), |_, _, y, x| 1.0 + (y + x) as f32);
        let g = maxpool2x2_backward(&up, &argmax, t.shape());
        let sum_up: f32 = up.data().iter().sum();
        let sum_g: f32 = g.data().iter().sum();
        assert_eq!(sum_up, sum_g);
    }
}
