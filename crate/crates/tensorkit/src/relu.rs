use crate::{Scalar, Tensor4};

/// Leaky rectified linear unit: `x if x >= 0 else slope * x`.
///
/// `slope = 0` yields the plain ReLU. Valid slopes lie in `[0, 1)`.
pub fn leaky_relu<T: Scalar>(input: &Tensor4<T>, slope: T) -> Tensor4<T> {
    input.map(|x| if x >= T::ZERO { x } else { slope * x })
}

/// Gradient of [`leaky_relu`]: passes `upstream` where the saved input was
/// nonnegative and scales it by `slope` elsewhere.
pub fn leaky_relu_backward<T: Scalar>(upstream: &Tensor4<T>, saved_input: &Tensor4<T>, slope: T) -> Tensor4<T> {
    assert_eq!(upstream.shape(), saved_input.shape(), "leaky_relu_backward: shape mismatch");
    let data = upstream
        .data()
        .iter()
        .zip(saved_input.data())
        .map(|(&g, &x)| if x >= T::ZERO { g } else { slope * g })
        .collect();
    Tensor4::from_vec(upstream.shape(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_branch_scales_by_slope() {
        let t = Tensor4::<f32>::from_vec([1, 1, 1, 2], vec![-2.0, 3.5]).unwrap();
        let out = leaky_relu(&t, 0.01);
        assert_eq!(out.data(), &[-0.02, 3.5]);
    }

    #[test]
    fn slope_zero_is_plain_relu() {
        let t = Tensor4::<f32>::from_vec([1, 1, 1, 3], vec![-1.0, 0.0, 2.0]).unwrap();
        let out = leaky_relu(&t, 0.0);
        assert_eq!(out.data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn backward_routes_by_input_sign() {
        let x = Tensor4::<f32>::from_vec([1, 1, 1, 3], vec![-1.0, 0.0, 2.0]).unwrap();
        let g = Tensor4::<f32>::from_vec([1, 1, 1, 3], vec![10.0, 10.0, 10.0]).unwrap();
        let gi = leaky_relu_backward(&g, &x, 0.25);
        assert_eq!(gi.data(), &[2.5, 10.0, 10.0]);
    }
}
