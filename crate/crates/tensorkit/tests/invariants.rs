use proptest::collection::vec;
use proptest::prelude::*;
use tensorkit::{conv2d_forward, dropout, leaky_relu, maxpool2x2, maxpool2x2_backward, Tensor4};

prop_compose! {
    fn tensor_and_shape(max_dim: usize)
        (n in 1..=2usize, c in 1..=2usize, h in 1..=max_dim, w in 1..=max_dim)
        (data in vec(-1.0f32..1.0, n * c * h * w), shape in Just([n, c, h, w]))
    -> Tensor4 {
        Tensor4::from_vec(shape, data).unwrap()
    }
}

proptest! {
    /// Pooling only routes gradient, it never creates or destroys mass.
    #[test]
    fn maxpool_backward_conserves_gradient_mass(t in tensor_and_shape(7)) {
        let (out, argmax) = maxpool2x2(&t);
        let upstream = Tensor4::from_vec(out.shape(), (0..out.len()).map(|i| (i % 5) as f32 - 2.0).collect()).unwrap();
        let grad = maxpool2x2_backward(&upstream, &argmax, t.shape());
        let up_sum: f64 = upstream.data().iter().map(|&v| v as f64).sum();
        let grad_sum: f64 = grad.data().iter().map(|&v| v as f64).sum();
        prop_assert!((up_sum - grad_sum).abs() < 1e-4);
    }

    /// Convolution with zero bias is homogeneous: conv(a*x) == a*conv(x).
    #[test]
    fn conv_is_homogeneous(t in tensor_and_shape(6), a in -2.0f32..2.0) {
        let kernel = Tensor4::from_vec([1, t.channels(), 1, 1], vec![0.5; t.channels()]).unwrap();
        let bias = vec![0.0f32];
        let lhs = conv2d_forward(&t.map(|v| a * v), &kernel, &bias, 0).unwrap();
        let rhs = conv2d_forward(&t, &kernel, &bias, 0).unwrap().map(|v| a * v);
        for (l, r) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((l - r).abs() < 1e-5);
        }
    }

    /// Slope 1 makes leaky ReLU the identity; slope 0 clamps negatives to 0.
    #[test]
    fn leaky_relu_slope_extremes(t in tensor_and_shape(6)) {
        let id = leaky_relu(&t, 1.0);
        prop_assert_eq!(id.data(), t.data());
        let relu = leaky_relu(&t, 0.0);
        prop_assert!(relu.data().iter().all(|&v| v >= 0.0));
    }

    /// Inference-mode dropout is a bit-exact identity for any valid rate.
    #[test]
    fn dropout_inference_is_identity(t in tensor_and_shape(6), rate in 0.0f64..0.99, seed in any::<u64>()) {
        let out = dropout(&t, rate, seed, false).unwrap();
        prop_assert_eq!(out.data(), t.data());
    }
}
