use crate::{Result, Scalar, Tensor4, TensorError};

fn check_same_shape<T: Scalar>(pred: &Tensor4<T>, target: &Tensor4<T>) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(TensorError::ShapeMismatch {
            context: "mse_loss",
            expected: format!("{:?}", pred.shape()),
            got: format!("{:?}", target.shape()),
        });
    }
    Ok(())
}

/// Mean squared error over all elements. Accumulated in f64 so the scalar
/// does not drift with tensor size.
pub fn mse_loss<T: Scalar>(pred: &Tensor4<T>, target: &Tensor4<T>) -> Result<T> {
    check_same_shape(pred, target)?;
    let mut acc = 0.0f64;
    for (&p, &t) in pred.data().iter().zip(target.data()) {
        let d = p.to_f64() - t.to_f64();
        acc += d * d;
    }
    Ok(T::from_f64(acc / pred.len() as f64))
}

/// Gradient of [`mse_loss`] with respect to `pred`: `2 (pred - target) / N`.
pub fn mse_loss_backward<T: Scalar>(pred: &Tensor4<T>, target: &Tensor4<T>) -> Result<Tensor4<T>> {
    check_same_shape(pred, target)?;
    let scale = T::from_f64(2.0 / pred.len() as f64);
    let data = pred.data().iter().zip(target.data()).map(|(&p, &t)| scale * (p - t)).collect();
    Ok(Tensor4::from_vec(pred.shape(), data).expect("same shape"))
}
