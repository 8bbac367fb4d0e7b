use crate::{Result, Scalar, Tensor4, TensorError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-element multipliers of an inverted-dropout mask: `0` with probability
/// `rate`, otherwise `1/(1-rate)`. The mask depends only on `(len, rate,
/// seed)`, never on the element type, so `f32` and `f64` runs agree.
pub fn dropout_mask<T: Scalar>(len: usize, rate: f64, seed: u64) -> Result<Vec<T>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(TensorError::InvalidArgument {
            context: "dropout",
            message: format!("rate must be in [0,1), got {rate}"),
        });
    }
    let keep_scale = T::from_f64(1.0 / (1.0 - rate));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len)
        .map(|_| if rng.gen::<f64>() < rate { T::ZERO } else { keep_scale })
        .collect())
}

/// Inverted dropout.
///
/// In training mode each element is zeroed with probability `rate` and the
/// survivors are scaled by `1/(1-rate)`, so the expected value is unchanged.
/// In inference mode (`training = false`) the input passes through
/// bit-exactly.
pub fn dropout<T: Scalar>(input: &Tensor4<T>, rate: f64, seed: u64, training: bool) -> Result<Tensor4<T>> {
    Ok(dropout_with_mask(input, rate, seed, training)?.0)
}

/// [`dropout`] that also returns the applied mask so a backward pass can
/// reuse it (the gradient of dropout is elementwise multiplication by the
/// same mask).
pub fn dropout_with_mask<T: Scalar>(input: &Tensor4<T>, rate: f64, seed: u64, training: bool) -> Result<(Tensor4<T>, Vec<T>)> {
    if !training || rate == 0.0 {
        // Identity; mask of ones keeps the backward contract uniform.
        let _ = dropout_mask::<T>(0, rate, seed)?; // still validate `rate`
        return Ok((input.clone(), vec![T::ONE; input.len()]));
    }
    let mask = dropout_mask::<T>(input.len(), rate, seed)?;
    let data = input.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
    Ok((Tensor4::from_vec(input.shape(), data).expect("same shape"), mask))
}
