//! Independent reference implementations (naive loops) checked against the
//! GEMM-backed operations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensorkit::{conv2d_forward, dropout, maxpool2x2, Tensor4};

/// Seven nested loops, straight from the definition of padded stride-1
/// cross-correlation. Deliberately shares no code with the production path.
fn conv2d_naive(input: &Tensor4, kernel: &Tensor4, bias: &[f32], padding: usize) -> Tensor4 {
    let [batch, in_ch, h, w] = input.shape();
    let [out_ch, _, kh, kw] = kernel.shape();
    let ho = h + 2 * padding - kh + 1;
    let wo = w + 2 * padding - kw + 1;
    let mut out = Tensor4::zeros([batch, out_ch, ho, wo]);
    for n in 0..batch {
        for oc in 0..out_ch {
            for oy in 0..ho {
                for ox in 0..wo {
                    let mut acc = 0.0f32;
                    for ic in 0..in_ch {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (oy + ky) as isize - padding as isize;
                                let ix = (ox + kx) as isize - padding as isize;
                                if iy >= 0 && (iy as usize) < h && ix >= 0 && (ix as usize) < w {
                                    acc += input.get(n, ic, iy as usize, ix as usize) * kernel.get(oc, ic, ky, kx);
                                }
                            }
                        }
                    }
                    out.set(n, oc, oy, ox, acc + bias[oc]);
                }
            }
        }
    }
    out
}

fn random_tensor(shape: [usize; 4], rng: &mut ChaCha8Rng) -> Tensor4 {
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    Tensor4::from_vec(shape, data).unwrap()
}

#[test]
fn conv2d_matches_naive_reference_on_200_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    for case in 0..200 {
        let batch = rng.gen_range(1..=2);
        let in_ch = rng.gen_range(1..=3);
        let out_ch = rng.gen_range(1..=4);
        let k = [1, 3, 5][rng.gen_range(0..3)];
        let h = rng.gen_range(k..=k + 6);
        let w = rng.gen_range(k..=k + 6);
        let padding = if rng.gen::<bool>() { k / 2 } else { 0 };

        let input = random_tensor([batch, in_ch, h, w], &mut rng);
        let kernel = random_tensor([out_ch, in_ch, k, k], &mut rng);
        let bias: Vec<f32> = (0..out_ch).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let fast = conv2d_forward(&input, &kernel, &bias, padding).unwrap();
        let naive = conv2d_naive(&input, &kernel, &bias, padding);
        assert_eq!(fast.shape(), naive.shape(), "case {case}");
        for (i, (a, b)) in fast.data().iter().zip(naive.data()).enumerate() {
            assert!(
                (a - b).abs() < 1e-5,
                "case {case}, element {i}: fast {a} vs naive {b}"
            );
        }
    }
}

#[test]
fn spec_example_2x3x8x8_against_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let input = random_tensor([2, 3, 8, 8], &mut rng);
    let kernel = random_tensor([4, 3, 3, 3], &mut rng);
    let bias: Vec<f32> = (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let fast = conv2d_forward(&input, &kernel, &bias, 1).unwrap();
    let naive = conv2d_naive(&input, &kernel, &bias, 1);
    for (a, b) in fast.data().iter().zip(naive.data()) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn maxpool_matches_window_scan_on_random_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let shape = [rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(1..=7), rng.gen_range(1..=7)];
        let t = random_tensor(shape, &mut rng);
        let (out, argmax) = maxpool2x2(&t);
        let [_, _, h, w] = shape;
        let mut k = 0;
        for n in 0..shape[0] {
            for c in 0..shape[1] {
                for oy in 0..h.div_ceil(2) {
                    for ox in 0..w.div_ceil(2) {
                        // Naive scan over the clipped window.
                        let mut best = f32::NEG_INFINITY;
                        for dy in 0..2usize {
                            for dx in 0..2usize {
                                if oy * 2 + dy < h && ox * 2 + dx < w {
                                    best = best.max(t.get(n, c, oy * 2 + dy, ox * 2 + dx));
                                }
                            }
                        }
                        assert_eq!(out.get(n, c, oy, ox), best);
                        assert_eq!(t.data()[argmax[k]], best, "argmax points at the max");
                        k += 1;
                    }
                }
            }
        }
    }
}

#[test]
fn dropout_survivor_statistics() {
    let t = Tensor4::<f32>::from_vec([1, 1, 1000, 1000], vec![1.0; 1_000_000]).unwrap();
    let out = dropout(&t, 0.5, 123, true).unwrap();
    let survivors = out.data().iter().filter(|&&v| v != 0.0).count();
    let fraction = survivors as f64 / 1e6;
    assert!((fraction - 0.5).abs() < 0.01, "survivor fraction {fraction}");
    let mean: f64 = out.data().iter().map(|&v| v as f64).sum::<f64>() / 1e6;
    // Inverted dropout keeps the expectation at the input mean (1.0) and
    // scales survivors to exactly 2.0.
    assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    assert!(out.data().iter().all(|&v| v == 0.0 || v == 2.0));
}
