//! Finite-difference and brute-force oracles for every layer kernel.

use radio_ae::model::{forward, forward_loss, init_model, Architecture, ModelParams};
use radio_ae::nn::conv::{conv1d_depthwise, conv1d_depthwise_backward};
use radio_ae::nn::dense::{dense, dense_backward};
use radio_ae::nn::dropout::{dropout, Mode};
use radio_ae::nn::{
    grad_check, hard_sigmoid, hard_sigmoid_backward, l1_activity_penalty, l2_weight_penalty, mse_loss, relu,
    relu_backward, Matrix,
};
use radio_ae::rng::rng_from_seed;
use radio_ae::Scalar;

const EPS: f64 = 1e-5;
const E2E_EPS: f64 = 1e-3;

fn randn(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| f64::standard_normal(&mut rng)).collect()
}

/// Fixed random projection so a vector-valued op becomes a scalar loss.
fn project(y: &[f64], w: &[f64]) -> f64 {
    y.iter().zip(w).map(|(a, b)| a * b).sum()
}

fn brute_force_conv(input: &[Vec<f64>], filters: &[Vec<f64>], pad: usize) -> Vec<Vec<f64>> {
    let len = input[0].len() as isize;
    let k = filters[0].len();
    let out_len = input[0].len() + 2 * pad + 1 - k;
    let mut out = Vec::new();
    for f in filters {
        for row in input {
            let mut y = vec![0.0; out_len];
            for (t, yt) in y.iter_mut().enumerate() {
                for (j, &w) in f.iter().enumerate() {
                    let src = t as isize + j as isize - pad as isize;
                    if src >= 0 && src < len {
                        *yt += w * row[src as usize];
                    }
                }
            }
            out.push(y);
        }
    }
    out
}

#[test]
fn conv_matches_brute_force() {
    for (seed, (c, t, f, k, pad)) in [
        (2, 88, 2, 40, 40),
        (1, 12, 3, 5, 0),
        (2, 88, 1, 81, 40),
        (3, 9, 2, 4, 2),
    ]
    .into_iter()
    .enumerate()
    {
        let x = randn(c * t, seed as u64);
        let w = randn(f * k, 100 + seed as u64);
        let input = Matrix::new(c, t, x.clone()).unwrap();
        let filters = Matrix::new(f, k, w.clone()).unwrap();
        let fast = conv1d_depthwise(&input, &filters, pad).unwrap();
        let rows_in: Vec<Vec<f64>> = x.chunks(t).map(<[f64]>::to_vec).collect();
        let rows_w: Vec<Vec<f64>> = w.chunks(k).map(<[f64]>::to_vec).collect();
        let slow = brute_force_conv(&rows_in, &rows_w, pad);
        assert_eq!(fast.rows(), slow.len());
        for (r, row) in slow.iter().enumerate() {
            for (a, b) in fast.row(r).iter().zip(row) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn conv_gradients() {
    let (c, t, f, k, pad) = (1, 12, 1, 5, 0);
    let x = randn(c * t, 1);
    let w = randn(f * k, 2);
    let out_len = t + 2 * pad - k + 1;
    let proj = randn(f * c * out_len, 3);
    let input = Matrix::new(c, t, x.clone()).unwrap();
    let filters = Matrix::new(f, k, w.clone()).unwrap();
    let d_out = Matrix::new(f * c, out_len, proj.clone()).unwrap();
    let g = conv1d_depthwise_backward(&input, &filters, pad, &d_out).unwrap();

    let err_taps = grad_check(
        |p| {
            project(
                conv1d_depthwise(&input, &Matrix::new(f, k, p.to_vec()).unwrap(), pad)
                    .unwrap()
                    .as_slice(),
                &proj,
            )
        },
        g.d_weights.as_slice(),
        &w,
        EPS,
    );
    assert!(err_taps < 1e-6, "taps {err_taps}");
    let err_in = grad_check(
        |p| {
            project(
                conv1d_depthwise(&Matrix::new(c, t, p.to_vec()).unwrap(), &filters, pad)
                    .unwrap()
                    .as_slice(),
                &proj,
            )
        },
        g.d_input.as_slice(),
        &x,
        EPS,
    );
    assert!(err_in < 1e-6, "input {err_in}");

    // padded, multi-filter, multi-channel
    let (c, t, f, k, pad) = (2, 20, 2, 7, 6);
    let x = randn(c * t, 4);
    let w = randn(f * k, 5);
    let out_len = t + 2 * pad - k + 1;
    let proj = randn(f * c * out_len, 6);
    let input = Matrix::new(c, t, x.clone()).unwrap();
    let filters = Matrix::new(f, k, w.clone()).unwrap();
    let g = conv1d_depthwise_backward(
        &input,
        &filters,
        pad,
        &Matrix::new(f * c, out_len, proj.clone()).unwrap(),
    )
    .unwrap();
    let err = grad_check(
        |p| {
            project(
                conv1d_depthwise(&input, &Matrix::new(f, k, p.to_vec()).unwrap(), pad)
                    .unwrap()
                    .as_slice(),
                &proj,
            )
        },
        g.d_weights.as_slice(),
        &w,
        EPS,
    );
    assert!(err < 1e-6, "padded taps {err}");
    let err = grad_check(
        |p| {
            project(
                conv1d_depthwise(&Matrix::new(c, t, p.to_vec()).unwrap(), &filters, pad)
                    .unwrap()
                    .as_slice(),
                &proj,
            )
        },
        g.d_input.as_slice(),
        &x,
        EPS,
    );
    assert!(err < 1e-6, "padded input {err}");
}

#[test]
fn dense_gradients() {
    let (n, m) = (8, 3);
    let x = randn(n, 10);
    let w = randn(n * m, 11);
    let b = randn(m, 12);
    let proj = randn(m, 13);
    let wm = Matrix::new(n, m, w.clone()).unwrap();
    let g = dense_backward(&x, &wm, &proj).unwrap();

    let e_in = grad_check(
        |p| project(&dense(p, &wm, &b).unwrap(), &proj),
        g.d_input.as_slice(),
        &x,
        EPS,
    );
    let e_w = grad_check(
        |p| project(&dense(&x, &Matrix::new(n, m, p.to_vec()).unwrap(), &b).unwrap(), &proj),
        g.d_weights.as_slice(),
        &w,
        EPS,
    );
    let e_b = grad_check(|p| project(&dense(&x, &wm, p).unwrap(), &proj), &g.d_bias, &b, EPS);
    assert!(e_in < 1e-6 && e_w < 1e-6 && e_b < 1e-6, "{e_in} {e_w} {e_b}");
}

/// Points bounded away from the activation corners by at least 1e-3.
fn away_from(points: Vec<f64>, kinks: &[f64]) -> Vec<f64> {
    points
        .into_iter()
        .map(|mut v| {
            for &k in kinks {
                if (v - k).abs() < 1e-3 {
                    v = k + 2e-3;
                }
            }
            v
        })
        .collect()
}

#[test]
fn activation_gradients() {
    let mut rng = rng_from_seed(20);
    let x: Vec<f64> = (0..64).map(|_| f64::uniform(&mut rng, -2.4, 2.4)).collect();
    let x = away_from(x, &[-2.5, 2.5]);
    let proj = randn(64, 21);
    let g = hard_sigmoid_backward(&x, &proj);
    let err = grad_check(|p| project(&hard_sigmoid(p), &proj), &g, &x, EPS);
    assert!(err < 1e-8, "hard sigmoid {err}");

    let x = away_from(randn(64, 22), &[0.0]);
    let g = relu_backward(&x, &proj);
    let err = grad_check(|p| project(&relu(p), &proj), &g, &x, EPS);
    assert!(err < 1e-8, "relu {err}");

    // saturated region has zero gradient on both sides
    let x = vec![-9.0, -3.0, 3.0, 9.0];
    assert!(hard_sigmoid_backward(&x, &[1.0; 4]).iter().all(|&g| g == 0.0));
    assert!(
        hard_sigmoid(&randn(1000, 23).iter().map(|v| v * 10.0).collect::<Vec<_>>())
            .iter()
            .all(|&y| (0.0..=1.0).contains(&y))
    );
}

#[test]
fn dropout_gradient_uses_forward_mask() {
    let x = randn(200, 30);
    let proj = randn(200, 31);
    let (_, mask) = dropout(&x, 0.5, Mode::Train, &mut rng_from_seed(32)).unwrap();
    let g = mask.backward(&proj);
    let err = grad_check(
        |p| project(&dropout(p, 0.5, Mode::Train, &mut rng_from_seed(32)).unwrap().0, &proj),
        &g,
        &x,
        EPS,
    );
    assert!(err < 1e-6, "{err}");
}

#[test]
fn loss_and_penalty_gradients() {
    let pred = randn(2 * 11, 40);
    let target = Matrix::new(2, 11, randn(22, 41)).unwrap();
    let (_, g) = mse_loss(&Matrix::new(2, 11, pred.clone()).unwrap(), &target).unwrap();
    let err = grad_check(
        |p| mse_loss(&Matrix::new(2, 11, p.to_vec()).unwrap(), &target).unwrap().0,
        g.as_slice(),
        &pred,
        EPS,
    );
    assert!(err < 1e-8, "mse {err}");

    let h = away_from(randn(30, 42), &[0.0]);
    let (_, g) = l1_activity_penalty(&h, 0.7);
    let err = grad_check(|p| l1_activity_penalty(p, 0.7).0, &g, &h, EPS);
    assert!(err < 1e-8, "l1 {err}");

    let w = randn(25, 43);
    let (_, g) = l2_weight_penalty(&[&w[..10], &w[10..]], 0.3);
    let flat: Vec<f64> = g.concat();
    let err = grad_check(|p| l2_weight_penalty(&[&p[..10], &p[10..]], 0.3).0, &flat, &w, EPS);
    assert!(err < 1e-8, "l2 {err}");
}

#[test]
fn mse_is_zero_only_at_equality() {
    let a = Matrix::new(3, 4, randn(12, 50)).unwrap();
    assert_eq!(mse_loss(&a, &a).unwrap().0, 0.0);
    let mut b = a.clone();
    b.as_mut_slice()[7] += 1e-6;
    assert!(mse_loss(&a, &b).unwrap().0 > 0.0);
}

#[test]
fn dense_relu_mse_pipeline() {
    let (n, m) = (10, 6);
    let x = randn(n, 60);
    let target = Matrix::new(1, m, randn(m, 61)).unwrap();
    let b = randn(m, 62);
    let mut w = randn(n * m, 63);
    // keep relu pre-activations off the corner
    let pre = dense(&x, &Matrix::new(n, m, w.clone()).unwrap(), &b).unwrap();
    for (j, &z) in pre.iter().enumerate() {
        if z.abs() < 1e-3 {
            w[j] += 0.1;
        }
    }
    let loss = |w: &[f64]| {
        let z = dense(&x, &Matrix::new(n, m, w.to_vec()).unwrap(), &b).unwrap();
        mse_loss(&Matrix::new(1, m, relu(&z)).unwrap(), &target).unwrap().0
    };
    let wm = Matrix::new(n, m, w.clone()).unwrap();
    let z = dense(&x, &wm, &b).unwrap();
    let (_, d_y) = mse_loss(&Matrix::new(1, m, relu(&z)).unwrap(), &target).unwrap();
    let d_z = relu_backward(&z, d_y.as_slice());
    let g = dense_backward(&x, &wm, &d_z).unwrap();
    let err = grad_check(loss, g.d_weights.as_slice(), &w, EPS);
    assert!(err < 1e-6, "{err}");
}

/// Shifts biases so that no hard-sigmoid or relu pre-activation sits within
/// `margin` of a corner at the check point.
fn nudge_off_kinks(model: &mut ModelParams<f64>, x: &Matrix<f64>, seed: u64, margin: f64) {
    for _ in 0..4 {
        let tr = forward(model, x, Mode::Train, &mut rng_from_seed(seed)).unwrap();
        let mut moved = false;
        for (j, &z) in tr.enc_pre.iter().enumerate() {
            for edge in [-2.5, 2.5] {
                if (z - edge).abs() < margin {
                    model.enc_b[j] += 2.0 * margin * if z >= edge { 1.0 } else { -1.0 };
                    moved = true;
                }
            }
        }
        for (j, &z) in tr.dec_pre.iter().enumerate() {
            if z.abs() < margin {
                model.dec_b[j] += 2.0 * margin * if z >= 0.0 { 1.0 } else { -1.0 };
                moved = true;
            }
            if !moved && z == 0.0 {
                model.dec_b[j] += 2.0 * margin;
            }
        }
        if !moved {
            return;
        }
    }
}

#[test]
fn end_to_end_autoencoder_gradient() {
    let arch = Architecture::default();
    let mut model = init_model::<f64>(arch, 77).unwrap();
    // a realistic operating point: large enough weights to use both code
    // saturation regions and the linear band
    model.enc_w.as_mut_slice().iter_mut().for_each(|v| *v *= 8.0);
    let clean = Matrix::new(2, 88, randn(176, 78).iter().map(|v| v * 0.7).collect()).unwrap();
    let noisy = Matrix::new(
        2,
        88,
        clean
            .as_slice()
            .iter()
            .zip(randn(176, 79))
            .map(|(c, n)| c + 0.05 * n)
            .collect(),
    )
    .unwrap();
    let seed = 80;
    nudge_off_kinks(&mut model, &noisy, seed, 2e-2);
    let (l1, l2) = (1e-3, 1e-3);

    let (loss, grads) = forward_loss(&model, &noisy, &clean, l1, l2, Mode::Train, &mut rng_from_seed(seed)).unwrap();
    assert!(loss.l1_activity > 0.0 && loss.l2_weights > 0.0);
    let tr = forward(&model, &noisy, Mode::Train, &mut rng_from_seed(seed)).unwrap();
    assert!(
        tr.code.iter().any(|&c| c == 0.0 || c == 1.0),
        "want some saturated units"
    );
    assert!(tr.code.iter().any(|&c| c > 0.0 && c < 1.0), "want some linear units");

    let point = model.to_flat();
    let analytic = grads.to_flat();
    let mut probe = model.clone();
    // piecewise quadratic per coordinate, so a wide step is still exact
    let err = grad_check(
        |p| {
            probe.set_from_flat(p).unwrap();
            forward_loss(&probe, &noisy, &clean, l1, l2, Mode::Train, &mut rng_from_seed(seed))
                .unwrap()
                .0
                .total
        },
        &analytic,
        &point,
        E2E_EPS,
    );
    assert!(err < 1e-4, "end-to-end max relative error {err}");
}
