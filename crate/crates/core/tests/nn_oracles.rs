//! Checks of the inference head against independent oracles: a closed-form
//! shape walk, a straight-line forward pass and central finite differences.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sleepsig::nn::{
    accuracy, forward, init_params, logits, loss_and_gradients, train, Adam, GradientSet, HeadConfig, ModelParams,
    OptimizerKind, TrainConfig,
};
use sleepsig::Tensor;

fn tiny_config() -> HeadConfig {
    HeadConfig {
        input_channels: 1,
        spatial_side: 8,
        conv_filters: [2, 2, 2],
        fc_sizes: [4, 4, 4, 4],
        ..HeadConfig::default()
    }
}

fn random_params(config: HeadConfig, seed: u64, scale: f64) -> ModelParams<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors = config
        .param_shapes()
        .into_iter()
        .map(|s| {
            let len = s.iter().product();
            Tensor::new(s, (0..len).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
        })
        .collect();
    ModelParams::from_tensors(config, tensors).unwrap()
}

fn random_input(config: &HeadConfig, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    Tensor::from_fn(&config.input_shape(), |_| rng.random_range(-1.0..1.0))
}

/// Closed-form parameter count of the stack, written out layer by layer.
#[test]
fn default_parameter_count_matches_shape_walk() {
    let n = 48;
    let k2 = 3 * 3;
    let conv = 32 * (n * k2 + 1) + 64 * (32 * k2 + 1) + 128 * (64 * k2 + 1);
    // 32 -> 16 -> 8 -> 4 after three 2x2 pools
    let side = 32 / 2 / 2 / 2;
    let flat = 128 * side * side;
    let dense = 128 * (flat + 1) + 64 * (128 + 1) + 32 * (64 + 1) + 16 * (32 + 1) + 2 * (16 + 1);
    assert_eq!(conv + dense, 379_378);
    let cfg = HeadConfig::default();
    assert_eq!(cfg.param_count(), conv + dense);
    assert_eq!(init_params::<f32>(cfg, 7).unwrap().param_count(), conv + dense);
}

#[test]
fn init_is_deterministic_with_zero_biases() {
    let a = init_params::<f32>(HeadConfig::default(), 7).unwrap();
    let b = init_params::<f32>(HeadConfig::default(), 7).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    for layer in 0..3 {
        assert!(a.conv_bias(layer).data().iter().all(|&v| v == 0.0));
    }
    for layer in 0..5 {
        assert!(a.dense_bias(layer).data().iter().all(|&v| v == 0.0));
    }
    assert!(init_params::<f32>(
        HeadConfig {
            spatial_side: 20,
            ..HeadConfig::default()
        },
        7
    )
    .is_err());
}

/// Straight-line forward pass: explicit zero padding, nested loops, no
/// im2col or GEMM.
fn oracle_logits(params: &ModelParams<f64>, input: &Tensor<f64>) -> Vec<f64> {
    let cfg = params.config();
    let k = cfg.kernel as isize;
    let pad = k / 2;
    let mut side = cfg.spatial_side;
    let mut x: Vec<f64> = input.data().to_vec();
    let mut channels = cfg.input_channels;
    for layer in 0..3 {
        let w = params.conv_weight(layer).data();
        let b = params.conv_bias(layer).data();
        let cout = cfg.conv_filters[layer];
        let mut y = vec![0.0; cout * side * side];
        for o in 0..cout {
            for r in 0..side {
                for c in 0..side {
                    let mut acc = b[o];
                    for i in 0..channels {
                        for dr in 0..k {
                            for dc in 0..k {
                                let rr = r as isize + dr - pad;
                                let cc = c as isize + dc - pad;
                                if rr < 0 || cc < 0 || rr >= side as isize || cc >= side as isize {
                                    continue;
                                }
                                let wi = ((o * channels + i) * k as usize + dr as usize) * k as usize + dc as usize;
                                acc += w[wi] * x[(i * side + rr as usize) * side + cc as usize];
                            }
                        }
                    }
                    y[(o * side + r) * side + c] = acc.max(0.0);
                }
            }
        }
        let half = side / 2;
        let mut pooled = vec![0.0; cout * half * half];
        for o in 0..cout {
            for r in 0..half {
                for c in 0..half {
                    let at = |dr: usize, dc: usize| y[(o * side + 2 * r + dr) * side + 2 * c + dc];
                    pooled[(o * half + r) * half + c] = at(0, 0).max(at(0, 1)).max(at(1, 0)).max(at(1, 1));
                }
            }
        }
        x = pooled;
        side = half;
        channels = cout;
    }
    for layer in 0..5 {
        let w = params.dense_weight(layer).data();
        let b = params.dense_bias(layer).data();
        let din = x.len();
        let mut y: Vec<f64> = (0..b.len())
            .map(|o| b[o] + (0..din).map(|i| w[o * din + i] * x[i]).sum::<f64>())
            .collect();
        if layer < 4 {
            y.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        x = y;
    }
    x
}

#[test]
fn forward_matches_straight_line_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (seed, cfg) in [(1, tiny_config()), (2, HeadConfig::with_channels(2))] {
        let params = random_params(cfg, seed, 0.3);
        let input = random_input(&cfg, &mut rng);
        let got = logits(&params, &input).unwrap();
        let want = oracle_logits(&params, &input);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-5 * w.abs().max(1.0), "{got:?} vs {want:?}");
        }
        let probs = forward(&params, &input).unwrap();
        let e: Vec<f64> = want.iter().map(|z| z.exp()).collect();
        let s: f64 = e.iter().sum();
        for (p, e) in probs.data().iter().zip(&e) {
            assert!((p - e / s).abs() < 1e-5);
        }
    }
}

#[test]
fn zero_input_zero_bias_is_uniform() {
    let params = init_params::<f64>(HeadConfig::with_channels(3), 5).unwrap();
    let input = Tensor::zeros(&[3, 32, 32]);
    let p = forward(&params, &input).unwrap();
    assert_eq!(p.data(), &[0.5, 0.5]);
    let (loss, _) = loss_and_gradients(&params, &[&input], &[1]).unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn confident_correct_prediction_has_vanishing_loss() {
    let cfg = tiny_config();
    let mut params = init_params::<f64>(cfg, 3).unwrap();
    params
        .tensors_mut()
        .last_mut()
        .unwrap()
        .data_mut()
        .copy_from_slice(&[0.0, 60.0]);
    let input = Tensor::zeros(&cfg.input_shape());
    let (loss, _) = loss_and_gradients(&params, &[&input], &[1]).unwrap();
    assert!(loss < 1e-20, "loss {loss}");
}

#[test]
fn shape_mismatch_and_empty_batch() {
    let params = init_params::<f32>(HeadConfig::with_channels(2), 1).unwrap();
    let wrong = Tensor::<f32>::zeros(&[3, 32, 32]);
    assert!(forward(&params, &wrong).is_err());
    assert!(loss_and_gradients(&params, &[&wrong], &[0]).is_err());
    assert!(loss_and_gradients(&params, &[], &[]).is_err());
    let ok = Tensor::<f32>::zeros(&[2, 32, 32]);
    assert!(loss_and_gradients(&params, &[&ok], &[2]).is_err());
}

fn all_logits(params: &ModelParams<f64>, inputs: &[&Tensor<f64>]) -> Vec<f64> {
    inputs.iter().flat_map(|x| logits(params, x).unwrap()).collect()
}

/// Compares every gradient coordinate with |g| > 1e-8 against central
/// differences of the loss (h = 1e-3). Within one activation region the
/// logits are exactly linear in any single parameter, so a nonzero second
/// difference of the logits means the +-h probe crossed a ReLU or pooling
/// kink; those coordinates are counted but not compared.
fn max_gradient_error(params: &ModelParams<f64>, inputs: &[Tensor<f64>], labels: &[usize]) -> (f64, usize) {
    let refs: Vec<&Tensor<f64>> = inputs.iter().collect();
    let (_, grads) = loss_and_gradients(params, &refs, labels).unwrap();
    let centre = all_logits(params, &refs);
    let h = 1e-3;
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut kinked = 0;
    let mut probe = params.clone();
    for (t, g) in grads.tensors().iter().enumerate() {
        for (j, &analytic) in g.data().iter().enumerate() {
            let original = probe.tensors()[t].data()[j];
            probe.tensors_mut()[t].data_mut()[j] = original + h;
            let (plus, _) = loss_and_gradients(&probe, &refs, labels).unwrap();
            let z_plus = all_logits(&probe, &refs);
            probe.tensors_mut()[t].data_mut()[j] = original - h;
            let (minus, _) = loss_and_gradients(&probe, &refs, labels).unwrap();
            let z_minus = all_logits(&probe, &refs);
            probe.tensors_mut()[t].data_mut()[j] = original;
            let crossed = centre
                .iter()
                .zip(z_plus.iter().zip(&z_minus))
                .any(|(c, (p, m))| (p + m - 2.0 * c).abs() > 1e-12 * (1.0 + c.abs()));
            if crossed {
                kinked += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            if analytic.abs() > 1e-8 {
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs());
                worst = worst.max(rel);
                checked += 1;
            } else {
                assert!(numeric.abs() < 1e-6, "zero analytic gradient but numeric {numeric}");
            }
        }
    }
    let total = params.param_count();
    assert!(kinked * 2 <= total, "{kinked} of {total} coordinates crossed a kink");
    (worst, checked)
}

#[test]
fn gradients_match_finite_differences_on_tiny_config() {
    let cfg = tiny_config();
    let params = random_params(cfg, 21, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let inputs: Vec<Tensor<f64>> = (0..3).map(|_| random_input(&cfg, &mut rng)).collect();
    let (worst, checked) = max_gradient_error(&params, &inputs, &[0, 1, 1]);
    assert!(checked > 50, "only {checked} coordinates checked");
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn gradient_set_is_congruent() {
    let params = init_params::<f64>(tiny_config(), 1).unwrap();
    let input = Tensor::zeros(&tiny_config().input_shape());
    let (_, grads) = loss_and_gradients(&params, &[&input], &[0]).unwrap();
    assert_eq!(grads.tensors().len(), params.tensors().len());
    for (g, p) in grads.tensors().iter().zip(params.tensors()) {
        assert_eq!(g.shape(), p.shape());
    }
}

#[test]
fn adam_zero_gradient_leaves_params() {
    let mut params = init_params::<f64>(tiny_config(), 4).unwrap();
    let before = params.clone();
    let grads = GradientSet::zeros_like(&params);
    let mut adam = Adam::with_defaults(&params);
    adam.step(&mut params, &grads, 0.1).unwrap();
    assert_eq!(params, before);
    assert_eq!(adam.step_count(), 1);
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    // m = 0.1, v = 0.001; bias-corrected both are 1, so the step is lr / (1 + eps)
    let mut params = init_params::<f64>(tiny_config(), 4).unwrap();
    let before = params.clone();
    let mut grads = GradientSet::zeros_like(&params);
    grads.tensors_mut().iter_mut().for_each(|t| t.fill(1.0));
    let mut adam = Adam::with_defaults(&params);
    adam.step(&mut params, &grads, 0.1).unwrap();
    let expected = 0.1 / (1.0 + 1e-8);
    for (a, b) in params.tensors().iter().zip(before.tensors()) {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!(((y - x) - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn adam_is_deterministic() {
    let params = init_params::<f32>(tiny_config(), 4).unwrap();
    let input = Tensor::from_fn(&tiny_config().input_shape(), |i| (i as f32 * 0.3).sin());
    let (_, grads) = loss_and_gradients(&params, &[&input], &[1]).unwrap();
    let run = || {
        let mut p = params.clone();
        let mut adam = Adam::with_defaults(&p);
        adam.step(&mut p, &grads, 1e-3).unwrap();
        adam.step(&mut p, &grads, 1e-3).unwrap();
        p.to_bytes()
    };
    assert_eq!(run(), run());
}

#[test]
fn adam_rejects_incongruent_gradients() {
    let mut params = init_params::<f64>(tiny_config(), 4).unwrap();
    let other = init_params::<f64>(
        HeadConfig {
            input_channels: 2,
            ..tiny_config()
        },
        4,
    )
    .unwrap();
    let grads = GradientSet::zeros_like(&other);
    assert!(Adam::with_defaults(&params.clone())
        .step(&mut params, &grads, 0.1)
        .is_err());
}

#[test]
fn single_sample_loss_descends() {
    let cfg = HeadConfig::with_channels(1);
    let params = init_params::<f32>(cfg, 9).unwrap();
    let input = Tensor::from_fn(&cfg.input_shape(), |i| ((i * 31 % 17) as f32 - 8.0) / 8.0);
    let config = TrainConfig {
        epochs: 10,
        seed: 1,
        ..TrainConfig::default()
    };
    let out = train(params, &[input], &[1], &config).unwrap();
    assert_eq!(out.loss_trace.len(), 10);
    for w in out.loss_trace.windows(2) {
        assert!(w[1] < w[0], "{:?}", out.loss_trace);
    }
}

#[test]
fn training_is_deterministic_and_sgd_available() {
    let cfg = HeadConfig::with_channels(1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inputs: Vec<Tensor<f32>> = (0..6)
        .map(|_| Tensor::from_fn(&cfg.input_shape(), |_| rng.random_range(-1.0..1.0)))
        .collect();
    let labels = [0, 1, 0, 1, 0, 1];
    for optimizer in [OptimizerKind::default(), OptimizerKind::Sgd] {
        let config = TrainConfig {
            epochs: 3,
            batch_size: 4,
            lr: 1e-3,
            seed: 3,
            optimizer,
        };
        let a = train(init_params(cfg, 1).unwrap(), &inputs, &labels, &config).unwrap();
        let b = train(init_params(cfg, 1).unwrap(), &inputs, &labels, &config).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.params.to_bytes(), b.params.to_bytes());
        assert!(a.params.is_finite());
        assert!(accuracy(&a.params, &inputs, &labels).unwrap() >= 0.0);
    }
    assert!(train(
        init_params(cfg, 1).unwrap(),
        &inputs,
        &[0, 1, 0, 1, 0, 2],
        &TrainConfig::default()
    )
    .is_err());
}

#[test]
fn model_file_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let params = random_params(HeadConfig::with_channels(3), 8, 2.0).cast::<f32>();
    let path = dir.path().join("head.slpn");
    params.save(&path).unwrap();
    let loaded = ModelParams::load(&path).unwrap();
    assert_eq!(loaded.config(), params.config());
    for (a, b) in loaded.tensors().iter().zip(params.tensors()) {
        let bits = |t: &Tensor<f32>| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
    assert_eq!(loaded.to_bytes(), std::fs::read(&path).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn softmax_output_is_a_distribution(seed in any::<u64>(), scale in 0.01f64..20.0) {
        let cfg = HeadConfig::with_channels(1);
        let params = init_params::<f32>(cfg, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let input = Tensor::from_fn(&cfg.input_shape(), |_| rng.random_range(-scale..scale) as f32);
        let p = forward(&params, &input).unwrap();
        let sum: f32 = p.data().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-6);
        prop_assert!(p.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn batch_order_does_not_change_mean_loss(seed in any::<u64>()) {
        let cfg = tiny_config();
        let params = init_params::<f32>(cfg, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<Tensor<f32>> = (0..5)
            .map(|_| Tensor::from_fn(&cfg.input_shape(), |_| rng.random_range(-1.0..1.0)))
            .collect();
        let labels = [0usize, 1, 1, 0, 1];
        let fwd: Vec<&Tensor<f32>> = inputs.iter().collect();
        let rev: Vec<&Tensor<f32>> = inputs.iter().rev().collect();
        let rev_labels: Vec<usize> = labels.iter().rev().copied().collect();
        let (a, _) = loss_and_gradients(&params, &fwd, &labels).unwrap();
        let (b, _) = loss_and_gradients(&params, &rev, &rev_labels).unwrap();
        prop_assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn random_tiny_configs_have_exact_gradients(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = HeadConfig {
            input_channels: rng.random_range(1..=3),
            spatial_side: 8,
            conv_filters: [rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3)],
            fc_sizes: [rng.random_range(2..=5), rng.random_range(2..=5), rng.random_range(2..=5), rng.random_range(2..=5)],
            ..HeadConfig::default()
        };
        let params = random_params(cfg, seed, 0.5);
        let inputs: Vec<Tensor<f64>> = (0..2).map(|_| random_input(&cfg, &mut rng)).collect();
        let (worst, _) = max_gradient_error(&params, &inputs, &[0, 1]);
        prop_assert!(worst < 1e-4, "worst {}", worst);
    }
}
