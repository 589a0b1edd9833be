use super::{GradientSet, HeadConfig, ModelParams};
use crate::error::{Error, Result};
use crate::tensor::{gemm, Layout, Scalar, Tensor};

pub fn relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp<T: Scalar>(logits: &[T]) -> T {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    max + logits.iter().map(|&z| (z - max).exp()).sum::<T>().ln()
}

/// Lays out every `k×k` same-padded patch of a `channels×side×side` image as
/// the columns of a `(channels·k·k) × (side·side)` matrix.
fn im2col<T: Scalar>(input: &[T], channels: usize, side: usize, k: usize, col: &mut [T]) {
    let pad = k / 2;
    let hw = side * side;
    for c in 0..channels {
        let plane = &input[c * hw..(c + 1) * hw];
        for ki in 0..k {
            for kj in 0..k {
                let row = &mut col[((c * k + ki) * k + kj) * hw..][..hw];
                for y in 0..side {
                    let out = &mut row[y * side..(y + 1) * side];
                    let sy = y + ki;
                    if sy < pad || sy - pad >= side {
                        out.fill(T::zero());
                        continue;
                    }
                    let src = &plane[(sy - pad) * side..(sy - pad + 1) * side];
                    // output x reads src[x + kj - pad]
                    let lo = pad.saturating_sub(kj);
                    let hi = (side + pad).saturating_sub(kj).min(side);
                    out[..lo].fill(T::zero());
                    out[hi..].fill(T::zero());
                    out[lo..hi].copy_from_slice(&src[lo + kj - pad..hi + kj - pad]);
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters column gradients back onto the image.
fn col2im<T: Scalar>(col: &[T], channels: usize, side: usize, k: usize, out: &mut [T]) {
    let pad = k / 2;
    let hw = side * side;
    out.fill(T::zero());
    for c in 0..channels {
        let plane = &mut out[c * hw..(c + 1) * hw];
        for ki in 0..k {
            for kj in 0..k {
                let row = &col[((c * k + ki) * k + kj) * hw..][..hw];
                for y in 0..side {
                    let sy = y + ki;
                    if sy < pad || sy - pad >= side {
                        continue;
                    }
                    let lo = pad.saturating_sub(kj);
                    let hi = (side + pad).saturating_sub(kj).min(side);
                    let dst = &mut plane[(sy - pad) * side..(sy - pad + 1) * side];
                    for x in lo..hi {
                        dst[x + kj - pad] += row[y * side + x];
                    }
                }
            }
        }
    }
}

/// Max-pooling with window == stride. Returns pooled values and the flat
/// input index each came from; ties keep the first index in row-major order.
fn max_pool<T: Scalar>(input: &[T], channels: usize, side: usize, p: usize) -> (Vec<T>, Vec<usize>) {
    let out_side = side / p;
    let mut values = Vec::with_capacity(channels * out_side * out_side);
    let mut argmax = Vec::with_capacity(values.capacity());
    for c in 0..channels {
        let base = c * side * side;
        for oy in 0..out_side {
            for ox in 0..out_side {
                let mut best_idx = base + oy * p * side + ox * p;
                let mut best = input[best_idx];
                for dy in 0..p {
                    for dx in 0..p {
                        let idx = base + (oy * p + dy) * side + ox * p + dx;
                        if input[idx] > best {
                            best = input[idx];
                            best_idx = idx;
                        }
                    }
                }
                values.push(best);
                argmax.push(best_idx);
            }
        }
    }
    (values, argmax)
}

struct ConvCache<T> {
    col: Vec<T>,
    /// post-ReLU activations before pooling
    activated: Vec<T>,
    argmax: Vec<usize>,
}

struct Trace<T> {
    convs: Vec<ConvCache<T>>,
    /// input to each dense layer
    dense_inputs: Vec<Vec<T>>,
    logits: Vec<T>,
}

fn check_input<T: Scalar>(config: &HeadConfig, input: &Tensor<T>) -> Result<()> {
    let expected = config.input_shape();
    if input.shape() != expected {
        return Err(Error::shape(format!("{expected:?}"), format!("{:?}", input.shape())));
    }
    Ok(())
}

fn run_forward<T: Scalar>(params: &ModelParams<T>, input: &Tensor<T>, keep: bool) -> Trace<T> {
    let cfg = params.config();
    let k = cfg.kernel;
    let p = cfg.pool_window;
    let mut side = cfg.spatial_side;
    let mut x = input.data().to_vec();
    let mut convs = Vec::with_capacity(if keep { 3 } else { 0 });

    for (layer, (cin, cout)) in cfg.conv_dims().into_iter().enumerate() {
        let hw = side * side;
        let rows = cin * k * k;
        let mut col = vec![T::zero(); rows * hw];
        im2col(&x, cin, side, k, &mut col);
        let bias = params.conv_bias(layer).data();
        let mut z: Vec<T> = bias.iter().flat_map(|&b| std::iter::repeat_n(b, hw)).collect();
        gemm(
            cout,
            rows,
            hw,
            params.conv_weight(layer).data(),
            Layout::Normal,
            &col,
            Layout::Normal,
            T::one(),
            &mut z,
        );
        z.iter_mut().for_each(|v| *v = relu(*v));
        let (pooled, argmax) = max_pool(&z, cout, side, p);
        if keep {
            convs.push(ConvCache {
                col,
                activated: z,
                argmax,
            });
        }
        x = pooled;
        side /= p;
    }

    let dims = cfg.dense_dims();
    let mut dense_inputs = Vec::with_capacity(if keep { dims.len() } else { 0 });
    for (layer, (din, dout)) in dims.into_iter().enumerate() {
        let w = params.dense_weight(layer).data();
        let b = params.dense_bias(layer).data();
        let mut y = b.to_vec();
        for (o, yo) in y.iter_mut().enumerate() {
            let row = &w[o * din..(o + 1) * din];
            *yo += row.iter().zip(&x).map(|(&a, &b)| a * b).sum::<T>();
        }
        if layer + 1 < dims.len() {
            y.iter_mut().for_each(|v| *v = relu(*v));
        }
        debug_assert_eq!(y.len(), dout);
        if keep {
            dense_inputs.push(std::mem::replace(&mut x, y));
        } else {
            x = y;
        }
    }

    Trace {
        convs,
        dense_inputs,
        logits: x,
    }
}

/// Raw pre-softmax scores.
pub fn logits<T: Scalar>(params: &ModelParams<T>, input: &Tensor<T>) -> Result<Vec<T>> {
    check_input(params.config(), input)?;
    Ok(run_forward(params, input, false).logits)
}

/// Class probabilities for one `N×side×side` input.
pub fn forward<T: Scalar>(params: &ModelParams<T>, input: &Tensor<T>) -> Result<Tensor<T>> {
    let z = logits(params, input)?;
    let n = z.len();
    Tensor::new(vec![n], softmax(&z))
}

/// Most probable class; ties go to the lower index.
pub fn predict<T: Scalar>(params: &ModelParams<T>, input: &Tensor<T>) -> Result<usize> {
    let z = logits(params, input)?;
    let mut best = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Backpropagates `dlogits` through one traced example, accumulating into `grads`.
fn backward<T: Scalar>(params: &ModelParams<T>, trace: &Trace<T>, dlogits: Vec<T>, grads: &mut GradientSet<T>) {
    let cfg = params.config();
    let dims = cfg.dense_dims();
    let mut delta = dlogits;
    for layer in (0..dims.len()).rev() {
        let (din, _) = dims[layer];
        let input = &trace.dense_inputs[layer];
        {
            let g = grads.tensors_mut();
            let gw = g[6 + 2 * layer].data_mut();
            for (o, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                let row = &mut gw[o * din..(o + 1) * din];
                row.iter_mut().zip(input).for_each(|(gw, &x)| *gw += d * x);
            }
            let gb = g[7 + 2 * layer].data_mut();
            gb.iter_mut().zip(&delta).for_each(|(gb, &d)| *gb += d);
        }
        let w = params.dense_weight(layer).data();
        let mut dx = vec![T::zero(); din];
        for (o, &d) in delta.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            let row = &w[o * din..(o + 1) * din];
            dx.iter_mut().zip(row).for_each(|(dx, &w)| *dx += d * w);
        }
        if layer > 0 {
            // input to this layer is the ReLU output of the previous one
            dx.iter_mut().zip(input).for_each(|(d, &a)| {
                if a <= T::zero() {
                    *d = T::zero()
                }
            });
        }
        delta = dx;
    }

    let k = cfg.kernel;
    let chain = cfg.spatial_chain();
    for (layer, (cin, cout)) in cfg.conv_dims().into_iter().enumerate().rev() {
        let cache = &trace.convs[layer];
        let side = chain[2 * layer];
        let hw = side * side;
        let rows = cin * k * k;
        let mut dz = vec![T::zero(); cout * hw];
        for (&idx, &d) in cache.argmax.iter().zip(&delta) {
            dz[idx] += d;
        }
        dz.iter_mut().zip(&cache.activated).for_each(|(d, &a)| {
            if a <= T::zero() {
                *d = T::zero()
            }
        });

        let g = grads.tensors_mut();
        gemm(
            cout,
            hw,
            rows,
            &dz,
            Layout::Normal,
            &cache.col,
            Layout::Transposed,
            T::one(),
            g[2 * layer].data_mut(),
        );
        let gb = g[2 * layer + 1].data_mut();
        for (c, gb) in gb.iter_mut().enumerate() {
            *gb += dz[c * hw..(c + 1) * hw].iter().copied().sum::<T>();
        }
        if layer == 0 {
            break;
        }
        let mut dcol = vec![T::zero(); rows * hw];
        gemm(
            rows,
            cout,
            hw,
            params.conv_weight(layer).data(),
            Layout::Transposed,
            &dz,
            Layout::Normal,
            T::zero(),
            &mut dcol,
        );
        let mut dx = vec![T::zero(); cin * hw];
        col2im(&dcol, cin, side, k, &mut dx);
        delta = dx;
    }
}

/// Mean cross-entropy over the batch and its gradient with respect to every
/// parameter tensor.
pub fn loss_and_gradients<T: Scalar>(
    params: &ModelParams<T>,
    inputs: &[&Tensor<T>],
    labels: &[usize],
) -> Result<(T, GradientSet<T>)> {
    if inputs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if inputs.len() != labels.len() {
        return Err(Error::LengthMismatch(inputs.len(), labels.len()));
    }
    let cfg = params.config();
    for (input, &label) in inputs.iter().zip(labels) {
        check_input(cfg, input)?;
        if label >= cfg.num_classes {
            return Err(Error::InvalidLabel {
                label,
                num_classes: cfg.num_classes,
            });
        }
    }

    let scale = T::one() / T::from_f64(inputs.len() as f64);
    let mut grads = GradientSet::zeros_like(params);
    let mut total = T::zero();
    for (input, &label) in inputs.iter().zip(labels) {
        let trace = run_forward(params, input, true);
        total += log_sum_exp(&trace.logits) - trace.logits[label];
        let mut dlogits = softmax(&trace.logits);
        dlogits[label] = dlogits[label] - T::one();
        dlogits.iter_mut().for_each(|d| *d = *d * scale);
        backward(params, &trace, dlogits, &mut grads);
    }
    Ok((total * scale, grads))
}
