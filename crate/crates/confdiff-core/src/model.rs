//! Scoring functions: a linear model and a ReLU MLP with hand-written
//! forward and backward passes over a flat parameter vector.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelKind {
    Linear,
    Mlp,
}

/// Architecture plus the seed its parameters are initialized from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_dim: usize,
    /// Hidden layer widths; empty for the linear model.
    pub hidden_widths: Vec<usize>,
    pub init_seed: u64,
}

impl ModelSpec {
    pub fn linear(input_dim: usize, init_seed: u64) -> Self {
        Self { kind: ModelKind::Linear, input_dim, hidden_widths: Vec::new(), init_seed }
    }

    pub fn mlp(input_dim: usize, hidden_widths: Vec<usize>, init_seed: u64) -> Self {
        Self { kind: ModelKind::Mlp, input_dim, hidden_widths, init_seed }
    }

    /// The default MLP: three hidden layers of width 64.
    pub fn default_mlp(input_dim: usize, init_seed: u64) -> Self {
        Self::mlp(input_dim, alloc::vec![64, 64, 64], init_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        match self.kind {
            ModelKind::Linear => {
                if !self.hidden_widths.is_empty() {
                    return Err(Error::invalid("linear model takes no hidden layers"));
                }
            }
            ModelKind::Mlp => {
                if self.hidden_widths.is_empty() {
                    return Err(Error::invalid("mlp needs at least one hidden layer"));
                }
                if self.hidden_widths.contains(&0) {
                    return Err(Error::invalid("hidden widths must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Layer sizes from input to the single output.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_widths.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_widths);
        dims.push(1);
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

/// A flat parameter vector plus the layer sizes that give it shape. Each
/// layer stores its weight matrix row-major (one row per output unit)
/// followed by its bias vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    dims: Vec<usize>,
    theta: Vec<f64>,
}

impl ModelParams {
    /// Rebuilds parameters from checkpoint parts.
    pub fn from_parts(dims: Vec<usize>, theta: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || *dims.last().unwrap() != 1 || dims.contains(&0) {
            return Err(Error::invalid("layer dims must run from input to one output"));
        }
        let expected: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if theta.len() != expected {
            return Err(Error::invalid(alloc::format!(
                "parameter count {} does not match dims (expected {expected})",
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(Self { dims, theta })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    /// Offset of layer `l`'s weight block in the flat vector.
    fn layer_offset(&self, l: usize) -> usize {
        self.dims
            .windows(2)
            .take(l)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
        let off = self.layer_offset(l);
        let weights = &self.theta[off..off + fan_in * fan_out];
        let biases = &self.theta[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
        (weights, biases)
    }
}

/// Initializes parameters for the spec: weights uniform in
/// `[-sqrt(6 / (fan_in + fan_out)), +sqrt(6 / (fan_in + fan_out)))`, biases
/// zero. Deterministic given the generator state.
pub fn init_model<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<ModelParams> {
    spec.validate()?;
    let dims = spec.layer_dims();
    let mut theta = Vec::with_capacity(spec.param_count());
    for w in dims.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        for _ in 0..fan_in * fan_out {
            let u: f64 = rng.random();
            theta.push(bound * (2.0 * u - 1.0));
        }
        theta.extend(core::iter::repeat_n(0.0, fan_out));
    }
    Ok(ModelParams { dims, theta })
}

/// Post-activation values retained by [`forward`] for the backward pass.
/// `activations[0]` is the input; subsequent entries are hidden activations.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

fn affine(weights: &[f64], biases: &[f64], input: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for (j, &b) in biases.iter().enumerate() {
        let row = &weights[j * input.len()..(j + 1) * input.len()];
        let mut acc = b;
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        out.push(acc);
    }
}

/// Scores `x` and retains per-layer activations for [`backward`].
pub fn forward(params: &ModelParams, x: &[f64]) -> Result<(f64, ForwardCache)> {
    if x.len() != params.input_dim() {
        return Err(Error::invalid(alloc::format!(
            "input dimension {} does not match model dimension {}",
            x.len(),
            params.input_dim()
        )));
    }
    let layers = params.layer_count();
    let mut activations = Vec::with_capacity(layers);
    activations.push(x.to_vec());
    let mut out = Vec::new();
    for l in 0..layers {
        let (weights, biases) = params.layer(l);
        affine(weights, biases, activations.last().unwrap(), &mut out);
        if l + 1 < layers {
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            activations.push(core::mem::take(&mut out));
        }
    }
    debug_assert_eq!(out.len(), 1);
    Ok((out[0], ForwardCache { activations }))
}

/// Scores `x` without building a cache.
pub fn score(params: &ModelParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.input_dim() {
        return Err(Error::invalid(alloc::format!(
            "input dimension {} does not match model dimension {}",
            x.len(),
            params.input_dim()
        )));
    }
    let layers = params.layer_count();
    let mut current = x.to_vec();
    let mut next = Vec::new();
    for l in 0..layers {
        let (weights, biases) = params.layer(l);
        affine(weights, biases, &current, &mut next);
        if l + 1 < layers {
            for v in next.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        core::mem::swap(&mut current, &mut next);
    }
    Ok(current[0])
}

/// Gradient of `upstream * score` with respect to every parameter, as a
/// fresh flat vector. The ReLU subgradient at 0 is 0.
pub fn backward(params: &ModelParams, cache: &ForwardCache, upstream: f64) -> Result<Vec<f64>> {
    let mut grad = alloc::vec![0.0; params.len()];
    accumulate_grad(params, cache, upstream, &mut grad)?;
    Ok(grad)
}

/// Adds the gradient of `upstream * score` into `grad`; the batched path
/// used by training so one flat buffer serves a whole minibatch.
pub fn accumulate_grad(
    params: &ModelParams,
    cache: &ForwardCache,
    upstream: f64,
    grad: &mut [f64],
) -> Result<()> {
    let layers = params.layer_count();
    if cache.activations.len() != layers
        || cache
            .activations
            .iter()
            .enumerate()
            .any(|(l, a)| a.len() != params.dims[l])
    {
        return Err(Error::InvalidState(alloc::format!(
            "forward cache does not match model shape {:?}",
            params.dims
        )));
    }
    if grad.len() != params.len() {
        return Err(Error::InvalidState(alloc::format!(
            "gradient buffer length {} does not match parameter count {}",
            grad.len(),
            params.len()
        )));
    }
    // Walk layers from the output back, carrying the delta of each layer's
    // outputs. The output layer has a single unit with delta = upstream.
    let mut delta = alloc::vec![upstream];
    let mut next_delta = Vec::new();
    for l in (0..layers).rev() {
        let (fan_in, fan_out) = (params.dims[l], params.dims[l + 1]);
        let off = params.layer_offset(l);
        let input = &cache.activations[l];
        let (weights, _) = params.layer(l);
        {
            let weight_grad = &mut grad[off..off + fan_in * fan_out];
            for (j, &d) in delta.iter().enumerate() {
                let row = &mut weight_grad[j * fan_in..(j + 1) * fan_in];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += d * x;
                }
            }
        }
        let bias_grad = &mut grad[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
        for (g, &d) in bias_grad.iter_mut().zip(&delta) {
            *g += d;
        }
        if l > 0 {
            next_delta.clear();
            next_delta.resize(fan_in, 0.0);
            for (j, &d) in delta.iter().enumerate() {
                let row = &weights[j * fan_in..(j + 1) * fan_in];
                for (nd, w) in next_delta.iter_mut().zip(row) {
                    *nd += d * w;
                }
            }
            // Activations are post-ReLU, so a zero activation means the unit
            // was clamped (or exactly at the kink, where the subgradient is 0).
            for (nd, &a) in next_delta.iter_mut().zip(input) {
                if a <= 0.0 {
                    *nd = 0.0;
                }
            }
            core::mem::swap(&mut delta, &mut next_delta);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{domain, stream_rng};

    #[test]
    fn linear_shape_and_zero_biases() {
        let spec = ModelSpec::linear(3, 0);
        let params = init_model(&spec, &mut stream_rng(0, domain::MODEL_INIT, 0)).unwrap();
        assert_eq!(params.len(), 4);
        assert_eq!(params.values()[3], 0.0);
    }

    #[test]
    fn init_is_deterministic() {
        let spec = ModelSpec::default_mlp(2, 7);
        let a = init_model(&spec, &mut stream_rng(7, domain::MODEL_INIT, 0)).unwrap();
        let b = init_model(&spec, &mut stream_rng(7, domain::MODEL_INIT, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_mlp_param_count_follows_shapes() {
        // 2*64+64 + 64*64+64 + 64*64+64 + 64*1+1
        let spec = ModelSpec::default_mlp(2, 0);
        let expected = (2 * 64 + 64) + (64 * 64 + 64) + (64 * 64 + 64) + (64 + 1);
        assert_eq!(spec.param_count(), expected);
        let params = init_model(&spec, &mut stream_rng(0, domain::MODEL_INIT, 0)).unwrap();
        assert_eq!(params.len(), expected);
    }

    #[test]
    fn zero_linear_model_scores_zero() {
        let params = ModelParams::from_parts(vec![3, 1], vec![0.0; 4]).unwrap();
        assert_eq!(score(&params, &[1.0, -2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn zero_mlp_scores_final_bias() {
        let spec = ModelSpec::mlp(2, vec![4], 0);
        let mut theta = vec![0.0; spec.param_count()];
        let last = theta.len() - 1;
        theta[last] = 0.25; // output bias
        let params = ModelParams::from_parts(spec.layer_dims(), theta).unwrap();
        assert_eq!(score(&params, &[3.0, -1.0]).unwrap(), 0.25);
    }

    #[test]
    fn forward_and_score_agree() {
        let spec = ModelSpec::mlp(3, vec![5, 4], 11);
        let params = init_model(&spec, &mut stream_rng(11, domain::MODEL_INIT, 0)).unwrap();
        let x = [0.3, -1.2, 0.8];
        let (s, _) = forward(&params, &x).unwrap();
        assert_eq!(s, score(&params, &x).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = ModelSpec::linear(3, 0);
        let params = init_model(&spec, &mut stream_rng(0, domain::MODEL_INIT, 0)).unwrap();
        assert!(forward(&params, &[1.0]).is_err());
        assert!(score(&params, &[1.0]).is_err());
    }

    #[test]
    fn linear_backward_closed_form() {
        let params = ModelParams::from_parts(vec![2, 1], vec![0.5, -0.25, 0.1]).unwrap();
        let x = [2.0, 3.0];
        let (_, cache) = forward(&params, &x).unwrap();
        let grad = backward(&params, &cache, 1.5).unwrap();
        assert_eq!(grad, vec![1.5 * 2.0, 1.5 * 3.0, 1.5]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let spec = ModelSpec::mlp(2, vec![4, 3], 5);
        let params = init_model(&spec, &mut stream_rng(5, domain::MODEL_INIT, 0)).unwrap();
        let (_, cache) = forward(&params, &[1.0, -1.0]).unwrap();
        let grad = backward(&params, &cache, 0.0).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn stale_cache_rejected() {
        let spec = ModelSpec::mlp(2, vec![4], 5);
        let params = init_model(&spec, &mut stream_rng(5, domain::MODEL_INIT, 0)).unwrap();
        let (_, cache) = forward(&params, &[1.0, -1.0]).unwrap();
        let other = init_model(
            &ModelSpec::mlp(2, vec![6], 5),
            &mut stream_rng(5, domain::MODEL_INIT, 1),
        )
        .unwrap();
        assert!(matches!(
            backward(&other, &cache, 1.0),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn output_layer_scaling_scales_score() {
        let spec = ModelSpec::mlp(2, vec![4], 3);
        let mut params = init_model(&spec, &mut stream_rng(3, domain::MODEL_INIT, 0)).unwrap();
        let x = [0.7, -0.2];
        let before = score(&params, &x).unwrap();
        let off = params.layer_offset(1);
        for v in &mut params.values_mut()[off..] {
            *v *= 3.0;
        }
        let after = score(&params, &x).unwrap();
        assert!((after - 3.0 * before).abs() < 1e-12 * before.abs().max(1.0));
    }
}
