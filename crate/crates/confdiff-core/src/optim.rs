//! Parameter update rules: plain SGD and bias-corrected Adam, both with
//! weight decay added to the gradient before the update.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Update rule plus its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            learning_rate,
            weight_decay: 0.0,
            beta1: 0.0,
            beta2: 0.0,
            epsilon: 1e-8,
        }
    }

    /// Adam with the standard moment constants.
    pub fn adam(learning_rate: f64, weight_decay: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::invalid("learning rate must be non-negative"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::invalid("weight decay must be non-negative"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::invalid("moment constants must lie in [0, 1)"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Per-run optimizer state: the step count and, for Adam, the two moment
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    step: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(config: &OptimizerConfig, param_count: usize) -> Self {
        let moments = match config.kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam => param_count,
        };
        Self {
            step: 0,
            first_moment: alloc::vec![0.0; moments],
            second_moment: alloc::vec![0.0; moments],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Test hook: a state positioned mid-run with given moments.
    pub fn with_moments(step: u64, first_moment: Vec<f64>, second_moment: Vec<f64>) -> Self {
        Self { step, first_moment, second_moment }
    }
}

/// Applies one update in place. Deterministic; with zero gradients and zero
/// weight decay the parameters are unchanged.
pub fn step(
    config: &OptimizerConfig,
    state: &mut OptimizerState,
    params: &mut [f64],
    grads: &[f64],
) -> Result<()> {
    config.validate()?;
    if grads.len() != params.len() {
        return Err(Error::invalid(alloc::format!(
            "gradient length {} does not match parameter count {}",
            grads.len(),
            params.len()
        )));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::invalid("gradient entries must be finite"));
    }
    state.step += 1;
    match config.kind {
        OptimizerKind::Sgd => {
            for (p, &g) in params.iter_mut().zip(grads) {
                *p -= config.learning_rate * (g + config.weight_decay * *p);
            }
        }
        OptimizerKind::Adam => {
            if state.first_moment.len() != params.len() {
                return Err(Error::invalid("moment vectors do not match parameter count"));
            }
            let t = state.step as f64;
            let bias1 = 1.0 - libm::pow(config.beta1, t);
            let bias2 = 1.0 - libm::pow(config.beta2, t);
            for i in 0..params.len() {
                let g = grads[i] + config.weight_decay * params[i];
                let m = &mut state.first_moment[i];
                *m = config.beta1 * *m + (1.0 - config.beta1) * g;
                let v = &mut state.second_moment[i];
                *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                params[i] -= config.learning_rate * m_hat / (libm::sqrt(v_hat) + config.epsilon);
            }
        }
    }
    Ok(())
}
