//! Synthetic ground truth: Gaussian mixtures with exactly computable
//! posteriors, dataset generation, and the multiplicative noise corruptions
//! used by the robustness studies.
//!
//! The mixture replaces a trained probabilistic classifier as the source of
//! confidence values, so every generated confidence difference is an exact
//! posterior difference and estimator bias can be measured against the true
//! risk rather than a surrogate.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::loss::Label;
use crate::risk::{ConfDiffDataset, ConfDiffPair, LabeledExample, PcompDataset, PcompPair};

/// A two-class mixture of axis-aligned Gaussians.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianMixtureSpec {
    pub dim: usize,
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    pub cov_diag_pos: Vec<f64>,
    pub cov_diag_neg: Vec<f64>,
    pub prior_pos: f64,
}

impl GaussianMixtureSpec {
    pub fn new(
        mean_pos: Vec<f64>,
        mean_neg: Vec<f64>,
        cov_diag_pos: Vec<f64>,
        cov_diag_neg: Vec<f64>,
        prior_pos: f64,
    ) -> Result<Self> {
        let dim = mean_pos.len();
        if dim == 0 {
            return Err(Error::invalid("mixture dimension must be positive"));
        }
        if mean_neg.len() != dim || cov_diag_pos.len() != dim || cov_diag_neg.len() != dim {
            return Err(Error::invalid("mixture fields must share one dimension"));
        }
        if cov_diag_pos
            .iter()
            .chain(&cov_diag_neg)
            .any(|&v| !(v.is_finite() && v > 0.0))
        {
            return Err(Error::invalid("variances must be strictly positive"));
        }
        if !(prior_pos.is_finite() && prior_pos > 0.0 && prior_pos < 1.0) {
            return Err(Error::invalid(alloc::format!(
                "positive-class prior must lie strictly inside (0, 1), got {prior_pos}"
            )));
        }
        Ok(Self {
            dim,
            mean_pos,
            mean_neg,
            cov_diag_pos,
            cov_diag_neg,
            prior_pos,
        })
    }

    /// Two isotropic unit-variance Gaussians at `+center` and `-center`.
    pub fn symmetric(center: &[f64], prior_pos: f64) -> Result<Self> {
        let dim = center.len();
        Self::new(
            center.to_vec(),
            center.iter().map(|v| -v).collect(),
            alloc::vec![1.0; dim],
            alloc::vec![1.0; dim],
            prior_pos,
        )
    }

    fn log_density(&self, mean: &[f64], cov_diag: &[f64], x: &[f64]) -> f64 {
        const LN_TWO_PI: f64 = 1.8378770664093453;
        let mut quad = 0.0;
        let mut log_det = 0.0;
        for i in 0..self.dim {
            let d = x[i] - mean[i];
            quad += d * d / cov_diag[i];
            log_det += libm::log(cov_diag[i]);
        }
        -0.5 * (quad + log_det + self.dim as f64 * LN_TWO_PI)
    }

    fn sample_class<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Vec<f64> {
        let (mean, cov) = match label {
            Label::Pos => (&self.mean_pos, &self.cov_diag_pos),
            Label::Neg => (&self.mean_neg, &self.cov_diag_neg),
        };
        (0..self.dim)
            .map(|i| {
                let z: f64 = rng.sample(StandardNormal);
                mean[i] + libm::sqrt(cov[i]) * z
            })
            .collect()
    }

    fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Label) {
        let u: f64 = rng.random();
        let label = if u < self.prior_pos { Label::Pos } else { Label::Neg };
        (self.sample_class(label, rng), label)
    }
}

/// The exact positive-class posterior `p(+1 | x)` of the mixture, evaluated
/// through log densities so extreme points saturate at 0 or 1 instead of
/// producing 0/0.
pub fn posterior_positive(spec: &GaussianMixtureSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.dim {
        return Err(Error::invalid(alloc::format!(
            "point dimension {} does not match mixture dimension {}",
            x.len(),
            spec.dim
        )));
    }
    let log_pos = libm::log(spec.prior_pos) + spec.log_density(&spec.mean_pos, &spec.cov_diag_pos, x);
    let log_neg =
        libm::log(1.0 - spec.prior_pos) + spec.log_density(&spec.mean_neg, &spec.cov_diag_neg, x);
    // 1 / (1 + exp(log_neg - log_pos))
    let t = log_neg - log_pos;
    Ok(if t > 0.0 {
        let e = libm::exp(-t);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(t))
    })
}

/// Draws one labeled example from the mixture joint.
pub fn sample_labeled<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    rng: &mut R,
) -> LabeledExample {
    let (x, y) = spec.sample_labeled(rng);
    LabeledExample { x, y }
}

/// Draws two i.i.d. instances from the mixture marginal, discarding labels.
pub fn sample_unlabeled_pair<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let (x, _) = spec.sample_labeled(rng);
    let (x_prime, _) = spec.sample_labeled(rng);
    (x, x_prime)
}

/// Generates `n` unlabeled pairs with exact confidence differences
/// `c_i = p(+1 | x'_i) - p(+1 | x_i)`; the dataset carries the true prior.
pub fn make_confdiff_dataset<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    n: usize,
    rng: &mut R,
) -> Result<ConfDiffDataset> {
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, x_prime) = sample_unlabeled_pair(spec, rng);
        let c = posterior_positive(spec, &x_prime)? - posterior_positive(spec, &x)?;
        pairs.push(ConfDiffPair { x, x_prime, c });
    }
    ConfDiffDataset::new(pairs, spec.prior_pos)
}

/// Multiplicative noise on confidences and a scale factor on the prior.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    /// Scale applied to the class prior.
    pub prior_scale: f64,
    /// Standard deviation of the per-pair confidence scale, drawn from a
    /// normal distribution with mean 1.
    pub conf_noise_std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn clean(seed: u64) -> Self {
        Self { prior_scale: 1.0, conf_noise_std: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior_scale.is_finite() && self.prior_scale > 0.0) {
            return Err(Error::invalid("prior scale must be positive"));
        }
        if !(self.conf_noise_std.is_finite() && self.conf_noise_std >= 0.0) {
            return Err(Error::invalid("confidence noise std must be non-negative"));
        }
        Ok(())
    }
}

/// Scales every confidence by an independent draw from `N(1, sigma^2)` and
/// clips back to `[-1, 1]`. A zero noise std returns the dataset unchanged.
pub fn corrupt_confidences<R: Rng + ?Sized>(
    data: &ConfDiffDataset,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<ConfDiffDataset> {
    noise.validate()?;
    if noise.conf_noise_std == 0.0 {
        return Ok(data.clone());
    }
    let pairs = data
        .pairs
        .iter()
        .map(|p| {
            let z: f64 = rng.sample(StandardNormal);
            let scale = 1.0 + noise.conf_noise_std * z;
            ConfDiffPair {
                x: p.x.clone(),
                x_prime: p.x_prime.clone(),
                c: (scale * p.c).clamp(-1.0, 1.0),
            }
        })
        .collect();
    ConfDiffDataset::new(pairs, data.class_prior)
}

/// Scales the class prior and clamps the result away from the degenerate
/// endpoints, to `[1e-3, 1 - 1e-3]`.
pub fn corrupt_prior(prior: f64, noise: &NoiseSpec) -> Result<f64> {
    if !(prior.is_finite() && prior > 0.0 && prior < 1.0) {
        return Err(Error::invalid("prior must lie strictly inside (0, 1)"));
    }
    noise.validate()?;
    Ok((noise.prior_scale * prior).clamp(1e-3, 1.0 - 1e-3))
}

/// Draws `m` i.i.d. labeled examples from the mixture joint.
pub fn make_labeled_dataset<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    m: usize,
    rng: &mut R,
) -> Result<Vec<LabeledExample>> {
    if m == 0 {
        return Err(Error::invalid("example count must be at least 1"));
    }
    Ok((0..m).map(|_| sample_labeled(spec, rng)).collect())
}

/// Generates `n` pairwise-comparison pairs by sampling labeled pairs and
/// reversing the ones whose labels come out as (-1, +1); pairs from
/// (+1, -1), (+1, +1) and (-1, -1) are kept as drawn. Labels are discarded.
pub fn make_pcomp_dataset<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    n: usize,
    rng: &mut R,
) -> Result<PcompDataset> {
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = spec.sample_labeled(rng);
        let (x_prime, y_prime) = spec.sample_labeled(rng);
        let pair = if y == Label::Neg && y_prime == Label::Pos {
            PcompPair { x: x_prime, x_prime: x }
        } else {
            PcompPair { x, x_prime }
        };
        pairs.push(pair);
    }
    Ok(PcompDataset { pairs, class_prior: spec.prior_pos })
}

/// Monte-Carlo accuracy of the posterior-threshold classifier
/// `sign(p(+1 | x) - 1/2)` over `draws` labeled samples, with its standard
/// error. Verification callers use at least 10^6 draws.
pub fn bayes_accuracy<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::invalid("draw count must be at least 1"));
    }
    let mut correct = 0usize;
    for _ in 0..draws {
        let (x, y) = spec.sample_labeled(rng);
        let p = posterior_positive(spec, &x)?;
        if Label::from_score(p - 0.5) == y {
            correct += 1;
        }
    }
    let acc = correct as f64 / draws as f64;
    let stderr = libm::sqrt(acc * (1.0 - acc) / draws as f64);
    Ok((acc, stderr))
}
