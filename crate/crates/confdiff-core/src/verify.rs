//! Monte-Carlo verification harness: turns the estimator's theoretical
//! properties (unbiasedness for every pair weight, the expectation identities
//! behind it, variance minimality at equal weights, convergence with sample
//! size, and robustness to corrupted supervision) into numerical pass/fail
//! quantities measured against the exactly-known synthetic ground truth.
//!
//! Suites are addressed by a root seed; every trial, run, and evaluation
//! draws from its own derived stream, so results are reproducible and trials
//! are independent.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::{self, CorrectionKind, Label, LossKind};
use crate::model::{self, ModelParams};
use crate::risk::{self, ConfDiffDataset, PairScores};
use crate::stream::{derive_seed, domain, stream_rng};
use crate::synth::{self, GaussianMixtureSpec, NoiseSpec};
use crate::train::{self, TrainConfig, TrainData};

/// Labeled test set size used inside studies for per-epoch accuracy records.
const STUDY_TEST_SIZE: usize = 2000;

/// One Monte-Carlo comparison of an estimate against a reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MCReport {
    pub estimate: f64,
    /// Standard error of `estimate - reference` (the reference's own error
    /// is included when the reference is itself estimated).
    pub stderr: f64,
    pub reference: f64,
    pub z_score: f64,
    pub trials: usize,
}

impl MCReport {
    fn new(estimate: f64, stderr: f64, reference: f64, trials: usize) -> Self {
        let z_score = if stderr > 0.0 {
            (estimate - reference) / stderr
        } else if estimate == reference {
            0.0
        } else {
            f64::INFINITY * (estimate - reference).signum()
        };
        Self { estimate, stderr, reference, z_score, trials }
    }
}

/// Welford accumulator for mean, sample variance, and standard error.
#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    fn stderr(&self) -> f64 {
        libm::sqrt(self.variance() / self.count as f64)
    }
}

fn pair_scores(params: &ModelParams, data: &ConfDiffDataset) -> Result<Vec<PairScores>> {
    data.pairs
        .iter()
        .map(|p| {
            Ok(PairScores {
                x: model::score(params, &p.x)?,
                x_prime: model::score(params, &p.x_prime)?,
            })
        })
        .collect()
}

/// Which estimator a Monte-Carlo check evaluates on each trial dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorChoice {
    Unbiased,
    Weighted(f64),
    Corrected(CorrectionKind),
}

impl EstimatorChoice {
    fn evaluate(
        &self,
        data: &ConfDiffDataset,
        scores: &[PairScores],
        kind: LossKind,
    ) -> Result<f64> {
        match *self {
            EstimatorChoice::Unbiased => risk::confdiff_unbiased_risk(data, scores, kind),
            EstimatorChoice::Weighted(alpha) => {
                risk::confdiff_weighted_risk(data, scores, kind, alpha)
            }
            EstimatorChoice::Corrected(correction) => {
                risk::confdiff_corrected_risk(data, scores, kind, correction)
            }
        }
    }
}

/// The classification risk of fixed parameters, estimated over `draws`
/// fresh labeled samples. Verification callers use at least 10^6 draws.
/// Returns the estimate and its standard error.
pub fn true_risk<R: rand::Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    params: &ModelParams,
    kind: LossKind,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::invalid("draw count must be at least 1"));
    }
    let mut stats = RunningStats::default();
    for _ in 0..draws {
        let example = synth::sample_labeled(spec, rng);
        let score = model::score(params, &example.x)?;
        stats.push(loss::loss(kind, score, example.y)?);
    }
    Ok((stats.mean(), stats.stderr()))
}

/// Mean of a confidence-difference estimator on fixed parameters over
/// `trials` independently generated datasets of `n` pairs, compared against
/// [`true_risk`] on 10^6 labeled draws.
pub fn mc_estimator_mean(
    spec: &GaussianMixtureSpec,
    params: &ModelParams,
    kind: LossKind,
    choice: EstimatorChoice,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<MCReport> {
    if trials < 100 {
        return Err(Error::invalid("estimator-mean checks need at least 100 trials"));
    }
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let (reference, reference_se) = true_risk(
        spec,
        params,
        kind,
        1_000_000,
        &mut stream_rng(seed, domain::EVAL, 0),
    )?;
    let mut stats = RunningStats::default();
    for t in 0..trials {
        let mut rng = stream_rng(seed, domain::TRIAL, t as u32);
        let data = synth::make_confdiff_dataset(spec, n, &mut rng)?;
        let scores = pair_scores(params, &data)?;
        stats.push(choice.evaluate(&data, &scores, kind)?);
    }
    let stderr = libm::sqrt(stats.stderr() * stats.stderr() + reference_se * reference_se);
    Ok(MCReport::new(stats.mean(), stderr, reference, trials))
}

/// The four expectation identities that make the pair estimator unbiased:
/// each coefficient-weighted loss over pairs equals the matching
/// prior-weighted class-conditional loss. Left sides are estimated from
/// generated pairs, right sides from labeled draws kept when the label
/// matches (rejection on labels). Reports come back in the order
/// (first instance, +1), (first instance, -1), (second instance, +1),
/// (second instance, -1).
pub fn check_lemma_identities(
    spec: &GaussianMixtureSpec,
    params: &ModelParams,
    kind: LossKind,
    trials: usize,
    n: usize,
    seed: u64,
) -> Result<[MCReport; 4]> {
    if trials < 100 {
        return Err(Error::invalid("identity checks need at least 100 trials"));
    }
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let prior = spec.prior_pos;
    let neg_prior = 1.0 - prior;

    // Left sides: one shared pass over pair trials accumulates all four
    // integrands.
    let lhs_seed = derive_seed(seed, domain::TRIAL, 0);
    let mut lhs = [RunningStats::default(); 4];
    for t in 0..trials {
        let mut rng = stream_rng(lhs_seed, domain::TRIAL, t as u32);
        let mut trial = [RunningStats::default(); 4];
        for _ in 0..n {
            let (x, x_prime) = synth::sample_unlabeled_pair(spec, &mut rng);
            let c = synth::posterior_positive(spec, &x_prime)?
                - synth::posterior_positive(spec, &x)?;
            let sx = model::score(params, &x)?;
            let sxp = model::score(params, &x_prime)?;
            trial[0].push((prior - c) * loss::loss(kind, sx, Label::Pos)?);
            trial[1].push((neg_prior + c) * loss::loss(kind, sx, Label::Neg)?);
            trial[2].push((prior + c) * loss::loss(kind, sxp, Label::Pos)?);
            trial[3].push((neg_prior - c) * loss::loss(kind, sxp, Label::Neg)?);
        }
        for (acc, t) in lhs.iter_mut().zip(&trial) {
            acc.push(t.mean());
        }
    }

    // Right sides: prior-weighted class-conditional means from labeled
    // draws, rejecting examples of the other class.
    let sides = [
        (Label::Pos, prior),
        (Label::Neg, neg_prior),
        (Label::Pos, prior),
        (Label::Neg, neg_prior),
    ];
    let mut reports = [MCReport::new(0.0, 0.0, 0.0, trials); 4];
    for (k, (target, weight)) in sides.iter().enumerate() {
        let rhs_seed = derive_seed(seed, domain::TRIAL, 1 + k as u32);
        let mut rhs = RunningStats::default();
        for t in 0..trials {
            let mut rng = stream_rng(rhs_seed, domain::TRIAL, t as u32);
            let mut trial = RunningStats::default();
            while trial.count < n as u64 {
                let example = synth::sample_labeled(spec, &mut rng);
                if example.y != *target {
                    continue;
                }
                let s = model::score(params, &example.x)?;
                trial.push(loss::loss(kind, s, *target)?);
            }
            rhs.push(weight * trial.mean());
        }
        let stderr = libm::sqrt(
            lhs[k].stderr() * lhs[k].stderr() + rhs.stderr() * rhs.stderr(),
        );
        reports[k] = MCReport::new(lhs[k].mean(), stderr, rhs.mean(), trials);
    }
    Ok(reports)
}

/// Sample variances of the weighted estimator over a grid of pair weights,
/// under common random numbers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceProfile {
    pub alphas: Vec<f64>,
    /// Sample variance of the estimator at each weight.
    pub variances: Vec<f64>,
    /// Mean of the estimator at each weight (constant over the grid in
    /// expectation).
    pub means: Vec<f64>,
    /// Leading coefficient of the least-squares fit
    /// `variance ~ coeff * (alpha - 1/2)^2 + const`; non-negative when the
    /// equal-weight minimum holds.
    pub quadratic_coefficient: f64,
}

/// Evaluates the weighted estimator on `trials` datasets for every weight in
/// `alpha_grid`, reusing the same datasets across weights.
///
/// Trials come in swap pairs: each sampled dataset is also evaluated with
/// its pair roles exchanged, which distributes identically. The swapped copy
/// evaluates at weight `alpha` to the original's value at `1 - alpha`, so the
/// profile's symmetry around 1/2 and its minimum at 1/2 hold up to rounding
/// rather than up to sampling noise. `trials` counts evaluated datasets and
/// must be even.
pub fn variance_profile(
    spec: &GaussianMixtureSpec,
    params: &ModelParams,
    kind: LossKind,
    alpha_grid: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<VarianceProfile> {
    if !alpha_grid.contains(&0.5) {
        return Err(Error::invalid("alpha grid must contain 0.5"));
    }
    if alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::invalid("alpha grid entries must lie in [0, 1]"));
    }
    if trials < 1000 || !trials.is_multiple_of(2) {
        return Err(Error::invalid("variance profiles need an even trial count >= 1000"));
    }
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let mut stats = alloc::vec![RunningStats::default(); alpha_grid.len()];
    for t in 0..trials / 2 {
        let mut rng = stream_rng(seed, domain::TRIAL, t as u32);
        let data = synth::make_confdiff_dataset(spec, n, &mut rng)?;
        let scores = pair_scores(params, &data)?;
        let swapped = ConfDiffDataset::new(
            data.pairs.iter().map(|p| p.swapped()).collect(),
            data.class_prior,
        )?;
        let swapped_scores: Vec<PairScores> = scores
            .iter()
            .map(|s| PairScores { x: s.x_prime, x_prime: s.x })
            .collect();
        for (stat, &alpha) in stats.iter_mut().zip(alpha_grid) {
            stat.push(risk::confdiff_weighted_risk(&data, &scores, kind, alpha)?);
            stat.push(risk::confdiff_weighted_risk(
                &swapped,
                &swapped_scores,
                kind,
                alpha,
            )?);
        }
    }
    let variances: Vec<f64> = stats.iter().map(|s| s.variance()).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.mean()).collect();

    // Least-squares fit of variance against (alpha - 1/2)^2.
    let mut u_stats = RunningStats::default();
    let mut v_stats = RunningStats::default();
    for (&alpha, &v) in alpha_grid.iter().zip(&variances) {
        u_stats.push((alpha - 0.5) * (alpha - 0.5));
        v_stats.push(v);
    }
    let mut cov = 0.0;
    for (&alpha, &v) in alpha_grid.iter().zip(&variances) {
        let u = (alpha - 0.5) * (alpha - 0.5);
        cov += (u - u_stats.mean()) * (v - v_stats.mean());
    }
    let quadratic_coefficient = if u_stats.variance() > 0.0 {
        cov / (u_stats.m2)
    } else {
        0.0
    };

    Ok(VarianceProfile {
        alphas: alpha_grid.to_vec(),
        variances,
        means,
        quadratic_coefficient,
    })
}

/// Mean excess zero-one risk per training-set size.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergencePoint {
    pub pairs: usize,
    pub mean_excess_risk: f64,
    pub excess_risks: Vec<f64>,
}

/// Excess-risk decay over a grid of training-set sizes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceStudy {
    pub points: Vec<ConvergencePoint>,
    /// Slope of `ln(mean excess risk)` against `ln(n)`.
    pub log_log_slope: f64,
}

/// Trains on fresh datasets at every size in `n_grid` across `seeds`
/// repetitions and measures each trained model's excess zero-one risk over
/// the posterior-threshold rule.
///
/// The excess is a paired comparison: the trained model and the threshold
/// rule are evaluated on the same `eval_draws` labeled samples, so the
/// difference carries only disagreement noise and stays positive at sizes
/// where independent estimates would drown in Monte-Carlo error.
pub fn convergence_study(
    spec: &GaussianMixtureSpec,
    n_grid: &[usize],
    base: &TrainConfig,
    seeds: usize,
    eval_draws: usize,
) -> Result<ConvergenceStudy> {
    if n_grid.len() < 3 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("size grid must be strictly increasing with >= 3 points"));
    }
    if *n_grid.last().unwrap() < 16 * n_grid[0] {
        return Err(Error::invalid("size grid must span at least a factor of 16"));
    }
    if seeds == 0 || eval_draws == 0 {
        return Err(Error::invalid("seed and draw counts must be at least 1"));
    }
    let test = synth::make_labeled_dataset(
        spec,
        STUDY_TEST_SIZE,
        &mut stream_rng(base.seed, domain::EVAL, u32::MAX),
    )?;

    let mut points = Vec::with_capacity(n_grid.len());
    for (ni, &n) in n_grid.iter().enumerate() {
        let mut excess_risks = Vec::with_capacity(seeds);
        for s in 0..seeds {
            let run = (ni * seeds + s) as u32;
            let data = synth::make_confdiff_dataset(
                spec,
                n,
                &mut stream_rng(base.seed, domain::DATASET, run),
            )?;
            let mut config = base.clone();
            config.seed = derive_seed(base.seed, domain::RUN, run);
            config.model.init_seed = derive_seed(base.seed, domain::MODEL_INIT, run);
            let outcome = train::train(&TrainData::ConfDiff(data), &test, &config)?;
            let mut eval_rng = stream_rng(base.seed, domain::EVAL, run);
            let mut excess = RunningStats::default();
            for _ in 0..eval_draws {
                let example = synth::sample_labeled(spec, &mut eval_rng);
                let model_wrong =
                    Label::from_score(model::score(&outcome.params, &example.x)?) != example.y;
                let threshold_wrong = Label::from_score(
                    synth::posterior_positive(spec, &example.x)? - 0.5,
                ) != example.y;
                excess.push(f64::from(u8::from(model_wrong)) - f64::from(u8::from(threshold_wrong)));
            }
            excess_risks.push(excess.mean());
        }
        let mean = excess_risks.iter().sum::<f64>() / seeds as f64;
        points.push(ConvergencePoint { pairs: n, mean_excess_risk: mean, excess_risks });
    }

    // Log-log slope by least squares; requires positive mean excesses.
    let mut x_stats = RunningStats::default();
    let mut y_stats = RunningStats::default();
    for p in &points {
        if p.mean_excess_risk <= 0.0 {
            return Err(Error::InvalidState(alloc::format!(
                "mean excess risk at n = {} is not positive; cannot fit a log-log slope",
                p.pairs
            )));
        }
        x_stats.push(libm::log(p.pairs as f64));
        y_stats.push(libm::log(p.mean_excess_risk));
    }
    let mut cov = 0.0;
    for p in &points {
        cov += (libm::log(p.pairs as f64) - x_stats.mean())
            * (libm::log(p.mean_excess_risk) - y_stats.mean());
    }
    let log_log_slope = cov / x_stats.m2;

    Ok(ConvergenceStudy { points, log_log_slope })
}

/// Accuracy and confidence-error summary of one noise-grid cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobustnessCell {
    pub prior_scale: f64,
    pub conf_noise_std: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Mean absolute difference between corrupted and clean confidences.
    pub mean_abs_confidence_error: f64,
    pub accuracies: Vec<f64>,
}

/// Accuracies over a grid of prior-scale and confidence-noise settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobustnessStudy {
    pub cells: Vec<RobustnessCell>,
}

/// Trains the base configuration on corrupted copies of per-seed datasets
/// for every `(prior_scale, conf_noise_std)` cell. The same per-seed dataset
/// and run seed are reused across cells, so the clean cell `(1, 0)`
/// reproduces plain training on the uncorrupted data exactly.
pub fn robustness_study(
    spec: &GaussianMixtureSpec,
    prior_scales: &[f64],
    conf_noise_stds: &[f64],
    base: &TrainConfig,
    train_pairs: usize,
    seeds: usize,
) -> Result<RobustnessStudy> {
    if prior_scales.is_empty() || conf_noise_stds.is_empty() {
        return Err(Error::invalid("noise grids must be nonempty"));
    }
    if !(prior_scales.contains(&1.0) && conf_noise_stds.contains(&0.0)) {
        return Err(Error::invalid("noise grid must include the clean point (1, 0)"));
    }
    if train_pairs == 0 || seeds == 0 {
        return Err(Error::invalid("pair and seed counts must be at least 1"));
    }
    let test = synth::make_labeled_dataset(
        spec,
        STUDY_TEST_SIZE,
        &mut stream_rng(base.seed, domain::EVAL, u32::MAX),
    )?;
    let datasets: Vec<ConfDiffDataset> = (0..seeds)
        .map(|s| {
            synth::make_confdiff_dataset(
                spec,
                train_pairs,
                &mut stream_rng(base.seed, domain::DATASET, s as u32),
            )
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(prior_scales.len() * conf_noise_stds.len());
    for (ei, &prior_scale) in prior_scales.iter().enumerate() {
        for (si, &conf_noise_std) in conf_noise_stds.iter().enumerate() {
            let cell = (ei * conf_noise_stds.len() + si) as u32;
            let noise = NoiseSpec {
                prior_scale,
                conf_noise_std,
                seed: derive_seed(base.seed, domain::NOISE, cell),
            };
            let mut acc_stats = RunningStats::default();
            let mut accuracies = Vec::with_capacity(seeds);
            let mut err_stats = RunningStats::default();
            for (s, clean) in datasets.iter().enumerate() {
                let corrupted = synth::corrupt_confidences(
                    clean,
                    &noise,
                    &mut stream_rng(noise.seed, domain::NOISE, s as u32),
                )?;
                for (a, b) in corrupted.pairs.iter().zip(&clean.pairs) {
                    err_stats.push((a.c - b.c).abs());
                }
                let corrupted_prior = synth::corrupt_prior(spec.prior_pos, &noise)?;
                let data = ConfDiffDataset::new(corrupted.pairs, corrupted_prior)?;
                let mut config = base.clone();
                config.seed = derive_seed(base.seed, domain::RUN, s as u32);
                config.model.init_seed = derive_seed(base.seed, domain::MODEL_INIT, s as u32);
                let outcome = train::train(&TrainData::ConfDiff(data), &test, &config)?;
                acc_stats.push(outcome.result.final_accuracy);
                accuracies.push(outcome.result.final_accuracy);
            }
            cells.push(RobustnessCell {
                prior_scale,
                conf_noise_std,
                mean_accuracy: acc_stats.mean(),
                std_accuracy: libm::sqrt(acc_stats.variance()),
                mean_abs_confidence_error: err_stats.mean(),
                accuracies,
            });
        }
    }
    Ok(RobustnessStudy { cells })
}
