//! Minibatch empirical risk minimization over confidence-difference and
//! baseline datasets, plus sign-threshold evaluation.
//!
//! One training run is single-threaded and fully determined by
//! `(data, config)`: the model is initialized from the model seed, pairs are
//! reshuffled every epoch from the run seed, the configured risk is
//! minimized per minibatch (corrections applied per minibatch), and at every
//! epoch end the full-training-set risk and test accuracy are recorded.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::loss::{CorrectionKind, Label, LossKind};
use crate::model::{self, ModelParams, ModelSpec};
use crate::optim::{self, OptimizerConfig, OptimizerState};
use crate::risk::{
    self, ConfDiffDataset, LabeledExample, PairScores, PcompDataset, SoftLabeledExample,
};
use crate::stream::{domain, stream_rng};

/// Training loss. The zero-one loss is evaluation-only, so runs always
/// minimize the logistic surrogate.
const TRAIN_LOSS: LossKind = LossKind::Logistic;

/// Which empirical risk a run minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EstimatorKind {
    ConfDiffUnbiased,
    ConfDiffRelu,
    ConfDiffAbs,
    PcompUnbiased,
    SoftLabel,
    SupervisedHard,
}

impl EstimatorKind {
    /// The correction applied to confidence-difference terms; `None` for
    /// estimators that are not built from the pair decomposition.
    pub fn correction(self) -> Option<CorrectionKind> {
        match self {
            EstimatorKind::ConfDiffUnbiased => Some(CorrectionKind::Identity),
            EstimatorKind::ConfDiffRelu => Some(CorrectionKind::Relu),
            EstimatorKind::ConfDiffAbs => Some(CorrectionKind::Abs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::ConfDiffUnbiased => "confdiff_unbiased",
            EstimatorKind::ConfDiffRelu => "confdiff_relu",
            EstimatorKind::ConfDiffAbs => "confdiff_abs",
            EstimatorKind::PcompUnbiased => "pcomp_unbiased",
            EstimatorKind::SoftLabel => "soft_label",
            EstimatorKind::SupervisedHard => "supervised_hard",
        }
    }
}

/// Training input; the variant must match the configured estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainData {
    ConfDiff(ConfDiffDataset),
    Pcomp(PcompDataset),
    Soft(Vec<SoftLabeledExample>),
    Labeled(Vec<LabeledExample>),
}

impl TrainData {
    pub fn len(&self) -> usize {
        match self {
            TrainData::ConfDiff(d) => d.pairs.len(),
            TrainData::Pcomp(d) => d.pairs.len(),
            TrainData::Soft(v) => v.len(),
            TrainData::Labeled(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize {
        match self {
            TrainData::ConfDiff(d) => d.dim(),
            TrainData::Pcomp(d) => d.pairs.first().map_or(0, |p| p.x.len()),
            TrainData::Soft(v) => v.first().map_or(0, |e| e.x.len()),
            TrainData::Labeled(v) => v.first().map_or(0, |e| e.x.len()),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            TrainData::ConfDiff(_) => "confidence-difference pairs",
            TrainData::Pcomp(_) => "comparison pairs",
            TrainData::Soft(_) => "soft-labeled examples",
            TrainData::Labeled(_) => "hard-labeled examples",
        }
    }
}

/// Full description of one training run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub estimator: EstimatorKind,
    pub epochs: usize,
    /// Minibatch size, counted in pairs (or examples for pointwise data).
    pub batch_pairs: usize,
    pub optimizer: OptimizerConfig,
    pub model: ModelSpec,
    pub seed: u64,
    /// Final accuracy is the mean test accuracy over this many last epochs.
    pub eval_tail_epochs: usize,
}

impl TrainConfig {
    /// Checks the configuration, including that the estimator matches the
    /// dataset kind, before any training work happens.
    pub fn validate(&self, data: &TrainData) -> Result<()> {
        if self.epochs < self.eval_tail_epochs || self.eval_tail_epochs < 1 {
            return Err(Error::invalid(
                "epochs must be at least eval_tail_epochs, which must be at least 1",
            ));
        }
        if self.batch_pairs < 1 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        self.optimizer.validate()?;
        self.model.validate()?;
        let matches = matches!(
            (self.estimator, data),
            (
                EstimatorKind::ConfDiffUnbiased
                    | EstimatorKind::ConfDiffRelu
                    | EstimatorKind::ConfDiffAbs,
                TrainData::ConfDiff(_)
            ) | (EstimatorKind::PcompUnbiased, TrainData::Pcomp(_))
                | (EstimatorKind::SoftLabel, TrainData::Soft(_))
                | (EstimatorKind::SupervisedHard, TrainData::Labeled(_))
        );
        if !matches {
            return Err(Error::ConfigMismatch(alloc::format!(
                "estimator {} cannot train on {}",
                self.estimator.name(),
                data.kind_name()
            )));
        }
        if data.is_empty() {
            return Err(Error::invalid("training data must be nonempty"));
        }
        if data.dim() != self.model.input_dim {
            return Err(Error::ConfigMismatch(alloc::format!(
                "data dimension {} does not match model input dimension {}",
                data.dim(),
                self.model.input_dim
            )));
        }
        Ok(())
    }
}

/// Per-epoch training risks and test accuracies of a finished run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunResult {
    /// Full-training-set risk at each epoch end, under the configured
    /// estimator. May be negative for the uncorrected estimator.
    pub train_risk: Vec<f64>,
    /// Test accuracy at each epoch end.
    pub test_accuracy: Vec<f64>,
    /// Mean test accuracy over the last `eval_tail_epochs` epochs.
    pub final_accuracy: f64,
    pub min_train_risk: f64,
}

/// A finished run: its records plus the final model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub result: RunResult,
    pub params: ModelParams,
}

fn shuffled_indices<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Scratch buffers reused across minibatches.
#[derive(Default)]
struct BatchScratch {
    confidences: Vec<f64>,
    pair_scores: Vec<PairScores>,
    pair_grads: Vec<PairScores>,
    scores: Vec<f64>,
    point_grads: Vec<f64>,
    soft: Vec<f64>,
    labels: Vec<Label>,
    caches: Vec<model::ForwardCache>,
    caches_prime: Vec<model::ForwardCache>,
}

/// Runs minibatch training and returns the per-epoch records together with
/// the final parameters.
pub fn train(
    data: &TrainData,
    test_data: &[LabeledExample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate(data)?;
    if test_data.is_empty() {
        return Err(Error::invalid("test data must be nonempty"));
    }

    let mut params = model::init_model(
        &config.model,
        &mut stream_rng(config.model.init_seed, domain::MODEL_INIT, 0),
    )?;
    let mut opt_state = OptimizerState::new(&config.optimizer, params.len());
    let mut shuffle_rng = stream_rng(config.seed, domain::SHUFFLE, 0);

    let n = data.len();
    let mut grad = alloc::vec![0.0; params.len()];
    let mut scratch = BatchScratch::default();
    let mut train_risk = Vec::with_capacity(config.epochs);
    let mut test_accuracy = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let perm = shuffled_indices(n, &mut shuffle_rng);
        for batch in perm.chunks(config.batch_pairs) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            batch_gradient(data, config, batch, &params, &mut scratch, &mut grad)?;
            optim::step(&config.optimizer, &mut opt_state, params.values_mut(), &grad)
                .map_err(|e| Error::AbortedRun {
                    epoch,
                    reason: alloc::format!("{e}"),
                })?;
        }

        let risk = full_risk(data, config, &params)?;
        if !risk.is_finite() {
            return Err(Error::AbortedRun {
                epoch,
                reason: alloc::format!("training risk became {risk}"),
            });
        }
        train_risk.push(risk);
        test_accuracy.push(evaluate_accuracy(&params, test_data)?);
    }

    let tail = &test_accuracy[config.epochs - config.eval_tail_epochs..];
    let final_accuracy = tail.iter().sum::<f64>() / tail.len() as f64;
    let min_train_risk = train_risk.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TrainOutcome {
        result: RunResult { train_risk, test_accuracy, final_accuracy, min_train_risk },
        params,
    })
}

/// Accumulates the gradient of the configured minibatch risk into `grad`.
fn batch_gradient(
    data: &TrainData,
    config: &TrainConfig,
    batch: &[usize],
    params: &ModelParams,
    scratch: &mut BatchScratch,
    grad: &mut [f64],
) -> Result<()> {
    match data {
        TrainData::ConfDiff(ds) => {
            let correction = config
                .estimator
                .correction()
                .expect("validated: confdiff estimator");
            scratch.confidences.clear();
            scratch.pair_scores.clear();
            scratch.caches.clear();
            scratch.caches_prime.clear();
            for &i in batch {
                let pair = &ds.pairs[i];
                let (sx, cache_x) = model::forward(params, &pair.x)?;
                let (sxp, cache_xp) = model::forward(params, &pair.x_prime)?;
                scratch.confidences.push(pair.c);
                scratch.pair_scores.push(PairScores { x: sx, x_prime: sxp });
                scratch.caches.push(cache_x);
                scratch.caches_prime.push(cache_xp);
            }
            risk::corrected_scores_grad_parts(
                ds.class_prior,
                &scratch.confidences,
                &scratch.pair_scores,
                TRAIN_LOSS,
                correction,
                &mut scratch.pair_grads,
            )?;
            for (k, g) in scratch.pair_grads.iter().enumerate() {
                model::accumulate_grad(params, &scratch.caches[k], g.x, grad)?;
                model::accumulate_grad(params, &scratch.caches_prime[k], g.x_prime, grad)?;
            }
        }
        TrainData::Pcomp(ds) => {
            scratch.pair_scores.clear();
            scratch.caches.clear();
            scratch.caches_prime.clear();
            for &i in batch {
                let pair = &ds.pairs[i];
                let (sx, cache_x) = model::forward(params, &pair.x)?;
                let (sxp, cache_xp) = model::forward(params, &pair.x_prime)?;
                scratch.pair_scores.push(PairScores { x: sx, x_prime: sxp });
                scratch.caches.push(cache_x);
                scratch.caches_prime.push(cache_xp);
            }
            risk::pcomp_scores_grad_parts(
                ds.class_prior,
                &scratch.pair_scores,
                TRAIN_LOSS,
                &mut scratch.pair_grads,
            )?;
            for (k, g) in scratch.pair_grads.iter().enumerate() {
                model::accumulate_grad(params, &scratch.caches[k], g.x, grad)?;
                model::accumulate_grad(params, &scratch.caches_prime[k], g.x_prime, grad)?;
            }
        }
        TrainData::Soft(examples) => {
            scratch.soft.clear();
            scratch.scores.clear();
            scratch.caches.clear();
            for &i in batch {
                let (s, cache) = model::forward(params, &examples[i].x)?;
                scratch.soft.push(examples[i].r);
                scratch.scores.push(s);
                scratch.caches.push(cache);
            }
            risk::soft_scores_grad_parts(
                &scratch.soft,
                &scratch.scores,
                TRAIN_LOSS,
                &mut scratch.point_grads,
            )?;
            for (k, &g) in scratch.point_grads.iter().enumerate() {
                model::accumulate_grad(params, &scratch.caches[k], g, grad)?;
            }
        }
        TrainData::Labeled(examples) => {
            scratch.labels.clear();
            scratch.scores.clear();
            scratch.caches.clear();
            for &i in batch {
                let (s, cache) = model::forward(params, &examples[i].x)?;
                scratch.labels.push(examples[i].y);
                scratch.scores.push(s);
                scratch.caches.push(cache);
            }
            risk::supervised_scores_grad_parts(
                &scratch.labels,
                &scratch.scores,
                TRAIN_LOSS,
                &mut scratch.point_grads,
            )?;
            for (k, &g) in scratch.point_grads.iter().enumerate() {
                model::accumulate_grad(params, &scratch.caches[k], g, grad)?;
            }
        }
    }
    Ok(())
}

/// The configured risk over the full training set, correction included.
fn full_risk(data: &TrainData, config: &TrainConfig, params: &ModelParams) -> Result<f64> {
    match data {
        TrainData::ConfDiff(ds) => {
            let correction = config
                .estimator
                .correction()
                .expect("validated: confdiff estimator");
            let scores: Vec<PairScores> = ds
                .pairs
                .iter()
                .map(|p| {
                    Ok(PairScores {
                        x: model::score(params, &p.x)?,
                        x_prime: model::score(params, &p.x_prime)?,
                    })
                })
                .collect::<Result<_>>()?;
            risk::confdiff_corrected_risk(ds, &scores, TRAIN_LOSS, correction)
        }
        TrainData::Pcomp(ds) => {
            let scores: Vec<PairScores> = ds
                .pairs
                .iter()
                .map(|p| {
                    Ok(PairScores {
                        x: model::score(params, &p.x)?,
                        x_prime: model::score(params, &p.x_prime)?,
                    })
                })
                .collect::<Result<_>>()?;
            risk::pcomp_unbiased_risk(&ds.pairs, &scores, ds.class_prior, TRAIN_LOSS)
        }
        TrainData::Soft(examples) => {
            let scores: Vec<f64> = examples
                .iter()
                .map(|e| model::score(params, &e.x))
                .collect::<Result<_>>()?;
            risk::soft_label_risk(examples, &scores, TRAIN_LOSS)
        }
        TrainData::Labeled(examples) => {
            let scores: Vec<f64> = examples
                .iter()
                .map(|e| model::score(params, &e.x))
                .collect::<Result<_>>()?;
            risk::supervised_risk(examples, &scores, TRAIN_LOSS)
        }
    }
}

/// Fraction of test examples whose score sign matches the label, with
/// `sign(0) := +1`.
pub fn evaluate_accuracy(params: &ModelParams, test_data: &[LabeledExample]) -> Result<f64> {
    if test_data.is_empty() {
        return Err(Error::invalid("test data must be nonempty"));
    }
    let mut correct = 0usize;
    for e in test_data {
        let s = model::score(params, &e.x)?;
        if Label::from_score(s) == e.y {
            correct += 1;
        }
    }
    Ok(correct as f64 / test_data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::Label;
    use crate::synth::{self, GaussianMixtureSpec};

    const LN2: f64 = core::f64::consts::LN_2;

    fn confdiff_config(estimator: EstimatorKind, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            estimator,
            epochs,
            batch_pairs: 16,
            optimizer: OptimizerConfig::adam(1e-3, 1e-5),
            model: ModelSpec::linear(2, seed),
            seed,
            eval_tail_epochs: epochs.min(10),
        }
    }

    fn small_problem(seed: u64) -> (TrainData, Vec<LabeledExample>) {
        let spec = GaussianMixtureSpec::symmetric(&[1.0, 1.0], 0.5).unwrap();
        let data = synth::make_confdiff_dataset(
            &spec,
            64,
            &mut stream_rng(seed, domain::DATASET, 0),
        )
        .unwrap();
        let test =
            synth::make_labeled_dataset(&spec, 256, &mut stream_rng(seed, domain::EVAL, 0))
                .unwrap();
        (TrainData::ConfDiff(data), test)
    }

    #[test]
    fn estimator_dataset_mismatch_fails_fast() {
        let (_, test) = small_problem(1);
        let labeled = TrainData::Labeled(test.clone());
        let config = confdiff_config(EstimatorKind::ConfDiffAbs, 2, 1);
        assert!(matches!(
            train(&labeled, &test, &config),
            Err(Error::ConfigMismatch(_))
        ));
    }

    #[test]
    fn frozen_run_records_constant_risk() {
        // lr = 0 freezes the parameters at their init, so every epoch
        // records the same full-set risk.
        let (data, test) = small_problem(2);
        let mut config = confdiff_config(EstimatorKind::ConfDiffUnbiased, 3, 2);
        config.optimizer = OptimizerConfig::sgd(0.0);
        let outcome = train(&data, &test, &config).unwrap();
        let first = outcome.result.train_risk[0];
        for &r in &outcome.result.train_risk {
            assert_eq!(r, first);
        }
    }

    #[test]
    fn zero_model_risk_is_ln2_on_symmetric_prior() {
        let (data, _) = small_problem(3);
        let TrainData::ConfDiff(ds) = &data else { unreachable!() };
        let scores: Vec<PairScores> = alloc::vec![PairScores::default(); ds.pairs.len()];
        let r = risk::confdiff_unbiased_risk(ds, &scores, LossKind::Logistic).unwrap();
        assert!((r - LN2).abs() < 1e-12);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let (data, test) = small_problem(4);
        let config = confdiff_config(EstimatorKind::ConfDiffAbs, 5, 4);
        let a = train(&data, &test, &config).unwrap();
        let b = train(&data, &test, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrected_estimators_record_non_negative_risk() {
        let (data, test) = small_problem(5);
        for estimator in [EstimatorKind::ConfDiffRelu, EstimatorKind::ConfDiffAbs] {
            let config = confdiff_config(estimator, 8, 5);
            let outcome = train(&data, &test, &config).unwrap();
            assert!(outcome.result.train_risk.iter().all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn supervised_separable_problem_trains_to_high_accuracy() {
        let spec = GaussianMixtureSpec::symmetric(&[3.0, 3.0], 0.5).unwrap();
        let train_set = synth::make_labeled_dataset(
            &spec,
            256,
            &mut stream_rng(6, domain::DATASET, 0),
        )
        .unwrap();
        let test =
            synth::make_labeled_dataset(&spec, 512, &mut stream_rng(6, domain::EVAL, 0))
                .unwrap();
        let config = TrainConfig {
            estimator: EstimatorKind::SupervisedHard,
            epochs: 50,
            batch_pairs: 32,
            optimizer: OptimizerConfig::adam(1e-2, 0.0),
            model: ModelSpec::linear(2, 6),
            seed: 6,
            eval_tail_epochs: 10,
        };
        let outcome = train(&TrainData::Labeled(train_set), &test, &config).unwrap();
        assert!(
            outcome.result.final_accuracy > 0.99,
            "final accuracy {}",
            outcome.result.final_accuracy
        );
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = stream_rng(7, domain::SHUFFLE, 0);
        let mut perm = shuffled_indices(101, &mut rng);
        perm.sort_unstable();
        assert_eq!(perm, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn accuracy_conventions() {
        // All-zero scores predict positive everywhere.
        let params = ModelParams::from_parts(vec![1, 1], vec![0.0, 0.0]).unwrap();
        let test = alloc::vec![
            LabeledExample { x: alloc::vec![1.0], y: Label::Pos },
            LabeledExample { x: alloc::vec![2.0], y: Label::Pos },
            LabeledExample { x: alloc::vec![3.0], y: Label::Neg },
        ];
        let acc = evaluate_accuracy(&params, &test).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        // Flipping every label maps accuracy to its complement.
        let flipped: Vec<LabeledExample> = test
            .iter()
            .map(|e| LabeledExample {
                x: e.x.clone(),
                y: if e.y == Label::Pos { Label::Neg } else { Label::Pos },
            })
            .collect();
        let flipped_acc = evaluate_accuracy(&params, &flipped).unwrap();
        assert!((acc + flipped_acc - 1.0).abs() < 1e-15);
    }
}
