//! Empirical risk estimators: supervised, soft-label, pairwise-comparison,
//! and confidence-difference, plus the corrected estimator built from the
//! four-term decomposition.
//!
//! The confidence-difference estimators all reduce to the per-pair quantity
//!
//! ```text
//! L(x, x') = (prior - c) * loss(g(x), +1) + ((1 - prior) - c) * loss(g(x'), -1)
//! ```
//!
//! evaluated with the pair in both orders (swapping the order negates `c`).
//! Averaging the two orders with equal weight over a batch of `n` pairs gives
//! the unbiased estimator; the corrected estimator groups the same products
//! into four coefficient-weighted sums and wraps each in a correction
//! function before adding them back together.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::{self, CorrectionKind, Label, LossKind};

/// An unlabeled data pair annotated with the difference of positive-class
/// posteriors, `c = p(+1 | x') - p(+1 | x)`, so `c` is in `[-1, 1]` and
/// swapping the pair negates it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfDiffPair {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub c: f64,
}

impl ConfDiffPair {
    pub fn new(x: Vec<f64>, x_prime: Vec<f64>, c: f64) -> Result<Self> {
        if x.len() != x_prime.len() || x.is_empty() {
            return Err(Error::invalid(
                "pair instances must share a nonzero feature dimension",
            ));
        }
        check_confidence(c)?;
        Ok(Self { x, x_prime, c })
    }

    /// The same pair with the roles of the two instances exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.x_prime.clone(),
            x_prime: self.x.clone(),
            c: -self.c,
        }
    }
}

/// A collection of confidence-difference pairs plus the positive-class prior;
/// the sole training input for the confidence-difference estimators.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfDiffDataset {
    pub pairs: Vec<ConfDiffPair>,
    pub class_prior: f64,
}

impl ConfDiffDataset {
    pub fn new(pairs: Vec<ConfDiffPair>, class_prior: f64) -> Result<Self> {
        check_prior(class_prior)?;
        if let Some(first) = pairs.first() {
            let d = first.x.len();
            if pairs.iter().any(|p| p.x.len() != d || p.x_prime.len() != d) {
                return Err(Error::invalid("pairs must share one feature dimension"));
            }
        }
        Ok(Self { pairs, class_prior })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Feature dimension, or 0 for an empty dataset.
    pub fn dim(&self) -> usize {
        self.pairs.first().map_or(0, |p| p.x.len())
    }
}

/// An example with pointwise positive confidence `r = p(+1 | x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoftLabeledExample {
    pub x: Vec<f64>,
    pub r: f64,
}

/// A hard-labeled example.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: Label,
}

/// An ordered unlabeled pair where the first instance is the one known to be
/// more likely positive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcompPair {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
}

/// Pairwise-comparison pairs plus the positive-class prior.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcompDataset {
    pub pairs: Vec<PcompPair>,
    pub class_prior: f64,
}

/// Scores of the two instances of one pair under the current model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairScores {
    pub x: f64,
    pub x_prime: f64,
}

/// The four coefficient-weighted loss sums of a batch, each normalized by
/// `2n`. Their plain total is the unbiased empirical risk of the batch; the
/// corrected estimator wraps each one in a correction function first.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermDecomposition {
    /// `sum_i (prior - c_i) * loss(g(x_i), +1) / 2n`
    pub pos_first: f64,
    /// `sum_i ((1 - prior) - c_i) * loss(g(x'_i), -1) / 2n`
    pub neg_second: f64,
    /// `sum_i (prior + c_i) * loss(g(x'_i), +1) / 2n`
    pub pos_second: f64,
    /// `sum_i ((1 - prior) + c_i) * loss(g(x_i), -1) / 2n`
    pub neg_first: f64,
}

impl TermDecomposition {
    /// Sum of the four terms: the unbiased empirical risk of the batch, up
    /// to summation-order rounding.
    pub fn total(&self) -> f64 {
        self.pos_first + self.neg_second + self.pos_second + self.neg_first
    }

    /// Sum of the four terms after applying the correction function to each.
    pub fn corrected_total(&self, correction: CorrectionKind) -> f64 {
        loss::correct(correction, self.pos_first)
            + loss::correct(correction, self.neg_second)
            + loss::correct(correction, self.pos_second)
            + loss::correct(correction, self.neg_first)
    }
}

fn check_prior(prior: f64) -> Result<()> {
    if !(prior.is_finite() && prior > 0.0 && prior < 1.0) {
        return Err(Error::invalid(alloc::format!(
            "class prior must lie strictly inside (0, 1), got {prior}"
        )));
    }
    Ok(())
}

fn check_confidence(c: f64) -> Result<()> {
    if !(c.is_finite() && (-1.0..=1.0).contains(&c)) {
        return Err(Error::invalid(alloc::format!(
            "confidence difference must lie in [-1, 1], got {c}"
        )));
    }
    Ok(())
}

fn check_aligned(items: usize, scores: usize) -> Result<()> {
    if items == 0 {
        return Err(Error::invalid("dataset must be nonempty"));
    }
    if items != scores {
        return Err(Error::invalid(alloc::format!(
            "scores not aligned with data: {items} items, {scores} scores"
        )));
    }
    Ok(())
}

/// The per-pair quantity in both pair orders: `(L(x, x'), L(x', x))`.
///
/// Both estimator routes below consume these exact values, so identities
/// that hold pairwise (swap antisymmetry, the half-weight collapse) hold
/// bitwise for the estimators built from them.
fn pair_losses(
    prior: f64,
    c: f64,
    score_x: f64,
    score_xp: f64,
    kind: LossKind,
) -> Result<(f64, f64)> {
    let neg_prior = 1.0 - prior;
    let lp_x = loss::loss(kind, score_x, Label::Pos)?;
    let ln_x = loss::loss(kind, score_x, Label::Neg)?;
    let lp_xp = loss::loss(kind, score_xp, Label::Pos)?;
    let ln_xp = loss::loss(kind, score_xp, Label::Neg)?;
    let forward = (prior - c) * lp_x + (neg_prior - c) * ln_xp;
    let backward = (prior + c) * lp_xp + (neg_prior + c) * ln_x;
    Ok((forward, backward))
}

/// The pair-order loss `L(x, x') = (prior - c) * loss(g(x), +1)
/// + ((1 - prior) - c) * loss(g(x'), -1)`. May be negative.
pub fn pair_loss(
    pair: &ConfDiffPair,
    score_x: f64,
    score_xp: f64,
    prior: f64,
    kind: LossKind,
) -> Result<f64> {
    check_prior(prior)?;
    check_confidence(pair.c)?;
    let (forward, _) = pair_losses(prior, pair.c, score_x, score_xp, kind)?;
    Ok(forward)
}

pub(crate) fn weighted_risk_parts(
    prior: f64,
    cs: &[f64],
    scores: &[PairScores],
    kind: LossKind,
    alpha: f64,
) -> Result<f64> {
    let mut sum = 0.0;
    for (c, s) in cs.iter().zip(scores) {
        check_confidence(*c)?;
        let (forward, backward) = pair_losses(prior, *c, s.x, s.x_prime, kind)?;
        sum += alpha * forward + (1.0 - alpha) * backward;
    }
    Ok(sum / cs.len() as f64)
}

pub(crate) fn unbiased_risk_parts(
    prior: f64,
    cs: &[f64],
    scores: &[PairScores],
    kind: LossKind,
) -> Result<f64> {
    let mut sum = 0.0;
    for (c, s) in cs.iter().zip(scores) {
        check_confidence(*c)?;
        let (forward, backward) = pair_losses(prior, *c, s.x, s.x_prime, kind)?;
        sum += forward + backward;
    }
    Ok(sum / (2.0 * cs.len() as f64))
}

pub(crate) fn term_decomposition_parts(
    prior: f64,
    cs: &[f64],
    scores: &[PairScores],
    kind: LossKind,
) -> Result<TermDecomposition> {
    let neg_prior = 1.0 - prior;
    let mut pos_first = 0.0;
    let mut neg_second = 0.0;
    let mut pos_second = 0.0;
    let mut neg_first = 0.0;
    for (c, s) in cs.iter().zip(scores) {
        check_confidence(*c)?;
        pos_first += (prior - c) * loss::loss(kind, s.x, Label::Pos)?;
        neg_second += (neg_prior - c) * loss::loss(kind, s.x_prime, Label::Neg)?;
        pos_second += (prior + c) * loss::loss(kind, s.x_prime, Label::Pos)?;
        neg_first += (neg_prior + c) * loss::loss(kind, s.x, Label::Neg)?;
    }
    let denom = 2.0 * cs.len() as f64;
    Ok(TermDecomposition {
        pos_first: pos_first / denom,
        neg_second: neg_second / denom,
        pos_second: pos_second / denom,
        neg_first: neg_first / denom,
    })
}

pub(crate) fn corrected_risk_parts(
    prior: f64,
    cs: &[f64],
    scores: &[PairScores],
    kind: LossKind,
    correction: CorrectionKind,
) -> Result<f64> {
    let unbiased = unbiased_risk_parts(prior, cs, scores, kind)?;
    match correction {
        CorrectionKind::Identity => Ok(unbiased),
        CorrectionKind::Relu | CorrectionKind::Abs => {
            let terms = term_decomposition_parts(prior, cs, scores, kind)?;
            // When no term is negative the corrected and uncorrected values
            // coincide in exact arithmetic but are summed in different orders
            // here; taking the max keeps the dominance guarantee exact.
            Ok(terms.corrected_total(correction).max(unbiased))
        }
    }
}

pub(crate) fn corrected_scores_grad_parts(
    prior: f64,
    cs: &[f64],
    scores: &[PairScores],
    kind: LossKind,
    correction: CorrectionKind,
    grads: &mut Vec<PairScores>,
) -> Result<()> {
    let terms = term_decomposition_parts(prior, cs, scores, kind)?;
    let slope_pos_first = loss::correct_grad(correction, terms.pos_first);
    let slope_neg_second = loss::correct_grad(correction, terms.neg_second);
    let slope_pos_second = loss::correct_grad(correction, terms.pos_second);
    let slope_neg_first = loss::correct_grad(correction, terms.neg_first);
    let neg_prior = 1.0 - prior;
    let denom = 2.0 * cs.len() as f64;
    grads.clear();
    for (c, s) in cs.iter().zip(scores) {
        let gx = (slope_pos_first * (prior - c) * loss::loss_grad(kind, s.x, Label::Pos)?
            + slope_neg_first * (neg_prior + c) * loss::loss_grad(kind, s.x, Label::Neg)?)
            / denom;
        let gxp = (slope_neg_second
            * (neg_prior - c)
            * loss::loss_grad(kind, s.x_prime, Label::Neg)?
            + slope_pos_second * (prior + c) * loss::loss_grad(kind, s.x_prime, Label::Pos)?)
            / denom;
        grads.push(PairScores { x: gx, x_prime: gxp });
    }
    Ok(())
}

fn collect_confidences(data: &ConfDiffDataset) -> Vec<f64> {
    data.pairs.iter().map(|p| p.c).collect()
}

/// Unbiased empirical risk over confidence-difference pairs: the mean of the
/// per-pair loss evaluated in both pair orders, `sum_i (L(x_i, x'_i)
/// + L(x'_i, x_i)) / 2n`. May be negative.
pub fn confdiff_unbiased_risk(
    data: &ConfDiffDataset,
    scores: &[PairScores],
    kind: LossKind,
) -> Result<f64> {
    check_prior(data.class_prior)?;
    check_aligned(data.len(), scores.len())?;
    unbiased_risk_parts(data.class_prior, &collect_confidences(data), scores, kind)
}

/// The weighted family `sum_i (alpha * L(x_i, x'_i)
/// + (1 - alpha) * L(x'_i, x_i)) / n`, unbiased for every `alpha` in [0, 1].
/// `alpha = 1/2` recovers [`confdiff_unbiased_risk`] exactly.
pub fn confdiff_weighted_risk(
    data: &ConfDiffDataset,
    scores: &[PairScores],
    kind: LossKind,
    alpha: f64,
) -> Result<f64> {
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::invalid(alloc::format!(
            "weight must lie in [0, 1], got {alpha}"
        )));
    }
    check_prior(data.class_prior)?;
    check_aligned(data.len(), scores.len())?;
    weighted_risk_parts(data.class_prior, &collect_confidences(data), scores, kind, alpha)
}

/// Splits the batch risk into its four coefficient-weighted sums.
pub fn confdiff_term_decomposition(
    batch: &ConfDiffDataset,
    scores: &[PairScores],
    kind: LossKind,
) -> Result<TermDecomposition> {
    check_prior(batch.class_prior)?;
    check_aligned(batch.len(), scores.len())?;
    term_decomposition_parts(batch.class_prior, &collect_confidences(batch), scores, kind)
}

/// Corrected empirical risk: each decomposition term is wrapped in the
/// correction function before the terms are added. For `Relu` and `Abs` the
/// result is non-negative and never below [`confdiff_unbiased_risk`] of the
/// same batch; `Identity` returns the unbiased risk itself.
pub fn confdiff_corrected_risk(
    batch: &ConfDiffDataset,
    scores: &[PairScores],
    kind: LossKind,
    correction: CorrectionKind,
) -> Result<f64> {
    check_prior(batch.class_prior)?;
    check_aligned(batch.len(), scores.len())?;
    corrected_risk_parts(
        batch.class_prior,
        &collect_confidences(batch),
        scores,
        kind,
        correction,
    )
}

/// Gradient of [`confdiff_corrected_risk`] with respect to every score:
/// the correction slope at each term times the term's own score gradient.
pub fn corrected_risk_grad(
    batch: &ConfDiffDataset,
    scores: &[PairScores],
    kind: LossKind,
    correction: CorrectionKind,
) -> Result<Vec<PairScores>> {
    check_prior(batch.class_prior)?;
    check_aligned(batch.len(), scores.len())?;
    let mut grads = Vec::with_capacity(batch.len());
    corrected_scores_grad_parts(
        batch.class_prior,
        &collect_confidences(batch),
        scores,
        kind,
        correction,
        &mut grads,
    )?;
    Ok(grads)
}

/// Unbiased risk over pairwise-comparison pairs where the first instance is
/// the more-likely-positive one: `sum_i (loss(g(x_i), +1) + loss(g(x'_i), -1)
/// - prior * loss(g(x_i), -1) - (1 - prior) * loss(g(x'_i), +1)) / n`.
pub fn pcomp_unbiased_risk(
    pairs: &[PcompPair],
    scores: &[PairScores],
    prior: f64,
    kind: LossKind,
) -> Result<f64> {
    check_prior(prior)?;
    check_aligned(pairs.len(), scores.len())?;
    let neg_prior = 1.0 - prior;
    let mut sum = 0.0;
    for s in scores {
        sum += loss::loss(kind, s.x, Label::Pos)? + loss::loss(kind, s.x_prime, Label::Neg)?
            - prior * loss::loss(kind, s.x, Label::Neg)?
            - neg_prior * loss::loss(kind, s.x_prime, Label::Pos)?;
    }
    Ok(sum / pairs.len() as f64)
}

pub(crate) fn pcomp_scores_grad_parts(
    prior: f64,
    scores: &[PairScores],
    kind: LossKind,
    grads: &mut Vec<PairScores>,
) -> Result<()> {
    let neg_prior = 1.0 - prior;
    let n = scores.len() as f64;
    grads.clear();
    for s in scores {
        let gx = (loss::loss_grad(kind, s.x, Label::Pos)?
            - prior * loss::loss_grad(kind, s.x, Label::Neg)?)
            / n;
        let gxp = (loss::loss_grad(kind, s.x_prime, Label::Neg)?
            - neg_prior * loss::loss_grad(kind, s.x_prime, Label::Pos)?)
            / n;
        grads.push(PairScores { x: gx, x_prime: gxp });
    }
    Ok(())
}

/// Soft-label risk `sum_i (r_i * loss(g(x_i), +1)
/// + (1 - r_i) * loss(g(x_i), -1)) / n`. Always non-negative.
pub fn soft_label_risk(
    examples: &[SoftLabeledExample],
    scores: &[f64],
    kind: LossKind,
) -> Result<f64> {
    check_aligned(examples.len(), scores.len())?;
    let mut sum = 0.0;
    for (e, &s) in examples.iter().zip(scores) {
        if !(e.r.is_finite() && (0.0..=1.0).contains(&e.r)) {
            return Err(Error::invalid(alloc::format!(
                "positive confidence must lie in [0, 1], got {}",
                e.r
            )));
        }
        sum += e.r * loss::loss(kind, s, Label::Pos)?
            + (1.0 - e.r) * loss::loss(kind, s, Label::Neg)?;
    }
    Ok(sum / examples.len() as f64)
}

pub(crate) fn soft_scores_grad_parts(
    rs: &[f64],
    scores: &[f64],
    kind: LossKind,
    grads: &mut Vec<f64>,
) -> Result<()> {
    let n = scores.len() as f64;
    grads.clear();
    for (&r, &s) in rs.iter().zip(scores) {
        grads.push(
            (r * loss::loss_grad(kind, s, Label::Pos)?
                + (1.0 - r) * loss::loss_grad(kind, s, Label::Neg)?)
                / n,
        );
    }
    Ok(())
}

/// Fully supervised empirical risk `sum_i loss(g(x_i), y_i) / n`.
pub fn supervised_risk(
    examples: &[LabeledExample],
    scores: &[f64],
    kind: LossKind,
) -> Result<f64> {
    check_aligned(examples.len(), scores.len())?;
    let mut sum = 0.0;
    for (e, &s) in examples.iter().zip(scores) {
        sum += loss::loss(kind, s, e.y)?;
    }
    Ok(sum / examples.len() as f64)
}

pub(crate) fn supervised_scores_grad_parts(
    labels: &[Label],
    scores: &[f64],
    kind: LossKind,
    grads: &mut Vec<f64>,
) -> Result<()> {
    let n = scores.len() as f64;
    grads.clear();
    for (&y, &s) in labels.iter().zip(scores) {
        grads.push(loss::loss_grad(kind, s, y)? / n);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = core::f64::consts::LN_2;

    fn pair(c: f64) -> ConfDiffPair {
        ConfDiffPair::new(vec![0.0, 0.0], vec![0.0, 0.0], c).unwrap()
    }

    fn dataset(cs: &[f64], prior: f64) -> ConfDiffDataset {
        ConfDiffDataset::new(cs.iter().map(|&c| pair(c)).collect(), prior).unwrap()
    }

    fn zero_scores(n: usize) -> Vec<PairScores> {
        vec![PairScores::default(); n]
    }

    #[test]
    fn pair_loss_symmetric_zero_case() {
        let p = pair(0.0);
        let v = pair_loss(&p, 0.0, 0.0, 0.5, LossKind::Logistic).unwrap();
        assert!((v - LN2).abs() < 1e-15);
    }

    #[test]
    fn pair_loss_coefficient_cancellation() {
        // c equal to the prior kills the first coefficient.
        let p = pair(0.2);
        let v = pair_loss(&p, 3.7, 0.0, 0.2, LossKind::Logistic).unwrap();
        assert!((v - 0.6 * LN2).abs() < 1e-15);
    }

    #[test]
    fn pair_loss_rejects_bad_confidence() {
        let p = ConfDiffPair {
            x: vec![0.0],
            x_prime: vec![0.0],
            c: 1.5,
        };
        assert!(pair_loss(&p, 0.0, 0.0, 0.5, LossKind::Logistic).is_err());
        assert!(ConfDiffPair::new(vec![0.0], vec![0.0], 1.5).is_err());
    }

    #[test]
    fn unbiased_symmetric_zero_case() {
        let data = dataset(&[0.0, 0.0, 0.0], 0.5);
        let v = confdiff_unbiased_risk(&data, &zero_scores(3), LossKind::Logistic).unwrap();
        assert!((v - LN2).abs() < 1e-15);
    }

    #[test]
    fn unbiased_rejects_empty_and_misaligned() {
        let data = dataset(&[], 0.5);
        assert!(confdiff_unbiased_risk(&data, &[], LossKind::Logistic).is_err());
        let data = dataset(&[0.1], 0.5);
        assert!(confdiff_unbiased_risk(&data, &zero_scores(2), LossKind::Logistic).is_err());
    }

    #[test]
    fn weighted_collapses_at_endpoints() {
        let data = dataset(&[0.3, -0.7, 0.9], 0.4);
        let scores = [
            PairScores { x: 0.3, x_prime: -1.2 },
            PairScores { x: -0.4, x_prime: 2.0 },
            PairScores { x: 1.1, x_prime: 0.6 },
        ];
        let fwd: f64 = data
            .pairs
            .iter()
            .zip(&scores)
            .map(|(p, s)| pair_loss(p, s.x, s.x_prime, 0.4, LossKind::Logistic).unwrap())
            .sum::<f64>()
            / 3.0;
        let rev: f64 = data
            .pairs
            .iter()
            .zip(&scores)
            .map(|(p, s)| {
                pair_loss(&p.swapped(), s.x_prime, s.x, 0.4, LossKind::Logistic).unwrap()
            })
            .sum::<f64>()
            / 3.0;
        let at1 = confdiff_weighted_risk(&data, &scores, LossKind::Logistic, 1.0).unwrap();
        let at0 = confdiff_weighted_risk(&data, &scores, LossKind::Logistic, 0.0).unwrap();
        assert!((at1 - fwd).abs() < 1e-15);
        assert!((at0 - rev).abs() < 1e-15);
        assert!(confdiff_weighted_risk(&data, &scores, LossKind::Logistic, 1.2).is_err());
    }

    #[test]
    fn weighted_half_is_bitwise_unbiased() {
        let data = dataset(&[0.25, -0.5, 0.875, 0.0], 0.3);
        let scores = [
            PairScores { x: 0.5, x_prime: -0.25 },
            PairScores { x: 1.5, x_prime: 0.125 },
            PairScores { x: -2.0, x_prime: 3.0 },
            PairScores { x: 0.1, x_prime: -0.7 },
        ];
        let u = confdiff_unbiased_risk(&data, &scores, LossKind::Logistic).unwrap();
        let w = confdiff_weighted_risk(&data, &scores, LossKind::Logistic, 0.5).unwrap();
        assert_eq!(u.to_bits(), w.to_bits());
    }

    #[test]
    fn decomposition_fully_symmetric_case() {
        let data = dataset(&[0.0, 0.0], 0.5);
        let t =
            confdiff_term_decomposition(&data, &zero_scores(2), LossKind::Logistic).unwrap();
        for v in [t.pos_first, t.neg_second, t.pos_second, t.neg_first] {
            assert!((v - LN2 / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn corrected_identity_is_bitwise_unbiased() {
        let data = dataset(&[0.9, -0.3, 0.4], 0.2);
        let scores = [
            PairScores { x: 0.4, x_prime: -0.9 },
            PairScores { x: -1.3, x_prime: 0.2 },
            PairScores { x: 2.2, x_prime: 1.0 },
        ];
        let u = confdiff_unbiased_risk(&data, &scores, LossKind::Logistic).unwrap();
        let c =
            confdiff_corrected_risk(&data, &scores, LossKind::Logistic, CorrectionKind::Identity)
                .unwrap();
        assert_eq!(u.to_bits(), c.to_bits());
    }

    #[test]
    fn corrected_dominates_on_negative_terms() {
        // Large positive confidences with a small prior drive the first
        // decomposition term negative.
        let data = dataset(&[0.9, 0.95, 0.85], 0.2);
        let scores = zero_scores(3);
        let t = confdiff_term_decomposition(&data, &scores, LossKind::Logistic).unwrap();
        assert!(t.pos_first < 0.0);
        let u = confdiff_unbiased_risk(&data, &scores, LossKind::Logistic).unwrap();
        for correction in [CorrectionKind::Relu, CorrectionKind::Abs] {
            let c = confdiff_corrected_risk(&data, &scores, LossKind::Logistic, correction)
                .unwrap();
            assert!(c > u);
            assert!(c >= 0.0);
        }
    }

    #[test]
    fn pcomp_symmetric_zero_case() {
        let pairs = vec![
            PcompPair { x: vec![0.0], x_prime: vec![0.0] },
            PcompPair { x: vec![0.0], x_prime: vec![0.0] },
        ];
        let v =
            pcomp_unbiased_risk(&pairs, &zero_scores(2), 0.5, LossKind::Logistic).unwrap();
        assert!((v - LN2).abs() < 1e-15);
    }

    #[test]
    fn pcomp_rejects_degenerate_prior() {
        let pairs = vec![PcompPair { x: vec![0.0], x_prime: vec![0.0] }];
        assert!(pcomp_unbiased_risk(&pairs, &zero_scores(1), 1.0, LossKind::Logistic).is_err());
    }

    #[test]
    fn soft_label_hard_collapse_and_range_check() {
        let ones = vec![
            SoftLabeledExample { x: vec![0.0], r: 1.0 },
            SoftLabeledExample { x: vec![0.0], r: 1.0 },
        ];
        let scores = [0.7, -0.3];
        let v = soft_label_risk(&ones, &scores, LossKind::Logistic).unwrap();
        let supervised: f64 = scores
            .iter()
            .map(|&s| crate::loss::loss(LossKind::Logistic, s, Label::Pos).unwrap())
            .sum::<f64>()
            / 2.0;
        assert!((v - supervised).abs() < 1e-15);

        let half = vec![SoftLabeledExample { x: vec![0.0], r: 0.5 }];
        let v = soft_label_risk(&half, &[0.0], LossKind::Logistic).unwrap();
        assert!((v - LN2).abs() < 1e-15);

        let bad = vec![SoftLabeledExample { x: vec![0.0], r: 1.2 }];
        assert!(soft_label_risk(&bad, &[0.0], LossKind::Logistic).is_err());
    }

    #[test]
    fn supervised_zero_scores_and_zero_one() {
        let examples = vec![
            LabeledExample { x: vec![0.0], y: Label::Pos },
            LabeledExample { x: vec![0.0], y: Label::Neg },
        ];
        let v = supervised_risk(&examples, &[0.0, 0.0], LossKind::Logistic).unwrap();
        assert!((v - LN2).abs() < 1e-15);
        // Correct signs give zero empirical zero-one risk.
        let v = supervised_risk(&examples, &[2.0, -2.0], LossKind::ZeroOne).unwrap();
        assert_eq!(v, 0.0);
    }
}
