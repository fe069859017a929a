//! Binary-class loss functions, their derivatives, and the risk-correction
//! functions that wrap estimator terms.

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    /// The label as a sign, `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    /// Label predicted for a real-valued score, with `sign(0) := +1`.
    #[inline]
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

/// Loss function used to score a real-valued prediction against a label.
///
/// `Logistic` is the training surrogate; `ZeroOne` is evaluation-only and
/// has no gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LossKind {
    Logistic,
    ZeroOne,
}

/// Correction function applied to estimator terms to keep empirical risk
/// non-negative. All three variants are 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CorrectionKind {
    Identity,
    Relu,
    Abs,
}

/// Evaluates the loss of score `z` against label `y`.
///
/// The logistic branch computes `ln(1 + exp(-y*z))` in the log1p form that
/// stays finite for any representable score. The zero-one branch counts a
/// mistake, with `sign(0) := +1`.
pub fn loss(kind: LossKind, z: f64, y: Label) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::invalid("loss: score must be finite"));
    }
    Ok(match kind {
        LossKind::Logistic => {
            let m = -y.sign() * z;
            if m > 0.0 {
                m + libm::log1p(libm::exp(-m))
            } else {
                libm::log1p(libm::exp(m))
            }
        }
        LossKind::ZeroOne => {
            if Label::from_score(z) == y {
                0.0
            } else {
                1.0
            }
        }
    })
}

/// Derivative of the loss with respect to the score.
///
/// Only the logistic loss is differentiable; the zero-one loss returns an
/// `UnsupportedGradient` error.
pub fn loss_grad(kind: LossKind, z: f64, y: Label) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::invalid("loss_grad: score must be finite"));
    }
    match kind {
        // d/dz ln(1 + exp(-y*z)) = -y * sigmoid(-y*z) = -y / (1 + exp(y*z))
        LossKind::Logistic => {
            let s = y.sign();
            Ok(-s / (1.0 + libm::exp(s * z)))
        }
        LossKind::ZeroOne => Err(Error::UnsupportedGradient(
            "zero-one loss has no gradient",
        )),
    }
}

/// Applies the risk-correction function.
#[inline]
pub fn correct(kind: CorrectionKind, z: f64) -> f64 {
    match kind {
        CorrectionKind::Identity => z,
        CorrectionKind::Relu => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        CorrectionKind::Abs => z.abs(),
    }
}

/// Derivative of the correction function, with the subgradient at the kink
/// fixed to 0.
#[inline]
pub fn correct_grad(kind: CorrectionKind, z: f64) -> f64 {
    match kind {
        CorrectionKind::Identity => 1.0,
        CorrectionKind::Relu => {
            if z > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        CorrectionKind::Abs => {
            if z > 0.0 {
                1.0
            } else if z < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = core::f64::consts::LN_2;

    #[test]
    fn logistic_at_origin_is_ln2() {
        assert_eq!(loss(LossKind::Logistic, 0.0, Label::Pos).unwrap(), LN2);
        assert_eq!(loss(LossKind::Logistic, 0.0, Label::Neg).unwrap(), LN2);
    }

    #[test]
    fn logistic_margin_symmetry() {
        let a = loss(LossKind::Logistic, 1.7, Label::Pos).unwrap();
        let b = loss(LossKind::Logistic, -1.7, Label::Neg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn logistic_finite_for_large_scores() {
        for &z in &[-1e6, -750.0, -30.5, 30.5, 750.0, 1e6] {
            let l = loss(LossKind::Logistic, z, Label::Pos).unwrap();
            assert!(l.is_finite() && l >= 0.0, "loss({z}) = {l}");
        }
        // Deep in the misclassified tail the stable form is linear in z.
        let l = loss(LossKind::Logistic, -1e6, Label::Pos).unwrap();
        assert_eq!(l, 1e6);
    }

    #[test]
    fn zero_one_counts_mistakes() {
        assert_eq!(loss(LossKind::ZeroOne, -0.2, Label::Pos).unwrap(), 1.0);
        assert_eq!(loss(LossKind::ZeroOne, 0.3, Label::Pos).unwrap(), 0.0);
        // sign(0) := +1
        assert_eq!(loss(LossKind::ZeroOne, 0.0, Label::Pos).unwrap(), 0.0);
        assert_eq!(loss(LossKind::ZeroOne, 0.0, Label::Neg).unwrap(), 1.0);
    }

    #[test]
    fn non_finite_score_rejected() {
        assert!(loss(LossKind::Logistic, f64::NAN, Label::Pos).is_err());
        assert!(loss(LossKind::Logistic, f64::INFINITY, Label::Pos).is_err());
        assert!(loss_grad(LossKind::Logistic, f64::NAN, Label::Pos).is_err());
    }

    #[test]
    fn logistic_grad_at_origin() {
        assert_eq!(loss_grad(LossKind::Logistic, 0.0, Label::Pos).unwrap(), -0.5);
        assert_eq!(loss_grad(LossKind::Logistic, 0.0, Label::Neg).unwrap(), 0.5);
    }

    #[test]
    fn zero_one_grad_unsupported() {
        assert!(matches!(
            loss_grad(LossKind::ZeroOne, 0.1, Label::Pos),
            Err(Error::UnsupportedGradient(_))
        ));
    }

    #[test]
    fn correction_definitions() {
        assert_eq!(correct(CorrectionKind::Relu, -0.3), 0.0);
        assert_eq!(correct(CorrectionKind::Abs, -0.3), 0.3);
        assert_eq!(correct(CorrectionKind::Identity, 0.42), 0.42);
    }

    #[test]
    fn correction_subgradients() {
        assert_eq!(correct_grad(CorrectionKind::Relu, 0.0), 0.0);
        assert_eq!(correct_grad(CorrectionKind::Abs, -2.0), -1.0);
        assert_eq!(correct_grad(CorrectionKind::Abs, 0.0), 0.0);
        assert_eq!(correct_grad(CorrectionKind::Identity, -5.0), 1.0);
    }
}
