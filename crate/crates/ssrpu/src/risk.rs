//! Batch risk estimators over one-vs-rest score columns.
//!
//! All three estimators share one skeleton. Per class `i` with gold prior
//! `π`, unlabeled-pool prior `π_u`, labeled-positive rows `P`, and unlabeled
//! rows `U`, the class risk is
//!
//! ```text
//! γ·π·mean_P ℓ(f_i, +1)  +  bracket(B·mean_U ℓ(f_i, −1) − C·mean_P ℓ(f_i, −1))
//! ```
//!
//! where the estimators differ only in the negative-side coefficients:
//!
//! | estimator | B                 | C                   | bracket   |
//! |-----------|-------------------|---------------------|-----------|
//! | `pn`      | `1 − π`           | `0`                 | identity  |
//! | `nnpu`    | `1`               | `π`                 | `max(0,·)`|
//! | `nnspu`   | `(1−π)/(1−π_u)`   | `π_u(1−π)/(1−π_u)`  | `max(0,·)`|
//!
//! `pn` treats the unlabeled pool as negatives, which is exactly the naive
//! baseline that incomplete labeling punishes. `nnpu` corrects for positives
//! hidden in the unlabeled pool under the assumption that the pool looks like
//! the marginal distribution; `nnspu` replaces that assumption with the
//! actual unlabeled-pool prior, and reduces to `pn` when labeling is complete
//! (`π_u = 0`) and to `nnpu` when no labels were observed (`π_u = π`).
//!
//! The `max(0, ·)` bracket guards against the negative-risk overfitting mode
//! of unbiased PU estimation: when a bracket goes negative its gradient is
//! dropped entirely for that batch and class. The optional class weight
//! `γ = √((1−π)/π)` scales only the positive term.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{config_err, data_err, Error, Result};
use crate::loss::{LossSpec, Sign};
use crate::prior::{class_weight, PriorShiftConfig};

/// Which correction the batch risk applies to the unlabeled pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskEstimator {
    /// Unlabeled rows treated as negatives, no correction.
    #[serde(rename = "pn")]
    Pn,
    /// Non-negative PU correction assuming the unlabeled pool matches the
    /// marginal distribution.
    #[serde(rename = "nnpu")]
    NnPu,
    /// Non-negative PU correction under the shifted unlabeled-pool prior.
    #[serde(rename = "nnspu")]
    NnSpu,
}

impl fmt::Display for RiskEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskEstimator::Pn => "pn",
            RiskEstimator::NnPu => "nnpu",
            RiskEstimator::NnSpu => "nnspu",
        })
    }
}

impl FromStr for RiskEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pn" => Ok(RiskEstimator::Pn),
            "nnpu" => Ok(RiskEstimator::NnPu),
            "nnspu" => Ok(RiskEstimator::NnSpu),
            other => Err(config_err!(
                "unknown risk estimator {other:?}; expected pn, nnpu, or nnspu"
            )),
        }
    }
}

/// Full specification of the training objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSpec {
    pub estimator: RiskEstimator,
    pub loss: LossSpec,
    /// Scale each class's positive term by `√((1−π)/π)`.
    pub class_weighting: bool,
}

/// Per-class decomposition of one batch risk evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskBreakdown {
    pub total: f64,
    /// `γ·π·mean_P ℓ(f_i, +1)` per class; zero when the batch has no
    /// labeled positives for the class.
    pub per_class_positive_term: Vec<f64>,
    /// `B·mean_U − C·mean_P` per class, before the non-negativity bracket.
    pub per_class_negative_term_raw: Vec<f64>,
    /// Whether the bracket clipped the class's negative term to zero.
    pub clamp_active: Vec<bool>,
}

/// Evaluate the batch risk and its gradient with respect to every score.
///
/// `scores` has one none-score column followed by one column per class;
/// `observed` carries the labeled-positive flags. Returns the per-class
/// breakdown and an `n × (K+1)` gradient array. Rows labeled for a class
/// enter its positive mean, all other rows enter its unlabeled mean. A class
/// with no unlabeled rows in the batch is a data error; a class with no
/// labeled rows simply contributes no positive term. When a bracket is
/// clamped, its gradient is dropped along with its value.
pub fn assemble_risk(
    scores: ArrayView2<'_, f64>,
    observed: ArrayView2<'_, bool>,
    priors: &PriorShiftConfig,
    spec: &RiskSpec,
) -> Result<(RiskBreakdown, Array2<f64>)> {
    let n = observed.nrows();
    let k = observed.ncols();
    if n == 0 {
        return Err(config_err!("risk needs at least one instance"));
    }
    if scores.nrows() != n || scores.ncols() != k + 1 {
        return Err(config_err!(
            "scores {:?} do not match {n} instances with {k} classes",
            scores.dim()
        ));
    }
    if priors.class_count() != k {
        return Err(config_err!(
            "prior config has {} classes, batch has {k}",
            priors.class_count()
        ));
    }

    let loss = &spec.loss;
    let mut grad = Array2::zeros((n, k + 1));
    let mut breakdown = RiskBreakdown {
        total: 0.0,
        per_class_positive_term: Vec::with_capacity(k),
        per_class_negative_term_raw: Vec::with_capacity(k),
        clamp_active: Vec::with_capacity(k),
    };

    for class in 0..k {
        let pi = priors.pi()[class];
        let pi_u = priors.pi_unlabeled()[class];
        let gamma = if spec.class_weighting {
            class_weight(pi)?
        } else {
            1.0
        };
        let a = gamma * pi;
        let (b, c, bracketed) = match spec.estimator {
            RiskEstimator::Pn => (1.0 - pi, 0.0, false),
            RiskEstimator::NnPu => (1.0, pi, true),
            RiskEstimator::NnSpu => (
                (1.0 - pi) / (1.0 - pi_u),
                (pi_u - pi_u * pi) / (1.0 - pi_u),
                true,
            ),
        };

        let n_p = (0..n).filter(|&row| observed[(row, class)]).count();
        let n_u = n - n_p;
        if n_u == 0 {
            return Err(data_err!(
                "class {class}: batch has no unlabeled instances, nothing to estimate from"
            ));
        }

        let mut pos_mean = 0.0;
        let mut pos_as_neg_mean = 0.0;
        let mut unl_mean = 0.0;
        for row in 0..n {
            let f = scores[(row, class + 1)];
            let f_none = scores[(row, 0)];
            if observed[(row, class)] {
                pos_mean += loss.eval(f, f_none, Sign::Pos).value / n_p as f64;
                pos_as_neg_mean += loss.eval(f, f_none, Sign::Neg).value / n_p as f64;
            } else {
                unl_mean += loss.eval(f, f_none, Sign::Neg).value / n_u as f64;
            }
        }

        let positive_term = if n_p == 0 { 0.0 } else { a * pos_mean };
        let raw = if n_p == 0 {
            b * unl_mean
        } else {
            b * unl_mean - c * pos_as_neg_mean
        };
        let clamped = bracketed && raw < 0.0;
        breakdown.total += positive_term + if clamped { 0.0 } else { raw };
        breakdown.per_class_positive_term.push(positive_term);
        breakdown.per_class_negative_term_raw.push(raw);
        breakdown.clamp_active.push(clamped);

        for row in 0..n {
            let f = scores[(row, class + 1)];
            let f_none = scores[(row, 0)];
            if observed[(row, class)] {
                let pos = loss.eval(f, f_none, Sign::Pos);
                let scale = a / n_p as f64;
                grad[(row, class + 1)] += scale * pos.grad_score;
                grad[(row, 0)] += scale * pos.grad_none;
                if !clamped && c != 0.0 {
                    let neg = loss.eval(f, f_none, Sign::Neg);
                    let scale = c / n_p as f64;
                    grad[(row, class + 1)] -= scale * neg.grad_score;
                    grad[(row, 0)] -= scale * neg.grad_none;
                }
            } else if !clamped {
                let neg = loss.eval(f, f_none, Sign::Neg);
                let scale = b / n_u as f64;
                grad[(row, class + 1)] += scale * neg.grad_score;
                grad[(row, 0)] += scale * neg.grad_none;
            }
        }
    }
    Ok((breakdown, grad))
}
