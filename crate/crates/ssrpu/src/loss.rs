//! Margin losses on binary scores, in plain and none-class ranking forms.
//!
//! Every loss here scores a single (score, label) pair; risk estimators
//! combine them over batches. Two families are provided:
//!
//! * **squared**: `(y·f − 1)² / 4`, a smooth proper loss whose minimizer
//!   recovers the class-posterior sign.
//! * **log-sigmoid**: `−log σ(y·f)`, the logistic loss evaluated through a
//!   numerically stable softplus.
//!
//! Each family also comes in a *ranking* form that scores the gap between a
//! class score `f` and the shared none-class score `f₀` instead of the raw
//! score, so the decision threshold is learned per instance. The squared
//! ranking form takes a margin `m` and reads `(y·(f − f₀) − m)² / 4`; a zero
//! margin makes both labels pull the gap toward zero and destroys class
//! separation, so the [`LossSpec`] constructor rejects it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

/// Default margin for the squared ranking loss.
pub const DEFAULT_MARGIN: f64 = 0.25;

/// Binary label, `+1` or `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    /// The label as a float factor, `+1.0` or `−1.0`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    /// `true` maps to `Pos`, `false` to `Neg`.
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// Numerically stable `log(1 + exp(x))`.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Numerically stable logistic sigmoid.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Squared loss `(y·f − 1)² / 4`.
pub fn squared_loss(f: f64, y: Sign) -> f64 {
    let r = y.value() * f - 1.0;
    r * r / 4.0
}

/// Derivative of [`squared_loss`] with respect to `f`: `y·(y·f − 1) / 2`.
pub fn squared_loss_grad(f: f64, y: Sign) -> f64 {
    y.value() * (y.value() * f - 1.0) / 2.0
}

/// Squared ranking loss `(y·(f − f₀) − m)² / 4` on the gap to the none score.
pub fn squared_ranking_loss(f: f64, f_none: f64, y: Sign, margin: f64) -> f64 {
    let r = y.value() * (f - f_none) - margin;
    r * r / 4.0
}

/// Derivatives of [`squared_ranking_loss`] with respect to `(f, f₀)`.
///
/// The gap enters the loss antisymmetrically, so the none-score derivative is
/// always the negation of the class-score derivative.
pub fn squared_ranking_grads(f: f64, f_none: f64, y: Sign, margin: f64) -> (f64, f64) {
    let g = y.value() * (y.value() * (f - f_none) - margin) / 2.0;
    (g, -g)
}

/// Logistic loss `−log σ(y·f)`, computed as `softplus(−y·f)`.
pub fn log_sigmoid_loss(f: f64, y: Sign) -> f64 {
    softplus(-y.value() * f)
}

/// Derivative of [`log_sigmoid_loss`] with respect to `f`: `−y·σ(−y·f)`.
pub fn log_sigmoid_loss_grad(f: f64, y: Sign) -> f64 {
    -y.value() * sigmoid(-y.value() * f)
}

/// Logistic ranking loss `−log σ(y·(f − f₀))` on the gap to the none score.
pub fn log_sigmoid_ranking_loss(f: f64, f_none: f64, y: Sign) -> f64 {
    softplus(-y.value() * (f - f_none))
}

/// Derivatives of [`log_sigmoid_ranking_loss`] with respect to `(f, f₀)`.
pub fn log_sigmoid_ranking_grads(f: f64, f_none: f64, y: Sign) -> (f64, f64) {
    let g = -y.value() * sigmoid(-y.value() * (f - f_none));
    (g, -g)
}

/// Loss family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFamily {
    Squared,
    LogSigmoid,
}

impl fmt::Display for LossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossFamily::Squared => write!(f, "squared"),
            LossFamily::LogSigmoid => write!(f, "log-sigmoid"),
        }
    }
}

impl FromStr for LossFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossFamily::Squared),
            "log-sigmoid" | "log_sigmoid" => Ok(LossFamily::LogSigmoid),
            other => Err(config_err!(
                "unknown loss family {other:?}; expected \"squared\" or \"log-sigmoid\""
            )),
        }
    }
}

/// Whether the loss scores raw class scores or gaps to the none class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossForm {
    Plain,
    Ranking,
}

impl fmt::Display for LossForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossForm::Plain => write!(f, "plain"),
            LossForm::Ranking => write!(f, "ranking"),
        }
    }
}

impl FromStr for LossForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(LossForm::Plain),
            "ranking" => Ok(LossForm::Ranking),
            other => Err(config_err!(
                "unknown loss form {other:?}; expected \"plain\" or \"ranking\""
            )),
        }
    }
}

/// Loss value with its derivatives at one (score, none-score, label) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEval {
    pub value: f64,
    /// Derivative with respect to the class score.
    pub grad_score: f64,
    /// Derivative with respect to the none-class score (zero for plain form).
    pub grad_none: f64,
}

/// A validated (family, form, margin) combination.
///
/// The margin only enters the squared ranking loss, but it is stored for all
/// specs so a spec echoes back the full configuration it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    family: LossFamily,
    form: LossForm,
    margin: f64,
}

impl LossSpec {
    /// Plain-form spec; the margin is irrelevant and kept at the default.
    pub fn plain(family: LossFamily) -> Self {
        LossSpec {
            family,
            form: LossForm::Plain,
            margin: DEFAULT_MARGIN,
        }
    }

    /// Ranking-form spec. Rejects a zero or non-finite margin: with margin 0
    /// the squared ranking loss degenerates to `(f − f₀)² / 4` for both
    /// labels and the learned scores lose all class separation.
    pub fn ranking(family: LossFamily, margin: f64) -> Result<Self> {
        if !margin.is_finite() || margin == 0.0 {
            return Err(config_err!(
                "ranking margin must be finite and nonzero, got {margin}"
            ));
        }
        Ok(LossSpec {
            family,
            form: LossForm::Ranking,
            margin,
        })
    }

    /// Ranking-form spec without the nonzero-margin guard.
    ///
    /// Only meant for diagnostics that deliberately demonstrate the margin-0
    /// degeneracy; training with a zero margin collapses all predictions.
    pub fn ranking_unchecked(family: LossFamily, margin: f64) -> Self {
        LossSpec {
            family,
            form: LossForm::Ranking,
            margin,
        }
    }

    pub fn family(&self) -> LossFamily {
        self.family
    }

    pub fn form(&self) -> LossForm {
        self.form
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Evaluate the loss and its score derivatives at one labeled score.
    ///
    /// `none_score` is the shared none-class score of the same instance; it
    /// is ignored by plain-form losses, whose `grad_none` is zero.
    pub fn eval(&self, score: f64, none_score: f64, y: Sign) -> LossEval {
        match (self.family, self.form) {
            (LossFamily::Squared, LossForm::Plain) => LossEval {
                value: squared_loss(score, y),
                grad_score: squared_loss_grad(score, y),
                grad_none: 0.0,
            },
            (LossFamily::Squared, LossForm::Ranking) => {
                let value = squared_ranking_loss(score, none_score, y, self.margin);
                let (grad_score, grad_none) =
                    squared_ranking_grads(score, none_score, y, self.margin);
                LossEval {
                    value,
                    grad_score,
                    grad_none,
                }
            }
            (LossFamily::LogSigmoid, LossForm::Plain) => LossEval {
                value: log_sigmoid_loss(score, y),
                grad_score: log_sigmoid_loss_grad(score, y),
                grad_none: 0.0,
            },
            (LossFamily::LogSigmoid, LossForm::Ranking) => {
                let value = log_sigmoid_ranking_loss(score, none_score, y);
                let (grad_score, grad_none) = log_sigmoid_ranking_grads(score, none_score, y);
                LossEval {
                    value,
                    grad_score,
                    grad_none,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite difference of a scalar function.
    fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn squared_loss_matches_hand_values() {
        assert_eq!(squared_loss(0.5, Sign::Pos), 0.0625);
        assert_eq!(squared_loss_grad(0.5, Sign::Pos), -0.25);
        assert_eq!(squared_loss(1.0, Sign::Pos), 0.0);
        assert_eq!(squared_loss(-1.0, Sign::Neg), 0.0);
        assert_eq!(squared_loss(0.0, Sign::Pos), 0.25);
        assert_eq!(squared_loss(0.0, Sign::Neg), 0.25);
    }

    #[test]
    fn squared_ranking_loss_matches_hand_values() {
        let v = squared_ranking_loss(0.6, 0.2, Sign::Pos, 0.25);
        assert!((v - 0.005625).abs() < 1e-15);
        let (gf, g0) = squared_ranking_grads(0.6, 0.2, Sign::Pos, 0.25);
        assert!((gf - 0.075).abs() < 1e-15);
        assert_eq!(g0, -gf);
    }

    #[test]
    fn squared_ranking_with_margin_one_and_zero_none_equals_plain() {
        for &f in &[-2.0, -0.5, 0.0, 0.3, 1.7] {
            for &y in &[Sign::Pos, Sign::Neg] {
                assert_eq!(squared_ranking_loss(f, 0.0, y, 1.0), squared_loss(f, y));
                assert_eq!(squared_ranking_grads(f, 0.0, y, 1.0).0, squared_loss_grad(f, y));
            }
        }
    }

    #[test]
    fn log_sigmoid_loss_matches_softplus_values() {
        // softplus(2) and softplus(1), written out to full precision.
        assert!((log_sigmoid_loss(-2.0, Sign::Pos) - 2.126_928_011_042_972_7).abs() < 1e-15);
        assert!((log_sigmoid_loss(-2.0, Sign::Pos) - 2.126928).abs() < 1e-6);
        assert!((log_sigmoid_ranking_loss(1.0, 0.0, Sign::Neg) - 1.313_261_687_518_222_8).abs() < 1e-15);
        assert!((log_sigmoid_ranking_loss(1.0, 0.0, Sign::Neg) - 1.313262).abs() < 1e-6);
    }

    #[test]
    fn log_sigmoid_loss_is_stable_at_extreme_scores() {
        let big = log_sigmoid_loss(-1000.0, Sign::Pos);
        assert!(big.is_finite());
        assert_eq!(big, 1000.0);
        let small = log_sigmoid_loss(1000.0, Sign::Pos);
        assert!((0.0..1e-300).contains(&small));
        assert!(log_sigmoid_loss_grad(-1000.0, Sign::Pos).is_finite());
    }

    #[test]
    fn losses_are_symmetric_under_joint_sign_flip() {
        for &f in &[-3.0, -0.7, 0.0, 0.2, 2.5] {
            assert_eq!(squared_loss(f, Sign::Pos), squared_loss(-f, Sign::Neg));
            assert_eq!(log_sigmoid_loss(f, Sign::Pos), log_sigmoid_loss(-f, Sign::Neg));
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for &f in &[-1.3, -0.2, 0.4, 1.9] {
            for &y in &[Sign::Pos, Sign::Neg] {
                let fd = central_diff(|x| squared_loss(x, y), f);
                assert!((squared_loss_grad(f, y) - fd).abs() < 1e-8);

                let fd = central_diff(|x| log_sigmoid_loss(x, y), f);
                assert!((log_sigmoid_loss_grad(f, y) - fd).abs() < 1e-8);

                let fd = central_diff(|x| squared_ranking_loss(x, 0.3, y, 0.25), f);
                assert!((squared_ranking_grads(f, 0.3, y, 0.25).0 - fd).abs() < 1e-8);

                let fd = central_diff(|x| squared_ranking_loss(f, x, y, 0.25), 0.3);
                assert!((squared_ranking_grads(f, 0.3, y, 0.25).1 - fd).abs() < 1e-8);

                let fd = central_diff(|x| log_sigmoid_ranking_loss(x, 0.3, y), f);
                assert!((log_sigmoid_ranking_grads(f, 0.3, y).0 - fd).abs() < 1e-8);

                let fd = central_diff(|x| log_sigmoid_ranking_loss(f, x, y), 0.3);
                assert!((log_sigmoid_ranking_grads(f, 0.3, y).1 - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn ranking_spec_rejects_zero_or_non_finite_margin() {
        assert!(LossSpec::ranking(LossFamily::Squared, 0.0).is_err());
        assert!(LossSpec::ranking(LossFamily::Squared, f64::NAN).is_err());
        assert!(LossSpec::ranking(LossFamily::Squared, f64::INFINITY).is_err());
        assert!(LossSpec::ranking(LossFamily::Squared, -0.5).is_ok());
        assert_eq!(LossSpec::ranking_unchecked(LossFamily::Squared, 0.0).margin(), 0.0);
    }

    #[test]
    fn eval_dispatch_agrees_with_free_functions() {
        let spec = LossSpec::ranking(LossFamily::Squared, 0.25).unwrap();
        let e = spec.eval(0.6, 0.2, Sign::Pos);
        assert_eq!(e.value, squared_ranking_loss(0.6, 0.2, Sign::Pos, 0.25));
        assert_eq!(e.grad_none, -e.grad_score);

        let spec = LossSpec::plain(LossFamily::LogSigmoid);
        let e = spec.eval(-2.0, 9.9, Sign::Pos);
        assert_eq!(e.value, log_sigmoid_loss(-2.0, Sign::Pos));
        assert_eq!(e.grad_none, 0.0);
    }

    #[test]
    fn family_and_form_round_trip_through_strings() {
        for family in [LossFamily::Squared, LossFamily::LogSigmoid] {
            assert_eq!(family.to_string().parse::<LossFamily>().unwrap(), family);
        }
        for form in [LossForm::Plain, LossForm::Ranking] {
            assert_eq!(form.to_string().parse::<LossForm>().unwrap(), form);
        }
        assert!("hinge".parse::<LossFamily>().is_err());
    }
}
