//! Multi-label learning from positive and unlabeled data under a shifted
//! unlabeled-pool prior, with a trainable none-of-the-above score.
//!
//! The setting: each instance carries up to `K` binary labels, annotators
//! only ever mark positives, and they miss some. Observed labels are thus
//! incomplete but never wrong, and the unlabeled pool for a class is a
//! mixture of true negatives and missed positives whose positive fraction
//! `π_u = (π − π_labeled) / (1 − π_labeled)` differs from the gold prior π.
//! Training against observed labels as if they were complete (the `pn`
//! estimator) systematically suppresses recall; the `nnspu` estimator
//! reweights the unlabeled pool by `π_u` to recover an unbiased risk, clamped
//! at zero per class to prevent the negative-risk overfitting failure of
//! unbiased PU estimators.
//!
//! Scores are one-vs-rest with an extra none-of-the-above column; ranking
//! losses compare each class score against the none score with a margin,
//! which calibrates the decision boundary at the class posterior 1/2 when the
//! margin is nonzero. The [`oracle`] module recomputes every population
//! quantity from first principles on finite discrete distributions, so the
//! estimators are tested against exact ground truth instead of against
//! themselves.
//!
//! Modules:
//!
//! * [`loss`]: squared and logistic losses, plain and ranking forms.
//! * [`prior`]: prior derivation and the labeled-to-gold shift.
//! * [`dataset`]: observed-label containers with the never-wrong invariant.
//! * [`risk`]: the `pn`, `nnpu`, and `nnspu` batch estimators.
//! * [`model`]: linear and one-hidden-layer scorers, training loop.
//! * [`oracle`]: brute-force population risks, Bayes gaps, grid minimizers.
//! * [`datagen`]: synthetic benchmark generator with controlled censoring.
//! * [`io`]: dataset serialization.
//! * [`metrics`]: micro precision/recall/F1 and the none-aware ranking error.
//! * [`checks`]: self-contained verification suite behind the `check`
//!   subcommand.
//! * [`experiment`]: end-to-end configs, runs, and sweeps behind the CLI.
//!
//! Runnable walkthroughs live in `examples/`; each one prints what it is
//! demonstrating and asserts the claim it makes:
//!
//! * `prior_shift`: how censoring moves the unlabeled-pool prior.
//! * `loss_functions`: loss surfaces, gradients, and the margin's role.
//! * `risk_estimators`: the three estimators on one batch, clamp included.
//! * `generate_dataset`: synthetic data with known priors, saved to JSONL.
//! * `train_and_eval`: full training run with metrics against gold labels.
//! * `theorem_checks`: the population-risk identity and Bayes-gap checks.
//! * `pn_vs_ssrpu`: the recall collapse of naive training, side by side.
//! * `sweeps`: a small estimator-by-loss grid written to CSV.

pub mod checks;
pub mod dataset;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod prior;
pub mod risk;

pub use error::{Error, Result};
