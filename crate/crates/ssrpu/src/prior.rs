//! Class priors under incomplete labeling and the labeled-to-unlabeled shift.
//!
//! With per-class one-vs-all reduction, three priors matter for class `i`:
//!
//! * `π_i` — probability that an instance is a gold positive;
//! * `π_labeled,i` — probability that it is *observed* positive, which under
//!   incomplete labeling can only undercount (`π_labeled,i ≤ π_i`);
//! * `π_u,i` — probability that an instance drawn from the unlabeled pool is
//!   a gold positive, `π_u,i = (π_i − π_labeled,i) / (1 − π_labeled,i)`.
//!
//! `π_i` is unknown in practice and is estimated as a multiple of the
//! observed labeled prior, clamped away from 1. [`build_prior_config`]
//! performs that estimation for every class and precomputes the shift.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Prior of the unlabeled pool: `(π − π_labeled) / (1 − π_labeled)`.
///
/// Requires `0 < π < 1` and `0 ≤ π_labeled ≤ π`. The result is 0 when every
/// positive is labeled and grows to `π` when nothing is labeled.
pub fn derive_unlabeled_prior(pi: f64, pi_labeled: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(config_err!("class prior must lie in (0, 1), got {pi}"));
    }
    if !(0.0..=pi).contains(&pi_labeled) {
        return Err(config_err!(
            "labeled prior must lie in [0, pi]; got pi_labeled={pi_labeled}, pi={pi}"
        ));
    }
    Ok((pi - pi_labeled) / (1.0 - pi_labeled))
}

/// Imbalance weight for the positive risk term: `√((1 − π) / π)`.
///
/// Rare classes get a proportionally larger positive weight so their handful
/// of labeled positives is not drowned out by the negative/unlabeled mass.
pub fn class_weight(pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(config_err!("class prior must lie in (0, 1), got {pi}"));
    }
    Ok(((1.0 - pi) / pi).sqrt())
}

/// Per-class priors with the labeled-to-unlabeled shift precomputed.
///
/// Invariants, checked at construction: every `π_i ∈ (0, 1)`,
/// `π_labeled,i ≤ π_i`, and `π_u,i` consistent with the other two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorShiftConfig {
    pi: Vec<f64>,
    pi_labeled: Vec<f64>,
    pi_unlabeled: Vec<f64>,
    multiplier: f64,
    epsilon: f64,
}

impl PriorShiftConfig {
    /// Build from explicit `π` and `π_labeled` vectors, deriving `π_u`.
    ///
    /// `multiplier` and `epsilon` are recorded as provenance only; the prior
    /// values are taken as given. Used by tests and diagnostics that need
    /// full control over the priors.
    pub fn from_parts(
        pi: Vec<f64>,
        pi_labeled: Vec<f64>,
        multiplier: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if pi.is_empty() {
            return Err(config_err!("prior config needs at least one class"));
        }
        if pi.len() != pi_labeled.len() {
            return Err(config_err!(
                "prior vectors disagree on class count: {} vs {}",
                pi.len(),
                pi_labeled.len()
            ));
        }
        let mut pi_unlabeled = Vec::with_capacity(pi.len());
        for (class, (&p, &pl)) in pi.iter().zip(&pi_labeled).enumerate() {
            let pu = derive_unlabeled_prior(p, pl)
                .map_err(|e| config_err!("class {class}: {e}"))?;
            pi_unlabeled.push(pu);
        }
        Ok(PriorShiftConfig {
            pi,
            pi_labeled,
            pi_unlabeled,
            multiplier,
            epsilon,
        })
    }

    pub fn class_count(&self) -> usize {
        self.pi.len()
    }

    /// Estimated gold priors `π_i`.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Observed labeled priors `π_labeled,i`.
    pub fn pi_labeled(&self) -> &[f64] {
        &self.pi_labeled
    }

    /// Unlabeled-pool priors `π_u,i`.
    pub fn pi_unlabeled(&self) -> &[f64] {
        &self.pi_unlabeled
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Estimate per-class priors as `π_i = multiplier · π_labeled,i` and derive
/// the unlabeled-pool shift.
///
/// Two clamps keep every prior in a valid range:
///
/// * `π_i` is capped at `1 − epsilon` (and never below `π_labeled,i`, which
///   matters only when `π_labeled,i` itself exceeds the cap);
/// * a class that was never observed positive (`π_labeled,i = 0`) gets
///   `π_i = epsilon` and keeps `π_labeled,i = 0`, so its shift degenerates to
///   `π_u,i = π_i` and the class trains as ordinary positive-unlabeled.
///
/// A class with `π_labeled,i = 1` has no unlabeled pool at all and is
/// rejected.
pub fn build_prior_config(
    pi_labeled: &[f64],
    multiplier: f64,
    epsilon: f64,
) -> Result<PriorShiftConfig> {
    if pi_labeled.is_empty() {
        return Err(config_err!("prior config needs at least one class"));
    }
    if !multiplier.is_finite() || multiplier < 1.0 {
        return Err(config_err!("prior multiplier must be >= 1, got {multiplier}"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(config_err!("epsilon must lie in (0, 0.5), got {epsilon}"));
    }
    let mut pi = Vec::with_capacity(pi_labeled.len());
    for (class, &pl) in pi_labeled.iter().enumerate() {
        if !(0.0..1.0).contains(&pl) {
            return Err(config_err!(
                "class {class}: labeled prior must lie in [0, 1), got {pl}"
            ));
        }
        let p = if pl == 0.0 {
            epsilon
        } else {
            (multiplier * pl).min(1.0 - epsilon).max(pl)
        };
        pi.push(p);
    }
    PriorShiftConfig::from_parts(pi, pi_labeled.to_vec(), multiplier, epsilon)
}
