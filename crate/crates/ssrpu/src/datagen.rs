//! Synthetic multi-label benchmarks with known priors and controlled
//! label censoring.
//!
//! Features are standard Gaussian. Each class plants a random unit direction
//! and marks the top `round(π_i · n)` instances of a noisy projection as
//! gold-positive, so the empirical gold prior hits its target exactly rather
//! than in expectation; the noise scale `1/separation` sets how far the
//! planted concept is from linearly realizable. Observed labels are then
//! drawn by keeping each gold positive independently with a per-class
//! probability, which reproduces the incomplete-labeling regime: observed
//! labels are a subset of gold and never wrong. An optional per-class cap
//! models annotation budgets down to a single labeled example per class.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::ObservedDataset;
use crate::error::{config_err, Result};

/// Generator settings. `label_keep_prob` is per class: each gold positive is
/// labeled independently with that probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub d: usize,
    pub class_priors: Vec<f64>,
    pub label_keep_prob: Vec<f64>,
    /// Inverse noise scale of the planted concept; larger is cleaner.
    pub separation: f64,
    /// Keep at most this many labeled positives per class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_per_class: Option<usize>,
    pub seed: u64,
}

impl SynthConfig {
    /// The benchmark configuration shared by the examples and regression
    /// tests: 20,000 instances, 32 features, four classes with priors
    /// {0.3, 0.2, 0.1, 0.05}, and one third of gold positives labeled.
    pub fn benchmark(seed: u64) -> SynthConfig {
        SynthConfig {
            n: 20_000,
            d: 32,
            class_priors: vec![0.3, 0.2, 0.1, 0.05],
            label_keep_prob: vec![1.0 / 3.0; 4],
            separation: 4.0,
            cap_per_class: None,
            seed,
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_priors.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(config_err!("need at least one instance and one feature"));
        }
        if self.class_priors.is_empty() {
            return Err(config_err!("need at least one class"));
        }
        if self.label_keep_prob.len() != self.class_priors.len() {
            return Err(config_err!(
                "keep probabilities cover {} classes, priors cover {}",
                self.label_keep_prob.len(),
                self.class_priors.len()
            ));
        }
        for (class, &p) in self.class_priors.iter().enumerate() {
            if !(p.is_finite() && 0.0 < p && p < 1.0) {
                return Err(config_err!(
                    "class {class}: prior must lie strictly inside (0, 1), got {p}"
                ));
            }
        }
        for (class, &rho) in self.label_keep_prob.iter().enumerate() {
            if !(rho.is_finite() && (0.0..=1.0).contains(&rho)) {
                return Err(config_err!(
                    "class {class}: keep probability must lie in [0, 1], got {rho}"
                ));
            }
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(config_err!(
                "separation must be positive, got {}",
                self.separation
            ));
        }
        if self.cap_per_class == Some(0) {
            return Err(config_err!("cap must keep at least one label per class"));
        }
        Ok(())
    }
}

/// Generate a dataset with gold labels retained.
pub fn generate(cfg: &SynthConfig) -> Result<ObservedDataset> {
    cfg.validate()?;
    let k = cfg.class_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let features =
        Array2::from_shape_fn((cfg.n, cfg.d), |_| rng.sample::<f64, _>(StandardNormal));
    let mut gold = Array2::from_elem((cfg.n, k), false);
    let mut observed = Array2::from_elem((cfg.n, k), false);

    for class in 0..k {
        let mut direction: Vec<f64> = (0..cfg.d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = direction.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(config_err!("degenerate class direction drawn, reseed"));
        }
        for w in &mut direction {
            *w /= norm;
        }

        let noise_scale = 1.0 / cfg.separation;
        let mut ranked: Vec<(f64, usize)> = (0..cfg.n)
            .map(|row| {
                let projection: f64 = (0..cfg.d).map(|j| features[(row, j)] * direction[j]).sum();
                let noise: f64 = rng.sample(StandardNormal);
                (projection + noise_scale * noise, row)
            })
            .collect();
        ranked.sort_unstable_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("finite scores")
                .then(a.1.cmp(&b.1))
        });
        let positives = (cfg.class_priors[class] * cfg.n as f64).round() as usize;
        for &(_, row) in ranked.iter().take(positives) {
            gold[(row, class)] = true;
        }

        let rho = cfg.label_keep_prob[class];
        for row in 0..cfg.n {
            if gold[(row, class)] && rng.random::<f64>() < rho {
                observed[(row, class)] = true;
            }
        }
    }

    let dataset = ObservedDataset::new(features, observed, Some(gold))?;
    match cfg.cap_per_class {
        Some(cap) => apply_cap(&dataset, cap, cfg.seed),
        None => Ok(dataset),
    }
}

/// Uniformly subsample each class's labeled positives down to at most `cap`,
/// turning the rest back into unlabeled rows. Gold labels are untouched.
pub fn apply_cap(dataset: &ObservedDataset, cap: usize, seed: u64) -> Result<ObservedDataset> {
    if cap == 0 {
        return Err(config_err!("cap must keep at least one label per class"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut capped = dataset.clone();
    for class in 0..dataset.class_count() {
        let labeled: Vec<usize> = (0..dataset.len())
            .filter(|&row| dataset.observed()[(row, class)])
            .collect();
        if labeled.len() <= cap {
            continue;
        }
        let keep: Vec<usize> = rand::seq::index::sample(&mut rng, labeled.len(), cap).into_vec();
        let observed = capped.observed_mut();
        for &row in &labeled {
            observed[(row, class)] = false;
        }
        for slot in keep {
            observed[(labeled[slot], class)] = true;
        }
    }
    Ok(capped)
}
