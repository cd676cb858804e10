//! Score models, their gradients, and the deterministic training loop.
//!
//! A [`Scorer`] maps feature rows to `K + 1` scores: column 0 is the shared
//! none-class score, columns `1..=K` are the per-class scores consumed by the
//! risk estimators. Two architectures are supported, a linear map and a
//! one-hidden-layer tanh network, both with hand-derived backpropagation.
//!
//! Training minimizes a batch risk with adaptive moment estimation plus
//! decoupled weight decay. The learning rate rises linearly from zero over a
//! warmup prefix of the step budget and then decays linearly to zero at the
//! final step; the returned model is whatever the final step produced, not a
//! best-checkpoint selection. Given the same config and seed, training is
//! bitwise reproducible.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ObservedDataset;
use crate::error::{config_err, data_err, Error, Result};
use crate::loss::LossForm;
use crate::prior::PriorShiftConfig;
use crate::risk::{assemble_risk, RiskSpec};

/// First-moment decay of the optimizer.
pub const ADAM_BETA1: f64 = 0.9;
/// Second-moment decay of the optimizer.
pub const ADAM_BETA2: f64 = 0.999;
/// Denominator fuzz of the optimizer.
pub const ADAM_EPSILON: f64 = 1e-8;

/// Version tag written into scorer parameter files.
pub const SCORER_FORMAT: &str = "ssr-pu-scorer/1";

/// Model architecture selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "kebab-case")]
pub enum Architecture {
    Linear,
    Mlp1 { hidden: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Layers {
    Linear {
        /// `feature_dim × (K + 1)`.
        w: Array2<f64>,
        b: Array1<f64>,
    },
    Mlp1 {
        /// `feature_dim × hidden`.
        w1: Array2<f64>,
        b1: Array1<f64>,
        /// `hidden × (K + 1)`.
        w2: Array2<f64>,
        b2: Array1<f64>,
    },
}

/// A scoring model with `K + 1` outputs (none class first).
#[derive(Debug, Clone, PartialEq)]
pub struct Scorer {
    feature_dim: usize,
    class_count: usize,
    layers: Layers,
}

/// Hidden activations cached by [`Scorer::forward_cached`] for backprop.
pub struct ForwardCache {
    hidden: Option<Array2<f64>>,
}

fn init_weight(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    let scale = 1.0 / (rows as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
}

impl Scorer {
    /// Fresh scorer with uniform weights scaled by `1/√fan_in`, zero biases.
    pub fn init(
        arch: Architecture,
        feature_dim: usize,
        class_count: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if feature_dim == 0 || class_count == 0 {
            return Err(config_err!(
                "scorer needs at least one feature and one class, got d={feature_dim}, k={class_count}"
            ));
        }
        let outputs = class_count + 1;
        let layers = match arch {
            Architecture::Linear => Layers::Linear {
                w: init_weight(rng, feature_dim, outputs),
                b: Array1::zeros(outputs),
            },
            Architecture::Mlp1 { hidden } => {
                if hidden == 0 {
                    return Err(config_err!("mlp1 hidden width must be positive"));
                }
                Layers::Mlp1 {
                    w1: init_weight(rng, feature_dim, hidden),
                    b1: Array1::zeros(hidden),
                    w2: init_weight(rng, hidden, outputs),
                    b2: Array1::zeros(outputs),
                }
            }
        };
        Ok(Scorer {
            feature_dim,
            class_count,
            layers,
        })
    }

    pub fn architecture(&self) -> Architecture {
        match &self.layers {
            Layers::Linear { .. } => Architecture::Linear,
            Layers::Mlp1 { w1, .. } => Architecture::Mlp1 { hidden: w1.ncols() },
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Number of score columns, `K + 1`.
    pub fn output_dim(&self) -> usize {
        self.class_count + 1
    }

    /// Scores for a batch of feature rows, shape `n × (K + 1)`.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(x)?.0)
    }

    /// Forward pass that also returns activations needed by [`Self::backward`].
    pub fn forward_cached(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.feature_dim {
            return Err(config_err!(
                "scorer expects {} features, batch has {}",
                self.feature_dim,
                x.ncols()
            ));
        }
        match &self.layers {
            Layers::Linear { w, b } => {
                let scores = x.dot(w) + b;
                Ok((scores, ForwardCache { hidden: None }))
            }
            Layers::Mlp1 { w1, b1, w2, b2 } => {
                let mut hidden = x.dot(w1) + b1;
                hidden.mapv_inplace(f64::tanh);
                let scores = hidden.dot(w2) + b2;
                Ok((
                    scores,
                    ForwardCache {
                        hidden: Some(hidden),
                    },
                ))
            }
        }
    }

    /// Parameter-space gradient given the score-space gradient of a batch
    /// objective. Layout matches [`Self::params_flat`].
    pub fn backward(
        &self,
        x: ArrayView2<'_, f64>,
        cache: &ForwardCache,
        score_grad: ArrayView2<'_, f64>,
    ) -> Vec<f64> {
        match &self.layers {
            Layers::Linear { .. } => {
                let dw = x.t().dot(&score_grad);
                let db = score_grad.sum_axis(Axis(0));
                let mut flat = Vec::with_capacity(dw.len() + db.len());
                flat.extend(dw.iter());
                flat.extend(db.iter());
                flat
            }
            Layers::Mlp1 { w2, .. } => {
                let hidden = cache
                    .hidden
                    .as_ref()
                    .expect("mlp1 backward needs the cache from forward_cached");
                let dw2 = hidden.t().dot(&score_grad);
                let db2 = score_grad.sum_axis(Axis(0));
                let mut dz = score_grad.dot(&w2.t());
                dz.zip_mut_with(hidden, |g, &h| *g *= 1.0 - h * h);
                let dw1 = x.t().dot(&dz);
                let db1 = dz.sum_axis(Axis(0));
                let mut flat =
                    Vec::with_capacity(dw1.len() + db1.len() + dw2.len() + db2.len());
                flat.extend(dw1.iter());
                flat.extend(db1.iter());
                flat.extend(dw2.iter());
                flat.extend(db2.iter());
                flat
            }
        }
    }

    pub fn param_count(&self) -> usize {
        match &self.layers {
            Layers::Linear { w, b } => w.len() + b.len(),
            Layers::Mlp1 { w1, b1, w2, b2 } => w1.len() + b1.len() + w2.len() + b2.len(),
        }
    }

    /// All parameters as one row-major vector (weights then bias per layer).
    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        match &self.layers {
            Layers::Linear { w, b } => {
                flat.extend(w.iter());
                flat.extend(b.iter());
            }
            Layers::Mlp1 { w1, b1, w2, b2 } => {
                flat.extend(w1.iter());
                flat.extend(b1.iter());
                flat.extend(w2.iter());
                flat.extend(b2.iter());
            }
        }
        flat
    }

    /// Overwrite all parameters from a vector in [`Self::params_flat`] layout.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(config_err!(
                "parameter vector has {} entries, scorer has {}",
                flat.len(),
                self.param_count()
            ));
        }
        let mut iter = flat.iter().copied();
        let mut fill = |arr: &mut [f64]| {
            for slot in arr {
                *slot = iter.next().expect("length checked above");
            }
        };
        match &mut self.layers {
            Layers::Linear { w, b } => {
                fill(w.as_slice_mut().expect("standard layout"));
                fill(b.as_slice_mut().expect("standard layout"));
            }
            Layers::Mlp1 { w1, b1, w2, b2 } => {
                fill(w1.as_slice_mut().expect("standard layout"));
                fill(b1.as_slice_mut().expect("standard layout"));
                fill(w2.as_slice_mut().expect("standard layout"));
                fill(b2.as_slice_mut().expect("standard layout"));
            }
        }
        Ok(())
    }

    /// Write the parameters as a self-describing JSON file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let (architecture, hidden_dim) = match self.architecture() {
            Architecture::Linear => ("linear", None),
            Architecture::Mlp1 { hidden } => ("mlp1", Some(hidden)),
        };
        let file = ScorerFile {
            format: SCORER_FORMAT.to_string(),
            architecture: architecture.to_string(),
            feature_dim: self.feature_dim,
            class_count: self.class_count,
            hidden_dim,
            params: self.params_flat(),
        };
        let out =
            File::create(path).map_err(|e| data_err!("cannot create {}: {e}", path.display()))?;
        let mut out = BufWriter::new(out);
        serde_json::to_writer(&mut out, &file)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Read a parameter file written by [`Self::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let file =
            File::open(path).map_err(|e| data_err!("cannot open {}: {e}", path.display()))?;
        let file: ScorerFile = serde_json::from_reader(BufReader::new(file))?;
        if file.format != SCORER_FORMAT {
            return Err(data_err!(
                "unsupported scorer format {:?}, expected {SCORER_FORMAT:?}",
                file.format
            ));
        }
        let arch = match file.architecture.as_str() {
            "linear" => Architecture::Linear,
            "mlp1" => {
                let hidden = file.hidden_dim.ok_or_else(|| {
                    data_err!("mlp1 scorer file is missing the hidden_dim field")
                })?;
                Architecture::Mlp1 { hidden }
            }
            other => return Err(data_err!("unknown scorer architecture {other:?}")),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut scorer = Scorer::init(arch, file.feature_dim, file.class_count, &mut rng)
            .map_err(|e| data_err!("scorer file declares invalid dimensions: {e}"))?;
        if file.params.len() != scorer.param_count() {
            return Err(data_err!(
                "scorer file carries {} parameters, architecture needs {}",
                file.params.len(),
                scorer.param_count()
            ));
        }
        scorer.set_params_flat(&file.params)?;
        Ok(scorer)
    }
}

#[derive(Serialize, Deserialize)]
struct ScorerFile {
    format: String,
    architecture: String,
    feature_dim: usize,
    class_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden_dim: Option<usize>,
    params: Vec<f64>,
}

/// Training hyperparameters. `seed` drives initialization and shuffling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    /// Fraction of total steps spent ramping the learning rate up from zero.
    pub warmup_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.02,
            epochs: 20,
            batch_size: 256,
            weight_decay: 1e-4,
            warmup_fraction: 0.06,
            seed: 62,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(config_err!("learning rate must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return Err(config_err!("batch size must be positive"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(config_err!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            ));
        }
        if !(0.0..=0.5).contains(&self.warmup_fraction) {
            return Err(config_err!(
                "warmup fraction must lie in [0, 0.5], got {}",
                self.warmup_fraction
            ));
        }
        Ok(())
    }
}

/// Learning-rate multiplier at `step` out of `total_steps`.
///
/// Rises linearly from 0 to 1 over the first `warmup_fraction` of steps,
/// reaches exactly 1 at the warmup boundary, then decays linearly to exactly
/// 0 at `total_steps`.
pub fn schedule_multiplier(step: usize, total_steps: usize, warmup_fraction: f64) -> f64 {
    if total_steps == 0 || step >= total_steps {
        return 0.0;
    }
    let total = total_steps as f64;
    let warmup = warmup_fraction * total;
    let s = step as f64;
    if s < warmup {
        s / warmup
    } else {
        ((total - s) / (total - warmup)).clamp(0.0, 1.0)
    }
}

struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    weight_decay: f64,
}

impl AdamW {
    fn new(param_count: usize, weight_decay: f64) -> Self {
        AdamW {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            weight_decay,
        }
    }

    /// One update with bias-corrected moments and decoupled weight decay,
    /// both scaled by the scheduled learning rate `lr`.
    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g;
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] =
                params[i] * (1.0 - lr * self.weight_decay) - lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        }
    }
}

/// Optimizer constants echoed into every train report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerInfo {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean batch risk over the epoch.
    pub mean_risk: f64,
    /// Fraction of (batch, class) cells whose negative bracket was clamped.
    pub clamp_fraction: f64,
    pub per_class_clamp_fraction: Vec<f64>,
    /// Schedule multiplier after the epoch's last step.
    pub schedule_end: f64,
}

/// Full training transcript: one record per epoch plus the per-step risk
/// trace and the optimizer constants in effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_records: Vec<EpochRecord>,
    pub step_risks: Vec<f64>,
    pub optimizer: OptimizerInfo,
    pub total_steps: usize,
}

/// Train a fresh scorer on the dataset's observed labels.
///
/// Deterministic given `(data, priors, risk_spec, arch, cfg)`: the seed fixes
/// initialization and epoch shuffles, and all reductions run in a fixed
/// order. Returns the final-step model together with its report. A
/// non-finite risk, gradient, or parameter aborts with
/// [`Error::Diverged`] carrying the partial report.
pub fn train(
    data: &ObservedDataset,
    priors: &PriorShiftConfig,
    risk_spec: &RiskSpec,
    arch: Architecture,
    cfg: &TrainConfig,
) -> Result<(Scorer, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(config_err!("cannot train on an empty dataset"));
    }
    if priors.class_count() != data.class_count() {
        return Err(config_err!(
            "prior config has {} classes, dataset has {}",
            priors.class_count(),
            data.class_count()
        ));
    }

    let n = data.len();
    let k = data.class_count();
    let batches_per_epoch = n.div_ceil(cfg.batch_size);
    let total_steps = cfg.epochs * batches_per_epoch;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut scorer = Scorer::init(arch, data.feature_dim(), k, &mut rng)?;
    let mut opt = AdamW::new(scorer.param_count(), cfg.weight_decay);

    let mut report = TrainReport {
        epoch_records: Vec::with_capacity(cfg.epochs),
        step_risks: Vec::with_capacity(total_steps),
        optimizer: OptimizerInfo {
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            epsilon: ADAM_EPSILON,
            weight_decay: cfg.weight_decay,
        },
        total_steps,
    };

    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut risk_sum = 0.0;
        let mut clamp_counts = vec![0usize; k];
        let mut schedule_end = 0.0;

        for chunk in order.chunks(cfg.batch_size) {
            let (x, observed) = data.select_rows(chunk);
            let (scores, cache) = scorer.forward_cached(x.view())?;
            let (breakdown, score_grad) =
                assemble_risk(scores.view(), observed.view(), priors, risk_spec)?;

            if !breakdown.total.is_finite() {
                return Err(Error::Diverged {
                    step,
                    reason: format!("batch risk is {}", breakdown.total),
                    report: Box::new(report),
                });
            }
            report.step_risks.push(breakdown.total);
            risk_sum += breakdown.total;
            for (class, &active) in breakdown.clamp_active.iter().enumerate() {
                if active {
                    clamp_counts[class] += 1;
                }
            }

            let grads = scorer.backward(x.view(), &cache, score_grad.view());
            if grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged {
                    step,
                    reason: format!(
                        "non-finite parameter gradient (clamp state {:?})",
                        breakdown.clamp_active
                    ),
                    report: Box::new(report),
                });
            }

            let lr = cfg.lr * schedule_multiplier(step, total_steps, cfg.warmup_fraction);
            let mut params = scorer.params_flat();
            opt.step(&mut params, &grads, lr);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Diverged {
                    step,
                    reason: "non-finite parameter after update".to_string(),
                    report: Box::new(report),
                });
            }
            scorer.set_params_flat(&params)?;

            step += 1;
            schedule_end = schedule_multiplier(step, total_steps, cfg.warmup_fraction);
        }

        let batches = batches_per_epoch as f64;
        report.epoch_records.push(EpochRecord {
            epoch,
            mean_risk: risk_sum / batches,
            clamp_fraction: clamp_counts.iter().sum::<usize>() as f64 / (batches * k as f64),
            per_class_clamp_fraction: clamp_counts
                .iter()
                .map(|&c| c as f64 / batches)
                .collect(),
            schedule_end,
        });
    }

    Ok((scorer, report))
}

/// Threshold scores into per-class sign predictions.
///
/// Ranking form predicts positive when the class score strictly exceeds the
/// none score; plain form thresholds at zero. Ties go to negative.
pub fn predict(scorer: &Scorer, features: ArrayView2<'_, f64>, form: LossForm) -> Result<Array2<bool>> {
    let scores = scorer.forward(features)?;
    Ok(predict_from_scores(scores.view(), form))
}

/// Thresholding rule of [`predict`], applied to precomputed scores.
pub fn predict_from_scores(scores: ArrayView2<'_, f64>, form: LossForm) -> Array2<bool> {
    let n = scores.nrows();
    let k = scores.ncols().saturating_sub(1);
    Array2::from_shape_fn((n, k), |(row, class)| match form {
        LossForm::Ranking => scores[(row, class + 1)] > scores[(row, 0)],
        LossForm::Plain => scores[(row, class + 1)] > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn schedule_hits_exact_endpoints() {
        assert_eq!(schedule_multiplier(0, 100, 0.06), 0.0);
        assert_eq!(schedule_multiplier(3, 100, 0.06), 0.5);
        assert_eq!(schedule_multiplier(6, 100, 0.06), 1.0);
        assert_eq!(schedule_multiplier(53, 100, 0.06), 0.5);
        assert_eq!(schedule_multiplier(100, 100, 0.06), 0.0);
    }

    #[test]
    fn schedule_without_warmup_starts_at_one() {
        assert_eq!(schedule_multiplier(0, 10, 0.0), 1.0);
        assert_eq!(schedule_multiplier(10, 10, 0.0), 0.0);
    }

    #[test]
    fn schedule_is_a_single_ramp_up_then_down() {
        let mut prev = 0.0;
        let mut rising = true;
        for step in 0..=200 {
            let m = schedule_multiplier(step, 200, 0.1);
            assert!((0.0..=1.0).contains(&m));
            if rising && m < prev {
                rising = false;
            }
            if !rising {
                assert!(m <= prev + 1e-12);
            }
            prev = m;
        }
        assert!(!rising);
    }

    #[test]
    fn adamw_single_step_matches_hand_execution() {
        // theta = 1, g = 0.5, lr = 0.1, no decay:
        //   m = 0.05, v = 0.00025, m_hat = 0.5, v_hat = 0.25,
        //   theta' = 1 - 0.1 * 0.5 / (0.5 + 1e-8) = 0.900000002 (to 1e-12).
        let mut opt = AdamW::new(1, 0.0);
        let mut params = [1.0];
        opt.step(&mut params, &[0.5], 0.1);
        assert!((params[0] - 0.900000002).abs() < 1e-12);
    }

    #[test]
    fn adamw_zero_gradient_only_decays_weights() {
        let mut opt = AdamW::new(1, 0.1);
        let mut params = [2.0];
        opt.step(&mut params, &[0.0], 0.1);
        assert_eq!(params[0], 2.0 * (1.0 - 0.1 * 0.1));
    }

    #[test]
    fn init_is_seeded_and_biases_start_at_zero() {
        let a = Scorer::init(Architecture::Linear, 3, 2, &mut rng(7)).unwrap();
        let b = Scorer::init(Architecture::Linear, 3, 2, &mut rng(7)).unwrap();
        let c = Scorer::init(Architecture::Linear, 3, 2, &mut rng(8)).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        assert_ne!(a.params_flat(), c.params_flat());
        // Trailing 3 entries are the bias row.
        let flat = a.params_flat();
        assert_eq!(&flat[flat.len() - 3..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn forward_matches_hand_matmul_for_known_weights() {
        let mut s = Scorer::init(Architecture::Linear, 2, 1, &mut rng(0)).unwrap();
        // w = [[1, 2], [3, 4]] (d x outputs), b = [0.5, -0.5].
        s.set_params_flat(&[1.0, 2.0, 3.0, 4.0, 0.5, -0.5]).unwrap();
        let scores = s.forward(array![[1.0, 1.0], [2.0, 0.0]].view()).unwrap();
        assert_eq!(scores, array![[4.5, 5.5], [2.5, 3.5]]);
    }

    #[test]
    fn forward_rejects_wrong_feature_width() {
        let s = Scorer::init(Architecture::Linear, 3, 2, &mut rng(0)).unwrap();
        assert!(s.forward(Array2::zeros((4, 2)).view()).is_err());
    }

    #[test]
    fn backward_matches_finite_differences_on_quadratic_objective() {
        // Objective J = sum(scores^2) / 2, so dJ/dscores = scores.
        for arch in [Architecture::Linear, Architecture::Mlp1 { hidden: 5 }] {
            let scorer = Scorer::init(arch, 4, 3, &mut rng(11)).unwrap();
            let x = Array2::from_shape_fn((6, 4), |(i, j)| ((i * 7 + j * 3) as f64).sin());
            let (scores, cache) = scorer.forward_cached(x.view()).unwrap();
            let analytic = scorer.backward(x.view(), &cache, scores.view());

            let h = 1e-6;
            let base = scorer.params_flat();
            for p in 0..base.len() {
                let mut probe = scorer.clone();
                let mut plus = base.clone();
                plus[p] += h;
                probe.set_params_flat(&plus).unwrap();
                let jp: f64 = probe.forward(x.view()).unwrap().iter().map(|s| s * s / 2.0).sum();
                let mut minus = base.clone();
                minus[p] -= h;
                probe.set_params_flat(&minus).unwrap();
                let jm: f64 = probe.forward(x.view()).unwrap().iter().map(|s| s * s / 2.0).sum();
                let fd = (jp - jm) / (2.0 * h);
                assert!(
                    (analytic[p] - fd).abs() < 1e-5 * analytic[p].abs().max(1.0),
                    "param {p}: analytic {} vs fd {fd}",
                    analytic[p]
                );
            }
        }
    }

    #[test]
    fn params_flat_round_trips() {
        for arch in [Architecture::Linear, Architecture::Mlp1 { hidden: 4 }] {
            let mut s = Scorer::init(arch, 3, 2, &mut rng(5)).unwrap();
            let flat = s.params_flat();
            assert_eq!(flat.len(), s.param_count());
            let doubled: Vec<f64> = flat.iter().map(|p| p * 2.0).collect();
            s.set_params_flat(&doubled).unwrap();
            assert_eq!(s.params_flat(), doubled);
            assert!(s.set_params_flat(&[1.0]).is_err());
        }
    }

    #[test]
    fn save_load_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for arch in [Architecture::Linear, Architecture::Mlp1 { hidden: 6 }] {
            let s = Scorer::init(arch, 5, 3, &mut rng(13)).unwrap();
            let path = dir.path().join("scorer.json");
            s.save(&path).unwrap();
            let loaded = Scorer::load(&path).unwrap();
            assert_eq!(loaded.architecture(), s.architecture());
            assert_eq!(loaded.params_flat(), s.params_flat());
        }
    }

    #[test]
    fn load_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scorer.json");

        std::fs::write(&path, r#"{"format":"other/9","architecture":"linear","feature_dim":2,"class_count":1,"params":[0,0,0,0,0,0]}"#).unwrap();
        assert!(Scorer::load(&path).is_err());

        std::fs::write(&path, r#"{"format":"ssr-pu-scorer/1","architecture":"linear","feature_dim":2,"class_count":1,"params":[0.0]}"#).unwrap();
        assert!(Scorer::load(&path).is_err());

        std::fs::write(&path, r#"{"format":"ssr-pu-scorer/1","architecture":"mlp1","feature_dim":2,"class_count":1,"params":[]}"#).unwrap();
        assert!(Scorer::load(&path).is_err());
    }

    #[test]
    fn predictions_threshold_scores_and_break_ties_negative() {
        let scores = array![[0.5, 0.5, 0.6], [0.0, -0.1, 0.1]];
        let ranking = predict_from_scores(scores.view(), LossForm::Ranking);
        assert_eq!(ranking, array![[false, true], [false, true]]);
        let plain = predict_from_scores(scores.view(), LossForm::Plain);
        assert_eq!(plain, array![[true, true], [false, true]]);
    }
}
