//! Reproducible experiment runs: a single serializable config drives
//! generation, training, evaluation, and sweeps.
//!
//! Every run is identified by the first twelve hex digits of the SHA-256 of
//! its canonical config JSON, so reruns land on the same file names and two
//! configs collide exactly when they are byte-identical. All outputs carry
//! the effective config alongside them, none embed timestamps, and sweep
//! cells are merged in a fixed order, which together make every artifact
//! byte-for-byte reproducible from its config.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::ObservedDataset;
use crate::error::{config_err, data_err, Error, Result};
use crate::io::{load_jsonl, save_jsonl};
use crate::loss::{LossFamily, LossForm, LossSpec};
use crate::metrics::{evaluate_scores, EvalReport};
use crate::model::{train, Architecture, Scorer, TrainConfig, TrainReport};
use crate::prior::{build_prior_config, PriorShiftConfig};
use crate::risk::{RiskEstimator, RiskSpec};

/// Where the instances come from: a dataset file or an inline generator
/// config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSpec {
    Path(PathBuf),
    Synth(crate::datagen::SynthConfig),
}

/// Everything a training-plus-evaluation run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    pub estimator: RiskEstimator,
    pub loss_family: LossFamily,
    pub loss_form: LossForm,
    pub margin: f64,
    pub class_weighting: bool,
    /// Diagnostic escape hatch: accept a zero ranking margin even though it
    /// destroys classification. Exists so the degeneracy can be demonstrated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_degenerate_margin: bool,
    pub multiplier: f64,
    pub epsilon: f64,
    pub architecture: Architecture,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    /// The default shifted-risk setup on the synthetic benchmark: ranking
    /// squared loss with margin 0.25, class weighting, prior multiplier 3
    /// (the reciprocal of the benchmark's keep probability), linear scorer.
    pub fn benchmark_default(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            data: DataSpec::Synth(crate::datagen::SynthConfig::benchmark(seed)),
            estimator: RiskEstimator::NnSpu,
            loss_family: LossFamily::Squared,
            loss_form: LossForm::Ranking,
            margin: 0.25,
            class_weighting: true,
            allow_degenerate_margin: false,
            multiplier: 3.0,
            epsilon: 0.01,
            architecture: Architecture::Linear,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
        }
    }

    /// Twelve hex digits of the SHA-256 of the canonical config JSON.
    pub fn run_id(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..6])
    }

    pub fn loss_spec(&self) -> Result<LossSpec> {
        match self.loss_form {
            LossForm::Plain => Ok(LossSpec::plain(self.loss_family)),
            LossForm::Ranking if self.allow_degenerate_margin => {
                if !self.margin.is_finite() {
                    return Err(config_err!("margin must be finite, got {}", self.margin));
                }
                Ok(LossSpec::ranking_unchecked(self.loss_family, self.margin))
            }
            LossForm::Ranking => LossSpec::ranking(self.loss_family, self.margin),
        }
    }

    pub fn risk_spec(&self) -> Result<RiskSpec> {
        Ok(RiskSpec {
            estimator: self.estimator,
            loss: self.loss_spec()?,
            class_weighting: self.class_weighting,
        })
    }

    /// Load or generate the instances.
    pub fn resolve_dataset(&self) -> Result<ObservedDataset> {
        match &self.data {
            DataSpec::Path(path) => load_jsonl(path),
            DataSpec::Synth(cfg) => crate::datagen::generate(cfg),
        }
    }

    /// Estimate labeled priors from the data and scale them by the
    /// multiplier.
    pub fn priors_for(&self, data: &ObservedDataset) -> Result<PriorShiftConfig> {
        build_prior_config(
            &data.estimate_labeled_prior()?,
            self.multiplier,
            self.epsilon,
        )
    }
}

/// Output directory fallback: `$SSRPU_OUT_DIR` if set, else the working
/// directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("SSRPU_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| data_err!("cannot write {}: {e}", path.display()))?;
    Ok(())
}

/// Artifacts of one training run.
#[derive(Debug)]
pub struct TrainOutcome {
    pub run_id: String,
    pub scorer: Scorer,
    pub report: TrainReport,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
    pub config_path: PathBuf,
}

/// Train per config and write the model, report, and effective config as
/// `{run_id}-model.json`, `{run_id}-report.json`, `{run_id}-config.json`.
/// On divergence the partial report is still written before the error
/// propagates.
pub fn run_train(cfg: &ExperimentConfig, out_dir: &Path) -> Result<TrainOutcome> {
    fs::create_dir_all(out_dir)?;
    let run_id = cfg.run_id();
    let config_path = out_dir.join(format!("{run_id}-config.json"));
    let model_path = out_dir.join(format!("{run_id}-model.json"));
    let report_path = out_dir.join(format!("{run_id}-report.json"));
    write_json(&config_path, cfg)?;

    let data = cfg.resolve_dataset()?;
    let priors = cfg.priors_for(&data)?;
    let risk_spec = cfg.risk_spec()?;
    let (scorer, report) = match train(&data, &priors, &risk_spec, cfg.architecture, &cfg.train) {
        Ok(ok) => ok,
        Err(Error::Diverged {
            step,
            reason,
            report,
        }) => {
            write_json(&report_path, report.as_ref())?;
            return Err(Error::Diverged {
                step,
                reason,
                report,
            });
        }
        Err(other) => return Err(other),
    };
    scorer.save(&model_path)?;
    write_json(&report_path, &report)?;
    Ok(TrainOutcome {
        run_id,
        scorer,
        report,
        model_path,
        report_path,
        config_path,
    })
}

/// One line of the metrics table. Column names and order are stable; reruns
/// of the same config produce byte-identical rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub run_id: String,
    pub estimator: String,
    pub loss: String,
    pub margin: f64,
    pub multiplier: f64,
    pub seed: u64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "L_NA")]
    pub l_na: f64,
}

fn loss_label(cfg: &ExperimentConfig) -> String {
    format!("{}-{}", cfg.loss_family, cfg.loss_form)
}

fn eval_row(cfg: &ExperimentConfig, report: &EvalReport) -> EvalRow {
    EvalRow {
        run_id: cfg.run_id(),
        estimator: cfg.estimator.to_string(),
        loss: loss_label(cfg),
        margin: cfg.margin,
        multiplier: cfg.multiplier,
        seed: cfg.train.seed,
        p: report.micro_p,
        r: report.micro_r,
        f1: report.micro_f1,
        l_na: report.mean_l_na,
    }
}

/// Write rows as CSV with the stable header.
pub fn write_csv(path: &Path, rows: &[EvalRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| data_err!("cannot write {}: {e}", path.display()))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read rows written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<EvalRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| data_err!("cannot read {}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Artifacts of one evaluation.
#[derive(Debug)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub row: EvalRow,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
}

/// Score the dataset with the scorer and compare against gold labels,
/// writing `{run_id}-eval.json` and a one-row `{run_id}-eval.csv`.
pub fn run_eval(
    cfg: &ExperimentConfig,
    scorer: &Scorer,
    data: &ObservedDataset,
    out_dir: &Path,
) -> Result<EvalOutcome> {
    let gold = data
        .gold()
        .ok_or_else(|| data_err!("evaluation requires gold labels"))?;
    fs::create_dir_all(out_dir)?;
    let scores = scorer.forward(data.features())?;
    let report = evaluate_scores(scores.view(), gold, cfg.loss_form)?;
    let row = eval_row(cfg, &report);
    let run_id = cfg.run_id();
    let json_path = out_dir.join(format!("{run_id}-eval.json"));
    let csv_path = out_dir.join(format!("{run_id}-eval.csv"));
    write_json(&json_path, &report)?;
    write_csv(&csv_path, std::slice::from_ref(&row))?;
    Ok(EvalOutcome {
        report,
        row,
        json_path,
        csv_path,
    })
}

/// Train and evaluate in memory, without writing any files. The evaluation
/// runs on the same instances the model was trained on, scored against gold
/// labels: training never sees gold, so this directly measures how much of
/// the censored signal each estimator recovers.
pub fn train_and_eval(cfg: &ExperimentConfig) -> Result<(EvalReport, TrainReport, EvalRow)> {
    let data = cfg.resolve_dataset()?;
    let priors = cfg.priors_for(&data)?;
    let (scorer, train_report) = train(
        &data,
        &priors,
        &cfg.risk_spec()?,
        cfg.architecture,
        &cfg.train,
    )?;
    let gold = data
        .gold()
        .ok_or_else(|| data_err!("evaluation requires gold labels"))?;
    let scores = scorer.forward(data.features())?;
    let report = evaluate_scores(scores.view(), gold, cfg.loss_form)?;
    let row = eval_row(cfg, &report);
    Ok((report, train_report, row))
}

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Margin,
    Multiplier,
    KeepProb,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Margin => "margin",
            SweepAxis::Multiplier => "multiplier",
            SweepAxis::KeepProb => "keep-prob",
        })
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(SweepAxis::Margin),
            "multiplier" => Ok(SweepAxis::Multiplier),
            "keep-prob" => Ok(SweepAxis::KeepProb),
            other => Err(config_err!(
                "unknown sweep axis {other:?}; expected margin, multiplier, or keep-prob"
            )),
        }
    }
}

fn apply_axis(cfg: &mut ExperimentConfig, axis: SweepAxis, value: f64) -> Result<()> {
    match axis {
        SweepAxis::Margin => {
            if cfg.loss_form != LossForm::Ranking {
                return Err(config_err!("margin sweeps need the ranking loss form"));
            }
            cfg.margin = value;
        }
        SweepAxis::Multiplier => cfg.multiplier = value,
        SweepAxis::KeepProb => match &mut cfg.data {
            DataSpec::Synth(synth) => {
                synth.label_keep_prob = vec![value; synth.class_count()];
            }
            DataSpec::Path(_) => {
                return Err(config_err!(
                    "keep-prob sweeps regenerate the data and need an inline synthetic config"
                ));
            }
        },
    }
    Ok(())
}

/// A sweep's merged table plus any per-cell failures.
#[derive(Debug)]
pub struct SweepOutcome {
    pub sweep_id: String,
    pub rows: Vec<EvalRow>,
    pub csv_path: PathBuf,
    pub config_path: PathBuf,
    /// `(row index, error)` for cells that failed; their rows carry NaN
    /// metrics.
    pub failures: Vec<(usize, String)>,
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    base: &'a ExperimentConfig,
    axis: SweepAxis,
    values: &'a [f64],
    seeds: &'a [u64],
}

/// Run train-plus-eval for every (value, seed) cell, in parallel, and merge
/// the rows in (value, seed) order. A failed cell keeps its row with NaN
/// metrics so the table shape is predictable; the error text is returned
/// alongside. Seeds drive both training and, for inline synthetic data, the
/// generator, so each seed is an independent end-to-end replicate.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<SweepOutcome> {
    if values.len() < 2 {
        return Err(config_err!("a sweep needs at least two axis values"));
    }
    if seeds.is_empty() {
        return Err(config_err!("a sweep needs at least one seed"));
    }
    fs::create_dir_all(out_dir)?;
    let manifest = SweepManifest {
        base,
        axis,
        values,
        seeds,
    };
    let canonical = serde_json::to_string(&manifest)?;
    let sweep_id = hex::encode(&Sha256::digest(canonical.as_bytes())[..6]);

    let mut cells = Vec::with_capacity(values.len() * seeds.len());
    for &value in values {
        for &seed in seeds {
            let mut cfg = base.clone();
            apply_axis(&mut cfg, axis, value)?;
            cfg.train.seed = seed;
            if let DataSpec::Synth(synth) = &mut cfg.data {
                synth.seed = seed;
            }
            cells.push(cfg);
        }
    }

    let outcomes: Vec<std::result::Result<EvalRow, String>> = cells
        .par_iter()
        .map(|cfg| {
            train_and_eval(cfg)
                .map(|(_, _, row)| row)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(row) => rows.push(row),
            Err(message) => {
                let cfg = &cells[idx];
                rows.push(EvalRow {
                    run_id: cfg.run_id(),
                    estimator: cfg.estimator.to_string(),
                    loss: loss_label(cfg),
                    margin: cfg.margin,
                    multiplier: cfg.multiplier,
                    seed: cfg.train.seed,
                    p: f64::NAN,
                    r: f64::NAN,
                    f1: f64::NAN,
                    l_na: f64::NAN,
                });
                failures.push((idx, message));
            }
        }
    }

    let csv_path = out_dir.join(format!("{sweep_id}-sweep.csv"));
    let config_path = out_dir.join(format!("{sweep_id}-sweep-config.json"));
    write_csv(&csv_path, &rows)?;
    write_json(&config_path, &manifest)?;
    Ok(SweepOutcome {
        sweep_id,
        rows,
        csv_path,
        config_path,
        failures,
    })
}

/// Summary of a generated dataset file.
#[derive(Debug, Clone, Serialize)]
pub struct GenerateSummary {
    pub path: PathBuf,
    pub instances: usize,
    pub gold_priors: Vec<f64>,
    pub labeled_priors: Vec<f64>,
}

/// Generate per config and save with the config embedded as provenance.
pub fn run_generate(cfg: &crate::datagen::SynthConfig, path: &Path) -> Result<GenerateSummary> {
    let data = crate::datagen::generate(cfg)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    save_jsonl(&data, path, Some(serde_json::to_value(cfg)?))?;
    Ok(GenerateSummary {
        path: path.to_path_buf(),
        instances: data.len(),
        gold_priors: data.estimate_gold_prior()?,
        labeled_priors: data.estimate_labeled_prior()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::SynthConfig;

    fn tiny_synth(seed: u64) -> SynthConfig {
        SynthConfig {
            n: 400,
            d: 4,
            class_priors: vec![0.3, 0.2],
            label_keep_prob: vec![0.5, 0.5],
            separation: 4.0,
            cap_per_class: None,
            seed,
        }
    }

    fn tiny_config(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            data: DataSpec::Synth(tiny_synth(seed)),
            train: TrainConfig {
                epochs: 2,
                batch_size: 128,
                seed,
                ..TrainConfig::default()
            },
            ..ExperimentConfig::benchmark_default(seed)
        }
    }

    #[test]
    fn run_ids_are_stable_and_config_sensitive() {
        let a = tiny_config(62);
        assert_eq!(a.run_id(), a.run_id());
        assert_eq!(a.run_id().len(), 12);
        let mut b = tiny_config(62);
        b.train.seed = 63;
        assert_ne!(a.run_id(), b.run_id());
    }

    #[test]
    fn config_json_round_trips() {
        let cfg = tiny_config(62);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn train_and_eval_writes_consistent_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(62);
        let outcome = run_train(&cfg, dir.path()).unwrap();
        assert!(outcome.model_path.exists());
        assert!(outcome.config_path.exists());
        assert_eq!(outcome.report.epoch_records.len(), cfg.train.epochs);

        let reread: ExperimentConfig =
            serde_json::from_str(&std::fs::read_to_string(&outcome.config_path).unwrap()).unwrap();
        assert_eq!(reread, cfg);

        let data = cfg.resolve_dataset().unwrap();
        let loaded = Scorer::load(&outcome.model_path).unwrap();
        let eval = run_eval(&cfg, &loaded, &data, dir.path()).unwrap();
        let rows = read_csv(&eval.csv_path).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0], eval.row);
        assert_eq!(rows[0].run_id, outcome.run_id);

        let (p, r, f1) = (eval.report.micro_p, eval.report.micro_r, eval.report.micro_f1);
        if p + r > 0.0 {
            assert!((f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_without_gold_labels_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(62);
        let data = cfg.resolve_dataset().unwrap();
        let stripped = ObservedDataset::new(
            data.features().to_owned(),
            data.observed().to_owned(),
            None,
        )
        .unwrap();
        let outcome = run_train(&cfg, dir.path()).unwrap();
        let err = run_eval(&cfg, &outcome.scorer, &stripped, dir.path()).unwrap_err();
        assert!(err.to_string().contains("gold"));
    }

    #[test]
    fn csv_round_trips_and_pins_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let row = EvalRow {
            run_id: "abc123def456".into(),
            estimator: "nnspu".into(),
            loss: "squared-ranking".into(),
            margin: 0.25,
            multiplier: 3.0,
            seed: 62,
            p: 0.5,
            r: 0.25,
            f1: 1.0 / 3.0,
            l_na: 0.75,
        };
        write_csv(&path, std::slice::from_ref(&row)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(
            text.starts_with("run_id,estimator,loss,margin,multiplier,seed,P,R,F1,L_NA\n"),
            "{text}"
        );
        assert_eq!(read_csv(&path).unwrap(), vec![row]);
    }

    #[test]
    fn sweeps_order_cells_and_rerun_identically() {
        let dir = tempfile::tempdir().unwrap();
        let base = tiny_config(62);
        let outcome = run_sweep(
            &base,
            SweepAxis::Margin,
            &[0.1, 0.25],
            &[62, 63],
            dir.path(),
        )
        .unwrap();
        assert!(outcome.failures.is_empty());
        let keys: Vec<(f64, u64)> = outcome.rows.iter().map(|r| (r.margin, r.seed)).collect();
        assert_eq!(keys, vec![(0.1, 62), (0.1, 63), (0.25, 62), (0.25, 63)]);

        let first = std::fs::read(&outcome.csv_path).unwrap();
        let again = run_sweep(
            &base,
            SweepAxis::Margin,
            &[0.1, 0.25],
            &[62, 63],
            dir.path(),
        )
        .unwrap();
        assert_eq!(first, std::fs::read(&again.csv_path).unwrap());
    }

    #[test]
    fn failed_sweep_cells_are_marked_and_do_not_stop_the_rest() {
        let dir = tempfile::tempdir().unwrap();
        let base = tiny_config(62);
        // Multiplier 0.5 is rejected by the prior builder, so that value's
        // cells fail while the multiplier-3 cells succeed.
        let outcome = run_sweep(
            &base,
            SweepAxis::Multiplier,
            &[0.5, 3.0],
            &[62],
            dir.path(),
        )
        .unwrap();
        assert_eq!(outcome.rows.len(), 2);
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].0, 0);
        assert!(outcome.rows[0].f1.is_nan());
        assert!(outcome.rows[1].f1.is_finite());
    }

    #[test]
    fn sweep_axis_constraints_are_enforced() {
        let mut base = tiny_config(62);
        base.loss_form = LossForm::Plain;
        let dir = tempfile::tempdir().unwrap();
        assert!(run_sweep(&base, SweepAxis::Margin, &[0.1, 0.2], &[62], dir.path()).is_err());

        let mut base = tiny_config(62);
        base.data = DataSpec::Path(PathBuf::from("missing.jsonl"));
        assert!(run_sweep(&base, SweepAxis::KeepProb, &[0.2, 0.4], &[62], dir.path()).is_err());

        let base = tiny_config(62);
        assert!(run_sweep(&base, SweepAxis::Margin, &[0.25], &[62], dir.path()).is_err());
    }

    #[test]
    fn generate_writes_a_loadable_file_with_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let summary = run_generate(&tiny_synth(62), &path).unwrap();
        assert_eq!(summary.instances, 400);
        assert_eq!(summary.gold_priors.len(), 2);
        assert!((summary.gold_priors[0] - 0.3).abs() < 1e-12);
        let loaded = load_jsonl(&path).unwrap();
        assert_eq!(loaded.len(), 400);
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .contains("provenance"));
    }
}
