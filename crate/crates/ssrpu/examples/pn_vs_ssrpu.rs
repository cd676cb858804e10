//! The failure this library exists to fix: training on incomplete labels as
//! if they were complete collapses recall.
//!
//! Both runs see the same censored dataset, where only a third of gold
//! positives kept their labels. The naive estimator treats every unlabeled
//! instance as negative, so two thirds of the positives actively push the
//! scores down and recall craters. The shifted estimator reweights the
//! unlabeled pool by its residual positive fraction and recovers them.
//! Run with `cargo run --example pn_vs_ssrpu`.

use ssrpu::datagen::SynthConfig;
use ssrpu::experiment::{train_and_eval, DataSpec, ExperimentConfig};
use ssrpu::metrics::EvalReport;
use ssrpu::model::TrainConfig;
use ssrpu::risk::RiskEstimator;

fn run(estimator: RiskEstimator, class_weighting: bool, seed: u64) -> ssrpu::Result<EvalReport> {
    let cfg = ExperimentConfig {
        data: DataSpec::Synth(SynthConfig {
            n: 8000,
            d: 16,
            class_priors: vec![0.3, 0.15],
            label_keep_prob: vec![1.0 / 3.0; 2],
            separation: 4.0,
            cap_per_class: None,
            seed,
        }),
        estimator,
        class_weighting,
        multiplier: 3.0,
        train: TrainConfig {
            epochs: 10,
            seed,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::benchmark_default(seed)
    };
    let (report, _, _) = train_and_eval(&cfg)?;
    Ok(report)
}

fn main() -> ssrpu::Result<()> {
    let seed = 62;
    println!("same censored data (keep probability 1/3), two estimators:");
    println!();
    let pn = run(RiskEstimator::Pn, false, seed)?;
    let spu = run(RiskEstimator::NnSpu, true, seed)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "", "precision", "recall", "F1", "L_NA"
    );
    for (name, report) in [("pn", &pn), ("nnspu", &spu)] {
        println!(
            "{name:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            report.micro_p, report.micro_r, report.micro_f1, report.mean_l_na
        );
    }

    println!();
    println!(
        "recall gap: {:.1} points",
        100.0 * (spu.micro_r - pn.micro_r)
    );
    assert!(
        spu.micro_r >= pn.micro_r + 0.10,
        "the shifted estimator recovers at least 10 recall points"
    );
    assert!(
        spu.micro_f1 > pn.micro_f1,
        "and converts that into strictly better F1"
    );
    println!();
    println!("ok: naive training suppresses recall, the prior-shift correction recovers it");
    Ok(())
}
