//! The three risk estimators on one small batch, clamp included.
//!
//! `pn` trusts observed labels as complete. `nnpu` treats the unlabeled pool
//! as a negative/positive mixture at the gold prior. `nnspu` additionally
//! corrects the mixture weight for the labeled positives that were removed
//! from the pool. The negative-risk bracket of the latter two clamps at zero
//! so overfit scores cannot push the estimate negative. Run with
//! `cargo run --example risk_estimators`.

use ndarray::array;
use ssrpu::loss::{LossFamily, LossSpec};
use ssrpu::prior::{build_prior_config, PriorShiftConfig};
use ssrpu::risk::{assemble_risk, RiskEstimator, RiskSpec};

fn main() -> ssrpu::Result<()> {
    let scores = array![[0.0, 0.8], [0.1, 0.4], [-0.2, -0.6], [0.3, -1.1], [-0.1, 0.2]];
    let observed = array![[true], [false], [false], [false], [false]];
    let priors = build_prior_config(&[0.2], 1.5, 0.01)?;
    println!(
        "one class, 5 instances, 1 labeled positive; pi = {:.2}, pi_u = {:.4}",
        priors.pi()[0],
        priors.pi_unlabeled()[0]
    );
    println!();
    println!(
        "{:>6} {:>12} {:>14} {:>8} {:>10}",
        "", "pos term", "neg bracket", "clamped", "total"
    );

    let mut totals = Vec::new();
    for estimator in [RiskEstimator::Pn, RiskEstimator::NnPu, RiskEstimator::NnSpu] {
        let spec = RiskSpec {
            estimator,
            loss: LossSpec::ranking(LossFamily::Squared, 0.25)?,
            class_weighting: false,
        };
        let (breakdown, _grad) = assemble_risk(scores.view(), observed.view(), &priors, &spec)?;
        println!(
            "{:>6} {:>12.6} {:>14.6} {:>8} {:>10.6}",
            estimator.to_string(),
            breakdown.per_class_positive_term[0],
            breakdown.per_class_negative_term_raw[0],
            breakdown.clamp_active[0],
            breakdown.total
        );
        totals.push(breakdown.total);
        assert!(breakdown.total >= 0.0, "clamping keeps every estimate nonnegative");
    }

    println!();
    println!("with everything labeled (pi_labeled = pi) the shift vanishes and");
    println!("the corrected estimator IS the naive one, bit for bit:");
    let observed_full = array![[true], [true], [false], [false], [false]];
    let full = PriorShiftConfig::from_parts(vec![0.4], vec![0.4], 1.0, 0.01)?;
    let loss = LossSpec::ranking(LossFamily::Squared, 0.25)?;
    let pn = RiskSpec {
        estimator: RiskEstimator::Pn,
        loss,
        class_weighting: false,
    };
    let spu = RiskSpec {
        estimator: RiskEstimator::NnSpu,
        ..pn
    };
    let (pn_breakdown, pn_grad) = assemble_risk(scores.view(), observed_full.view(), &full, &pn)?;
    let (spu_breakdown, spu_grad) =
        assemble_risk(scores.view(), observed_full.view(), &full, &spu)?;
    println!(
        "  pn total {:.12}, nnspu total {:.12}",
        pn_breakdown.total, spu_breakdown.total
    );
    assert_eq!(pn_breakdown.total, spu_breakdown.total);
    assert_eq!(pn_grad, spu_grad);
    println!();
    println!("ok: totals nonnegative under clamping, complete labeling collapses nnspu to pn");
    Ok(())
}
