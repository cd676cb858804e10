//! The loss surfaces, their gradients, and why the ranking margin matters.
//!
//! Plain losses score each class against a fixed zero threshold; ranking
//! losses score it against a learned none-of-the-above column, offset by a
//! margin. With the squared ranking loss a zero margin is degenerate: both
//! label signs are happiest at exactly the same score gap, so nothing
//! separates positives from negatives. Run with
//! `cargo run --example loss_functions`.

use ssrpu::loss::{LossFamily, LossSpec, Sign, DEFAULT_MARGIN};

fn probe(spec: &LossSpec, gap: f64) -> (f64, f64) {
    let eval_pos = spec.eval(gap, 0.0, Sign::Pos);
    let eval_neg = spec.eval(gap, 0.0, Sign::Neg);
    (eval_pos.value, eval_neg.value)
}

fn main() -> ssrpu::Result<()> {
    let margin = DEFAULT_MARGIN;
    let ranking = LossSpec::ranking(LossFamily::Squared, margin)?;
    println!("squared ranking loss, margin {margin}: loss against the score gap f - f0");
    println!("{:>6} {:>12} {:>12}", "gap", "positive", "negative");
    for gap in [-0.5, -0.25, 0.0, 0.25, 0.5] {
        let (pos, neg) = probe(&ranking, gap);
        println!("{gap:>6} {pos:>12.6} {neg:>12.6}");
    }
    let (at_margin_pos, _) = probe(&ranking, margin);
    let (_, at_neg_margin_neg) = probe(&ranking, -margin);
    assert_eq!(at_margin_pos, 0.0, "a positive is satisfied at gap = +margin");
    assert_eq!(at_neg_margin_neg, 0.0, "a negative is satisfied at gap = -margin");
    println!("positives want the gap at +{margin}, negatives at -{margin}: 2*margin of separation");

    println!();
    let degenerate = LossSpec::ranking_unchecked(LossFamily::Squared, 0.0);
    let (pos0, neg0) = probe(&degenerate, 0.0);
    assert_eq!(pos0, 0.0);
    assert_eq!(neg0, 0.0);
    println!("at margin 0 both signs are satisfied at gap 0: no separation remains,");
    println!("which is why the margin guard exists:");
    let rejected = LossSpec::ranking(LossFamily::Squared, 0.0);
    assert!(rejected.is_err());
    println!("  LossSpec::ranking(_, 0.0) -> {}", rejected.unwrap_err());

    println!();
    println!("gradients match finite differences (squared and log-sigmoid, plain and ranking):");
    let specs = [
        LossSpec::plain(LossFamily::Squared),
        LossSpec::plain(LossFamily::LogSigmoid),
        LossSpec::ranking(LossFamily::Squared, margin)?,
        LossSpec::ranking(LossFamily::LogSigmoid, margin)?,
    ];
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for spec in &specs {
        for sign in [Sign::Pos, Sign::Neg] {
            for (score, none_score) in [(0.3, -0.1), (-0.7, 0.4), (1.2, 0.9)] {
                let eval = spec.eval(score, none_score, sign);
                let fd_score = (spec.eval(score + h, none_score, sign).value
                    - spec.eval(score - h, none_score, sign).value)
                    / (2.0 * h);
                let fd_none = (spec.eval(score, none_score + h, sign).value
                    - spec.eval(score, none_score - h, sign).value)
                    / (2.0 * h);
                worst = worst
                    .max((eval.grad_score - fd_score).abs())
                    .max((eval.grad_none - fd_none).abs());
            }
        }
    }
    println!("  max |analytic - central difference| = {worst:.3e}");
    assert!(worst < 1e-8);
    println!();
    println!("ok: margin anchors the gap, zero margin is rejected, gradients check out");
    Ok(())
}
