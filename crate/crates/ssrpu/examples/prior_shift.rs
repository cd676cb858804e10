//! How incomplete labeling shifts the class prior of the unlabeled pool.
//!
//! When annotators label only a fraction of true positives, the unlabeled
//! pool is not a sample of negatives: it still contains the missed positives.
//! Its positive fraction is `pi_u = (pi - pi_labeled) / (1 - pi_labeled)`,
//! strictly between zero and the gold prior whenever labeling is partial.
//! Run with `cargo run --example prior_shift`.

use ssrpu::prior::{build_prior_config, class_weight, derive_unlabeled_prior};

fn main() -> ssrpu::Result<()> {
    let pi = 0.3;
    println!("gold prior pi = {pi}");
    println!("{:>10} {:>10}", "pi_labeled", "pi_u");
    let mut last = f64::INFINITY;
    for pi_labeled in [0.0, 0.05, 0.1, 0.2, 0.3] {
        let pi_u = derive_unlabeled_prior(pi, pi_labeled)?;
        println!("{pi_labeled:>10} {pi_u:>10.6}");
        assert!(
            pi_u <= last,
            "the unlabeled-pool prior shrinks as more positives get labeled"
        );
        last = pi_u;
    }

    println!();
    println!("the two endpoints are exact, not approximate:");
    let no_labels = derive_unlabeled_prior(pi, 0.0)?;
    println!("  nothing labeled:    pi_u = {no_labels} (the gold prior)");
    assert_eq!(no_labels, pi);
    let all_labeled = derive_unlabeled_prior(pi, pi)?;
    println!("  everything labeled: pi_u = {all_labeled} (a clean negative pool)");
    assert_eq!(all_labeled, 0.0);

    println!();
    println!("a full prior config from observed labeled fractions:");
    let labeled = [0.1, 1.0 / 15.0, 0.0];
    let multiplier = 3.0;
    let config = build_prior_config(&labeled, multiplier, 0.01)?;
    println!(
        "  labeled priors {labeled:?} scaled by {multiplier} (zeros fall back to epsilon)"
    );
    for class in 0..config.class_count() {
        println!(
            "  class {class}: pi = {:.4}, pi_u = {:.4}, positive-term weight {:.4}",
            config.pi()[class],
            config.pi_unlabeled()[class],
            class_weight(config.pi()[class])?
        );
    }
    assert!((config.pi()[0] - 0.3).abs() < 1e-12);
    assert!((config.pi()[1] - 0.2).abs() < 1e-12);
    assert_eq!(config.pi()[2], 0.01);
    assert!(
        config.pi_unlabeled()[2] == config.pi()[2],
        "a class with no labels at all is ordinary PU: pi_u equals pi"
    );
    println!();
    println!("ok: shift endpoints exact, pool prior monotone, config consistent");
    Ok(())
}
