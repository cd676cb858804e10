//! The verification suite: exact population identities checked by brute
//! force on finite distributions.
//!
//! Two facts carry the whole construction, and both are checkable to
//! near machine precision without any training:
//!
//! * On selected-completely-at-random data, the shifted-prior risk written
//!   only in terms of labeled/unlabeled quantities equals the gold-label
//!   risk exactly, for every scorer.
//! * The squared ranking loss with margin `m` has its conditional-risk
//!   minimizer gap at `2 * posterior * m - m`, so the sign of the learned
//!   gap recovers the Bayes rule, and at `m = 0` the gap is identically
//!   zero for every posterior.
//!
//! Run with `cargo run --example theorem_checks`.

use ssrpu::checks::run_all_checks;

fn main() -> ssrpu::Result<()> {
    let results = run_all_checks()?;
    for result in &results {
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict}  {:<32} measured {:>12.3e} vs threshold {:>9.3e}",
            result.name, result.measured, result.threshold
        );
        println!("      {}", result.detail);
    }
    assert!(results.iter().all(|r| r.passed));
    println!();
    println!("ok: all {} checks passed", results.len());
    Ok(())
}
