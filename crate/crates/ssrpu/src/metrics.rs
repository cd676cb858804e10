//! Evaluation against gold labels.
//!
//! Micro-averaged precision, recall, and F1 pool true/false positives over
//! every (instance, class) cell, which matches how heavily imbalanced
//! multi-label benchmarks are scored: rare classes contribute per decision,
//! not per class. The none-aware ranking error `L_NA` instead scores the raw
//! scores: per instance it counts gold positives ranked at or below the none
//! score and gold negatives ranked at or above it, with half credit for exact
//! ties, so a model can be judged on its ranking before any thresholding.

use ndarray::ArrayView2;
use serde::Serialize;

use crate::error::{config_err, Result};
use crate::loss::LossForm;
use crate::model::predict_from_scores;

/// Pooled decision counts for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

/// Micro-averaged scores with per-class counts and the mean ranking error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub micro_p: f64,
    pub micro_r: f64,
    pub micro_f1: f64,
    pub per_class: Vec<ClassCounts>,
    /// Mean `L_NA` over instances; 0 is a perfect ranking, K the worst.
    pub mean_l_na: f64,
}

/// Pool decision counts over all cells and micro-average them.
///
/// Conventions at zero denominators: precision is 0 without predicted
/// positives, recall is 0 without gold positives, F1 is 0 when precision and
/// recall are both 0.
pub fn micro_prf(
    pred: ArrayView2<'_, bool>,
    gold: ArrayView2<'_, bool>,
) -> Result<(f64, f64, f64, Vec<ClassCounts>)> {
    if pred.dim() != gold.dim() {
        return Err(config_err!(
            "predictions {:?} and gold labels {:?} disagree on shape",
            pred.dim(),
            gold.dim()
        ));
    }
    if pred.nrows() == 0 || pred.ncols() == 0 {
        return Err(config_err!("evaluation needs at least one instance and class"));
    }
    let mut per_class = vec![
        ClassCounts {
            true_pos: 0,
            false_pos: 0,
            false_neg: 0
        };
        pred.ncols()
    ];
    for ((row, class), &p) in pred.indexed_iter() {
        let g = gold[(row, class)];
        let counts = &mut per_class[class];
        match (p, g) {
            (true, true) => counts.true_pos += 1,
            (true, false) => counts.false_pos += 1,
            (false, true) => counts.false_neg += 1,
            (false, false) => {}
        }
    }
    let tp: usize = per_class.iter().map(|c| c.true_pos).sum();
    let fp: usize = per_class.iter().map(|c| c.false_pos).sum();
    let fn_: usize = per_class.iter().map(|c| c.false_neg).sum();
    let p = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let r = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    Ok((p, r, f1, per_class))
}

/// Mean none-aware ranking error. Per instance and class: one point when a
/// gold positive scores strictly below the none score or a gold negative
/// strictly above it, half a point on an exact tie either way.
pub fn na_metric(scores: ArrayView2<'_, f64>, gold: ArrayView2<'_, bool>) -> Result<f64> {
    let n = gold.nrows();
    let k = gold.ncols();
    if scores.nrows() != n || scores.ncols() != k + 1 {
        return Err(config_err!(
            "scores {:?} do not match {n} instances with {k} classes",
            scores.dim()
        ));
    }
    if n == 0 || k == 0 {
        return Err(config_err!("evaluation needs at least one instance and class"));
    }
    let mut total = 0.0;
    for row in 0..n {
        let none = scores[(row, 0)];
        for class in 0..k {
            let f = scores[(row, class + 1)];
            if f == none {
                total += 0.5;
            } else if gold[(row, class)] {
                total += f64::from(f < none);
            } else {
                total += f64::from(f > none);
            }
        }
    }
    Ok(total / n as f64)
}

/// Threshold scores with the form's decision rule and evaluate everything.
pub fn evaluate_scores(
    scores: ArrayView2<'_, f64>,
    gold: ArrayView2<'_, bool>,
    form: LossForm,
) -> Result<EvalReport> {
    let pred = predict_from_scores(scores, form);
    let (micro_p, micro_r, micro_f1, per_class) = micro_prf(pred.view(), gold)?;
    let mean_l_na = na_metric(scores, gold)?;
    Ok(EvalReport {
        micro_p,
        micro_r,
        micro_f1,
        per_class,
        mean_l_na,
    })
}
