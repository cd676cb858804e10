//! In-memory multi-label datasets with incomplete positive labels.
//!
//! An [`ObservedDataset`] stores dense features together with the per-class
//! *observed* labels: `observed[row][class]` is true when the instance was
//! labeled positive for that class. Unobserved entries are unlabeled, never
//! negative. Gold labels are optional and, when present, must confirm every
//! observed positive; labels can be missing but never wrong.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{config_err, data_err, Result};

/// Features plus observed (and optionally gold) positive labels.
#[derive(Debug, Clone)]
pub struct ObservedDataset {
    features: Array2<f64>,
    observed: Array2<bool>,
    gold: Option<Array2<bool>>,
}

impl ObservedDataset {
    /// Bundle features with label matrices, checking shape agreement and the
    /// labels-never-wrong invariant (`observed ⟹ gold` where gold exists).
    pub fn new(
        features: Array2<f64>,
        observed: Array2<bool>,
        gold: Option<Array2<bool>>,
    ) -> Result<Self> {
        if features.nrows() != observed.nrows() {
            return Err(data_err!(
                "feature rows ({}) and observed-label rows ({}) disagree",
                features.nrows(),
                observed.nrows()
            ));
        }
        if let Some(g) = &gold {
            if g.dim() != observed.dim() {
                return Err(data_err!(
                    "gold labels have shape {:?} but observed labels have {:?}",
                    g.dim(),
                    observed.dim()
                ));
            }
            for ((row, class), &is_observed) in observed.indexed_iter() {
                if is_observed && !g[(row, class)] {
                    return Err(data_err!(
                        "row {row} class {class} is labeled positive but gold-negative; \
                         observed labels may be incomplete, never wrong"
                    ));
                }
            }
        }
        Ok(ObservedDataset {
            features,
            observed,
            gold,
        })
    }

    /// Number of instances.
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.observed.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn observed(&self) -> ArrayView2<'_, bool> {
        self.observed.view()
    }

    pub fn gold(&self) -> Option<ArrayView2<'_, bool>> {
        self.gold.as_ref().map(|g| g.view())
    }

    /// Mutable observed labels for in-crate label edits (censoring, caps).
    /// Edits may only remove labels, which keeps the gold invariant intact.
    pub(crate) fn observed_mut(&mut self) -> &mut Array2<bool> {
        &mut self.observed
    }

    /// Fraction of instances observed positive, per class.
    pub fn estimate_labeled_prior(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(config_err!("cannot estimate priors on an empty dataset"));
        }
        let n = self.len() as f64;
        Ok(self
            .observed
            .axis_iter(Axis(1))
            .map(|col| col.iter().filter(|&&b| b).count() as f64 / n)
            .collect())
    }

    /// Fraction of instances gold-positive, per class. Requires gold labels.
    pub fn estimate_gold_prior(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(config_err!("cannot estimate priors on an empty dataset"));
        }
        let gold = self
            .gold
            .as_ref()
            .ok_or_else(|| config_err!("dataset has no gold labels"))?;
        let n = self.len() as f64;
        Ok(gold
            .axis_iter(Axis(1))
            .map(|col| col.iter().filter(|&&b| b).count() as f64 / n)
            .collect())
    }

    /// Gather the given rows into an owned (features, observed) batch.
    pub fn select_rows(&self, rows: &[usize]) -> (Array2<f64>, Array2<bool>) {
        (
            self.features.select(Axis(0), rows),
            self.observed.select(Axis(0), rows),
        )
    }
}

/// Row indices of one class's labeled positives and unlabeled rest.
///
/// The two sides are disjoint and together cover every row of the batch they
/// were built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    positives: Vec<usize>,
    unlabeled: Vec<usize>,
}

impl ClassPartition {
    /// Split batch rows by one class's observed flags.
    pub fn from_observed(observed: ArrayView2<'_, bool>, class: usize) -> Self {
        let mut positives = Vec::new();
        let mut unlabeled = Vec::new();
        for (row, &flag) in observed.column(class).iter().enumerate() {
            if flag {
                positives.push(row);
            } else {
                unlabeled.push(row);
            }
        }
        ClassPartition {
            positives,
            unlabeled,
        }
    }

    /// Build from explicit index lists, enforcing the disjoint-cover
    /// invariant over `rows` total rows.
    pub fn from_parts(positives: Vec<usize>, unlabeled: Vec<usize>, rows: usize) -> Result<Self> {
        if positives.len() + unlabeled.len() != rows {
            return Err(config_err!(
                "partition covers {} rows but the batch has {rows}",
                positives.len() + unlabeled.len()
            ));
        }
        let mut seen = vec![false; rows];
        for &idx in positives.iter().chain(&unlabeled) {
            if idx >= rows {
                return Err(config_err!("partition index {idx} out of range for {rows} rows"));
            }
            if seen[idx] {
                return Err(config_err!("partition lists row {idx} twice"));
            }
            seen[idx] = true;
        }
        Ok(ClassPartition {
            positives,
            unlabeled,
        })
    }

    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_by_two() -> (Array2<f64>, Array2<bool>) {
        let features = array![[0.0, 1.0], [2.0, 3.0]];
        let observed = array![[true, false], [false, false]];
        (features, observed)
    }

    #[test]
    fn construction_validates_shapes() {
        let (features, observed) = two_by_two();
        assert!(ObservedDataset::new(features.clone(), observed.clone(), None).is_ok());

        let short = array![[true, false]];
        assert!(ObservedDataset::new(features.clone(), short, None).is_err());

        let wide_gold = array![[true, false, true], [false, false, true]];
        assert!(ObservedDataset::new(features, observed, Some(wide_gold)).is_err());
    }

    #[test]
    fn labeled_positive_must_be_gold_positive() {
        let (features, observed) = two_by_two();
        let contradicting = array![[false, false], [false, false]];
        let err = ObservedDataset::new(features.clone(), observed.clone(), Some(contradicting))
            .unwrap_err();
        assert!(err.to_string().contains("row 0 class 0"));

        let consistent = array![[true, true], [false, false]];
        assert!(ObservedDataset::new(features, observed, Some(consistent)).is_ok());
    }

    #[test]
    fn labeled_prior_counts_observed_fractions() {
        let (features, observed) = two_by_two();
        let ds = ObservedDataset::new(features, observed, None).unwrap();
        assert_eq!(ds.estimate_labeled_prior().unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn priors_on_empty_dataset_error() {
        let ds = ObservedDataset::new(
            Array2::zeros((0, 2)),
            Array2::from_elem((0, 2), false),
            None,
        )
        .unwrap();
        assert!(ds.estimate_labeled_prior().is_err());
    }

    #[test]
    fn gold_prior_requires_gold() {
        let (features, observed) = two_by_two();
        let gold = array![[true, false], [true, false]];
        let ds = ObservedDataset::new(features.clone(), observed.clone(), Some(gold)).unwrap();
        assert_eq!(ds.estimate_gold_prior().unwrap(), vec![1.0, 0.0]);

        let ds = ObservedDataset::new(features, observed, None).unwrap();
        assert!(ds.estimate_gold_prior().is_err());
    }

    #[test]
    fn partition_from_observed_splits_rows() {
        let observed = array![[true, false], [false, false], [true, true]];
        let part = ClassPartition::from_observed(observed.view(), 0);
        assert_eq!(part.positives(), &[0, 2]);
        assert_eq!(part.unlabeled(), &[1]);

        let part = ClassPartition::from_observed(observed.view(), 1);
        assert_eq!(part.positives(), &[2]);
        assert_eq!(part.unlabeled(), &[0, 1]);
    }

    #[test]
    fn partition_from_parts_enforces_disjoint_cover() {
        assert!(ClassPartition::from_parts(vec![0], vec![1, 2], 3).is_ok());
        assert!(ClassPartition::from_parts(vec![0], vec![1], 3).is_err());
        assert!(ClassPartition::from_parts(vec![0, 1], vec![1, 2], 3).is_err());
        assert!(ClassPartition::from_parts(vec![0, 3], vec![1, 2], 3).is_err());
    }

    #[test]
    fn select_rows_gathers_batches() {
        let (features, observed) = two_by_two();
        let ds = ObservedDataset::new(features, observed, None).unwrap();
        let (f, o) = ds.select_rows(&[1, 0]);
        assert_eq!(f, array![[2.0, 3.0], [0.0, 1.0]]);
        assert_eq!(o, array![[false, false], [true, false]]);
    }
}
