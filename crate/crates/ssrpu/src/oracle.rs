//! Brute-force ground truths on finite discrete distributions.
//!
//! Everything here is deliberately independent of the batch risk estimators:
//! population risks are recomputed from first principles as mass-weighted
//! conditional expectations, and the unlabeled-pool prior is read off the
//! joint masses instead of going through the shift formula. Tests and the
//! `check` subcommand compare the two routes, so a bug in either side shows
//! up as a disagreement instead of cancelling out.
//!
//! On a finite distribution both population risk forms are exact sums, which
//! makes their predicted equality a strict numeric identity rather than a
//! statistical statement; sampling error would otherwise mask sign and
//! coefficient mistakes.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::ObservedDataset;
use crate::error::{config_err, Result};
use crate::loss::{
    log_sigmoid_ranking_loss, squared_ranking_loss, LossFamily, LossSpec, Sign,
};
use crate::model::Scorer;

/// One support point of a [`DiscreteDistribution`]: a feature vector with its
/// per-class gold signs, per-class labeled flags, and probability mass.
#[derive(Debug, Clone)]
pub struct DistPoint {
    pub features: Vec<f64>,
    pub gold: Vec<bool>,
    pub labeled: Vec<bool>,
    pub mass: f64,
}

/// A finite joint distribution over (features, gold labels, labeled flags).
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    points: Vec<DistPoint>,
    feature_dim: usize,
    class_count: usize,
}

impl DiscreteDistribution {
    /// Validate masses (nonnegative, summing to 1), shape agreement, and the
    /// labels-never-wrong invariant.
    pub fn new(points: Vec<DistPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| config_err!("distribution needs at least one point"))?;
        let feature_dim = first.features.len();
        let class_count = first.gold.len();
        let mut total_mass = 0.0;
        for (idx, p) in points.iter().enumerate() {
            if p.features.len() != feature_dim
                || p.gold.len() != class_count
                || p.labeled.len() != class_count
            {
                return Err(config_err!("point {idx} disagrees on dimensions"));
            }
            if !(p.mass.is_finite() && p.mass >= 0.0) {
                return Err(config_err!("point {idx} has invalid mass {}", p.mass));
            }
            for class in 0..class_count {
                if p.labeled[class] && !p.gold[class] {
                    return Err(config_err!(
                        "point {idx} class {class} is labeled but gold-negative"
                    ));
                }
            }
            total_mass += p.mass;
        }
        if (total_mass - 1.0).abs() > 1e-12 {
            return Err(config_err!("masses sum to {total_mass}, expected 1"));
        }
        Ok(DiscreteDistribution {
            points,
            feature_dim,
            class_count,
        })
    }

    pub fn points(&self) -> &[DistPoint] {
        &self.points
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Gold-positive mass of a class.
    pub fn pi(&self, class: usize) -> f64 {
        self.points
            .iter()
            .filter(|p| p.gold[class])
            .map(|p| p.mass)
            .sum()
    }

    /// Labeled-positive mass of a class.
    pub fn pi_labeled(&self, class: usize) -> f64 {
        self.points
            .iter()
            .filter(|p| p.labeled[class])
            .map(|p| p.mass)
            .sum()
    }

    /// Gold-positive fraction of the unlabeled pool, read directly off the
    /// joint masses: `mass(gold ∧ unlabeled) / mass(unlabeled)`.
    pub fn pi_unlabeled(&self, class: usize) -> Result<f64> {
        let mut unlabeled = 0.0;
        let mut positive_unlabeled = 0.0;
        for p in &self.points {
            if !p.labeled[class] {
                unlabeled += p.mass;
                if p.gold[class] {
                    positive_unlabeled += p.mass;
                }
            }
        }
        if unlabeled <= 0.0 {
            return Err(config_err!("class {class} has no unlabeled mass"));
        }
        Ok(positive_unlabeled / unlabeled)
    }

    fn feature_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.points.len(), self.feature_dim), |(i, j)| {
            self.points[i].features[j]
        })
    }

    /// Mass-weighted conditional expectation of the loss at `sign` over the
    /// points selected by `keep`, for one class's score column.
    fn conditional_loss(
        &self,
        scores: ArrayView2<'_, f64>,
        class: usize,
        sign: Sign,
        loss: &LossSpec,
        keep: impl Fn(&DistPoint) -> bool,
    ) -> Option<f64> {
        let mut mass = 0.0;
        let mut acc = 0.0;
        for (idx, p) in self.points.iter().enumerate() {
            if keep(p) {
                mass += p.mass;
                acc += p.mass * loss.eval(scores[(idx, class + 1)], scores[(idx, 0)], sign).value;
            }
        }
        (mass > 0.0).then_some(acc / mass)
    }

    /// Population risk under gold labels:
    /// `Σ_i π_i·E[ℓ(f_i,+1) | gold_i] + (1−π_i)·E[ℓ(f_i,−1) | ¬gold_i]`.
    pub fn population_risk_ori(&self, scorer: &Scorer, loss: &LossSpec) -> Result<f64> {
        self.check_scorer(scorer)?;
        let scores = scorer.forward(self.feature_matrix().view())?;
        let mut total = 0.0;
        for class in 0..self.class_count {
            let pi = self.pi(class);
            let pos = self
                .conditional_loss(scores.view(), class, Sign::Pos, loss, |p| p.gold[class])
                .ok_or_else(|| config_err!("class {class} has no gold-positive mass"))?;
            let neg = self
                .conditional_loss(scores.view(), class, Sign::Neg, loss, |p| !p.gold[class])
                .ok_or_else(|| config_err!("class {class} has no gold-negative mass"))?;
            total += pi * pos + (1.0 - pi) * neg;
        }
        Ok(total)
    }

    /// Population risk rewritten against the labeled/unlabeled split:
    /// `Σ_i π_i·E[ℓ(f_i,+1) | gold_i] +
    /// (1−π_i)/(1−π_u,i)·E[ℓ(f_i,−1) | unlabeled_i] −
    /// (π_u,i − π_u,i·π_i)/(1−π_u,i)·E[ℓ(f_i,−1) | gold_i]`.
    ///
    /// Equals [`Self::population_risk_ori`] whenever labeled flags are
    /// assigned independently of features within each class's positives,
    /// which [`random_scar_distribution`] enforces by construction.
    pub fn population_risk_spu(&self, scorer: &Scorer, loss: &LossSpec) -> Result<f64> {
        let pi_u: Vec<f64> = (0..self.class_count)
            .map(|class| self.pi_unlabeled(class))
            .collect::<Result<_>>()?;
        self.population_risk_spu_with_unlabeled_priors(scorer, loss, &pi_u)
    }

    /// [`Self::population_risk_spu`] with caller-supplied unlabeled-pool
    /// priors, used by tests that deliberately corrupt them to prove the
    /// equivalence check can fail.
    pub fn population_risk_spu_with_unlabeled_priors(
        &self,
        scorer: &Scorer,
        loss: &LossSpec,
        pi_unlabeled: &[f64],
    ) -> Result<f64> {
        self.check_scorer(scorer)?;
        if pi_unlabeled.len() != self.class_count {
            return Err(config_err!(
                "got {} unlabeled priors for {} classes",
                pi_unlabeled.len(),
                self.class_count
            ));
        }
        let scores = scorer.forward(self.feature_matrix().view())?;
        let mut total = 0.0;
        for (class, &pi_u) in pi_unlabeled.iter().enumerate() {
            let pi = self.pi(class);
            if pi_u >= 1.0 {
                return Err(config_err!(
                    "class {class}: unlabeled-pool prior {pi_u} must be below 1"
                ));
            }
            let pos = self
                .conditional_loss(scores.view(), class, Sign::Pos, loss, |p| p.gold[class])
                .ok_or_else(|| config_err!("class {class} has no gold-positive mass"))?;
            let unl = self
                .conditional_loss(scores.view(), class, Sign::Neg, loss, |p| !p.labeled[class])
                .ok_or_else(|| config_err!("class {class} has no unlabeled mass"))?;
            let pos_as_neg = self
                .conditional_loss(scores.view(), class, Sign::Neg, loss, |p| p.gold[class])
                .expect("positive mass checked above");
            total += pi * pos + (1.0 - pi) / (1.0 - pi_u) * unl
                - (pi_u - pi_u * pi) / (1.0 - pi_u) * pos_as_neg;
        }
        Ok(total)
    }

    fn check_scorer(&self, scorer: &Scorer) -> Result<()> {
        if scorer.feature_dim() != self.feature_dim || scorer.class_count() != self.class_count {
            return Err(config_err!(
                "scorer shape ({}, {}) does not match distribution ({}, {})",
                scorer.feature_dim(),
                scorer.class_count(),
                self.feature_dim,
                self.class_count
            ));
        }
        Ok(())
    }

    /// Draw `n` i.i.d. instances, keeping gold labels.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<ObservedDataset> {
        if n == 0 {
            return Err(config_err!("sample size must be positive"));
        }
        let mut cumulative = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        for p in &self.points {
            acc += p.mass;
            cumulative.push(acc);
        }
        let mut features = Array2::zeros((n, self.feature_dim));
        let mut observed = Array2::from_elem((n, self.class_count), false);
        let mut gold = Array2::from_elem((n, self.class_count), false);
        for row in 0..n {
            let u: f64 = rng.random();
            let idx = cumulative.partition_point(|&c| c < u).min(self.points.len() - 1);
            let p = &self.points[idx];
            for j in 0..self.feature_dim {
                features[(row, j)] = p.features[j];
            }
            for class in 0..self.class_count {
                observed[(row, class)] = p.labeled[class];
                gold[(row, class)] = p.gold[class];
            }
        }
        ObservedDataset::new(features, observed, Some(gold))
    }
}

/// Closed-form minimizer gap of the squared ranking loss's conditional risk.
///
/// At class-posterior `delta` the optimal class-minus-none score gap is
/// `2·delta·margin − margin`, which is positive exactly when `delta > 1/2`.
/// A zero margin has no sign information to offer and is rejected.
pub fn bayes_gap(delta: f64, margin: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(config_err!("posterior must lie in [0, 1], got {delta}"));
    }
    if !margin.is_finite() || margin == 0.0 {
        return Err(config_err!(
            "bayes gap undefined for margin {margin}; the loss is label-blind there"
        ));
    }
    Ok(2.0 * delta * margin - margin)
}

/// Brute-force minimizer of the ranking conditional risk
/// `delta·ℓ(gap, +1) + (1 − delta)·ℓ(gap, −1)` over a uniform gap grid
/// spanning `[−2|margin|−1, 2|margin|+1]`.
///
/// Accepts margin 0 on purpose: it is the tool used to demonstrate that the
/// zero-margin loss has a label-independent minimizer. The logistic ranking
/// loss takes no margin; the argument only sizes its search interval.
pub fn grid_minimize_conditional_risk(
    family: LossFamily,
    margin: f64,
    delta: f64,
    step: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(config_err!("posterior must lie in [0, 1], got {delta}"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(config_err!("grid step must be positive, got {step}"));
    }
    if !margin.is_finite() {
        return Err(config_err!("margin must be finite, got {margin}"));
    }
    let hi = 2.0 * margin.abs() + 1.0;
    let lo = -hi;
    let risk_at = |gap: f64| -> f64 {
        let (pos, neg) = match family {
            LossFamily::Squared => (
                squared_ranking_loss(gap, 0.0, Sign::Pos, margin),
                squared_ranking_loss(gap, 0.0, Sign::Neg, margin),
            ),
            LossFamily::LogSigmoid => (
                log_sigmoid_ranking_loss(gap, 0.0, Sign::Pos),
                log_sigmoid_ranking_loss(gap, 0.0, Sign::Neg),
            ),
        };
        delta * pos + (1.0 - delta) * neg
    };
    let steps = ((hi - lo) / step).ceil() as usize;
    let mut best_gap = lo;
    let mut best_risk = risk_at(lo);
    for j in 1..=steps {
        let gap = (lo + j as f64 * step).min(hi);
        let risk = risk_at(gap);
        if risk < best_risk {
            best_risk = risk;
            best_gap = gap;
        }
    }
    Ok(best_gap)
}

/// Random distribution whose labeled flags are assigned with a class-constant
/// propensity, independent of features.
///
/// Base atoms get random features, masses, and gold labels (every class with
/// at least one positive and one negative atom, at most two positive classes
/// per atom). Each atom is then split into one sub-point per combination of
/// labeled flags, with mass weighted by the class propensities, so the
/// labeled and unlabeled positives of a class share the same feature
/// distribution exactly.
pub fn random_scar_distribution(
    rng: &mut impl Rng,
    class_count: usize,
    feature_dim: usize,
    base_atoms: usize,
) -> Result<DiscreteDistribution> {
    if class_count == 0 || feature_dim == 0 || base_atoms < 2 {
        return Err(config_err!(
            "need at least one class, one feature, and two atoms"
        ));
    }

    let features: Vec<Vec<f64>> = (0..base_atoms)
        .map(|_| (0..feature_dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let raw_masses: Vec<f64> = (0..base_atoms).map(|_| rng.random_range(0.2..1.0)).collect();
    let mass_sum: f64 = raw_masses.iter().sum();

    // Gold assignment: per class pick 1..=2 positive atoms among atoms that
    // still have capacity (at most two positive classes each).
    let mut gold = vec![vec![false; class_count]; base_atoms];
    let mut degree = vec![0usize; base_atoms];
    #[allow(clippy::needless_range_loop)]
    for class in 0..class_count {
        let want = rng.random_range(1..=2usize.min(base_atoms - 1));
        let mut candidates: Vec<usize> = (0..base_atoms).filter(|&a| degree[a] < 2).collect();
        for _ in 0..want.min(candidates.len()) {
            let pick = candidates.remove(rng.random_range(0..candidates.len()));
            gold[pick][class] = true;
            degree[pick] += 1;
        }
    }

    // Class-constant labeling propensities, occasionally pinned to the
    // all-or-nothing edges.
    let propensity: Vec<f64> = (0..class_count)
        .map(|_| match rng.random_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.1..0.9),
        })
        .collect();

    let mut points = Vec::new();
    for atom in 0..base_atoms {
        let positive_classes: Vec<usize> =
            (0..class_count).filter(|&c| gold[atom][c]).collect();
        let combos = 1usize << positive_classes.len();
        for bits in 0..combos {
            let mut mass = raw_masses[atom] / mass_sum;
            let mut labeled = vec![false; class_count];
            for (slot, &class) in positive_classes.iter().enumerate() {
                if bits & (1 << slot) != 0 {
                    labeled[class] = true;
                    mass *= propensity[class];
                } else {
                    mass *= 1.0 - propensity[class];
                }
            }
            if mass > 0.0 {
                points.push(DistPoint {
                    features: features[atom].clone(),
                    gold: gold[atom].clone(),
                    labeled,
                    mass,
                });
            }
        }
    }
    DiscreteDistribution::new(points)
}

/// Sample-average form of the shifted risk, without the non-negativity clamp
/// and without class weighting, evaluated with exact priors. This is the
/// unbiased estimator whose expectation is [`DiscreteDistribution::population_risk_spu`];
/// it exists only for convergence comparisons, never for training.
pub fn empirical_spu_risk_unclamped(
    scores: ArrayView2<'_, f64>,
    observed: ArrayView2<'_, bool>,
    pi: &[f64],
    pi_unlabeled: &[f64],
    loss: &LossSpec,
) -> Result<f64> {
    let k = observed.ncols();
    if scores.nrows() != observed.nrows() || scores.ncols() != k + 1 {
        return Err(config_err!(
            "scores {:?} do not match observed labels {:?}",
            scores.dim(),
            observed.dim()
        ));
    }
    if pi.len() != k || pi_unlabeled.len() != k {
        return Err(config_err!("prior vectors do not match class count {k}"));
    }
    let mut total = 0.0;
    for class in 0..k {
        let pi_u = pi_unlabeled[class];
        let mut pos_sum = 0.0;
        let mut pos_as_neg_sum = 0.0;
        let mut pos_count = 0usize;
        let mut unl_sum = 0.0;
        let mut unl_count = 0usize;
        for row in 0..observed.nrows() {
            let f = scores[(row, class + 1)];
            let f_none = scores[(row, 0)];
            if observed[(row, class)] {
                pos_sum += loss.eval(f, f_none, Sign::Pos).value;
                pos_as_neg_sum += loss.eval(f, f_none, Sign::Neg).value;
                pos_count += 1;
            } else {
                unl_sum += loss.eval(f, f_none, Sign::Neg).value;
                unl_count += 1;
            }
        }
        if pos_count == 0 || unl_count == 0 {
            return Err(config_err!(
                "class {class}: sample needs labeled and unlabeled rows for the unclamped estimator"
            ));
        }
        total += pi[class] * pos_sum / pos_count as f64
            + (1.0 - pi[class]) / (1.0 - pi_u) * unl_sum / unl_count as f64
            - (pi_u - pi_u * pi[class]) / (1.0 - pi_u) * pos_as_neg_sum / pos_count as f64;
    }
    Ok(total)
}

/// Error of the unclamped empirical risk against its population value, per
/// sample size, aggregated over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
}

/// Measure how fast the unclamped empirical shifted risk approaches its
/// population value as the sample grows.
pub fn empirical_vs_population_convergence(
    dist: &DiscreteDistribution,
    scorer: &Scorer,
    loss: &LossSpec,
    sample_sizes: &[usize],
    seeds: &[u64],
) -> Result<Vec<ConvergencePoint>> {
    use rand::SeedableRng;
    if sample_sizes.is_empty() || seeds.is_empty() {
        return Err(config_err!("need at least one sample size and one seed"));
    }
    let population = dist.population_risk_spu(scorer, loss)?;
    let pi: Vec<f64> = (0..dist.class_count()).map(|c| dist.pi(c)).collect();
    let pi_u: Vec<f64> = (0..dist.class_count())
        .map(|c| dist.pi_unlabeled(c))
        .collect::<Result<_>>()?;
    let mut curve = Vec::with_capacity(sample_sizes.len());
    for &n in sample_sizes {
        let mut errors = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sample = dist.sample(n, &mut rng)?;
            let scores = scorer.forward(sample.features())?;
            let empirical =
                empirical_spu_risk_unclamped(scores.view(), sample.observed(), &pi, &pi_u, loss)?;
            errors.push((empirical - population).abs());
        }
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        let max = errors.iter().cloned().fold(0.0, f64::max);
        curve.push(ConvergencePoint {
            n,
            mean_abs_error: mean,
            max_abs_error: max,
        });
    }
    Ok(curve)
}
