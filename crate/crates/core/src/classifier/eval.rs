//! Stratified k-fold cross-validation with pooled precision / recall / F.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Fraction;

use super::{Classifier, ClassifierError, FeatureVector, Label, Learner};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Simile, Label::Simile) => self.tp += 1,
            (Label::NotSimile, Label::Simile) => self.fp += 1,
            (Label::Simile, Label::NotSimile) => self.fn_ += 1,
            (Label::NotSimile, Label::NotSimile) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn metrics<Q: Fraction>(&self) -> EvalMetrics<Q> {
        EvalMetrics::from_confusion(*self)
    }
}

/// Precision, recall and F-measure; undefined ratios are reported as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics<Q> {
    pub precision: Q,
    pub recall: Q,
    pub f_measure: Q,
    pub confusion: Confusion,
}

impl<Q: Fraction> EvalMetrics<Q> {
    pub fn from_confusion(c: Confusion) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                Q::zero()
            } else {
                Q::from_count(num) / Q::from_count(den)
            }
        };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let sum = precision.clone() + recall.clone();
        let f_measure = if sum == Q::zero() {
            Q::zero()
        } else {
            Q::from_count(2) * precision.clone() * recall.clone() / sum
        };
        EvalMetrics {
            precision,
            recall,
            f_measure,
            confusion: c,
        }
    }
}

/// Assigns each example to one of `k` folds, keeping class proportions.
///
/// Positives and negatives are shuffled separately with a seeded generator and
/// dealt round-robin, negatives continuing where positives stopped.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<usize>, ClassifierError> {
    if k < 2 {
        return Err(ClassifierError::InvalidFolds(k));
    }
    if k > labels.len() {
        return Err(ClassifierError::TooFewExamples {
            folds: k,
            examples: labels.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [Label::Simile, Label::NotSimile] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub learner: String,
    pub folds: Vec<usize>,
    /// Out-of-fold prediction for every example.
    pub predictions: Vec<Label>,
    pub confusion: Confusion,
}

impl CvReport {
    pub fn metrics<Q: Fraction>(&self) -> EvalMetrics<Q> {
        self.confusion.metrics()
    }
}

/// Trains on all folds but one, predicts the held-out fold, and pools the
/// predictions over every fold.
pub fn cross_validate_with_folds<F, L>(
    data: &[(FeatureVector, Label)],
    learner: &L,
    folds: &[usize],
) -> Result<CvReport, ClassifierError>
where
    L: Learner<F>,
{
    if folds.len() != data.len() {
        return Err(ClassifierError::FoldMismatch {
            expected: data.len(),
            got: folds.len(),
        });
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(ClassifierError::InvalidFolds(k));
    }
    let mut predictions = vec![Label::NotSimile; data.len()];
    let mut confusion = Confusion::default();
    for fold in 0..k {
        let test: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        let train: Vec<(FeatureVector, Label)> = (0..data.len())
            .filter(|&i| folds[i] != fold)
            .map(|i| data[i].clone())
            .collect();
        let model = learner.fit(&train)?;
        for i in test {
            let p = model.predict(&data[i].0).label;
            predictions[i] = p;
            confusion.record(data[i].1, p);
        }
    }
    Ok(CvReport {
        learner: learner.name().to_string(),
        folds: folds.to_vec(),
        predictions,
        confusion,
    })
}

/// Stratified k-fold cross-validation with a seeded fold assignment.
pub fn cross_validate<F, L>(
    data: &[(FeatureVector, Label)],
    learner: &L,
    k: usize,
    seed: u64,
) -> Result<CvReport, ClassifierError>
where
    L: Learner<F>,
{
    let labels: Vec<Label> = data.iter().map(|(_, l)| *l).collect();
    let folds = stratified_folds(&labels, k, seed)?;
    cross_validate_with_folds(data, learner, &folds)
}

/// Renders rows as an aligned table: Algorithm, Precision, Recall, F-Measure.
pub fn format_table<Q: Fraction>(rows: &[(String, EvalMetrics<Q>)]) -> String {
    let width = rows
        .iter()
        .map(|(name, _)| name.chars().count())
        .chain(std::iter::once("Algorithm".len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  Precision  Recall  F-Measure", "Algorithm");
    for (name, m) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:<9.3}  {:<6.3}  {:.3}",
            name,
            m.precision.to_f64(),
            m.recall.to_f64(),
            m.f_measure.to_f64()
        );
    }
    out
}
