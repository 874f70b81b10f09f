//! Multinomial Naive Bayes over categorical indicators with Laplace smoothing.
//!
//! P(f | c) = (count(f, c) + α) / (Σ_f' count(f', c) + α·|V|). Indicators
//! outside the training vocabulary are ignored at prediction time, so a vector
//! of only unseen indicators is decided by the priors.

use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};

use crate::scalar::Scalar;

use super::{
    check_header, class_counts, Classifier, ClassifierError, FeatureMask, FeatureVector, Label, Learner, Prediction,
};

pub(crate) const MAGIC: &str = "SIMILE-NB";

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel<F> {
    alpha: F,
    mask: FeatureMask,
    /// Examples per class, indexed by [`Label::index`].
    class_counts: [u64; 2],
    /// Indicator occurrences per class.
    counts: BTreeMap<String, [u64; 2]>,
    totals: [u64; 2],
}

impl<F: Scalar> NbModel<F> {
    pub fn train(data: &[(FeatureVector, Label)], alpha: F, mask: FeatureMask) -> Result<Self, ClassifierError> {
        let class_counts = class_counts(data)?;
        let mut counts: BTreeMap<String, [u64; 2]> = BTreeMap::new();
        let mut totals = [0u64; 2];
        for (fv, label) in data {
            for ind in fv.indicators() {
                counts.entry(ind).or_default()[label.index()] += 1;
                totals[label.index()] += 1;
            }
        }
        Ok(NbModel {
            alpha,
            mask,
            class_counts,
            counts,
            totals,
        })
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn class_count(&self, label: Label) -> u64 {
        self.class_counts[label.index()]
    }

    pub fn indicator_count(&self, indicator: &str, label: Label) -> u64 {
        self.counts.get(indicator).map_or(0, |c| c[label.index()])
    }

    pub fn prior(&self, label: Label) -> F {
        let n = self.class_counts[0] + self.class_counts[1];
        F::from_count(self.class_counts[label.index()]) / F::from_count(n)
    }

    /// Smoothed P(indicator | label); `None` outside the vocabulary.
    pub fn likelihood(&self, indicator: &str, label: Label) -> Option<F> {
        let c = self.counts.get(indicator)?[label.index()];
        let v = F::from_count(self.counts.len() as u64);
        Some((F::from_count(c) + self.alpha) / (F::from_count(self.totals[label.index()]) + self.alpha * v))
    }

    fn log_joint(&self, fv: &FeatureVector, label: Label) -> F {
        fv.indicators()
            .filter_map(|ind| self.likelihood(&ind, label))
            .fold(self.prior(label).ln(), |acc, p| acc + p.ln())
    }

    /// Writes `SIMILE-NB<TAB>1`, then `mask`, `alpha`, `classes`,
    /// one `feature<TAB>n_not<TAB>n_simile<TAB>indicator` per indicator, and
    /// `end<TAB>count`.
    pub fn write_to<W: Write>(&self, out: W) -> Result<(), ClassifierError> {
        let mut w = BufWriter::new(out);
        writeln!(w, "{MAGIC}\t1")?;
        writeln!(w, "mask\t{}", self.mask)?;
        writeln!(w, "alpha\t{:?}", self.alpha.to_f64_lossy())?;
        writeln!(w, "classes\t{}\t{}", self.class_counts[0], self.class_counts[1])?;
        for (ind, c) in &self.counts {
            writeln!(w, "feature\t{}\t{}\t{ind}", c[0], c[1])?;
        }
        writeln!(w, "end\t{}", self.counts.len())?;
        w.flush()?;
        Ok(())
    }

    pub(crate) fn read_body<R: BufRead>(header: &str, reader: R) -> Result<Self, ClassifierError> {
        check_header(header, MAGIC)?;
        let mut mask = None;
        let mut alpha = None;
        let mut class_counts = None;
        let mut counts = BTreeMap::new();
        let mut totals = [0u64; 2];
        let mut ended = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |message: &str| ClassifierError::Parse {
                line: i + 2,
                message: message.to_string(),
            };
            if ended {
                return Err(err("data after end marker"));
            }
            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            let num = |s: &str| s.parse::<u64>().map_err(|_| err("bad count"));
            match fields.as_slice() {
                ["mask", m] => mask = Some(m.parse()?),
                ["alpha", a] => alpha = Some(a.parse::<f64>().map_err(|_| err("bad alpha"))?),
                ["classes", n, s] => class_counts = Some([num(n)?, num(s)?]),
                ["feature", n, s, ind] => {
                    let c = [num(n)?, num(s)?];
                    totals[0] += c[0];
                    totals[1] += c[1];
                    counts.insert(ind.to_string(), c);
                }
                ["end", n] => {
                    if num(n)? as usize != counts.len() {
                        return Err(err("feature count mismatch"));
                    }
                    ended = true;
                }
                _ => return Err(err("unexpected record")),
            }
        }
        if !ended {
            return Err(ClassifierError::Truncated);
        }
        let missing = || ClassifierError::Parse {
            line: 0,
            message: "missing mask/alpha/classes record".into(),
        };
        Ok(NbModel {
            alpha: F::from_f64_lossy(alpha.ok_or_else(missing)?),
            mask: mask.ok_or_else(missing)?,
            class_counts: class_counts.ok_or_else(missing)?,
            counts,
            totals,
        })
    }
}

impl<F: Scalar> Classifier<F> for NbModel<F> {
    fn predict(&self, fv: &FeatureVector) -> Prediction<F> {
        let score = self.log_joint(fv, Label::Simile) - self.log_joint(fv, Label::NotSimile);
        Prediction::from_score(score)
    }

    fn mask(&self) -> FeatureMask {
        self.mask
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NbLearner<F> {
    pub alpha: F,
    pub mask: FeatureMask,
}

impl<F: Scalar> Default for NbLearner<F> {
    fn default() -> Self {
        NbLearner {
            alpha: F::one(),
            mask: FeatureMask::all(),
        }
    }
}

impl<F: Scalar> Learner<F> for NbLearner<F> {
    type Model = NbModel<F>;
    fn name(&self) -> &str {
        "Naive Bayes"
    }
    fn fit(&self, data: &[(FeatureVector, Label)]) -> Result<Self::Model, ClassifierError> {
        NbModel::train(data, self.alpha, self.mask)
    }
}
