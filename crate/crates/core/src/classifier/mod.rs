//! Telling similes from literal comparisons.
//!
//! Candidates are turned into six categorical indicators ([`features`]) and
//! scored by multinomial Naive Bayes ([`nb`]) or a linear hinge-loss model
//! ([`linear`]). [`eval`] runs stratified k-fold cross-validation and prints
//! precision / recall / F-measure tables.

pub mod eval;
pub mod features;
pub mod linear;
pub mod nb;

use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::scalar::Scalar;

pub use eval::{
    cross_validate, cross_validate_with_folds, format_table, stratified_folds, Confusion, CvReport, EvalMetrics,
};
pub use features::{FeatureMask, FeatureVector, Featurizer, Namespace};
pub use linear::{LinearHyperparams, LinearLearner, LinearModel};
pub use nb::{NbLearner, NbModel};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data contains only one class")]
    SingleClass,
    #[error("cannot make {folds} folds from {examples} examples")]
    TooFewExamples { folds: usize, examples: usize },
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("fold assignment has {got} entries for {expected} examples")]
    FoldMismatch { expected: usize, got: usize },
    #[error("unknown feature namespace {0:?}")]
    UnknownFeature(String),
    #[error("phrase {0:?} has no connector between two words")]
    NoConnector(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("not a classifier model file")]
    BadMagic,
    #[error("truncated classifier model file")]
    Truncated,
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NotSimile,
    Simile,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bool(simile: bool) -> Self {
        if simile {
            Label::Simile
        } else {
            Label::NotSimile
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Simile => "1",
            Label::NotSimile => "0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<F> {
    pub label: Label,
    /// NB: log-odds of simile; linear: the margin.
    pub score: F,
}

impl<F: Scalar> Prediction<F> {
    /// Positive score means simile; zero and below do not.
    pub fn from_score(score: F) -> Self {
        Prediction {
            label: Label::from_bool(score > F::zero()),
            score,
        }
    }
}

pub trait Classifier<F> {
    fn predict(&self, fv: &FeatureVector) -> Prediction<F>;
    /// The namespaces the model was trained on.
    fn mask(&self) -> FeatureMask;
}

/// Something that can be trained on labeled vectors; used by cross-validation.
pub trait Learner<F> {
    type Model: Classifier<F>;
    fn name(&self) -> &str;
    fn fit(&self, data: &[(FeatureVector, Label)]) -> Result<Self::Model, ClassifierError>;
}

pub(crate) fn class_counts(data: &[(FeatureVector, Label)]) -> Result<[u64; 2], ClassifierError> {
    let mut counts = [0u64; 2];
    for (_, label) in data {
        counts[label.index()] += 1;
    }
    if counts.contains(&0) {
        return Err(ClassifierError::SingleClass);
    }
    Ok(counts)
}

/// Baseline that calls everything a simile.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysPositive;

impl<F: Scalar> Classifier<F> for AlwaysPositive {
    fn predict(&self, _fv: &FeatureVector) -> Prediction<F> {
        Prediction {
            label: Label::Simile,
            score: F::one(),
        }
    }
    fn mask(&self) -> FeatureMask {
        FeatureMask::none()
    }
}

impl<F: Scalar> Learner<F> for AlwaysPositive {
    type Model = AlwaysPositive;
    fn name(&self) -> &str {
        "Always positive"
    }
    fn fit(&self, _data: &[(FeatureVector, Label)]) -> Result<Self::Model, ClassifierError> {
        Ok(AlwaysPositive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPhrase {
    pub label: Label,
    pub phrase: String,
}

/// Parses `label<TAB>phrase` lines (labels `1`/`0`); blank and `#` lines skipped.
pub fn read_labeled<R: BufRead>(reader: R) -> Result<Vec<LabeledPhrase>, ClassifierError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: &str| ClassifierError::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        let (label, phrase) = line.split_once('\t').ok_or_else(|| err("expected label<TAB>phrase"))?;
        let label = match label.trim() {
            "1" => Label::Simile,
            "0" => Label::NotSimile,
            _ => return Err(err("label must be 1 or 0")),
        };
        let phrase = phrase.trim();
        if phrase.is_empty() {
            return Err(err("empty phrase"));
        }
        out.push(LabeledPhrase {
            label,
            phrase: phrase.to_string(),
        });
    }
    Ok(out)
}

/// Featurizes a labeled dataset; a phrase without a connector is an error
/// naming its position.
pub fn featurize_dataset(
    featurizer: &Featurizer,
    data: &[LabeledPhrase],
    mask: FeatureMask,
) -> Result<Vec<(FeatureVector, Label)>, ClassifierError> {
    data.iter()
        .enumerate()
        .map(|(i, lp)| {
            featurizer
                .featurize_phrase(&lp.phrase, mask)
                .map(|fv| (fv, lp.label))
                .map_err(|e| ClassifierError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

/// A model file of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel<F> {
    NaiveBayes(NbModel<F>),
    Linear(LinearModel<F>),
}

impl<F: Scalar> Classifier<F> for AnyModel<F> {
    fn predict(&self, fv: &FeatureVector) -> Prediction<F> {
        match self {
            AnyModel::NaiveBayes(m) => m.predict(fv),
            AnyModel::Linear(m) => m.predict(fv),
        }
    }
    fn mask(&self) -> FeatureMask {
        match self {
            AnyModel::NaiveBayes(m) => m.mask(),
            AnyModel::Linear(m) => m.mask(),
        }
    }
}

impl<F: Scalar> AnyModel<F> {
    pub fn read_from<R: BufRead>(mut reader: R) -> Result<Self, ClassifierError> {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        match header.split('\t').next().unwrap_or("") {
            nb::MAGIC => NbModel::read_body(&header, reader).map(AnyModel::NaiveBayes),
            linear::MAGIC => LinearModel::read_body(&header, reader).map(AnyModel::Linear),
            "" => Err(ClassifierError::Truncated),
            _ => Err(ClassifierError::BadMagic),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        Self::read_from(BufReader::new(std::fs::File::open(path)?))
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        let file = std::fs::File::create(path)?;
        match self {
            AnyModel::NaiveBayes(m) => m.write_to(file),
            AnyModel::Linear(m) => m.write_to(file),
        }
    }
}

/// Checks the `MAGIC<TAB>1` header line shared by both model formats.
pub(crate) fn check_header(header: &str, magic: &str) -> Result<(), ClassifierError> {
    match header.trim_end().split_once('\t') {
        Some((m, "1")) if m == magic => Ok(()),
        Some((m, v)) if m == magic => Err(ClassifierError::Parse {
            line: 1,
            message: format!("unsupported model version {v:?}"),
        }),
        _ => Err(ClassifierError::BadMagic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_parsing() {
        let data = read_labeled("1\tradi kao konj\n\n# c\n0\tradi kao pravnik\n".as_bytes()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].label, Label::Simile);
        assert_eq!(data[1].phrase, "radi kao pravnik");
        let err = read_labeled("1\tradi kao konj\n2\tx kao y\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ClassifierError::Parse { line: 2, .. }));
    }

    #[test]
    fn single_class_rejected() {
        let fv = FeatureVector::new();
        assert!(matches!(
            class_counts(&[(fv.clone(), Label::Simile), (fv, Label::Simile)]),
            Err(ClassifierError::SingleClass)
        ));
    }

    #[test]
    fn model_file_dispatch() {
        assert!(matches!(
            AnyModel::<f64>::read_from("WHAT\t1\n".as_bytes()),
            Err(ClassifierError::BadMagic)
        ));
        assert!(matches!(
            AnyModel::<f64>::read_from("".as_bytes()),
            Err(ClassifierError::Truncated)
        ));
    }
}
