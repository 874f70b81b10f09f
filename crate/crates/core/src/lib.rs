//! Mining similes from Serbian text.
//!
//! The pipeline: documents are ingested ([`ingest`]), split into sentences and
//! tokens ([`tokenizer`]), tagged by a trigram HMM ([`tagger`]), and matched
//! against the pattern "verb/adjective (se) + kao/ko/k'o + adjectives + first
//! noun" ([`matcher`]). Candidates are scored by a classifier ([`classifier`])
//! and land in a curated corpus store ([`store`]) that deduplicates
//! inflectional variants by stem sets ([`dedup`], [`stemmer`]).

pub mod classifier;
pub mod collation;
pub mod dedup;
pub mod ingest;
pub mod matcher;
pub mod normalize;
pub mod pipeline;
pub mod scalar;
pub mod stemmer;
pub mod store;
pub mod tagger;
pub mod tokenizer;

pub use scalar::{Fraction, Scalar};

/// Tagger over double-precision probabilities.
pub type Tagger = tagger::TaggerModel<f64>;
/// Naive Bayes over double-precision probabilities.
pub type NaiveBayes = classifier::NbModel<f64>;
/// Linear hinge-loss model with double-precision weights.
pub type Linear = classifier::LinearModel<f64>;
/// Either classifier kind, as loaded from a model file.
pub type Model = classifier::AnyModel<f64>;
/// Metrics as floating point values.
pub type Metrics = classifier::EvalMetrics<f64>;
/// Metrics as exact fractions.
pub type ExactMetrics = classifier::EvalMetrics<num_rational::Rational64>;
