//! Linear classifier trained on the hinge loss by stochastic subgradient descent.
//!
//! Each epoch visits the examples in a seeded random order. The returned
//! weights are the average of the iterates, which keeps the final decision
//! stable on inseparable data.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufWriter, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

use super::{
    check_header, class_counts, Classifier, ClassifierError, FeatureMask, FeatureVector, Label, Learner, Prediction,
};

pub(crate) const MAGIC: &str = "SIMILE-LINEAR";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearHyperparams {
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 regularization strength.
    pub l2: f64,
    pub seed: u64,
}

impl Default for LinearHyperparams {
    fn default() -> Self {
        LinearHyperparams {
            epochs: 20,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<F> {
    weights: BTreeMap<String, F>,
    bias: F,
    hyper: LinearHyperparams,
    mask: FeatureMask,
}

impl<F: Scalar> LinearModel<F> {
    pub fn train(
        data: &[(FeatureVector, Label)],
        hyper: LinearHyperparams,
        mask: FeatureMask,
    ) -> Result<Self, ClassifierError> {
        class_counts(data)?;
        let mut vocab: HashMap<String, usize> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let examples: Vec<(Vec<usize>, F)> = data
            .iter()
            .map(|(fv, label)| {
                let idx = fv
                    .indicators()
                    .map(|ind| {
                        *vocab.entry(ind.clone()).or_insert_with(|| {
                            names.push(ind);
                            names.len() - 1
                        })
                    })
                    .collect();
                let y = if *label == Label::Simile { F::one() } else { -F::one() };
                (idx, y)
            })
            .collect();

        let lr = F::from_f64_lossy(hyper.learning_rate);
        let decay = F::one() - lr * F::from_f64_lossy(hyper.l2);
        let mut w = vec![F::zero(); names.len()];
        let mut b = F::zero();
        let mut w_sum = vec![F::zero(); names.len()];
        let mut b_sum = F::zero();
        let mut steps = 0u64;
        let mut order: Vec<usize> = (0..examples.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);

        for _ in 0..hyper.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let (idx, y) = &examples[i];
                let margin = *y * idx.iter().fold(b, |acc, &j| acc + w[j]);
                for wj in w.iter_mut() {
                    *wj = *wj * decay;
                }
                if margin < F::one() {
                    for &j in idx {
                        w[j] = w[j] + lr * *y;
                    }
                    b = b + lr * *y;
                }
                for (s, wj) in w_sum.iter_mut().zip(&w) {
                    *s = *s + *wj;
                }
                b_sum = b_sum + b;
                steps += 1;
            }
        }

        let n = F::from_count(steps.max(1));
        Ok(LinearModel {
            weights: names.into_iter().zip(w_sum).map(|(name, s)| (name, s / n)).collect(),
            bias: b_sum / n,
            hyper,
            mask,
        })
    }

    pub fn bias(&self) -> F {
        self.bias
    }

    pub fn weight(&self, indicator: &str) -> F {
        self.weights.get(indicator).copied().unwrap_or_else(F::zero)
    }

    pub fn hyperparams(&self) -> LinearHyperparams {
        self.hyper
    }

    pub fn margin(&self, fv: &FeatureVector) -> F {
        fv.indicators().fold(self.bias, |acc, ind| acc + self.weight(&ind))
    }

    /// Writes `SIMILE-LINEAR<TAB>1`, `mask`, `hyper` (epochs, rate, l2, seed),
    /// `bias`, one `weight<TAB>w<TAB>indicator` per indicator, and `end<TAB>count`.
    pub fn write_to<W: Write>(&self, out: W) -> Result<(), ClassifierError> {
        let mut w = BufWriter::new(out);
        let h = self.hyper;
        writeln!(w, "{MAGIC}\t1")?;
        writeln!(w, "mask\t{}", self.mask)?;
        writeln!(w, "hyper\t{}\t{:?}\t{:?}\t{}", h.epochs, h.learning_rate, h.l2, h.seed)?;
        writeln!(w, "bias\t{:?}", self.bias.to_f64_lossy())?;
        for (ind, x) in &self.weights {
            writeln!(w, "weight\t{:?}\t{ind}", x.to_f64_lossy())?;
        }
        writeln!(w, "end\t{}", self.weights.len())?;
        w.flush()?;
        Ok(())
    }

    pub(crate) fn read_body<R: BufRead>(header: &str, reader: R) -> Result<Self, ClassifierError> {
        check_header(header, MAGIC)?;
        let mut mask = None;
        let mut hyper = None;
        let mut bias = None;
        let mut weights = BTreeMap::new();
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
            let real = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let int = |s: &str| s.parse::<u64>().map_err(|_| err("bad integer"));
            let fields: Vec<&str> = line.splitn(5, '\t').collect();
            match fields.as_slice() {
                ["mask", m] => mask = Some(m.parse()?),
                ["hyper", e, lr, l2, seed] => {
                    hyper = Some(LinearHyperparams {
                        epochs: int(e)? as usize,
                        learning_rate: real(lr)?,
                        l2: real(l2)?,
                        seed: int(seed)?,
                    })
                }
                ["bias", x] => bias = Some(real(x)?),
                ["weight", x, ind] => {
                    weights.insert(ind.to_string(), F::from_f64_lossy(real(x)?));
                }
                ["end", n] => {
                    if int(n)? as usize != weights.len() {
                        return Err(err("weight count mismatch"));
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
            message: "missing mask/hyper/bias record".into(),
        };
        Ok(LinearModel {
            weights,
            bias: F::from_f64_lossy(bias.ok_or_else(missing)?),
            hyper: hyper.ok_or_else(missing)?,
            mask: mask.ok_or_else(missing)?,
        })
    }
}

impl<F: Scalar> Classifier<F> for LinearModel<F> {
    fn predict(&self, fv: &FeatureVector) -> Prediction<F> {
        Prediction::from_score(self.margin(fv))
    }

    fn mask(&self) -> FeatureMask {
        self.mask
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinearLearner {
    pub hyper: LinearHyperparams,
    pub mask: FeatureMask,
}

impl<F: Scalar> Learner<F> for LinearLearner {
    type Model = LinearModel<F>;
    fn name(&self) -> &str {
        "Linear (hinge)"
    }
    fn fit(&self, data: &[(FeatureVector, Label)]) -> Result<Self::Model, ClassifierError> {
        LinearModel::train(data, self.hyper, self.mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Namespace;

    fn fv(left: &str, right: &str) -> FeatureVector {
        let mut v = FeatureVector::new();
        v.set(Namespace::Left, left);
        v.set(Namespace::Right, right);
        v
    }

    fn accuracy(m: &LinearModel<f64>, data: &[(FeatureVector, Label)]) -> f64 {
        let ok = data.iter().filter(|(x, y)| m.predict(x).label == *y).count();
        ok as f64 / data.len() as f64
    }

    /// Right side decides the label; left sides are shared across classes.
    fn separable() -> Vec<(FeatureVector, Label)> {
        let lefts = ["radi", "spava", "jede", "trči", "peva"];
        let mut data = Vec::new();
        for (i, l) in lefts.iter().enumerate() {
            let pos = if i % 2 == 0 { "konj" } else { "top" };
            let neg = if i % 2 == 0 { "pravnik" } else { "lekar" };
            data.push((fv(l, pos), Label::Simile));
            data.push((fv(l, neg), Label::NotSimile));
        }
        data
    }

    #[test]
    fn separable_training_accuracy_is_one() {
        let data = separable();
        assert_eq!(data.len(), 10);
        let m = LinearModel::train(&data, LinearHyperparams::default(), FeatureMask::all()).unwrap();
        assert_eq!(accuracy(&m, &data), 1.0);
    }

    #[test]
    fn identical_features_give_majority_fraction() {
        for (pos, neg) in [(7, 3), (3, 7), (6, 4)] {
            let mut data = Vec::new();
            data.extend((0..pos).map(|_| (fv("radi", "konj"), Label::Simile)));
            data.extend((0..neg).map(|_| (fv("radi", "konj"), Label::NotSimile)));
            let m = LinearModel::train(&data, LinearHyperparams::default(), FeatureMask::all()).unwrap();
            let majority = pos.max(neg) as f64 / (pos + neg) as f64;
            assert_eq!(accuracy(&m, &data), majority, "{pos}/{neg}");
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let data = separable();
        let h = LinearHyperparams::default();
        let a: LinearModel<f64> = LinearModel::train(&data, h, FeatureMask::all()).unwrap();
        let b: LinearModel<f64> = LinearModel::train(&data, h, FeatureMask::all()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prediction_is_sign_of_margin() {
        let data = separable();
        let m: LinearModel<f64> = LinearModel::train(&data, LinearHyperparams::default(), FeatureMask::all()).unwrap();
        for (x, _) in &data {
            let manual = m.bias()
                + m.weight(&format!("left={}", x.get(Namespace::Left).unwrap()))
                + m.weight(&format!("right={}", x.get(Namespace::Right).unwrap()));
            let p = m.predict(x);
            assert_eq!(p.score, manual);
            assert_eq!(p.label == Label::Simile, manual > 0.0);
        }
        // Unseen indicators contribute zero.
        assert_eq!(m.margin(&fv("xx", "yy")), m.bias());
    }

    #[test]
    fn single_class_error() {
        let data = vec![(fv("a", "b"), Label::NotSimile)];
        assert!(matches!(
            LinearModel::<f64>::train(&data, LinearHyperparams::default(), FeatureMask::all()),
            Err(ClassifierError::SingleClass)
        ));
    }

    #[test]
    fn file_round_trip() {
        let m: LinearModel<f64> =
            LinearModel::train(&separable(), LinearHyperparams::default(), FeatureMask::all()).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (header, rest) = text.split_once('\n').unwrap();
        let back: LinearModel<f64> = LinearModel::read_body(header, rest.as_bytes()).unwrap();
        assert_eq!(back, m);
    }
}
