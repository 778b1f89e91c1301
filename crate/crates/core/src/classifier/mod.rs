//! Linear SVM decision rule, evaluation and persistence.

mod format;
mod train;

use std::fmt;

pub use format::{decode_model, encode_model, load_model, save_model, ModelFormatError, MODEL_MAGIC};
pub use train::{objective, train, TrainError, TrainParams};

use crate::descriptor::{WindowDescriptor, DESCRIPTOR_LEN};
use crate::FEATURE_ORDER_VERSION;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("dimension mismatch: model has {model} weights, descriptor has {descriptor} features")]
    Dimension { model: usize, descriptor: usize },
    #[error("model weights must have {DESCRIPTOR_LEN} entries, got {0}")]
    WeightCount(usize),
    #[error("model contains a non-finite value")]
    NonFinite,
    #[error("cannot evaluate an empty sample list")]
    EmptySamples,
}

/// Hyperplane `D(X) = W . X + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    weights: Vec<f32>,
    bias: f32,
    feature_order_version: String,
}

impl SvmModel {
    /// A model in the engine's canonical feature order.
    pub fn new(weights: Vec<f32>, bias: f32) -> Result<Self, ClassifierError> {
        Self::with_version(weights, bias, FEATURE_ORDER_VERSION)
    }

    pub fn with_version(
        weights: Vec<f32>,
        bias: f32,
        feature_order_version: impl Into<String>,
    ) -> Result<Self, ClassifierError> {
        if weights.len() != DESCRIPTOR_LEN {
            return Err(ClassifierError::WeightCount(weights.len()));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(ClassifierError::NonFinite);
        }
        Ok(Self {
            weights,
            bias,
            feature_order_version: feature_order_version.into(),
        })
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> f32 {
        self.bias
    }

    pub fn feature_order_version(&self) -> &str {
        &self.feature_order_version
    }

    /// `(c W, c b)`; negative `c` flips the decision for every nonzero margin.
    pub fn scaled(&self, c: f32) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w * c).collect(),
            bias: self.bias * c,
            feature_order_version: self.feature_order_version.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    NonPerson = 0,
    Person = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::NonPerson),
            1 => Some(Label::Person),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Hinge-loss sign: +1 for person, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Person => 1.0,
            Label::NonPerson => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Person => Label::NonPerson,
            Label::NonPerson => Label::Person,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub descriptor: WindowDescriptor,
    pub label: Label,
}

/// `W . X + b`, accumulated sequentially in binary32 in canonical feature
/// order. The accumulation order is fixed so results are bit-reproducible.
pub fn decision_value(model: &SvmModel, x: &WindowDescriptor) -> Result<f32, ClassifierError> {
    let features = x.features();
    if features.len() != model.weights.len() {
        return Err(ClassifierError::Dimension {
            model: model.weights.len(),
            descriptor: features.len(),
        });
    }
    let mut acc = 0.0f32;
    for (w, v) in model.weights.iter().zip(features) {
        acc += w * v;
    }
    Ok(acc + model.bias)
}

/// Person iff the decision value is strictly positive; `D(X) = 0` is a
/// non-person.
pub fn label_for(decision: f32) -> Label {
    if decision > 0.0 {
        Label::Person
    } else {
        Label::NonPerson
    }
}

pub fn classify(model: &SvmModel, x: &WindowDescriptor) -> Result<Label, ClassifierError> {
    decision_value(model, x).map(label_for)
}

/// Confusion counts in the layout of a per-class accuracy table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalReport {
    pub true_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub false_pos: usize,
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        (100 * num) as f64 / den as f64
    }
}

impl EvalReport {
    pub fn positives(&self) -> usize {
        self.true_pos + self.false_neg
    }

    pub fn negatives(&self) -> usize {
        self.true_neg + self.false_pos
    }

    pub fn total(&self) -> usize {
        self.positives() + self.negatives()
    }

    pub fn correct(&self) -> usize {
        self.true_pos + self.true_neg
    }

    /// Accuracy on person samples, as a ratio.
    pub fn positive_accuracy(&self) -> f64 {
        percent(self.true_pos, self.positives()) / 100.0
    }

    pub fn negative_accuracy(&self) -> f64 {
        percent(self.true_neg, self.negatives()) / 100.0
    }

    pub fn total_accuracy(&self) -> f64 {
        percent(self.correct(), self.total()) / 100.0
    }

    fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Person, Label::Person) => self.true_pos += 1,
            (Label::Person, Label::NonPerson) => self.false_neg += 1,
            (Label::NonPerson, Label::NonPerson) => self.true_neg += 1,
            (Label::NonPerson, Label::Person) => self.false_pos += 1,
        }
    }

    /// Rows of (name, correct, wrong, total, accuracy %).
    pub fn rows(&self) -> [(&'static str, usize, usize, usize, f64); 3] {
        [
            (
                "With person",
                self.true_pos,
                self.false_neg,
                self.positives(),
                percent(self.true_pos, self.positives()),
            ),
            (
                "Without person",
                self.true_neg,
                self.false_pos,
                self.negatives(),
                percent(self.true_neg, self.negatives()),
            ),
            (
                "Total",
                self.correct(),
                self.total() - self.correct(),
                self.total(),
                percent(self.correct(), self.total()),
            ),
        ]
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16}{:<16}{:<17}Accuracy rate",
            "Input images", "True detection", "False detection"
        )?;
        for (name, ok, bad, n, pct) in self.rows() {
            writeln!(
                f,
                "{:<16}{:<16}{:<17}{:.2}%",
                name,
                format!("{ok}/{n}"),
                format!("{bad}/{n}"),
                pct
            )?;
        }
        Ok(())
    }
}

/// Table of correct/incorrect decisions per class.
pub fn evaluate(model: &SvmModel, samples: &[LabeledSample]) -> Result<EvalReport, ClassifierError> {
    if samples.is_empty() {
        return Err(ClassifierError::EmptySamples);
    }
    let mut report = EvalReport::default();
    for s in samples {
        report.record(s.label, classify(model, &s.descriptor)?);
    }
    Ok(report)
}

/// Builds a report from already-computed `(truth, predicted)` pairs.
pub fn evaluate_decisions(decisions: impl IntoIterator<Item = (Label, Label)>) -> Result<EvalReport, ClassifierError> {
    let mut report = EvalReport::default();
    for (truth, predicted) in decisions {
        report.record(truth, predicted);
    }
    if report.total() == 0 {
        return Err(ClassifierError::EmptySamples);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(j: usize, value: f32) -> Vec<f32> {
        let mut v = vec![0.0; DESCRIPTOR_LEN];
        v[j] = value;
        v
    }

    fn descriptor(v: Vec<f32>) -> WindowDescriptor {
        WindowDescriptor::from_vec(v).unwrap()
    }

    #[test]
    fn decision_examples() {
        let zero = SvmModel::new(vec![0.0; DESCRIPTOR_LEN], 0.5).unwrap();
        let x = descriptor((0..DESCRIPTOR_LEN).map(|i| (i % 7) as f32 / 7.0).collect());
        assert_eq!(decision_value(&zero, &x).unwrap(), 0.5);

        let e = SvmModel::new(unit(1234, 1.0), 0.0).unwrap();
        assert_eq!(decision_value(&e, &descriptor(unit(1234, 0.25))).unwrap(), 0.25);
    }

    #[test]
    fn decision_matches_wide_accumulator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let w: Vec<f32> = (0..DESCRIPTOR_LEN).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: Vec<f32> = (0..DESCRIPTOR_LEN).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: f32 = rng.random_range(-1.0..1.0);
            let oracle = w
                .iter()
                .zip(&x)
                .map(|(&a, &c)| f64::from(a) * f64::from(c))
                .sum::<f64>()
                + f64::from(b);
            let model = SvmModel::new(w, b).unwrap();
            let got = f64::from(decision_value(&model, &descriptor(x)).unwrap());
            assert!(
                (got - oracle).abs() <= 1e-4 * oracle.abs().max(1.0),
                "{got} vs {oracle}"
            );
        }
    }

    #[test]
    fn boundary_rule() {
        assert_eq!(label_for(0.5), Label::Person);
        assert_eq!(label_for(-0.5), Label::NonPerson);
        assert_eq!(label_for(0.0), Label::NonPerson);
        assert_eq!(label_for(-0.0), Label::NonPerson);
    }

    #[test]
    fn model_validation() {
        assert_eq!(SvmModel::new(vec![0.0; 3], 0.0), Err(ClassifierError::WeightCount(3)));
        assert_eq!(
            SvmModel::new(vec![0.0; DESCRIPTOR_LEN], f32::NAN),
            Err(ClassifierError::NonFinite)
        );
        let mut w = vec![0.0; DESCRIPTOR_LEN];
        w[5] = f32::INFINITY;
        assert_eq!(SvmModel::new(w, 0.0), Err(ClassifierError::NonFinite));
    }

    #[test]
    fn table_one_arithmetic() {
        let r = EvalReport {
            true_pos: 134,
            false_neg: 26,
            true_neg: 114,
            false_pos: 20,
        };
        let rows = r.rows();
        assert_eq!(format!("{:.2}", rows[0].4), "83.75");
        assert_eq!(format!("{:.2}", rows[1].4), "85.07");
        assert_eq!(format!("{:.2}", rows[2].4), "84.35");
        assert_eq!(r.total(), 294);
        assert_eq!(r.total_accuracy(), 248.0 / 294.0);
        let text = r.to_string();
        assert!(text.contains("134/160"), "{text}");
        assert!(text.contains("20/134"));
        assert!(text.contains("248/294"));
        assert!(text.contains("84.35%"));
    }

    #[test]
    fn always_person_on_all_person() {
        let model = SvmModel::new(vec![0.0; DESCRIPTOR_LEN], 1.0).unwrap();
        let samples: Vec<_> = (0..5)
            .map(|_| LabeledSample {
                descriptor: WindowDescriptor::zeros(),
                label: Label::Person,
            })
            .collect();
        let r = evaluate(&model, &samples).unwrap();
        assert_eq!(r.total_accuracy(), 1.0);
        assert_eq!(evaluate(&model, &[]), Err(ClassifierError::EmptySamples));
    }

    fn random_samples(seed: u64, n: usize) -> (SvmModel, Vec<LabeledSample>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f32> = (0..DESCRIPTOR_LEN).map(|_| rng.random_range(-1.0..1.0)).collect();
        let model = SvmModel::new(w, rng.random_range(-2.0..2.0)).unwrap();
        let samples = (0..n)
            .map(|_| LabeledSample {
                descriptor: descriptor((0..DESCRIPTOR_LEN).map(|_| rng.random_range(0.0..0.05)).collect()),
                label: if rng.random_bool(0.5) {
                    Label::Person
                } else {
                    Label::NonPerson
                },
            })
            .collect();
        (model, samples)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn negation_flips_nonzero_decisions(seed in any::<u64>()) {
            let (model, samples) = random_samples(seed, 16);
            let neg = model.scaled(-1.0);
            for s in &samples {
                let d = decision_value(&model, &s.descriptor).unwrap();
                if d != 0.0 {
                    prop_assert_eq!(classify(&neg, &s.descriptor).unwrap(), classify(&model, &s.descriptor).unwrap().flipped());
                }
            }
            let (r, n) = (evaluate(&model, &samples).unwrap(), evaluate(&neg, &samples).unwrap());
            prop_assert_eq!((r.true_pos, r.false_neg, r.true_neg, r.false_pos), (n.false_neg, n.true_pos, n.false_pos, n.true_neg));
        }

        #[test]
        fn positive_rescaling_keeps_labels(seed in any::<u64>(), c in prop_oneof![Just(0.5f32), Just(2.0f32), Just(8.0f32), Just(0.125f32)]) {
            let (model, samples) = random_samples(seed, 16);
            let scaled = model.scaled(c);
            for s in &samples {
                prop_assert_eq!(classify(&scaled, &s.descriptor).unwrap(), classify(&model, &s.descriptor).unwrap());
            }
        }

        #[test]
        fn evaluation_is_permutation_invariant(seed in any::<u64>(), rot in 0usize..16) {
            let (model, mut samples) = random_samples(seed, 16);
            let before = evaluate(&model, &samples).unwrap();
            samples.rotate_left(rot);
            samples.reverse();
            prop_assert_eq!(evaluate(&model, &samples).unwrap(), before);
        }
    }
}
