use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::model::{MultiMdModel, Sample};
use crate::scalar::Scalar;

/// Confusion counts with fake as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: &[Label], truth: &[Label]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::Pairing(predicted.len(), truth.len()));
        }
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (Label::Fake, Label::Fake) => c.tp += 1,
                (Label::Fake, Label::Real) => c.fp += 1,
                (Label::Real, Label::Fake) => c.fn_ += 1,
                (Label::Real, Label::Real) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Classification quality on one evaluation set.
///
/// A ratio with a zero denominator is reported as `0` and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let (accuracy, _) = ratio(c.tp + c.tn, c.total());
        let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
        let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
        let (f1, f1_undefined) = if precision + recall > 0.0 {
            (2.0 * precision * recall / (precision + recall), false)
        } else {
            (0.0, true)
        };
        Self {
            accuracy,
            precision,
            recall,
            f1,
            confusion: c,
            precision_undefined,
            recall_undefined,
            f1_undefined,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }
}

/// Names of the four reported measures, in [`Metrics::values`] order.
pub const METRIC_NAMES: [&str; 4] = ["accuracy", "precision", "recall", "f1"];

/// Predicts every sample (argmax of `ŷ`) and scores against its label.
pub fn evaluate_metrics<T: Scalar>(model: &MultiMdModel<T>, samples: &[Sample<T>]) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::Training("evaluation set is empty".into()));
    }
    let mut predicted = Vec::with_capacity(samples.len());
    for s in samples {
        predicted.push(model.forward(s)?.predicted());
    }
    let truth: Vec<Label> = samples.iter().map(|s| s.label).collect();
    Ok(Metrics::from_confusion(Confusion::from_predictions(&predicted, &truth)?))
}

/// Unweighted mean of each measure across folds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MeanMetrics {
    pub fn of<'a>(metrics: impl IntoIterator<Item = &'a Metrics>) -> Self {
        let mut sum = [0.0; 4];
        let mut n = 0usize;
        for m in metrics {
            for (s, v) in sum.iter_mut().zip(m.values()) {
                *s += v;
            }
            n += 1;
        }
        let d = n.max(1) as f64;
        Self {
            accuracy: sum[0] / d,
            precision: sum[1] / d,
            recall: sum[2] / d,
            f1: sum[3] / d,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_confusion_matrix() {
        let m = Metrics::from_confusion(Confusion { tp: 3, fp: 1, fn_: 1, tn: 5 });
        assert_eq!(m.values(), [0.8, 0.75, 0.75, 0.75]);
    }

    #[test]
    fn all_correct() {
        let truth = [Label::Fake, Label::Real, Label::Fake];
        let m = Metrics::from_confusion(Confusion::from_predictions(&truth, &truth).unwrap());
        assert_eq!(m.values(), [1.0; 4]);
    }

    #[test]
    fn no_positive_predictions() {
        let m = Metrics::from_confusion(
            Confusion::from_predictions(&[Label::Real, Label::Real], &[Label::Fake, Label::Real]).unwrap(),
        );
        assert!(m.precision_undefined && m.f1_undefined && !m.recall_undefined);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (0.0, 0.0, 0.0, 0.5));
    }

    #[test]
    fn length_mismatch() {
        assert!(Confusion::from_predictions(&[Label::Real], &[]).is_err());
    }

    proptest! {
        #[test]
        fn metric_laws(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50, tn in 0usize..50) {
            prop_assume!(tp + fp + fn_ + tn > 0);
            let m = Metrics::from_confusion(Confusion { tp, fp, fn_, tn });
            prop_assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
            if !m.f1_undefined {
                let lo = m.precision.min(m.recall);
                let hi = m.precision.max(m.recall);
                prop_assert!(m.f1 >= lo - 1e-12 && m.f1 <= hi + 1e-12);
            }
        }
    }
}
