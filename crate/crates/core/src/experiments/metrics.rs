use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Binary confusion counts with sleepy as the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        // harmonic mean of precision and recall, in counts; 0 when tp = 0
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn compute_metrics(predictions: &[Label], labels: &[Label]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (Label::Sleepy, Label::Sleepy) => tp += 1,
            (Label::Sleepy, Label::NonSleepy) => fp += 1,
            (Label::NonSleepy, Label::NonSleepy) => tn += 1,
            (Label::NonSleepy, Label::Sleepy) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{NonSleepy as N, Sleepy as S};

    #[test]
    fn all_correct() {
        let m = compute_metrics(&[S, N, S], &[S, N, S]).unwrap();
        assert_eq!((m.accuracy, m.f1), (1.0, 1.0));
    }

    #[test]
    fn hand_confusion_matrix() {
        let mut pred = vec![S; 8];
        let mut truth = vec![S; 8];
        pred.extend([S, S]);
        truth.extend([N, N]);
        pred.extend([N, N]);
        truth.extend([S, S]);
        pred.extend([N; 4]);
        truth.extend([N; 4]);
        let m = compute_metrics(&pred, &truth).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (8, 2, 2, 4));
        assert_eq!(m.accuracy, 0.75);
        assert_eq!(m.precision, 0.8);
        assert_eq!(m.recall, 0.8);
        assert_eq!(m.f1, 0.8);
    }

    #[test]
    fn degenerate_all_negative() {
        let m = compute_metrics(&[N, N, N], &[S, N, S]).unwrap();
        assert_eq!((m.recall, m.precision, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_metrics(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            compute_metrics(&[S], &[S, N]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }
}
