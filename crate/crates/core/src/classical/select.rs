use super::{train_classical, ModelFamily};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::experiments::stratified_rounds;

/// Candidates in tie-break order.
pub const MODEL_GRID: [ModelFamily; 9] = [
    ModelFamily::Knn { k: 1 },
    ModelFamily::Knn { k: 3 },
    ModelFamily::Knn { k: 5 },
    ModelFamily::Knn { k: 11 },
    ModelFamily::NaiveBayes,
    ModelFamily::Logistic,
    ModelFamily::Tree { max_depth: 2 },
    ModelFamily::Tree { max_depth: 4 },
    ModelFamily::Tree { max_depth: 6 },
];

const CV_FOLDS: usize = 3;

/// Grid search by stratified 3-fold CV accuracy; the earliest grid entry wins
/// ties. Candidates that cannot be fitted on a fold (k larger than the fold's
/// training set) are skipped.
pub fn model_select(x: &[Vec<f64>], labels: &[Label], seed: u64) -> Result<(ModelFamily, f64)> {
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch(x.len(), labels.len()));
    }
    for class in [Label::NonSleepy, Label::Sleepy] {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < 2 * CV_FOLDS {
            return Err(Error::InsufficientData(format!(
                "class {} has {count} samples, model selection needs {}",
                class.name(),
                2 * CV_FOLDS
            )));
        }
    }
    let folds = stratified_rounds(labels, CV_FOLDS, 1.0 - 1.0 / CV_FOLDS as f64, seed)?;

    let mut best: Option<(ModelFamily, f64)> = None;
    'grid: for family in MODEL_GRID {
        let mut total = 0.0;
        for fold in &folds {
            let train_x: Vec<Vec<f64>> = fold.train.iter().map(|&i| x[i].clone()).collect();
            let train_y: Vec<Label> = fold.train.iter().map(|&i| labels[i]).collect();
            let model = match train_classical(family, &train_x, &train_y) {
                Ok(m) => m,
                Err(Error::InvalidConfig(_)) => continue 'grid,
                Err(e) => return Err(e),
            };
            let mut correct = 0;
            for &i in &fold.test {
                if model.predict(&x[i])? == labels[i] {
                    correct += 1;
                }
            }
            total += correct as f64 / fold.test.len() as f64;
        }
        let score = total / folds.len() as f64;
        log::debug!("model_select {family}: {score:.4}");
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((family, score));
        }
    }
    best.ok_or_else(|| Error::InsufficientData("no grid candidate could be fitted".into()))
}
