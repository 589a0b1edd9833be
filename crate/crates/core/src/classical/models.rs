use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

const VARIANCE_FLOOR: f64 = 1e-9;
const LOGISTIC_LR: f64 = 0.1;
const LOGISTIC_ITERATIONS: usize = 500;
const TREE_MIN_LEAF: usize = 5;

/// A classifier family together with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    Knn { k: usize },
    NaiveBayes,
    Logistic,
    Tree { max_depth: usize },
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFamily::Knn { k } => write!(f, "knn(k={k})"),
            ModelFamily::NaiveBayes => f.write_str("naive_bayes"),
            ModelFamily::Logistic => f.write_str("logistic"),
            ModelFamily::Tree { max_depth } => write!(f, "tree(depth={max_depth})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf(Label),
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn predict(&self, x: &[f64]) -> Label {
        match self {
            TreeNode::Leaf(label) => *label,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassicalModel {
    Knn {
        k: usize,
        points: Vec<Vec<f64>>,
        labels: Vec<Label>,
    },
    NaiveBayes {
        /// indexed by class
        means: [Vec<f64>; 2],
        variances: [Vec<f64>; 2],
        priors: [f64; 2],
    },
    Logistic {
        weights: Vec<f64>,
        bias: f64,
        /// mean log-loss before each iteration, plus the final value
        loss_trace: Vec<f64>,
    },
    Tree {
        root: TreeNode,
    },
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority vote among the `k` nearest training points (Euclidean). Distance
/// ties go to the lower training index; vote ties to the nearest neighbour.
pub fn knn_predict(model: &ClassicalModel, x: &[f64]) -> Result<Label> {
    let ClassicalModel::Knn { k, points, labels } = model else {
        return Err(Error::InvalidConfig("knn_predict needs a kNN model".into()));
    };
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if *k == 0 || *k > points.len() {
        return Err(Error::InvalidConfig(format!(
            "k={k} with {} training points",
            points.len()
        )));
    }
    model.check_width(x)?;
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, x), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let sleepy = order[..*k].iter().filter(|(_, i)| labels[*i] == Label::Sleepy).count();
    let other = k - sleepy;
    Ok(match sleepy.cmp(&other) {
        std::cmp::Ordering::Greater => Label::Sleepy,
        std::cmp::Ordering::Less => Label::NonSleepy,
        std::cmp::Ordering::Equal => labels[order[0].1],
    })
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_loss(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let total: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &t)| {
            let z = bias + row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
            // log(1 + e^z) - t z, stable
            let softplus = if z > 0.0 {
                z + (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p()
            };
            softplus - t * z
        })
        .sum();
    total / x.len() as f64
}

fn train_logistic(x: &[Vec<f64>], labels: &[Label]) -> ClassicalModel {
    let dim = x[0].len();
    let n = x.len() as f64;
    let y: Vec<f64> = labels.iter().map(|l| l.class_index() as f64).collect();
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut loss_trace = Vec::with_capacity(LOGISTIC_ITERATIONS + 1);
    for _ in 0..LOGISTIC_ITERATIONS {
        loss_trace.push(log_loss(&weights, bias, x, &y));
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (row, &t) in x.iter().zip(&y) {
            let z = bias + row.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>();
            let err = sigmoid(z) - t;
            grad_b += err;
            grad_w.iter_mut().zip(row).for_each(|(g, a)| *g += err * a);
        }
        weights
            .iter_mut()
            .zip(&grad_w)
            .for_each(|(w, g)| *w -= LOGISTIC_LR * g / n);
        bias -= LOGISTIC_LR * grad_b / n;
    }
    loss_trace.push(log_loss(&weights, bias, x, &y));
    ClassicalModel::Logistic {
        weights,
        bias,
        loss_trace,
    }
}

fn train_naive_bayes(x: &[Vec<f64>], labels: &[Label]) -> ClassicalModel {
    let dim = x[0].len();
    let mut means = [vec![0.0; dim], vec![0.0; dim]];
    let mut variances = [vec![0.0; dim], vec![0.0; dim]];
    let mut counts = [0usize; 2];
    for (row, l) in x.iter().zip(labels) {
        let c = l.class_index();
        counts[c] += 1;
        means[c].iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    for c in 0..2 {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    for (row, l) in x.iter().zip(labels) {
        let c = l.class_index();
        let mean = &means[c];
        variances[c]
            .iter_mut()
            .zip(row.iter().zip(mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    for c in 0..2 {
        variances[c]
            .iter_mut()
            .for_each(|s| *s = (*s / counts[c] as f64).max(VARIANCE_FLOOR));
    }
    let n = x.len() as f64;
    ClassicalModel::NaiveBayes {
        means,
        variances,
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[0] as f64 / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

fn majority(ids: &[usize], labels: &[Label]) -> Label {
    let sleepy = ids.iter().filter(|&&i| labels[i] == Label::Sleepy).count();
    if 2 * sleepy > ids.len() {
        Label::Sleepy
    } else {
        Label::NonSleepy
    }
}

/// Best Gini split of `ids`: (feature, threshold, weighted impurity).
#[allow(clippy::needless_range_loop)]
fn best_split(x: &[Vec<f64>], labels: &[Label], ids: &[usize]) -> Option<(usize, f64, f64)> {
    let n = ids.len();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut total = [0usize; 2];
    ids.iter().for_each(|&i| total[labels[i].class_index()] += 1);
    let mut sorted = ids.to_vec();
    for feature in 0..x[ids[0]].len() {
        sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
        let mut left = [0usize; 2];
        for pos in 0..n - 1 {
            left[labels[sorted[pos]].class_index()] += 1;
            let here = x[sorted[pos]][feature];
            let next = x[sorted[pos + 1]][feature];
            let left_n = pos + 1;
            if here == next || left_n < TREE_MIN_LEAF || n - left_n < TREE_MIN_LEAF {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let impurity = (left_n as f64 * gini(left) + (n - left_n) as f64 * gini(right)) / n as f64;
            if best.is_none_or(|(_, _, b)| impurity < b) {
                best = Some((feature, here, impurity));
            }
        }
    }
    best
}

fn grow(x: &[Vec<f64>], labels: &[Label], ids: &[usize], depth_left: usize) -> TreeNode {
    let leaf = TreeNode::Leaf(majority(ids, labels));
    let pure = ids.iter().all(|&i| labels[i] == labels[ids[0]]);
    if depth_left == 0 || pure || ids.len() < 2 * TREE_MIN_LEAF {
        return leaf;
    }
    let mut counts = [0usize; 2];
    ids.iter().for_each(|&i| counts[labels[i].class_index()] += 1);
    match best_split(x, labels, ids) {
        Some((feature, threshold, impurity)) if impurity < gini(counts) - 1e-12 => {
            let (l, r): (Vec<usize>, Vec<usize>) = ids.iter().partition(|&&i| x[i][feature] <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(x, labels, &l, depth_left - 1)),
                right: Box::new(grow(x, labels, &r, depth_left - 1)),
            }
        }
        _ => leaf,
    }
}

/// Fits one family. Every family is deterministic given its data.
pub fn train_classical(family: ModelFamily, x: &[Vec<f64>], labels: &[Label]) -> Result<ClassicalModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.len() != labels.len() {
        return Err(Error::LengthMismatch(x.len(), labels.len()));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::shape(dim, "ragged rows"));
    }
    for class in [Label::NonSleepy, Label::Sleepy] {
        if !labels.contains(&class) {
            return Err(Error::MissingClass(class.name()));
        }
    }
    Ok(match family {
        ModelFamily::Knn { k } => {
            if k == 0 || k > x.len() {
                return Err(Error::InvalidConfig(format!("k={k} with {} training points", x.len())));
            }
            ClassicalModel::Knn {
                k,
                points: x.to_vec(),
                labels: labels.to_vec(),
            }
        }
        ModelFamily::NaiveBayes => train_naive_bayes(x, labels),
        ModelFamily::Logistic => train_logistic(x, labels),
        ModelFamily::Tree { max_depth } => {
            let ids: Vec<usize> = (0..x.len()).collect();
            ClassicalModel::Tree {
                root: grow(x, labels, &ids, max_depth),
            }
        }
    })
}

impl ClassicalModel {
    /// Posterior `[p(non-sleepy), p(sleepy)]` of a naive Bayes model.
    pub fn nb_posterior(&self, x: &[f64]) -> Option<[f64; 2]> {
        let ClassicalModel::NaiveBayes {
            means,
            variances,
            priors,
        } = self
        else {
            return None;
        };
        let log_joint = |c: usize| -> f64 {
            let ll: f64 = x
                .iter()
                .zip(means[c].iter().zip(&variances[c]))
                .map(|(v, (m, s))| -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s))
                .sum();
            priors[c].ln() + ll
        };
        let (a, b) = (log_joint(0), log_joint(1));
        let max = a.max(b);
        let (ea, eb) = ((a - max).exp(), (b - max).exp());
        Some([ea / (ea + eb), eb / (ea + eb)])
    }

    /// Feature width the model was fitted on, when it records one.
    fn width(&self) -> Option<usize> {
        match self {
            ClassicalModel::Knn { points, .. } => points.first().map(Vec::len),
            ClassicalModel::NaiveBayes { means, .. } => means.first().map(Vec::len),
            ClassicalModel::Logistic { weights, .. } => Some(weights.len()),
            ClassicalModel::Tree { .. } => None,
        }
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        match self.width() {
            Some(w) if w != x.len() => Err(Error::shape(w, x.len())),
            _ => Ok(()),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.check_width(x)?;
        match self {
            ClassicalModel::Knn { .. } => knn_predict(self, x),
            ClassicalModel::NaiveBayes { .. } => {
                let p = self.nb_posterior(x).expect("naive Bayes");
                Ok(if p[1] > p[0] { Label::Sleepy } else { Label::NonSleepy })
            }
            ClassicalModel::Logistic { weights, bias, .. } => {
                let z = bias + x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
                Ok(if sigmoid(z) > 0.5 {
                    Label::Sleepy
                } else {
                    Label::NonSleepy
                })
            }
            ClassicalModel::Tree { root } => Ok(root.predict(x)),
        }
    }
}
