use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::seed::stream_rng;

const ROUNDS_STREAM: u64 = 0x5eed_0001;
const BALANCE_STREAM: u64 = 0x5eed_0002;

/// Indices (into the dataset's session list) of one round's train and test sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_name(label: Label) -> &'static str {
    label.name()
}

/// Stratified rounds with pairwise-disjoint test sets.
///
/// When `rounds · (1 − train_fraction) == 1` this is stratified k-fold: each
/// class is shuffled, the classes are concatenated and position `j` goes to
/// fold `j mod rounds`, so fold sizes differ by at most one overall and per
/// class. With a smaller product each round tests on its own disjoint chunk
/// of `round(n_c · (1 − train_fraction))` members per class.
pub fn stratified_rounds(labels: &[Label], rounds: usize, train_fraction: f64, seed: u64) -> Result<Vec<Split>> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig("train_fraction must lie in (0, 1)".into()));
    }
    let coverage = rounds as f64 * (1.0 - train_fraction);
    if coverage > 1.0 + 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "{rounds} rounds at train_fraction {train_fraction} cannot have disjoint test sets"
        )));
    }

    let mut rng = stream_rng(seed, ROUNDS_STREAM);
    let mut by_class = Vec::new();
    for class in [Label::NonSleepy, Label::Sleepy] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < rounds {
            return Err(Error::ClassTooSmall {
                class: class_name(class),
                count: members.len(),
                needed: rounds,
            });
        }
        members.shuffle(&mut rng);
        by_class.push(members);
    }

    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); rounds];
    if (coverage - 1.0).abs() < 1e-9 {
        for (j, &idx) in by_class.iter().flatten().enumerate() {
            tests[j % rounds].push(idx);
        }
    } else {
        for members in &by_class {
            let size = ((members.len() as f64) * (1.0 - train_fraction)).round().max(1.0) as usize;
            if size * rounds > members.len() {
                return Err(Error::ClassTooSmall {
                    class: class_name(labels[members[0]]),
                    count: members.len(),
                    needed: size * rounds,
                });
            }
            for (r, test) in tests.iter_mut().enumerate() {
                test.extend_from_slice(&members[r * size..(r + 1) * size]);
            }
        }
    }

    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..labels.len()).filter(|i| test.binary_search(i).is_err()).collect();
            Split { train, test }
        })
        .collect())
}

/// Randomly undersamples the majority class to the minority count. The
/// result keeps the input order of the surviving ids.
pub fn balance_classes(train: &[usize], labels: &[Label], seed: u64) -> Result<Vec<usize>> {
    let of = |class: Label| -> Vec<usize> { train.iter().copied().filter(|&i| labels[i] == class).collect() };
    let negatives = of(Label::NonSleepy);
    let positives = of(Label::Sleepy);
    if negatives.is_empty() {
        return Err(Error::MissingClass(Label::NonSleepy.name()));
    }
    if positives.is_empty() {
        return Err(Error::MissingClass(Label::Sleepy.name()));
    }
    let (mut majority, minority) = if positives.len() > negatives.len() {
        (positives, negatives)
    } else {
        (negatives, positives)
    };
    majority.shuffle(&mut stream_rng(seed, BALANCE_STREAM));
    majority.truncate(minority.len());
    majority.sort_unstable();
    Ok(train
        .iter()
        .copied()
        .filter(|i| minority.contains(i) || majority.binary_search(i).is_ok())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{NonSleepy as N, Sleepy as S};

    fn labels(neg: usize, pos: usize) -> Vec<Label> {
        let mut v = vec![N; neg];
        v.extend(vec![S; pos]);
        v
    }

    #[test]
    fn ten_sessions_five_rounds() {
        let l = labels(5, 5);
        let splits = stratified_rounds(&l, 5, 0.8, 1).unwrap();
        assert_eq!(splits.len(), 5);
        for s in &splits {
            assert_eq!(s.test.len(), 2);
            assert_eq!(s.test.iter().filter(|&&i| l[i] == S).count(), 1);
            assert!(s.train.iter().all(|i| !s.test.contains(i)));
            assert_eq!(s.train.len() + s.test.len(), 10);
        }
        assert_eq!(splits, stratified_rounds(&l, 5, 0.8, 1).unwrap());
    }

    #[test]
    fn partial_coverage_is_disjoint() {
        let l = labels(20, 30);
        let splits = stratified_rounds(&l, 3, 0.9, 4).unwrap();
        let mut all: Vec<usize> = splits.iter().flat_map(|s| s.test.clone()).collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
        for s in &splits {
            assert_eq!(s.test.iter().filter(|&&i| l[i] == N).count(), 2);
            assert_eq!(s.test.iter().filter(|&&i| l[i] == S).count(), 3);
        }
    }

    #[test]
    fn rejects_small_classes_and_overlap() {
        assert!(matches!(
            stratified_rounds(&labels(3, 10), 5, 0.8, 0),
            Err(Error::ClassTooSmall { count: 3, .. })
        ));
        assert!(stratified_rounds(&labels(10, 10), 5, 0.7, 0).is_err());
    }

    #[test]
    fn balancing() {
        let l = labels(10, 30);
        let ids: Vec<usize> = (0..40).collect();
        let b = balance_classes(&ids, &l, 9).unwrap();
        assert_eq!(b.iter().filter(|&&i| l[i] == S).count(), 10);
        assert_eq!(b.iter().filter(|&&i| l[i] == N).count(), 10);
        assert_eq!(b, balance_classes(&ids, &l, 9).unwrap());

        let even = labels(4, 4);
        let ids: Vec<usize> = (0..8).collect();
        assert_eq!(balance_classes(&ids, &even, 1).unwrap(), ids);

        assert!(matches!(
            balance_classes(&[0, 1], &labels(2, 0), 0),
            Err(Error::MissingClass(_))
        ));
    }
}
