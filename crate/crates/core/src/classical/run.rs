use std::collections::{BTreeMap, BTreeSet};

use super::{maxabs_fit, model_select, train_classical, FeatureVector};
use crate::data::{Dataset, Label, TaskId};
use crate::error::{Error, Result};
use crate::experiments::Split;
use crate::experiments::{
    balance_classes, compute_metrics, stratified_rounds, DatasetSummary, ExperimentConfig, ExperimentReport, ReportRow,
    RoundResult, RowKind, Technique,
};
use crate::seed::derive_seed;

const SELECT_STREAM: u64 = 400;
const BALANCE_STREAM: u64 = 300;

type Key = Option<TaskId>;

/// Per-session mean feature vector for each task tag.
fn group(dataset: &Dataset, features: &[FeatureVector]) -> Result<Vec<BTreeMap<Key, Vec<f64>>>> {
    let index: BTreeMap<&str, usize> = dataset
        .sessions()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id(), i))
        .collect();
    let mut sums: Vec<BTreeMap<Key, (Vec<f64>, usize)>> = vec![BTreeMap::new(); dataset.len()];
    for f in features {
        let &i = index
            .get(f.session_id.as_str())
            .ok_or_else(|| Error::Features(format!("unknown session {:?}", f.session_id)))?;
        let entry = sums[i]
            .entry(f.task)
            .or_insert_with(|| (vec![0.0; f.values().len()], 0));
        entry.0.iter_mut().zip(f.values()).for_each(|(s, v)| *s += v);
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|(k, (s, n))| (k, s.into_iter().map(|v| v / n as f64).collect()))
                .collect()
        })
        .collect())
}

fn rows_for(grouped: &[BTreeMap<Key, Vec<f64>>], dataset: &Dataset, keys: &[Key]) -> Result<Vec<Vec<f64>>> {
    grouped
        .iter()
        .zip(dataset.sessions())
        .map(|(m, s)| {
            let mut row = Vec::new();
            for key in keys {
                let v = m.get(key).ok_or_else(|| {
                    Error::Features(format!(
                        "session {} has no features for {}",
                        s.id(),
                        key.map_or("untagged rows".to_string(), |t| t.to_string())
                    ))
                })?;
                row.extend_from_slice(v);
            }
            Ok(row)
        })
        .collect()
}

fn run_round(
    config: &ExperimentConfig,
    x: &[Vec<f64>],
    labels: &[Label],
    split: &Split,
    round: usize,
) -> Result<RoundResult> {
    let train_ids = if config.balance_classes {
        balance_classes(
            &split.train,
            labels,
            derive_seed(config.seed, BALANCE_STREAM + round as u64),
        )?
    } else {
        split.train.clone()
    };
    let raw: Vec<Vec<f64>> = train_ids.iter().map(|&i| x[i].clone()).collect();
    let scaler = maxabs_fit(&raw)?;
    let train_x = scaler.apply_all(&raw);
    let train_y: Vec<Label> = train_ids.iter().map(|&i| labels[i]).collect();
    let (family, cv) = model_select(
        &train_x,
        &train_y,
        derive_seed(config.seed, SELECT_STREAM + round as u64),
    )?;
    let model = train_classical(family, &train_x, &train_y)?;
    let predictions = split
        .test
        .iter()
        .map(|&i| model.predict(&scaler.apply(&x[i])))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
    let metrics = compute_metrics(&predictions, &truth)?;
    log::info!(
        "round {} {family} (cv {cv:.3}) accuracy {:.4}",
        round + 1,
        metrics.accuracy
    );
    Ok(RoundResult {
        round: round + 1,
        train_size: train_ids.len(),
        test_size: split.test.len(),
        metrics,
        final_loss: None,
        model: Some(family.to_string()),
    })
}

/// One classical model per task (features averaged over the task's
/// utterances) plus an all-task row built by concatenating those per-task
/// means, evaluated with the same stratified rounds as the neural head.
pub fn run_classical(
    config: &ExperimentConfig,
    dataset: &Dataset,
    features: &[FeatureVector],
) -> Result<ExperimentReport> {
    run_classical_parallel(config, dataset, features, 1)
}

/// As [`run_classical`], evaluating up to `parallel` rounds concurrently.
pub fn run_classical_parallel(
    config: &ExperimentConfig,
    dataset: &Dataset,
    features: &[FeatureVector],
    parallel: usize,
) -> Result<ExperimentReport> {
    let mut config = config.clone();
    config.technique = Technique::Classical;
    config.validate()?;
    let grouped = group(dataset, features)?;
    let tasks: BTreeSet<TaskId> = features.iter().filter_map(|f| f.task).collect();
    let untagged = features.iter().any(|f| f.task.is_none());
    if tasks.is_empty() && !untagged {
        return Err(Error::Features("no feature rows".into()));
    }

    let labels = dataset.labels();
    let splits = stratified_rounds(&labels, config.rounds, config.train_fraction, config.seed)?;
    let evaluate = |keys: &[Key]| -> Result<Vec<RoundResult>> {
        let x = rows_for(&grouped, dataset, keys)?;
        crate::experiments::run::map_rounds(splits.len(), parallel, |r| {
            run_round(&config, &x, &labels, &splits[r], r)
        })
    };

    let mut rows = Vec::new();
    for &task in &tasks {
        rows.push(ReportRow::new(RowKind::Classical, vec![task], evaluate(&[Some(task)])?));
    }
    let mut all: Vec<Key> = tasks.iter().map(|&t| Some(t)).collect();
    if untagged {
        all.push(None);
    }
    rows.push(ReportRow::new(RowKind::Classical, Vec::new(), evaluate(&all)?));

    Ok(ExperimentReport {
        seed: config.seed,
        config,
        dataset: DatasetSummary::of(dataset),
        rows,
    })
}
