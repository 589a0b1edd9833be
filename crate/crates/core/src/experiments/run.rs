use std::collections::BTreeSet;

use rayon::prelude::*;

use super::report::{DatasetSummary, ExperimentReport, ReportRow, RoundResult, RowKind};
use super::{balance_classes, compute_metrics, stratified_rounds, ExperimentConfig, Split, Technique};
use crate::data::{assemble_tensor, Dataset, Label, Selection, TaskId};
use crate::error::{Error, Result};
use crate::nn::{init_params, predict, train, HeadConfig, ModelParams, TrainConfig};
use crate::seed::derive_seed;
use crate::tensor::Tensor;

const INIT_STREAM: u64 = 100;
const SHUFFLE_STREAM: u64 = 200;
const BALANCE_STREAM: u64 = 300;
const FINAL_STREAM: u64 = 500;

/// One report row: a technique applied to a task set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSpec {
    pub kind: RowKind,
    pub tasks: BTreeSet<TaskId>,
}

impl RowSpec {
    pub fn selection(&self) -> Selection {
        match self.kind {
            RowKind::Masking => Selection::Mask(self.tasks.clone()),
            RowKind::Separate => Selection::Only(self.tasks.clone()),
            RowKind::Baseline | RowKind::Classical => Selection::All,
        }
    }

    fn baseline() -> Self {
        Self {
            kind: RowKind::Baseline,
            tasks: BTreeSet::new(),
        }
    }

    /// Rows a technique produces; sweeps end with the baseline row.
    pub fn expand(technique: &Technique) -> Result<Vec<Self>> {
        let single = |kind, t| Self {
            kind,
            tasks: BTreeSet::from([t]),
        };
        let rows = match technique {
            Technique::Baseline => vec![Self::baseline()],
            Technique::Mask(tasks) if tasks.is_empty() => vec![Self::baseline()],
            Technique::Mask(tasks) => vec![Self {
                kind: RowKind::Masking,
                tasks: tasks.clone(),
            }],
            Technique::Separate(tasks) => {
                if tasks.is_empty() {
                    return Err(Error::InvalidConfig("separate training needs at least one task".into()));
                }
                vec![Self {
                    kind: RowKind::Separate,
                    tasks: tasks.clone(),
                }]
            }
            Technique::MaskSweep | Technique::SeparateSweep => {
                let kind = if *technique == Technique::MaskSweep {
                    RowKind::Masking
                } else {
                    RowKind::Separate
                };
                let mut rows: Vec<Self> = TaskId::ALL.into_iter().map(|t| single(kind, t)).collect();
                rows.push(Self::baseline());
                rows
            }
            Technique::Classical => {
                return Err(Error::InvalidConfig(
                    "the classical baseline runs through classical::run_classical".into(),
                ))
            }
        };
        Ok(rows)
    }
}

fn run_round(
    config: &ExperimentConfig,
    channels: usize,
    inputs: &[Tensor<f32>],
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
    let train_inputs: Vec<&Tensor<f32>> = train_ids.iter().map(|&i| &inputs[i]).collect();
    let train_labels: Vec<usize> = train_ids.iter().map(|&i| labels[i].class_index()).collect();

    let params = init_params(
        HeadConfig::with_channels(channels),
        derive_seed(config.seed, INIT_STREAM + round as u64),
    )?;
    let train_config = TrainConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        lr: config.lr,
        seed: derive_seed(config.seed, SHUFFLE_STREAM + round as u64),
        optimizer: config.optimizer,
    };
    let outcome = train(params, &train_inputs, &train_labels, &train_config)?;

    let predictions = split
        .test
        .iter()
        .map(|&i| predict(&outcome.params, &inputs[i]).map(Label::from_class_index))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
    let metrics = compute_metrics(&predictions, &truth)?;
    log::info!(
        "round {} accuracy {:.4} f1 {:.4}",
        round + 1,
        metrics.accuracy,
        metrics.f1
    );
    Ok(RoundResult {
        round: round + 1,
        train_size: train_ids.len(),
        test_size: split.test.len(),
        metrics,
        final_loss: outcome.loss_trace.last().copied(),
        model: None,
    })
}

/// Runs `f(round)` for every round, on up to `parallel` threads; results keep
/// round order.
pub(crate) fn map_rounds<R: Send>(
    rounds: usize,
    parallel: usize,
    f: impl Fn(usize) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    if parallel <= 1 || rounds <= 1 {
        return (0..rounds).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| (0..rounds).into_par_iter().map(f).collect())
}

pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentReport> {
    run_experiment_parallel(config, dataset, 1)
}

/// As [`run_experiment`], training up to `parallel` rounds concurrently.
/// Output is identical for every `parallel`.
pub fn run_experiment_parallel(
    config: &ExperimentConfig,
    dataset: &Dataset,
    parallel: usize,
) -> Result<ExperimentReport> {
    let config = config.clone().normalized();
    config.validate()?;
    let specs = RowSpec::expand(&config.technique)?;
    let labels = dataset.labels();
    let splits = stratified_rounds(&labels, config.rounds, config.train_fraction, config.seed)?;

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let selection = spec.selection();
        let channels = selection.input_channels(dataset.layout());
        log::info!("{} {:?}: {} input channels", spec.kind.name(), spec.tasks, channels);
        let inputs = dataset
            .sessions()
            .iter()
            .map(|s| assemble_tensor(s, dataset.layout(), &selection))
            .collect::<Result<Vec<_>>>()?;
        let rounds = map_rounds(splits.len(), parallel, |r| {
            run_round(&config, channels, &inputs, &labels, &splits[r], r)
        })?;
        rows.push(ReportRow::new(spec.kind, spec.tasks.into_iter().collect(), rounds));
    }

    Ok(ExperimentReport {
        seed: config.seed,
        config,
        dataset: DatasetSummary::of(dataset),
        rows,
    })
}

/// Trains one model on every session (balanced if configured) for a
/// single-row technique: baseline, one mask set or one separate set.
pub fn fit_model(config: &ExperimentConfig, dataset: &Dataset) -> Result<ModelParams<f32>> {
    let config = config.clone().normalized();
    config.validate()?;
    let spec = match RowSpec::expand(&config.technique)?.as_slice() {
        [one] => one.clone(),
        _ => return Err(Error::InvalidConfig("a sweep does not define a single model".into())),
    };
    let selection = spec.selection();
    let labels = dataset.labels();
    let all: Vec<usize> = (0..dataset.len()).collect();
    let ids = if config.balance_classes {
        balance_classes(&all, &labels, derive_seed(config.seed, BALANCE_STREAM + FINAL_STREAM))?
    } else {
        all
    };
    let inputs = ids
        .iter()
        .map(|&i| assemble_tensor(&dataset.sessions()[i], dataset.layout(), &selection))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<usize> = ids.iter().map(|&i| labels[i].class_index()).collect();
    let params = init_params(
        HeadConfig::with_channels(selection.input_channels(dataset.layout())),
        derive_seed(config.seed, INIT_STREAM + FINAL_STREAM),
    )?;
    let train_config = TrainConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        lr: config.lr,
        seed: derive_seed(config.seed, SHUFFLE_STREAM + FINAL_STREAM),
        optimizer: config.optimizer,
    };
    Ok(train(params, &inputs, &targets, &train_config)?.params)
}
