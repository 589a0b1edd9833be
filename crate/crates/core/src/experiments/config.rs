use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::TaskId;
use crate::error::{Error, Result};
use crate::nn::OptimizerKind;

/// Which ablation to run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "tasks", rename_all = "snake_case")]
pub enum Technique {
    Baseline,
    MaskSweep,
    SeparateSweep,
    Mask(BTreeSet<TaskId>),
    Separate(BTreeSet<TaskId>),
    /// Classical-feature baseline; run through `classical::run_classical`.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub technique: Technique,
    pub rounds: usize,
    pub train_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub balance_classes: bool,
    pub optimizer: OptimizerKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            technique: Technique::Baseline,
            rounds: 5,
            train_fraction: 0.8,
            epochs: 200,
            batch_size: 32,
            lr: 1e-4,
            seed: 0,
            balance_classes: false,
            optimizer: OptimizerKind::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.rounds < 1 {
            return bad("rounds must be at least 1");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie strictly between 0 and 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if let Technique::Separate(tasks) = &self.technique {
            if tasks.is_empty() {
                return bad("separate training needs at least one task");
            }
        }
        Ok(())
    }

    /// `Mask(∅)` is the baseline.
    pub fn normalized(mut self) -> Self {
        if matches!(&self.technique, Technique::Mask(t) if t.is_empty()) {
            self.technique = Technique::Baseline;
        }
        self
    }
}
