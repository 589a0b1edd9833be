use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{SessionEmbedding, TaskId, TaskLayout, EMBEDDING_DIM, SPATIAL_SIDE};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Which utterance slots feed the model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "tasks", rename_all = "snake_case")]
pub enum Selection {
    /// Every slot.
    All,
    /// Every slot, with the listed tasks' slots zeroed.
    Mask(BTreeSet<TaskId>),
    /// Only the listed tasks' slots.
    Only(BTreeSet<TaskId>),
}

impl Selection {
    pub fn input_channels(&self, layout: &TaskLayout) -> usize {
        match self {
            Selection::All | Selection::Mask(_) => layout.total(),
            Selection::Only(tasks) => tasks.iter().map(|&t| layout.count(t)).sum(),
        }
    }
}

const EMPTY: &BTreeSet<TaskId> = &BTreeSet::new();

/// Stacks pooled utterance vectors, each reshaped row-major to 32×32, into an
/// `N×32×32` tensor ordered by (task, index).
pub fn assemble_tensor(session: &SessionEmbedding, layout: &TaskLayout, selection: &Selection) -> Result<Tensor<f32>> {
    let (tasks, masked): (Vec<TaskId>, &BTreeSet<TaskId>) = match selection {
        Selection::All => (TaskId::ALL.to_vec(), EMPTY),
        Selection::Mask(m) => (TaskId::ALL.to_vec(), m),
        Selection::Only(only) => {
            if only.is_empty() {
                return Err(Error::InvalidConfig("empty task selection".into()));
            }
            (only.iter().copied().collect(), EMPTY)
        }
    };
    let channels = selection.input_channels(layout);
    let mut data = Vec::with_capacity(channels * EMBEDDING_DIM);
    for (task, index) in layout.slots(tasks) {
        if masked.contains(&task) {
            data.extend(std::iter::repeat_n(0.0, EMBEDDING_DIM));
            continue;
        }
        let utt = session.utterance(task, index).ok_or_else(|| Error::MissingUtterance {
            session: session.id().to_string(),
            task: task.to_string(),
            index,
        })?;
        data.extend(utt.pooled());
    }
    Tensor::new(vec![channels, SPATIAL_SIDE, SPATIAL_SIDE], data)
}
