use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{TaskId, TaskLayout, EMBEDDING_DIM};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NonSleepy = 0,
    Sleepy = 1,
}

impl Label {
    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn from_class_index(index: usize) -> Self {
        if index == 0 {
            Label::NonSleepy
        } else {
            Label::Sleepy
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::NonSleepy => "non_sleepy",
            Label::Sleepy => "sleepy",
        }
    }
}

/// Scores 1–3 are non-sleepy, 4–7 sleepy.
pub fn binarize_sss(score: i64) -> Result<Label> {
    match score {
        1..=3 => Ok(Label::NonSleepy),
        4..=7 => Ok(Label::Sleepy),
        _ => Err(Error::InvalidScore(score)),
    }
}

/// Column-wise mean of an `F×1024` row-major frame matrix.
pub fn pool_frames(frames: &[f32], frame_count: usize) -> Result<Vec<f32>> {
    if frame_count == 0 {
        return Err(Error::NoFrames);
    }
    if frames.len() != frame_count * EMBEDDING_DIM {
        return Err(Error::shape(
            format!("{frame_count}x{EMBEDDING_DIM}"),
            format!("{} values", frames.len()),
        ));
    }
    if frame_count == 1 {
        return Ok(frames.to_vec());
    }
    let mut sums = vec![0.0f64; EMBEDDING_DIM];
    for row in frames.chunks_exact(EMBEDDING_DIM) {
        sums.iter_mut().zip(row).for_each(|(s, &v)| *s += v as f64);
    }
    let n = frame_count as f64;
    Ok(sums.into_iter().map(|s| (s / n) as f32).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtteranceEmbedding {
    pub task: TaskId,
    pub index: usize,
    frame_count: usize,
    frames: Vec<f32>,
}

impl UtteranceEmbedding {
    pub fn new(task: TaskId, index: usize, frame_count: usize, frames: Vec<f32>) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::NoFrames);
        }
        if !frames.len().is_multiple_of(frame_count) || frames.len() / frame_count != EMBEDDING_DIM {
            return Err(Error::EmbeddingWidth(frames.len() / frame_count));
        }
        Ok(Self {
            task,
            index,
            frame_count,
            frames,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn frames(&self) -> &[f32] {
        &self.frames
    }

    pub fn pooled(&self) -> Vec<f32> {
        pool_frames(&self.frames, self.frame_count).expect("validated at construction")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionEmbedding {
    id: String,
    sss: u8,
    label: Label,
    /// sorted by (task, index)
    utterances: Vec<UtteranceEmbedding>,
}

impl SessionEmbedding {
    pub fn new(id: impl Into<String>, sss: i64, mut utterances: Vec<UtteranceEmbedding>) -> Result<Self> {
        let id = id.into();
        let label = binarize_sss(sss)?;
        utterances.sort_by_key(|u| (u.task, u.index));
        for pair in utterances.windows(2) {
            if (pair[0].task, pair[0].index) == (pair[1].task, pair[1].index) {
                return Err(Error::DuplicateUtterance {
                    session: id,
                    task: pair[0].task.to_string(),
                    index: pair[0].index,
                });
            }
        }
        Ok(Self {
            id,
            sss: sss as u8,
            label,
            utterances,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sss(&self) -> u8 {
        self.sss
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn utterances(&self) -> &[UtteranceEmbedding] {
        &self.utterances
    }

    pub fn utterance(&self, task: TaskId, index: usize) -> Option<&UtteranceEmbedding> {
        self.utterances
            .binary_search_by_key(&(task, index), |u| (u.task, u.index))
            .ok()
            .map(|i| &self.utterances[i])
    }

    /// Replaces the SSS score (and thus the label).
    pub fn with_sss(mut self, sss: i64) -> Result<Self> {
        self.label = binarize_sss(sss)?;
        self.sss = sss as u8;
        Ok(self)
    }

    /// True when every slot of `layout` is present.
    pub fn is_complete(&self, layout: &TaskLayout) -> bool {
        layout.slots(TaskId::ALL).all(|(t, i)| self.utterance(t, i).is_some())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    #[default]
    Extracted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    layout: TaskLayout,
    provenance: Provenance,
    sessions: Vec<SessionEmbedding>,
}

impl Dataset {
    pub fn new(layout: TaskLayout, provenance: Provenance, sessions: Vec<SessionEmbedding>) -> Result<Self> {
        if sessions.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::new();
        for s in &sessions {
            if !seen.insert(s.id()) {
                return Err(Error::DuplicateSession(s.id().to_string()));
            }
            for u in s.utterances() {
                let count = layout.count(u.task);
                if u.index >= count {
                    return Err(Error::IndexOutOfRange {
                        session: s.id().to_string(),
                        task: u.task.to_string(),
                        index: u.index,
                        count,
                    });
                }
            }
        }
        Ok(Self {
            layout,
            provenance,
            sessions,
        })
    }

    pub fn layout(&self) -> &TaskLayout {
        &self.layout
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn sessions(&self) -> &[SessionEmbedding] {
        &self.sessions
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.sessions.iter().map(SessionEmbedding::label).collect()
    }

    /// Same sessions with replaced SSS scores, in session order.
    pub fn with_scores(&self, scores: &[i64]) -> Result<Self> {
        if scores.len() != self.sessions.len() {
            return Err(Error::LengthMismatch(scores.len(), self.sessions.len()));
        }
        let sessions = self
            .sessions
            .iter()
            .zip(scores)
            .map(|(s, &sss)| s.clone().with_sss(sss))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.layout, self.provenance, sessions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utt(task: TaskId, index: usize) -> UtteranceEmbedding {
        UtteranceEmbedding::new(task, index, 1, vec![0.5; EMBEDDING_DIM]).unwrap()
    }

    #[test]
    fn sss_binarization() {
        assert_eq!(binarize_sss(1).unwrap(), Label::NonSleepy);
        assert_eq!(binarize_sss(3).unwrap(), Label::NonSleepy);
        assert_eq!(binarize_sss(4).unwrap(), Label::Sleepy);
        assert_eq!(binarize_sss(7).unwrap(), Label::Sleepy);
        assert!(matches!(binarize_sss(0), Err(Error::InvalidScore(0))));
        assert!(binarize_sss(8).is_err());
    }

    #[test]
    fn pooling_edge_cases() {
        let v: Vec<f32> = (0..EMBEDDING_DIM).map(|i| i as f32 * 0.25 - 7.0).collect();
        assert_eq!(pool_frames(&v, 1).unwrap(), v);
        let mut two = v.clone();
        two.extend(v.iter().map(|x| -x));
        assert!(pool_frames(&two, 2).unwrap().iter().all(|&x| x == 0.0));
        assert!(matches!(pool_frames(&[], 0), Err(Error::NoFrames)));
        assert!(pool_frames(&v, 2).is_err());
    }

    #[test]
    fn rejects_wrong_width() {
        assert!(matches!(
            UtteranceEmbedding::new(TaskId::FreeSpeech, 0, 1, vec![0.0; 512]),
            Err(Error::EmbeddingWidth(512))
        ));
    }

    #[test]
    fn session_rejects_duplicates() {
        let r = SessionEmbedding::new("a", 2, vec![utt(TaskId::FreeSpeech, 0), utt(TaskId::FreeSpeech, 0)]);
        assert!(matches!(r, Err(Error::DuplicateUtterance { .. })));
    }

    #[test]
    fn dataset_invariants() {
        let s = |id: &str| SessionEmbedding::new(id, 5, vec![utt(TaskId::MemoryRecall, 1)]).unwrap();
        let layout = TaskLayout::default();
        assert!(Dataset::new(layout, Provenance::Synthetic, vec![s("a"), s("b")]).is_ok());
        assert!(matches!(
            Dataset::new(layout, Provenance::Synthetic, vec![s("a"), s("a")]),
            Err(Error::DuplicateSession(_))
        ));
        assert!(matches!(
            Dataset::new(layout, Provenance::Synthetic, vec![]),
            Err(Error::EmptyDataset)
        ));
        let bad = SessionEmbedding::new("c", 5, vec![utt(TaskId::MemoryRecall, 2)]).unwrap();
        assert!(matches!(
            Dataset::new(layout, Provenance::Synthetic, vec![bad]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
