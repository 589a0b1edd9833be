//! Synthetic sessions with class-conditional signal planted into chosen
//! tasks. Every other task is pure Gaussian noise.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classical::{FeatureVector, FEATURE_DIM};
use crate::data::{
    Dataset, Label, Provenance, SessionEmbedding, TaskId, TaskLayout, UtteranceEmbedding, EMBEDDING_DIM,
};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// SSS scores given to generated sessions.
pub const NON_SLEEPY_SSS: i64 = 2;
pub const SLEEPY_SSS: i64 = 5;

const DIRECTION_STREAM: u64 = 1 << 32;
const LABEL_STREAM: u64 = 1 << 33;
const PROJECTION_STREAM: u64 = 1 << 34;
const SHUFFLE_STREAM: u64 = 1 << 35;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_sessions: usize,
    /// Fraction of sessions labeled sleepy.
    pub sleepy_fraction: f64,
    pub signal_tasks: BTreeSet<TaskId>,
    /// Distance between the two class means, along a fixed unit direction.
    pub signal_strength: f64,
    pub noise_std: f64,
    pub frames_per_utterance: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_sessions: 400,
            sleepy_fraction: 0.5,
            signal_tasks: BTreeSet::from([TaskId::MemoryRecall]),
            signal_strength: 6.0,
            noise_std: 1.0,
            frames_per_utterance: 8,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_sessions < 2 {
            return bad("n_sessions must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.sleepy_fraction) {
            return bad("sleepy_fraction must lie in [0, 1]");
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength.is_finite()) {
            return bad("signal_strength must be finite and non-negative");
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std must be positive");
        }
        if self.frames_per_utterance == 0 {
            return bad("frames_per_utterance must be at least 1");
        }
        if self.signal_strength > 0.0 && self.signal_tasks.is_empty() {
            return bad("signal_strength > 0 needs at least one signal task");
        }
        Ok(())
    }

    pub fn sleepy_count(&self) -> usize {
        (self.n_sessions as f64 * self.sleepy_fraction).round() as usize
    }
}

/// Unit vector along which `task`'s class means are separated.
pub fn signal_direction(seed: u64, task: TaskId) -> Vec<f64> {
    let mut rng = stream_rng(seed, DIRECTION_STREAM + task.ordinal() as u64);
    let v: Vec<f64> = (0..EMBEDDING_DIM).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Labels in session order: exactly `sleepy_count` sleepy, positions shuffled.
fn planted_labels(spec: &SynthSpec) -> Vec<Label> {
    let sleepy = spec.sleepy_count();
    let mut labels: Vec<Label> = (0..spec.n_sessions)
        .map(|i| if i < sleepy { Label::Sleepy } else { Label::NonSleepy })
        .collect();
    labels.shuffle(&mut stream_rng(spec.seed, LABEL_STREAM));
    labels
}

fn generate_session(
    spec: &SynthSpec,
    index: usize,
    label: Label,
    directions: &[(TaskId, Vec<f64>)],
) -> Result<SessionEmbedding> {
    let layout = TaskLayout::default();
    let mut rng = stream_rng(spec.seed, index as u64);
    let sign = match label {
        Label::Sleepy => 0.5,
        Label::NonSleepy => -0.5,
    };
    let frames = spec.frames_per_utterance;
    let mut utterances = Vec::with_capacity(layout.total());
    for (task, idx) in layout.slots(TaskId::ALL) {
        let mean = directions.iter().find(|(t, _)| *t == task).map(|(_, d)| d);
        let mut data = Vec::with_capacity(frames * EMBEDDING_DIM);
        for _ in 0..frames {
            for col in 0..EMBEDDING_DIM {
                let noise: f64 = rng.sample(StandardNormal);
                let shift = mean.map_or(0.0, |d| sign * spec.signal_strength * d[col]);
                data.push((shift + spec.noise_std * noise) as f32);
            }
        }
        utterances.push(UtteranceEmbedding::new(task, idx, frames, data)?);
    }
    let sss = match label {
        Label::Sleepy => SLEEPY_SSS,
        Label::NonSleepy => NON_SLEEPY_SSS,
    };
    SessionEmbedding::new(format!("synth-{index:05}"), sss, utterances)
}

/// Complete 48-utterance sessions; deterministic in `spec`.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let directions: Vec<(TaskId, Vec<f64>)> = spec
        .signal_tasks
        .iter()
        .map(|&t| (t, signal_direction(spec.seed, t)))
        .collect();
    let sessions = planted_labels(spec)
        .into_iter()
        .enumerate()
        .map(|(i, label)| generate_session(spec, i, label, &directions))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(TaskLayout::default(), Provenance::Synthetic, sessions)
}

/// Permutes SSS scores across sessions, destroying any label/embedding link
/// while keeping class counts.
pub fn shuffle_labels(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    let mut scores: Vec<i64> = dataset.sessions().iter().map(|s| s.sss() as i64).collect();
    scores.shuffle(&mut stream_rng(seed, SHUFFLE_STREAM));
    dataset.with_scores(&scores)
}

/// 62-d pseudo acoustic features, one per utterance: a fixed random
/// projection (unit-norm rows) of the pooled embedding.
pub fn pseudo_features(dataset: &Dataset, seed: u64) -> Vec<FeatureVector> {
    let mut rng = stream_rng(seed, PROJECTION_STREAM);
    let projection: Vec<Vec<f64>> = (0..FEATURE_DIM)
        .map(|_| {
            let row: Vec<f64> = (0..EMBEDDING_DIM).map(|_| rng.sample(StandardNormal)).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            row.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let mut out = Vec::new();
    for s in dataset.sessions() {
        for u in s.utterances() {
            let pooled = u.pooled();
            let values = projection
                .iter()
                .map(|row| row.iter().zip(&pooled).map(|(w, &x)| w * x as f64).sum())
                .collect();
            out.push(FeatureVector::new(s.id(), Some(u.task), values).expect("62 finite values"));
        }
    }
    out
}
