use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The twelve elicitation tasks, in protocol order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    MicrophoneTest,
    FreeSpeech,
    PictureDescription,
    CategoryNaming,
    PhonemicFluency,
    ParagraphReading,
    SustainedPhonation,
    DiadochokineticPaPaPa,
    DiadochokineticPaTaKa,
    ConfrontationalNaming,
    NonwordPronunciation,
    MemoryRecall,
}

impl TaskId {
    pub const ALL: [TaskId; 12] = [
        TaskId::MicrophoneTest,
        TaskId::FreeSpeech,
        TaskId::PictureDescription,
        TaskId::CategoryNaming,
        TaskId::PhonemicFluency,
        TaskId::ParagraphReading,
        TaskId::SustainedPhonation,
        TaskId::DiadochokineticPaPaPa,
        TaskId::DiadochokineticPaTaKa,
        TaskId::ConfrontationalNaming,
        TaskId::NonwordPronunciation,
        TaskId::MemoryRecall,
    ];

    /// 0-based position in protocol order.
    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// `T1` .. `T12`.
    pub fn code(self) -> String {
        format!("T{}", self.ordinal() + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskId::MicrophoneTest => "microphone_test",
            TaskId::FreeSpeech => "free_speech",
            TaskId::PictureDescription => "picture_description",
            TaskId::CategoryNaming => "category_naming",
            TaskId::PhonemicFluency => "phonemic_fluency",
            TaskId::ParagraphReading => "paragraph_reading",
            TaskId::SustainedPhonation => "sustained_phonation",
            TaskId::DiadochokineticPaPaPa => "diadochokinetic_pa_pa_pa",
            TaskId::DiadochokineticPaTaKa => "diadochokinetic_pa_ta_ka",
            TaskId::ConfrontationalNaming => "confrontational_naming",
            TaskId::NonwordPronunciation => "nonword_pronunciation",
            TaskId::MemoryRecall => "memory_recall",
        }
    }

    /// Human-readable row label.
    pub fn title(self) -> &'static str {
        match self {
            TaskId::MicrophoneTest => "Microphone test",
            TaskId::FreeSpeech => "Free speech",
            TaskId::PictureDescription => "Picture description",
            TaskId::CategoryNaming => "Category naming",
            TaskId::PhonemicFluency => "Phonemic fluency",
            TaskId::ParagraphReading => "Paragraph reading",
            TaskId::SustainedPhonation => "Sustained phonation",
            TaskId::DiadochokineticPaPaPa => "Diadochokinetic (pa-pa-pa)",
            TaskId::DiadochokineticPaTaKa => "Diadochokinetic (pa-ta-ka)",
            TaskId::ConfrontationalNaming => "Confrontational naming",
            TaskId::NonwordPronunciation => "Non-word pronunciation",
            TaskId::MemoryRecall => "Memory recall",
        }
    }

    /// Utterances per session under the standard protocol; sums to 48.
    pub fn canonical_count(self) -> usize {
        match self {
            TaskId::CategoryNaming | TaskId::PhonemicFluency | TaskId::MemoryRecall => 2,
            TaskId::ConfrontationalNaming => 25,
            TaskId::NonwordPronunciation => 10,
            _ => 1,
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    /// Accepts the snake_case name (hyphens allowed) or a `T1`..`T12` code.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        if let Some(n) = norm.strip_prefix('t').and_then(|d| d.parse::<usize>().ok()) {
            if (1..=12).contains(&n) {
                return Ok(TaskId::ALL[n - 1]);
            }
        }
        TaskId::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::UnknownTask(s.to_string()))
    }
}

/// Utterance slots per task for a corpus. Defaults to the canonical counts;
/// a manifest may override them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaskLayout {
    counts: [usize; 12],
}

impl Default for TaskLayout {
    fn default() -> Self {
        Self {
            counts: TaskId::ALL.map(TaskId::canonical_count),
        }
    }
}

impl TaskLayout {
    pub fn new(counts: [usize; 12]) -> Result<Self> {
        if let Some(t) = TaskId::ALL.into_iter().find(|t| counts[t.ordinal()] == 0) {
            return Err(Error::Manifest(format!("task {t} has zero utterances")));
        }
        Ok(Self { counts })
    }

    pub fn count(&self, task: TaskId) -> usize {
        self.counts[task.ordinal()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Slots of `tasks` in canonical order.
    pub fn slots<'a>(
        &'a self,
        tasks: impl IntoIterator<Item = TaskId> + 'a,
    ) -> impl Iterator<Item = (TaskId, usize)> + 'a {
        tasks
            .into_iter()
            .flat_map(move |t| (0..self.count(t)).map(move |i| (t, i)))
    }
}
