//! Sessions, tasks and embeddings; the manifest/blob formats; frame pooling
//! and assembly of the per-session input tensor.

mod assemble;
mod manifest;
mod session;
mod task;

pub use assemble::{assemble_tensor, Selection};
pub use manifest::{load_dataset, save_dataset, Manifest, ManifestSession, ManifestUtterance};
pub use session::{binarize_sss, pool_frames, Dataset, Label, Provenance, SessionEmbedding, UtteranceEmbedding};
pub use task::{TaskId, TaskLayout};

/// Width of every utterance embedding.
pub const EMBEDDING_DIM: usize = 1024;
/// Each embedding is reshaped row-major to a `SPATIAL_SIDE × SPATIAL_SIDE` plane.
pub const SPATIAL_SIDE: usize = 32;
