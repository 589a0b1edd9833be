//! Sleepiness detection from pooled speech embeddings.
//!
//! The crate bundles the convolutional inference head ([`nn`]), the session
//! data model and on-disk formats ([`data`]), the evaluation harness with the
//! masking and separate-training task ablations ([`experiments`]), a
//! classical-feature baseline ([`classical`]) and a planted-signal synthetic
//! generator ([`synth`]).

pub mod classical;
pub mod data;
pub mod error;
pub mod experiments;
pub mod nn;
pub mod seed;
pub mod synth;
pub mod tensor;

pub use data::{Dataset, Label, Selection, SessionEmbedding, TaskId};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentReport, Metrics, Technique};
pub use nn::{HeadConfig, ModelParams};
pub use tensor::{Scalar, Tensor};
