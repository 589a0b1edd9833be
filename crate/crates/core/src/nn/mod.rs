//! The convolutional inference head: three conv/ReLU/max-pool stages, four
//! ReLU dense layers and a two-way softmax, trained with hand-derived
//! backpropagation.

mod config;
mod head;
mod io;
mod optim;
mod params;
mod train;

pub use config::HeadConfig;
pub use head::{forward, logits, loss_and_gradients, predict, relu, softmax};
pub use optim::{Adam, Optimizer, OptimizerKind, Sgd};
pub use params::{init_params, GradientSet, ModelParams};
pub use train::{accuracy, train, TrainConfig, TrainOutcome};
