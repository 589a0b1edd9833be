//! Classical-feature baseline: MaxAbs scaling of 62-d aggregate acoustic
//! features, four classifier families and a small deterministic model search.

mod features;
mod models;
mod run;
mod scaler;
mod select;

pub use features::{read_features, write_features, FeatureVector, FEATURE_DIM};
pub use models::{knn_predict, train_classical, ClassicalModel, ModelFamily, TreeNode};
pub use run::{run_classical, run_classical_parallel};
pub use scaler::{maxabs_fit, ScalerState};
pub use select::{model_select, MODEL_GRID};
