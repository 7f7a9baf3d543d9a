//! Contrastive objective: prototype discovery, negative filtering, the
//! two-view loss, and the training loop that ties them to the encoder.

pub mod bitmat;
pub mod filter;
pub mod loss;
pub mod prototype;
pub mod trainer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bitmat::BitMatrix;
pub use filter::{build_negative_filter, NegativeFilter};
pub use loss::{info_nce, taylor_diagnostic, InfoNceResult, TaylorReport};
pub use prototype::{
    concentration, kmeans, negative_keep_probs, prototype_of, prototype_softmax, sample_filter,
    PrototypeModel, DEFAULT_EPSILON, XI_FLOOR,
};
pub use trainer::{train, train_from, EpochRecord, TrainConfig, TrainOutput, TrainState};

/// Which candidates count as negatives for an anchor: nodes from the other
/// view only, or from both views.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativePool {
    InterAndIntra,
    InterOnly,
}

impl NegativePool {
    pub fn name(&self) -> &'static str {
        match self {
            NegativePool::InterAndIntra => "inter-and-intra",
            NegativePool::InterOnly => "inter-only",
        }
    }

    pub fn from_name(name: &str) -> Result<NegativePool> {
        match name {
            "inter-and-intra" => Ok(NegativePool::InterAndIntra),
            "inter-only" => Ok(NegativePool::InterOnly),
            other => Err(Error::invalid(format!("unknown negative pool '{other}'"))),
        }
    }
}
