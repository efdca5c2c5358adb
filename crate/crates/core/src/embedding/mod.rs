//! Embedding models that supply the likelihood side of the fusion.
//!
//! Three score functions share one table layout and one trainer:
//! TransE (real translation), RotatE (unit-modulus complex rotation stored as
//! phases) and QuatE (Hamilton product with a per-coordinate unit quaternion).

mod checkpoint;
mod model;
mod quaternion;
mod train;

pub use checkpoint::{decode, encode, load_checkpoint, save_checkpoint, FORMAT_VERSION, MAGIC};
pub use model::{
    residual, score_grad_rows, score_rows, EmbeddingModel, ModelKind, ModelSpec, SpaceKind, TransEOperator,
};
pub use quaternion::Quaternion;
pub use train::{initial_model, train, TrainConfig, TrainOutcome};
