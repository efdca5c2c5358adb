//! Type-based prior over relations.
//!
//! Entity type paths become per-entity weights, the train split aggregates
//! them into per-relation head/tail profiles, and a pair's prior is the
//! normalised product of its head and tail similarities to each profile.

mod model;
mod profile;
mod weights;

pub use model::{similarity, PriorConfig, PriorExport, PriorMode, PriorModel, RelationExport};
pub use profile::{build_relation_profiles, entity_weight_table, prune, ProfileOptions, RelationTypeProfile};
pub use weights::{entity_type_weights, hierarchy_level_weight, WeightScheme, WeightedTypeSet};
