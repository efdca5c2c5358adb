//! Experiment harnesses built on the prior and the ranking protocol.

mod enrich;
mod subsample;
mod sweep;
mod synth;
mod transfer;

pub use enrich::{enrich_with_type_triples, EnrichStats, IS_A_RELATION, TYPE_RELATION};
pub use subsample::subsample_train;
pub use sweep::{carve_validation, sweep_eta, EtaRow, EtaSweep, DEFAULT_ETA_GRID};
pub use synth::{generate_typed_synthetic_kg, write_dataset, write_triples, write_types, SynthConfig};
pub use transfer::{both_sides_typed, qualified_relations, transfer_types, TransferReport};
