//! Relation prediction for knowledge graphs that fuses a closed-form type
//! prior with an embedding-model likelihood.

pub mod embedding;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod graph;
pub mod intern;
pub mod prior;
pub mod types;

pub use error::{Error, Result};
pub use graph::{EntityId, KnowledgeGraph, LoadStats, RelationId, Split, Triple, TypeId};
pub use types::{CatalogExport, TypeCatalog, TypeHierarchyPath, TypeLoadStats};
