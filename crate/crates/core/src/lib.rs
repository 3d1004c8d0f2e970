//! Chain complexes over GF(2), homology and persistence, memory traces,
//! cellular sheaves and the wake/sleep navigation engine built on them.

pub mod complex;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generate;
pub mod gf2;
pub mod graph;
pub mod homology;
pub mod memory;
pub mod parity;
pub mod search;
pub mod sheaf;

pub use complex::{
    boundary, build_complex, is_cycle, parse_complex, verify_d2, Cell, CellId, Chain, ChainComplex, Filtration,
};
pub use engine::{Engine, EngineConfig, MemoryStore, Route};
pub use error::{Error, Result};
pub use experiment::{run_experiment, EngineState, ExperimentConfig, ExperimentReport};
pub use gf2::{Gf2Matrix, Gf2Vec};
pub use graph::{parse_graph, Graph, GraphSpec};
pub use homology::{betti_numbers, homology_basis, persistence_barcode, persists, Barcode, HomologyBasis, Interval};
pub use memory::{
    consolidate, decompose_trace, extract_backbone, joint_uncertainty, semanticize, ConsolidatedTrace, MemoryTrace,
    TraceBundle,
};
pub use parity::{euler_characteristic, parity_profile, EulerMethod, ParityProfile};
pub use search::{dp_lookup, savitch_reach, ScaffoldTable, Trajectory};
pub use sheaf::{
    admissible, coboundary, content_recurrence, effective_edges, glue_sections, sheaf_cohomology, CellularSheaf,
    GluingResult, LocalSection,
};
