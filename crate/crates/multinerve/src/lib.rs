//! MultiNerve Mapper and its relation to combinatorial Reeb graphs.
//!
//! The crate builds Mapper-style graphs from functions on simplicial
//! complexes, point clouds and combinatorial telescopes, and compares them
//! through staircase-pruned extended persistence diagrams ("signatures").
//!
//! Modules, roughly bottom-up:
//!
//! * [`covers`]: open interval covers of a bounded range and their staircases.
//! * [`diagram`]: extended persistence diagrams and their transforms.
//! * [`complex`]: 2-complexes, extended persistence, PL preimage components.
//! * [`reeb`]: leveled multigraphs, Reeb graphs and graph isomorphism.
//! * [`telescope`]: component-level telescopes and the canonicalization pipeline.
//! * [`mapper`]: continuous and discrete Mapper / MultiNerve constructions.
//! * [`distance`]: staircase bottleneck distances and signature pipelines.

pub mod complex;
pub mod covers;
pub mod diagram;
pub mod distance;
pub mod mapper;
pub mod par;
pub mod reeb;
pub mod telescope;

mod unionfind;

pub use complex::{SimplicialComplex2, TieBreak, VertexFunction};
pub use covers::{GomicCover, Interval, StairKind, Staircase};
pub use diagram::{DiagramPoint, ExtendedDiagram, PointKind, Variant};
pub use mapper::{Connectivity, PointCloud, RipsGraph};
pub use par::Exec;
pub use reeb::LeveledMultigraph;
pub use telescope::CombinatorialTelescope;
