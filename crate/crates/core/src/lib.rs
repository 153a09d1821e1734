//! Tangle structure trees over finite abstract separation systems.
//!
//! A [`SeparationSystem`] holds oriented separations with their partial order,
//! involution and order function. Given a [`ForbiddenFamily`] `F`, [`build`]
//! produces a tree whose leaves display every `F`-tangle or, where no tangle
//! exists, a member of `F` as a certificate. [`reduce`] prunes the tree to an
//! irreducible one, and [`StructureTree::restrict`] extracts the trees for the
//! subsystems `S_k` of separations of order below `k`.
//!
//! Order values are generic over [`Scalar`]; the aliases at the crate root fix
//! the common choices.

pub mod builder;
pub mod cli;
pub mod dot;
pub mod error;
pub mod forbidden;
pub mod ground;
pub mod io;
pub mod oracle;
pub mod scalar;
pub mod sepsys;
pub mod tree;

pub use builder::{
    build, contract, necessary_for_leaf, necessary_node, pipeline, pipeline_at, reduce, BuildConfig, ChildOrder,
    Level, ReductionTrace, Report, Tiebreak,
};
pub use error::{Error, Result};
pub use forbidden::{Evidence, FamilyKind, ForbiddenFamily, Witness};
pub use ground::{
    bipartition_system, block_of_tangle, graph_system, questionnaire_system, BipartitionGround, Graph, OrderRule,
    QuestionOrder,
};
pub use oracle::OracleBudget;
pub use scalar::Scalar;
pub use sepsys::{
    validate, OrientedSepId, PartialOrientation, SepId, SeparationSystem, SystemSpec, Threshold, ValidationReport,
};
pub use tree::{LeafClass, NodeId, StructureTree, Violation};

/// Exact rational order values.
pub type Rational = num_rational::Ratio<i64>;

pub type SeparationSystemF64 = SeparationSystem<f64>;
pub type SeparationSystemF32 = SeparationSystem<f32>;
pub type SeparationSystemRational = SeparationSystem<Rational>;
pub type StructureTreeF64 = StructureTree<f64>;
pub type StructureTreeRational = StructureTree<Rational>;
pub type ForbiddenFamilyF64 = ForbiddenFamily<f64>;
pub type ForbiddenFamilyRational = ForbiddenFamily<Rational>;
pub type ReportF64 = Report<f64>;
