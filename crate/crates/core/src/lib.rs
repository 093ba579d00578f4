//! Simulator and verifier for entanglement-assisted local discrimination
//! protocols on small multipartite systems.
//!
//! The crate is organized around five modules:
//!
//! * [`qstate`] — sparse multipartite pure states and the linear-algebra
//!   primitives (projectors, CNOT, root-of-unity vector families).
//! * [`ensembles`] — constructors and validators for the orthogonal state
//!   sets under study.
//! * [`protocol`] — the protocol intermediate representation: resources,
//!   measurements, step trees, structural validation, and cost tallies.
//! * [`engine`] — executes a protocol tree against an ensemble, tracking
//!   branch probabilities, verdict soundness, orthogonality preservation,
//!   and expected resource consumption.
//! * [`catalog`] — the ten built-in protocol builders, closed-form cost
//!   formulas, and the cost-comparison table data.

pub mod catalog;
pub mod engine;
pub mod ensembles;
pub mod error;
pub mod protocol;
pub mod qstate;
pub mod serialize;

pub use engine::{run, EngineOpts, RunReport};
pub use ensembles::{ghz_basis, ops_asym4, ops_sym4, ops_sym5, Ensemble, Label, LabeledState};
pub use error::{Error, Result};
pub use protocol::{
    validate, CostTally, Measurement, Projector, ProtocolTree, Resource, ResourceKind, Step,
    Valuation, Verdict,
};
pub use qstate::{BasisIndex, LocalVector, PartyDecl, SparseState, SystemLayout};
