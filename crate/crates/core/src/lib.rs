pub mod error;
mod fft;
pub mod dsl;
pub mod evolution;
pub mod family;
pub mod grid;
pub mod harness;
pub mod ops;
pub mod state;
pub mod stats;
pub mod symbolic;

pub use error::{Error, Result};
pub use family::{domain_compliance, synthesize_state, ComplianceReport, StateSpec};
pub use grid::{Axis, GridSpec, Representation};
pub use ops::{apply, build, commutator_apply, MomentumSymbol, OpKind, OperatorExpr, PositionSymbol};
pub use state::{inner_product, WaveFunction};
