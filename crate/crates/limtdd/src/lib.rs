//! Tensor decision diagrams with XP-operator edge weights.

pub mod circuit;
pub mod cli;
pub mod dd;
pub mod dense;
pub mod stab;
pub mod xp;

pub use circuit::{parse_qasm, simulate, functionality, Circuit, GateKind};
pub use dd::{DdError, LimTdd, Manager, StabMode};
pub use dense::DenseTensor;
pub use stab::StabGroup;
pub use xp::{LimWeight, XPOperator};
