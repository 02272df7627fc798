pub mod analytic;
pub mod cavity;
pub mod cli;
pub mod entangle;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod validate;

pub use analytic::{GateResult, JointState, Scheme};
pub use cavity::{CavityParams, RawCavityParams, ReflectionPair};
pub use error::{Error, Result};
