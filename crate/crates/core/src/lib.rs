//! Two identical single-mode cavities damped through a common bath.

pub mod algebra;
pub mod dfs;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod liouvillian;

pub use error::{Error, Result};
