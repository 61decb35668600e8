//! Upper rate functions for diffusions from volume growth, with Monte Carlo
//! checks on the associated radial equations.

pub mod error;
pub mod numeric;
pub mod profiles;
pub mod rate_solver;
pub mod sde;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
