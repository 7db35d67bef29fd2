//! Reachability checking for quantised feedforward ReLU networks.
pub mod arithmetic;
pub mod automata;
pub mod error;
pub mod network;
pub mod reduction;
pub mod selfcheck;
pub mod spec;
pub mod verifier;

pub use error::{Error, Result};
