pub mod bank;
pub mod bloch;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod graph;
pub mod io;
pub mod pauli;
pub mod suite;
pub mod xstate;

pub use error::{Error, Result};
