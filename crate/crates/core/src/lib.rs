pub mod cli;
pub mod engine;
pub mod error;
pub mod models;
pub mod pauli;
pub mod pulses;
pub mod quadrature;
pub mod sim;
pub mod special;

pub use error::{FloquetError, Result};
