pub mod autgen;
pub mod base;
pub mod classify;
pub mod error;
pub mod forest;
pub mod gamma;
pub mod random;
pub mod rigidity;
pub mod semidirect;
pub mod thompson;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
