pub mod error;
pub mod contexts;
pub mod daseinisation;
pub mod interval;
pub mod ks;
pub mod lattice;
pub mod linalg;
pub mod report;
pub mod spectrum;
pub mod states;
pub mod system;

pub use error::{Error, Result};
