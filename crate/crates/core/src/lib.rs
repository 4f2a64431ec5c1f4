pub mod error;
pub mod exact;
pub mod exact_nsm;
pub mod enumeration;
pub mod equivalence;
pub mod lattice;
pub mod moments;
pub mod optimizer;
pub mod reproduce;

pub use error::{Error, Result};
