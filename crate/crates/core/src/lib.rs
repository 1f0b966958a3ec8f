pub mod check;
pub mod energy;
pub mod error;
pub mod graph;
pub mod igs;
pub mod limit_metric;
pub mod measures;
pub mod pharmonic;
pub mod replacement;
pub mod rng;

pub use error::{Error, Result};
