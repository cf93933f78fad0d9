pub mod asphrh;
pub mod error;
pub mod exact;
pub mod grid;
pub mod hrh;
pub mod lagrangian;
pub mod model;
pub mod postprocess;
pub mod pso;
pub mod search;
pub mod synth;

pub use error::{Error, Result};
