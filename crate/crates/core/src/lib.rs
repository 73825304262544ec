pub mod analysis;
pub mod channel;
pub mod cli;
pub mod density;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod gap;
pub mod invariant;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod randomization;
pub mod rng;
pub mod state;
pub mod trajectory;
pub mod wasserstein;

pub use error::{Error, Result};
