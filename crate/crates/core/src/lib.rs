pub mod boolean;
pub mod encode;
pub mod error;
pub mod express;
pub mod ingest;
pub mod kernel;
pub mod learn;
pub mod linalg;
pub mod num;
pub mod prior;
pub mod qmap;
pub mod rng;
mod simplex;

pub use error::{Error, Result};
