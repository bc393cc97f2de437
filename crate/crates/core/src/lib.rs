pub mod engine;
pub mod error;
pub mod evolve;
pub mod filter;
pub mod metrics;
pub mod patterns;
pub mod store;
pub mod synthetic;
pub mod rng;
pub mod textcore;
pub mod vsm;

pub use error::{Error, ErrorClass, Result};
