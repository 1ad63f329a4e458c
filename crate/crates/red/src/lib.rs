//! Rate–energy–distortion surface fitting and encoder comparison.

pub mod cli;
pub mod defaults;
pub mod error;
pub mod fitting;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod projection;
pub mod svg;
pub mod numerics;

pub use error::{ErrorCategory, RedError, Result};
