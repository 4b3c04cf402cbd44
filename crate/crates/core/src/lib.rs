//! Measure and reduce direction bias (such as gender) in word embeddings.
//!
//! * [`embedding`] and [`io`]: load, save and query embeddings.
//! * [`bias`]: bias directions and projection statistics.
//! * [`analogy`] and [`ratings`]: analogy pairs along a direction and the
//!   human rating workflow around them.
//! * [`debias`]: the PSD-constrained least-squares transform.
//! * [`eval`]: word-similarity and analogy benchmarks.

pub mod analogy;
pub mod bias;
pub mod debias;
pub mod embedding;
mod error;
pub mod eval;
pub mod io;
pub mod ratings;
pub mod synthetic;

pub use bias::{bias_direction, Direction, OovPolicy, ProjectionRecord};
pub use embedding::Embedding;
pub use error::{Error, Result};
pub use io::{load_embedding, write_embedding, Format};

pub use nalgebra::DMatrix;
