//! Batched NSGA-III for many-objective optimization.
//!
//! The crate is organized bottom-up:
//!
//! * [`batchcore`]: masked fixed-shape primitives and the counter-based RNG.
//! * [`refpoints`]: Das-Dennis reference directions.
//! * [`dominance`]: dominance matrix, non-dominated sorting, front splitting.
//! * [`variation`]: SBX, polynomial mutation, binary operators.
//! * [`niche`]: normalization, association, and the batched and scalar
//!   niche selectors.
//! * [`engine`]: the generational loop.
//! * [`problems`]: DTLZ2/3/5/7, MNK-landscapes, multiobjective knapsack.
//! * [`metrics`]: IGD and hypervolume.

pub mod batchcore;
pub mod dominance;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod niche;
pub mod problems;
pub mod refpoints;
pub mod stats;
pub mod variation;

pub use error::{Error, Result};
