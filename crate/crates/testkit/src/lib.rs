//! Seeded generators, shared fixtures and independent oracles for the test
//! suites.  Nothing here is used by the library itself.

pub mod fixtures;
pub mod gen;
pub mod oracle;

pub use gen::{rng, Sampler};
