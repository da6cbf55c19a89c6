//! Seeded synthetic inputs: reference signals for feature checks and a small
//! catchment dataset for end-to-end runs.

pub mod dataset;
pub mod signals;
