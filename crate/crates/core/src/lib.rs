//! Fuzzy learning-style identification from LMS behaviour logs, homogeneous
//! grouping, and group-vs-control evaluation.

pub mod bundled;
pub mod classify;
pub mod dimension;
pub mod dsl;
pub mod fuzzy;
pub mod grouping;
pub mod ingest;
pub mod par;
pub mod sim;
pub mod stats;

pub use dimension::Dimension;
