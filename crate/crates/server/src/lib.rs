//! Service and batch tooling around the `trajsketch` library: dataset
//! loading, hindsight labeling, analytics reports and the HTTP API.

pub mod analyze;
pub mod api;
pub mod config;
pub mod dataset;
pub mod label;
pub mod plot;
