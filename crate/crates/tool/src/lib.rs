//! Configuration, data ingestion, experiment drivers and report emission
//! behind the `smcmc` binary.

pub mod config;
pub mod data;
pub mod report;
pub mod run;
pub mod summarize;
pub mod verify;
