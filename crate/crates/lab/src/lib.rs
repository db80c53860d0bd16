//! Experiment harness around `pandemic-core`: map and snapshot files,
//! setup libraries, batch runs with resumable record files, and reports.

pub mod config;
pub mod experiment;
pub mod kmedoids;
pub mod mapfile;
pub mod pool;
pub mod records;
pub mod report;
pub mod setups;
pub mod snapshot;
