//! Batch experiment runner over the simulation library: each experiment is
//! a pure function of (config, seed) that emits a JSON report with named
//! tables and pass/fail assertions, plus one CSV per table. Reports are
//! byte-identical across reruns and worker counts; wall-clock timing goes to
//! a sidecar file so it cannot perturb the report bytes.

pub mod config;
pub mod experiments;
pub mod report;
