//! Scenario files, Monte-Carlo sampling, metrics and suite orchestration.
pub mod metrics;
pub mod sampling;
pub mod scenario;
pub mod suite;
pub mod svg;
