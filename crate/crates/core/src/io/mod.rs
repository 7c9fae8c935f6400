//! Scenario files, trajectory export and plots.

pub mod export;
pub mod plot;
pub mod scenario;
