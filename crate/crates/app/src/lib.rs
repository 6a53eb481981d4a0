//! File formats, configuration, embedding-service client, CLI and HTTP API
//! around `variety-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod provider;
pub mod report;
pub mod service;

pub use config::{ConfigLayer, ProviderConfig, RunConfig, WeightsSpec};
pub use report::{assess_space, ClusterSection, EngineError, PlotData, ResultDocument};
