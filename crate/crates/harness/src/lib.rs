//! Scenario runner for the quantum/classical accelerometer hybridization
//! models in `qa-hybrid-core`: TOML configs, committed presets, parallel
//! seed execution, CSV result bundles and IMU CSV ingest.

pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{Algorithm, ScenarioConfig, SweepPoint};
pub use error::{ConfigError, RunError};
pub use runner::{run_point, PointOutcome, RunOptions, SeriesOutcome};

use std::path::Path;

/// Run every sweep point in order, writing each one to `out` as it completes.
pub fn run_scenario(cfg: &ScenarioConfig, out: Option<&Path>, opts: RunOptions) -> Result<Vec<PointOutcome>, RunError> {
    let mut writer = out.map(output::BundleWriter::create).transpose()?;
    let mut results = Vec::new();
    for point in cfg.expand()? {
        let r = run_point(&point, opts)?;
        if let Some(w) = writer.as_mut() {
            w.write_point(&r)?;
        }
        results.push(r);
    }
    Ok(results)
}
