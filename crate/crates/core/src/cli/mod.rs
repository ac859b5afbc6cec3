//! Scenario files, end-to-end pipeline and map export.

mod config;
mod export;
mod pipeline;

pub use config::{parse_config, render_config, ScenarioConfig};
pub use export::{export_map, pgm_pixels, read_csv, write_csv, write_pgm, ExportPaths};
pub use pipeline::{run_pipeline, PipelineOutput};
