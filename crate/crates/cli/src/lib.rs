//! Command-line front end for `netrace`: configuration files, bundled table
//! presets and results tables.

pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{parse_config, Format, RunConfig};
pub use error::CliError;
pub use presets::preset;
pub use report::{read_csv, rows, write_rows, Row};
pub use run::{partial_marker, run, run_with};
