//! Configuration, CSV persistence and reporting around the `fedualex`
//! simulator. The `fedualex` binary is a thin wrapper over [`app::execute`].

pub mod app;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod summary;

pub use config::{parse_config, parse_config_str, Overrides, RunSettings};
pub use csv_io::{read_csv, read_records, write_csv, write_records};
pub use error::{exit, CliError, Result};
pub use summary::{summarize, Summary};
