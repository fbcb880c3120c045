//! File formats and commands of the `cann` executable.

pub mod app;
pub mod config;
pub mod dataset;
pub mod error;
pub mod format;
pub mod model_file;

pub use app::{run, Cli};
pub use error::{CliError, CliResult};
