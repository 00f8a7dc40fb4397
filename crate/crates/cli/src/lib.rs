//! Command-line front end for `shapley-r2`: CSV ingestion, Yeo–Johnson
//! preprocessing, analysis and simulation commands.

pub mod alloc;
pub mod app;
pub mod error;
pub mod input;
pub mod report;
pub mod yeojohnson;

pub use app::{run, Cli};
pub use error::{CliError, CliResult};
