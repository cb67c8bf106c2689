//! File formats, instance generation, benchmarking and trace rendering
//! around [`ckm_core`].

pub mod bench;
pub mod error;
pub mod format;
pub mod generate;
pub mod render;

pub use error::{CliError, ExitCode};
