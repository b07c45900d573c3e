//! Configuration files, CSV output, a rayon executor and the command-line
//! driver around `purcell-core`.

pub mod cli;
pub mod config;
pub mod csv;
mod error;
pub mod exec;
pub mod validate;

pub use error::CliError;
