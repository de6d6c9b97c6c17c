//! Library side of the `mcc` command-line tool.
//!
//! The binary only parses arguments and maps [`CliError`] to an exit code;
//! everything else lives here so it can be driven from tests.

pub mod app;
pub mod demo;
mod error;
pub mod step;
pub mod vectors;

pub use app::{run, Cli};
pub use error::CliError;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
