//! Batch front end: reads a [`RunConfig`], runs one experiment and writes
//! data tables, a summary, `manifest.json` and a gnuplot script.

pub mod config;
pub mod output;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Experiment, Format, RunConfig};
pub use run::{execute, RunOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(crate::Error),

    #[error("numerical failure: {0}")]
    Numerical(crate::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Support(_) | E::BasisOverflow { .. } | E::Precondition(_) => {
                CliError::Config(e)
            }
            _ => CliError::Numerical(e),
        }
    }
}
