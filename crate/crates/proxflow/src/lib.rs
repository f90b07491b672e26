//! File formats, convergence studies and the `proxflow` command line on top
//! of [`proxflow_core`].

pub mod cli;
mod error;
pub mod io;
pub mod study;

pub use error::{AppError, Result};
pub use proxflow_core;
