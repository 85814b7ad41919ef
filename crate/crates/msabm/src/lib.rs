//! File outputs, parameter sweeps and the command-line front end for
//! [`msabm_core`].

pub mod cli;
pub mod io;
pub mod sweep;

pub use cli::cli_main;
