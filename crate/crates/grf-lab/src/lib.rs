//! CLI front end for the generalized Ricci flow laboratory.

pub mod catalog;
pub mod cli;
pub mod output;

pub use cli::run;
