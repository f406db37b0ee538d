//! Trace-driven simulator for OLeCaR and EXP4-DFDC: trace files, run
//! configurations, reports and the command-line front end.

#![deny(missing_docs)]

pub mod cli;
pub mod config;
pub mod report;
pub mod run;
pub mod trace_io;
