//! Command-line front end for the current status two-sample tests: CSV
//! ingestion, scenario files, the parallel replication driver, and the
//! subcommand implementations. The `curstat` binary is a thin wrapper over
//! this library so integration tests can drive the same code paths.

pub mod commands;
pub mod csv_io;
pub mod runner;
pub mod scenario_file;
