//! Command-line front end for the reduction simulator: config parsing and
//! validation, canned presets, experiment dispatch, and artifact emission.

pub mod battery;
pub mod config;
pub mod presets;
pub mod runner;
pub mod table;
