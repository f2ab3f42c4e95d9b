//! Library surface of the experiment runner, shared by the binary and the
//! integration/acceptance suites.

pub mod config;
pub mod experiment;
