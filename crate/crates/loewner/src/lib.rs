//! Verification harness, JSON formats and command-line front end for
//! `loewner-core`.

pub mod harness;
pub mod io;
pub mod cli;
