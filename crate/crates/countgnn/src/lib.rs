//! File formats, parallel oracles and the command-line front end for
//! `countgnn-core`.

pub mod cli;
pub mod formats;
pub mod oracle;
pub mod parallel;
