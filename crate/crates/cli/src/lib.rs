//! Library side of the command-line front end: subcommand
//! implementations, benchmark corpus generators, file formats, and
//! report rendering. The `checklang` binary is a thin argument parser
//! over these; the acceptance suite drives them directly.

pub mod commands;
pub mod corpus;
pub mod io;
pub mod report;
