//! Command-line front end: surface syntax, subcommands and JSON output.

pub mod app;
pub mod parse;
mod selftest;

pub use app::{render, run, Cli, Globals, Status};
pub use parse::{parse_density, parse_expression, parse_operator, print_expression, Expression, ParseError};
