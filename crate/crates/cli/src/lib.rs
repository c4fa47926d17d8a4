//! Building blocks of the `hexmg` command-line tool.

pub mod emit;
pub mod suite;
