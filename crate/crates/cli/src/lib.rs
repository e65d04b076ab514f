//! File formats, output formatting, multi-threaded drivers and the command
//! line for `bell-asym-core`.

pub mod cli;
pub mod format;
pub mod output;
pub mod parallel;

pub use cli::{load_game, run_cli, run_cli_with, CliError};
pub use format::{parse_game, parse_strategy, serialize_game, serialize_strategy, FormatError};
