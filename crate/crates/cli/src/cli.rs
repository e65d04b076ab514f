//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for bad input (usage, files, validation),
//! 2 when a solver fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use bell_asym_core::lhv::DEFAULT_ENUMERATION_CAP;
use bell_asym_core::{
    builtin_game, builtin_metadata, check_symmetry, classical_bound, coordinate_ascent_oracle,
    solve_adversarial_bound, Error, GameTable, KnowledgeBudget, OracleOptions, SolverOptions,
    SweepConfig, SweepMode,
};
use clap::{Parser, Subcommand};

use crate::format::{parse_game, serialize_game, serialize_strategy, FormatError};
use crate::output::{
    bound_json, bound_text, curve_csv, curve_json, fmt_num, simulation_json, simulation_text,
    symmetry_json, symmetry_text,
};
use crate::parallel::{simulate_parallel, sweep_parallel};

/// Prefix that selects a built-in game instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Parser)]
#[command(
    name = "bell-asym",
    version,
    about = "Local bounds of nonlocal games when an adversary knows part of the measurement settings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical bound by enumeration of deterministic strategies.
    Bound {
        /// Game file, or builtin:<name>.
        game: String,
        #[arg(long)]
        json: bool,
    },
    /// Bound when the adversary has the given relative knowledge of each
    /// party's settings.
    AdvBound {
        game: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi_x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi_y: f64,
        /// Probability levels per setting distribution.
        #[arg(long, default_value_t = 8)]
        heights: usize,
        /// Also run the local-search cross-check.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the optimal strategy to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Asymmetry curve over a grid of knowledge budgets, as CSV.
    Sweep {
        game: String,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        heights: usize,
        /// Sweep the full grid of (xi_x, xi_y) pairs.
        #[arg(long)]
        two_param: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Whether the game is unchanged when the parties swap roles.
    CheckSymmetry {
        game: String,
        #[arg(long)]
        json: bool,
    },
    /// Solve at one budget, then play the optimal strategy by Monte Carlo.
    Simulate {
        game: String,
        #[arg(long, allow_negative_numbers = true)]
        xi_x: f64,
        #[arg(long, allow_negative_numbers = true)]
        xi_y: f64,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        heights: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print a built-in game in the game file format.
    Builtin { name: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_solver_failure() => 2,
            _ => 1,
        }
    }
}

/// Reads a game file, or a built-in game named `builtin:<name>`.
pub fn load_game(game: &str) -> Result<GameTable, CliError> {
    if let Some(name) = game.strip_prefix(BUILTIN_PREFIX) {
        return Ok(builtin_game(name)?);
    }
    let text = std::fs::read_to_string(game).map_err(|source| CliError::Io {
        path: game.to_string(),
        source,
    })?;
    parse_game(&text).map_err(|source| CliError::Format {
        path: game.to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn json_line(v: &serde_json::Value) -> String {
    format!("{v}\n")
}

fn execute(command: Command, err: &mut dyn Write) -> Result<String, CliError> {
    match command {
        Command::Bound { game, json } => {
            let g = load_game(&game)?;
            let c = classical_bound(&g, DEFAULT_ENUMERATION_CAP)?;
            let (fa, fb) = (c.strategy.alice.outputs(), c.strategy.bob.outputs());
            if json {
                return Ok(json_line(&serde_json::json!({
                    "classical_bound": crate::output::round_num(c.value),
                    "alice_responses": fa,
                    "bob_responses": fb,
                })));
            }
            let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let mut out = String::new();
            let _ = writeln!(out, "classical_bound: {}", fmt_num(c.value));
            let _ = writeln!(out, "alice_responses: {}", join(fa));
            let _ = writeln!(out, "bob_responses: {}", join(fb));
            Ok(out)
        }
        Command::AdvBound {
            game,
            xi_x,
            xi_y,
            heights,
            oracle,
            restarts,
            seed,
            witness_out,
            json,
        } => {
            let g = load_game(&game)?;
            let budget = KnowledgeBudget::for_game(&g, xi_x, xi_y)?;
            let r = solve_adversarial_bound(&g, &budget, &SolverOptions::with_heights(heights))?;
            let o = if oracle {
                let opts = OracleOptions {
                    restarts,
                    seed,
                    ..OracleOptions::default()
                };
                Some(coordinate_ascent_oracle(&g, &budget, &opts)?)
            } else {
                None
            };
            if let Some(path) = &witness_out {
                write_file(path, &serialize_strategy(&r.witness))?;
            }
            if json {
                let mut v = serde_json::json!({ "bound": bound_json(&r) });
                if let Some(o) = &o {
                    v["oracle"] = bound_json(o);
                }
                return Ok(json_line(&v));
            }
            let mut out = format!("xi_x: {}\nxi_y: {}\n", fmt_num(xi_x), fmt_num(xi_y));
            out.push_str(&bound_text("bound", &r));
            if let Some(o) = &o {
                out.push_str(&bound_text("oracle", o));
            }
            Ok(out)
        }
        Command::Sweep {
            game,
            steps,
            heights,
            two_param,
            out,
            json,
        } => {
            let g = load_game(&game)?;
            let cfg = SweepConfig {
                steps,
                heights,
                mode: if two_param {
                    SweepMode::TwoParam
                } else {
                    SweepMode::OneParam
                },
            };
            let curve = sweep_parallel(&g, &cfg)?;
            let text = if json {
                json_line(&curve_json(&curve))
            } else {
                curve_csv(&curve)
            };
            match out {
                Some(path) => {
                    write_file(&path, &text)?;
                    let _ = writeln!(err, "wrote {} rows to {}", curve.len(), path.display());
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::CheckSymmetry { game, json } => {
            let r = check_symmetry(&load_game(&game)?);
            Ok(if json {
                json_line(&symmetry_json(&r))
            } else {
                symmetry_text(&r)
            })
        }
        Command::Simulate {
            game,
            xi_x,
            xi_y,
            shots,
            seed,
            heights,
            json,
        } => {
            let g = load_game(&game)?;
            let budget = KnowledgeBudget::for_game(&g, xi_x, xi_y)?;
            let r = solve_adversarial_bound(&g, &budget, &SolverOptions::with_heights(heights))?;
            let s = simulate_parallel(&g, &r.witness, shots, seed)?;
            Ok(if json {
                json_line(&simulation_json(r.value, &s))
            } else {
                simulation_text(r.value, &s)
            })
        }
        Command::Builtin { name } => {
            let meta = builtin_metadata(&name)?;
            let g = builtin_game(&name)?;
            Ok(format!(
                "# {}: {}\n{}",
                meta.name,
                meta.description,
                serialize_game(&g)
            ))
        }
    }
}

/// Runs the command line given in `args` (program name first), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, err) {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing output: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run_cli_with`] on the process's standard streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}
