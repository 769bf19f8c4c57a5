//! Command-line front end: reads a program, a hypothesis file and an
//! observation file, then solves the problem or answers one query about it.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::abduction::{AbductionError, Pap, PapError, PapSolver, Solution, SolveOptions};
use crate::model::{Atom, Program};
use crate::parser::{parse_atom, parse_atom_list, parse_hypotheses, parse_observations, parse_program, ParseError};

/// Exit code of an answered query or a solved problem.
pub const EXIT_OK: i32 = 0;
/// Exit code of a malformed or invalid input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code of a problem without admissible solutions.
pub const EXIT_INCONSISTENT: i32 = 10;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "pap",
    version,
    about = "Abduction with penalization over normal logic programs",
    long_about = "Abduction with penalization over normal logic programs.\n\n\
        Input files are classified by extension: `.hyp` holds the hypotheses with their \
        penalties, `.obs` the observations, and every other file is part of the program. \
        `solve` computes minimum-penalty explanations (the DLV-style `-FDmincost` front end); \
        `--trace` prints every improving solution on the way (as `-wctrace` does)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub task: Task,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Inputs {
    /// Program files, one `.hyp` file and one `.obs` file.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Largest integer available to arithmetic built-ins.
    #[arg(long, env = "PAP_INT_BOUND")]
    pub int_bound: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Task {
    /// Compute the optimal solutions.
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        /// Print every improving solution found during the search.
        #[arg(long)]
        trace: bool,
        /// Print every optimal solution instead of one.
        #[arg(long)]
        all: bool,
        /// Stop after this many optimal solutions.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Does the problem have an admissible solution?
    Consistency {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Is the set of hypotheses in FILE an admissible solution?
    Admissible {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        solution: PathBuf,
    },
    /// Is the set of hypotheses in FILE an optimal solution?
    Optimal {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "FILE")]
        solution: PathBuf,
    },
    /// Does some optimal solution contain the hypothesis?
    Relevant {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        atom: String,
    },
    /// Does every optimal solution contain the hypothesis?
    Necessary {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        atom: String,
    },
}

impl Task {
    pub fn inputs(&self) -> &Inputs {
        match self {
            Task::Solve { inputs, .. }
            | Task::Consistency { inputs }
            | Task::Admissible { inputs, .. }
            | Task::Optimal { inputs, .. }
            | Task::Relevant { inputs, .. }
            | Task::Necessary { inputs, .. } => inputs,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}:{error}", .path.display())]
    Parse { path: PathBuf, error: ParseError },
    #[error("expected exactly one {0} file")]
    FileCount(&'static str),
    #[error("--atom: {0}")]
    Atom(ParseError),
    #[error(transparent)]
    Invalid(#[from] PapError),
    #[error(transparent)]
    Abduction(#[from] AbductionError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn parse_file<T>(path: &Path, parse: fn(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|error| CliError::Parse {
        path: path.to_owned(),
        error,
    })
}

/// Builds the problem from the input files. Program files are read in the
/// order given and their rules joined.
pub fn load_pap(files: &[PathBuf]) -> Result<Pap, CliError> {
    let with_ext = |ext: &str| -> Vec<&PathBuf> {
        files
            .iter()
            .filter(|p| p.extension().is_some_and(|e| e == ext))
            .collect()
    };
    let (hyps, obs) = (with_ext("hyp"), with_ext("obs"));
    let (hyp, obs) = match (hyps.as_slice(), obs.as_slice()) {
        ([h], [o]) => (*h, *o),
        ([_], _) => return Err(CliError::FileCount(".obs")),
        _ => return Err(CliError::FileCount(".hyp")),
    };
    let mut program = Program::default();
    for path in files.iter().filter(|p| *p != hyp && *p != obs) {
        let p = parse_file(path, parse_program)?;
        program.rules.extend(p.rules);
        program.weak_constraints.extend(p.weak_constraints);
    }
    let hyps = parse_file(hyp, parse_hypotheses)?;
    let obs = parse_file(obs, parse_observations)?;
    Ok(Pap::new(
        hyps.into_iter().map(|d| (d.atom, d.penalty)).collect(),
        program,
        obs.into_iter().map(|d| d.literal).collect(),
    )?)
}

/// Sorted atoms of `s`, each preceded by a space.
fn atoms_line(s: &Solution) -> String {
    s.sorted_names().iter().map(|a| format!(" {a}")).collect()
}

fn answer(out: &mut dyn Write, yes: bool) -> std::io::Result<()> {
    writeln!(out, "ANSWER {}", if yes { "yes" } else { "no" })
}

enum Outcome {
    Done,
    Inconsistent,
}

fn execute(task: &Task, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let inputs = task.inputs();
    let pap = load_pap(&inputs.files)?;
    let solver = PapSolver::new(pap, inputs.int_bound)?;
    let query_atom = |text: &str| -> Result<Atom, CliError> {
        let a = parse_atom(text).map_err(CliError::Atom)?;
        match solver.pap().index_of(&a) {
            Some(_) => Ok(a),
            None => Err(AbductionError::NotAHypothesis(a).into()),
        }
    };
    match task {
        Task::Solve { trace, all, limit, .. } => {
            let opts = SolveOptions {
                trace: *trace,
                all: *all,
                limit: *limit,
            };
            match solver.solve_optimal(opts) {
                Ok(r) => {
                    for s in &r.trace {
                        writeln!(out, "IMPROVED {}{}", s.cost, atoms_line(s))?;
                    }
                    writeln!(out, "COST {}", r.cost)?;
                    for s in &r.solutions {
                        writeln!(out, "SOLUTION{}", atoms_line(s))?;
                    }
                    Ok(Outcome::Done)
                }
                Err(AbductionError::Inconsistent) => {
                    writeln!(out, "INCONSISTENT")?;
                    Ok(Outcome::Inconsistent)
                }
                Err(e) => Err(e.into()),
            }
        }
        Task::Consistency { .. } => {
            answer(out, solver.is_consistent())?;
            Ok(Outcome::Done)
        }
        Task::Admissible { solution, .. } | Task::Optimal { solution, .. } => {
            let s = parse_file(solution, parse_atom_list)?;
            let yes = if matches!(task, Task::Admissible { .. }) {
                solver.is_admissible(&s)?.is_some()
            } else {
                solver.is_optimal(&s)?
            };
            answer(out, yes)?;
            Ok(Outcome::Done)
        }
        Task::Relevant { atom, .. } | Task::Necessary { atom, .. } => {
            let h = query_atom(atom)?;
            let r = if matches!(task, Task::Relevant { .. }) {
                solver.is_relevant(&h)
            } else {
                solver.is_necessary(&h)
            };
            match r {
                Ok(yes) => {
                    answer(out, yes)?;
                    Ok(Outcome::Done)
                }
                // no optimal solutions: the hypothesis is in none of them
                Err(AbductionError::Inconsistent) => {
                    answer(out, false)?;
                    Ok(Outcome::Inconsistent)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Runs one task and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(&cli.task, out) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Inconsistent) => {
            let _ = writeln!(err, "pap: the problem has no admissible solution");
            EXIT_INCONSISTENT
        }
        Err(e) => {
            let _ = writeln!(err, "pap: {e}");
            EXIT_INPUT
        }
    }
}
