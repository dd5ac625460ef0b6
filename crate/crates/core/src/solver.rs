//! Solver adapters: an external SMT-LIB process and a manifest-driven oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smtlib::print_query;
use crate::smtlib::sexp::{read_all, Atom, SExp};
use crate::term::Formula;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    /// Sorted, duplicate-free clause indices of an unsat core.
    Unsat(Vec<usize>),
    Unknown,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat(_) => "unsat",
            SolveStatus::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solve_nanos: u64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver crashed: {0}")]
    SolverCrash(String),
    #[error("malformed solver output: {0}")]
    Parse(String),
    #[error("no manifest entry for {0}")]
    ManifestMiss(String),
    #[error("bad oracle manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Solver {
    fn solve(&self, f: &Formula, timeout: Duration) -> Result<SolveResult, SolverError>;

    /// Re-solves the clauses at `indices` alone; true iff they are unsat.
    fn validate_core(&self, f: &Formula, indices: &[usize], timeout: Duration) -> Result<bool, SolverError> {
        let sub = f.select(indices);
        Ok(matches!(self.solve(&sub, timeout)?.status, SolveStatus::Unsat(_)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InputMode {
    #[default]
    Stdin,
    /// Query written to a temporary file whose path is appended to the command.
    TempFile,
}

#[derive(Clone, Debug)]
pub struct ProcessSolver {
    program: String,
    args: Vec<String>,
    input: InputMode,
}

impl ProcessSolver {
    /// Splits `command` with shell quoting rules, e.g. `"z3 -in -smt2"`.
    pub fn from_command(command: &str, input: InputMode) -> Result<ProcessSolver, SolverError> {
        let words = shlex::split(command).filter(|w| !w.is_empty());
        let Some(mut words) = words else {
            return Err(SolverError::SolverCrash(format!("unusable solver command `{command}`")));
        };
        let program = words.remove(0);
        Ok(ProcessSolver { program, args: words, input })
    }

    fn spawn(&self, query: &str) -> Result<(Child, Option<tempfile::NamedTempFile>), SolverError> {
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args).stdout(Stdio::piped()).stderr(Stdio::piped());
        let file = match self.input {
            InputMode::Stdin => {
                cmd.stdin(Stdio::piped());
                None
            }
            InputMode::TempFile => {
                let mut file = tempfile::Builder::new().suffix(".smt2").tempfile()?;
                file.write_all(query.as_bytes())?;
                file.flush()?;
                cmd.arg(file.path()).stdin(Stdio::null());
                Some(file)
            }
        };
        let mut child = cmd.spawn().map_err(|e| SolverError::SolverCrash(format!("cannot start `{}`: {e}", self.program)))?;
        if let Some(mut stdin) = child.stdin.take() {
            let text = query.to_owned();
            // a solver that exits early closes the pipe; that surfaces via its output
            std::thread::spawn(move || {
                let _ = stdin.write_all(text.as_bytes());
            });
        }
        Ok((child, file))
    }
}

fn drain<R: Read + Send + 'static>(r: Option<R>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut s = String::new();
        if let Some(mut r) = r {
            let _ = r.read_to_string(&mut s);
        }
        s
    })
}

impl Solver for ProcessSolver {
    fn solve(&self, f: &Formula, timeout: Duration) -> Result<SolveResult, SolverError> {
        let query = print_query(f, true);
        let start = Instant::now();
        let (mut child, _file) = self.spawn(&query)?;
        let stdout = drain(child.stdout.take());
        let stderr = drain(child.stderr.take());
        let exit = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if start.elapsed() >= timeout {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(1));
        };
        let solve_nanos = start.elapsed().as_nanos() as u64;
        // after a kill, grandchildren may keep the pipes open; don't wait for them
        let Some(exit) = exit else {
            return Ok(SolveResult { status: SolveStatus::Unknown, solve_nanos });
        };
        let out = stdout.join().unwrap_or_default();
        let err = stderr.join().unwrap_or_default();
        match parse_solver_output(&out, f.len()) {
            Ok(Some(status)) => Ok(SolveResult { status, solve_nanos }),
            Ok(None) if !exit.success() => Err(SolverError::SolverCrash(format!("{exit}: {}", err.trim()))),
            Ok(None) => Err(SolverError::Parse(format!("no verdict in `{}`", out.trim()))),
            Err(e) if !exit.success() => Err(SolverError::SolverCrash(format!("{exit}: {e}"))),
            Err(e) => Err(e),
        }
    }
}

/// Verdict and core from solver output; `None` when no verdict was printed.
/// An unsat verdict without a usable core yields every clause index.
pub fn parse_solver_output(out: &str, clause_count: usize) -> Result<Option<SolveStatus>, SolverError> {
    let items = read_all(out).map_err(|e| SolverError::Parse(e.to_string()))?;
    let mut rest = items.iter().skip_while(|e| e.symbol() == Some("success"));
    match rest.next() {
        None => return Ok(None),
        Some(e) => match e.symbol() {
            Some("sat") => return Ok(Some(SolveStatus::Sat)),
            Some("unknown") => return Ok(Some(SolveStatus::Unknown)),
            Some("unsat") => {}
            _ if is_error(e) => return Ok(None),
            _ => return Err(SolverError::Parse(format!("unexpected `{}`", render(e)))),
        },
    }
    let everything = || SolveStatus::Unsat((0..clause_count).collect());
    let Some(core) = rest.next() else {
        return Ok(Some(everything()));
    };
    if is_error(core) {
        return Ok(Some(everything()));
    }
    let Some(names) = core.list() else {
        return Err(SolverError::Parse(format!("expected a core list, got `{}`", render(core))));
    };
    let mut indices = BTreeSet::new();
    for n in names {
        let index = n
            .symbol()
            .and_then(|s| s.strip_prefix('k'))
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i < clause_count)
            .ok_or_else(|| SolverError::Parse(format!("unknown core name `{}`", render(n))))?;
        indices.insert(index);
    }
    if indices.is_empty() {
        return Ok(Some(everything()));
    }
    Ok(Some(SolveStatus::Unsat(indices.into_iter().collect())))
}

fn is_error(e: &SExp) -> bool {
    e.list().and_then(|l| l.first()).and_then(SExp::symbol) == Some("error")
}

fn render(e: &SExp) -> String {
    match e {
        SExp::Atom(Atom::Symbol(s) | Atom::Keyword(s) | Atom::Numeral(s) | Atom::Decimal(s), _) => s.clone(),
        SExp::Atom(Atom::Str(s), _) => format!("{s:?}"),
        SExp::Atom(Atom::Binary(s), _) => format!("#b{s}"),
        SExp::Atom(Atom::Hex(s), _) => format!("#x{s}"),
        SExp::List(items, _) => format!("({})", items.iter().map(render).collect::<Vec<_>>().join(" ")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestStatus {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub status: ManifestStatus,
    #[serde(default)]
    pub core: Vec<usize>,
    #[serde(default)]
    pub nanos: u64,
}

/// Relative `.smt2` path to scripted result.
pub type Manifest = BTreeMap<String, ManifestEntry>;

/// Replays scripted results keyed by each formula's origin path.
#[derive(Clone, Debug, Default)]
pub struct ScriptedOracle {
    manifest: Manifest,
}

impl ScriptedOracle {
    pub fn new(manifest: Manifest) -> ScriptedOracle {
        ScriptedOracle { manifest }
    }

    pub fn load(path: &Path) -> Result<ScriptedOracle, SolverError> {
        let text = std::fs::read_to_string(path)?;
        let manifest = serde_json::from_str(&text)
            .map_err(|e| SolverError::Manifest { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(ScriptedOracle { manifest })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn entry(&self, f: &Formula) -> Result<&ManifestEntry, SolverError> {
        self.manifest.get(&f.origin.path).ok_or_else(|| SolverError::ManifestMiss(f.origin.path.clone()))
    }
}

impl Solver for ScriptedOracle {
    fn solve(&self, f: &Formula, _timeout: Duration) -> Result<SolveResult, SolverError> {
        let e = self.entry(f)?;
        let status = match e.status {
            ManifestStatus::Sat => SolveStatus::Sat,
            ManifestStatus::Unknown => SolveStatus::Unknown,
            ManifestStatus::Unsat => {
                let core: BTreeSet<usize> = e.core.iter().copied().collect();
                if core.iter().any(|&i| i >= f.len()) {
                    return Err(SolverError::Parse(format!("{}: core index out of range", f.origin.path)));
                }
                if core.is_empty() {
                    SolveStatus::Unsat((0..f.len()).collect())
                } else {
                    SolveStatus::Unsat(core.into_iter().collect())
                }
            }
        };
        Ok(SolveResult { status, solve_nanos: e.nanos })
    }

    /// Scripted cores are ground truth: a subset is unsat iff it contains one.
    fn validate_core(&self, f: &Formula, indices: &[usize], timeout: Duration) -> Result<bool, SolverError> {
        match self.solve(f, timeout)?.status {
            SolveStatus::Unsat(core) => Ok(core.iter().all(|i| indices.contains(i))),
            _ => Ok(false),
        }
    }
}
