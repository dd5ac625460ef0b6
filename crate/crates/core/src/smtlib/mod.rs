//! Reading and writing the SMT-LIB 2 subset used by suite files.

mod parse;
mod print;
pub mod sexp;
mod suite;

use std::path::PathBuf;

use thiserror::Error;

use crate::term::{flatten_conjunction, Formula, Origin, Sort, Symbol, Term, TermError};

pub use parse::parse_query_file;
pub use print::print_query;
pub use suite::{load_suite, Suite};

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("{path}: {source}")]
    InFile { path: String, source: Box<SmtError> },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("suite {0} contains no .smt2 files")]
    EmptySuite(PathBuf),
}

impl From<TermError> for SmtError {
    fn from(e: TermError) -> Self {
        SmtError::Sort(e.to_string())
    }
}

/// A declared symbol: 0-ary declarations are the query's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub name: Symbol,
    pub params: Vec<Sort>,
    pub result: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub name: Option<Symbol>,
    pub term: Term,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryFile {
    pub path: String,
    pub logic: Option<Symbol>,
    /// `set-option` / `set-info` commands, recorded verbatim and otherwise ignored.
    pub options: Vec<String>,
    pub sorts: Vec<Symbol>,
    pub declarations: Vec<Declaration>,
    pub assertions: Vec<Assertion>,
}

/// Concatenates the flattened clauses of every assertion, in order.
pub fn to_formula(q: &QueryFile) -> Result<Formula, SmtError> {
    let mut clauses = Vec::new();
    let mut provenance = Vec::new();
    for a in &q.assertions {
        let sort = a.term.sort();
        if sort != Sort::Bool {
            return Err(SmtError::Sort(format!("assertion `{}` has sort {sort}, expected Bool", a.term)));
        }
        let flat = flatten_conjunction(&a.term)?;
        provenance.extend(std::iter::repeat(a.name.clone()).take(flat.len()));
        clauses.extend(flat);
    }
    Ok(Formula { clauses, provenance, origin: Origin::new(q.path.clone()) })
}
