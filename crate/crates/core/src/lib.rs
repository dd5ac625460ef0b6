//! Solver-agnostic reuse of unsat cores across SMT formulae that agree up to
//! a variable-to-variable substitution.
//!
//! Pipeline: clause hashes and Bloom bits select candidate cores
//! ([`fingerprint`], [`cache`]); unification and a join over per-clause
//! substitution tables decide whether a candidate embeds into the formula
//! ([`unify`], [`join`]). Misses go to a [`solver`]; [`harness`] replays suites
//! and reports metrics.

pub mod cache;
pub mod deadline;
pub mod fingerprint;
pub mod harness;
pub mod join;
pub mod smtlib;
pub mod solver;
pub mod term;
pub mod unify;

pub use cache::{canonize, CoreStore, Outcome, ReuseVerdict, Strategy, StrategyConfig};
pub use deadline::{Deadline, Timeout};
pub use fingerprint::{clause_hash, compute_ast_hash, ClauseHash};
pub use harness::{run_audit, run_suite, Mode, RunConfig, SuiteMetrics, SuiteRun};
pub use term::{Clause, Formula, Origin, Sort, Substitution, Term, Var};
