//! Suite replay through cache and solver, with reuse and timing metrics.

mod generate;
mod report;

use std::collections::BTreeSet;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::cache::{verify_hit, CoreStore, Outcome, ReuseVerdict, Strategy, StrategyConfig};
use crate::smtlib::{to_formula, SmtError, Suite};
use crate::solver::{SolveResult, SolveStatus, Solver, SolverError};

pub use generate::{generate_files, generate_synthetic_suite, GenParams, GeneratedFile, ORACLE_FILE};
pub use report::{emit_report, render_report, ConfigEcho, ReportFormat, SuiteReport, CSV_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("report: {0}")]
    Report(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cachealot,
    Utopia,
    NoCache,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Cachealot => "cachealot",
            Mode::Utopia => "utopia",
            Mode::NoCache => "nocache",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    /// Strategy options; `strategy.strategy` is overridden by `mode`.
    pub strategy: StrategyConfig,
    pub solver_timeout: Duration,
    pub audit: bool,
}

impl RunConfig {
    pub fn new(mode: Mode) -> RunConfig {
        RunConfig { mode, strategy: StrategyConfig::cachealot(), solver_timeout: Duration::from_secs(10), audit: false }
    }

    fn effective_strategy(&self) -> StrategyConfig {
        let strategy = match self.mode {
            Mode::Utopia => Strategy::Utopia,
            _ => Strategy::Cachealot,
        };
        StrategyConfig { strategy, ..self.strategy.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalStatus {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRecord {
    pub status: SolveStatus,
    pub solve_nanos: u64,
    /// Substituted core re-checked for containment in the formula.
    pub substitution_verified: bool,
}

#[derive(Clone, Debug)]
pub struct FileOutcome {
    pub path: String,
    pub status: FinalStatus,
    /// `None` in no-cache mode.
    pub verdict: Option<ReuseVerdict>,
    /// `None` when resolved by the cache.
    pub solve: Option<SolveResult>,
    pub inserted_core: Option<usize>,
    /// Solver crash message for files recorded as unknown.
    pub error: Option<String>,
    pub audit: Option<AuditRecord>,
}

impl FileOutcome {
    pub fn is_hit(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| v.outcome.is_hit())
    }
}

/// A cache hit the audit could not confirm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditFinding {
    pub path: String,
    pub core_id: usize,
    pub substitution: String,
    pub solver_status: String,
    /// Sat audits and failed substitution checks are unsound; unknown or
    /// crashed audits are merely unconfirmed.
    pub unsound: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteMetrics {
    pub suite_id: String,
    pub formula_count: usize,
    pub sat_count: usize,
    pub unsat_count: usize,
    pub unknown_count: usize,
    pub cache_hits: usize,
    pub timeout_misses: usize,
    pub candidates_selected: usize,
    pub candidates_tested: usize,
    pub cores_stored: usize,
    /// Cache hits over formulae whose final status is unsat, in percent.
    pub unsat_reuse_ratio: f64,
    /// Cache hits over all formulae, in percent.
    pub all_formula_reuse_ratio: f64,
    pub lookup_overhead_nanos: u64,
    pub solver_nanos: u64,
    pub unsat_solver_nanos: u64,
    /// Audit mode only: solver time of the formulae answered by the cache.
    pub time_saved_nanos: Option<u64>,
    pub time_saved_on_unsat_ratio: Option<f64>,
    pub unsound_hits: usize,
}

#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub metrics: SuiteMetrics,
    pub files: Vec<FileOutcome>,
    pub findings: Vec<AuditFinding>,
}

impl SuiteRun {
    pub fn hit_paths(&self) -> BTreeSet<String> {
        self.files.iter().filter(|f| f.is_hit()).map(|f| f.path.clone()).collect()
    }

    pub fn has_unsound_hits(&self) -> bool {
        self.findings.iter().any(|f| f.unsound)
    }
}

fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Replays the suite's files in order against a fresh store.
pub fn run_suite(suite: &Suite, cfg: &RunConfig, solver: &dyn Solver) -> Result<SuiteRun, HarnessError> {
    let strategy = cfg.effective_strategy();
    let mut store = CoreStore::new(strategy.bloom_bits);
    let mut m = SuiteMetrics { suite_id: suite.id.clone(), formula_count: suite.files.len(), ..SuiteMetrics::default() };
    let mut files = Vec::with_capacity(suite.files.len());
    let mut findings = Vec::new();
    let mut saved = 0u64;

    for q in &suite.files {
        let f = to_formula(q)?;
        let mut out = FileOutcome {
            path: q.path.clone(),
            status: FinalStatus::Unknown,
            verdict: None,
            solve: None,
            inserted_core: None,
            error: None,
            audit: None,
        };
        if cfg.mode != Mode::NoCache {
            let v = store.lookup(&f, &strategy);
            m.lookup_overhead_nanos += v.lookup_nanos;
            m.candidates_selected += v.candidates_selected;
            m.candidates_tested += v.candidates_tested;
            if v.outcome == Outcome::TimeoutMiss {
                m.timeout_misses += 1;
            }
            out.verdict = Some(v);
        }
        if let Some(Outcome::HitUnsat { core_id, substitution }) = out.verdict.as_ref().map(|v| &v.outcome) {
            out.status = FinalStatus::Unsat;
            m.cache_hits += 1;
            if cfg.audit {
                let core = &store.entry(*core_id).expect("hit refers to a stored core").clauses;
                let substitution_verified = verify_hit(core, &f, substitution);
                let (status, solve_nanos) = match solver.solve(&f, cfg.solver_timeout) {
                    Ok(r) => (r.status, r.solve_nanos),
                    Err(SolverError::SolverCrash(_)) => (SolveStatus::Unknown, 0),
                    Err(e) => return Err(e.into()),
                };
                saved += solve_nanos;
                let confirmed = matches!(status, SolveStatus::Unsat(_)) && substitution_verified;
                if !confirmed {
                    findings.push(AuditFinding {
                        path: q.path.clone(),
                        core_id: *core_id,
                        substitution: substitution.to_string(),
                        solver_status: status.label().to_string(),
                        unsound: status == SolveStatus::Sat || !substitution_verified,
                    });
                }
                out.audit = Some(AuditRecord { status, solve_nanos, substitution_verified });
            }
        } else {
            match solver.solve(&f, cfg.solver_timeout) {
                Ok(r) => {
                    m.solver_nanos += r.solve_nanos;
                    out.status = match &r.status {
                        SolveStatus::Sat => FinalStatus::Sat,
                        SolveStatus::Unknown => FinalStatus::Unknown,
                        SolveStatus::Unsat(core) => {
                            m.unsat_solver_nanos += r.solve_nanos;
                            if cfg.mode != Mode::NoCache {
                                let clauses = f.select(core).clauses;
                                out.inserted_core = store.insert_core(clauses, f.origin.clone()).ok();
                            }
                            FinalStatus::Unsat
                        }
                    };
                    out.solve = Some(r);
                }
                Err(SolverError::SolverCrash(msg)) => out.error = Some(msg),
                Err(e) => return Err(e.into()),
            }
        }
        match out.status {
            FinalStatus::Sat => m.sat_count += 1,
            FinalStatus::Unsat => m.unsat_count += 1,
            FinalStatus::Unknown => m.unknown_count += 1,
        }
        files.push(out);
    }

    m.cores_stored = store.len();
    m.unsat_reuse_ratio = percent(m.cache_hits as u64, m.unsat_count as u64);
    m.all_formula_reuse_ratio = percent(m.cache_hits as u64, m.formula_count as u64);
    if cfg.audit {
        m.time_saved_nanos = Some(saved);
        m.time_saved_on_unsat_ratio = Some(percent(saved, saved + m.unsat_solver_nanos));
    }
    m.unsound_hits = findings.iter().filter(|f| f.unsound).count();
    Ok(SuiteRun { metrics: m, files, findings })
}

/// [`run_suite`] with every cache hit re-solved.
pub fn run_audit(suite: &Suite, cfg: &RunConfig, solver: &dyn Solver) -> Result<SuiteRun, HarnessError> {
    run_suite(suite, &RunConfig { audit: true, ..cfg.clone() }, solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smtlib::parse_query_file;
    use crate::solver::{Manifest, ManifestEntry, ManifestStatus, ScriptedOracle};

    const TRIANGLE: &str = "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
        (assert (> x y))(assert (> y z))(assert (> z x))(check-sat)";
    const TAIL_CYCLE: &str = "(declare-fun a () Int)(declare-fun b () Int)(declare-fun c () Int)(declare-fun d () Int)\
        (assert (> a b))(assert (> b c))(assert (> c d))(assert (> d b))(check-sat)";
    const SAT: &str = "(declare-fun a () Int)(declare-fun b () Int)(assert (> a b))(check-sat)";

    fn suite(files: &[(&str, &str)]) -> Suite {
        Suite {
            id: "t".into(),
            root: ".".into(),
            files: files.iter().map(|(p, text)| parse_query_file(text.as_bytes(), p).unwrap()).collect(),
        }
    }

    fn oracle() -> ScriptedOracle {
        let mut m = Manifest::new();
        m.insert("1.smt2".into(), ManifestEntry { status: ManifestStatus::Unsat, core: vec![0, 1, 2], nanos: 300 });
        m.insert("3.smt2".into(), ManifestEntry { status: ManifestStatus::Unsat, core: vec![1, 2, 3], nanos: 500 });
        m.insert("s.smt2".into(), ManifestEntry { status: ManifestStatus::Sat, core: vec![], nanos: 70 });
        ScriptedOracle::new(m)
    }

    #[test]
    fn triangle_then_tail_cycle() {
        let s = suite(&[("1.smt2", TRIANGLE), ("3.smt2", TAIL_CYCLE)]);
        let run = run_suite(&s, &RunConfig::new(Mode::Cachealot), &oracle()).unwrap();
        assert_eq!((run.metrics.formula_count, run.metrics.cache_hits), (2, 1));
        assert_eq!(run.metrics.unsat_reuse_ratio, 50.0);
        assert_eq!(run.metrics.time_saved_nanos, None);
        assert!(run.files[1].is_hit() && run.files[1].solve.is_none());
        assert_eq!(run.metrics.cores_stored, 1);
        let utopia = run_suite(&s, &RunConfig::new(Mode::Utopia), &oracle()).unwrap();
        assert_eq!(utopia.metrics.cache_hits, 0);
        // the second core {b>c, c>d, d>b} canonizes like the first
        assert_eq!(utopia.metrics.cores_stored, 1);
    }

    #[test]
    fn audit_accounts_saved_time() {
        let s = suite(&[("1.smt2", TRIANGLE), ("3.smt2", TAIL_CYCLE)]);
        let run = run_audit(&s, &RunConfig::new(Mode::Cachealot), &oracle()).unwrap();
        assert!(run.findings.is_empty());
        assert_eq!(run.metrics.time_saved_nanos, Some(500));
        // saved 500 of 500 + 300 unsat solver nanos
        assert_eq!(run.metrics.time_saved_on_unsat_ratio, Some(62.5));
        assert_eq!(run.metrics.solver_nanos, 300);
        let none = run_audit(&s, &RunConfig::new(Mode::NoCache), &oracle()).unwrap();
        assert!(none.findings.is_empty());
        assert_eq!((none.metrics.cache_hits, none.metrics.lookup_overhead_nanos), (0, 0));
        assert_eq!(none.metrics.time_saved_nanos, Some(0));
    }

    #[test]
    fn sat_only_suite() {
        let s = suite(&[("s.smt2", SAT)]);
        let run = run_suite(&s, &RunConfig::new(Mode::Cachealot), &oracle()).unwrap();
        assert_eq!((run.metrics.cache_hits, run.metrics.unsat_reuse_ratio, run.metrics.sat_count), (0, 0.0, 1));
    }

    #[test]
    fn manifest_miss_is_fatal() {
        let s = suite(&[("other.smt2", SAT)]);
        assert!(matches!(
            run_suite(&s, &RunConfig::new(Mode::Cachealot), &oracle()),
            Err(HarnessError::Solver(SolverError::ManifestMiss(_)))
        ));
    }

    #[test]
    fn unsound_oracle_is_reported() {
        // scripted to claim the reused formula is sat
        let mut m = oracle().manifest().clone();
        m.get_mut("3.smt2").unwrap().status = ManifestStatus::Sat;
        let s = suite(&[("1.smt2", TRIANGLE), ("3.smt2", TAIL_CYCLE)]);
        let run = run_audit(&s, &RunConfig::new(Mode::Cachealot), &ScriptedOracle::new(m)).unwrap();
        assert!(run.has_unsound_hits());
        assert_eq!(run.findings[0].path, "3.smt2");
        assert_eq!(run.metrics.unsound_hits, 1);
    }
}
