//! Process adapter against scripted shell "solvers" and, when installed, z3.

use std::process::Command;
use std::time::{Duration, Instant};

use unsat_cache::harness::{generate_files, GenParams};
use unsat_cache::smtlib::{parse_query_file, to_formula};
use unsat_cache::solver::{InputMode, ManifestStatus, ProcessSolver, SolveStatus, Solver, SolverError};
use unsat_cache::term::Formula;

const T: Duration = Duration::from_secs(20);

fn formula(text: &str) -> Formula {
    to_formula(&parse_query_file(text.as_bytes(), "q.smt2").unwrap()).unwrap()
}

const TRIANGLE: &str = "(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)\
    (assert (> x y))(assert (> y z))(assert (> z x))(check-sat)";
const CYCLE_TAIL: &str = "(declare-fun a () Int)(declare-fun b () Int)(declare-fun c () Int)(declare-fun d () Int)\
    (assert (> b c))(assert (> c d))(assert (> d b))(assert (> a b))(check-sat)";

fn sh(script: &str, input: InputMode) -> ProcessSolver {
    ProcessSolver::from_command(&format!("sh -c '{script}'"), input).unwrap()
}

#[test]
fn scripted_unsat_with_core() {
    let s = sh("cat > /dev/null; echo unsat; echo \"(k2 k0)\"", InputMode::Stdin);
    assert_eq!(s.solve(&formula(TRIANGLE), T).unwrap().status, SolveStatus::Unsat(vec![0, 2]));
}

#[test]
fn scripted_unsat_without_core_support() {
    let s = sh("cat > /dev/null; echo unsat; echo \"(error \\\"no cores\\\")\"", InputMode::Stdin);
    assert_eq!(s.solve(&formula(CYCLE_TAIL), T).unwrap().status, SolveStatus::Unsat(vec![0, 1, 2, 3]));
}

#[test]
fn solver_receives_named_query() {
    // answers sat only if the query names its clauses and asks for a core
    let script = "grep -q \"(get-unsat-core)\" && echo sat || echo unknown";
    assert_eq!(sh(script, InputMode::Stdin).solve(&formula(TRIANGLE), T).unwrap().status, SolveStatus::Sat);
    let script = "grep -q \":named k2\" \"$0\" && echo sat || echo unknown";
    assert_eq!(sh(script, InputMode::TempFile).solve(&formula(TRIANGLE), T).unwrap().status, SolveStatus::Sat);
}

#[test]
fn crash_and_garbage() {
    let crash = sh("cat > /dev/null; echo boom >&2; exit 3", InputMode::Stdin);
    assert!(matches!(crash.solve(&formula(TRIANGLE), T), Err(SolverError::SolverCrash(m)) if m.contains("boom")));
    let garbage = sh("cat > /dev/null; echo banana", InputMode::Stdin);
    assert!(matches!(garbage.solve(&formula(TRIANGLE), T), Err(SolverError::Parse(_))));
    let missing = ProcessSolver::from_command("/nonexistent/solver", InputMode::Stdin).unwrap();
    assert!(matches!(missing.solve(&formula(TRIANGLE), T), Err(SolverError::SolverCrash(_))));
}

#[test]
fn timeout_gives_unknown() {
    let slow = sh("sleep 10", InputMode::Stdin);
    let start = Instant::now();
    assert_eq!(slow.solve(&formula(TRIANGLE), Duration::from_millis(100)).unwrap().status, SolveStatus::Unknown);
    assert!(start.elapsed() < Duration::from_secs(5));
}

fn z3() -> Option<ProcessSolver> {
    let found = Command::new("z3").arg("-version").output().is_ok_and(|o| o.status.success());
    if !found {
        eprintln!("z3 not found; skipping");
    }
    found.then(|| ProcessSolver::from_command("z3 -in", InputMode::Stdin).unwrap())
}

#[test]
fn z3_cycle_cores() {
    let Some(z3) = z3() else { return };
    assert_eq!(z3.solve(&formula(TRIANGLE), T).unwrap().status, SolveStatus::Unsat(vec![0, 1, 2]));
    // any core of cycle_tail must contain the b-c-d cycle, and a>b is not needed
    assert_eq!(z3.solve(&formula(CYCLE_TAIL), T).unwrap().status, SolveStatus::Unsat(vec![0, 1, 2]));
    assert_eq!(z3.solve(&formula("(assert true)(check-sat)"), T).unwrap().status, SolveStatus::Sat);
}

#[test]
fn z3_validate_core() {
    let Some(z3) = z3() else { return };
    assert!(z3.validate_core(&formula(TRIANGLE), &[0, 1, 2], T).unwrap());
    // b=3, c=2, d=1 satisfies b>c and c>d
    assert!(!z3.validate_core(&formula(CYCLE_TAIL), &[0, 1], T).unwrap());
    let f = formula("(declare-fun x () Int)(assert (> x 0))(assert (distinct x x))(check-sat)");
    assert!(z3.validate_core(&f, &[1], T).unwrap());
    assert!(!z3.validate_core(&f, &[0], T).unwrap());
}

#[test]
fn z3_confirms_generated_ground_truth() {
    let Some(z3) = z3() else { return };
    for g in generate_files(11, &GenParams::with_files(40)) {
        let f = to_formula(&parse_query_file(g.text.as_bytes(), &g.name).unwrap()).unwrap();
        let got = z3.solve(&f, T).unwrap().status;
        match g.entry.status {
            ManifestStatus::Sat => assert_eq!(got, SolveStatus::Sat, "{}", g.name),
            ManifestStatus::Unsat => {
                assert!(matches!(got, SolveStatus::Unsat(_)), "{}: {got:?}", g.name);
                assert!(z3.validate_core(&f, &g.entry.core, T).unwrap(), "{}: manifest core is sat", g.name);
            }
            ManifestStatus::Unknown => unreachable!("generator never emits unknown"),
        }
    }
}
