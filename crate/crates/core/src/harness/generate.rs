//! Deterministic synthetic suites with ground-truth oracle manifests.
//!
//! Unsat files embed a strict-order cycle (Int `>` or bit-vector `bvugt`,
//! optionally with one edge phrased through `exists`) among satisfiable
//! filler; sat files are edges consistent with a hidden total order, chains,
//! non-negativity bounds and `forall` implications that hold in that order.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::smtlib::print_query;
use crate::solver::{Manifest, ManifestEntry, ManifestStatus};
use crate::term::{BinderKind, Clause, Formula, Origin, Sort, Term, Var};

pub const ORACLE_FILE: &str = "oracle.json";

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub files: usize,
    pub min_vars: usize,
    pub max_vars: usize,
    pub min_filler: usize,
    pub max_filler: usize,
    pub unsat_share: f64,
    pub quantified_share: f64,
    pub bitvec_share: f64,
    /// Share of unsat files whose cycle opens the file in cycle order.
    pub cycle_first_share: f64,
}

impl GenParams {
    pub fn with_files(files: usize) -> GenParams {
        GenParams {
            files,
            min_vars: 3,
            max_vars: 7,
            min_filler: 2,
            max_filler: 8,
            unsat_share: 0.55,
            quantified_share: 0.2,
            bitvec_share: 0.2,
            cycle_first_share: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedFile {
    pub name: String,
    pub text: String,
    pub entry: ManifestEntry,
}

const LETTERS: &[u8] = b"abcdefghjkmnpqrstwxyz";

struct Names<'r> {
    rng: &'r mut ChaCha8Rng,
    taken: HashSet<String>,
}

impl Names<'_> {
    fn fresh(&mut self, sort: &Sort) -> Var {
        loop {
            let letter = LETTERS[self.rng.gen_range(0..LETTERS.len())] as char;
            let name = format!("{letter}{}", self.rng.gen_range(0..100));
            if self.taken.insert(name.clone()) {
                return Var::new(name, sort.clone());
            }
        }
    }
}

fn v(x: &Var) -> Term {
    Term::var(x.clone())
}

fn pred(name: &str, args: Vec<Term>) -> Term {
    Term::pred(name, args).expect("generator builds well-sorted predicates")
}

fn above(hi: &Var, lo: &Var) -> Term {
    let op = if hi.sort == Sort::Int { ">" } else { "bvugt" };
    pred(op, vec![v(hi), v(lo)])
}

/// `hi > lo` phrased as `(exists ((u Int)) (and (= u hi) (> u lo)))`.
fn above_via_exists(hi: &Var, lo: &Var) -> Term {
    let u = Var::new("u", Sort::Int);
    let body = pred("and", vec![pred("=", vec![v(&u), v(hi)]), pred(">", vec![v(&u), v(lo)])]);
    Term::binder(BinderKind::Exists, vec![u], body).expect("non-empty binder")
}

/// `(forall ((u Int)) (=> (> u hi) (> u lo)))`, valid whenever hi >= lo.
fn dominated(hi: &Var, lo: &Var) -> Term {
    let u = Var::new("u", Sort::Int);
    let body = pred("=>", vec![pred(">", vec![v(&u), v(hi)]), pred(">", vec![v(&u), v(lo)])]);
    Term::binder(BinderKind::Forall, vec![u], body).expect("non-empty binder")
}

/// Satisfiable clauses over `order`, whose position is the hidden rank
/// (later means larger).
fn filler(rng: &mut ChaCha8Rng, order: &[Var], count: usize, quantified: bool) -> Vec<Term> {
    let mut out = Vec::new();
    if order.len() < 2 {
        return out;
    }
    // a chain prefix, then random consistent edges and bounds
    let chain = rng.gen_range(1..order.len());
    let start = rng.gen_range(0..order.len() - chain);
    for i in (start..start + chain).rev() {
        out.push(above(&order[i + 1], &order[i]));
    }
    while out.len() < count.max(chain) {
        let i = rng.gen_range(0..order.len() - 1);
        let j = rng.gen_range(i + 1..order.len());
        let roll = rng.gen_range(0..10);
        if roll < 2 && order[i].sort == Sort::Int {
            out.push(pred(">=", vec![v(&order[i]), Term::int(0)]));
        } else if roll < 4 && quantified && order[i].sort == Sort::Int {
            out.push(dominated(&order[j], &order[i]));
        } else {
            out.push(above(&order[j], &order[i]));
        }
    }
    out
}

fn generate_one(rng: &mut ChaCha8Rng, p: &GenParams, name: &str) -> GeneratedFile {
    let unsat = rng.gen_bool(p.unsat_share);
    let quantified = rng.gen_bool(p.quantified_share);
    let bitvec = !quantified && rng.gen_bool(p.bitvec_share);
    let bv8 = Sort::bitvec(8).expect("positive width");
    let mut names = Names { rng: &mut *rng, taken: HashSet::new() };
    let filler_sort = if bitvec && !unsat { bv8.clone() } else { Sort::Int };
    let nvars = names.rng.gen_range(p.min_vars..=p.max_vars);
    let order: Vec<Var> = (0..nvars).map(|_| names.fresh(&filler_sort)).collect();
    let (cycle, first) = if unsat {
        let cycle_sort = if bitvec { bv8 } else { Sort::Int };
        let len = names.rng.gen_range(3..=4);
        let vars: Vec<Var> = (0..len).map(|_| names.fresh(&cycle_sort)).collect();
        let via_exists = quantified.then(|| names.rng.gen_range(0..len));
        let edges: Vec<Term> = (0..len)
            .map(|i| {
                let (hi, lo) = (&vars[i], &vars[(i + 1) % len]);
                if via_exists == Some(i) {
                    above_via_exists(hi, lo)
                } else {
                    above(hi, lo)
                }
            })
            .collect();
        (edges, rng.gen_bool(p.cycle_first_share))
    } else {
        (Vec::new(), false)
    };
    let count = rng.gen_range(p.min_filler..=p.max_filler);
    let mut rest = filler(rng, &order, count, quantified);
    let mut terms: Vec<(bool, Term)> = cycle.into_iter().map(|t| (true, t)).collect();
    if first {
        rest.shuffle(rng);
        terms.extend(rest.into_iter().map(|t| (false, t)));
    } else {
        terms.extend(rest.into_iter().map(|t| (false, t)));
        terms.shuffle(rng);
    }
    let core: Vec<usize> = terms.iter().enumerate().filter(|(_, (c, _))| *c).map(|(i, _)| i).collect();
    let clauses: Vec<Clause> = terms.into_iter().map(|(_, t)| Clause::new(t).expect("Bool clauses")).collect();
    let formula = Formula::new(clauses, Origin::new(name));
    let text = format!("(set-logic ALL)\n{}", print_query(&formula, false));
    let nanos = 20_000 + 5_000 * formula.len() as u64 + rng.gen_range(0..10_000);
    let status = if unsat { ManifestStatus::Unsat } else { ManifestStatus::Sat };
    GeneratedFile { name: name.to_string(), text, entry: ManifestEntry { status, core, nanos } }
}

/// The suite's files in order, without touching the disk.
pub fn generate_files(seed: u64, params: &GenParams) -> Vec<GeneratedFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..params.files).map(|i| generate_one(&mut rng, params, &format!("f{i:04}.smt2"))).collect()
}

/// Writes `f0000.smt2, ...` and the oracle manifest into `out`.
pub fn generate_synthetic_suite(seed: u64, params: &GenParams, out: &Path) -> Result<Vec<GeneratedFile>, HarnessError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(out).map_err(io(out))?;
    let files = generate_files(seed, params);
    let mut manifest = Manifest::new();
    for f in &files {
        let path = out.join(&f.name);
        std::fs::write(&path, &f.text).map_err(io(&path))?;
        manifest.insert(f.name.clone(), f.entry.clone());
    }
    let path = out.join(ORACLE_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Report(e.to_string()))?;
    std::fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(files)
}
