//! Unsat-core store, Bloom-based candidate selection and the two candidate
//! testing strategies.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::deadline::{Deadline, Timeout};
use crate::fingerprint::{
    bloom_subset, clause_hash, compute_formula_hash_footprint, to_bloom_bits, BloomBits, ClauseHash, HashFootprint,
    DEFAULT_BLOOM_BITS,
};
use crate::join::{build_tables, filter_invalid, join_full_within, join_lazy, ClauseIndex};
use crate::term::{apply_substitution_avoiding_capture, free_vars_of, Clause, Formula, Origin, Substitution, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Cachealot,
    Utopia,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub canonize: bool,
    pub bloom_bits: usize,
    pub o1: bool,
    pub o2: bool,
    pub o3: bool,
    pub lookup_deadline: Duration,
}

impl StrategyConfig {
    pub fn cachealot() -> StrategyConfig {
        StrategyConfig {
            strategy: Strategy::Cachealot,
            canonize: true,
            bloom_bits: DEFAULT_BLOOM_BITS,
            o1: true,
            o2: true,
            o3: true,
            lookup_deadline: Duration::from_millis(100),
        }
    }

    pub fn utopia() -> StrategyConfig {
        StrategyConfig { strategy: Strategy::Utopia, ..StrategyConfig::cachealot() }
    }
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::cachealot()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("an unsat core must contain at least one clause")]
    EmptyCore,
}

/// Canonical form of a clause list: free variables renamed to `v0, v1, ...`
/// in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub clauses: Vec<Clause>,
    /// Original variable to canonical variable.
    pub renaming: Substitution,
}

pub fn canonize_clauses(clauses: &[Clause]) -> Canonical {
    let renaming = Substitution::from_pairs(
        free_vars_of(clauses).into_iter().enumerate().map(|(i, v)| {
            let sort = v.sort.clone();
            (v, Var::new(format!("v{i}"), sort))
        }),
    )
    .expect("renaming keeps sorts");
    let clauses = clauses.iter().map(|c| apply_substitution_avoiding_capture(c, &renaming)).collect();
    Canonical { clauses, renaming }
}

pub fn canonize(f: &Formula) -> Formula {
    let Canonical { clauses, .. } = canonize_clauses(&f.clauses);
    Formula { clauses, provenance: f.provenance.clone(), origin: f.origin.clone() }
}

#[derive(Clone, Debug)]
pub struct UnsatCoreEntry {
    pub id: usize,
    pub clauses: Vec<Clause>,
    pub canonical: Canonical,
    pub clause_hashes: Vec<ClauseHash>,
    pub footprint: HashFootprint,
    pub bloom: BloomBits,
    pub origin: Origin,
}

/// Formula-side data shared by all candidates of one lookup.
pub struct PreparedFormula<'a> {
    pub formula: &'a Formula,
    index: ClauseIndex,
    canonical: Option<(Canonical, Substitution, ClauseIndex)>,
}

impl<'a> PreparedFormula<'a> {
    pub fn new(formula: &'a Formula, canonize: bool) -> PreparedFormula<'a> {
        let canonical = canonize.then(|| {
            let c = canonize_clauses(&formula.clauses);
            let back = c.renaming.inverse().expect("canonical renaming is injective");
            let index = ClauseIndex::new(&c.clauses);
            (c, back, index)
        });
        PreparedFormula { formula, index: ClauseIndex::new(&formula.clauses), canonical }
    }

    /// Whether every image of a core clause under `sigma` occurs in the formula.
    pub fn covers(&self, core: &[Clause], sigma: &Substitution) -> bool {
        core.iter().all(|c| self.index.contains(&self.formula.clauses, &apply_substitution_avoiding_capture(c, sigma)))
    }
}

/// Soundness gate: every substituted core clause is alpha-equal to some formula clause.
pub fn verify_hit(core: &[Clause], formula: &Formula, sigma: &Substitution) -> bool {
    PreparedFormula::new(formula, false).covers(core, sigma)
}

fn cachealot_search(core: &[Clause], clauses: &[Clause], index: &ClauseIndex, cfg: &StrategyConfig, deadline: Deadline) -> Result<Option<Substitution>, Timeout> {
    let Ok(tables) = build_tables(core, clauses, cfg.o1.then_some(index)) else {
        return Ok(None);
    };
    deadline.check()?;
    let tables = if cfg.o2 {
        match filter_invalid(tables) {
            Ok((t, _)) => t,
            Err(_) => return Ok(None),
        }
    } else {
        tables
    };
    if cfg.o3 {
        join_lazy(&tables, deadline)
    } else {
        let joined = join_full_within(&tables, deadline)?;
        Ok((!joined.is_empty()).then(|| joined.row_substitution(0)))
    }
}

/// Complete substitution from the entry's variables into the formula's, by
/// unification and joining.
pub fn test_candidate_cachealot(entry: &UnsatCoreEntry, f: &PreparedFormula<'_>, cfg: &StrategyConfig, deadline: Deadline) -> Result<Option<Substitution>, Timeout> {
    match &f.canonical {
        Some((canon, back, index)) => {
            let found = cachealot_search(&entry.canonical.clauses, &canon.clauses, index, cfg, deadline)?;
            Ok(found.map(|s| entry.canonical.renaming.then(&s).then(back).restrict(&free_vars_of(&entry.clauses))))
        }
        None => cachealot_search(&entry.clauses, &f.formula.clauses, &f.index, cfg, deadline),
    }
}

/// Clause-wise containment after optional canonization of both sides.
pub fn test_candidate_utopia(entry: &UnsatCoreEntry, f: &PreparedFormula<'_>) -> Option<Substitution> {
    match &f.canonical {
        Some((canon, back, index)) => entry
            .canonical
            .clauses
            .iter()
            .all(|c| index.contains(&canon.clauses, c))
            .then(|| entry.canonical.renaming.then(back).restrict(&free_vars_of(&entry.clauses))),
        None => entry.clauses.iter().all(|c| f.index.contains(&f.formula.clauses, c)).then(|| {
            Substitution::from_pairs(free_vars_of(&entry.clauses).into_iter().map(|v| (v.clone(), v))).expect("identity")
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    HitUnsat { core_id: usize, substitution: Substitution },
    Miss,
    TimeoutMiss,
}

impl Outcome {
    pub fn is_hit(&self) -> bool {
        matches!(self, Outcome::HitUnsat { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::HitUnsat { .. } => "hit",
            Outcome::Miss => "miss",
            Outcome::TimeoutMiss => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReuseVerdict {
    pub outcome: Outcome,
    pub lookup_nanos: u64,
    pub candidates_selected: usize,
    pub candidates_tested: usize,
}

#[derive(Clone, Debug)]
pub struct CoreStore {
    width: usize,
    entries: Vec<UnsatCoreEntry>,
    dedup: HashMap<Vec<ClauseHash>, Vec<usize>>,
    /// Hits whose substitution failed re-verification and were discarded.
    rejected_hits: usize,
}

fn same_multiset(a: &[Clause], b: &[Clause]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| match (0..b.len()).find(|&j| !used[j] && b[j].alpha_eq(x)) {
        Some(j) => {
            used[j] = true;
            true
        }
        None => false,
    })
}

impl CoreStore {
    pub fn new(bloom_bits: usize) -> CoreStore {
        CoreStore { width: bloom_bits, entries: Vec::new(), dedup: HashMap::new(), rejected_hits: 0 }
    }

    pub fn bloom_bits(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[UnsatCoreEntry] {
        &self.entries
    }

    pub fn entry(&self, id: usize) -> Option<&UnsatCoreEntry> {
        self.entries.get(id)
    }

    pub fn rejected_hits(&self) -> usize {
        self.rejected_hits
    }

    /// Stores a core, or returns the id of an existing core with the same
    /// canonized clause multiset.
    pub fn insert_core(&mut self, clauses: Vec<Clause>, origin: Origin) -> Result<usize, StoreError> {
        if clauses.is_empty() {
            return Err(StoreError::EmptyCore);
        }
        let canonical = canonize_clauses(&clauses);
        let clause_hashes: Vec<ClauseHash> = clauses.iter().map(clause_hash).collect();
        let mut key = clause_hashes.clone();
        key.sort_unstable();
        if let Some(ids) = self.dedup.get(&key) {
            if let Some(&id) = ids.iter().find(|&&id| same_multiset(&self.entries[id].canonical.clauses, &canonical.clauses)) {
                return Ok(id);
            }
        }
        let footprint = compute_formula_hash_footprint(&clauses);
        let bloom = to_bloom_bits(&footprint, self.width);
        let id = self.entries.len();
        self.entries.push(UnsatCoreEntry { id, clauses, canonical, clause_hashes, footprint, bloom, origin });
        self.dedup.entry(key).or_default().push(id);
        Ok(id)
    }

    /// Entries whose Bloom bits are a subset of the formula's, ascending id.
    pub fn select_candidates(&self, f: &Formula) -> Vec<&UnsatCoreEntry> {
        let bloom = to_bloom_bits(&compute_formula_hash_footprint(&f.clauses), self.width);
        self.entries.iter().filter(|e| bloom_subset(&e.bloom, &bloom).expect("store width")).collect()
    }

    pub fn lookup(&mut self, f: &Formula, cfg: &StrategyConfig) -> ReuseVerdict {
        let start = Instant::now();
        let deadline = Deadline::at(start + cfg.lookup_deadline);
        let (outcome, selected, tested, rejected) = self.search(f, cfg, deadline);
        self.rejected_hits += rejected;
        ReuseVerdict {
            outcome,
            lookup_nanos: start.elapsed().as_nanos() as u64,
            candidates_selected: selected,
            candidates_tested: tested,
        }
    }

    fn search(&self, f: &Formula, cfg: &StrategyConfig, deadline: Deadline) -> (Outcome, usize, usize, usize) {
        let candidates = self.select_candidates(f);
        if candidates.is_empty() {
            return (Outcome::Miss, 0, 0, 0);
        }
        let prepared = PreparedFormula::new(f, cfg.canonize);
        let (mut tested, mut rejected) = (0, 0);
        for entry in &candidates {
            if deadline.expired() {
                return (Outcome::TimeoutMiss, candidates.len(), tested, rejected);
            }
            tested += 1;
            let found = match cfg.strategy {
                Strategy::Cachealot => match test_candidate_cachealot(entry, &prepared, cfg, deadline) {
                    Ok(found) => found,
                    Err(Timeout) => return (Outcome::TimeoutMiss, candidates.len(), tested, rejected),
                },
                Strategy::Utopia => test_candidate_utopia(entry, &prepared),
            };
            if let Some(sigma) = found {
                if prepared.covers(&entry.clauses, &sigma) {
                    return (Outcome::HitUnsat { core_id: entry.id, substitution: sigma }, candidates.len(), tested, rejected);
                }
                rejected += 1;
            }
        }
        (Outcome::Miss, candidates.len(), tested, rejected)
    }

    pub fn reset(&mut self) {
        self.entries.clear();
        self.dedup.clear();
        self.rejected_hits = 0;
    }
}

impl Default for CoreStore {
    fn default() -> Self {
        CoreStore::new(DEFAULT_BLOOM_BITS)
    }
}
