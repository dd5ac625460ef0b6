//! Joining per-clause unifying substitutions into a complete substitution.
//!
//! Each core clause contributes a [`SubstitutionTable`] whose columns are
//! the clause's free variables and whose rows are the images under every
//! unifier with some formula clause. A complete substitution is a row of
//! the natural join of all tables. Three routes produce it:
//!
//! * [`join_lazy`]: depth-first backtracking over tables sorted by size,
//!   stopping at the first consistent assignment;
//! * [`join_full`]: materialized nested-loop join (reference route);
//! * [`brute_force_complete`]: enumeration of all maps from core variables
//!   to formula variables, independent of unification and tables.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::deadline::{Deadline, Timeout};
use crate::fingerprint::{clause_hash, ClauseHash};
use crate::term::{apply_substitution_avoiding_capture, free_vars_of, Clause, Substitution, Var};
use crate::unify::unify;

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("some core clause has no consistent unifier")]
pub struct NoMatch;

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("brute-force oracle limited to {max_core} core and {max_formula} formula variables, got {core} and {formula}")]
pub struct SizeGuard {
    pub core: usize,
    pub formula: usize,
    pub max_core: usize,
    pub max_formula: usize,
}

pub const ORACLE_MAX_CORE_VARS: usize = 6;
pub const ORACLE_MAX_FORMULA_VARS: usize = 8;

/// Materialized join results larger than this many cells abort with
/// [`Timeout`]; the full join is only a reference route.
pub const FULL_JOIN_CELL_BUDGET: usize = 1 << 25;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionTable {
    columns: Vec<Var>,
    rows: Vec<Vec<Var>>,
    source_clause: usize,
}

impl SubstitutionTable {
    pub fn new(columns: Vec<Var>, source_clause: usize) -> SubstitutionTable {
        SubstitutionTable { columns, rows: Vec::new(), source_clause }
    }

    /// Table of the given rows, dropping duplicates (first occurrence kept).
    pub fn with_rows(columns: Vec<Var>, rows: impl IntoIterator<Item = Vec<Var>>, source_clause: usize) -> SubstitutionTable {
        let mut table = SubstitutionTable::new(columns, source_clause);
        let mut seen = HashSet::new();
        for row in rows {
            assert_eq!(row.len(), table.columns.len(), "row width must match the columns");
            debug_assert!(row.iter().zip(&table.columns).all(|(v, c)| v.sort == c.sort));
            if seen.insert(row.clone()) {
                table.rows.push(row);
            }
        }
        table
    }

    pub fn columns(&self) -> &[Var] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Var>] {
        &self.rows
    }

    pub fn source_clause(&self) -> usize {
        self.source_clause
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_substitution(&self, row: usize) -> Substitution {
        Substitution::from_pairs(self.columns.iter().cloned().zip(self.rows[row].iter().cloned()))
            .expect("rows are sort-consistent")
    }

    /// Rows as a set of substitutions, convenient for order-free comparison.
    pub fn substitutions(&self) -> BTreeSet<Substitution> {
        (0..self.rows.len()).map(|r| self.row_substitution(r)).collect()
    }
}

/// Formula clauses grouped by clause hash (O1).
#[derive(Clone, Debug, Default)]
pub struct ClauseIndex {
    buckets: HashMap<ClauseHash, Vec<usize>>,
}

impl ClauseIndex {
    pub fn new(clauses: &[Clause]) -> ClauseIndex {
        let mut buckets: HashMap<ClauseHash, Vec<usize>> = HashMap::new();
        for (i, c) in clauses.iter().enumerate() {
            buckets.entry(clause_hash(c)).or_default().push(i);
        }
        ClauseIndex { buckets }
    }

    pub fn bucket(&self, h: ClauseHash) -> &[usize] {
        self.buckets.get(&h).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Whether some clause in the indexed set is alpha-equal to `c`.
    pub fn contains(&self, clauses: &[Clause], c: &Clause) -> bool {
        self.bucket(clause_hash(c)).iter().any(|&i| clauses[i].alpha_eq(c))
    }
}

/// One table per core clause. With an index only same-hash formula clauses
/// are tried; otherwise every formula clause is.
pub fn build_tables(core: &[Clause], formula: &[Clause], index: Option<&ClauseIndex>) -> Result<Vec<SubstitutionTable>, NoMatch> {
    let mut tables = Vec::with_capacity(core.len());
    for (ci, c) in core.iter().enumerate() {
        let columns = c.free_vars().to_vec();
        let row_of = |s: Substitution| columns.iter().map(|v| s.image(v).clone()).collect::<Vec<_>>();
        let rows: Vec<Vec<Var>> = match index {
            Some(idx) => idx.bucket(clause_hash(c)).iter().filter_map(|&fi| unify(c, &formula[fi])).map(row_of).collect(),
            None => formula.iter().filter_map(|f| unify(c, f)).map(row_of).collect(),
        };
        let table = SubstitutionTable::with_rows(columns.clone(), rows, ci);
        if table.is_empty() {
            return Err(NoMatch);
        }
        tables.push(table);
    }
    Ok(tables)
}

/// Admissible images per core variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableDomain {
    pub per_variable: BTreeMap<Var, BTreeSet<Var>>,
}

impl VariableDomain {
    fn of(tables: &[SubstitutionTable]) -> VariableDomain {
        let mut per_variable: BTreeMap<Var, BTreeSet<Var>> = BTreeMap::new();
        for t in tables {
            for (j, col) in t.columns.iter().enumerate() {
                let values: BTreeSet<Var> = t.rows.iter().map(|r| r[j].clone()).collect();
                match per_variable.get_mut(col) {
                    Some(domain) => domain.retain(|v| values.contains(v)),
                    None => {
                        per_variable.insert(col.clone(), values);
                    }
                }
            }
        }
        VariableDomain { per_variable }
    }

    pub fn get(&self, v: &Var) -> Option<&BTreeSet<Var>> {
        self.per_variable.get(v)
    }
}

/// Intersects each variable's values across all tables mentioning it, then
/// drops rows with out-of-domain values, until nothing changes (O2).
pub fn filter_invalid(mut tables: Vec<SubstitutionTable>) -> Result<(Vec<SubstitutionTable>, VariableDomain), NoMatch> {
    loop {
        let domain = VariableDomain::of(&tables);
        if domain.per_variable.values().any(BTreeSet::is_empty) {
            return Err(NoMatch);
        }
        let mut changed = false;
        for t in &mut tables {
            let before = t.rows.len();
            let cols = &t.columns;
            t.rows.retain(|row| row.iter().zip(cols).all(|(v, c)| domain.per_variable[c].contains(v)));
            if t.rows.is_empty() {
                return Err(NoMatch);
            }
            changed |= t.rows.len() != before;
        }
        if !changed {
            return Ok((tables, domain));
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct JoinStats {
    /// Rows accepted as consistent extensions of a partial assignment.
    pub extensions: u64,
    /// Rows attempted (consistent or not).
    pub attempts: u64,
    /// Rows of all intermediate and final tables of a materialized join.
    pub materialized_rows: u64,
}

/// Dense integer view of a table list for the join loops.
struct Interned {
    core_vars: Vec<Var>,
    values: Vec<Var>,
    tables: Vec<DenseTable>,
}

struct DenseTable {
    cols: Vec<u32>,
    cells: Vec<u32>,
}

impl DenseTable {
    fn width(&self) -> usize {
        self.cols.len()
    }

    fn len(&self) -> usize {
        if self.cols.is_empty() {
            // zero-width tables still carry their row count in one cell per row
            self.cells.len()
        } else {
            self.cells.len() / self.cols.len()
        }
    }

    fn row(&self, r: usize) -> &[u32] {
        let w = self.width();
        &self.cells[r * w..(r + 1) * w]
    }
}

impl Interned {
    fn new(tables: &[SubstitutionTable]) -> Interned {
        let mut core_ids: HashMap<&Var, u32> = HashMap::new();
        let mut value_ids: HashMap<&Var, u32> = HashMap::new();
        let mut core_vars = Vec::new();
        let mut values = Vec::new();
        let mut dense = Vec::with_capacity(tables.len());
        for t in tables {
            let cols = t
                .columns
                .iter()
                .map(|c| {
                    *core_ids.entry(c).or_insert_with(|| {
                        core_vars.push(c.clone());
                        core_vars.len() as u32 - 1
                    })
                })
                .collect();
            let mut cells = Vec::with_capacity(t.rows.len() * t.columns.len().max(1));
            for row in &t.rows {
                if row.is_empty() {
                    cells.push(0);
                }
                for v in row {
                    cells.push(*value_ids.entry(v).or_insert_with(|| {
                        values.push(v.clone());
                        values.len() as u32 - 1
                    }));
                }
            }
            dense.push(DenseTable { cols, cells });
        }
        Interned { core_vars, values, tables: dense }
    }
}

const UNSET: u32 = u32::MAX;

struct LazySearch<'a> {
    tables: Vec<&'a DenseTable>,
    assignment: Vec<u32>,
    deadline: Deadline,
    stats: JoinStats,
}

impl LazySearch<'_> {
    fn descend(&mut self, depth: usize) -> Result<bool, Timeout> {
        if depth == self.tables.len() {
            return Ok(true);
        }
        let table = self.tables[depth];
        let mut newly_set = Vec::with_capacity(table.width());
        for r in 0..table.len() {
            self.deadline.check()?;
            self.stats.attempts += 1;
            let consistent = table.width() == 0 || {
                let row = table.row(r);
                table.cols.iter().zip(row).all(|(&c, &v)| {
                    let a = self.assignment[c as usize];
                    a == UNSET || a == v
                })
            };
            if !consistent {
                continue;
            }
            self.stats.extensions += 1;
            if table.width() > 0 {
                for (&c, &v) in table.cols.iter().zip(table.row(r)) {
                    if self.assignment[c as usize] == UNSET {
                        self.assignment[c as usize] = v;
                        newly_set.push(c);
                    }
                }
            }
            if self.descend(depth + 1)? {
                return Ok(true);
            }
            for c in newly_set.drain(..) {
                self.assignment[c as usize] = UNSET;
            }
        }
        Ok(false)
    }
}

/// First complete substitution found by backtracking over the tables in
/// ascending row count (ties by core clause index), or `None` if the
/// natural join is empty (O3).
pub fn join_lazy(tables: &[SubstitutionTable], deadline: Deadline) -> Result<Option<Substitution>, Timeout> {
    join_lazy_counted(tables, deadline).0
}

pub fn join_lazy_counted(tables: &[SubstitutionTable], deadline: Deadline) -> (Result<Option<Substitution>, Timeout>, JoinStats) {
    let interned = Interned::new(tables);
    let mut order: Vec<usize> = (0..tables.len()).collect();
    order.sort_by_key(|&i| (tables[i].len(), tables[i].source_clause));
    let mut search = LazySearch {
        tables: order.iter().map(|&i| &interned.tables[i]).collect(),
        assignment: vec![UNSET; interned.core_vars.len()],
        deadline,
        stats: JoinStats::default(),
    };
    let outcome = search.descend(0).map(|found| {
        found.then(|| {
            let pairs = interned
                .core_vars
                .iter()
                .zip(&search.assignment)
                .map(|(k, &v)| (k.clone(), interned.values[v as usize].clone()));
            Substitution::from_pairs(pairs).expect("rows are sort-consistent")
        })
    });
    (outcome, search.stats)
}

/// Complete natural join of all tables, joined left to right.
pub fn join_full(tables: &[SubstitutionTable]) -> SubstitutionTable {
    join_full_within(tables, Deadline::none()).expect("no deadline and within budget")
}

pub fn join_full_within(tables: &[SubstitutionTable], deadline: Deadline) -> Result<SubstitutionTable, Timeout> {
    join_full_counted(tables, deadline).0
}

pub fn join_full_counted(tables: &[SubstitutionTable], deadline: Deadline) -> (Result<SubstitutionTable, Timeout>, JoinStats) {
    let mut stats = JoinStats::default();
    let Some(first) = tables.first() else {
        return (Ok(SubstitutionTable::new(vec![], 0)), stats);
    };
    let interned = Interned::new(tables);
    // accumulated result: columns are core variable ids, rows stored flat
    let mut cols: Vec<u32> = interned.tables[0].cols.clone();
    let mut rows: Vec<Vec<u32>> = (0..interned.tables[0].len()).map(|r| interned.tables[0].row(r).to_vec()).collect();
    let _ = first;
    for t in &interned.tables[1..] {
        let shared: Vec<(usize, usize)> = t
            .cols
            .iter()
            .enumerate()
            .filter_map(|(j, c)| cols.iter().position(|x| x == c).map(|i| (i, j)))
            .collect();
        let extra: Vec<usize> = (0..t.width()).filter(|j| !shared.iter().any(|(_, s)| s == j)).collect();
        let mut next = Vec::new();
        let mut cells = 0usize;
        for left in &rows {
            for r in 0..t.len() {
                if deadline.expired() || cells > FULL_JOIN_CELL_BUDGET {
                    return (Err(Timeout), stats);
                }
                stats.attempts += 1;
                let right = if t.width() == 0 { &[][..] } else { t.row(r) };
                if shared.iter().all(|&(i, j)| left[i] == right[j]) {
                    let mut row = left.clone();
                    row.extend(extra.iter().map(|&j| right[j]));
                    cells += row.len().max(1);
                    next.push(row);
                }
            }
        }
        cols.extend(extra.iter().map(|&j| t.cols[j]));
        stats.materialized_rows += next.len() as u64;
        rows = next;
    }
    stats.materialized_rows += if tables.len() == 1 { rows.len() as u64 } else { 0 };
    let columns = cols.iter().map(|&c| interned.core_vars[c as usize].clone()).collect();
    let rows = rows.into_iter().map(|r| r.into_iter().map(|v| interned.values[v as usize].clone()).collect());
    (Ok(SubstitutionTable::with_rows(columns, rows, first.source_clause)), stats)
}

/// Reference search: tries every sort-respecting map from the core's free
/// variables to the formula's, in lexicographic order (first core variable
/// most significant, formula variables in first-occurrence order), and
/// returns the first under which every core clause occurs in the formula.
pub fn brute_force_complete(core: &[Clause], formula: &[Clause]) -> Result<Option<Substitution>, SizeGuard> {
    let core_vars = free_vars_of(core);
    let formula_vars = free_vars_of(formula);
    if core_vars.len() > ORACLE_MAX_CORE_VARS || formula_vars.len() > ORACLE_MAX_FORMULA_VARS {
        return Err(SizeGuard {
            core: core_vars.len(),
            formula: formula_vars.len(),
            max_core: ORACLE_MAX_CORE_VARS,
            max_formula: ORACLE_MAX_FORMULA_VARS,
        });
    }
    let choices: Vec<Vec<&Var>> =
        core_vars.iter().map(|cv| formula_vars.iter().filter(|fv| fv.sort == cv.sort).collect()).collect();
    if choices.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let mut digits = vec![0usize; core_vars.len()];
    loop {
        let sigma = Substitution::from_pairs(
            core_vars.iter().zip(&digits).enumerate().map(|(i, (cv, &d))| (cv.clone(), choices[i][d].clone())),
        )
        .expect("choices are sort-filtered");
        let covered = core.iter().all(|c| {
            let image = apply_substitution_avoiding_capture(c, &sigma);
            formula.iter().any(|f| f.alpha_eq(&image))
        });
        if covered {
            return Ok(Some(sigma));
        }
        // odometer step, last variable fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < choices[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}
