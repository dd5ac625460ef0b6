//! Structural, variable-name-blind clause hashes, formula hash footprints
//! and their fixed-width Bloom bitset projection.
//!
//! A variable hashes to its sort alone, so any renaming of free or bound
//! variables leaves a clause hash unchanged. Collisions are harmless: every
//! candidate that survives selection is verified by unification.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::term::{Clause, Literal, Sort, Term, TermKind};

/// Default Bloom width.
pub const DEFAULT_BLOOM_BITS: usize = 1024;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseHash(pub u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("bloom widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Order-sensitive mixing of two hashes (64-bit golden-ratio hash-combine).
pub fn combine(h1: ClauseHash, h2: ClauseHash) -> ClauseHash {
    let (a, b) = (h1.0, h2.0);
    ClauseHash(a ^ b.wrapping_add(GOLDEN).wrapping_add(a << 6).wrapping_add(a >> 2))
}

fn sort_hash(s: &Sort) -> ClauseHash {
    ClauseHash(fnv1a(s.to_string().as_bytes()))
}

fn value_hash(l: &Literal) -> ClauseHash {
    ClauseHash(fnv1a(l.canonical_encoding().as_bytes()))
}

fn node_header(sort: &Sort, op: &str, arity: usize) -> ClauseHash {
    let op = ClauseHash(fnv1a(op.as_bytes()));
    let arity = ClauseHash(fnv1a(&(arity as u64).to_le_bytes()));
    combine(combine(sort_hash(sort), op), arity)
}

pub fn compute_ast_hash(t: &Term) -> ClauseHash {
    match t.kind() {
        TermKind::Const(l) => combine(sort_hash(&l.sort()), value_hash(l)),
        TermKind::Var(v) => sort_hash(&v.sort),
        TermKind::Apply { sort, op, args } => args
            .iter()
            .fold(node_header(sort, &op.name, args.len()), |h, a| combine(h, compute_ast_hash(a))),
        TermKind::Binder { kind, bound, body } => {
            combine(node_header(&t.sort(), kind.keyword(), bound.len()), compute_ast_hash(body))
        }
    }
}

pub fn clause_hash(c: &Clause) -> ClauseHash {
    compute_ast_hash(c.term())
}

/// Set of clause hashes of a formula (or core).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HashFootprint {
    hashes: BTreeSet<ClauseHash>,
}

impl HashFootprint {
    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn contains(&self, h: ClauseHash) -> bool {
        self.hashes.contains(&h)
    }

    pub fn is_subset(&self, other: &HashFootprint) -> bool {
        self.hashes.is_subset(&other.hashes)
    }

    pub fn iter(&self) -> impl Iterator<Item = ClauseHash> + '_ {
        self.hashes.iter().copied()
    }
}

impl FromIterator<ClauseHash> for HashFootprint {
    fn from_iter<I: IntoIterator<Item = ClauseHash>>(iter: I) -> Self {
        HashFootprint { hashes: iter.into_iter().collect() }
    }
}

pub fn compute_formula_hash_footprint(clauses: &[Clause]) -> HashFootprint {
    clauses.iter().map(clause_hash).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BloomBits {
    width: usize,
    words: Vec<u64>,
}

impl BloomBits {
    pub fn empty(width: usize) -> BloomBits {
        assert!(width >= 1, "bloom width must be positive");
        BloomBits { width, words: vec![0; width.div_ceil(64)] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, h: ClauseHash) {
        let idx = (h.0 % self.width as u64) as usize;
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn get(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

pub fn to_bloom_bits(fp: &HashFootprint, width: usize) -> BloomBits {
    let mut bits = BloomBits::empty(width);
    for h in fp.iter() {
        bits.set(h);
    }
    bits
}

/// `true` iff every bit of `core` is also set in `formula`.
pub fn bloom_subset(core: &BloomBits, formula: &BloomBits) -> Result<bool, FingerprintError> {
    if core.width != formula.width {
        return Err(FingerprintError::WidthMismatch(core.width, formula.width));
    }
    Ok(core.words.iter().zip(&formula.words).all(|(c, f)| c & !f == 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{BinderKind, Var};

    fn v(name: &str) -> Term {
        Term::var(Var::new(name, Sort::Int))
    }

    fn gt(a: &str, b: &str) -> Term {
        Term::pred(">", vec![v(a), v(b)]).unwrap()
    }

    fn clause(t: Term) -> Clause {
        Clause::new(t).unwrap()
    }

    // Independent re-statement of the published mixing formulas, evaluated
    // with u128 arithmetic reduced mod 2^64.
    fn reference_fnv(bytes: &[u8]) -> u64 {
        let mut h: u128 = 14695981039346656037;
        for &b in bytes {
            h ^= b as u128;
            h = (h * 1099511628211) % (1u128 << 64);
        }
        h as u64
    }

    fn reference_combine(a: u64, b: u64) -> u64 {
        let sum = (b as u128 + 0x9E3779B97F4A7C15u128 + ((a as u128) << 6) + (a as u128 >> 2)) % (1u128 << 64);
        a ^ sum as u64
    }

    #[test]
    fn matches_reference_formulas() {
        assert_eq!(fnv1a(b"Int"), reference_fnv(b"Int"));
        assert_eq!(combine(ClauseHash(1), ClauseHash(2)).0, reference_combine(1, 2));
        assert_eq!(combine(ClauseHash(u64::MAX), ClauseHash(7)).0, reference_combine(u64::MAX, 7));
    }

    #[test]
    fn combine_is_order_sensitive() {
        let ab = reference_combine(1, 2);
        let ba = reference_combine(2, 1);
        assert_ne!(ab, ba);
        assert_eq!(combine(ClauseHash(1), ClauseHash(2)).0, ab);
        assert_eq!(combine(ClauseHash(2), ClauseHash(1)).0, ba);
        assert_eq!(combine(ClauseHash(1), ClauseHash(2)), combine(ClauseHash(1), ClauseHash(2)));
    }

    #[test]
    fn constants_hash_by_value() {
        let sort = reference_fnv(b"Int");
        let five = reference_combine(sort, reference_fnv(b"5"));
        let six = reference_combine(sort, reference_fnv(b"6"));
        assert_ne!(five, six);
        assert_eq!(compute_ast_hash(&Term::int(5)).0, five);
        assert_eq!(compute_ast_hash(&Term::int(6)).0, six);
    }

    #[test]
    fn names_are_ignored() {
        assert_eq!(compute_ast_hash(&v("x")), compute_ast_hash(&v("y")));
        assert_eq!(compute_ast_hash(&v("x")).0, reference_fnv(b"Int"));
        assert_eq!(compute_ast_hash(&gt("x", "y")), compute_ast_hash(&gt("b", "c")));
        // name-blind hashing cannot tell x>y from y>x
        assert_eq!(compute_ast_hash(&gt("x", "y")), compute_ast_hash(&gt("y", "x")));
        assert_ne!(compute_ast_hash(&gt("x", "y")), compute_ast_hash(&Term::pred("<", vec![v("x"), v("y")]).unwrap()));
    }

    #[test]
    fn apply_hash_follows_header_then_children() {
        let header = reference_combine(
            reference_combine(reference_fnv(b"Bool"), reference_fnv(b">")),
            reference_fnv(&2u64.to_le_bytes()),
        );
        let child = reference_fnv(b"Int");
        let expected = reference_combine(reference_combine(header, child), child);
        assert_eq!(compute_ast_hash(&gt("x", "y")).0, expected);
    }

    #[test]
    fn bound_renaming_is_invisible() {
        let q = |u: &str, x: &str| {
            Term::binder(BinderKind::Forall, vec![Var::new(u, Sort::Int)], gt(u, x)).unwrap()
        };
        assert_eq!(compute_ast_hash(&q("u", "x")), compute_ast_hash(&q("w", "z")));
        let e = Term::binder(BinderKind::Exists, vec![Var::new("u", Sort::Int)], gt("u", "x")).unwrap();
        assert_ne!(compute_ast_hash(&q("u", "x")), compute_ast_hash(&e));
    }

    #[test]
    fn footprints() {
        let triangle = [clause(gt("x", "y")), clause(gt("y", "z")), clause(gt("z", "x"))];
        let tail_cycle = [clause(gt("a", "b")), clause(gt("b", "c")), clause(gt("c", "d")), clause(gt("d", "b"))];
        let fp1 = compute_formula_hash_footprint(&triangle);
        assert_eq!(fp1.len(), 1);
        assert!(fp1.is_subset(&compute_formula_hash_footprint(&tail_cycle)));
        let eq0 = Term::pred("=", vec![v("x"), Term::int(0)]).unwrap();
        assert_eq!(compute_formula_hash_footprint(&[clause(gt("x", "y")), clause(eq0)]).len(), 2);
    }

    #[test]
    fn bloom_projection() {
        assert_eq!(to_bloom_bits(&HashFootprint::default(), 1024).count_ones(), 0);
        let one: HashFootprint = [ClauseHash(5000)].into_iter().collect();
        let bits = to_bloom_bits(&one, 1024);
        assert_eq!(bits.count_ones(), 1);
        assert!(bits.get(5000 % 1024));
        let congruent: HashFootprint = [ClauseHash(3), ClauseHash(3 + 1024)].into_iter().collect();
        assert_eq!(to_bloom_bits(&congruent, 1024).count_ones(), 1);
        let odd_width = to_bloom_bits(&congruent, 100);
        assert_eq!(odd_width.count_ones(), 2);
        assert!(odd_width.get(3) && odd_width.get(27));
    }

    #[test]
    fn subset_queries() {
        let zero = BloomBits::empty(1024);
        let some = to_bloom_bits(&[ClauseHash(1), ClauseHash(2)].into_iter().collect(), 1024);
        assert_eq!(bloom_subset(&zero, &some), Ok(true));
        assert_eq!(bloom_subset(&zero, &zero), Ok(true));
        assert_eq!(bloom_subset(&some, &zero), Ok(false));
        let triangle = [clause(gt("x", "y")), clause(gt("y", "z")), clause(gt("z", "x"))];
        let tail_cycle = [clause(gt("a", "b")), clause(gt("b", "c")), clause(gt("c", "d")), clause(gt("d", "b"))];
        let b1 = to_bloom_bits(&compute_formula_hash_footprint(&triangle), 1024);
        let b3 = to_bloom_bits(&compute_formula_hash_footprint(&tail_cycle), 1024);
        assert_eq!(bloom_subset(&b1, &b3), Ok(true));
        assert_eq!(bloom_subset(&zero, &BloomBits::empty(64)), Err(FingerprintError::WidthMismatch(1024, 64)));
    }
}
