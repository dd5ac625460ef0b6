//! Immutable sorted terms for SMT formulae in conjunctive form.
//!
//! Free variables are the 0-ary uninterpreted constants of a query; n-ary
//! uninterpreted functions are fixed symbols compared by name. Terms are
//! reference counted and never mutated after construction, so they can be
//! shared freely between threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, BigUint, Signed};
use thiserror::Error;

pub type Symbol = Arc<str>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("bit-vector width must be at least 1")]
    BadBitVecWidth,
    #[error("floating-point sort needs ebits >= 2 and sbits >= 2, got ({0}, {1})")]
    BadFloatSort(u32, u32),
    #[error("application of `{0}` has no arguments")]
    EmptyApply(Symbol),
    #[error("binder has no bound variables")]
    EmptyBinder,
    #[error("bound variable `{0}` declared twice in one binder")]
    DuplicateBound(Symbol),
    #[error("expected a Bool term, found sort {0}")]
    NotBool(Sort),
    #[error("substitution maps {from} to {to} with a different sort")]
    SortMismatch { from: Var, to: Var },
    #[error("image `{0}` would be captured by an enclosing binder")]
    Capture(Symbol),
    #[error("renaming is not injective: two variables map to `{0}`")]
    NonInjective(Var),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Real,
    BitVec(u32),
    FloatingPoint { ebits: u32, sbits: u32 },
    /// Sort of the rounding-mode constants used by floating-point operators.
    RoundingMode,
    Array(Box<Sort>, Box<Sort>),
    Uninterpreted(Symbol),
}

impl Sort {
    pub fn bitvec(width: u32) -> Result<Sort, TermError> {
        if width == 0 {
            return Err(TermError::BadBitVecWidth);
        }
        Ok(Sort::BitVec(width))
    }

    pub fn floating_point(ebits: u32, sbits: u32) -> Result<Sort, TermError> {
        if ebits < 2 || sbits < 2 {
            return Err(TermError::BadFloatSort(ebits, sbits));
        }
        Ok(Sort::FloatingPoint { ebits, sbits })
    }

    pub fn array(index: Sort, element: Sort) -> Sort {
        Sort::Array(Box::new(index), Box::new(element))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
            Sort::FloatingPoint { ebits, sbits } => write!(f, "(_ FloatingPoint {ebits} {sbits})"),
            Sort::RoundingMode => f.write_str("RoundingMode"),
            Sort::Array(i, e) => write!(f, "(Array {i} {e})"),
            Sort::Uninterpreted(name) => f.write_str(&quote_symbol(name)),
        }
    }
}

/// Interpreted literal values in a canonical encoding, so that derived
/// equality is exact value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Bool(bool),
    Int(BigInt),
    /// Always stored reduced; `BigRational` normalizes on construction.
    Real(BigRational),
    BitVec { width: u32, value: BigUint },
    /// IEEE bit pattern: sign, exponent and trailing significand concatenated.
    Float { ebits: u32, sbits: u32, bits: BigUint },
    RoundingMode(Symbol),
}

impl Literal {
    pub fn sort(&self) -> Sort {
        match self {
            Literal::Bool(_) => Sort::Bool,
            Literal::Int(_) => Sort::Int,
            Literal::Real(_) => Sort::Real,
            Literal::BitVec { width, .. } => Sort::BitVec(*width),
            Literal::Float { ebits, sbits, .. } => Sort::FloatingPoint { ebits: *ebits, sbits: *sbits },
            Literal::RoundingMode(_) => Sort::RoundingMode,
        }
    }

    /// Canonical byte encoding used for hashing.
    pub fn canonical_encoding(&self) -> String {
        match self {
            Literal::Bool(b) => b.to_string(),
            Literal::Int(i) => i.to_string(),
            Literal::Real(r) => format!("{}/{}", r.numer(), r.denom()),
            Literal::BitVec { width, value } => format!("bv{width}:{value}"),
            Literal::Float { ebits, sbits, bits } => format!("fp{ebits}.{sbits}:{bits}"),
            Literal::RoundingMode(m) => format!("rm:{m}"),
        }
    }
}

/// Operator symbol; `interpreted` is false for user-declared functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Op {
    pub name: Symbol,
    pub interpreted: bool,
}

impl Op {
    pub fn builtin(name: &str) -> Op {
        Op { name: name.into(), interpreted: true }
    }

    pub fn uninterpreted(name: &str) -> Op {
        Op { name: name.into(), interpreted: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinderKind {
    Forall,
    Exists,
    Lambda,
}

impl BinderKind {
    pub fn keyword(self) -> &'static str {
        match self {
            BinderKind::Forall => "forall",
            BinderKind::Exists => "exists",
            BinderKind::Lambda => "lambda",
        }
    }
}

/// A sorted variable, identified by name and sort together.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Symbol,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<Symbol>, sort: Sort) -> Var {
        Var { name: name.into(), sort }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&quote_symbol(&self.name))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Const(Literal),
    Var(Var),
    Apply { sort: Sort, op: Op, args: Vec<Term> },
    Binder { kind: BinderKind, bound: Vec<Var>, body: Term },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Arc<TermKind>);

impl Term {
    pub fn constant(value: Literal) -> Term {
        Term(Arc::new(TermKind::Const(value)))
    }

    pub fn int(value: i64) -> Term {
        Term::constant(Literal::Int(value.into()))
    }

    pub fn bool(value: bool) -> Term {
        Term::constant(Literal::Bool(value))
    }

    pub fn var(v: Var) -> Term {
        Term(Arc::new(TermKind::Var(v)))
    }

    pub fn apply(op: Op, sort: Sort, args: Vec<Term>) -> Result<Term, TermError> {
        if args.is_empty() {
            return Err(TermError::EmptyApply(op.name));
        }
        Ok(Term(Arc::new(TermKind::Apply { sort, op, args })))
    }

    /// Shorthand for a Bool-valued builtin application.
    pub fn pred(name: &str, args: Vec<Term>) -> Result<Term, TermError> {
        Term::apply(Op::builtin(name), Sort::Bool, args)
    }

    pub fn binder(kind: BinderKind, bound: Vec<Var>, body: Term) -> Result<Term, TermError> {
        if bound.is_empty() {
            return Err(TermError::EmptyBinder);
        }
        let mut seen = HashSet::new();
        for v in &bound {
            if !seen.insert(v.name.clone()) {
                return Err(TermError::DuplicateBound(v.name.clone()));
            }
        }
        if kind != BinderKind::Lambda && body.sort() != Sort::Bool {
            return Err(TermError::NotBool(body.sort()));
        }
        Ok(Term(Arc::new(TermKind::Binder { kind, bound, body })))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn sort(&self) -> Sort {
        match &*self.0 {
            TermKind::Const(l) => l.sort(),
            TermKind::Var(v) => v.sort.clone(),
            TermKind::Apply { sort, .. } => sort.clone(),
            TermKind::Binder { kind: BinderKind::Lambda, bound, body } => bound
                .iter()
                .rev()
                .fold(body.sort(), |acc, v| Sort::array(v.sort.clone(), acc)),
            TermKind::Binder { .. } => Sort::Bool,
        }
    }

    pub fn is_conjunction(&self) -> bool {
        matches!(&*self.0, TermKind::Apply { op, .. } if op.interpreted && &*op.name == "and")
    }

    /// Equality up to renaming of bound variables. Free variable names,
    /// operators, sorts and constants must match exactly; bound variables
    /// are identified by binder position.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        let mut left = Vec::new();
        let mut right = Vec::new();
        alpha_eq_rec(self, other, &mut left, &mut right)
    }

    /// Number of nodes in the term.
    pub fn size(&self) -> usize {
        match &*self.0 {
            TermKind::Const(_) | TermKind::Var(_) => 1,
            TermKind::Apply { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
            TermKind::Binder { body, .. } => 1 + body.size(),
        }
    }
}

/// Resolves a name against a stack of binder frames, innermost first.
/// Returns (depth from innermost frame, position in frame).
pub(crate) fn lookup_bound(frames: &[&[Var]], name: &str) -> Option<(usize, usize)> {
    frames
        .iter()
        .rev()
        .enumerate()
        .find_map(|(depth, frame)| frame.iter().position(|v| &*v.name == name).map(|pos| (depth, pos)))
}

fn alpha_eq_rec<'a>(a: &'a Term, b: &'a Term, left: &mut Vec<&'a [Var]>, right: &mut Vec<&'a [Var]>) -> bool {
    if Arc::ptr_eq(&a.0, &b.0) && left.is_empty() && right.is_empty() {
        return true;
    }
    match (&*a.0, &*b.0) {
        (TermKind::Const(x), TermKind::Const(y)) => x == y,
        (TermKind::Var(x), TermKind::Var(y)) => {
            if x.sort != y.sort {
                return false;
            }
            match (lookup_bound(left, &x.name), lookup_bound(right, &y.name)) {
                (Some(p), Some(q)) => p == q,
                (None, None) => x.name == y.name,
                _ => false,
            }
        }
        (
            TermKind::Apply { sort: s1, op: o1, args: a1 },
            TermKind::Apply { sort: s2, op: o2, args: a2 },
        ) => {
            s1 == s2
                && o1 == o2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| alpha_eq_rec(x, y, left, right))
        }
        (
            TermKind::Binder { kind: k1, bound: b1, body: t1 },
            TermKind::Binder { kind: k2, bound: b2, body: t2 },
        ) => {
            if k1 != k2 || b1.len() != b2.len() || b1.iter().zip(b2).any(|(x, y)| x.sort != y.sort) {
                return false;
            }
            left.push(b1);
            right.push(b2);
            let eq = alpha_eq_rec(t1, t2, left, right);
            left.pop();
            right.pop();
            eq
        }
        _ => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            TermKind::Const(l) => write_literal(f, l),
            TermKind::Var(v) => write!(f, "{v}"),
            TermKind::Apply { op, args, .. } => {
                // indexed and qualified operators are stored in printed form
                let name = if op.interpreted && op.name.starts_with('(') {
                    op.name.to_string()
                } else {
                    quote_symbol(&op.name)
                };
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            TermKind::Binder { kind, bound, body } => {
                write!(f, "({} (", kind.keyword())?;
                for (i, v) in bound.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({v} {})", v.sort)?;
                }
                write!(f, ") {body})")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, l: &Literal) -> fmt::Result {
    match l {
        Literal::Bool(b) => write!(f, "{b}"),
        Literal::Int(i) if i.is_negative() => write!(f, "(- {})", i.abs()),
        Literal::Int(i) => write!(f, "{i}"),
        Literal::Real(r) => {
            let neg = r.is_negative();
            let r = r.abs();
            let body = if r.denom() == &BigInt::from(1) {
                format!("{}.0", r.numer())
            } else {
                format!("(/ {}.0 {}.0)", r.numer(), r.denom())
            };
            if neg {
                write!(f, "(- {body})")
            } else {
                f.write_str(&body)
            }
        }
        Literal::BitVec { width, value } => write!(f, "(_ bv{value} {width})"),
        Literal::Float { ebits, sbits, bits } => {
            let total = (ebits + sbits) as usize;
            let s = format!("{:0>width$}", bits.to_str_radix(2), width = total);
            let (sign, rest) = s.split_at(1);
            let (exp, sig) = rest.split_at(*ebits as usize);
            if sig.is_empty() {
                // sbits >= 2 guarantees a non-empty significand
                unreachable!("float literal without significand bits");
            }
            write!(f, "(fp #b{sign} #b{exp} #b{sig})")
        }
        Literal::RoundingMode(m) => f.write_str(m),
    }
}

const RESERVED: &[&str] = &[
    "!", "_", "as", "let", "exists", "forall", "match", "par", "lambda", "BINARY", "DECIMAL", "HEXADECIMAL",
    "NUMERAL", "STRING",
];

pub(crate) fn is_simple_symbol(s: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || EXTRA.contains(c) => {}
        _ => return false,
    }
    s.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c)) && !RESERVED.contains(&s)
}

pub(crate) fn quote_symbol(s: &str) -> String {
    if is_simple_symbol(s) {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

/// Free variables of a term in first-occurrence order (left to right,
/// depth first), honouring binder shadowing.
pub fn free_variables(t: &Term) -> Vec<Var> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut frames: Vec<&[Var]> = Vec::new();
    collect_free(t, &mut frames, &mut seen, &mut out);
    out
}

fn collect_free<'a>(t: &'a Term, frames: &mut Vec<&'a [Var]>, seen: &mut HashSet<Var>, out: &mut Vec<Var>) {
    match t.kind() {
        TermKind::Const(_) => {}
        TermKind::Var(v) => {
            if lookup_bound(frames, &v.name).is_none() && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        TermKind::Apply { args, .. } => {
            for a in args {
                collect_free(a, frames, seen, out);
            }
        }
        TermKind::Binder { bound, body, .. } => {
            frames.push(bound);
            collect_free(body, frames, seen, out);
            frames.pop();
        }
    }
}

/// One top-level conjunct of a formula, with its free variables cached.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    term: Term,
    free_vars: Vec<Var>,
}

impl Clause {
    pub fn new(term: Term) -> Result<Clause, TermError> {
        let sort = term.sort();
        if sort != Sort::Bool {
            return Err(TermError::NotBool(sort));
        }
        let free_vars = free_variables(&term);
        Ok(Clause { term, free_vars })
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn free_vars(&self) -> &[Var] {
        &self.free_vars
    }

    pub fn alpha_eq(&self, other: &Clause) -> bool {
        self.term.alpha_eq(&other.term)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.term, f)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.term, f)
    }
}

/// Where a formula came from: a suite-relative file path and the formula's
/// index within that file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Origin {
    pub path: String,
    pub index: usize,
}

impl Origin {
    pub fn new(path: impl Into<String>) -> Origin {
        Origin { path: path.into(), index: 0 }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.path, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub clauses: Vec<Clause>,
    /// Assertion name each clause came from, parallel to `clauses`.
    pub provenance: Vec<Option<Symbol>>,
    pub origin: Origin,
}

impl Formula {
    pub fn new(clauses: Vec<Clause>, origin: Origin) -> Formula {
        let provenance = vec![None; clauses.len()];
        Formula { clauses, provenance, origin }
    }

    /// Builds a formula from Bool terms, flattening top-level conjunctions.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>, origin: Origin) -> Result<Formula, TermError> {
        let mut clauses = Vec::new();
        for t in terms {
            clauses.extend(flatten_conjunction(&t)?);
        }
        Ok(Formula::new(clauses, origin))
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Free variables across all clauses, first-occurrence order.
    pub fn free_vars(&self) -> Vec<Var> {
        free_vars_of(&self.clauses)
    }

    /// Sub-formula made of the clauses at `indices`, same origin.
    pub fn select(&self, indices: &[usize]) -> Formula {
        Formula {
            clauses: indices.iter().map(|&i| self.clauses[i].clone()).collect(),
            provenance: indices.iter().map(|&i| self.provenance[i].clone()).collect(),
            origin: self.origin.clone(),
        }
    }
}

pub fn free_vars_of(clauses: &[Clause]) -> Vec<Var> {
    let mut seen = HashSet::new();
    clauses
        .iter()
        .flat_map(|c| c.free_vars())
        .filter(|v| seen.insert((*v).clone()))
        .cloned()
        .collect()
}

/// Sort-preserving variable-to-variable mapping. Images need not be distinct.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<Var, Var>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Var)>) -> Result<Substitution, TermError> {
        let mut s = Substitution::new();
        for (from, to) in pairs {
            s.insert(from, to)?;
        }
        Ok(s)
    }

    /// Binds `from` to `to`, replacing any previous image.
    pub fn insert(&mut self, from: Var, to: Var) -> Result<(), TermError> {
        if from.sort != to.sort {
            return Err(TermError::SortMismatch { from, to });
        }
        self.map.insert(from, to);
        Ok(())
    }

    pub fn get(&self, v: &Var) -> Option<&Var> {
        self.map.get(v)
    }

    /// Image of `v`, or `v` itself when unmapped.
    pub fn image<'a>(&'a self, v: &'a Var) -> &'a Var {
        self.map.get(v).unwrap_or(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Var)> {
        self.map.iter()
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Var> =
            self.map.iter().map(|(k, v)| (k.clone(), other.image(v).clone())).collect();
        for (k, v) in &other.map {
            map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution { map }
    }

    /// Inverse of an injective substitution; `None` when two keys share an image.
    pub fn inverse(&self) -> Option<Substitution> {
        let mut map = BTreeMap::new();
        for (k, v) in &self.map {
            if map.insert(v.clone(), k.clone()).is_some() {
                return None;
            }
        }
        Some(Substitution { map })
    }

    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution { map: self.map.iter().filter(|(k, _)| vars.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} ↦ {}", k.name, v.name)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Splits nested top-level `and` applications into their conjuncts, left to right.
pub fn flatten_conjunction(root: &Term) -> Result<Vec<Clause>, TermError> {
    let sort = root.sort();
    if sort != Sort::Bool {
        return Err(TermError::NotBool(sort));
    }
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        match t.kind() {
            TermKind::Apply { args, .. } if t.is_conjunction() => stack.extend(args.iter().rev()),
            _ => out.push(Clause::new(t.clone())?),
        }
    }
    Ok(out)
}

/// Replaces free variables by their images. Fails with [`TermError::Capture`]
/// when an image would fall under a binder of the same name.
pub fn apply_substitution(c: &Clause, s: &Substitution) -> Result<Clause, TermError> {
    if s.is_empty() {
        return Ok(c.clone());
    }
    let term = substitute(c.term(), s, &mut Vec::new())?;
    Clause::new(term)
}

fn substitute<'a>(t: &'a Term, s: &Substitution, frames: &mut Vec<&'a [Var]>) -> Result<Term, TermError> {
    match t.kind() {
        TermKind::Const(_) => Ok(t.clone()),
        TermKind::Var(v) => {
            if lookup_bound(frames, &v.name).is_some() {
                return Ok(t.clone());
            }
            match s.get(v) {
                None => Ok(t.clone()),
                Some(img) => {
                    if lookup_bound(frames, &img.name).is_some() {
                        return Err(TermError::Capture(img.name.clone()));
                    }
                    Ok(Term::var(img.clone()))
                }
            }
        }
        TermKind::Apply { sort, op, args } => {
            let args = args.iter().map(|a| substitute(a, s, frames)).collect::<Result<Vec<_>, _>>()?;
            Term::apply(op.clone(), sort.clone(), args)
        }
        TermKind::Binder { kind, bound, body } => {
            frames.push(bound);
            let body = substitute(body, s, frames);
            frames.pop();
            Term::binder(*kind, bound.clone(), body?)
        }
    }
}

/// Like [`apply_substitution`], but renames bound variables whose names
/// clash with an image, so it never fails.
pub fn apply_substitution_avoiding_capture(c: &Clause, s: &Substitution) -> Clause {
    match apply_substitution(c, s) {
        Ok(done) => done,
        Err(_) => {
            let mut taken: HashSet<Symbol> = s.iter().map(|(_, v)| v.name.clone()).collect();
            taken.extend(c.free_vars().iter().map(|v| v.name.clone()));
            let fresh = freshen_bound(c.term(), &taken, &mut HashMap::new(), &mut 0);
            let clause = Clause::new(fresh).expect("renaming bound variables keeps the sort");
            apply_substitution(&clause, s).expect("bound names are disjoint from images after freshening")
        }
    }
}

fn freshen_bound(t: &Term, taken: &HashSet<Symbol>, env: &mut HashMap<Symbol, Vec<Symbol>>, counter: &mut usize) -> Term {
    match t.kind() {
        TermKind::Const(_) => t.clone(),
        TermKind::Var(v) => match env.get(&v.name).and_then(|stack| stack.last()) {
            Some(new) => Term::var(Var::new(new.clone(), v.sort.clone())),
            None => t.clone(),
        },
        TermKind::Apply { sort, op, args } => {
            let args = args.iter().map(|a| freshen_bound(a, taken, env, counter)).collect();
            Term::apply(op.clone(), sort.clone(), args).expect("arity unchanged")
        }
        TermKind::Binder { kind, bound, body } => {
            let mut renamed = Vec::with_capacity(bound.len());
            for v in bound {
                let name = if taken.contains(&v.name) {
                    loop {
                        *counter += 1;
                        let candidate: Symbol = format!("{}!{}", v.name, counter).into();
                        if !taken.contains(&candidate) {
                            break candidate;
                        }
                    }
                } else {
                    v.name.clone()
                };
                env.entry(v.name.clone()).or_default().push(name.clone());
                renamed.push(Var::new(name, v.sort.clone()));
            }
            let body = freshen_bound(body, taken, env, counter);
            for v in bound {
                env.get_mut(&v.name).and_then(|s| s.pop());
            }
            Term::binder(*kind, renamed, body).expect("binder shape unchanged")
        }
    }
}

/// Renames free variables by an injective, sort-preserving map.
pub fn alpha_rename_free(c: &Clause, bijection: &Substitution) -> Result<Clause, TermError> {
    let mut images = HashSet::new();
    for v in c.free_vars() {
        if !images.insert(bijection.image(v).clone()) {
            return Err(TermError::NonInjective(bijection.image(v).clone()));
        }
    }
    apply_substitution(c, bijection)
}
