//! Random clause, renaming and embedding generators shared by integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use unsat_cache::term::{
    apply_substitution_avoiding_capture, free_vars_of, BinderKind, Clause, Op, Sort, Substitution, Term, TermKind, Var,
};

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int(name: &str) -> Var {
    Var::new(name, Sort::Int)
}

pub fn vars(prefix: &str, n: usize) -> Vec<Var> {
    (0..n).map(|i| int(&format!("{prefix}{i}"))).collect()
}

/// Random Bool terms over a pool of free Int variables; bound names come
/// from `b0..b2` and may shadow each other.
pub struct TermGen<'a> {
    pub free: &'a [Var],
    pub max_depth: usize,
    pub binders: bool,
}

impl TermGen<'_> {
    fn int_term(&self, r: &mut Rng8, depth: usize, bound: &[Var]) -> Term {
        let leaf = depth + 1 >= self.max_depth || r.gen_bool(0.6);
        if leaf {
            let roll = r.gen_range(0..10);
            if roll < 2 {
                return Term::int(r.gen_range(0..3));
            }
            if roll < 5 && !bound.is_empty() {
                return Term::var(bound.choose(r).unwrap().clone());
            }
            return Term::var(self.free.choose(r).unwrap().clone());
        }
        let a = self.int_term(r, depth + 1, bound);
        if r.gen_bool(0.5) {
            let b = self.int_term(r, depth + 1, bound);
            Term::apply(Op::builtin("+"), Sort::Int, vec![a, b]).unwrap()
        } else {
            Term::apply(Op::uninterpreted("f"), Sort::Int, vec![a]).unwrap()
        }
    }

    pub fn bool_term(&self, r: &mut Rng8, depth: usize, bound: &[Var]) -> Term {
        let atom = depth + 2 >= self.max_depth || r.gen_bool(0.45);
        if atom {
            let op = [">", "=", ">="].choose(r).unwrap();
            let a = self.int_term(r, depth + 1, bound);
            let b = self.int_term(r, depth + 1, bound);
            return Term::pred(op, vec![a, b]).unwrap();
        }
        match r.gen_range(0..4) {
            0 => Term::pred("not", vec![self.bool_term(r, depth + 1, bound)]).unwrap(),
            1 => {
                let op = ["and", "or", "=>"].choose(r).unwrap();
                let a = self.bool_term(r, depth + 1, bound);
                let b = self.bool_term(r, depth + 1, bound);
                Term::pred(op, vec![a, b]).unwrap()
            }
            _ if self.binders => {
                let n = r.gen_range(1..=2);
                let mut names: Vec<usize> = (0..3).collect();
                names.shuffle(r);
                let new: Vec<Var> = names[..n].iter().map(|i| int(&format!("b{i}"))).collect();
                let mut inner: Vec<Var> = bound.iter().filter(|v| !new.contains(v)).cloned().collect();
                inner.extend(new.iter().cloned());
                let kind = if r.gen_bool(0.5) { BinderKind::Forall } else { BinderKind::Exists };
                Term::binder(kind, new, self.bool_term(r, depth + 1, &inner)).unwrap()
            }
            _ => Term::pred("not", vec![self.bool_term(r, depth + 1, bound)]).unwrap(),
        }
    }

    pub fn clause(&self, r: &mut Rng8) -> Clause {
        Clause::new(self.bool_term(r, 0, &[])).unwrap()
    }
}

pub fn depth(t: &Term) -> usize {
    match t.kind() {
        TermKind::Const(_) | TermKind::Var(_) => 1,
        TermKind::Apply { args, .. } => 1 + args.iter().map(depth).max().unwrap_or(0),
        TermKind::Binder { body, .. } => 1 + depth(body),
    }
}

/// Renames every bound variable to a fresh `q<n>`, leaving free names alone.
pub fn rename_bound(t: &Term, env: &mut HashMap<String, Vec<String>>, counter: &mut usize) -> Term {
    match t.kind() {
        TermKind::Const(_) => t.clone(),
        TermKind::Var(v) => match env.get(&*v.name).and_then(|s| s.last()) {
            Some(n) => Term::var(Var::new(n.as_str(), v.sort.clone())),
            None => t.clone(),
        },
        TermKind::Apply { sort, op, args } => {
            let args = args.iter().map(|a| rename_bound(a, env, counter)).collect();
            Term::apply(op.clone(), sort.clone(), args).unwrap()
        }
        TermKind::Binder { kind, bound, body } => {
            let mut fresh = Vec::new();
            for v in bound {
                *counter += 1;
                let n = format!("q{counter}");
                env.entry(v.name.to_string()).or_default().push(n.clone());
                fresh.push(Var::new(n.as_str(), v.sort.clone()));
            }
            let body = rename_bound(body, env, counter);
            for v in bound {
                env.get_mut(&*v.name).unwrap().pop();
            }
            Term::binder(*kind, fresh, body).unwrap()
        }
    }
}

/// Random sort-preserving bijection on the clause's free variables: either
/// a permutation of the variables themselves or a map onto fresh `r<i>` names.
pub fn random_bijection(r: &mut Rng8, free: &[Var]) -> Substitution {
    let mut images: Vec<Var> = if r.gen_bool(0.5) {
        free.to_vec()
    } else {
        (0..free.len()).map(|i| int(&format!("r{i}"))).collect()
    };
    images.shuffle(r);
    Substitution::from_pairs(free.iter().cloned().zip(images)).unwrap()
}

/// Random (possibly non-injective) map from `from` into `to`.
pub fn random_map(r: &mut Rng8, from: &[Var], to: &[Var]) -> Substitution {
    Substitution::from_pairs(from.iter().map(|v| (v.clone(), to.choose(r).unwrap().clone()))).unwrap()
}

/// A formula containing `sigma(core)` among `noise` extra clauses, shuffled.
pub fn embed(r: &mut Rng8, core: &[Clause], sigma: &Substitution, noise: Vec<Clause>) -> Vec<Clause> {
    let mut out: Vec<Clause> = core.iter().map(|c| apply_substitution_avoiding_capture(c, sigma)).collect();
    out.extend(noise);
    out.shuffle(r);
    out
}

/// Core and formula for join-versus-oracle comparisons, within the oracle's
/// size limits. Roughly half the formulae embed the core.
pub fn join_instance(r: &mut Rng8) -> (Vec<Clause>, Vec<Clause>) {
    let core_pool = vars("x", r.gen_range(2..=4));
    let formula_pool = vars("a", r.gen_range(2..=5));
    let gen_core = TermGen { free: &core_pool, max_depth: 3, binders: r.gen_bool(0.3) };
    let core: Vec<Clause> = (0..r.gen_range(1..=4)).map(|_| gen_core.clause(r)).collect();
    let gen_formula = TermGen { free: &formula_pool, max_depth: 3, binders: gen_core.binders };
    let noise: Vec<Clause> = (0..r.gen_range(0..=4)).map(|_| gen_formula.clause(r)).collect();
    let core_vars = free_vars_of(&core);
    let sigma = random_map(r, &core_vars, &formula_pool);
    let mut formula = embed(r, &core, &sigma, noise);
    if r.gen_bool(0.5) && formula.len() > 1 {
        formula.remove(r.gen_range(0..formula.len()));
    }
    (core, formula)
}
