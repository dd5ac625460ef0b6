//! Variable-to-variable unification of a core clause against a formula clause.

use crate::term::{lookup_bound, Clause, Substitution, Term, TermKind, Var};

/// Bindings built during one traversal. Bound variables of the two sides
/// are tracked as binder frames and matched by position, so they never
/// enter `current`.
#[derive(Default)]
struct UnifyScope<'a> {
    current: Vec<(&'a Var, &'a Var)>,
    core_frames: Vec<&'a [Var]>,
    formula_frames: Vec<&'a [Var]>,
}

impl<'a> UnifyScope<'a> {
    fn bind_or_check(&mut self, from: &'a Var, to: &'a Var) -> bool {
        match self.current.iter().find(|(k, _)| *k == from) {
            Some((_, image)) => *image == to,
            None => {
                self.current.push((from, to));
                true
            }
        }
    }

    fn walk(&mut self, core: &'a Term, formula: &'a Term) -> bool {
        match (core.kind(), formula.kind()) {
            (TermKind::Const(a), TermKind::Const(b)) => a == b,
            (TermKind::Var(x), TermKind::Var(y)) => {
                if x.sort != y.sort {
                    return false;
                }
                match (lookup_bound(&self.core_frames, &x.name), lookup_bound(&self.formula_frames, &y.name)) {
                    (Some(p), Some(q)) => p == q,
                    (None, None) => self.bind_or_check(x, y),
                    _ => false,
                }
            }
            (
                TermKind::Apply { sort: s1, op: o1, args: a1 },
                TermKind::Apply { sort: s2, op: o2, args: a2 },
            ) => {
                s1 == s2 && o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| self.walk(x, y))
            }
            (
                TermKind::Binder { kind: k1, bound: b1, body: t1 },
                TermKind::Binder { kind: k2, bound: b2, body: t2 },
            ) => {
                if k1 != k2 || b1.len() != b2.len() || b1.iter().zip(b2).any(|(x, y)| x.sort != y.sort) {
                    return false;
                }
                self.core_frames.push(b1);
                self.formula_frames.push(b2);
                let ok = self.walk(t1, t2);
                self.core_frames.pop();
                self.formula_frames.pop();
                ok
            }
            _ => false,
        }
    }
}

/// The substitution `s` over the free variables of `core` such that
/// `s(core)` equals `formula` up to bound-variable names, if one exists.
pub fn unify(core: &Clause, formula: &Clause) -> Option<Substitution> {
    let mut scope = UnifyScope::default();
    if !scope.walk(core.term(), formula.term()) {
        return None;
    }
    let pairs = scope.current.into_iter().map(|(k, v)| (k.clone(), v.clone()));
    Some(Substitution::from_pairs(pairs).expect("unification only pairs variables of equal sort"))
}

/// Every successful unification of `core` against `candidates`, in candidate order.
pub fn unify_many(core: &Clause, candidates: &[Clause]) -> Vec<(usize, Substitution)> {
    candidates.iter().enumerate().filter_map(|(i, c)| unify(core, c).map(|s| (i, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{apply_substitution_avoiding_capture, BinderKind, Op, Sort};

    fn int(name: &str) -> Var {
        Var::new(name, Sort::Int)
    }

    fn gt_t(a: Term, b: Term) -> Term {
        Term::pred(">", vec![a, b]).unwrap()
    }

    fn gt(a: &str, b: &str) -> Clause {
        Clause::new(gt_t(Term::var(int(a)), Term::var(int(b)))).unwrap()
    }

    fn subst(pairs: &[(&str, &str)]) -> Substitution {
        Substitution::from_pairs(pairs.iter().map(|(a, b)| (int(a), int(b)))).unwrap()
    }

    fn forall(v: &str, body: Term) -> Clause {
        Clause::new(Term::binder(BinderKind::Forall, vec![int(v)], body).unwrap()).unwrap()
    }

    fn assert_sound(core: &Clause, formula: &Clause) {
        let s = unify(core, formula).expect("unifiable");
        assert!(apply_substitution_avoiding_capture(core, &s).alpha_eq(formula));
    }

    #[test]
    fn table_one_entries() {
        assert_eq!(unify(&gt("x", "y"), &gt("a", "b")), Some(subst(&[("x", "a"), ("y", "b")])));
        assert_eq!(unify(&gt("z", "x"), &gt("b", "c")), Some(subst(&[("z", "b"), ("x", "c")])));
        assert_sound(&gt("x", "y"), &gt("a", "b"));
    }

    #[test]
    fn conflicting_rebinding_fails() {
        assert_eq!(unify(&gt("x", "x"), &gt("a", "b")), None);
        // non-injective direction is allowed
        assert_eq!(unify(&gt("x", "y"), &gt("a", "a")), Some(subst(&[("x", "a"), ("y", "a")])));
    }

    #[test]
    fn shape_mismatch_fails() {
        let plus = Term::apply(Op::builtin("+"), Sort::Int, vec![Term::var(int("x")), Term::int(1)]).unwrap();
        let formula = Clause::new(gt_t(plus, Term::var(int("y")))).unwrap();
        assert_eq!(unify(&gt("x", "y"), &formula), None);
        let lt = Clause::new(Term::pred("<", vec![Term::var(int("y")), Term::var(int("x"))]).unwrap()).unwrap();
        assert_eq!(unify(&gt("x", "y"), &lt), None);
    }

    #[test]
    fn constants_must_match() {
        let c = |n| Clause::new(gt_t(Term::var(int("x")), Term::int(n))).unwrap();
        assert_eq!(unify(&c(1), &c(1)), Some(subst(&[("x", "x")])));
        assert_eq!(unify(&c(1), &c(2)), None);
    }

    #[test]
    fn sorts_must_match() {
        let r = Clause::new(gt_t(Term::var(Var::new("a", Sort::Real)), Term::var(Var::new("b", Sort::Real)))).unwrap();
        assert_eq!(unify(&gt("x", "y"), &r), None);
    }

    #[test]
    fn binder_correspondence_is_discarded() {
        let core = forall("u", gt_t(Term::var(int("u")), Term::var(int("x"))));
        let formula = forall("v", gt_t(Term::var(int("v")), Term::var(int("y"))));
        assert_eq!(unify(&core, &formula), Some(subst(&[("x", "y")])));
        assert_sound(&core, &formula);
    }

    #[test]
    fn bound_and_free_never_mix() {
        // core's free x against formula's bound v
        let core = forall("u", gt_t(Term::var(int("x")), Term::var(int("u"))));
        let formula = forall("v", gt_t(Term::var(int("v")), Term::var(int("v"))));
        assert_eq!(unify(&core, &formula), None);
        // bound positions must agree across nested binders
        let nested = |a: &str, b: &str, l: &str, r: &str| {
            let inner = Term::binder(BinderKind::Forall, vec![int(b)], gt_t(Term::var(int(l)), Term::var(int(r)))).unwrap();
            Clause::new(Term::binder(BinderKind::Forall, vec![int(a)], inner).unwrap()).unwrap()
        };
        assert!(unify(&nested("p", "q", "p", "q"), &nested("s", "t", "s", "t")).is_some());
        assert!(unify(&nested("p", "q", "p", "q"), &nested("s", "t", "t", "s")).is_none());
    }

    #[test]
    fn shadowed_binder_name() {
        // inner x hides the free x of the core; result binds only the outer occurrence
        let body = Term::pred(
            "and",
            vec![
                gt_t(Term::var(int("x")), Term::int(0)),
                Term::binder(BinderKind::Forall, vec![int("x")], gt_t(Term::var(int("x")), Term::var(int("y")))).unwrap(),
            ],
        )
        .unwrap();
        let core = Clause::new(body).unwrap();
        let image = crate::term::apply_substitution(&core, &subst(&[("x", "a"), ("y", "b")])).unwrap();
        assert_eq!(unify(&core, &image), Some(subst(&[("x", "a"), ("y", "b")])));
    }

    #[test]
    fn many_in_candidate_order() {
        let cycle_tail = [gt("b", "c"), gt("c", "d"), gt("d", "b"), gt("a", "b")];
        let rows = unify_many(&gt("x", "y"), &cycle_tail);
        assert_eq!(
            rows,
            vec![
                (0, subst(&[("x", "b"), ("y", "c")])),
                (1, subst(&[("x", "c"), ("y", "d")])),
                (2, subst(&[("x", "d"), ("y", "b")])),
                (3, subst(&[("x", "a"), ("y", "b")])),
            ]
        );
        assert!(unify_many(&gt("x", "y"), &[]).is_empty());
        let eqs = [Clause::new(Term::pred("=", vec![Term::var(int("a")), Term::var(int("b"))]).unwrap()).unwrap()];
        assert!(unify_many(&gt("x", "y"), &eqs).is_empty());
    }
}
