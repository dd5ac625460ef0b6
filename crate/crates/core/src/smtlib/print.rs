use std::collections::HashSet;
use std::fmt::Write;

use crate::term::{quote_symbol, Formula, Sort, Symbol, Term, TermKind};

/// Renders a formula as a self-contained SMT-LIB 2 script. With
/// `name_every_clause`, clause `i` is asserted as `(! c :named k<i>)` and the
/// script requests an unsat core.
pub fn print_query(f: &Formula, name_every_clause: bool) -> String {
    let mut decls = Declarations::default();
    for c in &f.clauses {
        decls.visit(c.term(), &mut Vec::new());
    }

    let mut out = String::new();
    if name_every_clause {
        out.push_str("(set-option :produce-unsat-cores true)\n");
    }
    for s in &decls.sorts {
        writeln!(out, "(declare-sort {} 0)", quote_symbol(s)).unwrap();
    }
    for (name, params, result) in &decls.funs {
        let params: Vec<String> = params.iter().map(Sort::to_string).collect();
        writeln!(out, "(declare-fun {} ({}) {result})", quote_symbol(name), params.join(" ")).unwrap();
    }
    for (i, c) in f.clauses.iter().enumerate() {
        if name_every_clause {
            writeln!(out, "(assert (! {c} :named k{i}))").unwrap();
        } else {
            writeln!(out, "(assert {c})").unwrap();
        }
    }
    out.push_str("(check-sat)\n");
    if name_every_clause && !f.clauses.is_empty() {
        out.push_str("(get-unsat-core)\n");
    }
    out
}

#[derive(Default)]
struct Declarations {
    sorts: Vec<Symbol>,
    funs: Vec<(Symbol, Vec<Sort>, Sort)>,
    seen_sorts: HashSet<Symbol>,
    seen_funs: HashSet<Symbol>,
}

impl Declarations {
    fn sort(&mut self, s: &Sort) {
        match s {
            Sort::Uninterpreted(name) => {
                if self.seen_sorts.insert(name.clone()) {
                    self.sorts.push(name.clone());
                }
            }
            Sort::Array(i, e) => {
                self.sort(i);
                self.sort(e);
            }
            _ => {}
        }
    }

    fn visit(&mut self, t: &Term, bound: &mut Vec<Symbol>) {
        match t.kind() {
            TermKind::Const(_) => {}
            TermKind::Var(v) => {
                self.sort(&v.sort);
                if !bound.contains(&v.name) && self.seen_funs.insert(v.name.clone()) {
                    self.funs.push((v.name.clone(), vec![], v.sort.clone()));
                }
            }
            TermKind::Apply { sort, op, args } => {
                self.sort(sort);
                for a in args {
                    self.visit(a, bound);
                }
                if !op.interpreted && self.seen_funs.insert(op.name.clone()) {
                    self.funs.push((op.name.clone(), args.iter().map(Term::sort).collect(), sort.clone()));
                }
            }
            TermKind::Binder { bound: vars, body, .. } => {
                for v in vars {
                    self.sort(&v.sort);
                }
                let depth = bound.len();
                bound.extend(vars.iter().map(|v| v.name.clone()));
                self.visit(body, bound);
                bound.truncate(depth);
            }
        }
    }
}
