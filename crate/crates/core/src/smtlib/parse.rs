use std::collections::{HashMap, HashSet};

use num::{BigInt, BigRational, BigUint, Num, One, Signed, Zero};

use super::sexp::{read_all, Atom, Pos, SExp};
use super::{Assertion, Declaration, QueryFile, SmtError};
use crate::term::{free_variables, BinderKind, Literal, Op, Sort, Symbol, Term, TermKind, Var};

/// Parses one `.smt2` file of the supported SMT-LIB 2 subset.
pub fn parse_query_file(bytes: &[u8], path: &str) -> Result<QueryFile, SmtError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SmtError::Parse {
        line: 1,
        column: 1,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let exprs = read_all(text)?;
    let mut p = Parser::default();
    let mut query = QueryFile { path: path.to_string(), ..QueryFile::default() };
    let mut check_sats = 0usize;
    let mut names = HashSet::new();
    let end = Pos { line: text.lines().count().max(1), column: 1 };

    for e in &exprs {
        let items = e.list().ok_or_else(|| perr(e.pos(), "expected a command"))?;
        let (head, args) = items.split_first().ok_or_else(|| perr(e.pos(), "empty command"))?;
        let cmd = head.symbol().ok_or_else(|| perr(head.pos(), "command name must be a symbol"))?;
        match cmd {
            "set-logic" => {
                let [logic] = args else { return Err(perr(e.pos(), "set-logic takes one symbol")) };
                query.logic = Some(expect_symbol(logic)?.into());
            }
            "set-option" | "set-info" => {
                query.options.push(render(e));
            }
            "declare-sort" => {
                let (name, arity) = match args {
                    [name] => (name, None),
                    [name, arity] => (name, Some(arity)),
                    _ => return Err(perr(e.pos(), "declare-sort takes a name and an arity")),
                };
                if let Some(a) = arity {
                    if !matches!(a, SExp::Atom(Atom::Numeral(n), _) if n == "0") {
                        return Err(SmtError::Unsupported("parametric declare-sort".into()));
                    }
                }
                let name = expect_symbol(name)?;
                if !p.sorts.insert(name.to_string()) {
                    return Err(perr(e.pos(), format!("sort `{name}` declared twice")));
                }
                query.sorts.push(name.into());
            }
            "declare-const" => {
                let [name, sort] = args else { return Err(perr(e.pos(), "declare-const takes a name and a sort")) };
                let decl = Declaration { name: expect_symbol(name)?.into(), params: vec![], result: p.sort(sort)? };
                p.declare(decl.clone(), e.pos())?;
                query.declarations.push(decl);
            }
            "declare-fun" => {
                let [name, params, result] = args else {
                    return Err(perr(e.pos(), "declare-fun takes a name, parameter sorts and a result sort"));
                };
                let params = params
                    .list()
                    .ok_or_else(|| perr(params.pos(), "expected a parameter sort list"))?
                    .iter()
                    .map(|s| p.sort(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let decl = Declaration { name: expect_symbol(name)?.into(), params, result: p.sort(result)? };
                p.declare(decl.clone(), e.pos())?;
                query.declarations.push(decl);
            }
            "assert" => {
                let [body] = args else { return Err(perr(e.pos(), "assert takes one term")) };
                let (term, name) = p.annotated(body)?;
                if let Some(n) = &name {
                    if !names.insert(n.clone()) {
                        return Err(perr(body.pos(), format!("assertion name `{n}` used twice")));
                    }
                }
                query.assertions.push(Assertion { name, term });
            }
            "check-sat" => {
                check_sats += 1;
                if check_sats > 1 {
                    return Err(perr(e.pos(), "more than one check-sat"));
                }
            }
            "exit" => break,
            "get-unsat-core" | "get-model" | "get-value" | "get-info" | "get-assertions" | "get-option"
            | "get-assignment" | "get-proof" | "echo" => {}
            "define-fun" | "define-fun-rec" | "define-funs-rec" | "define-sort" | "push" | "pop"
            | "declare-datatype" | "declare-datatypes" | "check-sat-assuming" | "reset" | "reset-assertions" => {
                return Err(SmtError::Unsupported(cmd.to_string()));
            }
            other => return Err(perr(head.pos(), format!("unknown command `{other}`"))),
        }
    }
    if check_sats == 0 {
        return Err(perr(end, "missing check-sat"));
    }
    Ok(query)
}

fn perr(pos: Pos, message: impl Into<String>) -> SmtError {
    SmtError::Parse { line: pos.line, column: pos.column, message: message.into() }
}

fn expect_symbol(e: &SExp) -> Result<&str, SmtError> {
    e.symbol().ok_or_else(|| perr(e.pos(), "expected a symbol"))
}

fn expect_numeral(e: &SExp) -> Result<u32, SmtError> {
    match e {
        SExp::Atom(Atom::Numeral(n), pos) => n.parse().map_err(|_| perr(*pos, "index out of range")),
        _ => Err(perr(e.pos(), "expected a numeral")),
    }
}

fn render(e: &SExp) -> String {
    match e {
        SExp::Atom(a, _) => match a {
            Atom::Symbol(s) => s.clone(),
            Atom::Keyword(k) => format!(":{k}"),
            Atom::Numeral(n) | Atom::Decimal(n) => n.clone(),
            Atom::Binary(b) => format!("#b{b}"),
            Atom::Hex(h) => format!("#x{h}"),
            Atom::Str(s) => format!("{s:?}"),
        },
        SExp::List(items, _) => format!("({})", items.iter().map(render).collect::<Vec<_>>().join(" ")),
    }
}

enum Binding {
    Let(Term),
    Bound(Var),
}

#[derive(Default)]
struct Parser {
    sorts: HashSet<String>,
    funs: HashMap<String, Declaration>,
    scope: Vec<(String, Binding)>,
    fresh: usize,
}

const ROUNDING_MODES: &[(&str, &str)] = &[
    ("RNE", "RNE"),
    ("roundNearestTiesToEven", "RNE"),
    ("RNA", "RNA"),
    ("roundNearestTiesToAway", "RNA"),
    ("RTP", "RTP"),
    ("roundTowardPositive", "RTP"),
    ("RTN", "RTN"),
    ("roundTowardNegative", "RTN"),
    ("RTZ", "RTZ"),
    ("roundTowardZero", "RTZ"),
];

impl Parser {
    fn declare(&mut self, decl: Declaration, pos: Pos) -> Result<(), SmtError> {
        if self.funs.contains_key(&*decl.name) {
            return Err(perr(pos, format!("`{}` declared twice", decl.name)));
        }
        self.funs.insert(decl.name.to_string(), decl);
        Ok(())
    }

    fn sort(&self, e: &SExp) -> Result<Sort, SmtError> {
        match e {
            SExp::Atom(Atom::Symbol(s), pos) => match s.as_str() {
                "Bool" => Ok(Sort::Bool),
                "Int" => Ok(Sort::Int),
                "Real" => Ok(Sort::Real),
                "RoundingMode" => Ok(Sort::RoundingMode),
                "Float16" => Ok(Sort::FloatingPoint { ebits: 5, sbits: 11 }),
                "Float32" => Ok(Sort::FloatingPoint { ebits: 8, sbits: 24 }),
                "Float64" => Ok(Sort::FloatingPoint { ebits: 11, sbits: 53 }),
                "Float128" => Ok(Sort::FloatingPoint { ebits: 15, sbits: 113 }),
                name if self.sorts.contains(name) => Ok(Sort::Uninterpreted(name.into())),
                name => Err(perr(*pos, format!("unknown sort `{name}`"))),
            },
            SExp::List(items, pos) => match items.as_slice() {
                [u, name, w] if u.symbol() == Some("_") && name.symbol() == Some("BitVec") => {
                    Sort::bitvec(expect_numeral(w)?).map_err(|err| perr(*pos, err.to_string()))
                }
                [u, name, eb, sb] if u.symbol() == Some("_") && name.symbol() == Some("FloatingPoint") => {
                    Sort::floating_point(expect_numeral(eb)?, expect_numeral(sb)?)
                        .map_err(|err| perr(*pos, err.to_string()))
                }
                [a, i, el] if a.symbol() == Some("Array") => Ok(Sort::array(self.sort(i)?, self.sort(el)?)),
                _ => Err(perr(*pos, "unsupported sort expression")),
            },
            other => Err(perr(other.pos(), "expected a sort")),
        }
    }

    /// Top-level assertion body, allowing a single `(! t :named n)` wrapper.
    fn annotated(&mut self, e: &SExp) -> Result<(Term, Option<Symbol>), SmtError> {
        if let Some([bang, body, attrs @ ..]) = e.list() {
            if bang.symbol() == Some("!") {
                let term = self.term(body)?;
                let mut name = None;
                let mut rest = attrs;
                while let [key, value, tail @ ..] = rest {
                    match key {
                        SExp::Atom(Atom::Keyword(k), _) if k == "named" => {
                            name = Some(expect_symbol(value)?.into());
                        }
                        SExp::Atom(Atom::Keyword(k), _) => return Err(SmtError::Unsupported(format!("annotation :{k}"))),
                        other => return Err(perr(other.pos(), "expected an attribute keyword")),
                    }
                    rest = tail;
                }
                if !rest.is_empty() {
                    return Err(perr(e.pos(), "malformed annotation"));
                }
                return Ok((term, name));
            }
        }
        Ok((self.term(e)?, None))
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    fn term(&mut self, e: &SExp) -> Result<Term, SmtError> {
        match e {
            SExp::Atom(atom, pos) => self.atom(atom, *pos),
            SExp::List(items, pos) => {
                let (head, args) = items.split_first().ok_or_else(|| perr(*pos, "empty term"))?;
                match head {
                    SExp::Atom(Atom::Symbol(s), _) => match s.as_str() {
                        "_" => self.indexed_constant(args, *pos),
                        "let" => self.let_term(args, *pos),
                        "forall" => self.binder(BinderKind::Forall, args, *pos),
                        "exists" => self.binder(BinderKind::Exists, args, *pos),
                        "lambda" => self.binder(BinderKind::Lambda, args, *pos),
                        "!" => Err(SmtError::Unsupported("nested annotation".into())),
                        "as" => Err(SmtError::Unsupported("qualified identifier".into())),
                        "match" => Err(SmtError::Unsupported("match".into())),
                        name => {
                            let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                            self.application(name, &[], args, *pos)
                        }
                    },
                    SExp::List(hs, hpos) => {
                        let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                        match hs.as_slice() {
                            [u, name, idx @ ..] if u.symbol() == Some("_") && !idx.is_empty() => {
                                let name = expect_symbol(name)?;
                                let idx = idx.iter().map(expect_numeral).collect::<Result<Vec<_>, _>>()?;
                                self.application(name, &idx, args, *pos)
                            }
                            [a, c, s] if a.symbol() == Some("as") && c.symbol() == Some("const") => {
                                let sort = self.sort(s)?;
                                if !matches!(sort, Sort::Array(..)) || args.len() != 1 {
                                    return Err(perr(*hpos, "constant array needs an array sort and one value"));
                                }
                                let op = Op::builtin(&format!("(as const {sort})"));
                                Term::apply(op, sort, args).map_err(|err| perr(*pos, err.to_string()))
                            }
                            _ => Err(perr(*hpos, "unsupported function head")),
                        }
                    }
                    other => Err(perr(other.pos(), "expected a function symbol")),
                }
            }
        }
    }

    fn atom(&mut self, atom: &Atom, pos: Pos) -> Result<Term, SmtError> {
        match atom {
            Atom::Numeral(n) => Ok(Term::constant(Literal::Int(n.parse::<BigInt>().expect("digits")))),
            Atom::Decimal(d) => Ok(Term::constant(Literal::Real(parse_decimal(d)))),
            Atom::Binary(b) => Ok(Term::constant(Literal::BitVec {
                width: b.len() as u32,
                value: BigUint::from_str_radix(b, 2).expect("binary digits"),
            })),
            Atom::Hex(h) => Ok(Term::constant(Literal::BitVec {
                width: 4 * h.len() as u32,
                value: BigUint::from_str_radix(h, 16).expect("hex digits"),
            })),
            Atom::Str(_) => Err(SmtError::Unsupported("string literal".into())),
            Atom::Keyword(k) => Err(perr(pos, format!("unexpected keyword :{k}"))),
            Atom::Symbol(s) => {
                match self.lookup(s) {
                    Some(Binding::Let(t)) => return Ok(t.clone()),
                    Some(Binding::Bound(v)) => return Ok(Term::var(v.clone())),
                    None => {}
                }
                match s.as_str() {
                    "true" => return Ok(Term::bool(true)),
                    "false" => return Ok(Term::bool(false)),
                    _ => {}
                }
                if let Some((_, short)) = ROUNDING_MODES.iter().find(|(long, _)| long == s) {
                    return Ok(Term::constant(Literal::RoundingMode((*short).into())));
                }
                match self.funs.get(s.as_str()) {
                    Some(d) if d.params.is_empty() => Ok(Term::var(Var::new(d.name.clone(), d.result.clone()))),
                    Some(_) => Err(perr(pos, format!("function `{s}` used without arguments"))),
                    None => Err(perr(pos, format!("undeclared symbol `{s}`"))),
                }
            }
        }
    }

    fn indexed_constant(&mut self, args: &[SExp], pos: Pos) -> Result<Term, SmtError> {
        let (name, idx) = args.split_first().ok_or_else(|| perr(pos, "empty indexed identifier"))?;
        let name = expect_symbol(name)?;
        let idx = idx.iter().map(expect_numeral).collect::<Result<Vec<_>, _>>()?;
        if let (Some(digits), [width]) = (name.strip_prefix("bv"), idx.as_slice()) {
            let value = digits.parse::<BigUint>().map_err(|_| perr(pos, "malformed bit-vector literal"))?;
            if *width == 0 || value.bits() > u64::from(*width) {
                return Err(perr(pos, "bit-vector literal does not fit its width"));
            }
            return Ok(Term::constant(Literal::BitVec { width: *width, value }));
        }
        let [ebits, sbits] = idx.as_slice() else {
            return Err(perr(pos, format!("unsupported indexed constant `{name}`")));
        };
        Sort::floating_point(*ebits, *sbits).map_err(|e| perr(pos, e.to_string()))?;
        let (eb, sb) = (*ebits as usize, *sbits as usize);
        let exp_ones = (BigUint::one() << eb) - BigUint::one();
        let bits = match name {
            "+zero" => BigUint::zero(),
            "-zero" => BigUint::one() << (eb + sb - 1),
            "+oo" => exp_ones << (sb - 1),
            "-oo" => (BigUint::one() << (eb + sb - 1)) | (exp_ones << (sb - 1)),
            "NaN" => (exp_ones << (sb - 1)) | (BigUint::one() << (sb - 2)),
            _ => return Err(perr(pos, format!("unsupported indexed constant `{name}`"))),
        };
        Ok(Term::constant(Literal::Float { ebits: *ebits, sbits: *sbits, bits }))
    }

    fn let_term(&mut self, args: &[SExp], pos: Pos) -> Result<Term, SmtError> {
        let [bindings, body] = args else { return Err(perr(pos, "let takes bindings and a body")) };
        let bindings = bindings.list().ok_or_else(|| perr(bindings.pos(), "expected let bindings"))?;
        // parallel let: every bound term is parsed in the outer scope
        let mut parsed = Vec::with_capacity(bindings.len());
        for b in bindings {
            let [name, value] = b.list().unwrap_or(&[]) else { return Err(perr(b.pos(), "malformed let binding")) };
            parsed.push((expect_symbol(name)?.to_string(), self.term(value)?));
        }
        if parsed.is_empty() {
            return Err(perr(pos, "let without bindings"));
        }
        let depth = self.scope.len();
        self.scope.extend(parsed.into_iter().map(|(n, t)| (n, Binding::Let(t))));
        let body = self.term(body);
        self.scope.truncate(depth);
        body
    }

    fn binder(&mut self, kind: BinderKind, args: &[SExp], pos: Pos) -> Result<Term, SmtError> {
        let [vars, body] = args else { return Err(perr(pos, "binder takes variables and a body")) };
        let vars = vars.list().ok_or_else(|| perr(vars.pos(), "expected sorted variables"))?;
        // names free in visible let-bound terms must not be captured by this binder
        let mut let_free: HashSet<Symbol> = HashSet::new();
        for (_, b) in &self.scope {
            if let Binding::Let(t) = b {
                let_free.extend(free_variables(t).into_iter().map(|v| v.name));
            }
        }
        let mut bound = Vec::with_capacity(vars.len());
        let depth = self.scope.len();
        for v in vars {
            let [name, sort] = v.list().unwrap_or(&[]) else {
                return Err(perr(v.pos(), "malformed sorted variable"));
            };
            let source = expect_symbol(name)?;
            let mut actual: Symbol = source.into();
            while let_free.contains(&actual) || self.funs.contains_key(&*actual) && &*actual != source {
                self.fresh += 1;
                actual = format!("{source}!{}", self.fresh).into();
            }
            let var = Var::new(actual, self.sort(sort)?);
            self.scope.push((source.to_string(), Binding::Bound(var.clone())));
            bound.push(var);
        }
        let body = self.term(body);
        self.scope.truncate(depth);
        Term::binder(kind, bound, body?).map_err(|e| perr(pos, e.to_string()))
    }

    fn application(&self, name: &str, idx: &[u32], args: Vec<Term>, pos: Pos) -> Result<Term, SmtError> {
        if args.is_empty() {
            return Err(perr(pos, format!("`{name}` applied to no arguments")));
        }
        if idx.is_empty() {
            if let Some(folded) = fold_literal(name, &args) {
                return Ok(folded);
            }
            if let Some(decl) = self.funs.get(name) {
                if decl.params.len() != args.len() {
                    return Err(perr(pos, format!("`{name}` expects {} arguments", decl.params.len())));
                }
                for (want, got) in decl.params.iter().zip(&args) {
                    if *want != got.sort() {
                        return Err(SmtError::Sort(format!("argument of `{name}` has sort {}, expected {want}", got.sort())));
                    }
                }
                return Term::apply(Op::uninterpreted(name), decl.result.clone(), args)
                    .map_err(|e| perr(pos, e.to_string()));
            }
        }
        let sort = builtin_sort(name, idx, &args).map_err(|m| perr(pos, m))?;
        let op_name = if idx.is_empty() {
            name.to_string()
        } else {
            let idx: Vec<String> = idx.iter().map(u32::to_string).collect();
            format!("(_ {name} {})", idx.join(" "))
        };
        Term::apply(Op::builtin(&op_name), sort, args).map_err(|e| perr(pos, e.to_string()))
    }
}

fn parse_decimal(d: &str) -> BigRational {
    let (int, frac) = d.split_once('.').unwrap_or((d, ""));
    let numer: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let denom = num::pow(BigInt::from(10), frac.len());
    BigRational::new(numer, denom)
}

fn literal_of(t: &Term) -> Option<&Literal> {
    match t.kind() {
        TermKind::Const(l) => Some(l),
        _ => None,
    }
}

/// Folds negated numerals, literal ratios and `fp` triples into constants so
/// printed literals re-parse to the same term.
fn fold_literal(name: &str, args: &[Term]) -> Option<Term> {
    match (name, args) {
        ("-", [a]) => match literal_of(a)? {
            Literal::Int(i) if !i.is_negative() => Some(Term::constant(Literal::Int(-i))),
            Literal::Real(r) if !r.is_negative() => Some(Term::constant(Literal::Real(-r))),
            _ => None,
        },
        ("/", [a, b]) => {
            let as_ratio = |l: &Literal| match l {
                Literal::Int(i) if !i.is_negative() => Some(BigRational::from_integer(i.clone())),
                Literal::Real(r) if !r.is_negative() => Some(r.clone()),
                _ => None,
            };
            let (n, d) = (as_ratio(literal_of(a)?)?, as_ratio(literal_of(b)?)?);
            if d.is_zero() {
                return None;
            }
            Some(Term::constant(Literal::Real(n / d)))
        }
        ("fp", [s, e, m]) => match (literal_of(s)?, literal_of(e)?, literal_of(m)?) {
            (
                Literal::BitVec { width: 1, value: sv },
                Literal::BitVec { width: ew, value: ev },
                Literal::BitVec { width: mw, value: mv },
            ) if *ew >= 2 => {
                let bits = (sv << (ew + mw) as usize) | (ev << *mw as usize) | mv.clone();
                Some(Term::constant(Literal::Float { ebits: *ew, sbits: mw + 1, bits }))
            }
            _ => None,
        },
        _ => None,
    }
}

fn bv_width(t: &Term, op: &str) -> Result<u32, String> {
    match t.sort() {
        Sort::BitVec(w) => Ok(w),
        other => Err(format!("`{op}` expects bit-vector arguments, got {other}")),
    }
}

fn first_float(args: &[Term], op: &str) -> Result<Sort, String> {
    args.iter()
        .map(Term::sort)
        .find(|s| matches!(s, Sort::FloatingPoint { .. }))
        .ok_or_else(|| format!("`{op}` expects a floating-point argument"))
}

fn builtin_sort(name: &str, idx: &[u32], args: &[Term]) -> Result<Sort, String> {
    let first = args[0].sort();
    let sort = match (name, idx) {
        ("not" | "and" | "or" | "xor" | "=>" | "=" | "distinct", []) => Sort::Bool,
        ("ite", []) => {
            if args.len() != 3 {
                return Err("ite takes three arguments".into());
            }
            args[1].sort()
        }
        ("<" | "<=" | ">" | ">=" | "is_int", []) => Sort::Bool,
        ("+" | "-" | "*" | "abs", []) => {
            if args.iter().any(|a| a.sort() == Sort::Real) {
                Sort::Real
            } else {
                Sort::Int
            }
        }
        ("div" | "mod" | "to_int", []) => Sort::Int,
        ("/" | "to_real", []) => Sort::Real,
        ("select", []) => match first {
            Sort::Array(_, e) => *e,
            other => return Err(format!("select on non-array sort {other}")),
        },
        ("store", []) => match first {
            Sort::Array(..) => first,
            other => return Err(format!("store on non-array sort {other}")),
        },
        ("concat", []) => {
            let mut total = 0;
            for a in args {
                total += bv_width(a, name)?;
            }
            Sort::BitVec(total)
        }
        ("bvnot" | "bvand" | "bvor" | "bvxor" | "bvnand" | "bvnor" | "bvxnor" | "bvneg" | "bvadd" | "bvsub"
        | "bvmul" | "bvudiv" | "bvurem" | "bvsdiv" | "bvsrem" | "bvsmod" | "bvshl" | "bvlshr" | "bvashr", []) => {
            Sort::BitVec(bv_width(&args[0], name)?)
        }
        ("bvult" | "bvule" | "bvugt" | "bvuge" | "bvslt" | "bvsle" | "bvsgt" | "bvsge", []) => Sort::Bool,
        ("bvcomp", []) => Sort::BitVec(1),
        ("bv2nat", []) => Sort::Int,
        ("extract", [hi, lo]) => {
            let w = bv_width(&args[0], name)?;
            if lo > hi || *hi >= w {
                return Err(format!("extract indices {hi} {lo} out of range for width {w}"));
            }
            Sort::BitVec(hi - lo + 1)
        }
        ("zero_extend" | "sign_extend", [i]) => Sort::BitVec(bv_width(&args[0], name)? + i),
        ("repeat", [i]) if *i >= 1 => Sort::BitVec(bv_width(&args[0], name)? * i),
        ("rotate_left" | "rotate_right", [_]) => Sort::BitVec(bv_width(&args[0], name)?),
        ("int2bv", [w]) if *w >= 1 => Sort::BitVec(*w),
        ("fp", []) => {
            if args.len() != 3 {
                return Err("fp takes three arguments".into());
            }
            let (e, m) = (bv_width(&args[1], name)?, bv_width(&args[2], name)?);
            Sort::floating_point(e, m + 1).map_err(|e| e.to_string())?
        }
        ("fp.leq" | "fp.lt" | "fp.geq" | "fp.gt" | "fp.eq" | "fp.isNormal" | "fp.isSubnormal" | "fp.isZero"
        | "fp.isInfinite" | "fp.isNaN" | "fp.isNegative" | "fp.isPositive", []) => Sort::Bool,
        ("fp.to_real", []) => Sort::Real,
        ("fp.to_ubv" | "fp.to_sbv", [w]) if *w >= 1 => Sort::BitVec(*w),
        ("to_fp" | "to_fp_unsigned", [e, s]) => Sort::floating_point(*e, *s).map_err(|e| e.to_string())?,
        (op, []) if op.starts_with("fp.") => first_float(args, op)?,
        _ => {
            return Err(if idx.is_empty() {
                format!("unknown function symbol `{name}`")
            } else {
                format!("unknown indexed function `{name}`")
            })
        }
    };
    Ok(sort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smtlib::to_formula;

    fn parse(text: &str) -> Result<QueryFile, SmtError> {
        parse_query_file(text.as_bytes(), "test.smt2")
    }

    fn clauses(text: &str) -> Vec<String> {
        to_formula(&parse(text).unwrap()).unwrap().clauses.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn simple_query() {
        let q = parse("(declare-const x Int)(declare-const y Int)(assert (> x y))(check-sat)").unwrap();
        assert_eq!(q.assertions.len(), 1);
        assert_eq!(q.declarations.len(), 2);
        assert_eq!(q.assertions[0].term.to_string(), "(> x y)");
    }

    #[test]
    fn triangle_flattens_to_three_clauses() {
        let text = "(set-logic QF_LIA)(declare-fun x () Int)(declare-fun y () Int)(declare-fun z () Int)
                    (assert (and (> x y) (> y z) (> z x)))(check-sat)(exit)";
        assert_eq!(clauses(text), ["(> x y)", "(> y z)", "(> z x)"]);
        assert_eq!(parse(text).unwrap().logic.as_deref(), Some("QF_LIA"));
    }

    #[test]
    fn unsupported_commands() {
        assert!(matches!(parse("(push 1)"), Err(SmtError::Unsupported(c)) if c == "push"));
        assert!(matches!(parse("(define-fun f () Int 3)"), Err(SmtError::Unsupported(_))));
    }

    #[test]
    fn check_sat_count() {
        assert!(matches!(parse("(assert true)"), Err(SmtError::Parse { .. })));
        assert!(matches!(parse("(assert true)(check-sat)(check-sat)"), Err(SmtError::Parse { line: 1, column: 25, .. })));
    }

    #[test]
    fn undeclared_symbol_is_an_error() {
        match parse("(declare-const x Int)\n(assert (> x y))(check-sat)") {
            Err(SmtError::Parse { line: 2, column: 14, message }) => assert!(message.contains("`y`")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn named_assertions() {
        let q = parse("(declare-const p Bool)(assert (! p :named a1))(assert (! (not p) :named a2))(check-sat)").unwrap();
        assert_eq!(q.assertions[1].name.as_deref(), Some("a2"));
        assert!(parse("(declare-const p Bool)(assert (! p :named a))(assert (! p :named a))(check-sat)").is_err());
    }

    #[test]
    fn let_is_expanded() {
        let text = "(declare-const x Int)(declare-const y Int)
                    (assert (let ((a (+ x 1)) (b y)) (let ((a b) (b a)) (> a b))))(check-sat)";
        // parallel semantics: inner a is outer b = y, inner b is outer a = x + 1
        assert_eq!(clauses(text), ["(> y (+ x 1))"]);
    }

    #[test]
    fn let_does_not_get_captured_by_quantifier() {
        let text = "(declare-const y Int)(assert (let ((a y)) (forall ((y Int)) (> a y))))(check-sat)";
        let c = clauses(text);
        assert_eq!(c, ["(forall ((y!1 Int)) (> y y!1))"]);
    }

    #[test]
    fn quantifier_shadows_constant() {
        let text = "(declare-const x Int)(assert (and (> x 0) (forall ((x Int)) (>= x x))))(check-sat)";
        let f = to_formula(&parse(text).unwrap()).unwrap();
        assert_eq!(f.clauses[1].free_vars(), &[]);
        assert_eq!(f.clauses[0].free_vars().len(), 1);
    }

    #[test]
    fn literals_and_theories() {
        let text = "(declare-const b (_ BitVec 8))(declare-const r Real)(declare-const f Float32)
                    (declare-const a (Array Int (_ BitVec 8)))(declare-sort U 0)(declare-fun g (U) U)(declare-const u U)
                    (assert (bvugt b #x0f))(assert (= ((_ extract 3 0) b) #b0101))(assert (> r (- 2.5)))
                    (assert (fp.lt f (fp #b0 #b01111111 #b00000000000000000000000)))
                    (assert (= (select (store a 1 b) 1) ((_ zero_extend 4) ((_ extract 3 0) b))))
                    (assert (= (g u) u))(assert (= a ((as const (Array Int (_ BitVec 8))) (_ bv0 8))))
                    (assert (fp.isNaN (fp.add RNE f (_ NaN 8 24))))(assert (< (/ 1 3) r))(check-sat)";
        let c = clauses(text);
        assert_eq!(c[0], "(bvugt b (_ bv15 8))");
        assert_eq!(c[1], "(= ((_ extract 3 0) b) (_ bv5 4))");
        assert_eq!(c[2], "(> r (- (/ 5.0 2.0)))");
        assert_eq!(c[3], "(fp.lt f (fp #b0 #b01111111 #b00000000000000000000000))");
        assert_eq!(c[5], "(= (g u) u)");
        assert_eq!(c[6], "(= a ((as const (Array Int (_ BitVec 8))) (_ bv0 8)))");
        assert_eq!(c[8], "(< (/ 1.0 3.0) r)");
    }

    #[test]
    fn sort_errors() {
        assert!(matches!(parse("(declare-sort U 0)(declare-fun g (U) U)(assert (= (g 1) (g 1)))(check-sat)"), Err(SmtError::Sort(_))));
        assert!(parse("(declare-const b (_ BitVec 0))(check-sat)").is_err());
        assert!(parse("(declare-const x Int)(assert ((_ extract 3 0) x))(check-sat)").is_err());
    }
}
