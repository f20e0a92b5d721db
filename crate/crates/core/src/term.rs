//! Syntax of the rule language: symbols, terms, literals, goals and clauses.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

struct Interned {
    name: Box<str>,
}

fn intern_table() -> &'static Mutex<HashMap<&'static str, &'static Interned>> {
    static TABLE: OnceLock<Mutex<HashMap<&'static str, &'static Interned>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// An interned symbol.
///
/// Equality and hashing use the interned address; ordering compares the
/// underlying text so that canonical orders do not depend on interning order.
#[derive(Clone, Copy)]
pub struct Sym(&'static Interned);

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut table = intern_table().lock().expect("symbol table poisoned");
        if let Some(interned) = table.get(name) {
            return Sym(interned);
        }
        let interned: &'static Interned = Box::leak(Box::new(Interned { name: name.into() }));
        table.insert(&interned.name, interned);
        Sym(interned)
    }

    pub fn as_str(&self) -> &'static str {
        &self.0.name
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Sym) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Sym {}

impl Hash for Sym {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0 as *const Interned as usize).hash(state)
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Sym) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Sym) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

/// A logic variable, numbered locally to its clause or query.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

/// An engine-generated constant, disjoint from every parsed constant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Skolem(pub u32);

/// Functor used to embed a strongly negated literal inside a term.
pub fn neg_functor() -> Sym {
    static NEG: OnceLock<Sym> = OnceLock::new();
    *NEG.get_or_init(|| Sym::new("~"))
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Int(i64),
    Atom(Sym),
    Skolem(Skolem),
    Compound(Sym, Arc<[Term]>),
    Var(Var),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Sym::new(name))
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::atom(functor)
        } else {
            Term::Compound(Sym::new(functor), args.into())
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn contains_skolem(&self) -> bool {
        match self {
            Term::Skolem(_) => true,
            Term::Compound(_, args) => args.iter().any(Term::contains_skolem),
            _ => false,
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.0),
            Term::Compound(_, args) => args.iter().filter_map(Term::max_var).max(),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Applies `f` to every variable occurrence, rebuilding the term.
    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Compound(name, args) => {
                Term::Compound(*name, args.iter().map(|a| a.map_vars(f)).collect())
            }
            other => other.clone(),
        }
    }

    /// Applies `f` to every skolem constant, rebuilding the term.
    pub fn map_skolems(&self, f: &mut impl FnMut(Skolem) -> Term) -> Term {
        match self {
            Term::Skolem(s) => f(*s),
            Term::Compound(name, args) => {
                Term::Compound(*name, args.iter().map(|a| a.map_skolems(f)).collect())
            }
            other => other.clone(),
        }
    }

    pub fn collect_skolems(&self, out: &mut Vec<Skolem>) {
        match self {
            Term::Skolem(s) => {
                if !out.contains(s) {
                    out.push(*s)
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_skolems(out)),
            _ => {}
        }
    }
}

impl From<i64> for Term {
    fn from(n: i64) -> Term {
        Term::Int(n)
    }
}

impl From<Sym> for Term {
    fn from(s: Sym) -> Term {
        Term::Atom(s)
    }
}

/// Identifies the clauses a literal call may resolve against.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredKey {
    pub negated: bool,
    pub pred: Sym,
    pub arity: u32,
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "{}/{}", self.pred, self.arity)
    }
}

/// An atom, possibly under strong negation (`~p(t)`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub negated: bool,
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: &str, args: Vec<Term>) -> Literal {
        Literal { negated: false, pred: Sym::new(pred), args }
    }

    pub fn neg(pred: &str, args: Vec<Term>) -> Literal {
        Literal { negated: true, pred: Sym::new(pred), args }
    }

    pub fn key(&self) -> PredKey {
        PredKey { negated: self.negated, pred: self.pred, arity: self.args.len() as u32 }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn contains_skolem(&self) -> bool {
        self.args.iter().any(Term::contains_skolem)
    }

    /// Strong negation of this literal; `~~p` is `p`.
    pub fn complement(&self) -> Literal {
        Literal { negated: !self.negated, pred: self.pred, args: self.args.clone() }
    }

    pub fn to_term(&self) -> Term {
        let inner = if self.args.is_empty() {
            Term::Atom(self.pred)
        } else {
            Term::Compound(self.pred, self.args.clone().into())
        };
        if self.negated {
            Term::Compound(neg_functor(), vec![inner].into())
        } else {
            inner
        }
    }

    /// Reads a term as a literal; integers, variables and skolems are not literals.
    pub fn from_term(term: &Term) -> Option<Literal> {
        match term {
            Term::Atom(s) => Some(Literal { negated: false, pred: *s, args: Vec::new() }),
            Term::Compound(f, args) if *f == neg_functor() && args.len() == 1 => {
                let inner = Literal::from_term(&args[0])?;
                if inner.negated {
                    return None;
                }
                Some(Literal { negated: true, ..inner })
            }
            Term::Compound(f, args) => {
                Some(Literal { negated: false, pred: *f, args: args.to_vec() })
            }
            _ => None,
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        self.args.iter().filter_map(Term::max_var).max()
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Literal {
        Literal { negated: self.negated, pred: self.pred, args: self.args.iter().map(|t| f(t)).collect() }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CmpOp {
    /// `=`: unification, or arithmetic binding when the right side has operators.
    Eq,
    /// `\==`: structural non-identity.
    NotIdentical,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::NotIdentical => "\\==",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ArithOp {
    Add,
    Sub,
}

/// Right-hand side of a builtin: `t0 (+|- t)*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Expr {
    pub head: Term,
    pub tail: Vec<(ArithOp, Term)>,
}

impl Expr {
    pub fn term(t: Term) -> Expr {
        Expr { head: t, tail: Vec::new() }
    }

    pub fn is_plain(&self) -> bool {
        self.tail.is_empty()
    }

    fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.head).chain(self.tail.iter().map(|(_, t)| t))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Goal {
    True,
    Lit(Literal),
    Not(Box<Goal>),
    And(Vec<Goal>),
    Or(Vec<Goal>),
    Cmp(CmpOp, Term, Expr),
}

impl Goal {
    pub fn lit(l: Literal) -> Goal {
        Goal::Lit(l)
    }

    /// Number of local variables: one past the largest variable index.
    pub fn var_count(&self) -> u32 {
        self.max_var().map_or(0, |v| v + 1)
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Goal::True => None,
            Goal::Lit(l) => l.max_var(),
            Goal::Not(g) => g.max_var(),
            Goal::And(gs) | Goal::Or(gs) => gs.iter().filter_map(Goal::max_var).max(),
            Goal::Cmp(_, l, e) => {
                std::iter::once(l).chain(e.terms()).filter_map(Term::max_var).max()
            }
        }
    }

    /// Visits every term position in the goal.
    pub fn for_each_term(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Goal::True => {}
            Goal::Lit(l) => l.args.iter().for_each(|t| f(t)),
            Goal::Not(g) => g.for_each_term(f),
            Goal::And(gs) | Goal::Or(gs) => gs.iter().for_each(|g| g.for_each_term(f)),
            Goal::Cmp(_, l, e) => {
                f(l);
                e.terms().for_each(|t| f(t));
            }
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Goal {
        match self {
            Goal::True => Goal::True,
            Goal::Lit(l) => Goal::Lit(l.map_terms(|t| f(t))),
            Goal::Not(g) => Goal::Not(Box::new(g.map_terms(f))),
            Goal::And(gs) => Goal::And(gs.iter().map(|g| g.map_terms(f)).collect()),
            Goal::Or(gs) => Goal::Or(gs.iter().map(|g| g.map_terms(f)).collect()),
            Goal::Cmp(op, l, e) => Goal::Cmp(
                *op,
                f(l),
                Expr { head: f(&e.head), tail: e.tail.iter().map(|(o, t)| (*o, f(t))).collect() },
            ),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.for_each_term(&mut |t| ground &= t.is_ground());
        ground
    }

    pub fn contains_skolem(&self) -> bool {
        let mut found = false;
        self.for_each_term(&mut |t| found |= t.contains_skolem());
        found
    }

    /// True if a literal goal equal to `lit` occurs anywhere in this goal.
    pub fn mentions_literal(&self, lit: &Literal) -> bool {
        match self {
            Goal::Lit(l) => l == lit,
            Goal::Not(g) => g.mentions_literal(lit),
            Goal::And(gs) | Goal::Or(gs) => gs.iter().any(|g| g.mentions_literal(lit)),
            _ => false,
        }
    }

    /// Conjuncts of a top-level conjunction, or the goal itself.
    pub fn conjuncts(&self) -> &[Goal] {
        match self {
            Goal::And(gs) => gs,
            Goal::True => &[],
            other => std::slice::from_ref(other),
        }
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Annotations {
    pub priority: Option<i64>,
    pub source: Option<Sym>,
}

impl Annotations {
    pub fn is_empty(&self) -> bool {
        self.priority.is_none() && self.source.is_none()
    }

    pub fn abduction() -> Annotations {
        Annotations { priority: None, source: Some(Sym::new("abduction")) }
    }

    pub fn is_abduction(&self) -> bool {
        self.source.is_some_and(|s| s.as_str() == "abduction")
    }
}

/// `head [annots] :- body.`; a fact has body `True`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub head: Literal,
    pub body: Goal,
    pub annotations: Annotations,
    /// Source names of the clause's variables, indexed by variable number.
    pub var_names: Vec<Sym>,
}

impl Clause {
    pub fn fact(head: Literal) -> Clause {
        Clause { head, body: Goal::True, annotations: Annotations::default(), var_names: Vec::new() }
    }

    pub fn rule(head: Literal, body: Goal) -> Clause {
        Clause { head, body, annotations: Annotations::default(), var_names: Vec::new() }
    }

    pub fn with_annotations(mut self, annotations: Annotations) -> Clause {
        self.annotations = annotations;
        self
    }

    pub fn is_fact(&self) -> bool {
        matches!(self.body, Goal::True)
    }

    pub fn var_count(&self) -> u32 {
        let head = self.head.max_var();
        let body = self.body.max_var();
        head.max(body).map_or(0, |v| v + 1)
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Prints terms using clause-local variable names when available.
struct Printer<'n> {
    names: &'n [Sym],
}

impl Printer<'_> {
    fn term(&self, t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Int(n) => write!(f, "{n}"),
            Term::Atom(s) => write!(f, "{s}"),
            Term::Skolem(k) => write!(f, "$sk{}", k.0),
            Term::Var(v) => match self.names.get(v.0 as usize) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "_G{}", v.0),
            },
            Term::Compound(func, args) if *func == neg_functor() && args.len() == 1 => {
                f.write_str("~")?;
                self.term(&args[0], f)
            }
            Term::Compound(func, args) => {
                write!(f, "{func}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    self.term(a, f)?;
                }
                f.write_str(")")
            }
        }
    }

    fn literal(&self, l: &Literal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if l.negated {
            f.write_str("~")?;
        }
        write!(f, "{}", l.pred)?;
        if !l.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in l.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                self.term(a, f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }

    fn goal(&self, g: &Goal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match g {
            Goal::True => f.write_str("true"),
            Goal::Lit(l) => self.literal(l, f),
            Goal::Not(inner) => {
                f.write_str("not ")?;
                self.grouped(inner, f)
            }
            Goal::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match g {
                        Goal::And(_) => {
                            f.write_str("(")?;
                            self.goal(g, f)?;
                            f.write_str(")")?;
                        }
                        _ => self.goal(g, f)?,
                    }
                }
                Ok(())
            }
            Goal::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    self.grouped(g, f)?;
                }
                Ok(())
            }
            Goal::Cmp(op, lhs, rhs) => {
                self.term(lhs, f)?;
                write!(f, " {} ", op.symbol())?;
                self.term(&rhs.head, f)?;
                for (o, t) in &rhs.tail {
                    f.write_str(match o {
                        ArithOp::Add => "+",
                        ArithOp::Sub => "-",
                    })?;
                    self.term(t, f)?;
                }
                Ok(())
            }
        }
    }

    /// Parenthesises compound goals so they re-parse with the same shape.
    fn grouped(&self, g: &Goal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match g {
            Goal::And(_) | Goal::Or(_) => {
                f.write_str("(")?;
                self.goal(g, f)?;
                f.write_str(")")
            }
            _ => self.goal(g, f),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { names: &[] }.term(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { names: &[] }.literal(self, f)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { names: &[] }.goal(self, f)
    }
}

impl fmt::Display for Annotations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = self.priority {
            parts.push(format!("priority({p})"));
        }
        if let Some(s) = self.source {
            parts.push(format!("source({s})"));
        }
        write!(f, "[{}]", parts.join(", "))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = Printer { names: &self.var_names };
        p.literal(&self.head, f)?;
        if !self.annotations.is_empty() {
            write!(f, " {}", self.annotations)?;
        }
        if !self.is_fact() {
            f.write_str(" :- ")?;
            match &self.body {
                Goal::Or(_) => p.goal(&self.body, f)?,
                other => p.goal(other, f)?,
            }
        }
        f.write_str(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_intern_and_order_by_text() {
        let a = Sym::new("zeta");
        let b = Sym::new("alpha");
        assert_eq!(a, Sym::new("zeta"));
        assert!(b < a);
    }

    #[test]
    fn strong_negation_round_trips_through_terms() {
        let l = Literal::neg("has_card_rank", vec![Term::atom("cathy"), 5.into(), 4.into()]);
        assert_eq!(l.to_term().to_string(), "~has_card_rank(cathy,5,4)");
        assert_eq!(Literal::from_term(&l.to_term()), Some(l.clone()));
        assert_eq!(l.complement().complement(), l);
    }

    #[test]
    fn numbers_are_not_literals() {
        assert_eq!(Literal::from_term(&Term::Int(3)), None);
        assert_eq!(Literal::from_term(&Term::Var(Var(0))), None);
    }
}
