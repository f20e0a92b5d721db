//! SLDNF resolution as an explicit goal-stack / choice-point machine.
//!
//! Terms are structure-shared: a clause's variables are numbered locally and
//! offset by a frame base when the clause is used, so clauses are never copied.
//! The same machine runs in an abductive mode, where an unresolved literal may
//! also be matched against an abducible and added to the running hypothesis.

use rustc_hash::FxHashMap as HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::kb::{FirstKey, KnowledgeBase};
use crate::term::{ArithOp, CmpOp, Expr, Goal, Literal, PredKey, Term, Var};
use crate::unify::Substitution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverLimits {
    pub max_depth: u32,
    pub max_solutions: Option<usize>,
}

impl Default for SolverLimits {
    fn default() -> SolverLimits {
        SolverLimits { max_depth: 10_000, max_solutions: None }
    }
}

impl SolverLimits {
    pub fn depth(max_depth: u32) -> SolverLimits {
        SolverLimits { max_depth, ..SolverLimits::default() }
    }
}

#[derive(Clone)]
enum Frame<'a> {
    Goal { goal: &'a Goal, base: u32, depth: u32, plain: bool },
    /// Reached when the goal under a `not` succeeds.
    NafEnd { cp: usize },
}

struct Cont<'a> {
    frame: Frame<'a>,
    next: Link<'a>,
}

type Link<'a> = Option<Rc<Cont<'a>>>;

fn push<'a>(frame: Frame<'a>, next: Link<'a>) -> Link<'a> {
    Some(Rc::new(Cont { frame, next }))
}

struct Resolve<'a> {
    lit: &'a Literal,
    base: u32,
    depth: u32,
    plain: bool,
    ids: &'a [usize],
    pos: usize,
    extra_pos: usize,
    extra_end: usize,
    abd_pos: usize,
    next: Link<'a>,
}

enum Alt<'a> {
    Resolve(Resolve<'a>),
    Or { branches: &'a [Goal], pos: usize, base: u32, depth: u32, plain: bool, next: Link<'a> },
    NafBarrier { next: Link<'a> },
}

struct Choice<'a> {
    alt: Alt<'a>,
    trail: usize,
    vars: usize,
    extras: usize,
}

/// State for abductive search.
pub(crate) struct AbduceState {
    abducibles: HashMap<PredKey, Vec<Literal>>,
    /// Verified explanations; any extension of one of them is pruned.
    found: Vec<Vec<Literal>>,
    imp_memo: HashMap<Vec<Literal>, bool>,
}

pub(crate) struct Machine<'a> {
    kb: &'a KnowledgeBase,
    extras: Vec<Literal>,
    base_extras: usize,
    bindings: Vec<Option<(Term, u32)>>,
    trail: Vec<u32>,
    choices: Vec<Choice<'a>>,
    limits: SolverLimits,
    query_vars: u32,
    initial: Option<Link<'a>>,
    exhausted: bool,
    abduce: Option<AbduceState>,
}

impl<'a> Machine<'a> {
    pub(crate) fn new(
        kb: &'a KnowledgeBase,
        extras: &[Literal],
        goal: &'a Goal,
        query_vars: u32,
        limits: SolverLimits,
    ) -> Machine<'a> {
        let query_vars = query_vars.max(goal.var_count());
        Machine {
            kb,
            extras: extras.to_vec(),
            base_extras: extras.len(),
            bindings: vec![None; query_vars as usize],
            trail: Vec::new(),
            choices: Vec::new(),
            limits,
            query_vars,
            initial: Some(push(Frame::Goal { goal, base: 0, depth: 0, plain: false }, None)),
            exhausted: false,
            abduce: None,
        }
    }

    pub(crate) fn abductive(mut self, abducibles: impl IntoIterator<Item = Literal>) -> Machine<'a> {
        let mut index: HashMap<PredKey, Vec<Literal>> = HashMap::default();
        for a in abducibles {
            index.entry(a.key()).or_default().push(a);
        }
        self.abduce = Some(AbduceState { abducibles: index, found: Vec::new(), imp_memo: HashMap::default() });
        self
    }

    /// Hypothesis literals assumed on the current derivation.
    pub(crate) fn delta(&self) -> &[Literal] {
        &self.extras[self.base_extras..]
    }

    pub(crate) fn add_found(&mut self, delta: Vec<Literal>) {
        if let Some(st) = self.abduce.as_mut() {
            st.found.push(delta);
        }
    }

    // ---- bindings ----

    fn deref<'s>(&'s self, mut t: &'s Term, mut base: u32) -> (&'s Term, u32) {
        while let Term::Var(v) = t {
            match &self.bindings[(base + v.0) as usize] {
                Some((bound, b)) => {
                    t = bound;
                    base = *b;
                }
                None => break,
            }
        }
        (t, base)
    }

    fn bind(&mut self, idx: u32, t: Term, base: u32) {
        self.bindings[idx as usize] = Some((t, base));
        self.trail.push(idx);
    }

    fn occurs(&self, idx: u32, t: &Term, base: u32) -> bool {
        let (t, base) = self.deref(t, base);
        match t {
            Term::Var(v) => base + v.0 == idx,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(idx, a, base)),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Term, ab: u32, b: &Term, bb: u32) -> bool {
        let (a, ab) = self.deref(a, ab);
        let (b, bb) = self.deref(b, bb);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let (ix, iy) = (ab + x.0, bb + y.0);
                if ix != iy {
                    // bind the younger variable to the older one
                    if ix < iy {
                        let t = a.clone();
                        self.bind(iy, t, ab);
                    } else {
                        let t = b.clone();
                        self.bind(ix, t, bb);
                    }
                }
                true
            }
            (Term::Var(x), _) => {
                let idx = ab + x.0;
                if matches!(b, Term::Compound(..)) && self.occurs(idx, b, bb) {
                    return false;
                }
                let t = b.clone();
                self.bind(idx, t, bb);
                true
            }
            (_, Term::Var(y)) => {
                let idx = bb + y.0;
                if matches!(a, Term::Compound(..)) && self.occurs(idx, a, ab) {
                    return false;
                }
                let t = a.clone();
                self.bind(idx, t, ab);
                true
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                let (xs, ys) = (xs.clone(), ys.clone());
                xs.iter().zip(ys.iter()).all(|(x, y)| self.unify(x, ab, y, bb))
            }
            _ => a == b,
        }
    }

    fn unify_args(&mut self, xs: &[Term], xb: u32, ys: &[Term], yb: u32) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, xb, y, yb))
    }

    fn resolve(&self, t: &Term, base: u32) -> Term {
        let (t, base) = self.deref(t, base);
        match t {
            Term::Var(v) => Term::Var(Var(base + v.0)),
            Term::Compound(f, args) => {
                Term::Compound(*f, args.iter().map(|a| self.resolve(a, base)).collect())
            }
            other => other.clone(),
        }
    }

    fn identical(&self, a: &Term, ab: u32, b: &Term, bb: u32) -> bool {
        let (a, ab) = self.deref(a, ab);
        let (b, bb) = self.deref(b, bb);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => ab + x.0 == bb + y.0,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| self.identical(x, ab, y, bb))
            }
            (Term::Var(_), _) | (_, Term::Var(_)) => false,
            _ => a == b,
        }
    }

    fn is_ground(&self, t: &Term, base: u32) -> bool {
        let (t, base) = self.deref(t, base);
        match t {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(|a| self.is_ground(a, base)),
            _ => true,
        }
    }

    fn goal_is_ground(&self, g: &Goal, base: u32) -> bool {
        let mut ground = true;
        g.for_each_term(&mut |t| ground = ground && self.is_ground(t, base));
        ground
    }

    fn show_goal(&self, g: &Goal, base: u32) -> String {
        g.map_terms(&mut |t| self.resolve(t, base)).to_string()
    }

    fn undo(&mut self, trail: usize, vars: usize, extras: usize) {
        for idx in self.trail.drain(trail..) {
            self.bindings[idx as usize] = None;
        }
        self.bindings.truncate(vars);
        self.extras.truncate(extras);
    }

    // ---- builtins ----

    fn eval(&self, t: &Term, base: u32, g: &Goal, gb: u32) -> Result<Option<i64>> {
        match self.deref(t, base).0 {
            Term::Int(n) => Ok(Some(*n)),
            Term::Var(_) => Err(Error::Instantiation(self.show_goal(g, gb))),
            _ => Ok(None),
        }
    }

    fn eval_expr(&self, e: &Expr, base: u32, g: &Goal) -> Result<Option<i64>> {
        let Some(mut acc) = self.eval(&e.head, base, g, base)? else { return Ok(None) };
        for (op, t) in &e.tail {
            let Some(n) = self.eval(t, base, g, base)? else { return Ok(None) };
            acc = match op {
                ArithOp::Add => acc.checked_add(n),
                ArithOp::Sub => acc.checked_sub(n),
            }
            .ok_or_else(|| Error::Instantiation(format!("overflow in {}", self.show_goal(g, base))))?;
        }
        Ok(Some(acc))
    }

    fn builtin(&mut self, g: &Goal, op: CmpOp, lhs: &Term, rhs: &Expr, base: u32) -> Result<bool> {
        match op {
            CmpOp::Eq if rhs.is_plain() => Ok(self.unify(lhs, base, &rhs.head, base)),
            CmpOp::Eq => match self.eval_expr(rhs, base, g)? {
                Some(n) => Ok(self.unify(lhs, base, &Term::Int(n), 0)),
                None => Ok(false),
            },
            CmpOp::NotIdentical if rhs.is_plain() => Ok(!self.identical(lhs, base, &rhs.head, base)),
            CmpOp::NotIdentical => match self.eval_expr(rhs, base, g)? {
                Some(n) => Ok(!self.identical(lhs, base, &Term::Int(n), 0)),
                None => Ok(true),
            },
            _ => {
                let l = self.eval(lhs, base, g, base)?;
                let r = self.eval_expr(rhs, base, g)?;
                let (Some(l), Some(r)) = (l, r) else { return Ok(false) };
                Ok(match op {
                    CmpOp::Lt => l < r,
                    CmpOp::Gt => l > r,
                    CmpOp::Le => l <= r,
                    CmpOp::Ge => l >= r,
                    CmpOp::Eq | CmpOp::NotIdentical => unreachable!(),
                })
            }
        }
    }

    // ---- resolution ----

    fn resolve_literal(&mut self, lit: &'a Literal, base: u32, depth: u32, plain: bool, next: Link<'a>) -> Result<Option<Link<'a>>> {
        if depth >= self.limits.max_depth {
            return Err(Error::DepthExceeded(self.limits.max_depth));
        }
        let first = lit.args.first().and_then(|t| FirstKey::of(self.deref(t, base).0));
        let kb: &'a KnowledgeBase = self.kb;
        let ids = kb.candidates(&lit.key(), first);
        let st = Resolve {
            lit,
            base,
            depth,
            plain,
            ids,
            pos: 0,
            extra_pos: 0,
            extra_end: self.extras.len(),
            abd_pos: 0,
            next,
        };
        self.try_alternatives(st)
    }

    fn abducible_count(&self, st: &Resolve<'a>) -> usize {
        if st.plain {
            return 0;
        }
        match &self.abduce {
            Some(a) => a.abducibles.get(&st.lit.key()).map_or(0, Vec::len),
            None => 0,
        }
    }

    fn try_alternatives(&mut self, mut st: Resolve<'a>) -> Result<Option<Link<'a>>> {
        let (trail, vars, extras) = (self.trail.len(), self.bindings.len(), self.extras.len());
        let kb: &'a KnowledgeBase = self.kb;
        let n_abd = self.abducible_count(&st);
        loop {
            let cont;
            if st.pos < st.ids.len() {
                let entry = kb.entry(st.ids[st.pos]);
                st.pos += 1;
                let nb = self.bindings.len() as u32;
                self.bindings.resize((nb + entry.nvars) as usize, None);
                if !self.unify_args(&st.lit.args, st.base, &entry.clause.head.args, nb) {
                    self.undo(trail, vars, extras);
                    continue;
                }
                cont = if entry.clause.is_fact() {
                    st.next.clone()
                } else {
                    let frame = Frame::Goal { goal: &entry.clause.body, base: nb, depth: st.depth + 1, plain: st.plain };
                    push(frame, st.next.clone())
                };
            } else if st.extra_pos < st.extra_end {
                let i = st.extra_pos;
                st.extra_pos += 1;
                if self.extras[i].pred != st.lit.pred
                    || self.extras[i].negated != st.lit.negated
                    || self.extras[i].args.len() != st.lit.args.len()
                {
                    continue;
                }
                let fact = self.extras[i].clone();
                let nb = self.bindings.len() as u32;
                let nv = fact.max_var().map_or(0, |v| v + 1);
                self.bindings.resize((nb + nv) as usize, None);
                if !self.unify_args(&st.lit.args, st.base, &fact.args, nb) {
                    self.undo(trail, vars, extras);
                    continue;
                }
                cont = st.next.clone();
            } else if st.abd_pos < n_abd {
                let key = st.lit.key();
                let alpha = self.abduce.as_ref().expect("counted above").abducibles[&key][st.abd_pos].clone();
                st.abd_pos += 1;
                if self.delta().contains(&alpha) {
                    continue;
                }
                if !self.unify_args(&st.lit.args, st.base, &alpha.args, 0) {
                    self.undo(trail, vars, extras);
                    continue;
                }
                if !self.admit(&alpha)? {
                    self.undo(trail, vars, extras);
                    continue;
                }
                self.extras.push(alpha);
                cont = st.next.clone();
            } else {
                return Ok(None);
            }
            let more = st.pos < st.ids.len() || st.extra_pos < st.extra_end || st.abd_pos < n_abd;
            if more {
                self.choices.push(Choice { alt: Alt::Resolve(st), trail, vars, extras });
            }
            return Ok(Some(cont));
        }
    }

    /// Whether assuming `alpha` keeps the hypothesis minimal-candidate and consistent.
    fn admit(&mut self, alpha: &Literal) -> Result<bool> {
        let mut delta: Vec<Literal> = self.delta().to_vec();
        delta.push(alpha.clone());
        delta.sort();
        let st = self.abduce.as_mut().expect("abductive mode");
        if st.found.iter().any(|f| f.iter().all(|l| delta.binary_search(l).is_ok())) {
            return Ok(false);
        }
        if let Some(v) = st.imp_memo.get(&delta) {
            return Ok(!*v);
        }
        let mut all = self.extras[..self.base_extras].to_vec();
        all.extend(delta.iter().cloned());
        let violated = violates_imp(self.kb, &all)?;
        self.abduce.as_mut().expect("abductive mode").imp_memo.insert(delta, violated);
        Ok(!violated)
    }

    fn backtrack(&mut self) -> Result<Option<Link<'a>>> {
        while let Some(ch) = self.choices.pop() {
            self.undo(ch.trail, ch.vars, ch.extras);
            match ch.alt {
                Alt::Resolve(st) => {
                    if let Some(cont) = self.try_alternatives(st)? {
                        return Ok(Some(cont));
                    }
                }
                Alt::Or { branches, pos, base, depth, plain, next } => {
                    if pos + 1 < branches.len() {
                        let alt = Alt::Or { branches, pos: pos + 1, base, depth, plain, next: next.clone() };
                        self.choices.push(Choice { alt, trail: ch.trail, vars: ch.vars, extras: ch.extras });
                    }
                    return Ok(Some(push(Frame::Goal { goal: &branches[pos], base, depth, plain }, next)));
                }
                Alt::NafBarrier { next } => return Ok(Some(next)),
            }
        }
        Ok(None)
    }

    fn fail(&mut self) -> Result<Option<Link<'a>>> {
        self.backtrack()
    }

    /// Runs to the next success; false once the search space is exhausted.
    pub(crate) fn next_solution(&mut self) -> Result<bool> {
        if self.exhausted {
            return Ok(false);
        }
        let start = match self.initial.take() {
            Some(link) => Some(link),
            None => self.backtrack()?,
        };
        let Some(mut cont) = start else {
            self.exhausted = true;
            return Ok(false);
        };
        loop {
            let Some(node) = cont else { return Ok(true) };
            let next = node.next.clone();
            let step = match node.frame {
                Frame::NafEnd { cp } => {
                    let ch = &self.choices[cp];
                    let (t, v, e) = (ch.trail, ch.vars, ch.extras);
                    self.undo(t, v, e);
                    self.choices.truncate(cp);
                    self.fail()?
                }
                Frame::Goal { goal, base, depth, plain } => match goal {
                    Goal::True => Some(next),
                    Goal::Lit(l) => match self.resolve_literal(l, base, depth, plain, next)? {
                        Some(c) => Some(c),
                        None => self.fail()?,
                    },
                    Goal::And(gs) => {
                        let mut link = next;
                        for g in gs.iter().rev() {
                            link = push(Frame::Goal { goal: g, base, depth, plain }, link);
                        }
                        Some(link)
                    }
                    Goal::Or(bs) => {
                        if bs.is_empty() {
                            self.fail()?
                        } else {
                            if bs.len() > 1 {
                                let alt = Alt::Or { branches: bs, pos: 1, base, depth, plain, next: next.clone() };
                                self.choices.push(Choice {
                                    alt,
                                    trail: self.trail.len(),
                                    vars: self.bindings.len(),
                                    extras: self.extras.len(),
                                });
                            }
                            Some(push(Frame::Goal { goal: &bs[0], base, depth, plain }, next))
                        }
                    }
                    Goal::Not(inner) => {
                        if !self.goal_is_ground(inner, base) {
                            return Err(self.flounder(goal, base));
                        }
                        let cp = self.choices.len();
                        self.choices.push(Choice {
                            alt: Alt::NafBarrier { next },
                            trail: self.trail.len(),
                            vars: self.bindings.len(),
                            extras: self.extras.len(),
                        });
                        let end = push(Frame::NafEnd { cp }, None);
                        Some(push(Frame::Goal { goal: inner, base, depth, plain: true }, end))
                    }
                    Goal::Cmp(op, lhs, rhs) => {
                        if self.builtin(goal, *op, lhs, rhs, base)? {
                            Some(next)
                        } else {
                            self.fail()?
                        }
                    }
                },
            };
            match step {
                Some(c) => cont = c,
                None => {
                    self.exhausted = true;
                    return Ok(false);
                }
            }
        }
    }

    fn flounder(&mut self, goal: &Goal, base: u32) -> Error {
        self.exhausted = true;
        Error::FlounderedNaf(self.show_goal(goal, base))
    }

    /// Bindings of the query variables at the current success.
    pub(crate) fn answer(&self) -> Substitution {
        let mut fresh: HashMap<u32, u32> = HashMap::default();
        let nq = self.query_vars;
        let mut map = std::collections::BTreeMap::new();
        for v in 0..nq {
            let t = self.resolve(&Term::Var(Var(v)), 0);
            if t == Term::Var(Var(v)) {
                continue;
            }
            let t = t.map_vars(&mut |w| {
                if w.0 < nq {
                    Term::Var(w)
                } else {
                    let k = fresh.len() as u32;
                    Term::Var(Var(nq + *fresh.entry(w.0).or_insert(k)))
                }
            });
            map.insert(Var(v), t);
        }
        Substitution::from_map(map)
    }
}

/// Lazy sequence of answers to a goal.
pub struct Solutions<'a> {
    machine: Machine<'a>,
    produced: usize,
    done: bool,
}

impl Iterator for Solutions<'_> {
    type Item = Result<Substitution>;

    fn next(&mut self) -> Option<Result<Substitution>> {
        if self.done {
            return None;
        }
        if self.machine.limits.max_solutions.is_some_and(|m| self.produced >= m) {
            self.done = true;
            return None;
        }
        match self.machine.next_solution() {
            Ok(true) => {
                self.produced += 1;
                Some(Ok(self.machine.answer()))
            }
            Ok(false) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn solve<'a>(kb: &'a KnowledgeBase, goal: &'a Goal, limits: SolverLimits) -> Solutions<'a> {
    solve_with(kb, &[], goal, limits)
}

/// Solves against `kb` extended with the ground facts `extras`, without mutating `kb`.
pub fn solve_with<'a>(
    kb: &'a KnowledgeBase,
    extras: &[Literal],
    goal: &'a Goal,
    limits: SolverLimits,
) -> Solutions<'a> {
    solve_in(kb, extras, goal, 0, limits)
}

/// Like [`solve_with`], reserving `nvars` query variables so that fresh
/// variables in answers are numbered from `nvars` upwards.
pub fn solve_in<'a>(
    kb: &'a KnowledgeBase,
    extras: &[Literal],
    goal: &'a Goal,
    nvars: u32,
    limits: SolverLimits,
) -> Solutions<'a> {
    Solutions { machine: Machine::new(kb, extras, goal, nvars, limits), produced: 0, done: false }
}

pub fn provable(kb: &KnowledgeBase, extras: &[Literal], goal: &Goal, limits: SolverLimits) -> Result<bool> {
    let mut m = Machine::new(kb, extras, goal, 0, limits);
    m.next_solution()
}

pub fn entails(kb: &KnowledgeBase, lit: &Literal) -> Result<bool> {
    entails_with(kb, &[], lit)
}

pub fn entails_with(kb: &KnowledgeBase, extras: &[Literal], lit: &Literal) -> Result<bool> {
    provable(kb, extras, &Goal::Lit(lit.clone()), SolverLimits::default())
}

fn imp_goal() -> &'static Goal {
    static IMP: std::sync::OnceLock<Goal> = std::sync::OnceLock::new();
    IMP.get_or_init(|| Goal::Lit(Literal::new("imp", Vec::new())))
}

/// True iff `kb` extended with `extra` derives `imp`.
pub fn violates_imp(kb: &KnowledgeBase, extra: &[Literal]) -> Result<bool> {
    provable(kb, extra, imp_goal(), SolverLimits::default())
}

/// Set of ground literals entailed, memoised per query; used by hot loops.
#[derive(Default)]
pub struct EntailmentCache {
    known: HashMap<Literal, bool>,
}

impl EntailmentCache {
    pub fn entails(&mut self, kb: &KnowledgeBase, lit: &Literal) -> Result<bool> {
        if let Some(v) = self.known.get(lit) {
            return Ok(*v);
        }
        let v = entails(kb, lit)?;
        self.known.insert(lit.clone(), v);
        Ok(v)
    }
}

/// Memoised `violates_imp` over a fixed knowledge base.
#[derive(Default)]
pub struct ImpCache {
    known: HashMap<Vec<Literal>, bool>,
}

impl ImpCache {
    pub fn violates(&mut self, kb: &KnowledgeBase, extra: &[Literal]) -> Result<bool> {
        let mut key = extra.to_vec();
        key.sort();
        key.dedup();
        if let Some(v) = self.known.get(&key) {
            return Ok(*v);
        }
        let v = violates_imp(kb, &key)?;
        self.known.insert(key, v);
        Ok(v)
    }
}
