//! Priority-ordered action selection over Skolemised rule bodies.
//!
//! A rule body is evaluated left to right. A literal the knowledge base cannot
//! prove, but which matches some abducible, is assumed with its free variables
//! replaced by fresh skolem constants. Goals that mention skolems and cannot be
//! assumed are deferred. Each resulting form is grounded against the abducible
//! set; instances that derive `imp` are dropped, and the survivors must all
//! prove the body and agree on the action.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;

use crate::abduction::{abducible_set, AbducibleSet};
use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, Provenance};
use crate::solver::{provable, solve_in, ImpCache, SolverLimits};
use crate::term::{Clause, Goal, Literal, PredKey, Skolem, Sym, Term, Var};
use crate::unify::{unify_literals, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectionLimits {
    pub solver: SolverLimits,
    pub max_forms: usize,
    pub max_instances: usize,
}

impl Default for SelectionLimits {
    fn default() -> SelectionLimits {
        SelectionLimits { solver: SolverLimits::default(), max_forms: 1_000, max_instances: 100_000 }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SkolemisedBody {
    /// Bindings of the rule's variables; values may contain skolem constants.
    pub binding: Substitution,
    /// Literals assumed rather than proven, possibly containing skolems.
    pub assumed: Vec<Literal>,
    /// Goals over skolem constants, checked once the skolems are grounded.
    pub deferred: Vec<Goal>,
    /// Originating body-goal position of each skolem constant.
    pub skolems: BTreeMap<Skolem, usize>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TotalInstance {
    pub assumed: Vec<Literal>,
    pub skolems: BTreeMap<Skolem, Term>,
}

/// Matches literals against the abducibles, with per-key lookup.
struct Abducibles {
    by_key: HashMap<PredKey, Vec<Literal>>,
}

impl Abducibles {
    fn new(a: &AbducibleSet) -> Abducibles {
        Abducibles { by_key: a.by_key() }
    }

    fn candidates(&self, l: &Literal) -> &[Literal] {
        self.by_key.get(&l.key()).map_or(&[], |v| &v[..])
    }

    /// Whether some abducible matches `l`, reading variables and skolems as free.
    fn matches(&self, l: &Literal) -> bool {
        let open = open_skolems(l, &BTreeMap::new());
        self.candidates(l).iter().any(|a| unify_literals(&open, a, &Substitution::new()).is_some())
    }
}

/// Offset for variables standing in for skolems during matching.
const SKOLEM_VAR: u32 = 1 << 30;

/// Replaces assigned skolems by their values and the rest by variables.
fn open_skolems(l: &Literal, assignment: &BTreeMap<Skolem, Term>) -> Literal {
    l.map_terms(|t| {
        t.map_skolems(&mut |k| match assignment.get(&k) {
            Some(v) => v.clone(),
            None => Term::Var(Var(SKOLEM_VAR + k.0)),
        })
    })
}

fn close_skolems(t: &Term, assignment: &BTreeMap<Skolem, Term>) -> Term {
    t.map_skolems(&mut |k| assignment.get(&k).cloned().unwrap_or(Term::Skolem(k)))
}

struct Skolemiser<'k> {
    kb: &'k KnowledgeBase,
    abducibles: &'k Abducibles,
    goals: &'k [Goal],
    limits: SelectionLimits,
    forms: Vec<SkolemisedBody>,
}

#[derive(Clone)]
struct Path {
    binding: Substitution,
    assumed: Vec<Literal>,
    deferred: Vec<Goal>,
    skolems: BTreeMap<Skolem, usize>,
    next_var: u32,
}

impl Path {
    fn fresh_skolems(&mut self, l: &Literal, origin: usize) -> Literal {
        let mut vars = Vec::new();
        for t in &l.args {
            t.collect_vars(&mut vars);
        }
        for v in vars {
            let k = Skolem(self.skolems.len() as u32);
            self.skolems.insert(k, origin);
            self.binding.bind(v, Term::Skolem(k));
        }
        self.binding.apply_literal(l)
    }
}

impl Skolemiser<'_> {
    fn walk(&mut self, i: usize, mut path: Path) -> Result<()> {
        if i == self.goals.len() {
            let form = SkolemisedBody {
                binding: path.binding,
                assumed: path.assumed,
                deferred: path.deferred,
                skolems: path.skolems,
            };
            if !self.forms.contains(&form) {
                if self.forms.len() == self.limits.max_forms {
                    return Err(Error::FormLimitExceeded(self.limits.max_forms));
                }
                self.forms.push(form);
            }
            return Ok(());
        }
        let goal = self.goals[i].map_terms(&mut |t| path.binding.apply(t));
        if goal.contains_skolem() {
            match &goal {
                Goal::Lit(l) if self.abducibles.matches(l) => {
                    let l = path.fresh_skolems(l, i);
                    if !path.assumed.contains(&l) {
                        path.assumed.push(l);
                    }
                }
                _ => path.deferred.push(goal),
            }
            return self.walk(i + 1, path);
        }
        let mut proven = false;
        let sols: Vec<Substitution> =
            solve_in(self.kb, &[], &goal, path.next_var, self.limits.solver).collect::<Result<_>>()?;
        for s in sols {
            proven = true;
            let mut next = path.clone();
            for (v, t) in s.iter() {
                if let Some(m) = t.max_var() {
                    next.next_var = next.next_var.max(m + 1);
                }
                next.binding.bind(*v, t.clone());
            }
            self.walk(i + 1, next)?;
        }
        if proven {
            return Ok(());
        }
        if let Goal::Lit(l) = &goal {
            if self.abducibles.matches(l) {
                let l = path.fresh_skolems(l, i);
                if !path.assumed.contains(&l) {
                    path.assumed.push(l);
                }
                return self.walk(i + 1, path);
            }
        }
        Ok(())
    }
}

/// Skolemised forms of `body`, starting from `binding`.
pub fn skolemise(
    kb: &KnowledgeBase,
    body: &Goal,
    binding: &Substitution,
    abducibles: &AbducibleSet,
    limits: SelectionLimits,
) -> Result<Vec<SkolemisedBody>> {
    let index = Abducibles::new(abducibles);
    skolemise_indexed(kb, body, binding, &index, limits)
}

fn skolemise_indexed(
    kb: &KnowledgeBase,
    body: &Goal,
    binding: &Substitution,
    abducibles: &Abducibles,
    limits: SelectionLimits,
) -> Result<Vec<SkolemisedBody>> {
    let mut next_var = body.var_count();
    for (v, t) in binding.iter() {
        next_var = next_var.max(v.0 + 1);
        if let Some(m) = t.max_var() {
            next_var = next_var.max(m + 1);
        }
    }
    let path = Path {
        binding: binding.clone(),
        assumed: Vec::new(),
        deferred: Vec::new(),
        skolems: BTreeMap::new(),
        next_var,
    };
    let mut s = Skolemiser { kb, abducibles, goals: body.conjuncts(), limits, forms: Vec::new() };
    s.walk(0, path)?;
    Ok(s.forms)
}

/// Every grounding of the form's assumptions by abducibles, before any filtering.
pub fn candidate_instances(
    form: &SkolemisedBody,
    abducibles: &AbducibleSet,
    limits: SelectionLimits,
) -> Result<Vec<TotalInstance>> {
    candidates_indexed(form, &Abducibles::new(abducibles), limits)
}

fn candidates_indexed(
    form: &SkolemisedBody,
    abducibles: &Abducibles,
    limits: SelectionLimits,
) -> Result<Vec<TotalInstance>> {
    fn go(
        i: usize,
        form: &SkolemisedBody,
        abducibles: &Abducibles,
        assignment: &mut BTreeMap<Skolem, Term>,
        out: &mut Vec<TotalInstance>,
        cap: usize,
    ) -> Result<()> {
        if i == form.assumed.len() {
            if out.len() == cap {
                return Err(Error::InstanceLimitExceeded(cap));
            }
            let mut assumed: Vec<Literal> =
                form.assumed.iter().map(|l| l.map_terms(|t| close_skolems(t, assignment))).collect();
            assumed.sort();
            assumed.dedup();
            out.push(TotalInstance { assumed, skolems: assignment.clone() });
            return Ok(());
        }
        let open = open_skolems(&form.assumed[i], assignment);
        for a in abducibles.candidates(&open) {
            let Some(s) = unify_literals(&open, a, &Substitution::new()) else { continue };
            let mut added = Vec::new();
            for (v, t) in s.iter() {
                if v.0 >= SKOLEM_VAR {
                    let k = Skolem(v.0 - SKOLEM_VAR);
                    assignment.insert(k, t.clone());
                    added.push(k);
                }
            }
            go(i + 1, form, abducibles, assignment, out, cap)?;
            for k in added {
                assignment.remove(&k);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(0, form, abducibles, &mut BTreeMap::new(), &mut out, limits.max_instances)?;
    Ok(out)
}

/// Instances of the form that do not derive `imp`.
pub fn ground_instances(
    kb: &KnowledgeBase,
    form: &SkolemisedBody,
    abducibles: &AbducibleSet,
    limits: SelectionLimits,
) -> Result<Vec<TotalInstance>> {
    let mut cache = ImpCache::default();
    let mut out = Vec::new();
    for inst in candidate_instances(form, abducibles, limits)? {
        if !cache.violates(kb, &inst.assumed)? {
            out.push(inst);
        }
    }
    Ok(out)
}

/// Per-rule record of one selection run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleTrace {
    /// Position of the rule among the knowledge base's action rules, in file order.
    pub rule: usize,
    pub priority: Option<i64>,
    pub forms: usize,
    pub instances_before: usize,
    pub instances_after: usize,
    /// Surviving instances when AICs are ignored; filled only when auditing.
    pub instances_without_aics: Option<usize>,
    pub fired: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelectionTrace {
    pub rules: Vec<RuleTrace>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub action: Term,
    pub rule: usize,
    pub priority: Option<i64>,
    pub source: Option<Sym>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SelectionOptions {
    pub limits: SelectionLimits,
    /// Also count instances against the knowledge base without its AICs.
    pub audit: bool,
}

/// Action rules in evaluation order: ascending priority, then file order.
pub fn action_rules(kb: &KnowledgeBase) -> Vec<(usize, &Clause)> {
    let mut rules: Vec<(usize, &Clause)> =
        kb.clauses().filter(|(_, t)| *t == Provenance::ActionRule).map(|(c, _)| c).enumerate().collect();
    rules.sort_by_key(|(i, c)| (c.annotations.priority.unwrap_or(i64::MAX), *i));
    rules
}

pub fn select_action(kb: &KnowledgeBase, agent: Sym) -> Result<Option<Selection>> {
    select_action_traced(kb, agent, SelectionOptions::default(), &mut SelectionTrace::default())
}

pub fn select_action_traced(
    kb: &KnowledgeBase,
    agent: Sym,
    opts: SelectionOptions,
    trace: &mut SelectionTrace,
) -> Result<Option<Selection>> {
    let set = abducible_set(kb)?;
    let abducibles = Abducibles::new(&set);
    let bare = if opts.audit && !kb.aics().is_empty() {
        let mut b = kb.clone();
        b.retract_where(|t, _| t == Provenance::Aic);
        Some(b)
    } else {
        None
    };
    let mut imp = ImpCache::default();
    let mut bare_imp = ImpCache::default();
    for (index, rule) in action_rules(kb) {
        let mut rec = RuleTrace { rule: index, priority: rule.annotations.priority, ..RuleTrace::default() };
        if opts.audit {
            rec.instances_without_aics = Some(0);
        }
        let Some(binding) = head_binding(rule, agent) else { continue };
        let forms = skolemise_indexed(kb, &rule.body, &binding, &abducibles, opts.limits)?;
        rec.forms = forms.len();
        let mut chosen = None;
        for form in &forms {
            let candidates = candidates_indexed(form, &abducibles, opts.limits)?;
            rec.instances_before += candidates.len();
            let mut survivors = Vec::new();
            for inst in candidates {
                if opts.audit {
                    let check_kb = bare.as_ref().unwrap_or(kb);
                    let cache = if bare.is_some() { &mut bare_imp } else { &mut imp };
                    if !cache.violates(check_kb, &inst.assumed)? {
                        *rec.instances_without_aics.as_mut().expect("set when auditing") += 1;
                    }
                }
                if !imp.violates(kb, &inst.assumed)? {
                    survivors.push(inst);
                }
            }
            rec.instances_after += survivors.len();
            if chosen.is_none() {
                chosen = unanimous(kb, rule, form, &survivors, opts.limits)?;
            }
        }
        if let Some(action) = chosen {
            rec.fired = true;
            trace.rules.push(rec);
            return Ok(Some(Selection {
                action,
                rule: index,
                priority: rule.annotations.priority,
                source: rule.annotations.source,
            }));
        }
        trace.rules.push(rec);
    }
    Ok(None)
}

/// Binds the rule head's agent argument; `None` if the rule is for someone else.
fn head_binding(rule: &Clause, agent: Sym) -> Option<Substitution> {
    let lit = Literal::new("action", vec![Term::Atom(agent), Term::Var(Var(u32::MAX))]);
    let head = Literal { args: vec![rule.head.args[0].clone(), Term::Var(Var(u32::MAX))], ..rule.head.clone() };
    let s = unify_literals(&head, &lit, &Substitution::new())?;
    let mut out = Substitution::new();
    for (v, t) in s.iter() {
        if v.0 != u32::MAX {
            out.bind(*v, t.clone());
        }
    }
    Some(out)
}

/// The common action of all instances, provided each one proves the body.
fn unanimous(
    kb: &KnowledgeBase,
    rule: &Clause,
    form: &SkolemisedBody,
    instances: &[TotalInstance],
    limits: SelectionLimits,
) -> Result<Option<Term>> {
    if instances.is_empty() {
        return Ok(None);
    }
    let mut action: Option<Term> = None;
    for inst in instances {
        let a = close_skolems(&form.binding.apply(&rule.head.args[1]), &inst.skolems);
        if !a.is_ground() || a.contains_skolem() {
            return Ok(None);
        }
        match &action {
            Some(prev) if *prev != a => return Ok(None),
            _ => action = Some(a),
        }
        let body = rule
            .body
            .map_terms(&mut |t| close_skolems(&form.binding.apply(t), &inst.skolems));
        if body.contains_skolem() || !provable(kb, &inst.assumed, &body, limits.solver)? {
            return Ok(None);
        }
    }
    Ok(action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assimilation::{build_aic, install_aic};
    use crate::parser::{parse_literal, parse_program};
    use crate::Explanation;

    const BASE: &str = "\
        player(me).\nslot(1).\nslot(2).\nslot(3).\n\
        colour(red).\ncolour(blue).\n\
        rank(1).\nrank(2).\nrank(3).\nrank(4).\nrank(5).\n\
        stack(red,3).\nstack(blue,0).\n\
        playable(C,R) :- colour(C), rank(R), stack(C,S), S=R-1.\n\
        imp :- has_card_rank(P,S,R1), has_card_rank(P,S,R2), R1\\==R2.\n\
        ~has_card_rank(P,S,R1) :- has_card_rank(P,S,R2), rank(R1), R1\\==R2.\n\
        imp :- has_card_rank(P,S,R), ~has_card_rank(P,S,R).\n\
        abducible(has_card_rank(P,S,R)) :- player(P), slot(S), rank(R), not has_card_rank(P,S,R).\n";

    fn base_kb(extra: &str) -> KnowledgeBase {
        parse_program(&format!("{BASE}{extra}")).unwrap()
    }

    #[test]
    fn known_colour_forces_rank_by_playability() {
        let kb = base_kb("has_card_colour(me,2,red).\n");
        let set = abducible_set(&kb).unwrap();
        let body = crate::parser::parse_query("has_card_colour(me,S,C), playable(C,R), has_card_rank(me,S,R)").unwrap();
        let forms = skolemise(&kb, &body.goal, &Substitution::new(), &set, SelectionLimits::default()).unwrap();
        assert_eq!(forms.len(), 1);
        assert!(forms[0].skolems.is_empty());
        assert_eq!(forms[0].assumed, vec![parse_literal("has_card_rank(me,2,4)").unwrap()]);
    }

    #[test]
    fn provable_body_gives_one_plain_form() {
        let kb = base_kb("has_card_rank(me,1,2).\n");
        let set = abducible_set(&kb).unwrap();
        let body = crate::parser::parse_query("has_card_rank(me,1,R)").unwrap();
        let forms = skolemise(&kb, &body.goal, &Substitution::new(), &set, SelectionLimits::default()).unwrap();
        assert_eq!(forms.len(), 1);
        assert!(forms[0].skolems.is_empty() && forms[0].assumed.is_empty());
        let inst = ground_instances(&kb, &forms[0], &set, SelectionLimits::default()).unwrap();
        assert_eq!(inst.len(), 1);
        assert!(inst[0].assumed.is_empty());
    }

    #[test]
    fn non_abducible_unprovable_goal_has_no_forms() {
        let kb = base_kb("");
        let set = abducible_set(&kb).unwrap();
        let body = crate::parser::parse_query("p(X)").unwrap();
        let forms = skolemise(&kb, &body.goal, &Substitution::new(), &set, SelectionLimits::default()).unwrap();
        assert!(forms.is_empty());
    }

    #[test]
    fn aic_prunes_rank_instances() {
        let mut kb = base_kb("");
        let set = abducible_set(&kb).unwrap();
        let body = crate::parser::parse_query("has_card_rank(me,2,R)").unwrap();
        let forms = skolemise(&kb, &body.goal, &Substitution::new(), &set, SelectionLimits::default()).unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(ground_instances(&kb, &forms[0], &set, SelectionLimits::default()).unwrap().len(), 5);
        let e = Explanation::new([parse_literal("has_card_rank(me,2,4)").unwrap()]);
        install_aic(&mut kb, build_aic(&[e], None).unwrap());
        let inst = ground_instances(&kb, &forms[0], &set, SelectionLimits::default()).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].assumed, vec![parse_literal("has_card_rank(me,2,4)").unwrap()]);
    }

    #[test]
    fn empty_abducibles_give_no_instances() {
        let kb = base_kb("");
        let set = abducible_set(&kb).unwrap();
        let body = crate::parser::parse_query("has_card_rank(me,2,R)").unwrap();
        let forms = skolemise(&kb, &body.goal, &Substitution::new(), &set, SelectionLimits::default()).unwrap();
        let none = AbducibleSet::default();
        assert!(ground_instances(&kb, &forms[0], &none, SelectionLimits::default()).unwrap().is_empty());
    }

    #[test]
    fn selection_follows_priority_and_unanimity() {
        let kb = base_kb("has_card_colour(me,1,red).\nhas_card_rank(me,1,4).\nplayer_turn(me).\n\
             action(P, play(S)) [priority(1)] :- player_turn(P), has_card_colour(P,S,C), has_card_rank(P,S,R), playable(C,R).\n\
             action(P, discard(1)) [priority(5)] :- player_turn(P).\n");
        let mut trace = SelectionTrace::default();
        let sel = select_action_traced(&kb, Sym::new("me"), SelectionOptions::default(), &mut trace).unwrap().unwrap();
        assert_eq!(sel.action.to_string(), "play(1)");
        assert_eq!(trace.rules.len(), 1);

        // two unknown slots whose instances disagree on the action
        let kb2 = base_kb("player_turn(me).\n\
             action(P, play(S)) [priority(1)] :- player_turn(P), slot(S), has_card_rank(P,S,R), R < 9.\n\
             action(P, discard(1)) [priority(5)] :- player_turn(P).\n");
        let sel = select_action(&kb2, Sym::new("me")).unwrap().unwrap();
        // each slot is its own form, so the first slot's form is unanimous
        assert_eq!(sel.action.to_string(), "play(1)");

        let kb3 = base_kb("player_turn(me).\nmaybe(1).\nmaybe(3).\n\
             action(P, play(S)) [priority(1)] :- player_turn(P), has_card_rank(P,S,4), maybe(S).\n\
             action(P, discard(2)) [priority(5)] :- player_turn(P).\n");
        let sel = select_action(&kb3, Sym::new("me")).unwrap().unwrap();
        assert_eq!(sel.action.to_string(), "discard(2)");
    }

    #[test]
    fn no_rule_gives_none() {
        assert_eq!(select_action(&base_kb(""), Sym::new("me")).unwrap(), None);
    }
}
