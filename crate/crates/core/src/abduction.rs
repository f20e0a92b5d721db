//! Abducible sets and minimal abductive explanations.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::solver::{provable, violates_imp, Machine, SolverLimits};
use crate::term::{Goal, Literal, PredKey, Term, Var};
use crate::unify::{unify_literals, Substitution};

/// Ground literals that may be assumed.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct AbducibleSet {
    lits: BTreeSet<Literal>,
}

impl AbducibleSet {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> AbducibleSet {
        AbducibleSet { lits: lits.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.lits.contains(l)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.lits.iter()
    }

    /// Members unifying with `pattern`, treating its variables as free.
    pub fn matching<'s>(&'s self, pattern: &'s Literal) -> impl Iterator<Item = &'s Literal> + 's {
        self.lits.iter().filter(move |a| unify_literals(pattern, a, &Substitution::new()).is_some())
    }

    pub(crate) fn by_key(&self) -> HashMap<PredKey, Vec<Literal>> {
        let mut out: HashMap<PredKey, Vec<Literal>> = HashMap::default();
        for l in &self.lits {
            out.entry(l.key()).or_default().push(l.clone());
        }
        out
    }
}

/// All ground `F` with `kb ⊨ abducible(F)`.
///
/// Each clause body is split after the shortest prefix that grounds the
/// head; the rest is then proved once per head rather than enumerated.
pub fn abducible_set(kb: &KnowledgeBase) -> Result<AbducibleSet> {
    let key = Literal::new("abducible", vec![Term::Var(Var(0))]).key();
    let mut lits = BTreeSet::new();
    for (c, _) in kb.clauses() {
        if c.head.key() != key {
            continue;
        }
        let head = &c.head.args[0];
        let body: &[Goal] = match &c.body {
            Goal::And(gs) => gs,
            g => std::slice::from_ref(g),
        };
        let mut wanted = Vec::new();
        head.collect_vars(&mut wanted);
        let mut split = 0;
        while !wanted.is_empty() && split < body.len() {
            let mut seen = Vec::new();
            body[split].for_each_term(&mut |t| t.collect_vars(&mut seen));
            wanted.retain(|v| !seen.contains(v));
            split += 1;
        }
        let prefix = Goal::And(body[..split].to_vec());
        let nvars = c.var_count();
        for sol in crate::solver::solve_in(kb, &[], &prefix, nvars, SolverLimits::default()) {
            let sol = sol?;
            let t = sol.apply(head);
            let rest = Goal::And(body[split..].iter().map(|g| g.map_terms(&mut |x| sol.apply(x))).collect());
            if t.is_ground() {
                let l = Literal::from_term(&t).ok_or_else(|| Error::NonGroundAbducible(t.to_string()))?;
                if !lits.contains(&l) && provable(kb, &[], &rest, SolverLimits::default())? {
                    lits.insert(l);
                }
                continue;
            }
            for more in crate::solver::solve_in(kb, &[], &rest, nvars.max(t.max_var().map_or(0, |v| v + 1)), SolverLimits::default()) {
                let t = more?.apply(&t);
                match Literal::from_term(&t) {
                    Some(l) if l.is_ground() => {
                        lits.insert(l);
                    }
                    _ => return Err(Error::NonGroundAbducible(t.to_string())),
                }
            }
        }
    }
    Ok(AbducibleSet { lits })
}

/// A set of ground literals, kept sorted and duplicate-free.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Explanation {
    lits: Vec<Literal>,
}

impl Explanation {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Explanation {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort();
        lits.dedup();
        Explanation { lits }
    }

    pub fn empty() -> Explanation {
        Explanation::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.lits.binary_search(l).is_ok()
    }

    pub fn is_subset_of(&self, other: &Explanation) -> bool {
        self.lits.iter().all(|l| other.contains(l))
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbductionLimits {
    pub solver: SolverLimits,
    pub max_candidates: usize,
}

impl Default for AbductionLimits {
    fn default() -> AbductionLimits {
        AbductionLimits { solver: SolverLimits::default(), max_candidates: 10_000 }
    }
}

/// Keeps the subset-minimal members, in canonical order.
pub fn minimal(mut sets: Vec<Explanation>) -> Vec<Explanation> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut keep: Vec<Explanation> = Vec::new();
    for s in sets {
        if !keep.iter().any(|k| k.is_subset_of(&s)) {
            keep.push(s);
        }
    }
    keep.sort();
    keep
}

/// Minimal explanations Δ ⊆ `abducibles` with `kb ∪ Δ ⊨ query` and `kb ∪ Δ ⊭ imp`.
pub fn abduce(
    kb: &KnowledgeBase,
    abducibles: &AbducibleSet,
    query: &Goal,
    limits: &AbductionLimits,
) -> Result<Vec<Explanation>> {
    if violates_imp(kb, &[])? {
        return Ok(Vec::new());
    }
    if provable(kb, &[], query, limits.solver)? {
        return Ok(vec![Explanation::empty()]);
    }
    let mut machine = Machine::new(kb, &[], query, 0, limits.solver).abductive(abducibles.iter().cloned());
    let mut seen: BTreeSet<Explanation> = BTreeSet::new();
    let mut accepted = Vec::new();
    while machine.next_solution()? {
        let delta = Explanation::new(machine.delta().iter().cloned());
        if !seen.insert(delta.clone()) {
            continue;
        }
        if seen.len() > limits.max_candidates {
            return Err(Error::ExplanationLimitExceeded(limits.max_candidates));
        }
        // the derivation may have relied on negations that later assumptions defeat
        if provable(kb, delta.literals(), query, limits.solver)? && !violates_imp(kb, delta.literals())? {
            machine.add_found(delta.literals().to_vec());
            accepted.push(delta);
        }
    }
    Ok(minimal(accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_literal, parse_program, parse_query};

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    const COLOUR_ABDUCIBLE: &str = "abducible(has_card_colour(P,S,C1)) :- player(P), slot(S), colour(C1), colour(C2), C2\\==C1, not has_card_colour(P,S,C2), not ~has_card_colour(P, S, C1).";

    #[test]
    fn known_colour_blocks_alternatives() {
        let text = format!(
            "player(cathy).\nslot(5).\ncolour(red).\ncolour(blue).\nhas_card_colour(cathy,5,red).\n{COLOUR_ABDUCIBLE}"
        );
        let set = abducible_set(&parse_program(&text).unwrap()).unwrap();
        assert!(!set.contains(&lit("has_card_colour(cathy,5,blue)")));
    }

    #[test]
    fn no_abducible_clauses_gives_empty_set() {
        assert!(abducible_set(&parse_program("p(a).").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn open_abducible_is_an_error() {
        let kb = parse_program("abducible(p(X)) :- true.").unwrap();
        assert!(matches!(abducible_set(&kb), Err(Error::NonGroundAbducible(_))));
    }

    #[test]
    fn hint_implies_rank_four() {
        let kb = parse_program(
            "colour(red).\nrank(1).\nrank(2).\nrank(3).\nrank(4).\nrank(5).\nstack(red,3).\n\
             has_card_colour(cathy,5,red).\n\
             playable(C,R) :- colour(C), rank(R), stack(C,S), S=R-1.\n\
             action(alice, hint(cathy, C)) :- has_card_colour(cathy,5,C), has_card_rank(cathy,5,R), playable(C,R).\n\
             imp :- has_card_rank(P,S,R1), has_card_rank(P,S,R2), R1\\==R2.",
        )
        .unwrap();
        let set = AbducibleSet::new((1..=5).map(|r| {
            Literal::new("has_card_rank", vec![Term::atom("cathy"), 5.into(), Term::Int(r)])
        }));
        let q = parse_query("action(alice, hint(cathy, red))").unwrap();
        let out = abduce(&kb, &set, &q.goal, &AbductionLimits::default()).unwrap();
        assert_eq!(out, vec![Explanation::new([lit("has_card_rank(cathy,5,4)")])]);
    }

    #[test]
    fn provable_query_needs_nothing() {
        let kb = parse_program("p :- q.\nq.").unwrap();
        let set = AbducibleSet::new([lit("q")]);
        let out = abduce(&kb, &set, &parse_query("p").unwrap().goal, &AbductionLimits::default()).unwrap();
        assert_eq!(out, vec![Explanation::empty()]);
    }

    #[test]
    fn unreachable_query_has_no_explanation() {
        let kb = parse_program("p :- q, r.").unwrap();
        let set = AbducibleSet::new([lit("q")]);
        let out = abduce(&kb, &set, &parse_query("p").unwrap().goal, &AbductionLimits::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn minimality_and_consistency() {
        let kb = parse_program("p :- a.\np :- a, b.\np :- c.\nimp :- c.").unwrap();
        let set = AbducibleSet::new([lit("a"), lit("b"), lit("c")]);
        let out = abduce(&kb, &set, &parse_query("p").unwrap().goal, &AbductionLimits::default()).unwrap();
        assert_eq!(out, vec![Explanation::new([lit("a")])]);
    }

    #[test]
    fn candidate_cap() {
        let kb = parse_program("p :- a(X), b(Y).").unwrap();
        let set = AbducibleSet::new((0..10).flat_map(|i| {
            [Literal::new("a", vec![Term::Int(i)]), Literal::new("b", vec![Term::Int(i)])]
        }));
        let limits = AbductionLimits { max_candidates: 50, ..AbductionLimits::default() };
        let r = abduce(&kb, &set, &parse_query("p").unwrap().goal, &limits);
        assert_eq!(r, Err(Error::ExplanationLimitExceeded(50)));
    }
}
