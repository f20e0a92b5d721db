//! Perspective-shifted programs: the observer's model of another agent's program.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, Provenance};
use crate::solver::{solve, SolverLimits};
use crate::term::{Goal, Literal, Sym, Term, Var};

#[derive(Clone, Debug)]
pub struct PerspectiveProgram {
    pub kb: KnowledgeBase,
    /// Agents traversed, starting with the first shift target.
    pub chain: Vec<Sym>,
}

/// Ground facts `F` with `kb ⊨ knows(target, F)`, in solution order.
pub fn known_facts(kb: &KnowledgeBase, target: Sym) -> Result<Vec<Literal>> {
    let goal = Goal::Lit(Literal::new("knows", vec![Term::Atom(target), Term::Var(Var(0))]));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for sol in solve(kb, &goal, SolverLimits::default()) {
        let sol = sol?;
        let t = sol.get(Var(0)).cloned().unwrap_or(Term::Var(Var(0)));
        match Literal::from_term(&t) {
            Some(l) if l.is_ground() => {
                if seen.insert(l.clone()) {
                    out.push(l);
                }
            }
            _ => return Err(Error::NonGroundKnowledge(t.to_string())),
        }
    }
    Ok(out)
}

/// Replaces percepts by what `target` is known to know, and drops AICs.
pub fn shift_perspective(kb: &KnowledgeBase, target: Sym) -> Result<PerspectiveProgram> {
    let facts = known_facts(kb, target)?;
    let mut shifted = kb.clone();
    shifted.retract_where(|tag, _| matches!(tag, Provenance::Percept | Provenance::Aic));
    for f in facts {
        shifted.assert_fact(f, Provenance::Percept);
    }
    Ok(PerspectiveProgram { kb: shifted, chain: vec![target] })
}

pub fn shift_chain(kb: &KnowledgeBase, targets: &[Sym]) -> Result<PerspectiveProgram> {
    let (first, rest) = targets.split_first().ok_or(Error::EmptyChain)?;
    let mut p = shift_perspective(kb, *first)?;
    for t in rest {
        let next = shift_perspective(&p.kb, *t)?;
        p.kb = next.kb;
        p.chain.push(*t);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_literal, parse_program};
    use crate::solver::entails;

    fn alice_kb() -> KnowledgeBase {
        let mut kb = parse_program(
            "player(alice).\nplayer(bob).\nplayer(cathy).\n\
             knows(Agj, has_card_colour(Agk,S,C)) :- has_card_colour(Agk,S,C), player(Agj), Agj\\==Agk.",
        )
        .unwrap();
        kb.assert_fact(parse_literal("has_card_colour(bob,4,blue)").unwrap(), Provenance::Percept);
        kb
    }

    #[test]
    fn others_see_the_card() {
        let p = shift_perspective(&alice_kb(), Sym::new("cathy")).unwrap();
        assert!(entails(&p.kb, &parse_literal("has_card_colour(bob,4,blue)").unwrap()).unwrap());
    }

    #[test]
    fn holder_does_not_see_the_card() {
        let p = shift_perspective(&alice_kb(), Sym::new("bob")).unwrap();
        assert!(!entails(&p.kb, &parse_literal("has_card_colour(bob,4,blue)").unwrap()).unwrap());
        assert_eq!(p.kb.count_tag(Provenance::Ontology), 3);
    }

    #[test]
    fn chains() {
        let kb = alice_kb();
        assert_eq!(shift_chain(&kb, &[]).unwrap_err(), Error::EmptyChain);
        let p = shift_chain(&kb, &[Sym::new("cathy"), Sym::new("alice")]).unwrap();
        assert_eq!(p.chain, vec![Sym::new("cathy"), Sym::new("alice")]);
        assert_eq!(p.kb.count_tag(Provenance::Percept), 1);
    }

    #[test]
    fn open_knowledge_is_an_error() {
        let kb = parse_program("knows(A, p(X)) :- p(X).\np(Y).").unwrap();
        assert!(matches!(shift_perspective(&kb, Sym::new("a")), Err(Error::NonGroundKnowledge(_))));
    }
}
