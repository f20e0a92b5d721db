//! Refining explanations and installing them as abductive impossibility constraints.

use std::fmt;

use crate::abduction::Explanation;
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::solver::{entails_with, violates_imp, EntailmentCache};
use crate::term::{Annotations, Clause, Goal, Literal, Sym, Term};

/// The observation an AIC was abduced from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AicOrigin {
    pub agent: Sym,
    pub action: Term,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AicRecord {
    pub clause: Clause,
    /// The refined explanations, a disjunction of conjunctions.
    pub dnf: Vec<Explanation>,
    pub origin: Option<AicOrigin>,
}

/// `(a & b) | (c)` rendering of a DNF.
pub struct DnfText<'a>(pub &'a [Explanation]);

impl fmt::Display for DnfText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            f.write_str("(")?;
            for (j, l) in e.literals().iter().enumerate() {
                if j > 0 {
                    f.write_str(" & ")?;
                }
                write!(f, "{l}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl AicRecord {
    /// One diagnostic line: `AIC <seq> from <agent>:<action> :: DNF=<text>`.
    pub fn dump(&self, seq: u64) -> String {
        let (agent, action) = match &self.origin {
            Some(o) => (o.agent.to_string(), o.action.to_string()),
            None => ("?".to_string(), "?".to_string()),
        };
        format!("AIC {seq} from {agent}:{action} :: DNF={}", DnfText(&self.dnf))
    }

    /// The clause body text with `&` between conjuncts, as in rule files.
    pub fn clause_text(&self) -> String {
        let body = match &self.clause.body {
            Goal::And(gs) => gs.iter().map(|g| group(g)).collect::<Vec<_>>().join(" & "),
            g => group(g),
        };
        format!("imp {} :- {body}.", self.clause.annotations)
    }
}

fn group(g: &Goal) -> String {
    match g {
        Goal::Or(_) => format!("({g})"),
        other => other.to_string(),
    }
}

/// Drops entailed literals, then explanations that emptied or are impossible.
pub fn refine(kb: &KnowledgeBase, explanations: &[Explanation]) -> Result<Vec<Explanation>> {
    let mut cache = EntailmentCache::default();
    let mut out: Vec<Explanation> = Vec::new();
    for e in explanations {
        let mut kept = Vec::new();
        for l in e.literals() {
            if !cache.entails(kb, l)? {
                kept.push(l.clone());
            }
        }
        if kept.is_empty() {
            continue;
        }
        let refined = Explanation::new(kept);
        if violates_imp(kb, refined.literals())? {
            continue;
        }
        if !out.contains(&refined) {
            out.push(refined);
        }
    }
    Ok(out)
}

/// Negation of the DNF as a conjunction of disjunctions of complemented literals.
pub fn build_aic(refined: &[Explanation], origin: Option<AicOrigin>) -> Result<AicRecord> {
    if refined.is_empty() {
        return Err(Error::EmptyDnf);
    }
    if refined.iter().any(Explanation::is_empty) {
        return Err(Error::EmptyExplanation);
    }
    let mut dnf = refined.to_vec();
    dnf.sort();
    dnf.dedup();
    let mut conj: Vec<Goal> = dnf
        .iter()
        .map(|e| {
            let mut alts: Vec<Goal> = e.literals().iter().map(|l| Goal::Lit(l.complement())).collect();
            if alts.len() == 1 {
                alts.pop().expect("one element")
            } else {
                Goal::Or(alts)
            }
        })
        .collect();
    let body = if conj.len() == 1 { conj.pop().expect("one element") } else { Goal::And(conj) };
    let clause = Clause::rule(Literal::new("imp", Vec::new()), body).with_annotations(Annotations::abduction());
    Ok(AicRecord { clause, dnf, origin })
}

/// Installs the record; an AIC with the same DNF already present makes this a no-op.
pub fn install_aic(kb: &mut KnowledgeBase, rec: AicRecord) -> Option<u64> {
    kb.install_aic(rec)
}

/// Retracts AICs one of whose disjuncts is entailed by `kb ∪ new_facts`.
pub fn update_aics(kb: &mut KnowledgeBase, new_facts: &[Literal]) -> Result<usize> {
    let mut stale = Vec::new();
    for a in kb.aics() {
        let mut hit = false;
        for e in &a.record.dnf {
            let mut all = true;
            for l in e.literals() {
                if !entails_with(kb, new_facts, l)? {
                    all = false;
                    break;
                }
            }
            if all {
                hit = true;
                break;
            }
        }
        if hit {
            stale.push(a.seq);
        }
    }
    Ok(kb.retract_aic_seqs(&stale))
}
