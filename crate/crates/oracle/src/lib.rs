//! Naive reference evaluators over ground programs, and random program generators.
//!
//! Nothing here shares code with the engine: atoms are plain strings, models
//! are computed bottom-up, and explanations by enumerating every subset.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(pred: &str, args: &[&str]) -> Atom {
        Atom { pred: pred.to_string(), args: args.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Atom,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let body: Vec<String> = self
            .pos
            .iter()
            .map(|a| a.to_string())
            .chain(self.neg.iter().map(|a| format!("not {a}")))
            .collect();
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

pub fn program_text(rules: &[Rule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

/// Least model of a negation-free ground program by naive iteration.
pub fn fixpoint(rules: &[Rule], facts: &[Atom]) -> HashSet<Atom> {
    let mut model: HashSet<Atom> = facts.iter().cloned().collect();
    loop {
        let mut changed = false;
        for r in rules {
            assert!(r.neg.is_empty(), "fixpoint takes negation-free programs");
            if !model.contains(&r.head) && r.pos.iter().all(|a| model.contains(a)) {
                model.insert(r.head.clone());
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

/// Model of an acyclic ground program: atoms decided in `order`, every body
/// atom of a rule for `order[i]` appearing before position `i`.
pub fn ordered_model(rules: &[Rule], facts: &[Atom], order: &[Atom]) -> HashSet<Atom> {
    let mut model: HashSet<Atom> = facts.iter().cloned().collect();
    for a in order {
        if model.contains(a) {
            continue;
        }
        let holds = rules.iter().any(|r| {
            &r.head == a && r.pos.iter().all(|b| model.contains(b)) && r.neg.iter().all(|b| !model.contains(b))
        });
        if holds {
            model.insert(a.clone());
        }
    }
    // heads outside `order` (such as imp) are decided last
    for r in rules {
        if !order.contains(&r.head)
            && r.pos.iter().all(|b| model.contains(b))
            && r.neg.iter().all(|b| !model.contains(b))
        {
            model.insert(r.head.clone());
        }
    }
    model
}

/// A random negation-free ground program over a small universe.
pub struct GroundCase {
    pub rules: Vec<Rule>,
    /// Every atom over the generated predicates and constants.
    pub universe: Vec<Atom>,
}

fn universe(rng: &mut ChaCha8Rng, max_preds: usize, max_consts: usize) -> Vec<Atom> {
    let n_preds = rng.gen_range(1..=max_preds);
    let n_consts = rng.gen_range(1..=max_consts);
    let consts: Vec<String> = (0..n_consts).map(|i| format!("c{i}")).collect();
    let mut out = Vec::new();
    for p in 0..n_preds {
        let arity = rng.gen_range(0..=2);
        let pred = format!("p{p}");
        match arity {
            0 => out.push(Atom { pred, args: vec![] }),
            1 => out.extend(consts.iter().map(|c| Atom { pred: pred.clone(), args: vec![c.clone()] })),
            _ => {
                for a in &consts {
                    for b in &consts {
                        out.push(Atom { pred: pred.clone(), args: vec![a.clone(), b.clone()] });
                    }
                }
            }
        }
    }
    out
}

/// At most `max_clauses` clauses, 3 predicates of arity ≤ 2, at most 8 constants.
/// Clauses only use body atoms earlier than their head in a random order, so
/// top-down evaluation terminates.
pub fn random_ground_program(seed: u64, max_clauses: usize) -> GroundCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let universe = universe(&mut rng, 3, 8);
    let mut order = universe.clone();
    order.shuffle(&mut rng);
    let n = rng.gen_range(1..=max_clauses);
    let mut rules = Vec::new();
    for _ in 0..n {
        let h = rng.gen_range(0..order.len());
        let k = if h == 0 { 0 } else { rng.gen_range(0..=3.min(h)) };
        let pos = (0..k).map(|_| order[rng.gen_range(0..h)].clone()).collect();
        rules.push(Rule { head: order[h].clone(), pos, neg: vec![] });
    }
    GroundCase { rules, universe }
}

/// A random ground abductive theory.
pub struct AbductiveCase {
    pub rules: Vec<Rule>,
    pub abducibles: Vec<Atom>,
    pub query: Vec<(bool, Atom)>,
    pub order: Vec<Atom>,
}

impl AbductiveCase {
    pub fn query_text(&self) -> String {
        let goals: Vec<String> =
            self.query.iter().map(|(pos, a)| if *pos { a.to_string() } else { format!("not {a}") }).collect();
        goals.join(", ")
    }
}

/// Theories with |A| ≤ 8, at most `max_clauses` clauses and queries of ≤ 3 goals.
///
/// Negation only targets atoms whose definitions are negation-free, and `imp`
/// bodies are positive, so consistency is monotone in the hypothesis.
pub fn random_abductive_theory(seed: u64, max_clauses: usize) -> AbductiveCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut universe = universe(&mut rng, 3, 4);
    universe.shuffle(&mut rng);
    universe.truncate(24);
    let n_abd = rng.gen_range(1..=8.min(universe.len()));
    let abducibles: Vec<Atom> = universe[..n_abd].to_vec();
    let mut order = universe.clone();
    order.shuffle(&mut rng);
    let mut tainted: HashSet<Atom> = HashSet::new();
    let n = rng.gen_range(1..=max_clauses);
    let mut rules = Vec::new();
    let heads: Vec<usize> = (0..order.len()).filter(|&i| !abducibles.contains(&order[i])).collect();
    let imp = Atom::new("imp", &[]);
    for _ in 0..n {
        if rng.gen_bool(0.15) {
            let k = rng.gen_range(1..=2);
            let pool: Vec<&Atom> = order.iter().filter(|a| !tainted.contains(*a)).collect();
            let pos = (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
            rules.push(Rule { head: imp.clone(), pos, neg: vec![] });
            continue;
        }
        if heads.is_empty() {
            break;
        }
        let h = heads[rng.gen_range(0..heads.len())];
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        if h > 0 {
            for _ in 0..rng.gen_range(0..=3) {
                let b = order[rng.gen_range(0..h)].clone();
                if rng.gen_bool(0.2) && !tainted.contains(&b) {
                    neg.push(b);
                } else {
                    pos.push(b);
                }
            }
        }
        let head = order[h].clone();
        // later rules may make an atom tainted after it was used positively,
        // so taint propagates over the whole program below
        if !neg.is_empty() {
            tainted.insert(head.clone());
        }
        rules.push(Rule { head, pos, neg });
    }
    // close taint under positive dependency, then drop negations that now
    // target tainted atoms
    loop {
        let mut changed = false;
        for r in &rules {
            if !tainted.contains(&r.head) && r.pos.iter().any(|b| tainted.contains(b)) {
                tainted.insert(r.head.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for r in &mut rules {
        let (keep, moved): (Vec<Atom>, Vec<Atom>) = r.neg.drain(..).partition(|b| !tainted.contains(b));
        r.neg = keep;
        if r.head == imp {
            r.pos.retain(|b| !tainted.contains(b));
            if r.pos.is_empty() {
                r.pos.push(abducibles[0].clone());
            }
        } else {
            r.pos.extend(moved);
        }
    }
    let k = rng.gen_range(1..=3);
    let mut query = Vec::new();
    let defined: Vec<Atom> = rules.iter().filter(|r| r.head != imp).map(|r| r.head.clone()).collect();
    for _ in 0..k {
        let a = if !defined.is_empty() && rng.gen_bool(0.7) {
            defined[rng.gen_range(0..defined.len())].clone()
        } else {
            order[rng.gen_range(0..order.len())].clone()
        };
        let positive = tainted.contains(&a) || !rng.gen_bool(0.15);
        query.push((positive, a));
    }
    AbductiveCase { rules, abducibles, query, order }
}

/// Subset-minimal Δ ⊆ A whose model satisfies the query and not `imp`.
pub fn brute_force_abduce(case: &AbductiveCase) -> Vec<Vec<Atom>> {
    let imp = Atom::new("imp", &[]);
    let n = case.abducibles.len();
    let mut found: Vec<BTreeSet<Atom>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let delta: Vec<Atom> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| case.abducibles[i].clone()).collect();
        let model = ordered_model(&case.rules, &delta, &case.order);
        let holds = case.query.iter().all(|(pos, a)| model.contains(a) == *pos);
        if holds && !model.contains(&imp) {
            found.push(delta.into_iter().collect());
        }
    }
    let mut minimal: Vec<Vec<Atom>> = found
        .iter()
        .filter(|d| !found.iter().any(|e| e != *d && e.is_subset(d)))
        .map(|d| d.iter().cloned().collect())
        .collect();
    minimal.sort();
    minimal
}
