//! Indexed clause store with provenance tags and an AIC registry.

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use crate::assimilation::AicRecord;
use crate::term::{Clause, Literal, PredKey, Sym, Term};

/// Category of a stored clause.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Provenance {
    Ontology,
    Percept,
    Tom,
    AbducibleDef,
    ActionRule,
    Aic,
}

impl Provenance {
    /// Tag a loaded clause by its head. Percepts are never loaded from files.
    pub fn classify(c: &Clause) -> Provenance {
        let h = &c.head;
        match (h.negated, h.pred.as_str(), h.args.len()) {
            (false, "knows", 2) => Provenance::Tom,
            (false, "abducible", 1) => Provenance::AbducibleDef,
            (false, "action", 2) => Provenance::ActionRule,
            (false, "imp", 0) if c.annotations.is_abduction() => Provenance::Aic,
            _ => Provenance::Ontology,
        }
    }
}

/// Indexable view of a first argument.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub(crate) enum FirstKey {
    Atom(Sym),
    Int(i64),
    Skolem(u32),
    Functor(Sym, usize),
}

impl FirstKey {
    pub(crate) fn of(t: &Term) -> Option<FirstKey> {
        match t {
            Term::Atom(s) => Some(FirstKey::Atom(*s)),
            Term::Int(n) => Some(FirstKey::Int(*n)),
            Term::Skolem(k) => Some(FirstKey::Skolem(k.0)),
            Term::Compound(f, args) => Some(FirstKey::Functor(*f, args.len())),
            Term::Var(_) => None,
        }
    }
}

#[derive(Clone, Default, Debug)]
struct PredIndex {
    all: Vec<usize>,
    /// Clauses whose first argument is a variable.
    open: Vec<usize>,
    /// Per first-argument key: matching clauses plus the open ones, in order.
    by_first: HashMap<FirstKey, Vec<usize>>,
}

impl PredIndex {
    fn insert(&mut self, id: usize, first: Option<Option<FirstKey>>) {
        self.all.push(id);
        match first {
            Some(Some(k)) => {
                let open = &self.open;
                self.by_first.entry(k).or_insert_with(|| open.clone()).push(id);
            }
            Some(None) => {
                self.open.push(id);
                for ids in self.by_first.values_mut() {
                    ids.push(id);
                }
            }
            None => {}
        }
    }

    fn remove(&mut self, dead: &dyn Fn(usize) -> bool) {
        self.all.retain(|i| !dead(*i));
        self.open.retain(|i| !dead(*i));
        for ids in self.by_first.values_mut() {
            ids.retain(|i| !dead(*i));
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Entry {
    pub(crate) clause: Arc<Clause>,
    pub(crate) tag: Provenance,
    pub(crate) nvars: u32,
}

/// An AIC together with its structured record.
#[derive(Clone, Debug)]
pub struct InstalledAic {
    pub seq: u64,
    pub record: AicRecord,
    id: usize,
}

#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    entries: Vec<Option<Entry>>,
    index: HashMap<PredKey, PredIndex>,
    aics: Vec<InstalledAic>,
    live: usize,
    next_aic_seq: u64,
}

impl KnowledgeBase {
    pub fn new() -> KnowledgeBase {
        KnowledgeBase::default()
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn assert(&mut self, clause: Clause, tag: Provenance) -> usize {
        let id = self.entries.len();
        let key = clause.head.key();
        let first = clause.head.args.first().map(FirstKey::of);
        let nvars = clause.var_count();
        self.entries.push(Some(Entry { clause: Arc::new(clause), tag, nvars }));
        self.index.entry(key).or_default().insert(id, first);
        self.live += 1;
        id
    }

    pub fn assert_fact(&mut self, lit: Literal, tag: Provenance) -> usize {
        self.assert(Clause::fact(lit), tag)
    }

    /// Removes every entry for which `pred` holds; returns the number removed.
    pub fn retract_where(&mut self, mut pred: impl FnMut(Provenance, &Clause) -> bool) -> usize {
        let ids: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.as_ref().is_some_and(|e| pred(e.tag, &e.clause)))
            .map(|(id, _)| id)
            .collect();
        self.retract_ids(&ids)
    }

    fn retract_ids(&mut self, ids: &[usize]) -> usize {
        let mut dead = vec![false; self.entries.len()];
        let mut keys = Vec::new();
        for &id in ids {
            if let Some(e) = self.entries[id].take() {
                keys.push(e.clause.head.key());
                dead[id] = true;
            }
        }
        let removed = keys.len();
        if removed == 0 {
            return 0;
        }
        keys.sort();
        keys.dedup();
        let is_dead = |i: usize| dead[i];
        for k in keys {
            if let Some(ix) = self.index.get_mut(&k) {
                ix.remove(&is_dead);
            }
        }
        self.aics.retain(|a| !dead[a.id]);
        self.live -= removed;
        if self.entries.len() > 2 * self.live + 64 {
            self.compact();
        }
        removed
    }

    /// Drops retracted slots and rebuilds the index; clause order is unchanged.
    fn compact(&mut self) {
        let old = std::mem::take(&mut self.entries);
        self.index.clear();
        let mut remap = vec![usize::MAX; old.len()];
        for (old_id, e) in old.into_iter().enumerate() {
            let Some(e) = e else { continue };
            let id = self.entries.len();
            remap[old_id] = id;
            let first = e.clause.head.args.first().map(FirstKey::of);
            self.index.entry(e.clause.head.key()).or_default().insert(id, first);
            self.entries.push(Some(e));
        }
        for a in &mut self.aics {
            a.id = remap[a.id];
        }
    }

    /// Removes the first stored clause equal to `clause`.
    pub fn retract(&mut self, clause: &Clause) -> bool {
        let mut done = false;
        self.retract_where(|_, c| {
            if !done && c == clause {
                done = true;
                true
            } else {
                false
            }
        }) == 1
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        let Some(ix) = self.index.get(&clause.head.key()) else { return false };
        ix.all.iter().any(|id| self.entry(*id).clause.as_ref() == clause)
    }

    /// Live clauses with their tags, in insertion order.
    pub fn clauses(&self) -> impl Iterator<Item = (&Clause, Provenance)> {
        self.entries.iter().flatten().map(|e| (e.clause.as_ref(), e.tag))
    }

    pub fn count_tag(&self, tag: Provenance) -> usize {
        self.clauses().filter(|(_, t)| *t == tag).count()
    }

    /// Ground facts carrying the given tag.
    pub fn facts(&self, tag: Provenance) -> impl Iterator<Item = &Literal> {
        self.clauses().filter(move |(c, t)| *t == tag && c.is_fact()).map(|(c, _)| &c.head)
    }

    /// Clauses for a key, in order, narrowed by the first argument when known.
    pub(crate) fn candidates(&self, key: &PredKey, first: Option<FirstKey>) -> &[usize] {
        let Some(ix) = self.index.get(key) else { return &[] };
        match first {
            Some(k) => ix.by_first.get(&k).map_or(&ix.open[..], |v| &v[..]),
            None => &ix.all,
        }
    }

    pub(crate) fn entry(&self, id: usize) -> &Entry {
        self.entries[id].as_ref().expect("index refers to a live entry")
    }

    pub(crate) fn install_aic(&mut self, record: AicRecord) -> Option<u64> {
        if self.aics.iter().any(|a| a.record.dnf == record.dnf) {
            return None;
        }
        let id = self.assert(record.clause.clone(), Provenance::Aic);
        let seq = self.next_aic_seq;
        self.next_aic_seq += 1;
        self.aics.push(InstalledAic { seq, record, id });
        Some(seq)
    }

    pub fn aics(&self) -> &[InstalledAic] {
        &self.aics
    }

    /// Retracts the AICs with the given sequence numbers.
    pub fn retract_aic_seqs(&mut self, seqs: &[u64]) -> usize {
        let ids: Vec<usize> =
            self.aics.iter().filter(|a| seqs.contains(&a.seq)).map(|a| a.id).collect();
        self.retract_ids(&ids)
    }
}
