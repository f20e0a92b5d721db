//! The shipped Hanabi rule files and their loader.

use std::path::{Path, PathBuf};

use abditom_core::{parse_clauses, validate_clauses, Clause, KnowledgeBase, Literal, ParseError, Provenance, Term};

use crate::env::SEAT_NAMES;

pub const FILE_NAMES: [&str; 4] = ["ontology.lp", "tom.lp", "abducibles.lp", "strategy.lp"];

const SHIPPED: [&str; 4] = [
    include_str!("../rules/ontology.lp"),
    include_str!("../rules/tom.lp"),
    include_str!("../rules/abducibles.lp"),
    include_str!("../rules/strategy.lp"),
];

#[derive(Debug, thiserror::Error)]
pub enum RulebaseError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
    #[error("{0}")]
    Invalid(ParseError),
    #[error("no action rule carries source(fallback)")]
    MissingFallbackRule,
    #[error("action rule without priority(N): {0}")]
    UnannotatedActionRule(String),
}

/// Parsed, validated rule files shared by every agent.
#[derive(Clone, Debug)]
pub struct Rulebase {
    pub files: Vec<(String, usize)>,
    template: KnowledgeBase,
}

impl Rulebase {
    /// The shipped rule files, compiled into the binary.
    pub fn shipped() -> Rulebase {
        let sources: Vec<(String, String)> =
            FILE_NAMES.iter().zip(SHIPPED).map(|(n, t)| (n.to_string(), t.to_string())).collect();
        Rulebase::from_sources(&sources).expect("shipped rulebase is valid")
    }

    pub fn from_sources(sources: &[(String, String)]) -> Result<Rulebase, RulebaseError> {
        let mut all: Vec<Clause> = Vec::new();
        let mut files = Vec::new();
        for (name, text) in sources {
            let clauses =
                parse_clauses(text).map_err(|source| RulebaseError::Parse { file: name.clone(), source })?;
            files.push((name.clone(), clauses.len()));
            all.extend(clauses);
        }
        validate_clauses(&all).map_err(RulebaseError::Invalid)?;
        let mut fallback = false;
        for c in &all {
            if Provenance::classify(c) != Provenance::ActionRule {
                continue;
            }
            if c.annotations.priority.is_none() {
                return Err(RulebaseError::UnannotatedActionRule(c.to_string()));
            }
            fallback |= c.annotations.source.is_some_and(|s| s.as_str() == "fallback");
        }
        if !fallback {
            return Err(RulebaseError::MissingFallbackRule);
        }
        let mut template = KnowledgeBase::new();
        for c in all {
            let tag = Provenance::classify(&c);
            template.assert(c, tag);
        }
        Ok(Rulebase { files, template })
    }

    /// Knowledge base for one seat of an `n_players` game, without percepts.
    pub fn agent_kb(&self, n_players: usize) -> KnowledgeBase {
        let mut kb = self.template.clone();
        for name in &SEAT_NAMES[..n_players] {
            kb.assert_fact(Literal::new("player", vec![Term::atom(name)]), Provenance::Ontology);
        }
        kb
    }

    pub fn template(&self) -> &KnowledgeBase {
        &self.template
    }
}

/// Reads the four rule files from `dir`.
pub fn load_rulebase(dir: &Path) -> Result<Rulebase, RulebaseError> {
    let mut sources = Vec::new();
    for name in FILE_NAMES {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).map_err(|source| RulebaseError::Io { path, source })?;
        sources.push((name.to_string(), text));
    }
    Rulebase::from_sources(&sources)
}
