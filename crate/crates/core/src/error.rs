use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("knowledge clause does not call its fact in the body: {0}")]
    TomRestrictionViolated(String),
    #[error("abducible predicate {0} is also the head of a rule")]
    AbduciblePredicateConflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("resolution depth limit {0} exceeded")]
    DepthExceeded(u32),
    #[error("negation as failure on non-ground goal: {0}")]
    FlounderedNaf(String),
    #[error("arithmetic on unbound variable in: {0}")]
    Instantiation(String),
    #[error("abducible/1 produced a non-ground fact: {0}")]
    NonGroundAbducible(String),
    #[error("more than {0} candidate explanations")]
    ExplanationLimitExceeded(usize),
    #[error("knows/2 produced a non-ground or non-literal fact: {0}")]
    NonGroundKnowledge(String),
    #[error("perspective chain is empty")]
    EmptyChain,
    #[error("cannot build a constraint from an empty set of explanations")]
    EmptyDnf,
    #[error("explanation with no literals cannot be installed")]
    EmptyExplanation,
    #[error("more than {0} Skolemised forms")]
    FormLimitExceeded(usize),
    #[error("more than {0} total instances")]
    InstanceLimitExceeded(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
