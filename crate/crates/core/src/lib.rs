//! Rule-language engine for agents that reason about each other's knowledge.
//!
//! Programs are written in a small first-order language with strong negation,
//! negation as failure, disjunctive bodies and clause annotations. On top of
//! the SLDNF solver sit perspective shifting, abduction of explanations for
//! observed actions, their assimilation as impossibility constraints, and
//! action selection over Skolemised rule bodies.

pub mod abduction;
pub mod assimilation;
pub mod error;
pub mod kb;
pub mod parser;
pub mod selection;
pub mod solver;
pub mod term;
pub mod tom;
pub mod unify;

pub use abduction::{abduce, abducible_set, minimal, AbducibleSet, AbductionLimits, Explanation};
pub use assimilation::{build_aic, install_aic, refine, update_aics, AicOrigin, AicRecord, DnfText};
pub use error::{Error, ParseError, Result};
pub use kb::{InstalledAic, KnowledgeBase, Provenance};
pub use parser::{parse_clauses, parse_literal, parse_program, parse_query, parse_term, validate_clauses, Query};
pub use selection::{
    action_rules, candidate_instances, ground_instances, select_action, select_action_traced, skolemise,
    RuleTrace, Selection, SelectionLimits, SelectionOptions, SelectionTrace, SkolemisedBody, TotalInstance,
};
pub use solver::{entails, entails_with, provable, solve, solve_in, solve_with, violates_imp, ImpCache, SolverLimits, Solutions};
pub use term::{Annotations, ArithOp, Clause, CmpOp, Expr, Goal, Literal, PredKey, Skolem, Sym, Term, Var};
pub use tom::{known_facts, shift_chain, shift_perspective, PerspectiveProgram};
pub use unify::{unify, unify_literals, Substitution};
