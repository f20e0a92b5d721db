//! Hanabi for rule-based agents: a seeded engine, the shipped rulebase and
//! the perceive, abduce, assimilate and act loop.

pub mod audit;
pub mod env;
pub mod rulebase;
pub mod runtime;

pub use env::{
    new_game, new_game_with, observe, Action, ActionEvent, Card, Colour, EnvError, GameState, HintValue, Outcome,
    RuleConfig, COLOURS, SEAT_NAMES,
};
pub use rulebase::{load_rulebase, Rulebase, RulebaseError};
pub use runtime::{
    run_game, run_random_game, Agent, AgentConfig, AgentStats, EventReport, GameConfig, GameError, GameRecord,
    RuntimeError, Table,
};
