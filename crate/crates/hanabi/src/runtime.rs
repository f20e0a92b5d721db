//! Agents and the game loop: perceive, abduce, assimilate, act.

use abditom_core::{
    abduce, abducible_set, build_aic, entails, install_aic, refine, select_action_traced, shift_perspective,
    update_aics, AbductionLimits, AicOrigin, Explanation, Goal, KnowledgeBase, Literal, Provenance,
    SelectionOptions, SelectionTrace, Sym, Term,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{self, Action, ActionEvent, EnvError, GameState, Outcome, RuleConfig, SEAT_NAMES};
use crate::rulebase::Rulebase;

#[derive(Clone, Copy, Debug)]
pub struct AgentConfig {
    pub abduction: bool,
    pub abduction_limits: AbductionLimits,
    pub selection: SelectionOptions,
}

impl Default for AgentConfig {
    fn default() -> AgentConfig {
        AgentConfig { abduction: true, abduction_limits: AbductionLimits::default(), selection: SelectionOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStats {
    pub explanations: usize,
    pub aic_installed: usize,
    pub aic_retracted: usize,
    pub abduction_errors: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("{agent} selected no action")]
    NoActionSelected { agent: String },
    #[error("{agent} selected {term}, which is not an action")]
    UnknownAction { agent: String, term: String },
    #[error("solver error for {agent}: {source}")]
    Solver { agent: String, source: abditom_core::Error },
    #[error(transparent)]
    Engine(#[from] EnvError),
}

/// What one event did to an agent's program.
#[derive(Clone, Debug, Default)]
pub struct EventReport {
    pub explanations: Vec<Explanation>,
    pub installed: Option<u64>,
    pub retracted: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Agent {
    pub id: Sym,
    pub seat: usize,
    pub kb: KnowledgeBase,
    pub config: AgentConfig,
    pub stats: AgentStats,
}

fn card_literals(player: usize, slot: usize, card: env::Card) -> [Literal; 2] {
    let (p, s) = (Term::atom(SEAT_NAMES[player]), Term::Int(slot as i64));
    [
        Literal::new("has_card_colour", vec![p.clone(), s.clone(), Term::atom(card.colour.name())]),
        Literal::new("has_card_rank", vec![p, s, Term::Int(card.rank as i64)]),
    ]
}

/// The card slot a literal talks about, if it is a card literal.
fn card_slot(l: &Literal) -> Option<(Sym, i64)> {
    match (l.pred.as_str(), &l.args[..]) {
        ("has_card_colour" | "has_card_rank", [Term::Atom(p), Term::Int(s), _]) => Some((*p, *s)),
        _ => None,
    }
}

impl Agent {
    pub fn new(rulebase: &Rulebase, n_players: usize, seat: usize, config: AgentConfig) -> Agent {
        Agent {
            id: Sym::new(SEAT_NAMES[seat]),
            seat,
            kb: rulebase.agent_kb(n_players),
            config,
            stats: AgentStats::default(),
        }
    }

    /// Replaces the percepts; returns the facts that were not perceived before.
    pub fn perceive(&mut self, percepts: &[Literal]) -> Vec<Literal> {
        let old: std::collections::HashSet<Literal> = self.kb.facts(Provenance::Percept).cloned().collect();
        self.kb.retract_where(|t, _| t == Provenance::Percept);
        let mut fresh = Vec::new();
        for l in percepts {
            if !old.contains(l) {
                fresh.push(l.clone());
            }
            self.kb.assert_fact(l.clone(), Provenance::Percept);
        }
        fresh
    }

    fn solver_error(&self, source: abditom_core::Error) -> RuntimeError {
        RuntimeError::Solver { agent: self.id.to_string(), source }
    }

    /// Retracts AICs whose every disjunct is contradicted by what is now known.
    fn retract_contradicted(&mut self) -> Result<usize, abditom_core::Error> {
        let mut dead = Vec::new();
        for a in self.kb.aics() {
            let mut fires = true;
            for e in &a.record.dnf {
                let mut hit = false;
                for l in e.literals() {
                    if entails(&self.kb, &l.complement())? {
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    fires = false;
                    break;
                }
            }
            if fires {
                dead.push(a.seq);
            }
        }
        Ok(self.kb.retract_aic_seqs(&dead))
    }

    fn explain(&self, event: &ActionEvent) -> Result<Vec<Explanation>, abditom_core::Error> {
        let actor = Sym::new(SEAT_NAMES[event.actor]);
        let shifted = shift_perspective(&self.kb, actor)?;
        let set = abducible_set(&shifted.kb)?;
        let query = Goal::lit(Literal::new("action", vec![Term::Atom(actor), event.action.to_term()]));
        abduce(&shifted.kb, &set, &query, &self.config.abduction_limits)
    }

    /// Assimilates a broadcast event together with the view observed after it.
    ///
    /// Explanations are computed from the program as it stood when the action
    /// was chosen; refinement uses the refreshed program.
    pub fn on_event(&mut self, event: &ActionEvent, view: &[Literal]) -> Result<EventReport, RuntimeError> {
        let mut report = EventReport::default();
        let raw = if self.config.abduction && event.actor != self.seat {
            match self.explain(event) {
                Ok(e) => Some(e),
                Err(e) => {
                    log::warn!("{}: abduction for {} failed: {e}", self.id, event.action);
                    self.stats.abduction_errors += 1;
                    report.error = Some(e.to_string());
                    None
                }
            }
        } else {
            None
        };

        let slot = match (event.action, &event.outcome) {
            (Action::Play(s), Outcome::Played { card, .. }) | (Action::Discard(s), Outcome::Discarded { card }) => {
                Some((s, *card))
            }
            _ => None,
        };
        if let Some((s, card)) = slot {
            let revealed = card_literals(event.actor, s, card);
            report.retracted += update_aics(&mut self.kb, &revealed).map_err(|e| self.solver_error(e))?;
            // the slot now holds a new card, so constraints about it are obsolete
            let key = (Sym::new(SEAT_NAMES[event.actor]), s as i64);
            let stale: Vec<u64> = self
                .kb
                .aics()
                .iter()
                .filter(|a| a.record.dnf.iter().flat_map(|e| e.literals()).any(|l| card_slot(l) == Some(key)))
                .map(|a| a.seq)
                .collect();
            report.retracted += self.kb.retract_aic_seqs(&stale);
        }
        let fresh = self.perceive(view);
        report.retracted += update_aics(&mut self.kb, &fresh).map_err(|e| self.solver_error(e))?;
        report.retracted += self.retract_contradicted().map_err(|e| self.solver_error(e))?;

        if let Some(raw) = raw {
            self.stats.explanations += raw.len();
            let refined = refine(&self.kb, &raw).map_err(|e| self.solver_error(e))?;
            if !refined.is_empty() && refined.iter().all(|e| !e.is_empty()) {
                let origin = AicOrigin { agent: Sym::new(SEAT_NAMES[event.actor]), action: event.action.to_term() };
                let rec = build_aic(&refined, Some(origin)).map_err(|e| self.solver_error(e))?;
                report.installed = install_aic(&mut self.kb, rec);
            }
            report.explanations = raw;
        }
        if report.installed.is_some() {
            self.stats.aic_installed += 1;
        }
        self.stats.aic_retracted += report.retracted;
        Ok(report)
    }

    pub fn take_turn(&self, trace: &mut SelectionTrace) -> Result<Action, RuntimeError> {
        let sel = select_action_traced(&self.kb, self.id, self.config.selection, trace)
            .map_err(|e| self.solver_error(e))?
            .ok_or_else(|| RuntimeError::NoActionSelected { agent: self.id.to_string() })?;
        Action::from_term(&sel.action)
            .ok_or_else(|| RuntimeError::UnknownAction { agent: self.id.to_string(), term: sel.action.to_string() })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GameConfig {
    pub agent: AgentConfig,
    pub rules: RuleConfig,
    /// Keep the per-turn trace and AIC diagnostics in the record.
    pub trace: bool,
}

impl Default for GameConfig {
    fn default() -> GameConfig {
        GameConfig { agent: AgentConfig::default(), rules: RuleConfig::default(), trace: false }
    }
}

/// Summary of one finished game, written as one JSON line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub seed: u64,
    pub players: usize,
    pub score: u8,
    pub hints: u32,
    pub turns: u32,
    pub aic_installed: usize,
    pub aic_retracted: usize,
    /// Installed AICs that the true state contradicts.
    pub violations: usize,
    pub explanations: usize,
    pub abduction_errors: usize,
    /// Surviving instances per turn with and without AICs, when audited.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

impl GameRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialise")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{source}\n{}", trace.join("\n"))]
pub struct GameError {
    pub source: RuntimeError,
    pub trace: Vec<String>,
}

/// Whether the true state satisfies at least one disjunct of the DNF.
pub fn dnf_holds(s: &GameState, dnf: &[Explanation]) -> bool {
    dnf.iter().any(|e| e.literals().iter().all(|l| env::holds_in(s, l)))
}

/// A world of agents around one game.
pub struct Table {
    pub state: GameState,
    pub agents: Vec<Agent>,
}

impl Table {
    pub fn new(rulebase: &Rulebase, state: GameState, config: AgentConfig) -> Table {
        let n = state.n_players();
        let mut agents: Vec<Agent> = (0..n).map(|p| Agent::new(rulebase, n, p, config)).collect();
        for a in &mut agents {
            a.perceive(&env::observe(&state, a.seat));
        }
        Table { state, agents }
    }

    /// Applies an action and delivers the event to every seat in order.
    pub fn step(&mut self, action: Action) -> Result<(ActionEvent, Vec<EventReport>), RuntimeError> {
        let (next, event) = self.state.apply(self.state.turn, action)?;
        self.state = next;
        let mut reports = Vec::with_capacity(self.agents.len());
        for a in &mut self.agents {
            let view = env::observe(&self.state, a.seat);
            reports.push(a.on_event(&event, &view)?);
        }
        Ok((event, reports))
    }
}

pub fn run_game(rulebase: &Rulebase, n_players: usize, seed: u64, config: &GameConfig) -> Result<GameRecord, GameError> {
    let state = env::new_game_with(n_players, seed, config.rules)
        .map_err(|e| GameError { source: e.into(), trace: Vec::new() })?;
    let mut table = Table::new(rulebase, state, config.agent);
    let mut rec = GameRecord { seed, players: n_players, ..GameRecord::default() };
    let mut trace = Vec::new();
    let fail = |source: RuntimeError, trace: &Vec<String>| GameError { source, trace: trace.clone() };
    while !table.state.is_over() {
        let seat = table.state.turn;
        let mut sel_trace = SelectionTrace::default();
        let action = table.agents[seat].take_turn(&mut sel_trace).map_err(|e| fail(e, &trace))?;
        if config.agent.selection.audit {
            for r in &sel_trace.rules {
                rec.instances.push((r.instances_after, r.instances_without_aics.unwrap_or(r.instances_after)));
            }
        }
        let (event, reports) = table.step(action).map_err(|e| fail(e, &trace))?;
        if config.trace {
            let fired = sel_trace.rules.last().filter(|r| r.fired);
            let rule = fired.map_or("-".to_string(), |r| format!("{:?}", r.priority.unwrap_or(-1)));
            trace.push(format!("{} rule={rule}", event.trace_line()));
        }
        for (agent, report) in table.agents.iter().zip(&reports) {
            if let Some(seq) = report.installed {
                let aic = agent.kb.aics().iter().find(|a| a.seq == seq).expect("just installed");
                if !dnf_holds(&table.state, &aic.record.dnf) {
                    rec.violations += 1;
                }
                if config.trace {
                    trace.push(format!("  [{}] {}", agent.id, aic.record.dump(seq)));
                }
            }
            if config.trace && report.retracted > 0 {
                trace.push(format!("  [{}] retracted {} AIC(s)", agent.id, report.retracted));
            }
        }
    }
    rec.score = table.state.score();
    rec.hints = table.state.hint_count;
    rec.turns = table.state.turn_count;
    for a in &table.agents {
        rec.aic_installed += a.stats.aic_installed;
        rec.aic_retracted += a.stats.aic_retracted;
        rec.explanations += a.stats.explanations;
        rec.abduction_errors += a.stats.abduction_errors;
    }
    if config.trace {
        trace.push(format!("over={:?} score={}", table.state.over_reason().expect("loop ended"), rec.score));
        rec.trace = trace;
    }
    Ok(rec)
}

/// Baseline: uniformly random legal actions, drawn from a stream keyed by the seed.
pub fn run_random_game(n_players: usize, seed: u64, rules: RuleConfig) -> Result<GameRecord, EnvError> {
    let mut s = env::new_game_with(n_players, seed, rules)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_ba5e_11e5);
    while !s.is_over() {
        let actions = s.legal_actions()?;
        let a = *actions.choose(&mut rng).expect("a game not over has a legal action");
        s = s.apply(s.turn, a)?.0;
    }
    Ok(GameRecord { seed, players: n_players, score: s.score(), hints: s.hint_count, turns: s.turn_count, ..GameRecord::default() })
}
