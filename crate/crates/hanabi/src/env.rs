//! Seeded Hanabi engine.
//!
//! Decks are shuffled with ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`)
//! and a Fisher-Yates pass (`SliceRandom::shuffle`), so a seed reproduces the
//! same deal on every platform. Slots are numbered from 1 and a vacated slot
//! is refilled in place.

use std::fmt;

use abditom_core::{Literal, Term};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAX_TOKENS: u8 = 8;
pub const MAX_LIVES: u8 = 3;
pub const SEAT_NAMES: [&str; 5] = ["alice", "bob", "cathy", "dave", "erin"];

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Colour {
    Red,
    Blue,
    Green,
    White,
    Yellow,
}

pub const COLOURS: [Colour; 5] = [Colour::Red, Colour::Blue, Colour::Green, Colour::White, Colour::Yellow];

impl Colour {
    pub fn name(self) -> &'static str {
        match self {
            Colour::Red => "red",
            Colour::Blue => "blue",
            Colour::Green => "green",
            Colour::White => "white",
            Colour::Yellow => "yellow",
        }
    }

    pub fn from_name(s: &str) -> Option<Colour> {
        COLOURS.into_iter().find(|c| c.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Card {
    pub colour: Colour,
    pub rank: u8,
}

impl Card {
    pub fn new(colour: Colour, rank: u8) -> Card {
        assert!((1..=5).contains(&rank), "rank out of range: {rank}");
        Card { colour, rank }
    }

    pub fn matches(&self, v: HintValue) -> bool {
        match v {
            HintValue::Colour(c) => self.colour == c,
            HintValue::Rank(r) => self.rank == r,
        }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.colour, self.rank)
    }
}

/// Copies of each rank in one colour.
pub fn copies(rank: u8) -> u8 {
    match rank {
        1 => 3,
        5 => 1,
        _ => 2,
    }
}

/// The 50-card deck in canonical order.
pub fn full_deck() -> Vec<Card> {
    let mut out = Vec::with_capacity(50);
    for c in COLOURS {
        for r in 1..=5 {
            for _ in 0..copies(r) {
                out.push(Card::new(c, r));
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum HintValue {
    Colour(Colour),
    Rank(u8),
}

impl HintValue {
    pub fn to_term(self) -> Term {
        match self {
            HintValue::Colour(c) => Term::atom(c.name()),
            HintValue::Rank(r) => Term::Int(r as i64),
        }
    }

    pub fn from_term(t: &Term) -> Option<HintValue> {
        match t {
            Term::Atom(s) => Colour::from_name(s.as_str()).map(HintValue::Colour),
            Term::Int(n) if (1..=5).contains(n) => Some(HintValue::Rank(*n as u8)),
            _ => None,
        }
    }
}

impl fmt::Display for HintValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HintValue::Colour(c) => write!(f, "{c}"),
            HintValue::Rank(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Action {
    Play(usize),
    Discard(usize),
    Hint { target: usize, value: HintValue },
}

impl Action {
    /// `play(S)`, `discard(S)` or `hint(Name, V)`, as written in action rules.
    pub fn to_term(&self) -> Term {
        match self {
            Action::Play(s) => Term::compound("play", vec![Term::Int(*s as i64)]),
            Action::Discard(s) => Term::compound("discard", vec![Term::Int(*s as i64)]),
            Action::Hint { target, value } => {
                Term::compound("hint", vec![Term::atom(SEAT_NAMES[*target]), value.to_term()])
            }
        }
    }

    pub fn from_term(t: &Term) -> Option<Action> {
        let Term::Compound(f, args) = t else { return None };
        let slot = |t: &Term| match t {
            Term::Int(n) if *n >= 1 => Some(*n as usize),
            _ => None,
        };
        match (f.as_str(), &args[..]) {
            ("play", [s]) => slot(s).map(Action::Play),
            ("discard", [s]) => slot(s).map(Action::Discard),
            ("hint", [Term::Atom(p), v]) => {
                let target = seat_of(p.as_str())?;
                Some(Action::Hint { target, value: HintValue::from_term(v)? })
            }
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

pub fn seat_of(name: &str) -> Option<usize> {
    SEAT_NAMES.iter().position(|n| *n == name)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Outcome {
    Played { card: Card, success: bool },
    Discarded { card: Card },
    Hinted { touched: Vec<usize> },
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Played { card, success: true } => write!(f, "played({card})"),
            Outcome::Played { card, success: false } => write!(f, "misplayed({card})"),
            Outcome::Discarded { card } => write!(f, "discarded({card})"),
            Outcome::Hinted { touched } => {
                let s: Vec<String> = touched.iter().map(|t| t.to_string()).collect();
                write!(f, "touched({})", s.join(","))
            }
        }
    }
}

/// A public action and its outcome, identical for every observer.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ActionEvent {
    pub turn: u32,
    pub actor: usize,
    pub action: Action,
    pub outcome: Outcome,
    pub tokens_delta: i8,
    pub lives_delta: i8,
    /// Tokens, lives and score after the action.
    pub tokens: u8,
    pub lives: u8,
    pub score: u8,
}

impl ActionEvent {
    pub fn trace_line(&self) -> String {
        format!(
            "t={} actor={} action={} outcome={} tokens={} lives={} score={}",
            self.turn, SEAT_NAMES[self.actor], self.action, self.outcome, self.tokens, self.lives, self.score
        )
    }
}

/// Rule variants; the defaults follow the official rules.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RuleConfig {
    pub discard_at_max_tokens: bool,
    pub empty_hints: bool,
    pub token_on_completed_stack: bool,
    pub final_round: bool,
    pub draw_after_misplay: bool,
}

impl Default for RuleConfig {
    fn default() -> RuleConfig {
        RuleConfig {
            discard_at_max_tokens: false,
            empty_hints: false,
            token_on_completed_stack: true,
            final_round: true,
            draw_after_misplay: true,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("invalid player count {0}, expected 2 to 5")]
    InvalidPlayerCount(usize),
    #[error("game is over")]
    GameOver,
    #[error("illegal action: {0}")]
    IllegalAction(String),
}

/// A card in a hand with everything hints have said about it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HeldCard {
    pub card: Card,
    pub drawn_at: u32,
    pub hinted: Vec<HintValue>,
    pub hinted_not: Vec<HintValue>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OverReason {
    LivesLost,
    Perfect,
    FinalRoundDone,
    NoLegalAction,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GameState {
    pub rules: RuleConfig,
    pub deck: Vec<Card>,
    pub hands: Vec<Vec<Option<HeldCard>>>,
    /// Top rank per colour, indexed by `Colour::index`.
    pub stacks: [u8; 5],
    pub info_tokens: u8,
    pub lives: u8,
    pub discard_pile: Vec<Card>,
    pub turn: usize,
    pub turn_count: u32,
    pub hint_count: u32,
    pub history: Vec<ActionEvent>,
    /// Turns left once the deck has run out.
    pub final_turns: Option<usize>,
}

pub fn hand_size(n_players: usize) -> usize {
    if n_players <= 3 {
        5
    } else {
        4
    }
}

pub fn new_game(n_players: usize, seed: u64) -> Result<GameState, EnvError> {
    new_game_with(n_players, seed, RuleConfig::default())
}

pub fn new_game_with(n_players: usize, seed: u64, rules: RuleConfig) -> Result<GameState, EnvError> {
    if !(2..=5).contains(&n_players) {
        return Err(EnvError::InvalidPlayerCount(n_players));
    }
    let mut deck = full_deck();
    deck.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // draw from the end, so reverse to deal the shuffled order front first
    deck.reverse();
    let mut s = GameState {
        rules,
        deck,
        hands: vec![Vec::new(); n_players],
        stacks: [0; 5],
        info_tokens: MAX_TOKENS,
        lives: MAX_LIVES,
        discard_pile: Vec::new(),
        turn: 0,
        turn_count: 0,
        hint_count: 0,
        history: Vec::new(),
        final_turns: None,
    };
    for p in 0..n_players {
        for _ in 0..hand_size(n_players) {
            let card = s.deck.pop().expect("deck holds enough cards for the deal");
            s.hands[p].push(Some(HeldCard { card, drawn_at: 0, hinted: Vec::new(), hinted_not: Vec::new() }));
        }
    }
    Ok(s)
}

impl GameState {
    pub fn n_players(&self) -> usize {
        self.hands.len()
    }

    pub fn card(&self, player: usize, slot: usize) -> Option<&HeldCard> {
        self.hands.get(player)?.get(slot.checked_sub(1)?)?.as_ref()
    }

    /// Occupied slots of a hand, ascending.
    pub fn held_slots(&self, player: usize) -> Vec<usize> {
        self.hands[player].iter().enumerate().filter(|(_, c)| c.is_some()).map(|(i, _)| i + 1).collect()
    }

    pub fn score(&self) -> u8 {
        if self.lives == 0 {
            0
        } else {
            self.stacks.iter().sum()
        }
    }

    pub fn over_reason(&self) -> Option<OverReason> {
        if self.lives == 0 {
            Some(OverReason::LivesLost)
        } else if self.stacks.iter().all(|&s| s == 5) {
            Some(OverReason::Perfect)
        } else if self.final_turns == Some(0) {
            Some(OverReason::FinalRoundDone)
        } else if self.legal_moves().is_empty() {
            Some(OverReason::NoLegalAction)
        } else {
            None
        }
    }

    pub fn is_over(&self) -> bool {
        self.over_reason().is_some()
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, EnvError> {
        if self.is_over() {
            return Err(EnvError::GameOver);
        }
        Ok(self.legal_moves())
    }

    fn legal_moves(&self) -> Vec<Action> {
        if self.lives == 0 || self.final_turns == Some(0) {
            return Vec::new();
        }
        let me = self.turn;
        let slots = self.held_slots(me);
        let mut out: Vec<Action> = slots.iter().map(|&s| Action::Play(s)).collect();
        if self.info_tokens < MAX_TOKENS || self.rules.discard_at_max_tokens {
            out.extend(slots.iter().map(|&s| Action::Discard(s)));
        }
        if self.info_tokens >= 1 {
            for target in (0..self.n_players()).filter(|&t| t != me) {
                let cards: Vec<Card> = self.hands[target].iter().flatten().map(|h| h.card).collect();
                for c in COLOURS {
                    if self.rules.empty_hints || cards.iter().any(|k| k.colour == c) {
                        out.push(Action::Hint { target, value: HintValue::Colour(c) });
                    }
                }
                for r in 1..=5 {
                    if self.rules.empty_hints || cards.iter().any(|k| k.rank == r) {
                        out.push(Action::Hint { target, value: HintValue::Rank(r) });
                    }
                }
            }
        }
        out
    }

    fn check_legal(&self, actor: usize, a: &Action) -> Result<(), EnvError> {
        if self.is_over() {
            return Err(EnvError::GameOver);
        }
        if actor != self.turn {
            return Err(EnvError::IllegalAction(format!("{} acted out of turn", SEAT_NAMES[actor])));
        }
        if !self.legal_moves().contains(a) {
            return Err(EnvError::IllegalAction(format!("{a} by {}", SEAT_NAMES[actor])));
        }
        Ok(())
    }

    fn draw_into(&mut self, player: usize, slot: usize) {
        let drawn_at = self.turn_count + 1;
        self.hands[player][slot - 1] =
            self.deck.pop().map(|card| HeldCard { card, drawn_at, hinted: Vec::new(), hinted_not: Vec::new() });
        if self.deck.is_empty() && self.final_turns.is_none() && self.rules.final_round {
            // the drawing turn is counted down below, so each player gets one more
            self.final_turns = Some(self.n_players() + 1);
        }
    }

    /// Applies a legal action for `actor`; the input state is left untouched.
    pub fn apply(&self, actor: usize, a: Action) -> Result<(GameState, ActionEvent), EnvError> {
        self.check_legal(actor, &a)?;
        let mut s = self.clone();
        let (tokens0, lives0) = (s.info_tokens, s.lives);
        let outcome = match a {
            Action::Play(slot) => {
                let held = s.hands[actor][slot - 1].take().expect("legal play slot is occupied");
                let card = held.card;
                let success = s.stacks[card.colour.index()] + 1 == card.rank;
                if success {
                    s.stacks[card.colour.index()] = card.rank;
                    if card.rank == 5 && s.rules.token_on_completed_stack && s.info_tokens < MAX_TOKENS {
                        s.info_tokens += 1;
                    }
                } else {
                    s.lives -= 1;
                    s.discard_pile.push(card);
                }
                if success || s.rules.draw_after_misplay {
                    s.draw_into(actor, slot);
                }
                Outcome::Played { card, success }
            }
            Action::Discard(slot) => {
                let held = s.hands[actor][slot - 1].take().expect("legal discard slot is occupied");
                s.discard_pile.push(held.card);
                s.info_tokens = (s.info_tokens + 1).min(MAX_TOKENS);
                s.draw_into(actor, slot);
                Outcome::Discarded { card: held.card }
            }
            Action::Hint { target, value } => {
                s.info_tokens -= 1;
                s.hint_count += 1;
                let mut touched = Vec::new();
                for (i, h) in s.hands[target].iter_mut().enumerate() {
                    let Some(h) = h else { continue };
                    if h.card.matches(value) {
                        touched.push(i + 1);
                        if !h.hinted.contains(&value) {
                            h.hinted.push(value);
                        }
                    } else if !h.hinted_not.contains(&value) {
                        h.hinted_not.push(value);
                    }
                }
                Outcome::Hinted { touched }
            }
        };
        if let Some(n) = s.final_turns.as_mut() {
            *n -= 1;
        }
        let event = ActionEvent {
            turn: s.turn_count,
            actor,
            action: a,
            outcome,
            tokens_delta: s.info_tokens as i8 - tokens0 as i8,
            lives_delta: s.lives as i8 - lives0 as i8,
            tokens: s.info_tokens,
            lives: s.lives,
            score: s.score(),
        };
        s.history.push(event.clone());
        s.turn_count += 1;
        s.turn = (s.turn + 1) % s.n_players();
        Ok((s, event))
    }

    /// Every card still in play or out of it, for conservation checks.
    pub fn all_cards(&self) -> Vec<Card> {
        let mut out = self.deck.clone();
        out.extend(self.hands.iter().flatten().flatten().map(|h| h.card));
        out.extend(self.discard_pile.iter().copied());
        for c in COLOURS {
            for r in 1..=self.stacks[c.index()] {
                out.push(Card::new(c, r));
            }
        }
        out
    }

    /// Broken engine invariants, empty for a sound state.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut cards = self.all_cards();
        cards.sort();
        let mut deck = full_deck();
        deck.sort();
        if cards != deck {
            out.push(format!("card conservation: {} cards accounted for", cards.len()));
        }
        if self.info_tokens > MAX_TOKENS {
            out.push(format!("info tokens {}", self.info_tokens));
        }
        if self.lives > MAX_LIVES {
            out.push(format!("lives {}", self.lives));
        }
        if self.score() > 25 || self.stacks.iter().any(|&s| s > 5) {
            out.push(format!("score {} with stacks {:?}", self.score(), self.stacks));
        }
        let size = hand_size(self.n_players());
        for (p, h) in self.hands.iter().enumerate() {
            if h.len() != size {
                out.push(format!("{} has {} slots", SEAT_NAMES[p], h.len()));
            }
        }
        for viewer in 0..self.n_players() {
            for l in observe(self, viewer) {
                if !holds_in(self, &l) {
                    out.push(format!("{} observes false {l}", SEAT_NAMES[viewer]));
                }
                if l.pred.as_str().starts_with("has_card_") && !l.negated && seat_of(&l.args[0].to_string()) == Some(viewer) {
                    let slot = l.args[1].to_string().parse().ok();
                    let hinted = slot.and_then(|s| self.card(viewer, s)).is_some_and(|h| {
                        h.hinted.iter().any(|v| card_facts(viewer, slot.unwrap_or(0), *v, false) == l)
                    });
                    if !hinted {
                        out.push(format!("{} sees its own unhinted {l}", SEAT_NAMES[viewer]));
                    }
                }
            }
        }
        out
    }

    /// The unhinted card held longest, lowest slot on ties.
    pub fn chop(&self, player: usize) -> Option<usize> {
        self.hands[player]
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.as_ref().filter(|h| h.hinted.is_empty()).map(|h| (h.drawn_at, i + 1)))
            .min()
            .map(|(_, s)| s)
    }
}

fn name(p: usize) -> Term {
    Term::atom(SEAT_NAMES[p])
}

fn int(n: impl Into<i64>) -> Term {
    Term::Int(n.into())
}

fn card_facts(p: usize, slot: usize, v: HintValue, negated: bool) -> Literal {
    let (pred, val) = match v {
        HintValue::Colour(c) => ("has_card_colour", Term::atom(c.name())),
        HintValue::Rank(r) => ("has_card_rank", int(r)),
    };
    Literal { negated, ..Literal::new(pred, vec![name(p), int(slot as i64), val]) }
}

/// Ground facts player `viewer` perceives, in a fixed order.
///
/// Own cards appear only through hints; everything else public is included.
pub fn observe(s: &GameState, viewer: usize) -> Vec<Literal> {
    let mut out = Vec::new();
    out.push(Literal::new("player_turn", vec![name(s.turn)]));
    out.push(Literal::new("info_tokens", vec![int(s.info_tokens)]));
    out.push(Literal::new("lives", vec![int(s.lives)]));
    out.push(Literal::new("deck_size", vec![int(s.deck.len() as i64)]));
    for c in COLOURS {
        out.push(Literal::new("stack", vec![Term::atom(c.name()), int(s.stacks[c.index()])]));
    }
    let mut pile = s.discard_pile.clone();
    pile.sort();
    for chunk in pile.chunk_by(|a, b| a == b) {
        let k = chunk[0];
        out.push(Literal::new("discarded", vec![Term::atom(k.colour.name()), int(k.rank), int(chunk.len() as i64)]));
    }
    for p in 0..s.n_players() {
        for (i, h) in s.hands[p].iter().enumerate() {
            let Some(h) = h else { continue };
            let slot = i + 1;
            out.push(Literal::new("holds", vec![name(p), int(slot as i64)]));
            if p != viewer {
                out.push(card_facts(p, slot, HintValue::Colour(h.card.colour), false));
                out.push(card_facts(p, slot, HintValue::Rank(h.card.rank), false));
            }
            for v in &h.hinted {
                out.push(Literal::new("hinted", vec![name(p), int(slot as i64), v.to_term()]));
                if p == viewer {
                    out.push(card_facts(p, slot, *v, false));
                }
            }
            for v in &h.hinted_not {
                out.push(Literal::new("hinted_not", vec![name(p), int(slot as i64), v.to_term()]));
                if p == viewer {
                    out.push(card_facts(p, slot, *v, true));
                }
            }
        }
        if let Some(c) = s.chop(p) {
            out.push(Literal::new("chop", vec![name(p), int(c as i64)]));
        }
    }
    out
}

/// Whether a percept-vocabulary literal holds in the full state.
pub fn holds_in(s: &GameState, l: &Literal) -> bool {
    let a = &l.args;
    let atom = |t: &Term| match t {
        Term::Atom(x) => Some(x.as_str()),
        _ => None,
    };
    let num = |t: &Term| match t {
        Term::Int(n) => Some(*n),
        _ => None,
    };
    let seat = |t: &Term| atom(t).and_then(seat_of).filter(|&p| p < s.n_players());
    let held = |p: Option<usize>, slot: Option<i64>| -> Option<&HeldCard> {
        let (p, slot) = (p?, slot?);
        s.card(p, usize::try_from(slot).ok()?)
    };
    let positive = match (l.pred.as_str(), a.len()) {
        ("player_turn", 1) => seat(&a[0]) == Some(s.turn),
        ("info_tokens", 1) => num(&a[0]) == Some(s.info_tokens as i64),
        ("lives", 1) => num(&a[0]) == Some(s.lives as i64),
        ("deck_size", 1) => num(&a[0]) == Some(s.deck.len() as i64),
        ("stack", 2) => match atom(&a[0]).and_then(Colour::from_name) {
            Some(c) => num(&a[1]) == Some(s.stacks[c.index()] as i64),
            None => false,
        },
        ("discarded", 3) => match (atom(&a[0]).and_then(Colour::from_name), num(&a[1]), num(&a[2])) {
            (Some(c), Some(r), Some(n)) => {
                s.discard_pile.iter().filter(|k| k.colour == c && k.rank as i64 == r).count() as i64 == n
            }
            _ => false,
        },
        ("holds", 2) => held(seat(&a[0]), num(&a[1])).is_some(),
        ("chop", 2) => match (seat(&a[0]), num(&a[1])) {
            (Some(p), Some(k)) => s.chop(p).map(|c| c as i64) == Some(k),
            _ => false,
        },
        ("has_card_colour", 3) => match (held(seat(&a[0]), num(&a[1])), atom(&a[2]).and_then(Colour::from_name)) {
            (Some(h), Some(c)) => h.card.colour == c,
            _ => false,
        },
        ("has_card_rank", 3) => match (held(seat(&a[0]), num(&a[1])), num(&a[2])) {
            (Some(h), Some(r)) => h.card.rank as i64 == r,
            _ => false,
        },
        ("hinted", 3) | ("hinted_not", 3) => match (held(seat(&a[0]), num(&a[1])), HintValue::from_term(&a[2])) {
            (Some(h), Some(v)) if l.pred.as_str() == "hinted" => h.hinted.contains(&v),
            (Some(h), Some(v)) => h.hinted_not.contains(&v),
            _ => false,
        },
        _ => return false,
    };
    if l.negated {
        // strong negation only makes sense for card identities of held cards
        matches!(l.pred.as_str(), "has_card_colour" | "has_card_rank")
            && held(seat(&a[0]), num(&a[1])).is_some()
            && !positive
    } else {
        positive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use abditom_core::parse_literal;

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    #[test]
    fn deal_sizes() {
        let s = new_game(3, 42).unwrap();
        assert!(s.hands.iter().all(|h| h.len() == 5));
        assert_eq!(s.deck.len(), 35);
        let s = new_game(5, 7).unwrap();
        assert!(s.hands.iter().all(|h| h.len() == 4));
        assert_eq!(s.deck.len(), 30);
        assert_eq!(new_game(1, 0).unwrap_err(), EnvError::InvalidPlayerCount(1));
        assert_eq!(s.score(), 0);
        assert!(!s.is_over());
    }

    #[test]
    fn deck_composition() {
        let d = full_deck();
        assert_eq!(d.len(), 50);
        for c in COLOURS {
            let ranks: Vec<u8> = d.iter().filter(|k| k.colour == c).map(|k| k.rank).collect();
            assert_eq!(ranks, vec![1, 1, 1, 2, 2, 3, 3, 4, 4, 5]);
        }
    }

    fn set_hand(s: &mut GameState, p: usize, cards: &[(Colour, u8)]) {
        s.hands[p] = cards
            .iter()
            .map(|&(c, r)| Some(HeldCard { card: Card::new(c, r), drawn_at: 0, hinted: vec![], hinted_not: vec![] }))
            .collect();
    }

    #[test]
    fn misplay_costs_a_life() {
        let mut s = new_game(3, 1).unwrap();
        s.stacks[Colour::Blue.index()] = 2;
        set_hand(&mut s, 0, &[(Colour::Blue, 4), (Colour::Red, 1), (Colour::Red, 1), (Colour::Red, 1), (Colour::Red, 2)]);
        let (t, ev) = s.apply(0, Action::Play(1)).unwrap();
        assert_eq!(t.lives, 2);
        assert_eq!(t.discard_pile, vec![Card::new(Colour::Blue, 4)]);
        assert_eq!(ev.lives_delta, -1);
        assert!(t.card(0, 1).is_some());
    }

    #[test]
    fn discard_recovers_a_token() {
        let mut s = new_game(3, 1).unwrap();
        s.info_tokens = 5;
        let (t, _) = s.apply(0, Action::Discard(2)).unwrap();
        assert_eq!(t.info_tokens, 6);
        s.info_tokens = 8;
        assert!(matches!(s.apply(0, Action::Discard(2)), Err(EnvError::IllegalAction(_))));
    }

    #[test]
    fn hint_touches_matching_slots() {
        let mut s = new_game(3, 1).unwrap();
        use Colour::*;
        set_hand(&mut s, 1, &[(Red, 1), (White, 2), (White, 3), (Blue, 1), (White, 4)]);
        let (t, ev) = s.apply(0, Action::Hint { target: 1, value: HintValue::Colour(White) }).unwrap();
        assert_eq!(ev.outcome, Outcome::Hinted { touched: vec![2, 3, 5] });
        assert_eq!(t.info_tokens, 7);
        assert_eq!(t.hint_count, 1);
        let bob = observe(&t, 1);
        assert!(bob.contains(&lit("has_card_colour(bob,2,white)")));
        assert!(bob.contains(&lit("~has_card_colour(bob,1,white)")));
        assert!(bob.contains(&lit("~has_card_colour(bob,4,white)")));
        assert!(!bob.contains(&lit("has_card_rank(bob,2,2)")));
        assert!(observe(&t, 0).contains(&lit("has_card_rank(bob,2,2)")));
        assert_eq!(
            ev.trace_line(),
            "t=0 actor=alice action=hint(bob,white) outcome=touched(2,3,5) tokens=7 lives=3 score=0"
        );
    }

    #[test]
    fn legal_action_count() {
        let mut s = new_game(3, 1).unwrap();
        use Colour::*;
        // three colours and four ranks, then two colours and two ranks
        set_hand(&mut s, 1, &[(Red, 1), (Red, 2), (Blue, 3), (Green, 4), (Green, 1)]);
        set_hand(&mut s, 2, &[(White, 1), (White, 1), (Yellow, 2), (Yellow, 2), (White, 2)]);
        assert_eq!(s.legal_actions().unwrap().len(), 16);
        s.info_tokens = 0;
        assert!(s.legal_actions().unwrap().iter().all(|a| !matches!(a, Action::Hint { .. })));
    }

    #[test]
    fn scoring() {
        let mut s = new_game(2, 3).unwrap();
        s.stacks = [5; 5];
        assert_eq!(s.score(), 25);
        assert!(s.is_over());
        s.stacks = [5, 5, 5, 2, 0];
        s.lives = 0;
        assert_eq!(s.score(), 0);
        assert_eq!(s.over_reason(), Some(OverReason::LivesLost));
    }

    #[test]
    fn action_terms_round_trip() {
        for a in [
            Action::Play(3),
            Action::Discard(1),
            Action::Hint { target: 2, value: HintValue::Colour(Colour::Red) },
            Action::Hint { target: 1, value: HintValue::Rank(4) },
        ] {
            assert_eq!(Action::from_term(&a.to_term()), Some(a));
        }
        assert_eq!(Action::Hint { target: 2, value: HintValue::Colour(Colour::Red) }.to_string(), "hint(cathy,red)");
    }

    #[test]
    fn final_round_gives_everyone_one_turn() {
        let mut s = new_game(2, 5).unwrap();
        s.deck.truncate(1);
        s.info_tokens = 5;
        let (s, _) = s.apply(0, Action::Discard(1)).unwrap();
        assert!(s.deck.is_empty());
        assert!(!s.is_over());
        let (s, _) = s.apply(1, Action::Discard(1)).unwrap();
        assert!(!s.is_over());
        let (s, _) = s.apply(0, Action::Discard(2)).unwrap();
        assert_eq!(s.over_reason(), Some(OverReason::FinalRoundDone));
    }
}
