//! Checks of the perspective and pruning axioms on live game positions.

use abditom_core::{
    abducible_set, action_rules, build_aic, entails, ground_instances, install_aic, shift_perspective, skolemise,
    unify, KnowledgeBase, Literal, Provenance, Result, SelectionLimits, Substitution, Sym, Term,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{full_deck, new_game, Card, Colour, GameState, HeldCard};

/// The position reached after up to `steps` random legal actions.
pub fn random_position(n_players: usize, seed: u64, steps: usize) -> GameState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = new_game(n_players, seed).expect("valid player count");
    for _ in 0..steps {
        if s.is_over() {
            break;
        }
        let a = *s.legal_actions().expect("not over").choose(&mut rng).expect("a legal action exists");
        s = s.apply(s.turn, a).expect("legal").0;
    }
    s
}

/// Three players, red stack on 3, Cathy holding red 4 in slot 5 and no other red card.
pub fn red_four_position() -> GameState {
    use Colour::*;
    let hands = [
        [Card::new(Blue, 1), Card::new(Green, 2), Card::new(White, 3), Card::new(Yellow, 1), Card::new(Blue, 3)],
        [Card::new(Green, 1), Card::new(White, 1), Card::new(Yellow, 2), Card::new(Blue, 2), Card::new(Green, 3)],
        [Card::new(Blue, 4), Card::new(Green, 4), Card::new(White, 4), Card::new(Yellow, 4), Card::new(Red, 4)],
    ];
    let mut s = new_game(3, 7).expect("valid player count");
    let mut deck = full_deck();
    let out = (1..=3).map(|r| Card::new(Red, r)).chain(hands.iter().flatten().copied());
    for c in out {
        let i = deck.iter().position(|d| *d == c).expect("card available");
        deck.remove(i);
    }
    s.deck = deck;
    s.hands = hands
        .iter()
        .map(|h| h.iter().map(|&card| Some(HeldCard { card, drawn_at: 0, hinted: Vec::new(), hinted_not: Vec::new() })).collect())
        .collect();
    s.stacks = [3, 0, 0, 0, 0];
    s
}

/// Percepts of the shifted program that `kb` itself does not entail.
pub fn unentailed_shift_percepts(kb: &KnowledgeBase, target: Sym) -> Result<Vec<Literal>> {
    let shifted = shift_perspective(kb, target)?;
    let mut out = Vec::new();
    for f in shifted.kb.facts(Provenance::Percept) {
        if !entails(kb, f)? {
            out.push(f.clone());
        }
    }
    Ok(out)
}

/// Whether an instance assumes a different value for the card `lit` names.
fn clashes(assumed: &[Literal], lit: &Literal) -> bool {
    assumed.iter().any(|a| a.pred == lit.pred && a.args[..2] == lit.args[..2] && a.args[2] != lit.args[2])
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruningCheck {
    /// Instances surviving without the AIC.
    pub before: usize,
    /// Instances surviving with it.
    pub after: usize,
    /// Rules where the survivors differ from the non-clashing ones.
    pub mismatches: Vec<String>,
}

/// Compares, rule by rule, the instances surviving with the singleton AIC for
/// `lit` installed against those surviving without it and not clashing with `lit`.
pub fn singleton_aic_pruning(kb: &KnowledgeBase, agent: Sym, lit: &Literal) -> Result<PruningCheck> {
    let mut with = kb.clone();
    install_aic(&mut with, build_aic(&[abditom_core::Explanation::new([lit.clone()])], None)?);
    let limits = SelectionLimits::default();
    let set = abducible_set(kb)?;
    let set_with = abducible_set(&with)?;
    let mut out = PruningCheck::default();
    for (index, rule) in action_rules(kb) {
        let Some(binding) = unify(&rule.head.args[0], &Term::Atom(agent), &Substitution::new()) else { continue };
        let forms = skolemise(kb, &rule.body, &binding, &set, limits)?;
        let forms_with = skolemise(&with, &rule.body, &binding, &set_with, limits)?;
        if forms.len() != forms_with.len() {
            out.mismatches.push(format!("rule {index}: {} forms without the AIC, {} with", forms.len(), forms_with.len()));
            continue;
        }
        for (f, fw) in forms.iter().zip(&forms_with) {
            let bare = ground_instances(kb, f, &set, limits)?;
            out.before += bare.len();
            let expected: Vec<_> = bare.into_iter().filter(|i| !clashes(&i.assumed, lit)).collect();
            let got = ground_instances(&with, fw, &set_with, limits)?;
            out.after += got.len();
            if got != expected {
                out.mismatches.push(format!("rule {index}: {} instances, expected {}", got.len(), expected.len()));
            }
        }
    }
    Ok(out)
}
