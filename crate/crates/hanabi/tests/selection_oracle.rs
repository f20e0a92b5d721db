use abditom_core::{select_action_traced, SelectionOptions, SelectionTrace};
use abditom_hanabi::env::{copies, HintValue};
use abditom_hanabi::*;
use proptest::prelude::*;

/// Identities the holder of `slot` cannot rule out from hints, discards and stacks.
fn candidates(s: &GameState, seat: usize, slot: usize) -> Vec<Card> {
    let h = s.card(seat, slot).unwrap();
    let mut out = Vec::new();
    for c in COLOURS {
        for r in 1..=5u8 {
            let card = Card::new(c, r);
            let fits = h.hinted.iter().all(|v| card.matches(*v)) && !h.hinted_not.iter().any(|v| card.matches(*v));
            let gone = s.discard_pile.iter().filter(|k| **k == card).count() as u8 == copies(r);
            let stacked_five = r == 5 && s.stacks[c.index()] == 5;
            if fits && !gone && !stacked_five {
                out.push(card);
            }
        }
    }
    out
}

fn playable(s: &GameState, c: Card) -> bool {
    s.stacks[c.colour.index()] + 1 == c.rank
}

/// Slots whose every remaining identity is playable.
fn sure_plays(s: &GameState, seat: usize) -> Vec<usize> {
    s.held_slots(seat)
        .into_iter()
        .filter(|&k| {
            let c = candidates(s, seat, k);
            !c.is_empty() && c.iter().all(|&c| playable(s, c))
        })
        .collect()
}

/// A table after `steps` turns of the rule agents playing without abduction.
fn rule_position(n: usize, seed: u64, steps: usize) -> Table {
    let config = AgentConfig { abduction: false, ..AgentConfig::default() };
    let mut t = Table::new(&Rulebase::shipped(), new_game(n, seed).unwrap(), config);
    for _ in 0..steps {
        if t.state.is_over() {
            break;
        }
        let a = t.agents[t.state.turn].take_turn(&mut SelectionTrace::default()).unwrap();
        t.step(a).unwrap();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn play_rules_fire_exactly_on_slots_known_to_be_playable(
        n in 2usize..=5, seed in any::<u64>(), steps in 0usize..40,
    ) {
        let t = rule_position(n, seed, steps);
        let s = &t.state;
        prop_assume!(!s.is_over());
        let a = &t.agents[s.turn];
        let sure = sure_plays(s, a.seat);
        let sel = select_action_traced(&a.kb, a.id, SelectionOptions::default(), &mut SelectionTrace::default())
            .unwrap()
            .unwrap();
        let action = Action::from_term(&sel.action).unwrap();
        let by_play_rule = sel.priority.is_some_and(|p| p <= 2);
        prop_assert_eq!(by_play_rule, !sure.is_empty(), "{} sure={:?}", action, sure);
        if by_play_rule {
            let Action::Play(k) = action else { panic!("play rule chose {action}") };
            prop_assert!(sure.contains(&k));
            prop_assert!(playable(s, s.card(a.seat, k).unwrap().card));
        }
        prop_assert!(s.legal_actions().unwrap().contains(&action), "illegal {}", action);
    }
}

#[test]
fn hints_only_shrink_the_candidate_sets() {
    for seed in 0..30 {
        let mut s = new_game(3, seed).unwrap();
        let before: Vec<usize> = (1..=5).map(|k| candidates(&s, 1, k).len()).collect();
        assert!(before.iter().all(|&n| n == 25));
        s = s.apply(0, Action::Hint { target: 1, value: HintValue::Rank(s.card(1, 1).unwrap().card.rank) }).unwrap().0;
        let after: Vec<usize> = (1..=5).map(|k| candidates(&s, 1, k).len()).collect();
        assert!(after.iter().zip(&before).all(|(a, b)| a < b));
        assert_eq!(after[0], 5);
    }
}

#[test]
fn rule_play_reaches_known_plays() {
    let mut hits = 0;
    for seed in 0..20 {
        let mut t = rule_position(3, seed, 0);
        while !t.state.is_over() {
            hits += !sure_plays(&t.state, t.state.turn).is_empty() as usize;
            let a = t.agents[t.state.turn].take_turn(&mut SelectionTrace::default()).unwrap();
            t.step(a).unwrap();
        }
    }
    assert!(hits >= 50, "{hits}");
}
