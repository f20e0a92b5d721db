use abditom_hanabi::env::{holds_in, MAX_TOKENS};
use abditom_hanabi::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Plays uniformly random legal actions, returning every visited state and the actions taken.
fn random_playthrough(n: usize, seed: u64) -> (Vec<GameState>, Vec<Action>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
    let mut s = new_game(n, seed).unwrap();
    let mut states = vec![s.clone()];
    let mut actions = Vec::new();
    while !s.is_over() {
        let a = *s.legal_actions().unwrap().choose(&mut rng).unwrap();
        s = s.apply(s.turn, a).unwrap().0;
        actions.push(a);
        states.push(s.clone());
    }
    (states, actions)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_games_keep_every_invariant(n in 2usize..=5, seed in any::<u64>()) {
        let (states, _) = random_playthrough(n, seed);
        for s in &states {
            let v = s.violations();
            prop_assert!(v.is_empty(), "{v:?}");
        }
        prop_assert!(states.last().unwrap().turn_count < 200);
    }

    #[test]
    fn replay_reproduces_the_final_state(n in 2usize..=5, seed in any::<u64>()) {
        let (states, actions) = random_playthrough(n, seed);
        let mut s = new_game(n, seed).unwrap();
        for a in actions {
            s = s.apply(s.turn, a).unwrap().0;
        }
        prop_assert_eq!(&s, states.last().unwrap());
    }

    #[test]
    fn token_and_life_deltas_follow_the_action(n in 2usize..=5, seed in any::<u64>()) {
        let (states, _) = random_playthrough(n, seed);
        let last = states.last().unwrap();
        let mut hints = 0;
        for (before, e) in states.iter().zip(&last.history) {
            let (tokens, lives) = match (e.action, &e.outcome) {
                (Action::Hint { .. }, _) => {
                    hints += 1;
                    (-1, 0)
                }
                (Action::Discard(_), _) => (1, 0),
                (Action::Play(_), Outcome::Played { card, success: true }) => {
                    (i8::from(card.rank == 5 && before.info_tokens < MAX_TOKENS), 0)
                }
                (Action::Play(_), _) => (0, -1),
            };
            prop_assert_eq!((e.tokens_delta, e.lives_delta), (tokens, lives));
        }
        prop_assert_eq!(last.hint_count, hints);
    }

    #[test]
    fn apply_leaves_its_input_untouched(seed in any::<u64>()) {
        let s = new_game(3, seed).unwrap();
        let copy = s.clone();
        for a in s.legal_actions().unwrap() {
            let _ = s.apply(s.turn, a).unwrap();
        }
        prop_assert_eq!(s, copy);
    }

    #[test]
    fn observations_hide_exactly_the_own_unhinted_cards(n in 2usize..=5, seed in any::<u64>(), cut in 0usize..60) {
        let (states, _) = random_playthrough(n, seed);
        let s = &states[cut.min(states.len() - 1)];
        for viewer in 0..n {
            let view = observe(s, viewer);
            prop_assert!(view.iter().all(|l| holds_in(s, l)));
            for p in (0..n).filter(|&p| p != viewer) {
                for slot in s.held_slots(p) {
                    let seen = view.iter().filter(|l| {
                        l.pred.as_str().starts_with("has_card_") && !l.negated
                            && l.args[0].to_string() == SEAT_NAMES[p]
                            && l.args[1].to_string() == slot.to_string()
                    });
                    prop_assert_eq!(seen.count(), 2);
                }
            }
        }
    }
}

#[test]
fn deal_sizes_and_seed_sensitivity() {
    for (n, size) in [(2, 5), (3, 5), (4, 4), (5, 4)] {
        let s = new_game(n, 9).unwrap();
        assert!(s.hands.iter().all(|h| h.iter().flatten().count() == size));
        assert_eq!(s.deck.len(), 50 - n * size);
    }
    assert_ne!(new_game(3, 1).unwrap().deck, new_game(3, 2).unwrap().deck);
    assert_eq!(new_game(3, 1).unwrap(), new_game(3, 1).unwrap());
    assert!(new_game(1, 0).is_err() && new_game(6, 0).is_err());
}

#[test]
fn every_player_gets_one_turn_after_the_last_draw() {
    let (states, _) = random_playthrough(4, 11);
    let last = states.last().unwrap();
    if let Some(i) = states.iter().position(|s| s.deck.is_empty()) {
        if last.lives > 0 && last.score() < 25 {
            assert_eq!(last.turn_count as usize, states[i].turn_count as usize + 4);
        }
    }
}
