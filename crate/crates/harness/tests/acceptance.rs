//! One PASS/FAIL line per acceptance criterion. Criterion numbers given as
//! arguments restrict the run to those criteria.

#[path = "../../core/tests/common/oracle_checks.rs"]
mod oracle_checks;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use abditom_core::{Literal, SelectionTrace, Sym, Term};
use abditom_hanabi::audit::{random_position, red_four_position, singleton_aic_pruning, unentailed_shift_percepts};
use abditom_hanabi::*;
use abditom_harness::seeds::splitmix64;
use abditom_harness::stats::{sign_test, Summary64};
use abditom_harness::sweep::{run_sweep, Policy, Row, SweepConfig, SweepOutcome};

type Outcome = Result<String, String>;

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    if t < limit {
        Ok(format!("{detail} in {t:.2?}"))
    } else {
        Err(format!("{detail} but took {t:.2?}, limit {limit:?}"))
    }
}

fn logic_oracle() -> Outcome {
    let start = Instant::now();
    for seed in 0..1000 {
        oracle_checks::check_ground_program(splitmix64(seed))?;
    }
    within(Duration::from_secs(10), start, "1000 ground programs agree with the fixpoint".into())
}

fn abduction_oracle() -> Outcome {
    let start = Instant::now();
    for seed in 0..500 {
        oracle_checks::check_abduction(splitmix64(seed))?;
    }
    within(Duration::from_secs(60), start, "500 theories agree with subset enumeration".into())
}

fn red_hint_table() -> (Table, Vec<EventReport>) {
    let rb = Rulebase::shipped();
    let mut table = Table::new(&rb, red_four_position(), AgentConfig::default());
    let (_, reports) = table.step(Action::Hint { target: 2, value: HintValue::Colour(Colour::Red) }).expect("legal hint");
    (table, reports)
}

fn running_example() -> Outcome {
    let start = Instant::now();
    let (mut table, reports) = red_hint_table();
    let seq = reports[2].installed.ok_or("cathy installed no AIC")?;
    let clause = table.agents[2].kb.aics().iter().find(|a| a.seq == seq).unwrap().record.clause.to_string();
    let expected = "imp [source(abduction)] :- ~has_card_rank(cathy,5,4).";
    if clause != expected {
        return Err(format!("AIC is {clause}"));
    }
    let chop = table.state.chop(1).ok_or("bob has no chop")?;
    table.step(Action::Discard(chop)).map_err(|e| e.to_string())?;
    let a = table.agents[2].take_turn(&mut SelectionTrace::default()).map_err(|e| e.to_string())?;
    if a != Action::Play(5) {
        return Err(format!("cathy chose {a:?}"));
    }
    within(Duration::from_secs(1), start, format!("{clause} then play(5)"))
}

fn lifecycle() -> Outcome {
    let (mut table, _) = red_hint_table();
    let chop = table.state.chop(1).ok_or("bob has no chop")?;
    table.step(Action::Discard(chop)).map_err(|e| e.to_string())?;
    let (event, reports) = table.step(Action::Play(5)).map_err(|e| e.to_string())?;
    let left = table.agents[2].kb.aics().len();
    match (reports[2].retracted, left) {
        (1, 0) => Ok(format!("played {:?}, 1 AIC retracted", event.outcome)),
        (r, l) => Err(format!("{r} retracted, {l} left")),
    }
}

fn engine_soundness() -> Outcome {
    let start = Instant::now();
    let games = 100_000u64;
    let mut states = 0u64;
    for g in 0..games {
        let n = 2 + (g % 4) as usize;
        let seed = splitmix64(g);
        let mut s = random_position(n, seed, 0);
        let mut step = 0;
        loop {
            let v = s.violations();
            if !v.is_empty() {
                return Err(format!("game {g} ({n} players, seed {seed}): {v:?}"));
            }
            states += 1;
            if s.is_over() {
                break;
            }
            let legal = s.legal_actions().map_err(|e| e.to_string())?;
            let a = legal[(splitmix64(seed ^ step) % legal.len() as u64) as usize];
            s = s.apply(s.turn, a).map_err(|e| e.to_string())?.0;
            step += 1;
        }
    }
    within(Duration::from_secs(300), start, format!("{games} games, {states} states, no violations"))
}

fn sweep_once(dir: &std::path::Path) -> Result<Vec<Vec<u8>>, String> {
    let csv = dir.join("out.csv");
    let plots = dir.join("plots");
    let out = Command::new(env!("CARGO_BIN_EXE_abditom"))
        .args(["sweep", "--players", "2,3", "--games", "10", "--seed", "1", "--jobs", "2"])
        .arg("--csv")
        .arg(&csv)
        .arg("--plots")
        .arg(&plots)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    [csv, plots.join("score.svg"), plots.join("efficiency.svg")]
        .iter()
        .map(|p| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display())))
        .collect()
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (x, y) = (sweep_once(a.path())?, sweep_once(b.path())?);
    if x == y {
        Ok(format!("CSV and two SVGs identical ({} bytes)", x.iter().map(Vec::len).sum::<usize>()))
    } else {
        Err("outputs differ between runs".into())
    }
}

const SIZES: [usize; 4] = [2, 3, 4, 5];

fn sweep(games: usize, policy: Policy, abduction: bool, audit: bool) -> Result<SweepOutcome, String> {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cfg = SweepConfig { players: SIZES.to_vec(), games, seed: 1, policy, abduction, audit, jobs, record_wall_time: false };
    let out = run_sweep(&cfg, &Rulebase::shipped()).map_err(|e| e.to_string())?;
    match out.failure {
        Some(e) => Err(e.to_string()),
        None => Ok(out),
    }
}

fn of_size(rows: &[Row], n: usize) -> Vec<&Row> {
    rows.iter().filter(|r| r.players == n).collect()
}

fn mean_score(rows: &[&Row]) -> f64 {
    rows.iter().map(|r| f64::from(r.score)).sum::<f64>() / rows.len() as f64
}

fn metrics(on: &SweepOutcome) -> Outcome {
    let start = Instant::now();
    let random = sweep(500, Policy::Random, false, false)?;
    let mut parts = Vec::new();
    for n in SIZES {
        let rules = of_size(&on.rows, n);
        let base = of_size(&random.rows, n);
        let eff: Vec<f64> = rules.iter().filter_map(|r| r.efficiency).collect();
        let median = Summary64::of(&eff).ok_or(format!("{n} players: no game with hints"))?.median;
        let test = sign_test(rules.iter().zip(&base).map(|(a, b)| (f64::from(a.score), f64::from(b.score))));
        let (m, mb) = (mean_score(&rules), mean_score(&base));
        let part = format!("n={n}: median eff {median:.3}, mean {m:.2} vs random {mb:.2} (p={:.1e})", test.p_value);
        if median < 0.5 || m <= mb || test.p_value >= 0.01 {
            return Err(part);
        }
        parts.push(part);
    }
    Ok(format!("{}; baseline in {:.1?}", parts.join("; "), start.elapsed()))
}

fn ablation(on: &SweepOutcome) -> Outcome {
    let off = sweep(200, Policy::Rules, false, false)?;
    let mut parts = Vec::new();
    for n in SIZES {
        let a: Vec<&Row> = of_size(&on.rows, n).into_iter().take(200).collect();
        let b = of_size(&off.rows, n);
        if a.iter().zip(&b).any(|(x, y)| x.seed != y.seed) {
            return Err(format!("n={n}: arms are not seed-matched"));
        }
        let test = sign_test(a.iter().zip(&b).map(|(x, y)| (f64::from(x.score), f64::from(y.score))));
        let delta = mean_score(&a) - mean_score(&b);
        let part = format!("n={n}: delta {delta:+.2} ({}/{}/{} p={:.2})", test.wins, test.losses, test.ties, test.p_value);
        if test.losses > test.wins && test.p_value < 0.01 {
            return Err(format!("on arm significantly worse, {part}"));
        }
        parts.push(part);
    }
    let mut turns = 0usize;
    for r in &on.records {
        for &(with, without) in &r.instances {
            turns += 1;
            if with > without {
                return Err(format!("seed {}: {with} instances with AICs, {without} without", r.seed));
            }
        }
    }
    Ok(format!("{}; {turns} rule evaluations pruned monotonically", parts.join("; ")))
}

fn seated(i: u64, own_turn: bool) -> (GameState, Agent) {
    let r = splitmix64(i ^ 0x70b1);
    let n = 2 + (r % 4) as usize;
    let s = random_position(n, r, ((r >> 8) % 50) as usize);
    let seat = if own_turn { s.turn } else { ((r >> 16) % n as u64) as usize };
    let mut a = Agent::new(&Rulebase::shipped(), n, seat, AgentConfig::default());
    a.perceive(&observe(&s, seat));
    (s, a)
}

fn tom_axioms() -> Outcome {
    for i in 0..1000 {
        let (s, a) = seated(i, false);
        for target in 0..s.n_players() {
            let gaps = unentailed_shift_percepts(&a.kb, Sym::new(SEAT_NAMES[target])).map_err(|e| e.to_string())?;
            if !gaps.is_empty() {
                return Err(format!("state {i}: {} shifted to {target} misses {gaps:?}", a.id));
            }
        }
    }
    let (mut states, mut before, mut after) = (0, 0, 0);
    let mut i = 0;
    while states < 1000 {
        i += 1;
        let (s, a) = seated(i, true);
        let slots = s.held_slots(a.seat);
        if s.is_over() || slots.is_empty() {
            continue;
        }
        let slot = slots[(i as usize) % slots.len()];
        let card = s.card(a.seat, slot).unwrap().card;
        let (pred, value) = if i % 2 == 0 {
            ("has_card_rank", Term::Int(card.rank as i64))
        } else {
            ("has_card_colour", Term::atom(card.colour.name()))
        };
        let lit = Literal::new(pred, vec![Term::Atom(a.id), Term::Int(slot as i64), value]);
        let check = singleton_aic_pruning(&a.kb, a.id, &lit).map_err(|e| e.to_string())?;
        if !check.mismatches.is_empty() {
            return Err(format!("state {i}: {:?}", check.mismatches));
        }
        before += check.before;
        after += check.after;
        states += 1;
    }
    Ok(format!("perspective shifts entailed on 1000 states; singleton AICs on 1000 states prune {before} -> {after} instances"))
}

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| only.is_empty() || only.contains(&k);
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut run = |k: u32, f: &dyn Fn() -> Outcome| {
        if wanted(k) {
            let r = f();
            match &r {
                Ok(m) => println!("criterion {k}: PASS {m}"),
                Err(m) => println!("criterion {k}: FAIL {m}"),
            }
            results.push((k, r));
        }
    };
    run(1, &logic_oracle);
    run(2, &abduction_oracle);
    run(3, &running_example);
    run(4, &lifecycle);
    run(5, &engine_soundness);
    run(6, &determinism);
    if wanted(7) || wanted(8) {
        let start = Instant::now();
        match sweep(500, Policy::Rules, true, true) {
            Ok(on) => {
                log_line(start);
                run(7, &|| metrics(&on));
                run(8, &|| ablation(&on));
            }
            Err(e) => {
                run(7, &|| Err(format!("sweep failed: {e}")));
                run(8, &|| Err(format!("sweep failed: {e}")));
            }
        }
    }
    run(9, &tom_axioms);
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn log_line(start: Instant) {
    println!("rule sweep, 4 sizes x 500 games with abduction: {:.1?}", start.elapsed());
}
