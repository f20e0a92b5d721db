//! Seeded sweeps over team sizes and their CSV output.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::time::Instant;

use abditom_core::SelectionOptions;
use abditom_hanabi::{run_game, run_random_game, AgentConfig, GameConfig, GameError, GameRecord, RuleConfig, Rulebase};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeds::game_seed;
use crate::stats::Summary64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// The shipped rule agents.
    Rules,
    /// Uniformly random legal actions.
    Random,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub players: Vec<usize>,
    pub games: usize,
    pub seed: u64,
    pub policy: Policy,
    pub abduction: bool,
    /// Record per-turn instance counts with and without AICs.
    pub audit: bool,
    pub jobs: usize,
    /// Fill the wall_ms column; off by default so output stays reproducible.
    pub record_wall_time: bool,
}

impl Default for SweepConfig {
    fn default() -> SweepConfig {
        SweepConfig {
            players: vec![2, 3, 4, 5],
            games: 500,
            seed: 1,
            policy: Policy::Rules,
            abduction: true,
            audit: false,
            jobs: 1,
            record_wall_time: false,
        }
    }
}

/// One CSV row per game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub players: usize,
    pub seed: u64,
    pub score: u8,
    pub hints: u32,
    /// Score per hint, missing for games without hints.
    pub efficiency: Option<f64>,
    pub turns: u32,
    pub aic_installed: usize,
    pub aic_retracted: usize,
    pub violations: usize,
    pub wall_ms: Option<u64>,
}

pub fn efficiency(score: u8, hints: u32) -> Option<f64> {
    (hints > 0).then(|| f64::from(score) / f64::from(hints))
}

impl Row {
    pub fn from_record(r: &GameRecord, wall_ms: Option<u64>) -> Row {
        Row {
            players: r.players,
            seed: r.seed,
            score: r.score,
            hints: r.hints,
            efficiency: efficiency(r.score, r.hints),
            turns: r.turns,
            aic_installed: r.aic_installed,
            aic_retracted: r.aic_retracted,
            violations: r.violations,
            wall_ms,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("game with {players} players, seed {seed}: {source}")]
    Game { players: usize, seed: u64, source: Box<GameError> },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Completed games in (players, game index) order. When a game fails, the
/// games that completed are still returned alongside the first failure.
pub struct SweepOutcome {
    pub records: Vec<GameRecord>,
    pub rows: Vec<Row>,
    pub failure: Option<SweepError>,
}

pub fn validate(cfg: &SweepConfig) -> Result<(), SweepError> {
    if cfg.players.is_empty() || cfg.players.iter().any(|n| !(2..=5).contains(n)) {
        return Err(SweepError::Config(format!("team sizes must lie in 2..=5, got {:?}", cfg.players)));
    }
    if cfg.games == 0 {
        return Err(SweepError::Config("at least one game per size".into()));
    }
    if cfg.jobs == 0 {
        return Err(SweepError::Config("at least one job".into()));
    }
    Ok(())
}

pub fn run_sweep(cfg: &SweepConfig, rulebase: &Rulebase) -> Result<SweepOutcome, SweepError> {
    validate(cfg)?;
    let mut players = cfg.players.clone();
    players.sort_unstable();
    players.dedup();
    let work: Vec<(usize, u64)> =
        players.iter().flat_map(|&n| (0..cfg.games).map(move |i| (n, game_seed(cfg.seed, n, i)))).collect();
    let game_cfg = GameConfig {
        agent: AgentConfig {
            abduction: cfg.abduction,
            selection: SelectionOptions { audit: cfg.audit, ..SelectionOptions::default() },
            ..AgentConfig::default()
        },
        rules: RuleConfig::default(),
        trace: false,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| SweepError::Config(e.to_string()))?;
    let results: Vec<(Result<GameRecord, SweepError>, u64)> = pool.install(|| {
        work.par_iter()
            .map(|&(n, seed)| {
                let start = Instant::now();
                let r = match cfg.policy {
                    Policy::Rules => run_game(rulebase, n, seed, &game_cfg)
                        .map_err(|e| SweepError::Game { players: n, seed, source: Box::new(e) }),
                    Policy::Random => run_random_game(n, seed, RuleConfig::default()).map_err(|e| SweepError::Game {
                        players: n,
                        seed,
                        source: Box::new(GameError { source: e.into(), trace: Vec::new() }),
                    }),
                };
                log::debug!("players={n} seed={seed} done in {:?}", start.elapsed());
                (r, start.elapsed().as_millis() as u64)
            })
            .collect()
    });
    let mut out = SweepOutcome { records: Vec::new(), rows: Vec::new(), failure: None };
    for (r, ms) in results {
        match r {
            Ok(rec) => {
                out.rows.push(Row::from_record(&rec, cfg.record_wall_time.then_some(ms)));
                out.records.push(rec);
            }
            Err(e) if out.failure.is_none() => out.failure = Some(e),
            Err(e) => log::error!("{e}"),
        }
    }
    Ok(out)
}

pub fn write_csv(rows: &[Row], path: &Path) -> Result<(), SweepError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<Row>, SweepError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(SweepError::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub players: usize,
    pub games: usize,
    pub score: Summary64,
    /// Over games with at least one hint.
    pub efficiency: Option<Summary64>,
}

pub fn summarise(rows: &[Row]) -> Vec<SizeSummary> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.players).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let of: Vec<&Row> = rows.iter().filter(|r| r.players == n).collect();
            let score: Vec<f64> = of.iter().map(|r| f64::from(r.score)).collect();
            let eff: Vec<f64> = of.iter().filter_map(|r| r.efficiency).collect();
            SizeSummary {
                players: n,
                games: of.len(),
                score: Summary64::of(&score).expect("each size has a game"),
                efficiency: Summary64::of(&eff),
            }
        })
        .collect()
}

pub fn summary_table(summaries: &[SizeSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:<11} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "players", "metric", "n", "min", "q1", "median", "q3", "max", "mean");
    for s in summaries {
        let lines = [("score", Some(s.score)), ("efficiency", s.efficiency)];
        for (name, m) in lines {
            match m {
                Some(m) => {
                    let _ = writeln!(
                        out,
                        "{:<8} {:<11} {:>6} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
                        s.players, name, m.n, m.min, m.q1, m.median, m.q3, m.max, m.mean
                    );
                }
                None => {
                    let _ = writeln!(out, "{:<8} {:<11} {:>6} (no games with hints)", s.players, name, 0);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency(20, 40), Some(0.5));
        assert_eq!(efficiency(18, 9), Some(2.0));
        assert_eq!(efficiency(3, 0), None);
    }

    #[test]
    fn config_validation() {
        let bad = SweepConfig { players: vec![1, 3], ..SweepConfig::default() };
        assert!(matches!(validate(&bad), Err(SweepError::Config(_))));
        assert!(validate(&SweepConfig { games: 0, ..SweepConfig::default() }).is_err());
        assert!(validate(&SweepConfig::default()).is_ok());
    }
}
