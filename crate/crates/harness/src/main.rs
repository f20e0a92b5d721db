use std::path::PathBuf;
use std::process::ExitCode;

use abditom_harness::plot::{render_boxplot, Metric};
use abditom_harness::sweep::{read_csv, run_sweep, summarise, summary_table, write_csv, Policy, SweepConfig, SweepError};
use abditom_hanabi::{load_rulebase, run_game, AgentConfig, GameConfig, Rulebase};
use clap::{Parser, Subcommand, ValueEnum};

const CONFIG_ERROR: u8 = 2;
const GAME_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "abditom", version, about = "Seeded Hanabi experiments for abductive rule agents")]
struct Cli {
    /// error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded games for each team size and write CSV, summary and plots.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        players: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        games: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory with the rule files; the shipped rules when absent.
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "on")]
        abduction: Switch,
        /// Play uniformly random legal actions instead of the rules.
        #[arg(long)]
        baseline: bool,
        /// Count instances with and without AICs on every turn.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value = "results.csv")]
        csv: PathBuf,
        /// Directory for score.svg and efficiency.svg.
        #[arg(long)]
        plots: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        record_wall_time: bool,
    },
    /// Play one game and print its trace and record.
    PlayOne {
        #[arg(long)]
        players: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "on")]
        abduction: Switch,
    },
    /// Load and check a rule directory.
    Validate {
        #[arg(long)]
        rulebase: PathBuf,
    },
    /// Redraw the plots from an existing CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn rulebase(dir: Option<&PathBuf>) -> Result<Rulebase, ExitCode> {
    match dir {
        None => Ok(Rulebase::shipped()),
        Some(d) => load_rulebase(d).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }),
    }
}

fn write_plots(rows: &[abditom_harness::Row], dir: &std::path::Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for metric in [Metric::Score, Metric::Efficiency] {
        let path = dir.join(format!("{}.svg", metric.name()));
        match render_boxplot(rows, metric) {
            Ok(svg) => std::fs::write(&path, svg).map_err(|e| format!("{}: {e}", path.display()))?,
            Err(e) => log::warn!("{}: {e}", path.display()),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.command {
        Command::Sweep { players, games, seed, rulebase: dir, abduction, baseline, audit, csv, plots, jobs, record_wall_time } => {
            let rb = rulebase(dir.as_ref())?;
            let cfg = SweepConfig {
                players,
                games,
                seed,
                policy: if baseline { Policy::Random } else { Policy::Rules },
                abduction: abduction == Switch::On,
                audit,
                jobs,
                record_wall_time,
            };
            let out = run_sweep(&cfg, &rb).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(CONFIG_ERROR)
            })?;
            if let Err(e) = write_csv(&out.rows, &csv) {
                eprintln!("error: {e}");
                return Err(ExitCode::from(CONFIG_ERROR));
            }
            if let Some(e) = out.failure {
                eprintln!("error: {e}");
                eprintln!("wrote {} completed games to {}", out.rows.len(), csv.display());
                return Err(ExitCode::from(GAME_ERROR));
            }
            print!("{}", summary_table(&summarise(&out.rows)));
            if let Some(dir) = plots {
                write_plots(&out.rows, &dir).map_err(|e| {
                    eprintln!("error: {e}");
                    ExitCode::from(CONFIG_ERROR)
                })?;
            }
            Ok(())
        }
        Command::PlayOne { players, seed, trace, rulebase: dir, abduction } => {
            let rb = rulebase(dir.as_ref())?;
            if !(2..=5).contains(&players) {
                eprintln!("error: team size must lie in 2..=5, got {players}");
                return Err(ExitCode::from(CONFIG_ERROR));
            }
            let cfg = GameConfig {
                agent: AgentConfig { abduction: abduction == Switch::On, ..AgentConfig::default() },
                trace,
                ..GameConfig::default()
            };
            match run_game(&rb, players, seed, &cfg) {
                Ok(mut rec) => {
                    for line in std::mem::take(&mut rec.trace) {
                        println!("{line}");
                    }
                    println!("{}", rec.to_json_line());
                    Ok(())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(ExitCode::from(GAME_ERROR))
                }
            }
        }
        Command::Validate { rulebase: dir } => {
            let rb = rulebase(Some(&dir))?;
            for (file, clauses) in &rb.files {
                println!("{file}: {clauses} clauses");
            }
            Ok(())
        }
        Command::Plot { csv, metric, out } => {
            let fail = |e: String| {
                eprintln!("error: {e}");
                ExitCode::from(CONFIG_ERROR)
            };
            let metric = Metric::parse(&metric).map_err(|e| fail(e.to_string()))?;
            let rows = read_csv(&csv).map_err(|e: SweepError| fail(e.to_string()))?;
            let svg = render_boxplot(&rows, metric).map_err(|e| fail(e.to_string()))?;
            std::fs::write(&out, svg).map_err(|e| fail(format!("{}: {e}", out.display())))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
