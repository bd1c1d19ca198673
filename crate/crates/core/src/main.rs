use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nsbench::bench::{markdown_table, read_csv, rows_for, suite_configs, write_csv, Experiment, ExperimentConfig, ResultRow, Suite};
use nsbench::envs::EnvKind;
use nsbench::Error;

#[derive(Parser)]
#[command(name = "nsbench", version, about = "Non-stationary MDP benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "NSBENCH_WORKERS")]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Aggregate a results CSV into a markdown table.
    Table { csv: PathBuf },
    ListEnvs,
    ListAgents,
    /// Print the map of a gridworld.
    DumpMap { env: String },
    /// Run a canonical grid of experiments (single or continuous).
    Suite {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "NSBENCH_WORKERS")]
        workers: Option<usize>,
        /// Overrides the per-environment episode count.
        #[arg(long)]
        episodes: Option<u32>,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run_one(cfg: ExperimentConfig, workers: usize) -> nsbench::Result<Vec<ResultRow>> {
    if !cfg.is_canonical() {
        eprintln!("warning: non-canonical single-change target in {} experiment", cfg.env);
    }
    let exp = Experiment::new(cfg)?;
    let (stats, results) = exp.run(workers)?;
    let cfg = exp.config();
    eprintln!(
        "{} {} {} {}: mean {:.3} ± {:.3} over {} episodes in {:.1}s",
        cfg.env,
        cfg.agent,
        cfg.change_mode.name(),
        cfg.notify,
        stats.mean,
        stats.stderr,
        stats.n,
        stats.wall.as_secs_f64()
    );
    Ok(rows_for(cfg, &results))
}

fn emit(out: &PathBuf, rows: &[ResultRow], format: Format) -> nsbench::Result<()> {
    let mut w = BufWriter::new(File::create(out)?);
    match format {
        Format::Csv => write_csv(&mut w, rows)?,
        Format::Markdown => w.write_all(markdown_table(rows).as_bytes())?,
    }
    w.flush()?;
    Ok(())
}

fn execute(cmd: Command) -> nsbench::Result<()> {
    match cmd {
        Command::Run { config, out, workers, format } => {
            let cfg = ExperimentConfig::from_json(&fs::read_to_string(&config)?)?;
            let rows = run_one(cfg, workers.unwrap_or_else(default_workers))?;
            emit(&out, &rows, format)
        }
        Command::Table { csv } => {
            let rows = read_csv(File::open(csv)?)?;
            print!("{}", markdown_table(&rows));
            Ok(())
        }
        Command::ListEnvs => {
            for env in EnvKind::ALL {
                println!("{env}\t{}", env.param_names().join(","));
            }
            Ok(())
        }
        Command::ListAgents => {
            println!("mcts\tUCT tree search with random rollouts");
            println!("pamcts\tUCT blended with a stale policy (needs alpha)");
            println!("rats\tdepth-limited maximin search against bounded drift (gridworlds)");
            println!("random\tuniform random actions");
            Ok(())
        }
        Command::DumpMap { env } => {
            let kind: EnvKind = env.parse()?;
            let grid = kind
                .grid()
                .ok_or_else(|| Error::Config(format!("{kind} has no map")))?;
            print!("{}", grid.canonical_map());
            Ok(())
        }
        Command::Suite { name, out, workers, episodes, master_seed } => {
            let suite: Suite = name.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            let workers = workers.unwrap_or_else(default_workers);
            let mut rows = Vec::new();
            for mut cfg in suite_configs(suite, master_seed) {
                cfg.episodes = episodes.or(cfg.episodes);
                rows.extend(run_one(cfg, workers)?);
            }
            emit(&out, &rows, Format::Csv)?;
            let mut stdout = io::stdout().lock();
            stdout.write_all(markdown_table(&rows).as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
