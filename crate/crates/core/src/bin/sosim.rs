use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sosim::config::SimConfig;
use sosim::models;
use sosim::search::write_query_csv;
use sosim::server::{self, ServeOptions};
use sosim::sim::{load_log, replay, Simulation, StopRule};
use sosim::sweep::{self, SweepSpec};

#[derive(Parser)]
#[command(name = "sosim", version, about = "Agent-based simulator for self-organizing networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Set up a model and run it headless, writing the metrics CSV.
    Run {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        ticks: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Per-query CSV, for the search models.
        #[arg(long)]
        queries: Option<PathBuf>,
        /// JSON-lines run log for later replay.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a JSON spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Serve a live simulation over TCP (newline-delimited JSON or websocket).
    Serve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8642)]
        port: u16,
        #[arg(long, default_value_t = server::DEFAULT_FRAME_RATE)]
        frame_rate: f64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Interactive console on standard input. `exit` quits.
    Repl {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Re-execute a run log and write the resulting metrics CSV.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Model name; overrides the one in --config.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<SimConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::load(p).map_err(|e| e.to_string())?,
            None => {
                let name = self.model.as_deref().ok_or("either --model or --config is required")?;
                SimConfig::new(name)
            }
        };
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        models::lookup(&cfg.model).map_err(|e| format!("{e} (known: {})", models::MODEL_NAMES.join(", ")))?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn write_metrics(sim: &Simulation, path: &Path) -> Result<(), String> {
    sim.state()
        .series()
        .write_csv(create(path)?)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cmd: Cmd) -> Result<(), String> {
    match cmd {
        Cmd::Run {
            model,
            ticks,
            seed,
            out,
            queries,
            log,
        } => {
            let mut cfg = model.resolve()?;
            if let Some(s) = seed {
                cfg.world.seed = s;
            }
            let stop = StopRule::ticks(ticks);
            let mut sim = Simulation::new(&cfg).map_err(|e| e.to_string())?;
            sim.setup().map_err(|e| e.to_string())?;
            while !sim.stop_reached(&stop).map_err(|e| e.to_string())? {
                sim.step().map_err(|e| format!("tick {}: {e}", sim.tick()))?;
            }
            write_metrics(&sim, &out)?;
            if let Some(q) = queries {
                let rows = models::query_records(sim.state(), &cfg.model)
                    .ok_or_else(|| format!("model {} does not record queries", cfg.model))?;
                write_query_csv(create(&q)?, &rows).map_err(|e| e.to_string())?;
            }
            if let Some(l) = log {
                sim.save_log(&l).map_err(|e| format!("{}: {e}", l.display()))?;
            }
            println!("{}: {} ticks, digest {}", cfg.model, sim.tick(), sim.state().digest());
            Ok(())
        }
        Cmd::Sweep { spec, out, threads } => {
            let spec = SweepSpec::load(&spec).map_err(|e| e.to_string())?;
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let result = sweep::run_experiment(&spec, threads).map_err(|e| e.to_string())?;
            sweep::write_outputs(&out, &result).map_err(|e| e.to_string())?;
            let failed = result.records.iter().filter(|r| r.error.is_some()).count();
            let keys: Vec<&str> = spec.grid.keys().map(String::as_str).collect();
            if let Ok(groups) = sweep::summarize(&result.records, &keys) {
                let text = serde_json::to_string_pretty(&groups).map_err(|e| e.to_string())?;
                std::fs::write(out.join("summary.json"), text).map_err(|e| e.to_string())?;
            }
            println!("{} runs, {failed} failed, written to {}", result.records.len(), out.display());
            Ok(())
        }
        Cmd::Serve {
            model,
            host,
            port,
            frame_rate,
            log,
        } => {
            let cfg = model.resolve()?;
            let opts = ServeOptions {
                addr: format!("{host}:{port}"),
                frame_rate,
                log_path: log,
            };
            let handle = server::serve(&cfg, opts).map_err(|e| e.to_string())?;
            eprintln!("serving {} on {}", cfg.model, handle.addr());
            handle.wait();
            Ok(())
        }
        Cmd::Repl { model, seed, log } => {
            let mut cfg = model.resolve()?;
            if let Some(s) = seed {
                cfg.world.seed = s;
            }
            let mut sim = Simulation::new(&cfg).map_err(|e| e.to_string())?;
            sim.setup().map_err(|e| e.to_string())?;
            repl(&mut sim, io::stdin().lock(), io::stdout().lock()).map_err(|e| e.to_string())?;
            if let Some(l) = log {
                sim.save_log(&l).map_err(|e| format!("{}: {e}", l.display()))?;
            }
            Ok(())
        }
        Cmd::Replay { log, out } => {
            let entries = load_log(&log).map_err(|e| e.to_string())?;
            let sim = replay(&entries).map_err(|e| e.to_string())?;
            write_metrics(&sim, &out)?;
            println!("replayed {} entries to tick {}", entries.len(), sim.tick());
            Ok(())
        }
    }
}

fn repl(sim: &mut Simulation, input: impl BufRead, mut out: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        let text = line.trim();
        if text == "exit" {
            break;
        }
        if text.is_empty() {
            continue;
        }
        match sim.command(text) {
            Ok(values) => {
                for v in values {
                    writeln!(out, "{v}")?;
                }
            }
            Err(e) => writeln!(out, "error: {e}")?,
        }
        out.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sosim: {e}");
            ExitCode::FAILURE
        }
    }
}
