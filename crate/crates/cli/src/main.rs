//! `jamgrip`: run grasps, sweeps, fits and serial sessions from the shell.
//!
//! Exit status: 0 on success, 2 when a grasp fails (or the automaton check
//! finds a violation), 1 on any error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use jamgrip::firmware::model_check::{explore, transition_table, GuardGrid};
use jamgrip::fit::{self, linspace, ModelKind};
use jamgrip::io::logs::{read_samples, write_samples, write_sweep_results, write_timeline};
use jamgrip::io::record::{format_fit, format_outcome};
use jamgrip::io::session::{parse_transcript, run_session, SessionOptions};
use jamgrip::io::{run_sweep, Config};
use jamgrip::jig::run_grasp;
use jamgrip::rig::Start;

#[derive(Debug, Parser)]
#[command(name = "jamgrip", version, about = "Jamming gripper simulator and identification toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulation step, s.
    #[arg(long, global = true, default_value_t = 0.001)]
    dt: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one grasp; writes timeline.csv and outcome.txt.
    Grasp,
    /// Run the [sweep] section of the config; writes sweep.csv.
    Sweep,
    /// Fit a power law to a sample CSV (x_m[,D_mm],F_N).
    Fit {
        csv: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long, default_value = fit::DEFAULT_FITTER)]
        fitter: String,
    },
    /// Write a synthetic force-displacement sweep.
    Generate {
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        x_min_mm: f64,
        #[arg(long, default_value_t = 40.0)]
        x_max_mm: f64,
        /// Peg diameters for air sweeps, mm.
        #[arg(long, value_delimiter = ',', default_value = "30,40,50")]
        diameters: Vec<f64>,
        /// Gaussian noise, N rms.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Replay a stamped command transcript (file or stdin) over the serial
    /// protocol; writes session.log.
    Serial {
        /// Transcript file; `-` or omitted reads stdin.
        transcript: Option<PathBuf>,
        /// Start from power-up instead of an opened gripper.
        #[arg(long)]
        power_up: bool,
        /// Drain telemetry every N firmware ticks.
        #[arg(long, default_value_t = 1)]
        drain_every: u32,
        /// Run time after the last entry when the transcript has no `!end`, ms.
        #[arg(long, default_value_t = 10_000)]
        tail_ms: u64,
    },
    /// Print the transition table and an exhaustive reachability report.
    AutomatonTrace,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: jamgrip::Error| e.to_string())
}

fn load_config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(path) => Config::load(path).with_context(|| format!("config {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(seed) = g.seed {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(g: &Global) -> Result<PathBuf> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Writes `text` to `out/name` when `--out` was given, else to stdout.
fn emit(g: &Global, name: &str, text: &str) -> Result<()> {
    match &g.out {
        Some(_) => {
            let path = out_dir(g)?.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(io::BufWriter::new(f))
}

fn cmd_grasp(g: &Global) -> Result<u8> {
    let cfg = load_config(g)?;
    let (outcome, timeline) = run_grasp(&cfg.scenario, &cfg.plant, g.dt)?;
    let dir = out_dir(g)?;
    write_timeline(create(&dir.join("timeline.csv"))?, &timeline)?;
    let record = format_outcome(&outcome);
    fs::write(dir.join("outcome.txt"), &record)?;
    print!("{record}");
    Ok(if outcome.success { 0 } else { 2 })
}

fn cmd_sweep(g: &Global) -> Result<u8> {
    let cfg = load_config(g)?;
    let Some(spec) = &cfg.sweep else {
        bail!("the configuration has no [sweep] section");
    };
    let rows = run_sweep(&cfg.scenario, &cfg.plant, spec, g.dt)?;
    let path = out_dir(g)?.join("sweep.csv");
    write_sweep_results(create(&path)?, &rows)?;
    let ok = rows.iter().filter(|r| r.success).count();
    println!("{} runs, {ok} successful, written to {}", rows.len(), path.display());
    Ok(0)
}

fn cmd_fit(g: &Global, csv: &Path, model: ModelKind, fitter: &str) -> Result<u8> {
    let file = fs::File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    let samples = read_samples(io::BufReader::new(file)).with_context(|| csv.display().to_string())?;
    let result = fit::fit_power_law_with(&samples, model, fitter)?;
    emit(g, "fit.txt", &format_fit(&result))?;
    Ok(0)
}

fn cmd_generate(
    g: &Global,
    model: ModelKind,
    points: usize,
    x_range_mm: (f64, f64),
    diameters: &[f64],
    noise: f64,
) -> Result<u8> {
    let cfg = load_config(g)?;
    let xs = linspace(x_range_mm.0 * 1e-3, x_range_mm.1 * 1e-3, points);
    let samples = fit::generate_sweep(&cfg.plant.contact, model, &xs, diameters, noise, cfg.scenario.seed)?;
    let mut buf = Vec::new();
    write_samples(&mut buf, &samples)?;
    emit(g, &format!("samples_{model}.csv"), std::str::from_utf8(&buf)?)?;
    Ok(0)
}

fn cmd_serial(g: &Global, transcript: Option<&Path>, opts: SessionOptions) -> Result<u8> {
    let cfg = load_config(g)?;
    let text = match transcript {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let entries = parse_transcript(&text)?;
    let log = run_session(&entries, &cfg.plant.controller, &cfg.plant.pneumatics, &opts)?;
    emit(g, "session.log", &log)?;
    Ok(0)
}

fn cmd_automaton_trace(g: &Global) -> Result<u8> {
    let cfg = load_config(g)?;
    let controller = &cfg.plant.controller;
    let report = explore(controller, &GuardGrid::around(controller));
    let text = format!("{}\n{}", transition_table(controller), report.render());
    emit(g, "automaton.txt", &text)?;
    Ok(if report.all_hold() { 0 } else { 2 })
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Grasp => cmd_grasp(g),
        Command::Sweep => cmd_sweep(g),
        Command::Fit { csv, model, fitter } => cmd_fit(g, csv, *model, fitter),
        Command::Generate {
            model,
            points,
            x_min_mm,
            x_max_mm,
            diameters,
            noise,
        } => cmd_generate(g, *model, *points, (*x_min_mm, *x_max_mm), diameters, *noise),
        Command::Serial {
            transcript,
            power_up,
            drain_every,
            tail_ms,
        } => {
            let opts = SessionOptions {
                start: if *power_up { Start::PowerUp } else { Start::Opened },
                dt: g.dt,
                drain_every_ticks: *drain_every,
                tail_ms: *tail_ms,
            };
            cmd_serial(g, transcript.as_deref(), opts)
        }
        Command::AutomatonTrace => cmd_automaton_trace(g),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
