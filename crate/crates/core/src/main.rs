use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bohr_core::contexts::{ContextPoset, PosetOptions, DEFAULT_POSET_CAP, DEFAULT_SEED};
use bohr_core::interval::RationalInterval;
use bohr_core::ks::KsConfig;
use bohr_core::lattice::SiteJson;
use bohr_core::report::{self, Report};
use bohr_core::system::{System, SystemDescription, Tolerances};
use bohr_core::{Error, Result};

const EXIT_INPUT: u8 = 2;
const EXIT_NO_POINT: u8 = 3;
const EXIT_STRICT: u8 = 4;

#[derive(Parser)]
#[command(name = "bohr", version, about = "Contexts, spectral opens and truth values of finite quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the context poset and print its Hasse diagram.
    Poset(Common),
    /// Summarise the spectral frame, optionally with the generators of an observable.
    Spectrum(Common),
    /// Daseinise an observable at an interval.
    Daseinise(Common),
    /// Truth value of "observable in interval" in a state.
    Pair(Common),
    /// Search for a point of the spectrum; exit 3 when there is none.
    Ks(Common),
    /// Enumerate the frame of a site, or of the spectrum of a system.
    Frame(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// System description JSON.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Configuration of orthonormal bases JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Site JSON.
    #[arg(long)]
    site: Option<PathBuf>,
    #[arg(long)]
    observable: Option<String>,
    /// `r,s` with `-inf` and `inf` allowed.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<RationalInterval>,
    #[arg(long)]
    state: Option<String>,
    /// Context label of the stage; defaults to the trivial context.
    #[arg(long)]
    base: Option<String>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a DOT diagram here.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Exit 4 on boundary warnings and near misses.
    #[arg(long)]
    strict: bool,
    /// `strict=EPS` or `prob=EPS`; repeatable.
    #[arg(long, value_parser = parse_tolerance)]
    tolerance: Vec<(String, f64)>,
    /// List every open in `spectrum` output.
    #[arg(long)]
    list: bool,
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=VALUE")?;
    if k != "strict" && k != "prob" {
        return Err(format!("unknown tolerance `{k}` (expected strict or prob)"));
    }
    let v: f64 = v.parse().map_err(|e| format!("{e}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err("tolerance must be a non-negative number".into());
    }
    Ok((k.to_string(), v))
}

fn seed_from_env() -> Result<Option<u64>> {
    let Ok(s) = std::env::var("BOHR_SEED") else { return Ok(None) };
    let s = s.trim();
    let parsed = match s.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map(Some).map_err(|_| Error::Input(format!("BOHR_SEED `{s}` is not an unsigned integer")))
}

struct Env {
    seed: u64,
    tolerances: Tolerances,
}

fn load_system(args: &Common, env: &mut Env) -> Result<System> {
    let path = require(&args.system, "system")?;
    let mut sys = SystemDescription::load(path)?.build(seed_from_env()?)?;
    for (k, v) in &args.tolerance {
        match k.as_str() {
            "strict" => sys.tolerances.strict = *v,
            _ => sys.tolerances.prob = *v,
        }
    }
    env.seed = sys.poset.seed();
    env.tolerances = sys.tolerances;
    Ok(sys)
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Input(format!("--{flag} is required")))
}

fn ks_poset(args: &Common, env: &mut Env) -> Result<ContextPoset> {
    let path = require(&args.config, "config")?;
    let seed = seed_from_env()?.unwrap_or(DEFAULT_SEED);
    env.seed = seed;
    KsConfig::load(path)?.poset(&PosetOptions { cap: DEFAULT_POSET_CAP, seed })
}

fn dispatch(command: &Command, env: &mut Env) -> Result<Report> {
    match command {
        Command::Poset(a) if a.config.is_some() => Ok(report::poset(&ks_poset(a, env)?)),
        Command::Poset(a) => Ok(report::poset(&load_system(a, env)?.poset)),
        Command::Spectrum(a) => report::spectrum(&load_system(a, env)?, a.observable.as_deref(), a.list),
        Command::Daseinise(a) => {
            let sys = load_system(a, env)?;
            report::daseinise(&sys, require(&a.observable, "observable")?, require(&a.interval, "interval")?)
        }
        Command::Pair(a) => {
            let sys = load_system(a, env)?;
            report::pair(
                &sys,
                require(&a.observable, "observable")?,
                require(&a.interval, "interval")?,
                require(&a.state, "state")?,
                a.base.as_deref(),
            )
        }
        Command::Ks(a) => match (&a.config, &a.system) {
            (Some(_), None) => Ok(report::ks(&ks_poset(a, env)?)),
            (None, Some(_)) => Ok(report::ks(&load_system(a, env)?.poset)),
            _ => Err(Error::Input("give exactly one of --config and --system".into())),
        },
        Command::Frame(a) => match &a.site {
            Some(path) => {
                let json: SiteJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                report::site_frame(&json)
            }
            None => report::system_frame(&load_system(a, env)?),
        },
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

fn run(cli: Cli) -> Result<u8> {
    let (name, args) = match &cli.command {
        Command::Poset(a) => ("poset", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Daseinise(a) => ("daseinise", a),
        Command::Pair(a) => ("pair", a),
        Command::Ks(a) => ("ks", a),
        Command::Frame(a) => ("frame", a),
    };
    let mut env = Env { seed: DEFAULT_SEED, tolerances: Tolerances::default() };
    let outcome = dispatch(&cli.command, &mut env)?;
    let mut inputs = serde_json::Map::new();
    if let Some(o) = &args.observable {
        inputs.insert("observable".into(), json!(o));
    }
    if let Some(iv) = &args.interval {
        inputs.insert("interval".into(), serde_json::to_value(iv)?);
    }
    if let Some(s) = &args.state {
        inputs.insert("state".into(), json!(s));
    }
    if let Some(b) = &args.base {
        inputs.insert("base".into(), json!(b));
    }
    let doc = json!({
        "metadata": {
            "tool": "bohr",
            "version": env!("CARGO_PKG_VERSION"),
            "command": name,
            "seed": env.seed,
            "tolerances": env.tolerances,
            "inputs": inputs,
        },
        "result": outcome.result,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.out {
        Some(p) => write_text(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &args.dot {
        write_text(p, &outcome.dot)?;
    }
    if let Some(t) = &outcome.table {
        eprint!("{t}");
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if outcome.no_point {
        return Ok(EXIT_NO_POINT);
    }
    if args.strict && !outcome.warnings.is_empty() {
        return Ok(EXIT_STRICT);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
