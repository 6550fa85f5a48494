//! `hybrid-wlp`: verify, certify and falsify hybrid programs written in
//! `.hwl` files, and check the algebraic laws on finite models.
//!
//! Exit codes: 0 when everything was proved (or passed), 2 when something
//! was refuted or a counterexample was found, 1 when something remains
//! unknown, 3 on usage, parse or I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_wlp_core::algebra::{check_laws, LawMode, Model};
use hybrid_wlp_core::hprog::AstPath;
use hybrid_wlp_core::lang::{parse_spec, print_spec, SpecFile};
use hybrid_wlp_core::report::{
    certify_spec, falsify_spec, verify_spec, verify_with_cut, CertifyScope, Overrides, Report, RunConfig,
};

const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hybrid-wlp", version, about = "Verification kernel for hybrid programs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Falsifier trials, or random law instances for `laws`.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Integration step used by simulation.
    #[arg(long, global = true, value_name = "H")]
    step: Option<f64>,
    /// Time horizon used by simulation.
    #[arg(long, global = true, value_name = "T")]
    horizon: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate and check every obligation of a problem.
    Verify {
        file: PathBuf,
        /// Differential cut to apply before generating obligations.
        #[arg(long, requires = "at", value_name = "PRED")]
        cut: Option<String>,
        /// Path of the evolution node to cut, e.g. `0.0`.
        #[arg(long, requires = "cut", value_name = "PATH")]
        at: Option<String>,
        /// Skip the simulation-based counterexample search.
        #[arg(long)]
        no_falsify: bool,
    },
    /// Check only flow certificates and differential invariants.
    Certify {
        file: PathBuf,
        #[arg(long, conflicts_with = "dinv_only")]
        flow_only: bool,
        #[arg(long)]
        dinv_only: bool,
    },
    /// Search for a counterexample by simulation.
    Falsify { file: PathBuf },
    /// Check algebraic laws on finite relations or state transformers.
    Laws {
        #[arg(long, value_enum, default_value = "rel")]
        model: ModelArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        /// Law identifiers or group names; all valid laws when omitted.
        #[arg(long = "law", value_name = "ID")]
        laws: Vec<String>,
    },
    /// Pretty-print a problem file.
    Fmt {
        file: PathBuf,
        /// Fail if the file is not already formatted.
        #[arg(long)]
        check: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Rel,
    Sta,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exhaustive,
    Random,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load(path: &Path) -> Result<SpecFile> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&src).with_context(|| format!("parsing {}", path.display()))
}

fn config(file: &SpecFile, g: &Global) -> Result<RunConfig> {
    let cli = Overrides {
        seed: g.seed,
        trials: g.trials,
        step: g.step,
        horizon: g.horizon,
    };
    Ok(RunConfig::resolve(&file.config, &cli)?)
}

fn emit(report: &Report, json: bool) -> Result<u8> {
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    } else {
        print!("{}", report.render_text());
    }
    Ok(report.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8> {
    let g = cli.global;
    match cli.cmd {
        Command::Verify {
            file,
            cut,
            at,
            no_falsify,
        } => {
            let spec = load(&file)?;
            let mut cfg = config(&spec, &g)?;
            cfg.falsify = !no_falsify;
            let report = match (cut, at) {
                (Some(cut), Some(at)) => {
                    let pred = spec.parse_pred(&cut).context("parsing --cut")?;
                    let path: AstPath = at.parse().context("parsing --at")?;
                    verify_with_cut(&spec, &path, pred, &cfg)?
                }
                _ => verify_spec(&spec, &cfg)?,
            };
            emit(&report, g.json)
        }
        Command::Certify {
            file,
            flow_only,
            dinv_only,
        } => {
            let spec = load(&file)?;
            let cfg = config(&spec, &g)?;
            let scope = match (flow_only, dinv_only) {
                (true, _) => CertifyScope::FlowOnly,
                (_, true) => CertifyScope::DinvOnly,
                _ => CertifyScope::All,
            };
            let report = certify_spec(&spec, scope, &cfg)?;
            if report.obligations.is_empty() {
                bail!("{} has no flow or differential invariant to certify", file.display());
            }
            emit(&report, g.json)
        }
        Command::Falsify { file } => {
            let spec = load(&file)?;
            let cfg = config(&spec, &g)?;
            let found = falsify_spec(&spec, &cfg)?;
            if g.json {
                let out = serde_json::json!({
                    "problem": spec.name,
                    "seed": cfg.seed,
                    "trials": cfg.trials,
                    "counterexample": found,
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                match &found {
                    Some(cx) => println!(
                        "counterexample in trial {}: initial {:?}, consts {:?}, violating {:?}",
                        cx.trial, cx.initial, cx.consts, cx.violating
                    ),
                    None => println!("no counterexample in {} trials (seed {})", cfg.trials, cfg.seed),
                }
            }
            Ok(if found.is_some() { 2 } else { 0 })
        }
        Command::Laws { model, n, mode, laws } => {
            let model = match model {
                ModelArg::Rel => Model::Rel,
                ModelArg::Sta => Model::Sta,
            };
            let mode = match mode {
                ModeArg::Exhaustive => LawMode::Exhaustive,
                ModeArg::Random => LawMode::Random {
                    seed: g.seed.unwrap_or(0),
                    trials: g.trials.unwrap_or(10_000) as u64,
                },
            };
            let ids: Vec<&str> = laws.iter().map(String::as_str).collect();
            let report = check_laws(model, n, &ids, mode)?;
            if g.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for r in &report.results {
                    let mark = if r.pass { "pass" } else { "FAIL" };
                    print!("{:<20} {:<10} {mark} ({} instances)", r.law, r.mode, r.checked);
                    match &r.counterexample {
                        Some(c) => println!(": {c}"),
                        None => println!(),
                    }
                }
            }
            Ok(if report.all_pass() { 0 } else { 2 })
        }
        Command::Fmt { file, check } => {
            let src = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let spec = parse_spec(&src).with_context(|| format!("parsing {}", file.display()))?;
            let pretty = print_spec(&spec);
            if check {
                if pretty != src {
                    eprintln!("{} is not formatted", file.display());
                    return Ok(1);
                }
                return Ok(0);
            }
            print!("{pretty}");
            Ok(0)
        }
    }
}
