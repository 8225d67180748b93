//! `cplab`: config-driven experiments over dyadic-grid weights.
//!
//! Usage: `cplab <verb> --config <path> --out <dir> [--seed <u64>]
//! [--jobs <n>] [--golden <dir>]` with verbs `check-weight`,
//! `sparse-dominate`, `verify`, `hunt`, `sweep`, and `report`.
//! `CPLAB_LOG` in `{quiet, info, debug}` controls stderr chatter.
//!
//! Exit codes: 0 success, 2 config/usage parse error, 3 numeric failure
//! (NaN), 1 anything else (including golden mismatches).

mod commands;
mod config;
mod output;

use commands::CommandInput;
use output::OutputSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd)]
pub enum LogLevel {
    Quiet,
    Info,
    Debug,
}

impl LogLevel {
    pub fn info(&self, msg: &str) {
        if *self >= LogLevel::Info {
            eprintln!("cplab: {msg}");
        }
    }

    pub fn debug(&self, msg: &str) {
        if *self >= LogLevel::Debug {
            eprintln!("cplab[debug]: {msg}");
        }
    }
}

struct Args {
    verb: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: usize,
    golden: Option<PathBuf>,
}

const USAGE: &str = "usage: cplab <check-weight|sparse-dominate|verify|hunt|sweep|report> \
--config <path> --out <dir> [--seed <u64>] [--jobs <n>] [--golden <dir>]";

fn parse_args() -> Result<Args, String> {
    let mut it = std::env::args().skip(1);
    let verb = it.next().ok_or(USAGE.to_string())?;
    const VERBS: [&str; 6] = [
        "check-weight",
        "sparse-dominate",
        "verify",
        "hunt",
        "sweep",
        "report",
    ];
    if !VERBS.contains(&verb.as_str()) {
        return Err(format!("unknown verb {verb:?}\n{USAGE}"));
    }
    let mut args = Args {
        verb,
        config: None,
        out: None,
        seed: None,
        jobs: 1,
        golden: None,
    };
    while let Some(flag) = it.next() {
        let mut value = || {
            it.next()
                .ok_or_else(|| format!("flag {flag} needs a value\n{USAGE}"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value()?)),
            "--out" => args.out = Some(PathBuf::from(value()?)),
            "--seed" => {
                args.seed = Some(
                    value()?
                        .parse()
                        .map_err(|_| "bad --seed value".to_string())?,
                )
            }
            "--jobs" => {
                args.jobs = value()?
                    .parse()
                    .map_err(|_| "bad --jobs value".to_string())?;
                if args.jobs == 0 {
                    return Err("--jobs must be at least 1".into());
                }
            }
            "--golden" => args.golden = Some(PathBuf::from(value()?)),
            other => return Err(format!("unknown flag {other:?}\n{USAGE}")),
        }
    }
    Ok(args)
}

fn log_level() -> Result<LogLevel, String> {
    match std::env::var("CPLAB_LOG").as_deref() {
        Err(_) | Ok("info") => Ok(LogLevel::Info),
        Ok("quiet") => Ok(LogLevel::Quiet),
        Ok("debug") => Ok(LogLevel::Debug),
        Ok(other) => Err(format!(
            "CPLAB_LOG must be quiet, info, or debug (found {other:?})"
        )),
    }
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": message, "exit": code })
    );
    ExitCode::from(code)
}

fn exit_code_for(err: &cplab::Error) -> u8 {
    match err {
        cplab::Error::Config(_) | cplab::Error::Format(_) => 2,
        cplab::Error::Parameter(m) if m.contains("NaN") => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(m) => return fail(2, &m),
    };
    let log = match log_level() {
        Ok(l) => l,
        Err(m) => return fail(2, &m),
    };

    let Some(out_dir) = args.out.clone() else {
        return fail(2, "--out is required");
    };

    if args.verb == "report" {
        return match commands::render_report(&out_dir) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(exit_code_for(&e), &e.to_string()),
        };
    }

    let Some(config_path) = args.config.clone() else {
        return fail(2, "--config is required");
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => return fail(2, &format!("cannot read {}: {e}", config_path.display())),
    };
    let raw = match config::RawConfig::parse(&text) {
        Ok(r) => r,
        Err(e) => return fail(2, &e.to_string()),
    };
    let config_dir = config_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let cfg = match config::build(&raw, &config_dir, args.seed) {
        Ok(c) => c,
        Err(e) => return fail(exit_code_for(&e), &e.to_string()),
    };
    log.debug(&format!("verb {} with config {:?}", args.verb, config_path));

    let input = CommandInput {
        raw,
        cfg,
        jobs: args.jobs,
        log,
    };
    let mut out = OutputSet::new(&out_dir);
    let run = match args.verb.as_str() {
        "check-weight" => commands::check_weight(&input, &mut out),
        "sparse-dominate" => commands::sparse_dominate(&input, &mut out),
        "verify" => commands::verify(&input, &mut out),
        "hunt" => commands::run_hunt(&input, &mut out),
        "sweep" => commands::run_sweep(&input, &mut out),
        _ => unreachable!("verb validated"),
    };
    if let Err(e) = run {
        return fail(exit_code_for(&e), &e.to_string());
    }
    if let Err(e) = out.flush() {
        return fail(1, &e.to_string());
    }
    if let Some(golden) = &args.golden {
        if let Err(e) = out.compare_golden(golden) {
            return fail(1, &e.to_string());
        }
        log.info("golden comparison passed");
    }
    log.info("done");
    ExitCode::SUCCESS
}
