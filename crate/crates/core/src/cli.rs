//! `gdpc compile`: parse, normalize, reformulate, then emit and optionally verify.

use std::io::{IsTerminal, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::emit::{emit_algebraic, emit_json};
use crate::error::{Error, Result};
use crate::normalize::PASSES;
use crate::pipeline::compile;
use crate::reform::{BigMPolicy, HullVariant, Method, ReformOptions, DEFAULT_EPS, EPS_WARN};
use crate::verify::{verify, GridSpec, DEFAULT_PER_DIM};

/// Exit status when `--verify` finds a mismatch.
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitFormat {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "gdpc", version, about = "Compile if-else models into disjunctive programs and MINLPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reformulate a `.gdp` program.
    Compile(CompileArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CompileArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "true-false")]
    pub method: Method,
    /// Perturbation of the hull backend (default 1e-6).
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub hull_variant: Option<HullVariant>,
    /// `label=M` overrides or a bare M for every row; repeatable, comma-separated.
    #[arg(long)]
    pub bigm: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub emit: EmitFormat,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub verify: bool,
    /// Samples per input dimension for `--verify`.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Print one intermediate stage instead of the model.
    #[arg(long)]
    pub dump_pass: Option<String>,
    #[arg(long)]
    pub report_json: Option<PathBuf>,
}

/// Validated settings of one `compile` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub input: PathBuf,
    pub options: ReformOptions,
    pub emit: EmitFormat,
    pub output: Option<PathBuf>,
    pub verify: bool,
    pub grid: usize,
    pub dump_pass: Option<String>,
    pub report_json: Option<PathBuf>,
}

impl CliConfig {
    pub fn from_args(a: CompileArgs) -> Result<CliConfig> {
        let hull = a.method == Method::HullEps;
        if a.eps.is_some() && !hull {
            return Err(Error::Usage("--eps only applies to --method hull-eps".into()));
        }
        if a.hull_variant.is_some() && !hull {
            return Err(Error::Usage("--hull-variant only applies to --method hull-eps".into()));
        }
        if !a.bigm.is_empty() && a.method != Method::BigM {
            return Err(Error::Usage("--bigm only applies to --method bigm".into()));
        }
        if a.grid.is_some() && !a.verify {
            return Err(Error::Usage("--grid needs --verify".into()));
        }
        if a.report_json.is_some() && !a.verify {
            return Err(Error::Usage("--report-json needs --verify".into()));
        }
        if let Some(p) = &a.dump_pass {
            if !PASSES.contains(&p.as_str()) {
                return Err(Error::Usage(format!("unknown pass `{p}`; expected one of {}", PASSES.join(", "))));
            }
        }
        let eps = a.eps.unwrap_or(DEFAULT_EPS);
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::EpsNonpositive(eps));
        }
        if eps < EPS_WARN {
            return Err(Error::Usage(format!(
                "eps {eps:e} is below {EPS_WARN:e}; perturbations of order 1e-15 cause numerical difficulties in NLP solvers"
            )));
        }
        let grid = a.grid.unwrap_or(DEFAULT_PER_DIM);
        if grid == 0 {
            return Err(Error::Usage("--grid must be at least 1".into()));
        }
        let options = ReformOptions {
            method: a.method,
            eps,
            variant: a.hull_variant.unwrap_or_default(),
            bigm: BigMPolicy::parse(&a.bigm)?,
        };
        Ok(CliConfig {
            input: a.input,
            options,
            emit: a.emit,
            output: a.output,
            verify: a.verify,
            grid,
            dump_pass: a.dump_pass,
            report_json: a.report_json,
        })
    }
}

/// How diagnostics on stderr are colored, from `GDPC_COLOR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorChoice {
    Auto,
    Always,
    Never,
}

impl ColorChoice {
    pub fn from_env() -> ColorChoice {
        match std::env::var("GDPC_COLOR").as_deref() {
            Ok("always") => ColorChoice::Always,
            Ok("never") => ColorChoice::Never,
            _ => ColorChoice::Auto,
        }
    }

    pub fn enabled(self) -> bool {
        match self {
            ColorChoice::Always => true,
            ColorChoice::Never => false,
            ColorChoice::Auto => std::io::stderr().is_terminal(),
        }
    }
}

fn tag(color: bool, code: &str, word: &str) -> String {
    if color {
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.to_string()
    }
}

/// Parses `args` (including the program name) and runs. Returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let color = ColorChoice::from_env().enabled();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let Command::Compile(a) = cli.command;
    match CliConfig::from_args(a) {
        Ok(cfg) => run(&cfg, out, err, color),
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", tag(color, "31", "error"));
            e.exit_code()
        }
    }
}

/// Runs a validated configuration: model (or dump) to stdout or `-o`, stats
/// and verification report to stderr.
pub fn run(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32 {
    match run_inner(cfg, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", tag(color, "31", "error"));
            e.exit_code()
        }
    }
}

fn run_inner(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let text = std::fs::read_to_string(&cfg.input).map_err(|e| Error::Io(format!("{}: {e}", cfg.input.display())))?;
    let c = compile(&text, &cfg.options)?;
    let body = match &cfg.dump_pass {
        Some(p) => c.normalized.dump(p).expect("pass names are validated"),
        None => match cfg.emit {
            EmitFormat::Json => emit_json(&c.minlp) + "\n",
            EmitFormat::Text => emit_algebraic(&c.minlp),
        },
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, &body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => out.write_all(body.as_bytes()).map_err(io)?,
    }
    writeln!(err, "stats: {}", c.stats).map_err(io)?;
    if !cfg.verify {
        return Ok(0);
    }
    let grid = GridSpec::per_dim(c.source(), cfg.grid)?;
    let report = verify(&c, &grid)?;
    writeln!(err, "{report}").map_err(io)?;
    if let Some(path) = &cfg.report_json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Json(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(if report.equivalent() { 0 } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<CliConfig> {
        let argv = ["gdpc", "compile", "m.gdp"].iter().chain(args).map(|s| s.to_string());
        let Command::Compile(a) = Cli::try_parse_from(argv).unwrap().command;
        CliConfig::from_args(a)
    }

    #[test]
    fn defaults() {
        let c = cfg(&[]).unwrap();
        assert_eq!(c.options, ReformOptions::default());
        assert_eq!((c.emit, c.grid, c.verify), (EmitFormat::Text, DEFAULT_PER_DIM, false));
    }

    #[test]
    fn misplaced_flags_are_usage_errors() {
        for args in [
            &["--eps", "1e-5"][..],
            &["--bigm", "10"],
            &["--hull-variant", "sawaya-2"],
            &["--grid", "5"],
            &["--dump-pass", "nope"],
        ] {
            assert_eq!(cfg(args).unwrap_err().exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn eps_checks() {
        assert_eq!(cfg(&["--method", "hull-eps", "--eps", "0"]).unwrap_err(), Error::EpsNonpositive(0.0));
        assert!(matches!(cfg(&["--method", "hull-eps", "--eps", "-1"]), Err(Error::EpsNonpositive(_))));
        assert!(matches!(cfg(&["--method", "hull-eps", "--eps", "1e-15"]), Err(Error::Usage(_))));
        let c = cfg(&["--method", "hull-eps", "--eps", "1e-4", "--hull-variant", "sawaya-2"]).unwrap();
        assert_eq!((c.options.eps, c.options.variant), (1e-4, HullVariant::Sawaya2));
    }

    #[test]
    fn bigm_values() {
        let c = cfg(&["--method", "bigm", "--bigm", "k1_t1_c1=7,20"]).unwrap();
        assert_eq!(c.options.bigm.get("k1_t1_c1"), Some(7.0));
        assert_eq!(c.options.bigm.get("other"), Some(20.0));
    }
}
