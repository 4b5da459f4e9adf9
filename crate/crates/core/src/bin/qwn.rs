use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwn::cli::{self, AlgebraChoice, RunConfig, Suite};
use qwn::report::VerificationReport;

#[derive(Parser)]
#[command(name = "qwn", version, about = "Numerical checks for quadratic, free and q-deformed white-noise Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a JSON report.
    Verify {
        /// bosonic, diagonal, free, qdeform, classical, nogo or all
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Normal-order an operator word and print its normal form.
    Rewrite {
        /// JSON list of letters, e.g. '[{"kind":"b","symbol":"one"},{"kind":"b*","symbol":"e0"}]'
        #[arg(long)]
        word: String,
        /// JSON object of named symbols: {"phi": [1.0, 2.0]} or {"phi": [[1, 0], [0, 1]]}
        #[arg(long)]
        symbols: Option<String>,
        /// coefficient in [n, b*] = kappa b*
        #[arg(long, default_value_t = 2.0)]
        kappa: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerator self-checks.
    Combinatorics {
        #[command(subcommand)]
        action: CombAction,
    },
}

#[derive(Subcommand)]
enum CombAction {
    Selftest {
        #[arg(long)]
        output: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// functions or matrices
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = "QWN_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    l: Option<f64>,
    /// report path, `-` for stdout
    #[arg(long)]
    output: Option<String>,
    /// include wall-clock time in the report
    #[arg(long)]
    include_timing: bool,
}

impl Common {
    fn resolve(&self) -> qwn::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| qwn::Error::Config(format!("{}: {e}", p.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        over!(gamma0, gamma, q, s, dim, truncation, trials, seed, tol, order, l);
        if let Some(a) = &self.algebra {
            cfg.algebra = match a.as_str() {
                "functions" => AlgebraChoice::Functions,
                "matrices" => AlgebraChoice::Matrices,
                other => return Err(qwn::Error::Config(format!("unknown algebra {other:?}"))),
            };
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.include_timing |= self.include_timing;
        Ok(cfg)
    }
}

fn emit(report: &VerificationReport, output: Option<&str>) -> qwn::Result<()> {
    let text = cli::canonical_json(report)?;
    match output {
        None | Some("-") => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| qwn::Error::Io(format!("{path}: {e}"))),
    }
}

fn run(cli: Cli) -> qwn::Result<VerificationReport> {
    match cli.command {
        Command::Verify { suite, common } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = suite {
                cfg.suite = Some(Suite::parse(&s)?);
            }
            let report = cli::run_suite(&cfg)?;
            emit(&report, cfg.output.as_deref())?;
            Ok(report)
        }
        Command::Rewrite { word, symbols, kappa, common } => {
            let cfg = common.resolve()?;
            let report = cli::run_rewrite(&cfg, &word, symbols.as_deref(), kappa)?;
            emit(&report, cfg.output.as_deref())?;
            Ok(report)
        }
        Command::Combinatorics { action: CombAction::Selftest { output } } => {
            let report = cli::combinatorics_selftest()?;
            emit(&report, output.as_deref())?;
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(r) if r.any_failed() => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
