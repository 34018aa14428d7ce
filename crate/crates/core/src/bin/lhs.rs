use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lhs_sim::diagnostics::PairDiagnostics;
use lhs_sim::guarantees::{CheckOptions, GuaranteeMonitor};
use lhs_sim::harness::{
    parse_config, prepare, run_single, run_suite, run_sweep, write_run, write_sweep, Config, RunConfig, Suite,
};

#[derive(Parser)]
#[command(name = "lhs", about = "Frustrated Lohe hermitian sphere simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its CSV and summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Exit 1 if any checked envelope is violated.
        #[arg(long)]
        strict: bool,
    },
    /// Run every coupling and replicate of a sweep file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print hypotheses, thresholds, rates and roots without integrating.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Conservation,
    Splitting,
    Reduction,
    Meanfield,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Conservation => Suite::Conservation,
            SuiteArg::Splitting => Suite::Splitting,
            SuiteArg::Reduction => Suite::Reduction,
            SuiteArg::Meanfield => Suite::Meanfield,
            SuiteArg::All => Suite::All,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
    Envelope,
}

impl From<lhs_sim::Error> for Failure {
    fn from(e: lhs_sim::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(path: &Path) -> Result<Config, Failure> {
    parse_config(path).map_err(|e| Failure::Config(e.to_string()))
}

fn simulate(path: &Path, strict: bool) -> Result<(), Failure> {
    let cfg = match load(path)? {
        Config::Run(c) => c,
        Config::Sweep(_) => {
            return Err(Failure::Config(format!(
                "{} is a sweep file; use `lhs sweep`",
                path.display()
            )))
        }
    };
    let out = run_single(&cfg)?;
    let csv = write_run(&out)?;
    println!("wrote {}", csv.display());
    println!("J_M_final={:e}", out.rows.last().map_or(f64::NAN, |r| r.j_m));
    println!("max_norm_drift={:e}", out.max_norm_drift);
    for rep in &out.reports {
        let env = rep
            .envelope
            .as_ref()
            .map_or("not_applicable", |e| if e.passed { "pass" } else { "fail" });
        println!("{} hypothesis={} envelope={env}", rep.theorem_id.label(), rep.hypothesis_satisfied);
    }
    if strict && !out.envelopes_hold() {
        return Err(Failure::Envelope);
    }
    Ok(())
}

fn sweep(path: &Path) -> Result<(), Failure> {
    let sw = match load(path)? {
        Config::Sweep(s) => s,
        Config::Run(_) => {
            return Err(Failure::Config(format!(
                "{} has no `kappa0_values`; use `lhs simulate`",
                path.display()
            )))
        }
    };
    let report = run_sweep(&sw)?;
    let summary = write_sweep(&report)?;
    println!("wrote {}", summary.display());
    for (k, col) in sw.kappa0_values.iter().enumerate() {
        let tails: Vec<String> = report.tails().iter().map(|b| format!("{:.4e}", b[k])).collect();
        println!("kappa0={col} tail_sup_J_M=[{}]", tails.join(","));
    }
    if let Some(o) = &report.ordering {
        println!("decreasing: {}/{}", o.decreasing_passes, o.replicates);
        for b in &o.bounding {
            println!("bounding kappa0={}: {}/{}", b.kappa0, b.passes, o.replicates);
        }
    }
    if let Some(s) = report.slope {
        println!("log_tail_slope={s:.4}");
    }
    Ok(())
}

fn check(path: &Path) -> Result<(), Failure> {
    let (cfg, couplings): (RunConfig, Vec<f64>) = match load(path)? {
        Config::Run(c) => {
            let k = c.kappa0;
            (c, vec![k])
        }
        Config::Sweep(s) => (s.base, s.kappa0_values),
    };
    let others = if couplings.len() > 1 { couplings.clone() } else { Vec::new() };
    let prepared = prepare(&cfg, &others)?;
    let diag = PairDiagnostics::compute(&prepared.init);
    println!("init_threshold={:e}", prepared.init_threshold);
    println!("J_M_initial={:e}", diag.j_m);
    let opts = CheckOptions {
        tail_fraction: cfg.tail_fraction,
    };
    for k in couplings {
        let params = prepared.params.clone().with_kappa0(k)?;
        let monitor = GuaranteeMonitor::new(&params, 0.0, &diag, opts)?;
        for rep in monitor.initial_reports() {
            for (key, v) in rep.to_kv() {
                if !key.ends_with(".envelope") {
                    println!("kappa0={k} {key}={v}");
                }
            }
        }
    }
    Ok(())
}

fn verify(suite: Suite) -> Result<(), Failure> {
    let checks = run_suite(suite)?;
    for c in &checks {
        println!("{c}");
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "{} of {} checks failed",
            checks.iter().filter(|c| !c.passed).count(),
            checks.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, strict } => simulate(&config, strict),
        Command::Sweep { config } => sweep(&config),
        Command::Check { config } => check(&config),
        Command::Verify { suite } => verify(suite.into()),
        Command::Version => {
            println!("lhs {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Envelope) => {
            eprintln!("error: envelope violated");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
