use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinlab_cli::config::{self, CmConfig, RsConfig, SolitonConfig, Suite, VerifyConfig};
use spinlab_cli::report::Report;
use spinlab_cli::{simulate, soliton, verify, Failure, EXIT_VERIFY_FAILED};
use spinlab_core::ode::Scheme;
use spinlab_core::Form;

/// Spin Calogero-Moser / Ruijsenaars-Schneider simulations, affine Toda
/// soliton scans and numerical verification suites.
///
/// Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
/// 3 numerical breakdown.
#[derive(Parser)]
#[command(name = "spinlab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a spin system and write the trajectory as CSV.
    Simulate {
        #[command(subcommand)]
        system: System,
    },
    /// Scan a Toda soliton over a light-cone grid.
    Soliton(SolitonArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum System {
    /// Spin Calogero-Moser.
    Cm(CmArgs),
    /// Spin Ruijsenaars-Schneider.
    Rs(RsArgs),
}

#[derive(Args)]
struct Io {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Run {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Write every k-th sample.
    #[arg(long)]
    every: Option<usize>,
}

#[derive(Args)]
struct CmArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    run: Run,
    /// compact or normal
    #[arg(long)]
    form: Option<Form>,
}

#[derive(Args)]
struct RsArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    run: Run,
}

#[derive(Args)]
struct SolitonArgs {
    #[command(flatten)]
    io: Io,
    /// Soliton data as JSON: rank, m, beta, theta, eta, v0 {re, im}.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Toda rank of a random spec.
    #[arg(long)]
    rank: Option<usize>,
    /// Number of solitons of a random spec.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    grid_lo: Option<f64>,
    #[arg(long)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides every tolerance of the suite.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn finish(report: Report, path: Option<&std::path::Path>) -> Result<bool, Failure> {
    for c in &report.checks {
        eprintln!(
            "{} {:<32} {:.3e} (tol {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance
        );
    }
    report.write(path)?;
    Ok(report.pass)
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Simulate { system: System::Cm(a) } => {
            let mut c: CmConfig = config::load(a.io.config.as_deref())?;
            set(&mut c.n, a.run.n);
            set(&mut c.t_final, a.run.t_final);
            set(&mut c.dt, a.run.dt);
            set(&mut c.scheme, a.run.scheme);
            set(&mut c.every, a.run.every);
            set(&mut c.form, a.form);
            c.seed = a.io.seed.or(c.seed);
            let r = simulate::simulate_cm(&c, a.io.out.as_deref())?;
            finish(r, a.io.report.as_deref())
        }
        Cmd::Simulate { system: System::Rs(a) } => {
            let mut c: RsConfig = config::load(a.io.config.as_deref())?;
            set(&mut c.n, a.run.n);
            set(&mut c.t_final, a.run.t_final);
            set(&mut c.dt, a.run.dt);
            set(&mut c.scheme, a.run.scheme);
            set(&mut c.every, a.run.every);
            c.seed = a.io.seed.or(c.seed);
            let r = simulate::simulate_rs(&c, a.io.out.as_deref())?;
            finish(r, a.io.report.as_deref())
        }
        Cmd::Soliton(a) => {
            let mut c: SolitonConfig = config::load(a.io.config.as_deref())?;
            if a.spec.is_some() {
                c.spec = None;
                c.spec_path = a.spec;
            }
            set(&mut c.rank, a.rank);
            set(&mut c.n, a.n);
            set(&mut c.grid.lo, a.grid_lo);
            set(&mut c.grid.hi, a.grid_hi);
            set(&mut c.grid.count, a.grid_count);
            set(&mut c.tol, a.tol);
            c.seed = a.io.seed.or(c.seed);
            let r = soliton::run(&c, a.io.out.as_deref())?;
            finish(r, a.io.report.as_deref())
        }
        Cmd::Verify(a) => {
            let mut c: VerifyConfig = config::load(a.config.as_deref())?;
            c.suite = a.suite;
            set(&mut c.n, a.n);
            set(&mut c.t_final, a.t_final);
            set(&mut c.dt, a.dt);
            set(&mut c.scheme, a.scheme);
            c.trials = a.trials.or(c.trials);
            c.tol = a.tol.or(c.tol);
            c.seed = a.seed.or(c.seed);
            let r = verify::run(&c)?;
            finish(r, a.report.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(f) => {
            eprintln!("spinlab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
