//! Command-line front end: certified digit computation, verification
//! suites, long-run checkpointing, and machine-readable output.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 internal certification failure, 4 corrupt checkpoint.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use feigenbaum::decfix::FixedDec;
use feigenbaum::driver::{self, IterationState};
use feigenbaum::lanford;
use feigenbaum::verify;
use feigenbaum::Error;

/// Environment variable giving the directory for relative checkpoint
/// paths; explicit flags always override.
const CHECKPOINT_DIR_ENV: &str = "FEIGENBAUM_CHECKPOINT_DIR";

/// How often `run`/`resume` persist the state when a checkpoint path is
/// given, in steps.
const CHECKPOINT_EVERY: u32 = 25;

#[derive(Parser)]
#[command(
    name = "feigenbaum",
    version,
    about = "Certified computation of the Feigenbaum function g and the constant alpha = 1/g(1)",
    long_about = "Computes the solution g of the period-doubling fixed-point equation and the \
                  scaling constant alpha = 1/g(1) to any requested number of decimal digits, \
                  with machine-checked error bounds. Every printed value is accompanied by a \
                  rigorous bound; verification subcommands re-derive the analytic facts the \
                  pipeline rests on."
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Print progress to stderr (repeat for more).
    #[arg(short = 'v', long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute alpha = 1/g(1) to n certified decimal digits.
    Alpha {
        /// Number of certified fractional digits (>= 1).
        #[arg(short = 'n', long = "digits", value_parser = clap::value_parser!(u32).range(1..))]
        digits: u32,
    },
    /// Compute certified enclosures of the Taylor coefficients a_1..a_k
    /// of g (written g(z) = 1 + a_1 z^2 + a_2 z^4 + ...).
    Taylor {
        /// Highest coefficient index (>= 1).
        #[arg(short = 'k', long = "order", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        /// Certified error <= 10^-n for each coefficient (>= 1).
        #[arg(short = 'n', long = "digits", value_parser = clap::value_parser!(u32).range(1..))]
        digits: u32,
    },
    /// Re-derive the analytic claims behind the pipeline and report
    /// pass/fail per check. Exits 1 if any check fails.
    Verify {
        /// Which checks to run.
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Seed for the randomized probes (deterministic per seed).
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Advance the iteration by a step count or to a digit target,
    /// optionally persisting checkpoints.
    Run {
        /// Number of iteration steps.
        #[arg(long, conflicts_with = "digits")]
        steps: Option<u32>,
        /// Or: iterate until the certified coordinate error is <= 10^-n.
        #[arg(short = 'n', long = "digits", value_parser = clap::value_parser!(u32).range(1..))]
        digits: Option<u32>,
        /// Checkpoint file; written every 25 steps and at the end.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Continue a checkpointed run.
    Resume {
        /// Checkpoint file to load and update.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Number of additional steps.
        #[arg(long)]
        steps: u32,
    },
    /// Print the seed coefficient table and the trusted constants.
    Constants,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    /// Seed displacement + contraction probe.
    Lemma,
    /// Coefficient decay envelope.
    Decay,
    /// Functional-equation residual enclosures.
    Residual,
    /// Domain-membership inequalities.
    Dmembership,
    /// Cross-precision agreement.
    Consistency,
    /// Everything above.
    All,
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (`feigenbaum ... | head`)
    // instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, Error> {
    match &cli.cmd {
        Cmd::Alpha { digits } => cmd_alpha(*digits, cli),
        Cmd::Taylor { order, digits } => cmd_taylor(*order, *digits, cli),
        Cmd::Verify { suite, seed } => cmd_verify(*suite, *seed, cli),
        Cmd::Run {
            steps,
            digits,
            checkpoint,
        } => cmd_run(*steps, *digits, checkpoint.as_deref(), cli),
        Cmd::Resume { checkpoint, steps } => cmd_resume(checkpoint, *steps, cli),
        Cmd::Constants => cmd_constants(cli),
    }
}

/// Advance from the seed to depth `m`, with progress chatter on stderr
/// when requested.
fn advance_to(m: u32, cli: &Cli) -> Result<IterationState, Error> {
    driver::verify_error_chain(m)?;
    let verbose = cli.verbose;
    driver::run_steps(driver::initial_state(), m, |s| {
        if verbose >= 2 || (verbose >= 1 && s.m() % 25 == 0) {
            eprintln!("step {} of {m} (scale {})", s.m(), s.scale());
        }
        Ok(())
    })
}

fn cmd_alpha(n: u32, cli: &Cli) -> Result<u8, Error> {
    let m = driver::m_for_alpha(n);
    let s = advance_to(m, cli)?;
    let a = driver::alpha(&s, n)?;
    match cli.format {
        Format::Plain => {
            println!("alpha = {}", a.value);
            println!("error <= {} (certified)", a.error_bound);
            println!("depth m = {}, working scale = {} digits", a.m_used, s.scale());
        }
        Format::Json => {
            print_json(&serde_json::json!({
                "schema_version": verify::REPORT_SCHEMA_VERSION,
                "value": a.value.to_string(),
                "error_bound": a.error_bound.to_string(),
                "digits": n,
                "m": a.m_used,
            }));
        }
    }
    Ok(0)
}

fn cmd_taylor(k: u32, n: u32, cli: &Cli) -> Result<u8, Error> {
    let m = driver::m_for_taylor(k, n);
    let s = advance_to(m, cli)?;
    let enclosures = driver::taylor(&s, k, n)?;
    match cli.format {
        Format::Plain => {
            for (l, iv) in enclosures.iter().enumerate() {
                println!(
                    "a_{} in [{}, {}] (width {})",
                    l + 1,
                    iv.lo(),
                    iv.hi(),
                    iv.width()
                );
            }
            println!("each width <= 1e-{n}; depth m = {}", s.m());
        }
        Format::Json => {
            let rows: Vec<_> = enclosures
                .iter()
                .enumerate()
                .map(|(l, iv)| {
                    serde_json::json!({
                        "i": l + 1,
                        "value": iv.mid().to_string(),
                        "error_bound": iv.width().halved().to_string(),
                        "lo": iv.lo().to_string(),
                        "hi": iv.hi().to_string(),
                    })
                })
                .collect();
            print_json(&serde_json::json!({
                "schema_version": verify::REPORT_SCHEMA_VERSION,
                "digits": n,
                "m": s.m(),
                "coefficients": rows,
            }));
        }
    }
    Ok(0)
}

/// Depth shared by the state-based verification suites: deep enough that
/// the enclosure-width targets are comfortably met, shallow enough to
/// recompute on every invocation.
const VERIFY_DEPTH: u32 = 50;

fn cmd_verify(suite: SuiteArg, seed: u64, cli: &Cli) -> Result<u8, Error> {
    let mut parts: Vec<verify::VerificationReport> = Vec::new();
    let needs_state = matches!(
        suite,
        SuiteArg::Decay | SuiteArg::Residual | SuiteArg::Dmembership | SuiteArg::All
    );
    let state = if needs_state {
        Some(advance_to(VERIFY_DEPTH, cli)?)
    } else {
        None
    };

    if matches!(suite, SuiteArg::Lemma | SuiteArg::All) {
        parts.push(verify::reproduce_phi_psi0_bound()?);
        parts.push(verify::contraction_probe(100, seed)?);
    }
    if matches!(suite, SuiteArg::Decay | SuiteArg::All) {
        parts.push(verify::decay_check(state.as_ref().expect("state prepared")));
    }
    if matches!(suite, SuiteArg::Residual | SuiteArg::All) {
        let s = state.as_ref().expect("state prepared");
        parts.push(verify::functional_equation_residual(
            s,
            &verify::residual_grid(),
            s.scale() + 20,
        )?);
    }
    if matches!(suite, SuiteArg::Dmembership | SuiteArg::All) {
        let s = state.as_ref().expect("state prepared");
        parts.push(verify::d_membership(s, s.scale() + 20)?);
    }
    if matches!(suite, SuiteArg::Consistency | SuiteArg::All) {
        parts.push(verify::self_consistency(2, 1)?);
    }

    let report = verify::VerificationReport::merged(parts);
    match cli.format {
        Format::Plain => print!("{}", report.render_table()),
        Format::Json => print_json(&report.to_json()),
    }
    if report.all_passed() {
        Ok(0)
    } else {
        eprintln!("failed checks: {}", report.failures().join(", "));
        Ok(1)
    }
}

fn cmd_run(
    steps: Option<u32>,
    digits: Option<u32>,
    checkpoint: Option<&Path>,
    cli: &Cli,
) -> Result<u8, Error> {
    let steps = match (steps, digits) {
        (Some(s), None) => s,
        (None, Some(n)) => driver::steps_for_precision(n),
        _ => {
            eprintln!("error: exactly one of --steps and --digits is required");
            return Ok(2);
        }
    };
    driver::verify_error_chain(steps)?;
    let path = checkpoint.map(resolve_checkpoint_path);
    let verbose = cli.verbose;
    let s = driver::run_steps(driver::initial_state(), steps, |s| {
        if verbose >= 2 || (verbose >= 1 && s.m() % 25 == 0) {
            eprintln!("step {} of {steps} (scale {})", s.m(), s.scale());
        }
        if let Some(p) = &path {
            if s.m() % CHECKPOINT_EVERY == 0 {
                driver::save_checkpoint(s, p)?;
            }
        }
        Ok(())
    })?;
    if let Some(p) = &path {
        driver::save_checkpoint(&s, p)?;
    }
    print_state_summary(&s, path.as_deref(), cli);
    Ok(0)
}

fn cmd_resume(checkpoint: &Path, steps: u32, cli: &Cli) -> Result<u8, Error> {
    let path = resolve_checkpoint_path(checkpoint);
    let start = driver::load_checkpoint(&path)?;
    driver::verify_error_chain(start.m() + steps)?;
    let verbose = cli.verbose;
    let target = start.m() + steps;
    let path_for_saves = path.clone();
    let s = driver::run_steps(start, steps, |s| {
        if verbose >= 2 || (verbose >= 1 && s.m() % 25 == 0) {
            eprintln!("step {} of {target} (scale {})", s.m(), s.scale());
        }
        if s.m() % CHECKPOINT_EVERY == 0 {
            driver::save_checkpoint(s, &path_for_saves)?;
        }
        Ok(())
    })?;
    driver::save_checkpoint(&s, &path)?;
    print_state_summary(&s, Some(&path), cli);
    Ok(0)
}

fn cmd_constants(cli: &Cli) -> Result<u8, Error> {
    let seed = lanford::psi0();
    match cli.format {
        Format::Plain => {
            println!("representation: psi(z) = 1 - z^2 (u/10 + sum_i nu_i w^i), w = (z^2-1)/2.5");
            println!("seed coefficients (exact, 41 fractional digits):");
            println!("  u    = {}", seed.u);
            for (i, v) in seed.nu.iter().enumerate() {
                println!("  nu_{} = {v}", i + 1);
            }
            println!("trusted constants:");
            println!("  contraction factor      0.9 on the 0.009-ball around the seed");
            println!("  Newton-step divisor     3.669");
            println!("  error schedule          B_m = 0.01 * 0.93^m");
            println!("  decay envelope          |nu_i| <= (62/13) * (5/13)^i, tail factor 31/4");
        }
        Format::Json => {
            print_json(&serde_json::json!({
                "schema_version": verify::REPORT_SCHEMA_VERSION,
                "u": seed.u.to_string(),
                "nu": seed.nu.iter().map(FixedDec::to_string).collect::<Vec<_>>(),
                "contraction_factor": "0.9",
                "ball_radius": "0.009",
                "newton_divisor": "3.669",
                "error_schedule": "0.01 * 0.93^m",
                "decay": { "c": "62/13", "ratio": "5/13", "tail_factor": "31/4" },
            }));
        }
    }
    Ok(0)
}

fn print_state_summary(s: &IterationState, path: Option<&Path>, cli: &Cli) {
    let b = s.error_bound_upper(s.scale());
    match cli.format {
        Format::Plain => {
            println!("m = {}, scale = {} digits, coefficients = {}", s.m(), s.scale(), 10 + s.m());
            println!("lambda = g(1) estimate = {}", s.coords().lambda());
            println!("certified coordinate error <= {b}");
            if let Some(p) = path {
                println!("checkpoint: {}", p.display());
            }
        }
        Format::Json => {
            print_json(&serde_json::json!({
                "schema_version": verify::REPORT_SCHEMA_VERSION,
                "m": s.m(),
                "scale": s.scale(),
                "coefficients": 10 + s.m(),
                "lambda": s.coords().lambda().to_string(),
                "error_bound": b.to_string(),
                "checkpoint": path.map(|p| p.display().to_string()),
            }));
        }
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

/// Relative checkpoint paths resolve against `FEIGENBAUM_CHECKPOINT_DIR`
/// when it is set; absolute paths and unset environments pass through.
fn resolve_checkpoint_path(p: &Path) -> PathBuf {
    if p.is_absolute() {
        return p.to_path_buf();
    }
    match std::env::var_os(CHECKPOINT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(p),
        _ => p.to_path_buf(),
    }
}
