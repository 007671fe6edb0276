//! `ospep` command line: tight contraction factors for splitting methods.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure.

mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ospep_core::analytic::{lower_bound_mu_coco, lower_bound_mu_lipschitz, RateFamily};
use ospep_core::ospep::{certificate_is_feasible, tight_contraction_factor, ComputeOptions};
use ospep_core::search::{optimize_alpha, rho_curve, SearchSettings, SearchStatus};
use ospep_core::sdp::{SolveStatus, SolverSettings};

use config::read_config;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ospep",
    about = "Tight contraction factors for forward-backward, Douglas-Rachford, \
             and Davis-Yin splitting via small semidefinite programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tight factor for a fixed (alpha, theta), with certificate.
    Rho(RhoArgs),
    /// Closed-form Douglas-Rachford rate for one assumption family.
    ClosedForm(ClosedFormArgs),
    /// Sweep a parameter grid, cross-checking closed forms, SDP values,
    /// certificates, and worst-case constructions.
    Verify(VerifyArgs),
    /// Worst-case operators: Gram-extracted (from a config) or the explicit
    /// 2x2 construction (from a closed-form family).
    WorstCase(WorstCaseArgs),
    /// Optimal (alpha, theta) by unimodal search over alpha.
    Optimize(OptimizeArgs),
    /// CSV curve of rho^2*(alpha).
    Curve(CurveArgs),
}

#[derive(Args)]
struct RhoArgs {
    /// Path to a JSON problem config (`-` for stdin).
    #[arg(long)]
    config: String,
}

#[derive(Args)]
struct ClosedFormArgs {
    /// Assumption family: `mu-coco` or `mu-lip`.
    #[arg(long)]
    family: String,
    #[arg(long)]
    mu: f64,
    /// Cocoercivity modulus (family `mu-coco`).
    #[arg(long)]
    beta: Option<f64>,
    /// Lipschitz constant (family `mu-lip`).
    #[arg(long)]
    lip: Option<f64>,
    #[arg(long)]
    theta: f64,
    /// Step size; closed forms are evaluated at rescaled parameters.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Assumption family: `mu-coco`, `mu-lip`, or `both`.
    #[arg(long, default_value = "both")]
    family: String,
    /// Grid points per axis (mu and the second parameter log-spaced in
    /// [0.1, 10], theta linear in [0.1, 1.9]).
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Largest allowed discrepancy between the four value routes.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Certificate samples per branch.
    #[arg(long, default_value_t = 200)]
    cert_samples: usize,
    /// Relative multiplicative jitter applied to grid coordinates (0 = off).
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// RNG seed for jitter and certificate sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt one certificate on purpose (self-test of the failure path).
    #[arg(long, default_value_t = false)]
    inject_fault: bool,
}

#[derive(Args)]
struct WorstCaseArgs {
    /// JSON problem config: extract the instance from the optimal Gram
    /// matrix of the SDP.
    #[arg(long)]
    config: Option<String>,
    /// Closed-form family (`mu-coco` / `mu-lip`): emit the explicit 2x2
    /// construction instead.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lip: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON problem config; `theta` and `alpha` in it are ignored.
    #[arg(long)]
    config: String,
    #[arg(long, default_value_t = 1e-4)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1e4)]
    alpha_max: f64,
    /// Relative bracket width at which the alpha search stops.
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
}

#[derive(Args)]
struct CurveArgs {
    /// JSON problem config; a present `theta` fixes the relaxation, an
    /// absent one optimizes it per point.
    #[arg(long)]
    config: String,
    #[arg(long)]
    alpha_min: f64,
    #[arg(long)]
    alpha_max: f64,
    /// Number of log-spaced sample points.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Rho(args) => cmd_rho(&args),
        Command::ClosedForm(args) => cmd_closed_form(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::WorstCase(args) => cmd_worst_case(&args),
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Curve(args) => cmd_curve(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Solver(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn parse_family(name: &str) -> Result<RateFamily, CliError> {
    match name {
        "mu-coco" => Ok(RateFamily::MuCoco),
        "mu-lip" => Ok(RateFamily::MuLip),
        other => Err(CliError::Config(format!(
            "unknown family {other:?}; expected \"mu-coco\" or \"mu-lip\""
        ))),
    }
}

fn family_second(
    family: RateFamily,
    beta: Option<f64>,
    lip: Option<f64>,
) -> Result<f64, CliError> {
    match family {
        RateFamily::MuCoco => {
            beta.ok_or_else(|| CliError::Config("family mu-coco requires --beta".into()))
        }
        RateFamily::MuLip => {
            lip.ok_or_else(|| CliError::Config("family mu-lip requires --lip".into()))
        }
    }
}

fn cmd_rho(args: &RhoArgs) -> Result<(), CliError> {
    let cfg = read_config(&args.config)?;
    let classes = cfg.classes()?;
    let spec = cfg.method_spec()?;
    let opts = ComputeOptions { settings: cfg.solver_settings()?, want_worst_case: true };
    let result = tight_contraction_factor(&classes, &spec, &opts)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if result.status != SolveStatus::Optimal {
        // Degenerate class intersections break strict feasibility, so the
        // solver may stop short of full tolerance; a dual-feasible
        // certificate still proves the reported value as an upper bound.
        let proven = !result.strong_duality
            && certificate_is_feasible(&classes, &spec, &result.certificate, 1e-7)
                .unwrap_or(false);
        if !proven {
            return Err(CliError::Solver(format!("status {:?}", result.status)));
        }
    }
    println!("{}", output::rho_json(&result));
    Ok(())
}

fn cmd_closed_form(args: &ClosedFormArgs) -> Result<(), CliError> {
    let family = parse_family(&args.family)?;
    let second = family_second(family, args.beta, args.lip)?;
    let value = match family {
        RateFamily::MuCoco => {
            ospep_core::analytic::drs_rate_mu_coco_alpha(args.alpha, args.mu, second, args.theta)
        }
        RateFamily::MuLip => ospep_core::analytic::drs_rate_mu_lipschitz_alpha(
            args.alpha,
            args.mu,
            second,
            args.theta,
        ),
    };
    let (rho, label) = value.map_err(|e| CliError::Config(e.to_string()))?;
    println!("{}", output::closed_form_json(rho, &label));
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let families: Vec<RateFamily> = match args.family.as_str() {
        "both" => vec![RateFamily::MuCoco, RateFamily::MuLip],
        name => vec![parse_family(name)?],
    };
    if args.grid < 1 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let mut all_ok = true;
    for family in families {
        let summary = output::run_verify_sweep(family, args)?;
        println!("{summary}");
        all_ok &= summary.pass;
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Solver("verification failures detected".into()))
    }
}

fn cmd_worst_case(args: &WorstCaseArgs) -> Result<(), CliError> {
    match (&args.config, &args.family) {
        (Some(path), None) => {
            let cfg = read_config(path)?;
            let classes = cfg.classes()?;
            let spec = cfg.method_spec()?;
            let opts =
                ComputeOptions { settings: cfg.solver_settings()?, want_worst_case: true };
            let result = tight_contraction_factor(&classes, &spec, &opts)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if result.status != SolveStatus::Optimal {
                return Err(CliError::Solver(format!("status {:?}", result.status)));
            }
            let Some(instance) = &result.worst_case else {
                return Err(CliError::Solver(
                    "no worst-case instance available (degenerate classes give only an \
                     upper bound)"
                        .into(),
                ));
            };
            println!("{}", output::gram_worst_case_json(&result, instance));
            Ok(())
        }
        (None, Some(name)) => {
            let family = parse_family(name)?;
            let mu = args
                .mu
                .ok_or_else(|| CliError::Config("closed-form route requires --mu".into()))?;
            let theta = args
                .theta
                .ok_or_else(|| CliError::Config("closed-form route requires --theta".into()))?;
            let second = family_second(family, args.beta, args.lip)?;
            let instance = match family {
                RateFamily::MuCoco => lower_bound_mu_coco(mu, second, theta),
                RateFamily::MuLip => lower_bound_mu_lipschitz(mu, second, theta),
            }
            .map_err(|e| CliError::Config(e.to_string()))?;
            println!("{}", output::lower_bound_json(&instance));
            Ok(())
        }
        _ => Err(CliError::Config(
            "pass exactly one of --config (SDP route) or --family (closed-form route)".into(),
        )),
    }
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let cfg = read_config(&args.config)?;
    let classes = cfg.classes()?;
    if args.alpha_min <= 0.0 || args.alpha_max <= args.alpha_min {
        return Err(CliError::Config("need 0 < alpha-min < alpha-max".into()));
    }
    let search = SearchSettings {
        alpha_min: args.alpha_min,
        alpha_max: args.alpha_max,
        rel_tol: args.rel_tol,
        solver: cfg.solver_settings()?,
        ..SearchSettings::default()
    };
    let result = optimize_alpha(&classes, &search).map_err(|e| match e {
        ospep_core::ospep::OspepError::Solver(s) => CliError::Solver(format!("status {s:?}")),
        other => CliError::Config(other.to_string()),
    })?;
    if result.status == SearchStatus::NonUnimodalWarning {
        eprintln!(
            "warning: evaluations contradicted unimodality; reporting best point found"
        );
    }
    println!("{}", output::optimize_json(&result));
    Ok(())
}

fn cmd_curve(args: &CurveArgs) -> Result<(), CliError> {
    let cfg = read_config(&args.config)?;
    let classes = cfg.classes()?;
    if args.points == 0 {
        return Err(CliError::Config("--points must be at least 1".into()));
    }
    if args.alpha_min <= 0.0 || args.alpha_max < args.alpha_min {
        return Err(CliError::Config("need 0 < alpha-min <= alpha-max".into()));
    }
    let alphas: Vec<f64> = if args.points == 1 {
        vec![args.alpha_min]
    } else {
        let (lo, hi) = (args.alpha_min.ln(), args.alpha_max.ln());
        (0..args.points)
            .map(|i| (lo + (hi - lo) * i as f64 / (args.points - 1) as f64).exp())
            .collect()
    };
    let settings: SolverSettings<f64> = cfg.solver_settings()?;
    let points = rho_curve(&classes, &alphas, cfg.theta, &settings);
    let csv = output::curve_csv(&points);
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Config(format!("writing {path}: {e}")))?,
        None => print!("{csv}"),
    }
    if points.iter().all(|p| p.ok) {
        Ok(())
    } else {
        Err(CliError::Solver("one or more curve points failed to solve".into()))
    }
}

