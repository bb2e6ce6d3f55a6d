//! Command-line front end.
//!
//! Every command writes one or more tables (see [`crate::io::render`]) and
//! maps its checks onto the process exit code: 0 when everything holds, 1 on
//! a bound or identity violation, 2 on bad input, 3 when the privacy solver
//! ran out of budget. All randomness derives from `--seed`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{min_slack_summary, sweep, BoundKind, BoundReport, SweepConfig};
use crate::error::{Error, Result};
use crate::estimation::{mmse_bound_gaussian, mmse_eps, mmse_monte_carlo};
use crate::exec::Execution;
use crate::io::{emit, read_joint, render, Cell, Format, Table};
use crate::maxcorr::{
    backward_identity_check, maximal_correlation_power, maximal_correlation_spectral, AceConfig, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::measures::{chi_squared, entropy, linear_correlation, mutual_information, total_variation_from_product};
use crate::privacy::oracle::quantized_oracle;
use crate::privacy::{curve_bound_checks, privacy_curve, Leakage, SolveStatus, SolverBudget, LEAKAGE_TOL};
use crate::seed::derive_seed;
use crate::stable::{
    lambda_star, lambda_sweep, rho_m_stable, varrho_epsilon_gaussian, GaussianPair, StableFilterSpec, StableParams,
};

#[derive(Debug, Parser)]
#[command(name = "mcpriv", version, about = "Maximal correlation and privacy-utility measures")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Joint pmf, `.json` or CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Side-loaded numeric values for the X symbols.
    #[arg(long)]
    pub x_values: Option<PathBuf>,
    /// Side-loaded numeric values for the Y symbols.
    #[arg(long)]
    pub y_values: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeakageArg {
    Mi,
    Maxcorr,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dependence measures of a joint pmf and the identities relating them.
    Measures {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Checks all finite-alphabet bounds on seeded random distributions.
    BoundsSweep {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_dims: usize,
        /// Random filters per distribution for the ratio check.
        #[arg(long, default_value_t = 50)]
        ratio_filters: usize,
    },
    /// Rate-privacy curve over a grid of leakage budgets.
    PrivacyCurve {
        #[command(flatten)]
        input: InputArgs,
        /// `a:b:step` or a comma-separated list.
        #[arg(long, value_parser = parse_grid)]
        eps_grid: Grid,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, value_enum, default_value_t = LeakageArg::Mi)]
        leakage: LeakageArg,
        /// Lattice resolution of the exhaustive oracle (2×2 inputs only; 0 disables).
        #[arg(long, default_value_t = 50)]
        oracle_units: usize,
    },
    /// Noise gain λ*_ε of additive symmetric α-stable filters.
    StableFilter {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = parse_grid)]
        eps_grid: Grid,
        /// Correlation of a Gaussian (X, Y) pair, for ϱ_ε (α = 2 only).
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Privacy-constrained MMSE for Gaussian (X, Y): closed form, bound and Monte Carlo.
    Mmse {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        var_y: f64,
        #[arg(long, value_parser = parse_grid)]
        eps_grid: Grid,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        bins: usize,
    },
    /// ACE estimates of ρ_m(X; X + λN) against the closed form.
    LambdaSweep {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_parser = parse_grid)]
        lambda_grid: Grid,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = AceConfig::default().bins)]
        bins: usize,
    },
}

/// A parsed numeric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parses `a:b:step` (inclusive of `b` up to rounding) or `v1,v2,...`.
pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected a:b:step, got '{s}'"));
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err(format!("grid '{s}' needs step > 0 and b >= a"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        // round to 12 decimals so that e.g. 0.1 + 2·0.1 prints as 0.3
        let round = |v: f64| (v * 1e12).round() / 1e12;
        Ok(Grid((0..=n).map(|i| round(a + i as f64 * step)).collect()))
    } else {
        s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>().map(Grid)
    }
}

/// How a command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Ok,
    BudgetExhausted,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violation => 1,
            Outcome::BudgetExhausted => 3,
        }
    }
}

/// Exit code for errors: everything that reaches the top level is an input problem.
pub const INPUT_ERROR_EXIT: i32 = 2;

/// Runs a parsed command line and writes its report.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let exec = if cli.common.sequential { Execution::Sequential } else { Execution::default() };
    let (tables, outcome) = execute(&cli.command, cli.common.seed, exec)?;
    emit(&render(&tables, cli.common.format), cli.common.output.as_deref())?;
    Ok(outcome)
}

/// Builds the report tables for `command` without writing them.
pub fn execute(command: &Command, seed: u64, exec: Execution) -> Result<(Vec<Table>, Outcome)> {
    match command {
        Command::Measures { input } => cmd_measures(input),
        Command::BoundsSweep { trials, max_dims, ratio_filters } => {
            let cfg = SweepConfig { trials: *trials, max_dims: *max_dims, seed, ratio_filters: *ratio_filters };
            cmd_bounds_sweep(&cfg, exec)
        }
        Command::PrivacyCurve { input, eps_grid, restarts, leakage, oracle_units } => {
            let kind = match leakage {
                LeakageArg::Mi => Leakage::MutualInformation,
                LeakageArg::Maxcorr => Leakage::MaximalCorrelation,
            };
            let budget = SolverBudget { restarts: *restarts, ..SolverBudget::default() };
            cmd_privacy_curve(input, &eps_grid.0, kind, budget, *oracle_units, seed, exec)
        }
        Command::StableFilter { alpha, eps_grid, rho } => cmd_stable_filter(*alpha, &eps_grid.0, *rho),
        Command::Mmse { rho, var_y, eps_grid, n, bins } => cmd_mmse(*rho, *var_y, &eps_grid.0, *n, *bins, seed, exec),
        Command::LambdaSweep { alpha, lambda_grid, n, bins } => {
            cmd_lambda_sweep(*alpha, &lambda_grid.0, *n, *bins, seed, exec)
        }
    }
}

fn load(input: &InputArgs) -> Result<crate::dist::JointDistribution> {
    read_joint(&input.input, input.x_values.as_deref(), input.y_values.as_deref())
}

fn report_row(r: &BoundReport) -> Vec<Cell> {
    let tol = match r.kind {
        BoundKind::Identity { tol } => Some(tol),
        BoundKind::Inequality => None,
    };
    vec![
        r.bound_name.clone().into(),
        r.lhs.into(),
        r.rhs.into(),
        tol.into(),
        r.slack.into(),
        r.holds.into(),
        r.context.clone().into(),
    ]
}

const REPORT_HEADER: [&str; 7] = ["check", "lhs", "rhs", "tol", "slack", "holds", "context"];

pub fn cmd_measures(input: &InputArgs) -> Result<(Vec<Table>, Outcome)> {
    let d = load(input)?;
    let mut t = Table::new("measures", &["measure", "value", "note"]);
    let spectral = maximal_correlation_spectral(&d);
    let (power, note) = match maximal_correlation_power(&d, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Ok(r) => (r.value, String::new()),
        Err(Error::NotConverged { value, iterations, .. }) => (value, format!("not converged after {iterations}")),
        Err(e) => return Err(e),
    };
    t.push(vec!["mutual_information_bits".into(), mutual_information(&d).into(), "".into()]);
    t.push(vec!["chi_squared".into(), chi_squared(&d).into(), "".into()]);
    t.push(vec!["total_variation_from_product".into(), total_variation_from_product(&d).into(), "".into()]);
    t.push(vec!["rho_m_spectral".into(), spectral.value.into(), "".into()]);
    t.push(vec!["rho_m_power".into(), power.into(), note.into()]);
    t.push(vec!["entropy_x_bits".into(), entropy(&d.x_marginal()).into(), "".into()]);
    t.push(vec!["entropy_y_bits".into(), entropy(&d.y_marginal()).into(), "".into()]);
    match linear_correlation(&d) {
        Ok(r) => t.push(vec!["linear_correlation".into(), r.into(), "".into()]),
        Err(e) => t.push(vec!["linear_correlation".into(), Cell::Empty, e.to_string().into()]),
    }

    let mut checks = Table::new("checks", &REPORT_HEADER);
    let mut reports = vec![backward_identity_check(&d)?];
    if d.nx().min(d.ny()) == 2 {
        reports.push(crate::bounds::check_chi_squared_identity(&d)?);
    }
    reports.iter().for_each(|r| checks.push(report_row(r)));
    let outcome = if reports.iter().all(|r| r.holds) { Outcome::Ok } else { Outcome::Violation };
    Ok((vec![t, checks], outcome))
}

pub fn cmd_bounds_sweep(cfg: &SweepConfig, exec: Execution) -> Result<(Vec<Table>, Outcome)> {
    let trials = sweep(cfg, exec)?;
    let mut rows = Table::new("trials", &["trial", "check", "lhs", "rhs", "tol", "slack", "holds", "context"]);
    for t in &trials {
        for r in &t.reports {
            let mut row = vec![Cell::from(t.trial)];
            row.extend(report_row(r));
            rows.push(row);
        }
    }
    let mut summary = Table::new("summary", &["check", "min_slack", "violations"]);
    let mut violations = 0;
    for (name, slack, v) in min_slack_summary(&trials) {
        violations += v;
        summary.push(vec![name.into(), slack.into(), v.into()]);
    }
    let outcome = if violations == 0 { Outcome::Ok } else { Outcome::Violation };
    Ok((vec![rows, summary], outcome))
}

pub fn cmd_privacy_curve(
    input: &InputArgs,
    epsilons: &[f64],
    kind: Leakage,
    budget: SolverBudget,
    oracle_units: usize,
    seed: u64,
    exec: Execution,
) -> Result<(Vec<Table>, Outcome)> {
    let d = load(input)?;
    let curve = privacy_curve(&d, kind, epsilons, budget, seed, exec)?;
    let use_oracle = oracle_units > 0 && d.nx() == 2 && d.ny() == 2;
    let mut t =
        Table::new("curve", &["epsilon", "value", "leakage_achieved", "oracle_gap", "restarts", "raw_value", "status"]);
    let mut outcome = Outcome::Ok;
    for (i, f) in curve.filters.iter().enumerate() {
        let gap = if use_oracle {
            let o = quantized_oracle(&d, kind, f.epsilon, d.ny() + 1, oracle_units, exec)?;
            Some(curve.values[i] - o.utility)
        } else {
            None
        };
        if gap.is_some_and(|g| g < -1e-3) || f.achieved_leakage > f.epsilon + LEAKAGE_TOL {
            outcome = outcome.max(Outcome::Violation);
        }
        if f.status == SolveStatus::BudgetExhausted {
            outcome = outcome.max(Outcome::BudgetExhausted);
        }
        let status = match f.status {
            SolveStatus::Solved => "solved",
            SolveStatus::ConstraintVacuous => "constraint_vacuous",
            SolveStatus::BudgetExhausted => "budget_exhausted",
        };
        t.push(vec![
            f.epsilon.into(),
            curve.values[i].into(),
            f.achieved_leakage.into(),
            gap.into(),
            f.restarts.into(),
            curve.raw_values[i].into(),
            status.into(),
        ]);
    }

    let mut header = REPORT_HEADER.to_vec();
    header.push("asserted");
    let mut checks = Table::new("checks", &header);
    let (ratio, lower) = curve_bound_checks(&curve);
    let monotone = BoundReport::inequality(
        "raw_monotonicity_gap",
        curve.raw_values.iter().zip(&curve.values).map(|(r, v)| v - r).fold(0.0, f64::max),
        crate::privacy::SOLVER_TOL,
        "running maximum minus raw value",
    );
    // the ratio property is only established for the mutual-information variant
    let asserted = kind == Leakage::MutualInformation;
    let mut push = |r: &BoundReport, asserted: bool| {
        let mut row = report_row(r);
        row.push(asserted.into());
        checks.push(row);
        if asserted && !r.holds {
            outcome = outcome.max(Outcome::Violation);
        }
    };
    push(&ratio, asserted);
    if asserted {
        push(&lower, true);
    }
    push(&monotone, true);
    Ok((vec![t, checks], outcome))
}

pub fn cmd_stable_filter(alpha: f64, epsilons: &[f64], rho: Option<f64>) -> Result<(Vec<Table>, Outcome)> {
    if rho.is_some() && alpha != 2.0 {
        return Err(Error::InvalidParams("--rho is only meaningful for alpha = 2".into()));
    }
    let mut t =
        Table::new("stable_filter", &["alpha", "epsilon", "lambda_star", "rho_m_at_lambda_star", "varrho_epsilon"]);
    let mut outcome = Outcome::Ok;
    for &eps in epsilons {
        let lambda = lambda_star(eps, alpha)?;
        let r = rho_m_stable(alpha, lambda)?;
        if (r - eps).abs() > 1e-12 {
            outcome = Outcome::Violation;
        }
        let varrho = rho.map(|rho| varrho_epsilon_gaussian(rho, eps)).transpose()?;
        t.push(vec![alpha.into(), eps.into(), lambda.into(), r.into(), varrho.into()]);
    }
    Ok((vec![t], outcome))
}

pub fn cmd_mmse(
    rho: f64,
    var_y: f64,
    epsilons: &[f64],
    n: usize,
    bins: usize,
    seed: u64,
    exec: Execution,
) -> Result<(Vec<Table>, Outcome)> {
    let pair = GaussianPair::new(rho, var_y)?;
    let mut t =
        Table::new("mmse", &["epsilon", "lambda_star", "mmse_closed", "mmse_mc", "bound", "gap", "ci_halfwidth"]);
    let mut outcome = Outcome::Ok;
    for (i, &eps) in epsilons.iter().enumerate() {
        let closed = mmse_eps(rho, var_y, eps)?;
        let bound = mmse_bound_gaussian(rho, var_y, eps)?;
        let filter = StableFilterSpec::for_epsilon(StableParams::standard_gaussian(), eps)?;
        let (mc, _) = mmse_monte_carlo(&pair, &filter, n, bins, derive_seed(seed, "cmd_mmse", i as u64), exec)?;
        let gap = closed.mmse - bound;
        if gap < -1e-12 || (mc.mmse - closed.mmse).abs() > (0.01 * var_y).max(3.0 * mc.ci_halfwidth) {
            outcome = Outcome::Violation;
        }
        t.push(vec![
            eps.into(),
            closed.lambda.into(),
            closed.mmse.into(),
            mc.mmse.into(),
            bound.into(),
            gap.into(),
            mc.ci_halfwidth.into(),
        ]);
    }
    Ok((vec![t], outcome))
}

pub fn cmd_lambda_sweep(
    alpha: f64,
    lambdas: &[f64],
    n: usize,
    bins: usize,
    seed: u64,
    exec: Execution,
) -> Result<(Vec<Table>, Outcome)> {
    let params = StableParams::symmetric(alpha)?;
    let rows = lambda_sweep(&params, lambdas, n, seed, AceConfig::with_bins(bins), exec)?;
    let mut t =
        Table::new("lambda_sweep", &["lambda", "closed_form", "ace_estimate", "n", "seed", "alpha", "abs_error"]);
    for r in rows {
        t.push(vec![
            r.lambda.into(),
            r.closed_form.into(),
            r.ace_estimate.into(),
            r.n.into(),
            r.seed.into(),
            alpha.into(),
            (r.ace_estimate - r.closed_form).abs().into(),
        ]);
    }
    Ok((vec![t], Outcome::Ok))
}
