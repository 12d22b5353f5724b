//! Verification suites behind `ruin check`.
//!
//! Output is line-oriented and machine readable: one `FAIL,...` row per
//! violated assertion plus one summary row per checked function, `PASS` or
//! `FAIL` at the end of the summary. Exit code 0 iff nothing failed.

use crate::{CheckCmd, CliError, Suite};
use ruin_core::closed_forms::{value_mckean_shepp, value_rho1_extended, value_rho1_unit};
use ruin_core::hjb::{boundary_check, residual_grid, BoundaryRowKind, HamiltonianBranch};
use ruin_core::model::{ModelParams, Policy};
use ruin_core::simulator::{estimate_ruin, estimate_ruin_reflected, SimConfig};

const RESIDUAL_TOL: f64 = 1e-4;
const GRID_LO: f64 = 0.2;
const GRID_HI: f64 = 3.0;
const GRID_N: usize = 20;
const FD_STEP: f64 = 1e-3;
// see residual_grid: keeps O(h^2) truncation of the branching formulas
// below RESIDUAL_TOL for the benchmark parameter sets
const DIAG_MARGIN: f64 = 0.1;

type ValueFn<'a> = Box<dyn Fn(f64, f64) -> f64 + 'a>;

pub fn run(cmd: &CheckCmd) -> Result<(), CliError> {
    let params = cmd.params.resolve()?;
    let failures = match cmd.suite {
        Suite::Hjb => run_hjb(&params, cmd.perturb)?,
        Suite::Boundary => run_boundary(&params, cmd.perturb)?,
        Suite::McCrosscheck => run_mc_crosscheck(&params, cmd)?,
    };
    if failures > 0 {
        Err(CliError::CheckFailed(failures))
    } else {
        Ok(())
    }
}

/// Closed-form value functions applicable to the parameter set, perturbed by
/// `perturb * x` when requested.
fn value_functions(
    params: &ModelParams,
    perturb: f64,
) -> Result<Vec<(&'static str, ValueFn<'_>)>, CliError> {
    let mut out: Vec<(&'static str, ValueFn)> = Vec::new();
    let unit_sigma = params.sigma1 == 1.0 && params.sigma2 == 1.0;
    if params.rho == 1.0 {
        value_rho1_extended(1.0, 1.0, params).map_err(|e| CliError::Invalid(e.to_string()))?;
        out.push((
            "value-rho1-extended",
            Box::new(move |x, y| {
                value_rho1_extended(x, y, params).expect("validated") + perturb * x
            }),
        ));
        if unit_sigma && params.delta == 0.0 && params.mu_bar == 1.0 {
            out.push((
                "value-rho1-unit",
                Box::new(move |x, y| value_rho1_unit(x, y) + perturb * x),
            ));
        }
    } else if params.rho == 0.0 && params.delta == 0.0 && params.mu_bar == 1.0 && unit_sigma {
        out.push((
            "value-mckean-shepp",
            Box::new(move |x, y| value_mckean_shepp(x, y) + perturb * x),
        ));
    }
    if out.is_empty() {
        return Err(CliError::Unsupported(
            "check suites cover rho = 1 (any admissible sigma/delta) and the rho = 0, delta = 0, mu_bar = 1 baseline".into(),
        ));
    }
    Ok(out)
}

fn run_hjb(params: &ModelParams, perturb: f64) -> Result<usize, CliError> {
    let mut failures = 0;
    for (name, v) in value_functions(params, perturb)? {
        let reports = residual_grid(&v, params, GRID_LO, GRID_HI, GRID_N, FD_STEP, DIAG_MARGIN);
        let mut max_abs = 0.0f64;
        let mut at = (0.0, 0.0);
        for r in &reports {
            if r.residual.abs() > max_abs {
                max_abs = r.residual.abs();
                at = (r.point.x(), r.point.y());
            }
            if r.residual.abs() >= RESIDUAL_TOL {
                failures += 1;
                let branch = match r.branch {
                    HamiltonianBranch::X => "x",
                    HamiltonianBranch::Y => "y",
                };
                println!(
                    "FAIL,hjb,{name},x={},y={},residual={:e},branch={branch}",
                    r.point.x(),
                    r.point.y(),
                    r.residual
                );
            }
        }
        println!(
            "hjb,{name},points={},max_residual={:e},at=({},{}): {}",
            reports.len(),
            max_abs,
            at.0,
            at.1,
            if max_abs < RESIDUAL_TOL {
                "PASS"
            } else {
                "FAIL"
            }
        );
    }
    Ok(failures)
}

fn kind_label(kind: BoundaryRowKind) -> &'static str {
    match kind {
        BoundaryRowKind::ZeroAtY0 => "zero-at-y0",
        BoundaryRowKind::ZeroAtX0 => "zero-at-x0",
        BoundaryRowKind::AsymptoteX => "asymptote-x",
        BoundaryRowKind::AsymptoteY => "asymptote-y",
    }
}

fn run_boundary(params: &ModelParams, perturb: f64) -> Result<usize, CliError> {
    let mut failures = 0;
    let grid = [0.5, 1.0, 2.0, 3.0];
    for (name, v) in value_functions(params, perturb)? {
        let report = boundary_check(&v, params, &grid);
        for row in &report.rows {
            if !row.pass {
                failures += 1;
                println!(
                    "FAIL,boundary,{name},kind={},coordinate={},value={:e},expected={:e}",
                    kind_label(row.kind),
                    row.coordinate,
                    row.value,
                    row.expected
                );
            }
        }
        println!(
            "boundary,{name},rows={}: {}",
            report.rows.len(),
            if report.all_pass() { "PASS" } else { "FAIL" }
        );
    }
    Ok(failures)
}

fn run_mc_crosscheck(params: &ModelParams, cmd: &CheckCmd) -> Result<usize, CliError> {
    // lighter defaults than `simulate`: the suite runs several estimates
    let mut config = SimConfig::new(
        cmd.sim.dt.unwrap_or(2e-3),
        cmd.sim
            .horizon
            .unwrap_or_else(|| SimConfig::default_horizon(params.mu_bar)),
        cmd.sim.paths.unwrap_or(5_000),
        cmd.sim.seed.unwrap_or(42),
    );
    config.bridge_correction = true;
    config.antithetic = cmd.sim.antithetic;
    let points = [(1.0, 1.0), (2.0, 2.0)];
    let mut failures = 0;

    if params.rho == -1.0 {
        for (x, y) in points {
            let a = estimate_ruin(x, y, &Policy::PushBottom, params, &config)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let b = estimate_ruin_reflected(x, y, params, &config)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let overlap = a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
            if !overlap {
                failures += 1;
                println!(
                    "FAIL,mc-crosscheck,engines,point=({x},{y}),xy=[{},{}],reflected=[{},{}]",
                    a.ci_low, a.ci_high, b.ci_low, b.ci_high
                );
            }
            println!(
                "mc-crosscheck,engines,point=({x},{y}),xy={},reflected={}: {}",
                a.p_hat,
                b.p_hat,
                if overlap { "PASS" } else { "FAIL" }
            );
        }
        return Ok(failures);
    }

    // closed-form targets exist for rho = 1 and the rho = 0 baseline
    let functions = value_functions(params, 0.0)?;
    let (name, v) = &functions[0];
    for (x, y) in points {
        let est = estimate_ruin(x, y, &Policy::PushBottom, params, &config)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let target = v(x, y);
        let tol = 3.0 * est.std_err + 0.01;
        let pass = (est.p_hat - target).abs() <= tol;
        if !pass {
            failures += 1;
            println!(
                "FAIL,mc-crosscheck,{name},point=({x},{y}),p_hat={},target={},tol={}",
                est.p_hat, target, tol
            );
        }
        println!(
            "mc-crosscheck,{name},point=({x},{y}),p_hat={},target={},tol={}: {}",
            est.p_hat,
            target,
            tol,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(failures)
}
