use std::fmt::Write as _;
use std::io::Write as _;

use log::info;
use num_complex::Complex64;
use rayon::prelude::*;

use magdde::dde::{
    conservation, mean_error, monodromy, relative_error, solve, stability_verdict, MonodromyOptions, SolveOptions,
};
use magdde::magnus::GuardPolicy;
use magdde::models::{BenchmarkProblem, MultiplierMatch};
use magdde::spectral::ChebyshevGrid;

use crate::config::{Command, CommandKind, Horizon, RunConfig};
use crate::error::CliError;
use crate::format::g17;

/// Multipliers within this distance of the unit circle are reported as
/// marginal.
pub const STABILITY_TOL: f64 = 1e-6;

/// Errors below this are treated as round-off and left out of slope fits.
pub const SLOPE_FLOOR: f64 = 1e-12;

pub fn run(cmd: &Command) -> Result<(), CliError> {
    let (cfg, bench) = RunConfig::resolve(cmd.kind(), cmd.args())?;
    info!("resolved config: {cfg:?}");
    let text = match cfg.command {
        CommandKind::Solve => cmd_solve(&cfg, &bench)?,
        CommandKind::Multipliers => cmd_multipliers(&cfg, &bench)?,
        CommandKind::Convergence => cmd_convergence(&cfg, &bench)?,
        CommandKind::Audit => cmd_audit(&cfg, &bench)?,
    };
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn guard(cfg: &RunConfig) -> GuardPolicy {
    if cfg.warn_as_error {
        GuardPolicy::Deny
    } else {
        GuardPolicy::Warn
    }
}

fn t_final(cfg: &RunConfig) -> f64 {
    match cfg.horizon {
        Horizon::TFinal(t) => t,
        Horizon::Periods(_) => unreachable!("resolved as a final time"),
    }
}

fn periods(cfg: &RunConfig) -> usize {
    match cfg.horizon {
        Horizon::Periods(p) => p,
        Horizon::TFinal(_) => unreachable!("resolved as periods"),
    }
}

fn list(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Comment block echoing the resolved configuration.
fn header(cfg: &RunConfig, bench: &BenchmarkProblem, extra: &[(&str, String)]) -> String {
    let mut h = String::new();
    let mut line = |k: &str, v: &str| {
        let _ = writeln!(h, "# {k} = {v}");
    };
    line("magdde", env!("CARGO_PKG_VERSION"));
    line("command", cfg.command.name());
    line("problem", &cfg.problem);
    line("label", bench.problem.label());
    for (k, v) in &cfg.params {
        line(&format!("param.{k}"), &g17(*v));
    }
    line("tau", &g17(bench.problem.tau()));
    line("N", &cfg.n.to_string());
    line("M", &cfg.m.to_string());
    line("order", &cfg.order.to_string());
    match cfg.horizon {
        Horizon::TFinal(t) => line("t_final", &g17(t)),
        Horizon::Periods(p) => line("periods", &p.to_string()),
    }
    if cfg.command == CommandKind::Convergence {
        if cfg.n_list.is_empty() {
            line("M_list", &list(&cfg.sweep_m()));
        } else {
            line("N_list", &list(&cfg.n_list));
        }
    }
    line("store_steps", &cfg.store_steps.to_string());
    line("jobs", &cfg.jobs.to_string());
    line("warn_as_error", &cfg.warn_as_error.to_string());
    line(
        "out",
        &cfg.out.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
    );
    for (k, v) in extra {
        line(k, v);
    }
    h
}

fn push_state(out: &mut String, interval: usize, grid: &ChebyshevGrid, dim: usize, anchor: f64, state: &[f64]) {
    for (j, th) in grid.nodes_shifted().iter().enumerate() {
        let t = g17(anchor + th);
        for c in 0..dim {
            let _ = writeln!(out, "{interval},{j},{t},{c},{}", g17(state[j * dim + c]));
        }
    }
}

fn cmd_solve(cfg: &RunConfig, bench: &BenchmarkProblem) -> Result<String, CliError> {
    let opts = SolveOptions::new(cfg.n, cfg.m, cfg.order, t_final(cfg))
        .store_steps(cfg.store_steps)
        .guard(guard(cfg));
    let traj = solve(&bench.problem, &opts)?;
    let grid = ChebyshevGrid::new(cfg.n, traj.tau)?;
    let d = traj.dim;

    let mut out = header(
        cfg,
        bench,
        &[
            ("intervals", traj.intervals.len().to_string()),
            ("final_time", g17(traj.final_time())),
        ],
    );
    out.push_str("interval,node_index,time,component_index,value\n");
    // interval i covers [i tau, (i + 1) tau]; its rows are the collocated
    // state at the end of each stored step
    for rec in &traj.intervals {
        for st in &rec.step_states {
            push_state(&mut out, rec.index, &grid, d, st.t, &st.state);
        }
        push_state(&mut out, rec.index, &grid, d, rec.t_end, &rec.state);
    }
    Ok(out)
}

fn cmd_multipliers(cfg: &RunConfig, bench: &BenchmarkProblem) -> Result<String, CliError> {
    let lp = bench.problem.as_linear().expect("checked in resolve");
    let mut opts = MonodromyOptions::new(cfg.n, cfg.m, cfg.order);
    opts.periods = periods(cfg);
    opts.guard = guard(cfg);
    let r = monodromy(lp, &opts)?;
    let verdict = stability_verdict(&r.multipliers, STABILITY_TOL);
    let radius = r.multipliers.spectral_radius();
    eprintln!("stability: {verdict} (spectral radius {})", g17(radius));

    let mut extra = vec![
        ("horizon", g17(r.horizon)),
        ("spectral_radius", g17(radius)),
        ("stability", verdict.to_string()),
        ("stability_tol", g17(STABILITY_TOL)),
    ];
    if let Some(mu) = bench.reference_multiplier {
        extra.push(("reference_multiplier", format!("{} {}", g17(mu.re), g17(mu.im))));
        extra.push(("reference_source", bench.provenance.clone()));
    }
    let mut out = header(cfg, bench, &extra);
    out.push_str("rank,re,im,modulus\n");
    for (k, z) in r.multipliers.values().iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", k + 1, g17(z.re), g17(z.im), g17(z.norm()));
    }
    Ok(out)
}

enum Reference {
    Multiplier(Complex64),
    Exact,
    SelfRun {
        value: Vec<f64>,
        n: usize,
        m: usize,
        order: u32,
    },
}

/// Least-squares slope of `-log(error)` against `log(x)` over the points above
/// [`SLOPE_FLOOR`]; `None` with fewer than two such points.
pub fn fitted_slope(xs: &[usize], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(errors)
        .filter(|(_, e)| e.is_finite() && **e > SLOPE_FLOOR)
        .map(|(x, e)| ((*x as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

fn cmd_convergence(cfg: &RunConfig, bench: &BenchmarkProblem) -> Result<String, CliError> {
    let sweep_n = !cfg.n_list.is_empty();
    let values = if sweep_n { cfg.n_list.clone() } else { cfg.sweep_m() };
    let max_v = *values.iter().max().expect("non-empty sweep");
    let g = guard(cfg);
    let problem = &bench.problem;

    let reference = if let Some(mu) = bench.reference_multiplier {
        Reference::Multiplier(mu)
    } else if bench.exact.is_some() {
        Reference::Exact
    } else {
        let (n, m) = if sweep_n {
            (2 * max_v, 4 * cfg.m)
        } else {
            (2 * cfg.n, 4 * max_v)
        };
        let order = *problem.admissible_orders().last().expect("non-empty");
        let traj = solve(problem, &SolveOptions::new(n, m, order, t_final(cfg)).guard(g))?;
        Reference::SelfRun {
            value: traj.final_value().to_vec(),
            n,
            m,
            order,
        }
    };

    let error_at = |v: usize| -> Result<f64, CliError> {
        let (n, m) = if sweep_n { (v, cfg.m) } else { (cfg.n, v) };
        match &reference {
            Reference::Multiplier(mu) => {
                let mut opts = MonodromyOptions::new(n, m, cfg.order);
                opts.periods = periods(cfg);
                opts.guard = g;
                let r = monodromy(
                    problem.as_linear().expect("multiplier reference on linear problem"),
                    &opts,
                )?;
                Ok((bench.tracked_multiplier(&r.multipliers).expect("non-empty spectrum") - mu).norm())
            }
            Reference::Exact => {
                let traj = solve(problem, &SolveOptions::new(n, m, cfg.order, t_final(cfg)).guard(g))?;
                let grid = ChebyshevGrid::new(n, traj.tau)?;
                let exact = bench.exact.as_ref().expect("exact reference");
                Ok(mean_error(
                    traj.final_state(),
                    &grid,
                    traj.dim,
                    traj.final_time(),
                    |t| exact(t),
                    0,
                )?)
            }
            Reference::SelfRun { value, .. } => {
                let traj = solve(problem, &SolveOptions::new(n, m, cfg.order, t_final(cfg)).guard(g))?;
                Ok(relative_error(traj.final_value(), value))
            }
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    // collect keeps the sweep order regardless of completion order
    let errors: Vec<f64> = pool
        .install(|| values.par_iter().map(|&v| error_at(v)).collect::<Vec<_>>())
        .into_iter()
        .collect::<Result<_, _>>()?;

    let (metric, source) = match &reference {
        Reference::Multiplier(mu) => (
            format!(
                "|mu - mu_ref| for the {} multiplier, mu_ref = {} {}",
                match bench.multiplier_match {
                    MultiplierMatch::Dominant => "dominant",
                    MultiplierMatch::Closest => "closest",
                },
                g17(mu.re),
                g17(mu.im)
            ),
            bench.provenance.clone(),
        ),
        Reference::Exact => (
            "mean nodal error of component 0 on the last interval".to_string(),
            bench.provenance.clone(),
        ),
        Reference::SelfRun { n, m, order, .. } => (
            "relative 2-norm error of x(t_final)".to_string(),
            format!("self-run with N = {n}, M = {m}, order {order} (not an exact solution)"),
        ),
    };
    let mut out = header(
        cfg,
        bench,
        &[
            ("metric", metric),
            ("reference", source),
            ("slope_floor", g17(SLOPE_FLOOR)),
        ],
    );
    let key = if sweep_n { "N" } else { "M" };
    let _ = writeln!(out, "{key},error,local_slope,in_fit");
    for (k, (v, e)) in values.iter().zip(&errors).enumerate() {
        let local = if k == 0 {
            String::new()
        } else {
            g17(-(e / errors[k - 1]).ln() / (*v as f64 / values[k - 1] as f64).ln())
        };
        let in_fit = u8::from(e.is_finite() && *e > SLOPE_FLOOR);
        let _ = writeln!(out, "{v},{},{local},{in_fit}", g17(*e));
    }
    let slope = fitted_slope(&values, &errors);
    let _ = writeln!(out, "# fitted_slope = {}", slope.map_or("nan".to_string(), g17));
    Ok(out)
}

fn cmd_audit(cfg: &RunConfig, bench: &BenchmarkProblem) -> Result<String, CliError> {
    let total = bench.conserved_total.expect("checked in resolve");
    let opts = SolveOptions::new(cfg.n, cfg.m, cfg.order, t_final(cfg)).guard(guard(cfg));
    let traj = solve(&bench.problem, &opts)?;
    let d = traj.dim;

    let mut rows = String::from("interval,t_end,mean_node_error,boundary_error,min_component,min_boundary_component\n");
    let mut worst_boundary = 0.0f64;
    let mut lowest = f64::INFINITY;
    for rec in &traj.intervals {
        let (k, t) = (rec.index, rec.t_end);
        let c = conservation(&rec.state, d, total)?;
        worst_boundary = worst_boundary.max(c.boundary_error);
        lowest = lowest.min(c.min_boundary_component);
        let _ = writeln!(
            rows,
            "{k},{},{},{},{},{}",
            g17(t),
            g17(c.mean_node_error),
            g17(c.boundary_error),
            g17(c.min_component),
            g17(c.min_boundary_component)
        );
    }
    let mut out = header(
        cfg,
        bench,
        &[
            ("total", g17(total)),
            ("max_boundary_error", g17(worst_boundary)),
            ("min_boundary_component", g17(lowest)),
        ],
    );
    out.push_str(&rows);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::fitted_slope;

    #[test]
    fn slope_of_power_law() {
        let xs = [4, 8, 16, 32];
        let errs: Vec<f64> = xs.iter().map(|&m| 3.0 * (m as f64).powi(-4)).collect();
        assert!((fitted_slope(&xs, &errs).unwrap() - 4.0).abs() < 1e-12);
        // points at the floor are dropped
        let errs = [1e-3, 1e-5, 1e-14, 1e-15];
        assert!((fitted_slope(&xs, &errs).unwrap() - 2.0 * 10f64.ln() / 2f64.ln()).abs() < 1e-12);
        assert!(fitted_slope(&xs, &[1e-3, 1e-13, 1e-14, 1e-15]).is_none());
    }
}
