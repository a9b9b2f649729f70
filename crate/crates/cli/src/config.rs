//! Flags, config files and their resolution into a [`RunConfig`].
//!
//! Precedence: command-line flags, then the config file, then builtin
//! defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use magdde::models::{self, BenchmarkProblem};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "magdde",
    version,
    about = "Magnus integrators for delay differential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a problem and write the collocated trajectory.
    Solve(RunArgs),
    /// Characteristic multipliers of a periodic linear problem.
    Multipliers(RunArgs),
    /// Error against a reference for a list of M (or N) values.
    Convergence(RunArgs),
    /// Per-interval conservation and positivity of a compartment model.
    Audit(RunArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Self::Solve(_) => CommandKind::Solve,
            Self::Multipliers(_) => CommandKind::Multipliers,
            Self::Convergence(_) => CommandKind::Convergence,
            Self::Audit(_) => CommandKind::Audit,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Self::Solve(a) | Self::Multipliers(a) | Self::Convergence(a) | Self::Audit(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Multipliers,
    Convergence,
    Audit,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Multipliers => "multipliers",
            Self::Convergence => "convergence",
            Self::Audit => "audit",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Builtin problem: example1, mathieu, nonlinear-scalar, sir.
    #[arg(long)]
    pub problem: Option<String>,
    /// Number of Chebyshev intervals (N + 1 nodes).
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Steps per delay interval.
    #[arg(long = "M", value_name = "M")]
    pub m: Option<usize>,
    /// Magnus order: 2, 4, 6 (linear) or 2, 3 (quasilinear).
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long = "t-final", value_name = "T", allow_negative_numbers = true)]
    pub t_final: Option<f64>,
    /// Number of periods for the monodromy matrix.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Problem parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the state after every step.
    #[arg(long = "store-steps")]
    pub store_steps: bool,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Step counts for `convergence`, comma separated.
    #[arg(long = "M-list", value_delimiter = ',', value_name = "M,M,...")]
    pub m_list: Vec<usize>,
    /// Node counts for an N sweep in `convergence`, comma separated.
    #[arg(long = "N-list", value_delimiter = ',', value_name = "N,N,...")]
    pub n_list: Vec<usize>,
    /// Fail when a step leaves the convergence region of the Magnus series.
    #[arg(long = "warn-as-error")]
    pub warn_as_error: bool,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty parameter name in '{s}'"));
    }
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("parameter '{k}': '{}' is not a number", v.trim()))?;
    Ok((k.to_string(), v))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    problem: Option<String>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    order: Option<u32>,
    #[serde(alias = "t-final")]
    t_final: Option<f64>,
    periods: Option<usize>,
    #[serde(default)]
    param: BTreeMap<String, f64>,
    out: Option<PathBuf>,
    #[serde(alias = "store-steps")]
    store_steps: Option<bool>,
    jobs: Option<usize>,
    #[serde(rename = "M_list", alias = "M-list")]
    m_list: Option<Vec<usize>>,
    #[serde(rename = "N_list", alias = "N-list")]
    n_list: Option<Vec<usize>>,
    #[serde(alias = "warn-as-error")]
    warn_as_error: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// How far to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    TFinal(f64),
    Periods(usize),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub problem: String,
    pub params: Vec<(&'static str, f64)>,
    pub n: usize,
    pub m: usize,
    pub order: u32,
    pub horizon: Horizon,
    pub out: Option<PathBuf>,
    pub store_steps: bool,
    pub jobs: usize,
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub warn_as_error: bool,
}

pub const DEFAULT_N: usize = 20;
pub const DEFAULT_M: usize = 32;
pub const DEFAULT_M_LIST: [usize; 5] = [4, 8, 16, 32, 64];

/// Whether `convergence` measures a multiplier (over periods) or a state
/// (up to a final time).
pub fn uses_periods(command: CommandKind, bench: &BenchmarkProblem) -> bool {
    match command {
        CommandKind::Multipliers => true,
        CommandKind::Convergence => bench.reference_multiplier.is_some(),
        CommandKind::Solve | CommandKind::Audit => false,
    }
}

/// Final time used when none is given.
pub fn default_t_final(bench: &BenchmarkProblem) -> f64 {
    match bench.name.as_str() {
        "example1" => 2.0 * PI,
        "nonlinear-scalar" => bench.problem.tau(),
        _ => match bench.problem.as_linear().and_then(|p| p.period()) {
            Some(t) => t,
            None => 4.0 * bench.problem.tau(),
        },
    }
}

impl RunConfig {
    /// Merge flags over the config file over defaults, build the problem and
    /// validate everything that does not need a numerical run.
    pub fn resolve(command: CommandKind, args: &RunArgs) -> Result<(Self, BenchmarkProblem), CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let problem = args.problem.clone().or(file.problem).ok_or_else(|| {
            CliError::Usage(format!(
                "missing --problem (one of {})",
                models::BUILTIN_NAMES.join(", ")
            ))
        })?;

        let mut overrides: Vec<(String, f64)> = file.param.into_iter().collect();
        overrides.extend(args.params.iter().cloned());
        let params = models::resolve_parameters(&problem, &overrides).map_err(|e| CliError::Usage(e.to_string()))?;
        let owned: Vec<(String, f64)> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let bench = models::builtin(&problem, &owned).map_err(|e| CliError::Usage(e.to_string()))?;

        let n = args.n.or(file.n).unwrap_or(DEFAULT_N);
        let m = args.m.or(file.m).unwrap_or(DEFAULT_M);
        if n < 1 {
            return Err(CliError::Usage("N must be at least 1".into()));
        }
        if m < 1 {
            return Err(CliError::Usage("M must be at least 1".into()));
        }
        let admissible = bench.problem.admissible_orders();
        let order = args
            .order
            .or(file.order)
            .unwrap_or(*admissible.last().expect("non-empty"));
        if !admissible.contains(&order) {
            return Err(CliError::Usage(format!(
                "order {order} is not admissible for problem '{problem}'; admissible orders: {}",
                admissible.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")
            )));
        }

        let t_final = args.t_final.or(file.t_final);
        let periods = args.periods.or(file.periods);
        let horizon = if uses_periods(command, &bench) {
            if t_final.is_some() {
                return Err(CliError::Usage(format!(
                    "--t-final does not apply to '{}' on '{problem}'; use --periods",
                    command.name()
                )));
            }
            if bench.problem.as_linear().and_then(|p| p.period()).is_none() {
                return Err(CliError::Usage(format!(
                    "problem '{problem}' is not a periodic linear problem"
                )));
            }
            let p = periods.unwrap_or(1);
            if p < 1 {
                return Err(CliError::Usage("periods must be at least 1".into()));
            }
            Horizon::Periods(p)
        } else {
            if periods.is_some() {
                return Err(CliError::Usage(format!(
                    "--periods does not apply to '{}' on '{problem}'; use --t-final",
                    command.name()
                )));
            }
            let t = t_final.unwrap_or_else(|| default_t_final(&bench));
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("t-final must be positive, got {t}")));
            }
            Horizon::TFinal(t)
        };

        let jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if jobs < 1 {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        let pick = |flag: &Vec<usize>, file: Option<Vec<usize>>| {
            if flag.is_empty() {
                file.unwrap_or_default()
            } else {
                flag.clone()
            }
        };
        let m_list = pick(&args.m_list, file.m_list);
        let n_list = pick(&args.n_list, file.n_list);
        if m_list.iter().chain(&n_list).any(|&v| v == 0) {
            return Err(CliError::Usage("M-list and N-list entries must be at least 1".into()));
        }
        if command == CommandKind::Convergence && !m_list.is_empty() && !n_list.is_empty() {
            return Err(CliError::Usage("give either M-list or N-list, not both".into()));
        }
        if command == CommandKind::Audit && bench.conserved_total.is_none() {
            return Err(CliError::Usage(format!(
                "problem '{problem}' has no conserved total; audit applies to compartment models such as sir"
            )));
        }

        let cfg = Self {
            command,
            problem,
            params,
            n,
            m,
            order,
            horizon,
            out: args.out.clone().or(file.out),
            store_steps: args.store_steps || file.store_steps.unwrap_or(false),
            jobs,
            m_list,
            n_list,
            warn_as_error: args.warn_as_error || file.warn_as_error.unwrap_or(false),
        };
        Ok((cfg, bench))
    }

    /// M values swept by `convergence`.
    pub fn sweep_m(&self) -> Vec<usize> {
        if self.m_list.is_empty() && self.n_list.is_empty() {
            DEFAULT_M_LIST.to_vec()
        } else {
            self.m_list.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn args(problem: &str) -> RunArgs {
        RunArgs {
            problem: Some(problem.into()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults() {
        let (cfg, _) = RunConfig::resolve(CommandKind::Solve, &args("example1")).unwrap();
        assert_eq!((cfg.n, cfg.m, cfg.order), (20, 32, 6));
        assert_eq!(cfg.horizon, Horizon::TFinal(2.0 * PI));
        let (cfg, _) = RunConfig::resolve(CommandKind::Solve, &args("sir")).unwrap();
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.horizon, Horizon::TFinal(4.0));
        assert_eq!(cfg.params.len(), 8);
        let (cfg, _) = RunConfig::resolve(CommandKind::Multipliers, &args("mathieu")).unwrap();
        assert_eq!(cfg.horizon, Horizon::Periods(1));
    }

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "problem = \"mathieu\"\nN = 12\nM = 9\norder = 4\n[param]\nb = 0.3\ndelta = 2.0"
        )
        .unwrap();
        let a = RunArgs {
            config: Some(f.path().to_path_buf()),
            m: Some(5),
            params: vec![("b".into(), 0.1)],
            ..Default::default()
        };
        let (cfg, _) = RunConfig::resolve(CommandKind::Multipliers, &a).unwrap();
        assert_eq!((cfg.n, cfg.m, cfg.order), (12, 5, 4));
        assert_eq!(cfg.params, vec![("delta", 2.0), ("epsilon", 0.5), ("b", 0.1)]);
    }

    #[test]
    fn usage_errors() {
        let bad = |a: RunArgs, cmd| matches!(RunConfig::resolve(cmd, &a), Err(CliError::Usage(_)));
        assert!(bad(RunArgs::default(), CommandKind::Solve));
        assert!(bad(
            RunArgs {
                order: Some(5),
                ..args("example1")
            },
            CommandKind::Solve
        ));
        assert!(bad(
            RunArgs {
                order: Some(6),
                ..args("sir")
            },
            CommandKind::Solve
        ));
        assert!(bad(
            RunArgs {
                n: Some(0),
                ..args("example1")
            },
            CommandKind::Solve
        ));
        assert!(bad(
            RunArgs {
                periods: Some(2),
                ..args("example1")
            },
            CommandKind::Solve
        ));
        assert!(bad(
            RunArgs {
                t_final: Some(2.0),
                ..args("example1")
            },
            CommandKind::Multipliers
        ));
        assert!(bad(args("sir"), CommandKind::Multipliers));
        assert!(bad(args("example1"), CommandKind::Audit));
        assert!(bad(
            RunArgs {
                params: vec![("zeta".into(), 1.0)],
                ..args("mathieu")
            },
            CommandKind::Solve
        ));
        assert!(bad(args("unknown"), CommandKind::Solve));
    }

    #[test]
    fn unknown_file_key() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "problem = \"sir\"\nsteps = 3").unwrap();
        let a = RunArgs {
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        match RunConfig::resolve(CommandKind::Solve, &a) {
            Err(CliError::Usage(msg)) => assert!(msg.contains("steps"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn param_parser() {
        assert_eq!(parse_param("b=-0.2").unwrap(), ("b".into(), -0.2));
        assert!(parse_param("b").is_err());
        assert!(parse_param("b=x").is_err());
        assert!(parse_param("=1").is_err());
    }
}
