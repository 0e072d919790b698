//! `qsr`: reproducible experiments on small quantum states.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "qsr", version, about = "One-shot state redistribution experiments on dense states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random state and write it as a JSON state file.
    Gen(GenArgs),
    /// Entropic quantities of a state file, split as first register vs the rest.
    ///
    /// CSV columns: input_id,first,rest,entropy,fidelity_self,mutual_info,imax,hmin
    Quantities(Common),
    /// Convex-split check on a two-register state `[P, Q]` with σ_Q = ρ_Q.
    ///
    /// CSV columns: input_id,delta,k,n,mutual_info,fidelity_sq,bound_3delta_ok,bound_6delta_ok
    Convexsplit(Common),
    /// Redistribution protocol on `[R, A, B, C]`.
    ///
    /// CSV columns: input_id,eps,n,comm_qubits,operational_qubits,out_fidelity_sq,in_ball
    Redistribute(ProtocolArgs),
    /// State splitting on `[R, A, C]` (same CSV columns as redistribute).
    Split(ProtocolArgs),
    /// State merging on `[R, B, C]` (same CSV columns as redistribute).
    Merge(ProtocolArgs),
    /// Upper and lower estimates of the redistribution cost.
    ///
    /// CSV columns: input_id,eps,t_dim,upper_bits,lower_bits,restarts,converged
    Qeps(QepsArgs),
    /// Runs the acceptance battery.
    ///
    /// CSV columns: id,name,passed,property_ok,seconds,limit_seconds,detail
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// State file (JSON); random states are drawn when absent.
    #[arg(long = "input")]
    pub input_path: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long = "out")]
    pub out_path: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long = "t-dim")]
    pub t_dim: Option<usize>,
    #[arg(long = "n-override")]
    pub n_override: Option<u64>,
    /// Register dimensions for random inputs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Worker threads for independent trials.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// JSON config with the same field names; flags win on conflict.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = Kind::Pure)]
    pub kind: Kind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub labels: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "out")]
    pub out_path: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pure,
    Density,
}

#[derive(Args, Debug, Clone)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest simulated state vector, in amplitudes.
    #[arg(long)]
    pub amplitude_cap: Option<usize>,
    /// Draw one outcome of the measurement instead of keeping the mixture.
    #[arg(long)]
    pub sampled: bool,
    /// Pretty JSON transcripts, one per trial.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct QepsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    /// Try every `T` dimension up to `t_dim` and keep the best.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
    #[arg(long)]
    pub amplitude_cap: Option<usize>,
    #[arg(long = "out")]
    pub out_path: Option<PathBuf>,
}

/// A failure before any computation (exit 2) or during it (exit 1).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl From<qsr_core::QsrError> for CliError {
    fn from(e: qsr_core::QsrError) -> Self {
        use qsr_core::QsrError::*;
        match e {
            Schema { .. } | Invariant { .. } | OutOfRange(_) | InvalidLayout(_) | LabelCollision(_) | UnknownLabel(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Fills unset flags from the JSON config.
fn merge_config(c: &mut Common) -> Result<(), CliError> {
    let Some(path) = c.config.clone() else { return Ok(()) };
    let text = std::fs::read_to_string(&path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    let obj = v.as_object().ok_or_else(|| invalid("config must be a JSON object"))?;
    let num = |k: &str| obj.get(k).map(|x| x.as_f64().ok_or_else(|| invalid(format!("config field `{k}` must be a number")))).transpose();
    let int = |k: &str| obj.get(k).map(|x| x.as_u64().ok_or_else(|| invalid(format!("config field `{k}` must be a non-negative integer")))).transpose();
    let path_of = |k: &str| obj.get(k).map(|x| x.as_str().map(PathBuf::from).ok_or_else(|| invalid(format!("config field `{k}` must be a string")))).transpose();
    c.input_path = c.input_path.take().or(path_of("input_path")?);
    c.out_path = c.out_path.take().or(path_of("out_path")?);
    c.seed = c.seed.or(int("seed")?);
    c.eps = c.eps.or(num("eps")?);
    c.delta = c.delta.or(num("delta")?);
    c.trials = c.trials.or(int("trials")?);
    c.t_dim = c.t_dim.or(int("t_dim")?.map(|x| x as usize));
    c.n_override = c.n_override.or(int("n_override")?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Quantities(mut c) => {
            merge_config(&mut c)?;
            commands::quantities(&c)
        }
        Command::Convexsplit(mut c) => {
            merge_config(&mut c)?;
            commands::convexsplit(&c)
        }
        Command::Redistribute(mut a) => {
            merge_config(&mut a.common)?;
            commands::protocol(commands::Which::Redistribute, &a)
        }
        Command::Split(mut a) => {
            merge_config(&mut a.common)?;
            commands::protocol(commands::Which::Split, &a)
        }
        Command::Merge(mut a) => {
            merge_config(&mut a.common)?;
            commands::protocol(commands::Which::Merge, &a)
        }
        Command::Qeps(mut a) => {
            merge_config(&mut a.common)?;
            commands::qeps(&a)
        }
        Command::Suite(a) => commands::suite(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(m)) => {
            eprintln!("error: {}", m.replace('\n', " "));
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {}", m.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_config(json: &str, c: Common) -> Result<Common, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, json).unwrap();
        let mut c = Common { config: Some(path), ..c };
        merge_config(&mut c)?;
        Ok(c)
    }

    #[test]
    fn config_fills_only_missing_fields() {
        let c = with_config(r#"{"eps": 0.2, "seed": 9, "trials": 3}"#, Common { eps: Some(0.05), ..Common::default() }).unwrap();
        assert_eq!(c.eps, Some(0.05));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.trials, Some(3));
    }

    #[test]
    fn wrong_field_type_is_a_validation_error() {
        let e = with_config(r#"{"seed": -1}"#, Common::default()).err().unwrap();
        assert!(matches!(e, CliError::Validation(m) if m.contains("seed")));
    }

    #[test]
    fn config_must_be_an_object() {
        assert!(matches!(with_config("[1]", Common::default()), Err(CliError::Validation(_))));
    }

    #[test]
    fn core_errors_map_to_exit_classes() {
        let v: CliError = qsr_core::QsrError::OutOfRange("x".into()).into();
        assert!(matches!(v, CliError::Validation(_)));
        let r: CliError = qsr_core::QsrError::Infeasible("x".into()).into();
        assert!(matches!(r, CliError::Runtime(_)));
    }
}
