//! Command-line grammar. Every numeric flag is range-checked by its value
//! parser, so a command that starts computing has valid inputs.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "bosonic-sdp", version, about = "Bose-Einstein regularized SDP solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Solve the regularized dual and report f̃_T.
    Solve(SolveArgs),
    /// Solve the unregularized dual with the reference oracle.
    Oracle(OracleArgs),
    /// Solve, run the oracle and check every applicable approximation bound.
    Bounds(SolveArgs),
    /// Run one thermal-trace or Hessian-element estimator against its exact value.
    Estimate(EstimateArgs),
    /// Evaluate the Bose-Einstein divergence and its cross-checks.
    Divergence(DivergenceArgs),
    /// Plan an estimator budget and predict its gate count.
    Budget(BudgetArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArg {
    /// Instance JSON with fields d, c, H, Q, q.
    #[arg(long, value_parser = existing_file)]
    pub instance: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct TemperatureArgs {
    /// Fixed temperature.
    #[arg(long, value_parser = positive)]
    pub temperature: Option<f64>,
    /// Temperature rule: entropy:SMAX, dimension or spectral.
    #[arg(long)]
    pub schedule: Option<ScheduleArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScheduleArg {
    Entropy { s_max: f64 },
    Dimension,
    Spectral,
}

impl FromStr for ScheduleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "dimension" => Ok(Self::Dimension),
            None if s == "spectral" => Ok(Self::Spectral),
            Some(("entropy", v)) => {
                let s_max: f64 = v.parse().map_err(|_| format!("entropy bound {v:?} is not a number"))?;
                if s_max.is_infinite() {
                    return Err("S_max is infinite (non-compact feasible set); use --schedule dimension".into());
                }
                if s_max.is_nan() || s_max <= 0.0 {
                    return Err(format!("entropy bound must be positive, got {v}"));
                }
                Ok(Self::Entropy { s_max })
            }
            _ => Err(format!("unknown schedule {s:?}; expected entropy:SMAX, dimension or spectral")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Ga,
    Newton,
    Sga,
    Snewton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    /// Seeded Bernoulli shots.
    Sampled,
    /// Exact thermal expectations.
    Exact,
    /// Exact truncated series at the planned depth.
    Series,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Ga)]
    pub method: MethodArg,
    #[command(flatten)]
    pub temperature: TemperatureArgs,
    /// Target precision for --schedule.
    #[arg(long, value_parser = positive)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 10_000, value_parser = positive_count)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub grad_tol: f64,
    /// Lower bound kept on λ_min(K_μ); defaults to 0.1·T.
    #[arg(long, value_parser = positive)]
    pub lambda_floor: Option<f64>,
    /// Fixed step size instead of 1/L_T (ascent) or 1 (Newton).
    #[arg(long, value_parser = positive)]
    pub step: Option<f64>,
    /// Per-call estimator precision for sga and snewton.
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    pub precision: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Sampled)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the per-iteration CSV trace here.
    #[arg(long, value_parser = output_path)]
    pub trace: Option<PathBuf>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long, value_parser = output_path)]
    pub report: Option<PathBuf>,
    /// Record wall-clock time in the trace; the CSV is then not reproducible.
    #[arg(long)]
    pub wall_time: bool,
    /// Compare against the reference oracle in the report.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub instance: InstanceArg,
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    #[arg(long, value_parser = output_path)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Gradient,
    Hessian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingArg {
    Shots,
    Exact,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub instance: InstanceArg,
    /// Dual point as comma-separated values; defaults to zero.
    #[arg(long, value_parser = float_list, allow_hyphen_values = true)]
    pub mu: Option<FloatList>,
    #[arg(long, value_parser = positive)]
    pub temperature: f64,
    #[arg(long, value_parser = positive)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Gradient)]
    pub mode: ModeArg,
    /// Constraint index i (gradient) or pair i,j (Hessian).
    #[arg(long, value_parser = index_list, default_value = "0")]
    pub index: IndexList,
    #[arg(long, value_enum, default_value_t = SamplingArg::Shots)]
    pub sampling: SamplingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = output_path)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorArg {
    /// Independent random PSD matrices.
    RandomPsd,
    /// Y equal to a random PSD X.
    Equal,
    /// Diagonal matrices from --x-diag and --y-diag.
    Diagonal,
}

#[derive(Debug, Args, Serialize)]
pub struct DivergenceArgs {
    /// JSON file with matrices X and Y as rows of [re, im] pairs.
    #[arg(long, value_parser = existing_file, conflicts_with = "generator")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "input")]
    pub generator: Option<GeneratorArg>,
    #[arg(long, default_value_t = 3, value_parser = positive_count)]
    pub dim: usize,
    #[arg(long, value_parser = float_list)]
    pub x_diag: Option<FloatList>,
    #[arg(long, value_parser = float_list)]
    pub y_diag: Option<FloatList>,
    /// Affine channel: attenuator:ETA,N, amplifier:G,N, additive:N or raw:A,B.
    #[arg(long)]
    pub channel: Option<ChannelArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = output_path)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelArg {
    Attenuator { eta: f64, noise: f64 },
    Amplifier { gain: f64, noise: f64 },
    Additive { noise: f64 },
    Raw { a: f64, b: f64 },
}

impl FromStr for ChannelArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("channel {s:?} needs KIND:PARAMS"))?;
        let values = float_list(rest)?.0;
        let want = if kind == "additive" { 1 } else { 2 };
        if values.len() != want {
            return Err(format!("channel {kind} takes {want} parameter(s), got {}", values.len()));
        }
        match kind {
            "attenuator" => Ok(Self::Attenuator { eta: values[0], noise: values[1] }),
            "amplifier" => Ok(Self::Amplifier { gain: values[0], noise: values[1] }),
            "additive" => Ok(Self::Additive { noise: values[0] }),
            "raw" => Ok(Self::Raw { a: values[0], b: values[1] }),
            _ => Err(format!("unknown channel {kind:?}; expected attenuator, amplifier, additive or raw")),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BudgetArgs {
    #[arg(long, value_parser = positive)]
    pub lambda_min: f64,
    #[arg(long, value_parser = positive)]
    pub temperature: f64,
    #[arg(long, value_parser = positive)]
    pub epsilon: f64,
    /// ‖α‖₁ (gradient) or ‖α_i‖₁‖α_j‖₁ (Hessian).
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub alpha_norm: f64,
    /// ‖h‖₁ of the slack operator, used for the gate count.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub h_norm: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Gradient)]
    pub mode: ModeArg,
    /// Write (t, p(t; τ)) pairs of the Cauchy density as CSV.
    #[arg(long, value_parser = output_path)]
    pub emit_density: Option<PathBuf>,
    /// Cauchy scale for --emit-density; defaults to 1/T.
    #[arg(long, value_parser = positive)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 401, value_parser = positive_count)]
    pub points: usize,
    #[arg(long, value_parser = output_path)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IndexList(pub Vec<usize>);

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("must be a positive integer, got {s:?}")),
        Ok(n) => Ok(n),
    }
}

fn float_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| format!("{p:?} is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{p:?} is not finite"))
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(FloatList)
}

fn index_list(s: &str) -> Result<IndexList, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("{p:?} is not an index")))
        .collect::<Result<Vec<_>, _>>()
        .map(IndexList)
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("file {s:?} does not exist"))
    }
}

fn output_path(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(format!("directory {} does not exist", dir.display()))
        }
        _ if p.is_dir() => Err(format!("{s:?} is a directory")),
        _ => Ok(p),
    }
}
