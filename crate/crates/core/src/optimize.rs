//! Ascent methods for the temperature-`T` dual: gradient ascent, Newton,
//! and their estimator-driven stochastic counterparts.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::qsim::{self, EstimatorMode, Sampling};
use crate::sdp::{decompose_state_model, find_feasible_with_margin, solve_spd, DualPoint, SdpInstance, StateModel};
use crate::thermal::{
    be_entropy, smoothness_bound, spectral_gap_excess, temperature_for_precision, TemperatureSchedule, ThermalPoint,
};

/// Maximum number of step halvings per iteration.
pub const MAX_HALVINGS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ga,
    Newton,
    Sga,
    Snewton,
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Self::Sga | Self::Snewton)
    }

    pub fn uses_hessian(self) -> bool {
        matches!(self, Self::Newton | Self::Snewton)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ga" => Ok(Self::Ga),
            "newton" => Ok(Self::Newton),
            "sga" => Ok(Self::Sga),
            "snewton" => Ok(Self::Snewton),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// `1/L_T` for ascent methods, `1` for Newton methods.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureSpec {
    Fixed(f64),
    Schedule(TemperatureSchedule),
}

impl TemperatureSpec {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            Self::Fixed(t) if *t > 0.0 && t.is_finite() => Ok(*t),
            Self::Fixed(t) => Err(Error::InvalidArgument(format!("temperature must be positive, got {t}"))),
            Self::Schedule(s) => temperature_for_precision(s),
        }
    }
}

/// Per-call estimator precision for the stochastic methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorPrecision {
    Fixed(f64),
    /// `√(L_T δ / c)` for a target dual suboptimality `δ`.
    FromTarget { delta: f64 },
}

/// Source of expectations for the stochastic methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Seeded Bernoulli shots.
    Sampled,
    /// Infinite-shot, infinite-depth limit: the exact thermal values.
    ExactExpectation,
    /// Zero-variance truncated series at the planned depth.
    TruncatedSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub step: StepSize,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Lower bound kept on `λ_min(K_μ)`; `None` means `0.1·T`.
    pub lambda_floor: Option<f64>,
    pub temperature: TemperatureSpec,
    pub precision: EstimatorPrecision,
    /// Precision of each Hessian element estimate before the `−1/T` factor.
    pub hessian_precision: f64,
    pub estimator: EstimatorKind,
    pub seed: u64,
    pub start: Option<DualPoint>,
}

impl OptimizerConfig {
    pub fn new(method: Method, temperature: TemperatureSpec) -> Self {
        Self {
            method,
            step: StepSize::Auto,
            max_iters: 10_000,
            grad_tol: 1e-8,
            lambda_floor: None,
            temperature,
            precision: EstimatorPrecision::Fixed(0.1),
            hessian_precision: 2.0,
            estimator: EstimatorKind::Sampled,
            seed: 0,
            start: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        if let StepSize::Fixed(eta) = self.step {
            positive("step size", eta)?;
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        positive("gradient tolerance", self.grad_tol)?;
        if let Some(f) = self.lambda_floor {
            positive("lambda_min floor", f)?;
        }
        match self.precision {
            EstimatorPrecision::Fixed(e) => positive("estimator precision", e)?,
            EstimatorPrecision::FromTarget { delta } => positive("target suboptimality", delta)?,
        }
        positive("hessian precision", self.hessian_precision)?;
        self.temperature.resolve()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Gradient norm fell below the tolerance.
    Converged,
    /// The iteration cap was hit before convergence.
    IterationCap,
    /// A noisy method ran its prescribed number of iterations.
    Completed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: Vec<f64>,
    pub f_t: f64,
    pub grad_norm: f64,
    pub lambda_min: f64,
    /// Step length that produced this iterate; zero for the start.
    pub step: f64,
    pub wall_ms: f64,
    /// Shift applied to the estimated Hessian before solving.
    pub hessian_shift: Option<f64>,
    /// The Newton step was replaced by a gradient step.
    pub gradient_fallback: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EstimatorCalls {
    pub gradient: u64,
    pub hessian: u64,
}

/// Audit of `|f̃_T(μ_J) − E|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorDecomposition {
    pub entropy_correction: f64,
    /// `½ gᵀ(−∇²f_T)⁻¹ g`, the local estimate of `f_T(μ_T*) − f_T(μ_J)`.
    pub suboptimality_bound: f64,
    pub approximation_bound: f64,
    pub schedule_mode: String,
    pub total_bound: f64,
    pub measured_gap: Option<f64>,
    pub dominated: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalReport {
    pub mu_final: Vec<f64>,
    /// `f̃_T(μ_J)`, estimated for the sampled methods.
    pub e_estimate: f64,
    pub e_estimate_stderr: Option<f64>,
    /// Exact `f̃_T(μ_J)`.
    pub f_tilde: f64,
    pub f_t: f64,
    pub temperature: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub lambda_min_final: f64,
    pub grad_norm_final: f64,
    pub step_size: f64,
    pub lambda_floor: f64,
    pub smoothness: f64,
    pub estimator_calls: EstimatorCalls,
    pub bound_decomposition: ErrorDecomposition,
    pub oracle_value: Option<f64>,
    pub oracle_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub report: FinalReport,
}

pub const TRACE_HEADER: &str = "iter,f_T,grad_norm,lambda_min,step,wall_ms";

impl RunTrace {
    /// CSV with one row per iterate. Without `include_wall_time` the
    /// `wall_ms` column is zero so the file depends only on the inputs.
    pub fn to_csv(&self, include_wall_time: bool) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let wall = if include_wall_time { r.wall_ms } else { 0.0 };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.f_t, r.grad_norm, r.lambda_min, r.step, wall
            ));
        }
        out
    }

    /// Fills in the oracle comparison.
    pub fn attach_oracle(&mut self, oracle_value: f64) {
        let gap = (self.report.e_estimate - oracle_value).abs();
        let d = &mut self.report.bound_decomposition;
        d.measured_gap = Some((self.report.f_tilde - oracle_value).abs());
        d.dominated = d.measured_gap.map(|g| g <= d.total_bound);
        self.report.oracle_value = Some(oracle_value);
        self.report.oracle_gap = Some(gap);
    }
}

trait DerivativeSource {
    fn gradient(&mut self, point: &ThermalPoint, iter: usize) -> Result<Vec<f64>>;
    fn hessian(&mut self, point: &ThermalPoint, iter: usize) -> Result<DMatrix<f64>>;
    /// Exact sources stop on the gradient norm; noisy ones only on the cap.
    fn is_exact(&self) -> bool;
    fn calls(&self) -> EstimatorCalls;
}

struct ThermalSource;

impl DerivativeSource for ThermalSource {
    fn gradient(&mut self, point: &ThermalPoint, _iter: usize) -> Result<Vec<f64>> {
        Ok(point.gradient())
    }

    fn hessian(&mut self, point: &ThermalPoint, _iter: usize) -> Result<DMatrix<f64>> {
        Ok(point.hessian())
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn calls(&self) -> EstimatorCalls {
        EstimatorCalls::default()
    }
}

const STREAM_GRADIENT: u64 = 1;
const STREAM_HESSIAN: u64 = 2;
const STREAM_FINAL: u64 = 3;

/// Counts calls and drives the estimators with per-call derived seeds.
struct EstimatorSource {
    targets: Vec<f64>,
    models: Vec<Option<StateModel>>,
    precision: f64,
    hessian_precision: f64,
    kind: EstimatorKind,
    seed: u64,
    calls: EstimatorCalls,
}

impl EstimatorSource {
    fn sampling(&self, path: &[u64]) -> Sampling {
        match self.kind {
            EstimatorKind::Sampled => Sampling::Shots {
                seed: qsim::derive_seed(self.seed, path),
            },
            _ => Sampling::Exact,
        }
    }

    /// `Tr[X_T A]` for an operator with the given state model.
    fn trace(&mut self, point: &ThermalPoint, model: Option<&StateModel>, path: &[u64]) -> Result<qsim::Estimate> {
        self.calls.gradient += 1;
        let Some(model) = model else {
            return Ok(qsim::Estimate {
                value: 0.0,
                stderr: 0.0,
                shots: 0,
            });
        };
        let budget = qsim::plan_budget(
            point.lambda_min(),
            point.temperature(),
            self.precision,
            model.one_norm(),
            EstimatorMode::Gradient,
        )?;
        qsim::estimate_thermal_trace(point.slack(), point.temperature(), model, &budget, self.sampling(path))
    }
}

impl DerivativeSource for EstimatorSource {
    fn gradient(&mut self, point: &ThermalPoint, iter: usize) -> Result<Vec<f64>> {
        if self.kind == EstimatorKind::ExactExpectation {
            self.calls.gradient += self.models.len() as u64;
            return Ok(point.gradient());
        }
        let mut g = Vec::with_capacity(self.targets.len());
        for i in 0..self.targets.len() {
            let q = self.targets[i];
            let model = self.models[i].clone();
            let est = self.trace(point, model.as_ref(), &[STREAM_GRADIENT, iter as u64, i as u64])?;
            g.push(q - est.value);
        }
        Ok(g)
    }

    fn hessian(&mut self, point: &ThermalPoint, iter: usize) -> Result<DMatrix<f64>> {
        let c = self.models.len();
        if self.kind == EstimatorKind::ExactExpectation {
            self.calls.hessian += (c * c) as u64;
            return Ok(point.hessian());
        }
        let mut h = DMatrix::zeros(c, c);
        for i in 0..c {
            for j in 0..c {
                self.calls.hessian += 1;
                let (Some(mi), Some(mj)) = (&self.models[i], &self.models[j]) else {
                    continue;
                };
                let budget = qsim::plan_budget(
                    point.lambda_min(),
                    point.temperature(),
                    self.hessian_precision,
                    mi.one_norm() * mj.one_norm(),
                    EstimatorMode::Hessian,
                )?;
                let sampling = self.sampling(&[STREAM_HESSIAN, iter as u64, i as u64, j as u64]);
                h[(i, j)] =
                    qsim::estimate_hessian_element(point.slack(), point.temperature(), mi, mj, &budget, sampling)?.value;
            }
        }
        Ok(h)
    }

    fn is_exact(&self) -> bool {
        self.kind != EstimatorKind::Sampled
    }

    fn calls(&self) -> EstimatorCalls {
        self.calls
    }
}

fn state_model_or_none(a: &HermitianMatrix) -> Result<Option<StateModel>> {
    if a.max_norm() == 0.0 {
        Ok(None)
    } else {
        decompose_state_model(a).map(Some)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Feasible point along `μ + s·dir`, halving `s` from `initial`.
fn backtrack<'a>(
    inst: &'a SdpInstance,
    mu: &DualPoint,
    dir: &[f64],
    initial: f64,
    temperature: f64,
    floor: f64,
) -> Result<(ThermalPoint<'a>, f64)> {
    let mut s = initial;
    for _ in 0..=MAX_HALVINGS {
        let trial = mu.step(dir, s);
        match ThermalPoint::new(inst, &trial, temperature) {
            Ok(p) if p.lambda_min() >= floor => return Ok((p, s)),
            Ok(_) | Err(Error::DualInfeasible { .. }) => s *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(Error::StepUnderflow { floor })
}

/// `−H` solved against `g`: the Newton direction for a concave objective.
fn newton_direction(h: &DMatrix<f64>, g: &[f64]) -> Result<Vec<f64>> {
    let neg = -h;
    let rhs = DVector::from_column_slice(g);
    Ok(solve_spd(&neg, &rhs)?.iter().copied().collect())
}

struct Setup {
    temperature: f64,
    floor: f64,
    smoothness: f64,
    step: f64,
    start: DualPoint,
}

fn setup(inst: &SdpInstance, config: &OptimizerConfig) -> Result<Setup> {
    config.validate()?;
    let temperature = config.temperature.resolve()?;
    let floor = config.lambda_floor.unwrap_or(0.1 * temperature);
    let smoothness = smoothness_bound(inst, floor, temperature)?.constant;
    let step = match config.step {
        StepSize::Fixed(eta) => eta,
        StepSize::Auto if config.method.uses_hessian() => 1.0,
        StepSize::Auto => 1.0 / smoothness,
    };
    let start = match &config.start {
        Some(mu) => {
            if mu.len() != inst.num_constraints() {
                return Err(Error::DimensionMismatch {
                    context: "start point",
                    expected: inst.num_constraints(),
                    found: mu.len(),
                });
            }
            mu.clone()
        }
        None => find_feasible_with_margin(inst, 2.0 * floor)?,
    };
    Ok(Setup {
        temperature,
        floor,
        smoothness,
        step,
        start,
    })
}

/// Runs the configured method.
pub fn run(inst: &SdpInstance, config: &OptimizerConfig) -> Result<RunTrace> {
    match config.method {
        Method::Ga => gradient_ascent(inst, config),
        Method::Newton => newton(inst, config),
        Method::Sga => stochastic_gradient_ascent(inst, config),
        Method::Snewton => stochastic_newton(inst, config),
    }
}

pub fn gradient_ascent(inst: &SdpInstance, config: &OptimizerConfig) -> Result<RunTrace> {
    drive(inst, config, &mut ThermalSource, false)
}

pub fn newton(inst: &SdpInstance, config: &OptimizerConfig) -> Result<RunTrace> {
    drive(inst, config, &mut ThermalSource, true)
}

fn estimator_source(inst: &SdpInstance, config: &OptimizerConfig, setup: &Setup) -> Result<EstimatorSource> {
    let models = inst
        .constraints()
        .iter()
        .map(state_model_or_none)
        .collect::<Result<Vec<_>>>()?;
    let precision = match config.precision {
        EstimatorPrecision::Fixed(e) => e,
        EstimatorPrecision::FromTarget { delta } => (setup.smoothness * delta / inst.num_constraints() as f64).sqrt(),
    };
    Ok(EstimatorSource {
        targets: inst.targets().to_vec(),
        models,
        precision,
        hessian_precision: config.hessian_precision,
        kind: config.estimator,
        seed: config.seed,
        calls: EstimatorCalls::default(),
    })
}

pub fn stochastic_gradient_ascent(inst: &SdpInstance, config: &OptimizerConfig) -> Result<RunTrace> {
    let s = setup(inst, config)?;
    let mut source = estimator_source(inst, config, &s)?;
    let mut trace = drive(inst, config, &mut source, false)?;
    final_estimate(inst, &mut source, &mut trace)?;
    Ok(trace)
}

pub fn stochastic_newton(inst: &SdpInstance, config: &OptimizerConfig) -> Result<RunTrace> {
    let s = setup(inst, config)?;
    let mut source = estimator_source(inst, config, &s)?;
    let mut trace = drive(inst, config, &mut source, true)?;
    final_estimate(inst, &mut source, &mut trace)?;
    Ok(trace)
}

/// Estimates `f̃_T = μ·q + Tr[H X_T] − Σ μ_i Tr[Q_i X_T]` at the last iterate.
fn final_estimate(inst: &SdpInstance, source: &mut EstimatorSource, trace: &mut RunTrace) -> Result<()> {
    if source.kind == EstimatorKind::ExactExpectation {
        return Ok(());
    }
    let t = trace.report.temperature;
    let mu = DualPoint::new(trace.report.mu_final.clone())?;
    let point = ThermalPoint::new(inst, &mu, t)?;
    let h_model = state_model_or_none(inst.h())?;
    let h = source.trace(&point, h_model.as_ref(), &[STREAM_FINAL, 0])?;
    let mut value = mu.dot(inst.targets()) + h.value;
    let mut var = h.stderr * h.stderr;
    for i in 0..inst.num_constraints() {
        let model = source.models[i].clone();
        let est = source.trace(&point, model.as_ref(), &[STREAM_FINAL, 1, i as u64])?;
        let m = mu.as_slice()[i];
        value -= m * est.value;
        var += m * m * est.stderr * est.stderr;
    }
    trace.report.e_estimate = value;
    trace.report.e_estimate_stderr = Some(var.sqrt());
    trace.report.estimator_calls = source.calls();
    Ok(())
}

fn drive(
    inst: &SdpInstance,
    config: &OptimizerConfig,
    source: &mut dyn DerivativeSource,
    second_order: bool,
) -> Result<RunTrace> {
    let clock = Instant::now();
    let s = setup(inst, config)?;
    let t = s.temperature;
    let mut point = ThermalPoint::new(inst, &s.start, t)?;
    if point.lambda_min() < s.floor {
        return Err(Error::StepUnderflow { floor: s.floor });
    }
    let exact = source.is_exact();
    let mut g = source.gradient(&point, 0)?;
    let mut records = vec![record(0, &point, &g, 0.0, &clock, None, false)];
    let mut stop = StopReason::IterationCap;
    let mut iter = 0;
    loop {
        if exact && norm(&g) <= config.grad_tol {
            stop = StopReason::Converged;
            break;
        }
        if iter == config.max_iters {
            if !exact {
                stop = StopReason::Completed;
            }
            break;
        }
        let mut shift = None;
        let mut fallback = false;
        let (dir, initial) = if second_order {
            let h = source.hessian(&point, iter)?;
            if exact {
                (newton_direction(&h, &g)?, s.step)
            } else {
                match regularize_estimated_hessian(&h) {
                    Some((h, sh)) => {
                        shift = Some(sh);
                        (newton_direction(&h, &g)?, s.step)
                    }
                    None => {
                        fallback = true;
                        (g.clone(), 1.0 / s.smoothness)
                    }
                }
            }
        } else {
            (g.clone(), s.step)
        };
        let (next, taken) = backtrack(inst, point.mu(), &dir, initial, t, s.floor)?;
        point = next;
        iter += 1;
        g = source.gradient(&point, iter)?;
        records.push(record(iter, &point, &g, taken, &clock, shift, fallback));
    }
    let report = final_report(inst, &point, &g, &s, config, iter, stop, source.calls())?;
    Ok(RunTrace { records, report })
}

/// Symmetrizes an estimated Hessian and shifts it to be negative definite.
/// `None` when the required shift exceeds the matrix norm.
fn regularize_estimated_hessian(h: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let top = eig.eigenvalues.max();
    let scale = eig.eigenvalues.amax();
    let margin = 1e-6 * scale.max(f64::MIN_POSITIVE);
    if top <= -margin {
        return Some((sym, 0.0));
    }
    let shift = top + margin;
    if shift > scale || scale == 0.0 {
        return None;
    }
    let n = sym.nrows();
    Some((sym - DMatrix::identity(n, n) * shift, shift))
}

fn record(
    iter: usize,
    point: &ThermalPoint,
    g: &[f64],
    step: f64,
    clock: &Instant,
    hessian_shift: Option<f64>,
    gradient_fallback: bool,
) -> IterationRecord {
    IterationRecord {
        iter,
        mu: point.mu().as_slice().to_vec(),
        f_t: point.objective(),
        grad_norm: norm(g),
        lambda_min: point.lambda_min(),
        step,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        hessian_shift,
        gradient_fallback,
    }
}

#[allow(clippy::too_many_arguments)]
fn final_report(
    inst: &SdpInstance,
    point: &ThermalPoint,
    g: &[f64],
    s: &Setup,
    config: &OptimizerConfig,
    iterations: usize,
    stop: StopReason,
    calls: EstimatorCalls,
) -> Result<FinalReport> {
    let t = s.temperature;
    let f_tilde = point.unregularized_energy();
    let entropy = be_entropy(point.operator().x())?;
    let exact_g = point.gradient();
    let subopt = match newton_direction(&point.hessian(), &exact_g) {
        Ok(dir) => 0.5 * dir.iter().zip(&exact_g).map(|(a, b)| a * b).sum::<f64>().max(0.0),
        Err(_) => f64::INFINITY,
    };
    let (mode, approx) = approximation_bound(inst, point, &config.temperature, t, entropy)?;
    let entropy_correction = t * entropy;
    let total = entropy_correction + subopt + approx;
    Ok(FinalReport {
        mu_final: point.mu().as_slice().to_vec(),
        e_estimate: f_tilde,
        e_estimate_stderr: None,
        f_tilde,
        f_t: point.objective(),
        temperature: t,
        iterations,
        stop,
        lambda_min_final: point.lambda_min(),
        grad_norm_final: norm(g),
        step_size: s.step,
        lambda_floor: s.floor,
        smoothness: s.smoothness,
        estimator_calls: calls,
        bound_decomposition: ErrorDecomposition {
            entropy_correction,
            suboptimality_bound: subopt,
            approximation_bound: approx,
            schedule_mode: mode.to_string(),
            total_bound: total,
            measured_gap: None,
            dominated: None,
        },
        oracle_value: None,
        oracle_gap: None,
    })
}

/// Bound on `E − f_T(μ_T*)` implied by the schedule, never below the
/// entropy term it must dominate.
fn approximation_bound(
    inst: &SdpInstance,
    point: &ThermalPoint,
    spec: &TemperatureSpec,
    t: f64,
    entropy: f64,
) -> Result<(&'static str, f64)> {
    let d = inst.dim() as f64;
    Ok(match spec {
        TemperatureSpec::Schedule(TemperatureSchedule::Entropy { s_max, .. }) => ("entropy", t * s_max.max(entropy)),
        TemperatureSpec::Schedule(TemperatureSchedule::Spectral { .. }) => {
            let summary = crate::sdp::summarize_spectrum(point.operator().k_spectrum(), None)?;
            ("spectral", spectral_gap_excess(&summary, inst.dim(), t).max(t * entropy))
        }
        TemperatureSpec::Schedule(TemperatureSchedule::Dimension { .. }) => ("dimension", (t * d).max(t * entropy)),
        TemperatureSpec::Fixed(_) => ("fixed", (t * d).max(t * entropy)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianMatrix;

    fn inst_a() -> SdpInstance {
        SdpInstance::new(
            HermitianMatrix::from_real_diagonal(&[1.0, 2.0]),
            vec![HermitianMatrix::identity(2)],
            vec![1.0],
        )
        .unwrap()
    }

    fn config(method: Method, t: f64) -> OptimizerConfig {
        let mut c = OptimizerConfig::new(method, TemperatureSpec::Fixed(t));
        c.lambda_floor = Some(0.5 * t);
        c
    }

    #[test]
    fn ga_inst_a() {
        let trace = gradient_ascent(&inst_a(), &config(Method::Ga, 0.05)).unwrap();
        let r = &trace.report;
        assert_eq!(r.stop, StopReason::Converged);
        assert!(r.grad_norm_final <= 1e-8);
        assert!((r.f_tilde - 1.0).abs() <= 0.1);
        for w in trace.records.windows(2) {
            assert!(w[1].f_t >= w[0].f_t - 1e-12);
        }
    }

    #[test]
    fn ga_symmetric_instance() {
        let inst = SdpInstance::new(
            HermitianMatrix::identity(2),
            vec![HermitianMatrix::identity(2)],
            vec![1.0],
        )
        .unwrap();
        let t = 0.2;
        let trace = gradient_ascent(&inst, &config(Method::Ga, t)).unwrap();
        let mu = trace.report.mu_final[0];
        assert!((mu - (1.0 - t * 3f64.ln())).abs() < 1e-8);
    }

    #[test]
    fn newton_beats_ga() {
        let ga = gradient_ascent(&inst_a(), &config(Method::Ga, 0.05)).unwrap();
        let nt = newton(&inst_a(), &config(Method::Newton, 0.05)).unwrap();
        assert_eq!(nt.report.stop, StopReason::Converged);
        assert!(nt.report.iterations <= ga.report.iterations);
        assert!((nt.report.f_tilde - 1.0).abs() <= 0.1);
    }

    #[test]
    fn exact_expectation_reproduces_deterministic() {
        let mut c = config(Method::Sga, 0.05);
        c.estimator = EstimatorKind::ExactExpectation;
        let s = stochastic_gradient_ascent(&inst_a(), &c).unwrap();
        let g = gradient_ascent(&inst_a(), &config(Method::Ga, 0.05)).unwrap();
        assert_eq!(s.to_csv(false), g.to_csv(false));
        assert_eq!(s.report.mu_final, g.report.mu_final);
    }

    #[test]
    fn csv_layout() {
        let trace = gradient_ascent(&inst_a(), &config(Method::Ga, 0.5)).unwrap();
        let csv = trace.to_csv(false);
        assert!(csv.starts_with("iter,f_T,grad_norm,lambda_min,step,wall_ms\n"));
        assert_eq!(csv.lines().count(), trace.records.len() + 1);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut c = config(Method::Ga, 0.05);
        c.max_iters = 3;
        let trace = gradient_ascent(&inst_a(), &c).unwrap();
        assert_eq!(trace.report.stop, StopReason::IterationCap);
        assert_eq!(trace.records.len(), 4);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = config(Method::Ga, 0.05);
        c.grad_tol = 0.0;
        assert!(gradient_ascent(&inst_a(), &c).is_err());
        let c = config(Method::Ga, -1.0);
        assert!(gradient_ascent(&inst_a(), &c).is_err());
    }

    #[test]
    fn hessian_regularization() {
        let h = DMatrix::from_row_slice(2, 2, &[-2.0, 0.1, 0.3, -1.0]);
        let (r, shift) = regularize_estimated_hessian(&h).unwrap();
        assert_eq!(shift, 0.0);
        assert_eq!(r[(0, 1)], r[(1, 0)]);
        let h = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 0.5]);
        let (r, shift) = regularize_estimated_hessian(&h).unwrap();
        assert!(shift > 0.5);
        assert!(r.symmetric_eigen().eigenvalues.max() < 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!(regularize_estimated_hessian(&h).is_none());
    }
}
