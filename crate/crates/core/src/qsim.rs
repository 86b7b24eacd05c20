//! Classical simulation of the thermal-trace and Hessian-element
//! estimators.
//!
//! `X_T = Σ_{m≥1} e^{−mK/T}` and `e^{−mλ/T}` is the characteristic function
//! of a Cauchy variable with scale `m/T`, so each series term is the
//! expectation of `Re Tr[ρ e^{−itK}]` over Cauchy times. Circuit shots are
//! drawn as Bernoulli variables with the exact expectation of the circuit;
//! no state vector is propagated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, EigenSystem, HermitianMatrix, C64};
use crate::sdp::StateModel;

/// Largest truncation depth a budget may request.
pub const MAX_DEPTH: usize = 10_000;

/// Largest shot count a single series term may request.
pub const MAX_SHOTS_PER_TERM: u64 = 10_000_000_000;

const DENSITY_TOL: f64 = 1e-10;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed derivation: the result depends only on `master` and
/// the path, never on execution order.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(master), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Independent generator for the given path below `master`.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Inverse-CDF Cauchy map `τ tan(π(u − ½))`.
pub fn cauchy_from_uniform(tau: f64, u: f64) -> f64 {
    tau * (PI * (u - 0.5)).tan()
}

pub fn sample_cauchy<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> f64 {
    cauchy_from_uniform(tau, rng.random::<f64>())
}

/// Cauchy sample conditioned on `|t| ≤ t_max` by rejection.
pub fn sample_truncated_cauchy<R: Rng + ?Sized>(tau: f64, t_max: f64, rng: &mut R) -> f64 {
    loop {
        let t = sample_cauchy(tau, rng);
        if t.abs() <= t_max {
            return t;
        }
    }
}

/// Cauchy density `τ / (π(t² + τ²))`.
pub fn cauchy_density(t: f64, tau: f64) -> f64 {
    tau / (PI * (t * t + tau * tau))
}

fn check_density(rho: &HermitianMatrix) -> Result<()> {
    let eig = eigendecompose(rho)?;
    eig.psd_eigenvalues()?;
    let tr = rho.trace();
    if (tr - 1.0).abs() > DENSITY_TOL {
        return Err(Error::InvalidArgument(format!("density matrix must have unit trace, got {tr}")));
    }
    Ok(())
}

fn check_dims(a: &HermitianMatrix, k: &HermitianMatrix) -> Result<()> {
    if a.dim() == k.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: "state vs evolution generator",
            expected: k.dim(),
            found: a.dim(),
        })
    }
}

/// `⟨Z⟩ = Re Tr[ρ e^{−itK}]` of the Hadamard test.
pub fn hadamard_expectation(rho: &HermitianMatrix, k: &HermitianMatrix, t: f64) -> Result<f64> {
    check_dims(rho, k)?;
    check_density(rho)?;
    let eig = eigendecompose(k)?;
    let diag = eig.diagonal_in_eigenbasis(rho);
    Ok(single_expectation(&diag, eig.eigenvalues(), t))
}

/// `⟨Z⟩ = Re Tr[e^{−it₁K} ρ e^{−it₂K} σ]` of the controlled-SWAP test.
pub fn swap_hadamard_expectation(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    k: &HermitianMatrix,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    check_dims(rho, k)?;
    check_dims(sigma, k)?;
    check_density(rho)?;
    check_density(sigma)?;
    let eig = eigendecompose(k)?;
    let pair = pair_products(&eig, rho, sigma);
    Ok(pair_expectation(&pair, eig.eigenvalues(), t1, t2))
}

fn single_expectation(diag: &[f64], lambdas: &[f64], t: f64) -> f64 {
    diag.iter().zip(lambdas).map(|(p, l)| p * (t * l).cos()).sum()
}

/// `ρ̃[a,b] σ̃[b,a]` in the eigenbasis of `K`.
fn pair_products(eig: &EigenSystem, rho: &HermitianMatrix, sigma: &HermitianMatrix) -> DMatrix<C64> {
    let r = eig.to_eigenbasis(rho);
    let s = eig.to_eigenbasis(sigma);
    DMatrix::from_fn(r.nrows(), r.ncols(), |a, b| r[(a, b)] * s[(b, a)])
}

fn pair_expectation(pair: &DMatrix<C64>, lambdas: &[f64], t1: f64, t2: f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..lambdas.len() {
        for b in 0..lambdas.len() {
            let phase = -(t1 * lambdas[a] + t2 * lambdas[b]);
            let p = pair[(a, b)];
            acc += p.re * phase.cos() - p.im * phase.sin();
        }
    }
    acc
}

/// One ±1 outcome with mean `expectation`.
pub fn bernoulli_shot<R: Rng + ?Sized>(expectation: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < 0.5 * (1.0 + expectation) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Gradient,
    Hessian,
}

/// Truncation depth, time cutoffs and shot counts for one estimator call.
///
/// In gradient mode `t_max[m−1]` and `shots[m−1]` belong to series term `m`.
/// In Hessian mode cell `(m₁, m₂)` uses index `max(m₁, m₂) − 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorBudget {
    pub mode: EstimatorMode,
    pub depth: usize,
    pub t_max: Vec<f64>,
    pub shots: Vec<u64>,
    /// Series, tail and statistical shares of the precision.
    pub error_split: [f64; 3],
    pub epsilon: f64,
    pub alpha_norm: f64,
}

impl EstimatorBudget {
    /// Caller-supplied budget.
    pub fn custom(mode: EstimatorMode, t_max: Vec<f64>, shots: Vec<u64>, epsilon: f64, alpha_norm: f64) -> Result<Self> {
        let depth = t_max.len();
        if depth == 0 || shots.len() != depth {
            return Err(Error::InvalidArgument(
                "budget needs matching non-empty t_max and shots vectors".into(),
            ));
        }
        if depth > MAX_DEPTH {
            return Err(Error::BudgetInfeasible {
                depth: depth as f64,
                cap: MAX_DEPTH,
            });
        }
        if t_max.iter().any(|&t| !(t > 0.0)) || shots.contains(&0) {
            return Err(Error::InvalidArgument("budget entries must be positive".into()));
        }
        Ok(Self {
            mode,
            depth,
            t_max,
            shots,
            error_split: [epsilon / 3.0; 3],
            epsilon,
            alpha_norm,
        })
    }

    /// Same cutoffs with every shot count multiplied by `factor`.
    pub fn with_shot_factor(&self, factor: f64) -> Result<Self> {
        let shots = self.shots.iter().map(|&n| ((n as f64) * factor).ceil().max(1.0) as u64).collect();
        Self::custom(self.mode, self.t_max.clone(), shots, self.epsilon, self.alpha_norm)
    }

    pub fn cell_index(&self, m1: usize, m2: usize) -> usize {
        m1.max(m2) - 1
    }

    /// Total number of circuit runs.
    pub fn total_shots(&self) -> u64 {
        match self.mode {
            EstimatorMode::Gradient => self.shots.iter().sum(),
            EstimatorMode::Hessian => {
                let mut total = 0;
                for m1 in 1..=self.depth {
                    for m2 in 1..=self.depth {
                        total += self.shots[self.cell_index(m1, m2)];
                    }
                }
                total
            }
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

/// Plans depth, cutoffs and shots so that series truncation, Cauchy tail
/// truncation and shot noise each contribute at most `ε/3`.
///
/// `alpha_norm` is `‖α‖₁` in gradient mode and `‖α_i‖₁‖α_j‖₁` in Hessian
/// mode. The Hessian budget covers the double sum before the `−1/T` factor.
pub fn plan_budget(
    lambda_min: f64,
    temperature: f64,
    epsilon: f64,
    alpha_norm: f64,
    mode: EstimatorMode,
) -> Result<EstimatorBudget> {
    check_positive("lambda_min", lambda_min)?;
    check_positive("temperature", temperature)?;
    check_positive("epsilon", epsilon)?;
    check_positive("alpha norm", alpha_norm)?;
    let ratio = temperature / lambda_min;
    let vacancy = -(-lambda_min / temperature).exp_m1();
    let depth = match mode {
        EstimatorMode::Gradient => (ratio * (3.0 * alpha_norm / (epsilon * vacancy)).ln() - 1.0).ceil(),
        EstimatorMode::Hessian => (1.0 + ratio * (6.0 * alpha_norm / (epsilon * vacancy * vacancy)).ln()).ceil(),
    }
    .max(1.0);
    if !(depth <= MAX_DEPTH as f64) {
        return Err(Error::BudgetInfeasible { depth, cap: MAX_DEPTH });
    }
    let m_total = depth as usize;
    let mf = depth;
    let (t_max, shots_f): (Vec<f64>, f64) = match mode {
        EstimatorMode::Gradient => (
            (1..=m_total)
                .map(|m| 6.0 * alpha_norm * m as f64 * mf / (PI * temperature * epsilon))
                .collect(),
            (9.0 * mf * mf * alpha_norm * alpha_norm / (epsilon * epsilon)).ceil(),
        ),
        EstimatorMode::Hessian => (
            (1..=m_total)
                .map(|m| 12.0 * alpha_norm * m as f64 * mf * mf / (PI * temperature * epsilon))
                .collect(),
            (9.0 * mf.powi(4) * alpha_norm * alpha_norm / (epsilon * epsilon)).ceil(),
        ),
    };
    if !(shots_f <= MAX_SHOTS_PER_TERM as f64) {
        return Err(Error::InvalidArgument(format!(
            "shot count {shots_f:e} per term exceeds cap {MAX_SHOTS_PER_TERM}"
        )));
    }
    let shots = vec![shots_f as u64; m_total];
    EstimatorBudget::custom(mode, t_max, shots, epsilon, alpha_norm)
}

/// How expectations are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Cauchy times, state indices and Bernoulli shots from the seed.
    Shots { seed: u64 },
    /// Exact truncated series: every expectation replaced by its value.
    Exact,
}

/// Sampled variables of one shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShotSample {
    Single { m: usize, t: f64, k: usize },
    Pair { m1: usize, m2: usize, s: f64, t1: f64, t2: f64, k: usize, l: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotOutcome {
    pub z: f64,
    pub sample: ShotSample,
    pub weight: f64,
}

impl ShotOutcome {
    pub fn value(&self) -> f64 {
        self.z * self.weight
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub shots: u64,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Variance of the mean.
    fn mean_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        var.max(0.0) / n
    }
}

fn combine(cells: &[Moments]) -> Estimate {
    Estimate {
        value: cells.iter().map(Moments::mean).sum(),
        stderr: cells.iter().map(Moments::mean_variance).sum::<f64>().sqrt(),
        shots: cells.iter().map(|c| c.n).sum(),
    }
}

fn check_model(model: &StateModel, k: &HermitianMatrix) -> Result<()> {
    check_dims(&model.terms()[0].state, k)
}

fn slack_spectrum(k: &HermitianMatrix) -> Result<EigenSystem> {
    let eig = eigendecompose(k)?;
    let lambda_min = eig.min();
    if !(lambda_min > 0.0) {
        return Err(Error::DualInfeasible { lambda_min });
    }
    Ok(eig)
}

fn check_mode(budget: &EstimatorBudget, mode: EstimatorMode) -> Result<()> {
    if budget.mode == mode {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("budget was planned for {:?} mode", budget.mode)))
    }
}

struct SingleContext<'a> {
    lambdas: &'a [f64],
    diags: Vec<Vec<f64>>,
    signs: Vec<f64>,
    picker: WeightedIndex<f64>,
    alpha: f64,
    temperature: f64,
}

impl SingleContext<'_> {
    fn draw<R: Rng + ?Sized>(&self, m: usize, t_max: f64, rng: &mut R) -> ShotOutcome {
        let t = sample_truncated_cauchy(m as f64 / self.temperature, t_max, rng);
        let k = self.picker.sample(rng);
        let z = bernoulli_shot(single_expectation(&self.diags[k], self.lambdas, t), rng);
        ShotOutcome {
            z,
            sample: ShotSample::Single { m, t, k },
            weight: self.alpha * self.signs[k],
        }
    }
}

fn picker(model: &StateModel) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(model.probabilities()).map_err(|e| Error::InvalidArgument(format!("state model weights: {e}")))
}

fn signs(model: &StateModel) -> Vec<f64> {
    model.terms().iter().map(|t| t.weight.signum()).collect()
}

/// Estimates `Tr[X_T Q]` for `Q` given as a state model.
pub fn estimate_thermal_trace(
    k: &HermitianMatrix,
    temperature: f64,
    model: &StateModel,
    budget: &EstimatorBudget,
    sampling: Sampling,
) -> Result<Estimate> {
    check_positive("temperature", temperature)?;
    check_model(model, k)?;
    check_mode(budget, EstimatorMode::Gradient)?;
    let eig = slack_spectrum(k)?;
    let lambdas = eig.eigenvalues();
    let seed = match sampling {
        Sampling::Exact => {
            let q = eig.diagonal_in_eigenbasis(&model.recombine());
            let value = q
                .iter()
                .zip(lambdas)
                .map(|(qj, &l)| qj * truncated_geometric(l / temperature, 1, budget.depth))
                .sum();
            return Ok(Estimate {
                value,
                stderr: 0.0,
                shots: 0,
            });
        }
        Sampling::Shots { seed } => seed,
    };
    let ctx = SingleContext {
        lambdas,
        diags: model.terms().iter().map(|t| eig.diagonal_in_eigenbasis(&t.state)).collect(),
        signs: signs(model),
        picker: picker(model)?,
        alpha: model.one_norm(),
        temperature,
    };
    let cells: Vec<Moments> = (1..=budget.depth)
        .into_par_iter()
        .map(|m| {
            let mut rng = stream(seed, &[m as u64]);
            let mut acc = Moments::default();
            for _ in 0..budget.shots[m - 1] {
                acc.push(ctx.draw(m, budget.t_max[m - 1], &mut rng).value());
            }
            acc
        })
        .collect();
    Ok(combine(&cells))
}

/// `Σ_{m=first}^{last} e^{−m r}` in closed form.
fn truncated_geometric(r: f64, first: usize, last: usize) -> f64 {
    if last < first {
        return 0.0;
    }
    let count = (last - first + 1) as f64;
    (-(first as f64) * r).exp() * (-count * r).exp_m1() / (-r).exp_m1()
}

struct PairContext<'a> {
    lambdas: &'a [f64],
    pairs: Vec<Vec<DMatrix<C64>>>,
    signs_i: Vec<f64>,
    signs_j: Vec<f64>,
    picker_i: WeightedIndex<f64>,
    picker_j: WeightedIndex<f64>,
    alpha: f64,
    temperature: f64,
}

impl PairContext<'_> {
    fn draw<R: Rng + ?Sized>(&self, m1: usize, m2: usize, t_max: f64, rng: &mut R) -> ShotOutcome {
        let s: f64 = rng.random();
        let tau1 = (m1 as f64 - s) / self.temperature;
        let tau2 = (m2 as f64 - 1.0 + s) / self.temperature;
        let t1 = truncated_or_zero(tau1, t_max, rng);
        let t2 = truncated_or_zero(tau2, t_max, rng);
        let k = self.picker_i.sample(rng);
        let l = self.picker_j.sample(rng);
        let z = bernoulli_shot(pair_expectation(&self.pairs[k][l], self.lambdas, t1, t2), rng);
        ShotOutcome {
            z,
            sample: ShotSample::Pair { m1, m2, s, t1, t2, k, l },
            weight: self.alpha * self.signs_i[k] * self.signs_j[l],
        }
    }
}

/// A zero scale is the point mass at `t = 0`.
fn truncated_or_zero<R: Rng + ?Sized>(tau: f64, t_max: f64, rng: &mut R) -> f64 {
    if tau > 0.0 {
        sample_truncated_cauchy(tau, t_max, rng)
    } else {
        0.0
    }
}

/// Estimates the Hessian entry `∂²f_T/∂μ_i∂μ_j` from state models of `Q_i`
/// and `Q_j`.
pub fn estimate_hessian_element(
    k: &HermitianMatrix,
    temperature: f64,
    model_i: &StateModel,
    model_j: &StateModel,
    budget: &EstimatorBudget,
    sampling: Sampling,
) -> Result<Estimate> {
    check_positive("temperature", temperature)?;
    check_model(model_i, k)?;
    check_model(model_j, k)?;
    check_mode(budget, EstimatorMode::Hessian)?;
    let eig = slack_spectrum(k)?;
    let lambdas = eig.eigenvalues();
    let seed = match sampling {
        Sampling::Exact => {
            let value = exact_double_series(&eig, temperature, model_i, model_j, budget.depth);
            return Ok(Estimate {
                value: -value / temperature,
                stderr: 0.0,
                shots: 0,
            });
        }
        Sampling::Shots { seed } => seed,
    };
    let pairs = model_i
        .terms()
        .iter()
        .map(|a| model_j.terms().iter().map(|b| pair_products(&eig, &a.state, &b.state)).collect())
        .collect();
    let ctx = PairContext {
        lambdas,
        pairs,
        signs_i: signs(model_i),
        signs_j: signs(model_j),
        picker_i: picker(model_i)?,
        picker_j: picker(model_j)?,
        alpha: model_i.one_norm() * model_j.one_norm(),
        temperature,
    };
    let depth = budget.depth;
    let cells: Vec<Moments> = (0..depth * depth)
        .into_par_iter()
        .map(|cell| {
            let (m1, m2) = (cell / depth + 1, cell % depth + 1);
            let idx = budget.cell_index(m1, m2);
            let mut rng = stream(seed, &[m1 as u64, m2 as u64]);
            let mut acc = Moments::default();
            for _ in 0..budget.shots[idx] {
                acc.push(ctx.draw(m1, m2, budget.t_max[idx], &mut rng).value());
            }
            acc
        })
        .collect();
    let raw = combine(&cells);
    Ok(Estimate {
        value: -raw.value / temperature,
        stderr: raw.stderr / temperature,
        shots: raw.shots,
    })
}

/// `Σ_{m₁,m₂ ≤ M} ∫₀¹ Tr[Q_i e^{−(m₁−s)K/T} Q_j e^{−(m₂−1+s)K/T}] ds`.
fn exact_double_series(
    eig: &EigenSystem,
    temperature: f64,
    model_i: &StateModel,
    model_j: &StateModel,
    depth: usize,
) -> f64 {
    let qi = eig.to_eigenbasis(&model_i.recombine());
    let qj = eig.to_eigenbasis(&model_j.recombine());
    let scaled: Vec<f64> = eig.eigenvalues().iter().map(|l| l / temperature).collect();
    let partial: Vec<f64> = scaled.iter().map(|&r| truncated_geometric(r, 0, depth - 1)).collect();
    let n = scaled.len();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            // ∫₀¹ e^{−(1−s)p_a − s p_b} ds as a divided difference of e^{−x}.
            let (p, q) = (scaled[a], scaled[b]);
            let gap = (p - q).abs();
            let integral = if gap < 1e-12 {
                (-p).exp()
            } else {
                (-p.min(q)).exp() * -(-gap).exp_m1() / gap
            };
            acc += (qi[(b, a)] * qj[(a, b)]).re * partial[a] * partial[b] * integral;
        }
    }
    acc
}

/// Inputs to the gate-count model.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RuntimeQuery {
    Gradient {
        lambda_min: f64,
        temperature: f64,
        epsilon: f64,
        alpha_norm: f64,
        h_norm: f64,
    },
    Hessian {
        lambda_min: f64,
        temperature: f64,
        epsilon: f64,
        alpha_i: f64,
        alpha_j: f64,
        h_norm: f64,
    },
    EndToEnd {
        constraints: usize,
        mu_norm: f64,
        alpha_norm: f64,
        h_norm: f64,
        temperature: f64,
        lambda_min: f64,
        smoothness: f64,
        delta: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuntimePrediction {
    /// Gate count of the planned budget; absent for the end-to-end model.
    pub concrete: Option<f64>,
    pub asymptotic: f64,
}

/// Predicted gate counts. The concrete count charges `⌈‖h‖₁ t_max⌉` gates
/// per evolution.
pub fn runtime_model(query: &RuntimeQuery) -> Result<RuntimePrediction> {
    match *query {
        RuntimeQuery::Gradient {
            lambda_min,
            temperature,
            epsilon,
            alpha_norm,
            h_norm,
        } => {
            check_positive("h norm", h_norm)?;
            let budget = plan_budget(lambda_min, temperature, epsilon, alpha_norm, EstimatorMode::Gradient)?;
            let concrete = budget
                .shots
                .iter()
                .zip(&budget.t_max)
                .map(|(&n, &t)| n as f64 * (h_norm * t).ceil())
                .sum();
            Ok(RuntimePrediction {
                concrete: Some(concrete),
                asymptotic: alpha_norm.powi(3) * h_norm * temperature.powi(4)
                    / (lambda_min.powi(5) * epsilon.powi(3)),
            })
        }
        RuntimeQuery::Hessian {
            lambda_min,
            temperature,
            epsilon,
            alpha_i,
            alpha_j,
            h_norm,
        } => {
            check_positive("h norm", h_norm)?;
            let alpha = alpha_i * alpha_j;
            let budget = plan_budget(lambda_min, temperature, epsilon, alpha, EstimatorMode::Hessian)?;
            let mut concrete = 0.0;
            for m1 in 1..=budget.depth {
                for m2 in 1..=budget.depth {
                    let idx = budget.cell_index(m1, m2);
                    concrete += budget.shots[idx] as f64 * 2.0 * (h_norm * budget.t_max[idx]).ceil();
                }
            }
            Ok(RuntimePrediction {
                concrete: Some(concrete),
                asymptotic: alpha.powi(3) * h_norm * temperature.powi(8) / (lambda_min.powi(9) * epsilon.powi(3)),
            })
        }
        RuntimeQuery::EndToEnd {
            constraints,
            mu_norm,
            alpha_norm,
            h_norm,
            temperature,
            lambda_min,
            smoothness,
            delta,
        } => {
            for (name, v) in [
                ("alpha norm", alpha_norm),
                ("h norm", h_norm),
                ("temperature", temperature),
                ("lambda_min", lambda_min),
                ("smoothness", smoothness),
                ("delta", delta),
            ] {
                check_positive(name, v)?;
            }
            if constraints == 0 || !(mu_norm >= 0.0) {
                return Err(Error::InvalidArgument("need c >= 1 and a non-negative dual norm".into()));
            }
            let c = constraints as f64;
            Ok(RuntimePrediction {
                concrete: None,
                asymptotic: c.powf(2.5) * mu_norm * mu_norm * alpha_norm.powi(3) * h_norm * temperature.powi(4)
                    / (lambda_min.powi(5) * smoothness.sqrt() * delta.powf(2.5)),
            })
        }
    }
}

/// Serializable summary of a budget and, optionally, an estimate.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub mode: EstimatorMode,
    #[serde(rename = "M")]
    pub depth: usize,
    pub t_max: Vec<f64>,
    #[serde(rename = "N")]
    pub shots: Vec<u64>,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub predicted_gates: Option<f64>,
}

impl EstimateReport {
    pub fn new(budget: &EstimatorBudget, estimate: Option<&Estimate>, predicted_gates: Option<f64>) -> Self {
        Self {
            mode: budget.mode,
            depth: budget.depth,
            t_max: budget.t_max.clone(),
            shots: budget.shots.clone(),
            estimate: estimate.map(|e| e.value),
            stderr: estimate.map(|e| e.stderr),
            predicted_gates,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
