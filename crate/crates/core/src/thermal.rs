//! Bose-Einstein thermal operators and the temperature-`T` dual objective.
//!
//! For a slack operator `K ≻ 0` with spectrum `λ_j` the thermal operator
//! has occupations `x_j = 1/(e^{λ_j/T} − 1)`. All quantities at a dual point
//! are computed from a single eigendecomposition held by [`ThermalPoint`].

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, CMatrix, EigenSystem, HermitianMatrix};
use crate::sdp::{dual_slack, DualPoint, SdpInstance, SpectralSummary};

/// Above this ratio `λ/T` the occupation underflows and is set to zero.
pub const OVERFLOW_RATIO: f64 = 700.0;

/// Relative eigenvalue separation below which the Hessian kernel switches
/// to its midpoint expansion.
pub const KERNEL_MERGE_REL: f64 = 1e-7;

/// Mean occupation `1/(e^{λ/T} − 1)` of a mode with energy `λ > 0`.
pub fn occupation(lambda: f64, temperature: f64) -> f64 {
    let r = lambda / temperature;
    if r > OVERFLOW_RATIO {
        0.0
    } else {
        1.0 / r.exp_m1()
    }
}

/// `ln(1 − e^{−λ/T})`.
pub fn log_vacancy(lambda: f64, temperature: f64) -> f64 {
    let r = lambda / temperature;
    if r > OVERFLOW_RATIO {
        0.0
    } else {
        (-(-r).exp_m1()).ln()
    }
}

/// `g(x) = (x+1) ln(x+1) − x ln x`, with `0 ln 0 = 0`.
pub fn scalar_entropy(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bosonic entropy needs a non-negative occupation, got {x}"
        )));
    }
    Ok(entropy_unchecked(x))
}

fn entropy_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x + 1.0) * x.ln_1p() - x * x.ln()
    }
}

/// `S_BE(X) = Σ_j g(x_j)` over the (clipped) spectrum of `X ⪰ 0`.
pub fn be_entropy(x: &HermitianMatrix) -> Result<f64> {
    let values = eigendecompose(x)?.psd_eigenvalues()?;
    Ok(values.into_iter().map(entropy_unchecked).sum())
}

/// Upper bound `d·g(N/d)` on the entropy of any `X ⪰ 0` with `Tr X = N`.
pub fn trace_fixed_entropy_cap(dim: usize, total: f64) -> Result<f64> {
    Ok(dim as f64 * scalar_entropy(total / dim as f64)?)
}

/// Thermal operator `X = (e^{K/T} − I)^{-1}` together with `X + I` and the
/// spectrum of `K` it was built from.
#[derive(Clone, Debug)]
pub struct ThermalOperator {
    x: HermitianMatrix,
    x_plus_i: HermitianMatrix,
    k_spectrum: EigenSystem,
    occupations: Vec<f64>,
    temperature: f64,
}

impl ThermalOperator {
    pub fn from_spectrum(k_spectrum: EigenSystem, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let lambda_min = k_spectrum.min();
        if !(lambda_min > 0.0) {
            return Err(Error::DualInfeasible { lambda_min });
        }
        let occupations: Vec<f64> = k_spectrum
            .eigenvalues()
            .iter()
            .map(|&l| occupation(l, temperature))
            .collect();
        // (I − e^{−K/T})^{-1} evaluated directly rather than as X + I.
        let upper: Vec<f64> = k_spectrum
            .eigenvalues()
            .iter()
            .map(|&l| {
                let r = l / temperature;
                if r > OVERFLOW_RATIO {
                    1.0
                } else {
                    -1.0 / (-r).exp_m1()
                }
            })
            .collect();
        Ok(Self {
            x: k_spectrum.reconstruct(&occupations),
            x_plus_i: k_spectrum.reconstruct(&upper),
            k_spectrum,
            occupations,
            temperature,
        })
    }

    pub fn x(&self) -> &HermitianMatrix {
        &self.x
    }

    pub fn x_plus_identity(&self) -> &HermitianMatrix {
        &self.x_plus_i
    }

    pub fn k_spectrum(&self) -> &EigenSystem {
        &self.k_spectrum
    }

    /// Occupations `x_j`, aligned with the ascending spectrum of `K`.
    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// `S_BE(X)` from the occupations.
    pub fn entropy(&self) -> f64 {
        self.occupations.iter().map(|&x| entropy_unchecked(x)).sum()
    }

    /// `Tr[A X]` evaluated in the eigenbasis of `K`.
    pub fn expectation(&self, a: &HermitianMatrix) -> f64 {
        self.k_spectrum
            .diagonal_in_eigenbasis(a)
            .iter()
            .zip(&self.occupations)
            .map(|(a, x)| a * x)
            .sum()
    }

    /// `Tr[K X] = Σ λ_j x_j`.
    pub fn slack_energy(&self) -> f64 {
        self.k_spectrum
            .eigenvalues()
            .iter()
            .zip(&self.occupations)
            .map(|(l, x)| l * x)
            .sum()
    }
}

/// Builds the thermal operator of `K ≻ 0` at temperature `T > 0`.
pub fn thermal_operator(k: &HermitianMatrix, temperature: f64) -> Result<ThermalOperator> {
    check_temperature(temperature)?;
    ThermalOperator::from_spectrum(eigendecompose(k)?, temperature)
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")))
    }
}

/// Everything the optimizers need at one `(μ, T)`: the slack operator, its
/// thermal operator, and the objective with its derivatives.
#[derive(Clone, Debug)]
pub struct ThermalPoint<'a> {
    inst: &'a SdpInstance,
    mu: DualPoint,
    slack: HermitianMatrix,
    op: ThermalOperator,
}

impl<'a> ThermalPoint<'a> {
    pub fn new(inst: &'a SdpInstance, mu: &DualPoint, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let slack = dual_slack(inst, mu)?;
        let op = ThermalOperator::from_spectrum(eigendecompose(&slack)?, temperature)?;
        Ok(Self {
            inst,
            mu: mu.clone(),
            slack,
            op,
        })
    }

    pub fn mu(&self) -> &DualPoint {
        &self.mu
    }

    pub fn slack(&self) -> &HermitianMatrix {
        &self.slack
    }

    pub fn operator(&self) -> &ThermalOperator {
        &self.op
    }

    pub fn temperature(&self) -> f64 {
        self.op.temperature
    }

    pub fn lambda_min(&self) -> f64 {
        self.op.k_spectrum.min()
    }

    /// `f_T(μ) = μ·q + T Σ ln(1 − e^{−λ_j/T})`.
    pub fn objective(&self) -> f64 {
        let t = self.temperature();
        let logs: f64 = self
            .op
            .k_spectrum
            .eigenvalues()
            .iter()
            .map(|&l| log_vacancy(l, t))
            .sum();
        self.mu.dot(self.inst.targets()) + t * logs
    }

    /// `f̃_T(μ) = μ·q + Tr[K_μ X_T(μ)]`.
    pub fn unregularized_energy(&self) -> f64 {
        self.mu.dot(self.inst.targets()) + self.op.slack_energy()
    }

    /// `Tr[X_T Q_i]` for every constraint.
    pub fn constraint_traces(&self) -> Vec<f64> {
        self.inst.constraints().iter().map(|q| self.op.expectation(q)).collect()
    }

    /// `∂f_T/∂μ_i = q_i − Tr[X_T Q_i]`.
    pub fn gradient(&self) -> Vec<f64> {
        self.constraint_traces()
            .iter()
            .zip(self.inst.targets())
            .map(|(tr, q)| q - tr)
            .collect()
    }

    /// `∂²f_T/∂μ_i∂μ_j = −(1/T) Σ_{a,b} Re(Q̃_i[a,b] Q̃_j[b,a]) w(λ_a, λ_b)`
    /// where `w` is the closed form of the `s`-integral over the thermal
    /// operators `X_T(μ, s)`.
    pub fn hessian(&self) -> DMatrix<f64> {
        let t = self.temperature();
        let lambdas = self.op.k_spectrum.eigenvalues();
        let x = &self.op.occupations;
        let n = lambdas.len();
        let kernel = DMatrix::from_fn(n, n, |a, b| hessian_kernel(lambdas[a], lambdas[b], x[a], x[b], t));
        let rotated: Vec<CMatrix> = self
            .inst
            .constraints()
            .iter()
            .map(|q| self.op.k_spectrum.to_eigenbasis(q))
            .collect();
        let c = rotated.len();
        let mut out = DMatrix::zeros(c, c);
        for i in 0..c {
            for j in i..c {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += (rotated[i][(a, b)] * rotated[j][(b, a)]).re * kernel[(a, b)];
                    }
                }
                out[(i, j)] = -acc / t;
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }
}

/// `∫₀¹ x_a(s) x_b(1−s) ds` with `x(s) = e^{sλ/T}/(e^{λ/T} − 1)`, written as
/// the divided difference `T (x_b − x_a)/(λ_a − λ_b)` of the occupation.
fn hessian_kernel(la: f64, lb: f64, xa: f64, xb: f64, t: f64) -> f64 {
    let h = la - lb;
    if h.abs() <= KERNEL_MERGE_REL * la.abs().max(lb.abs()) {
        // Midpoint derivative; the first-order term of the expansion vanishes.
        let xm = occupation(0.5 * (la + lb), t);
        xm * (xm + 1.0)
    } else {
        t * (xb - xa) / h
    }
}

pub fn dual_objective(inst: &SdpInstance, mu: &DualPoint, temperature: f64) -> Result<f64> {
    Ok(ThermalPoint::new(inst, mu, temperature)?.objective())
}

pub fn unregularized_energy(inst: &SdpInstance, mu: &DualPoint, temperature: f64) -> Result<f64> {
    Ok(ThermalPoint::new(inst, mu, temperature)?.unregularized_energy())
}

pub fn gradient(inst: &SdpInstance, mu: &DualPoint, temperature: f64) -> Result<Vec<f64>> {
    Ok(ThermalPoint::new(inst, mu, temperature)?.gradient())
}

pub fn hessian(inst: &SdpInstance, mu: &DualPoint, temperature: f64) -> Result<DMatrix<f64>> {
    Ok(ThermalPoint::new(inst, mu, temperature)?.hessian())
}

/// Uniform curvature bound over dual points with `λ_min(K_μ) ≥ floor`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessBound {
    pub lambda_min_floor: f64,
    pub occupation: f64,
    pub constant: f64,
}

/// `L_T = n̄(n̄+1)/T · Σ_i ‖Q_i‖₁ ‖Q_i‖` with `n̄ = 1/(e^{floor/T} − 1)`.
pub fn smoothness_bound(inst: &SdpInstance, lambda_min_floor: f64, temperature: f64) -> Result<SmoothnessBound> {
    if !(lambda_min_floor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda_min floor must be positive, got {lambda_min_floor}"
        )));
    }
    check_temperature(temperature)?;
    let mut norms = 0.0;
    for q in inst.constraints() {
        let e = eigendecompose(q)?;
        norms += e.trace_norm() * e.spectral_norm();
    }
    let n = occupation(lambda_min_floor, temperature);
    Ok(SmoothnessBound {
        lambda_min_floor,
        occupation: n,
        constant: n * (n + 1.0) / temperature * norms,
    })
}

/// Rule for choosing `T` from a target precision `ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TemperatureSchedule {
    /// `T = ε / S_max`.
    Entropy { epsilon: f64, s_max: f64 },
    /// `T = ε / d`.
    Dimension { epsilon: f64, dim: usize },
    /// Ground-space bound using the low spectrum of the optimal slack.
    Spectral {
        epsilon: f64,
        lambda_min: f64,
        gap: f64,
        degeneracy: usize,
        dim: usize,
    },
}

impl TemperatureSchedule {
    pub fn spectral(epsilon: f64, summary: &SpectralSummary, dim: usize) -> Self {
        Self::Spectral {
            epsilon,
            lambda_min: summary.lambda_min,
            gap: summary.gap,
            degeneracy: summary.degeneracy,
            dim,
        }
    }

    /// Entropy schedule for an instance whose constraints fix `Tr X = N`.
    pub fn trace_fixed(epsilon: f64, dim: usize, total: f64) -> Result<Self> {
        Ok(Self::Entropy {
            epsilon,
            s_max: trace_fixed_entropy_cap(dim, total)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        match *self {
            Self::Entropy { epsilon, .. } | Self::Dimension { epsilon, .. } | Self::Spectral { epsilon, .. } => {
                epsilon
            }
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Self::Entropy { .. } => "entropy",
            Self::Dimension { .. } => "dimension",
            Self::Spectral { .. } => "spectral",
        }
    }
}

/// Largest temperature that the chosen bound certifies for precision `ε`.
pub fn temperature_for_precision(schedule: &TemperatureSchedule) -> Result<f64> {
    let eps = schedule.epsilon();
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("precision must be positive, got {eps}")));
    }
    match *schedule {
        TemperatureSchedule::Entropy { s_max, .. } => {
            if s_max.is_infinite() {
                return Err(Error::InvalidArgument(
                    "S_max is infinite (non-compact feasible set); use the dimension schedule".into(),
                ));
            }
            if !(s_max > 0.0) {
                return Err(Error::InvalidArgument(format!("S_max must be positive, got {s_max}")));
            }
            Ok(eps / s_max)
        }
        TemperatureSchedule::Dimension { dim, .. } => {
            if dim == 0 {
                return Err(Error::InvalidArgument("dimension must be positive".into()));
            }
            Ok(eps / dim as f64)
        }
        TemperatureSchedule::Spectral {
            lambda_min,
            gap,
            degeneracy,
            dim,
            ..
        } => {
            if degeneracy == 0 || degeneracy > dim || !(lambda_min > 0.0) || gap < 0.0 {
                return Err(Error::InvalidArgument(
                    "spectral schedule needs lambda_min > 0, gap >= 0 and 1 <= d0 <= d".into(),
                ));
            }
            let ground = eps / (2.0 * degeneracy as f64);
            let excited = (dim - degeneracy) as f64;
            if excited == 0.0 {
                return Ok(ground);
            }
            let top = lambda_min + gap;
            Ok(ground.min(top / (2.0 * excited * top / eps).ln_1p()))
        }
    }
}

/// `T·d0 + (d − d0)(λ_min + Δ)/(e^{(λ_min+Δ)/T} − 1)`: the spectral-gap
/// bound on `f̃_T(μ_T*) − E`.
pub fn spectral_gap_excess(summary: &SpectralSummary, dim: usize, temperature: f64) -> f64 {
    let top = summary.lambda_min + summary.gap;
    let excited = (dim - summary.degeneracy) as f64;
    let tail = if excited == 0.0 {
        0.0
    } else {
        excited * top * occupation(top, temperature)
    };
    temperature * summary.degeneracy as f64 + tail
}

/// Per-mode check of the smoothed complementary slackness relation
/// `λ_j x_j = T x_j ln(1 + 1/x_j)`.
#[derive(Clone, Debug, Serialize)]
pub struct SlacknessReport {
    pub residuals: Vec<f64>,
    pub mode_energies: Vec<f64>,
    pub total: f64,
}

pub fn regularized_slackness(k: &HermitianMatrix, op: &ThermalOperator) -> Result<SlacknessReport> {
    let spectrum = eigendecompose(k)?;
    if spectrum.dim() != op.k_spectrum.dim() {
        return Err(Error::DimensionMismatch {
            context: "slack operator vs thermal operator",
            expected: op.k_spectrum.dim(),
            found: spectrum.dim(),
        });
    }
    let scale = spectrum.spectral_norm().max(1.0);
    for (a, b) in spectrum.eigenvalues().iter().zip(op.k_spectrum.eigenvalues()) {
        if (a - b).abs() > 1e-10 * scale {
            return Err(Error::InvalidArgument(
                "thermal operator was built from a different slack spectrum".into(),
            ));
        }
    }
    let t = op.temperature;
    let mut residuals = Vec::with_capacity(spectrum.dim());
    let mut mode_energies = Vec::with_capacity(spectrum.dim());
    for (&l, &x) in op.k_spectrum.eigenvalues().iter().zip(&op.occupations) {
        let energy = l * x;
        let smoothed = if x == 0.0 { 0.0 } else { t * x * (1.0 / x).ln_1p() };
        residuals.push(energy - smoothed);
        mode_energies.push(energy);
    }
    let total = mode_energies.iter().sum();
    Ok(SlacknessReport {
        residuals,
        mode_energies,
        total,
    })
}
