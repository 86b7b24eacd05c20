//! Bose-Einstein relative entropy
//! `D_BE(X‖Y) = −S_BE(X) + Tr[(X+I) ln(Y+I) − X ln Y]`
//! and the related scalar, spectral and channel tools.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, EigenSystem, HermitianMatrix};
use crate::sdp::{DualPoint, SdpInstance};
use crate::thermal;

/// Eigenvalues of `Y` at or below this fraction of `‖Y‖` count as zero when
/// checking support.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Weight of `X` on the kernel of `Y` above this fraction of `‖X‖` makes the
/// divergence infinite.
const KERNEL_WEIGHT_TOL: f64 = 1e-12;

/// Scalar divergence `x ln(x/y) + (x+1) ln((y+1)/(x+1))`.
///
/// `x = 0` gives `ln(y+1)`; `y = 0 < x` gives `+∞`.
pub fn scalar_dbe(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scalar divergence needs finite non-negative arguments, got ({x}, {y})"
        )));
    }
    Ok(scalar_unchecked(x, y))
}

fn scalar_unchecked(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        y.ln_1p()
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln() + (x + 1.0) * (y.ln_1p() - x.ln_1p())
    }
}

struct PsdSpectrum {
    eig: EigenSystem,
    values: Vec<f64>,
}

fn psd_spectrum(a: &HermitianMatrix) -> Result<PsdSpectrum> {
    let eig = eigendecompose(a)?;
    let values = eig.psd_eigenvalues()?;
    Ok(PsdSpectrum { eig, values })
}

fn check_dims(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<()> {
    if x.dim() == y.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: "divergence arguments",
            expected: x.dim(),
            found: y.dim(),
        })
    }
}

/// `D_BE(X‖Y)` for PSD `X`, `Y`. Returns `+∞` when `X` has weight outside
/// the support of `Y`.
pub fn dbe(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    check_dims(x, y)?;
    let xs = psd_spectrum(x)?;
    let ys = psd_spectrum(y)?;
    let entropy: f64 = xs.values.iter().map(|&v| thermal::scalar_entropy(v)).sum::<Result<f64>>()?;
    let weights = ys.eig.diagonal_in_eigenbasis(x);
    let y_floor = SUPPORT_TOL * ys.eig.spectral_norm();
    let w_floor = KERNEL_WEIGHT_TOL * xs.eig.spectral_norm();
    let mut cross = 0.0;
    for (&yj, &wj) in ys.values.iter().zip(&weights) {
        let wj = wj.max(0.0);
        cross += (wj + 1.0) * yj.ln_1p();
        if yj <= y_floor {
            if wj > w_floor {
                return Ok(f64::INFINITY);
            }
        } else {
            cross -= wj * yj.ln();
        }
    }
    Ok(cross - entropy)
}

/// `Σ_{i,j} d(x_i‖y_j) |⟨ψ_i|φ_j⟩|²` over the eigenpairs of `X` and `Y`.
/// `Y` must be strictly positive definite.
pub fn dbe_spectral(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    check_dims(x, y)?;
    let xs = psd_spectrum(x)?;
    let ys = psd_spectrum(y)?;
    let y_floor = SUPPORT_TOL * ys.eig.spectral_norm();
    if let Some(&bad) = ys.values.iter().find(|&&v| v <= y_floor) {
        return Err(Error::Domain { eigenvalue: bad });
    }
    let overlaps = xs.eig.eigenvectors().adjoint() * ys.eig.eigenvectors();
    let mut total = 0.0;
    for (i, &xi) in xs.values.iter().enumerate() {
        for (j, &yj) in ys.values.iter().enumerate() {
            total += scalar_unchecked(xi, yj) * overlaps[(i, j)].norm_sqr();
        }
    }
    Ok(total)
}

/// Unnormalized Umegaki relative entropy `Tr[A ln A − A ln B]` for PSD
/// operators, `+∞` on support violation.
pub fn umegaki(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let aspec = psd_spectrum(a)?;
    let bspec = psd_spectrum(b)?;
    let a_ln_a: f64 = aspec.values.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
    let weights = bspec.eig.diagonal_in_eigenbasis(a);
    let b_floor = SUPPORT_TOL * bspec.eig.spectral_norm();
    let w_floor = KERNEL_WEIGHT_TOL * aspec.eig.spectral_norm();
    let mut a_ln_b = 0.0;
    for (&bj, &wj) in bspec.values.iter().zip(&weights) {
        if bj <= b_floor {
            if wj > w_floor {
                return Ok(f64::INFINITY);
            }
        } else {
            a_ln_b += wj * bj.ln();
        }
    }
    Ok(a_ln_a - a_ln_b)
}

/// Generator `F = −S_BE` of the Bregman form.
pub fn bregman_generator(x: &HermitianMatrix) -> Result<f64> {
    Ok(-thermal::be_entropy(x)?)
}

/// `∇F(Y) = ln Y − ln(Y + I)` for `Y ≻ 0`.
pub fn bregman_gradient(y: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = eigendecompose(y)?;
    eig.apply(|v| if v > 0.0 { v.ln() - v.ln_1p() } else { f64::NAN })
}

/// `F(X) − F(Y) − Tr[∇F(Y)(X − Y)]` for PSD `X` and `Y ≻ 0`.
pub fn bregman_form(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    check_dims(x, y)?;
    let grad = bregman_gradient(y)?;
    let linear = crate::linalg::trace_product(&grad, &x.sub(y)?)?;
    Ok(bregman_generator(x)? - bregman_generator(y)? - linear)
}

/// Named Gaussian-channel families acting on occupations as `Z ↦ aZ + bI`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AffineChannel {
    Attenuator { eta: f64, noise: f64 },
    Amplifier { gain: f64, noise: f64 },
    AdditiveNoise { noise: f64 },
    Raw { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineChannelParams {
    pub a: f64,
    pub b: f64,
    pub label: AffineChannel,
}

impl AffineChannelParams {
    pub fn new(label: AffineChannel) -> Result<Self> {
        let (a, b) = match label {
            AffineChannel::Attenuator { eta, noise } => {
                if !(0.0..=1.0).contains(&eta) {
                    return Err(Error::InvalidArgument(format!("attenuator needs 0 <= eta <= 1, got {eta}")));
                }
                (eta, (1.0 - eta) * noise)
            }
            AffineChannel::Amplifier { gain, noise } => {
                if !(gain >= 1.0) {
                    return Err(Error::InvalidArgument(format!("amplifier needs gain >= 1, got {gain}")));
                }
                (gain, (gain - 1.0) * (noise + 1.0))
            }
            AffineChannel::AdditiveNoise { noise } => (1.0, noise),
            AffineChannel::Raw { a, b } => (a, b),
        };
        let noise_ok = match label {
            AffineChannel::Attenuator { noise, .. }
            | AffineChannel::Amplifier { noise, .. }
            | AffineChannel::AdditiveNoise { noise } => noise >= 0.0,
            AffineChannel::Raw { .. } => true,
        };
        if !noise_ok || !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "affine channel needs finite a, b >= 0 and noise >= 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b, label })
    }

    pub fn attenuator(eta: f64, noise: f64) -> Result<Self> {
        Self::new(AffineChannel::Attenuator { eta, noise })
    }

    pub fn amplifier(gain: f64, noise: f64) -> Result<Self> {
        Self::new(AffineChannel::Amplifier { gain, noise })
    }

    pub fn additive_noise(noise: f64) -> Result<Self> {
        Self::new(AffineChannel::AdditiveNoise { noise })
    }

    pub fn raw(a: f64, b: f64) -> Result<Self> {
        Self::new(AffineChannel::Raw { a, b })
    }

    /// `2b + 1 ≥ a`: the sufficient condition for monotonicity.
    pub fn is_monotone(&self) -> bool {
        2.0 * self.b + 1.0 >= self.a
    }

    pub fn apply(&self, z: &HermitianMatrix) -> HermitianMatrix {
        z.scale(self.a).shift(self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `D_BE(X‖Y)` with `D_BE(aX + bI ‖ aY + bI)`.
pub fn affine_monotonicity_check(
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    params: &AffineChannelParams,
) -> Result<MonotonicityCheck> {
    let lhs = dbe(x, y)?;
    let rhs = dbe(&params.apply(x), &params.apply(y))?;
    Ok(MonotonicityCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10 || lhs == f64::INFINITY,
    })
}

/// Scalar version of [`affine_monotonicity_check`].
pub fn scalar_monotonicity_check(x: f64, y: f64, params: &AffineChannelParams) -> Result<MonotonicityCheck> {
    let lhs = scalar_dbe(x, y)?;
    let rhs = scalar_dbe(params.a * x + params.b, params.a * y + params.b)?;
    Ok(MonotonicityCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10 || lhs == f64::INFINITY,
    })
}

/// Determinant `−(x−y)²/(x(x+1)y²(y+1)²)` of the Hessian of `d(x‖y)`.
pub fn joint_convexity_det(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidArgument(format!("need x, y > 0, got ({x}, {y})")));
    }
    let d = x - y;
    Ok(-d * d / (x * (x + 1.0) * y * y * (y + 1.0) * (y + 1.0)))
}

/// Hessian of `d(x‖y)` in `(x, y)`.
pub fn scalar_hessian(x: f64, y: f64) -> [[f64; 2]; 2] {
    let dxx = 1.0 / (x * (x + 1.0));
    let dxy = -1.0 / (y * (y + 1.0));
    let dyy = x / (y * y) - (x + 1.0) / ((y + 1.0) * (y + 1.0));
    [[dxx, dxy], [dxy, dyy]]
}

/// Two scalar pairs whose midpoint divergence exceeds the mean of their
/// divergences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityWitness {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub midpoint_value: f64,
    pub mean_value: f64,
}

/// Steps from `(x, y)` along the negative-curvature direction of the
/// scalar Hessian. `None` when the Hessian is not indefinite there.
pub fn joint_convexity_witness(x: f64, y: f64) -> Result<Option<ConvexityWitness>> {
    if joint_convexity_det(x, y)? >= 0.0 {
        return Ok(None);
    }
    let [[a, b], [_, c]] = scalar_hessian(x, y);
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let low = mean - radius;
    let (vx, vy) = if b.abs() > 0.0 { (b, low - a) } else if a < c { (1.0, 0.0) } else { (0.0, 1.0) };
    let n = (vx * vx + vy * vy).sqrt();
    let (vx, vy) = (vx / n, vy / n);
    let mut h = 0.5 * x.min(y);
    for _ in 0..60 {
        let first = (x + h * vx, y + h * vy);
        let second = (x - h * vx, y - h * vy);
        if first.0 > 0.0 && first.1 > 0.0 && second.0 > 0.0 && second.1 > 0.0 {
            let mid = scalar_unchecked(x, y);
            let avg = 0.5 * (scalar_unchecked(first.0, first.1) + scalar_unchecked(second.0, second.1));
            if mid > avg {
                return Ok(Some(ConvexityWitness {
                    first,
                    second,
                    midpoint_value: mid,
                    mean_value: avg,
                }));
            }
        }
        h *= 0.5;
    }
    Ok(None)
}

/// Fisher information of the thermal family, `I(μ) = −(1/T) ∇²f_T(μ)`.
pub fn fisher_information(inst: &SdpInstance, mu: &DualPoint, temperature: f64) -> Result<DMatrix<f64>> {
    let h = thermal::hessian(inst, mu, temperature)?;
    Ok(h * (-1.0 / temperature))
}
