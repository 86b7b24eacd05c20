//! Standard-form SDP instances, dual slack diagnostics, state-model
//! decompositions, and a log-det barrier reference solver.
//!
//! The primal problem is `min Tr[HX]` subject to `Tr[Q_i X] = q_i` and
//! `X ⪰ 0`; its dual maximizes `μ·q` subject to `K_μ = H − Σ μ_i Q_i ⪰ 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, CMatrix, EigenSystem, HermitianMatrix, C64, PSD_CLIP_TOL};

/// Problem data `(H, Q_1..Q_c, q)`.
#[derive(Clone, Debug)]
pub struct SdpInstance {
    h: HermitianMatrix,
    constraints: Vec<HermitianMatrix>,
    targets: Vec<f64>,
}

impl SdpInstance {
    pub fn new(h: HermitianMatrix, constraints: Vec<HermitianMatrix>, targets: Vec<f64>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::Instance("at least one constraint is required".into()));
        }
        if constraints.len() != targets.len() {
            return Err(Error::Instance(format!(
                "q has length {} but there are {} constraint matrices",
                targets.len(),
                constraints.len()
            )));
        }
        let d = h.dim();
        for (i, qi) in constraints.iter().enumerate() {
            if qi.dim() != d {
                return Err(Error::Instance(format!(
                    "Q[{i}] has dimension {} but H has dimension {d}",
                    qi.dim()
                )));
            }
        }
        if let Some(i) = targets.iter().position(|x| !x.is_finite()) {
            return Err(Error::Instance(format!("q[{i}] is not finite")));
        }
        Ok(Self {
            h,
            constraints,
            targets,
        })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn h(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn constraints(&self) -> &[HermitianMatrix] {
        &self.constraints
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Parses the JSON instance schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Instance(format!("malformed JSON: {e}")))?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("instance serializes")
    }
}

/// On-disk form: complex entries as `[re, im]` pairs, row-major.
#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct InstanceFile {
    pub d: usize,
    pub c: usize,
    pub H: Vec<Vec<[f64; 2]>>,
    pub Q: Vec<Vec<Vec<[f64; 2]>>>,
    pub q: Vec<f64>,
}

impl InstanceFile {
    fn into_instance(self) -> Result<SdpInstance> {
        if self.d == 0 {
            return Err(Error::Instance("field d: dimension must be positive".into()));
        }
        if self.Q.len() != self.c {
            return Err(Error::Instance(format!(
                "field Q: expected c = {} matrices, found {}",
                self.c,
                self.Q.len()
            )));
        }
        if self.q.len() != self.c {
            return Err(Error::Instance(format!(
                "field q: expected c = {} entries, found {}",
                self.c,
                self.q.len()
            )));
        }
        let h = parse_matrix(&self.H, self.d, "H")?;
        let constraints = self
            .Q
            .iter()
            .enumerate()
            .map(|(i, m)| parse_matrix(m, self.d, &format!("Q[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        SdpInstance::new(h, constraints, self.q)
    }

    fn from_instance(inst: &SdpInstance) -> Self {
        Self {
            d: inst.dim(),
            c: inst.num_constraints(),
            H: dump_matrix(inst.h()),
            Q: inst.constraints().iter().map(dump_matrix).collect(),
            q: inst.targets().to_vec(),
        }
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], d: usize, field: &str) -> Result<HermitianMatrix> {
    if rows.len() != d {
        return Err(Error::Instance(format!(
            "field {field}: expected {d} rows, found {}",
            rows.len()
        )));
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Instance(format!(
                "field {field}: row {i} has {} entries, expected {d}",
                row.len()
            )));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            m[(i, j)] = C64::new(*re, *im);
        }
    }
    HermitianMatrix::new(m).map_err(|e| Error::Instance(format!("field {field}: {e}")))
}

fn dump_matrix(m: &HermitianMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

/// Dual variable `μ ∈ R^c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualPoint(Vec<f64>);

impl DualPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu[{i}] is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(c: usize) -> Self {
        Self(vec![0.0; c])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `self + step * direction`.
    pub fn step(&self, direction: &[f64], step: f64) -> Self {
        Self(self.0.iter().zip(direction).map(|(m, g)| m + step * g).collect())
    }
}

impl From<DualPoint> for Vec<f64> {
    fn from(p: DualPoint) -> Self {
        p.0
    }
}

/// `K_μ = H − Σ μ_i Q_i`.
pub fn dual_slack(inst: &SdpInstance, mu: &DualPoint) -> Result<HermitianMatrix> {
    if mu.len() != inst.num_constraints() {
        return Err(Error::DimensionMismatch {
            context: "mu length vs number of constraints",
            expected: inst.num_constraints(),
            found: mu.len(),
        });
    }
    let mut k = inst.h().entries().clone();
    for (qi, &m) in inst.constraints().iter().zip(mu.as_slice()) {
        k -= qi.entries() * C64::new(m, 0.0);
    }
    Ok(HermitianMatrix::from_trusted(k))
}

/// Complementary-slackness diagnostics `(Tr[KX], ‖KX‖_F)`.
pub fn slackness_residuals(k: &HermitianMatrix, x: &HermitianMatrix) -> Result<(f64, f64)> {
    let tr = crate::linalg::trace_product(k, x)?;
    Ok((tr, (k.entries() * x.entries()).norm()))
}

/// One signed term `α_k ρ_k` of a state model.
#[derive(Clone, Debug)]
pub struct StateTerm {
    pub weight: f64,
    pub state: HermitianMatrix,
}

/// Signed combination of density matrices reproducing a Hermitian operator.
#[derive(Clone, Debug)]
pub struct StateModel {
    terms: Vec<StateTerm>,
    one_norm: f64,
}

impl StateModel {
    pub fn terms(&self) -> &[StateTerm] {
        &self.terms
    }

    /// `Σ |α_k|`.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    pub fn dim(&self) -> usize {
        self.terms[0].state.dim()
    }

    /// `Σ α_k ρ_k`.
    pub fn recombine(&self) -> HermitianMatrix {
        let d = self.dim();
        let mut acc = CMatrix::zeros(d, d);
        for t in &self.terms {
            acc += t.state.entries() * C64::new(t.weight, 0.0);
        }
        HermitianMatrix::from_trusted(acc)
    }

    /// Sampling probabilities `|α_k| / ‖α‖₁`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight.abs() / self.one_norm).collect()
    }
}

/// Jordan decomposition `A = A₊ − A₋` emitted as at most two normalized terms.
pub fn decompose_state_model(a: &HermitianMatrix) -> Result<StateModel> {
    let eig = eigendecompose(a)?;
    let tol = PSD_CLIP_TOL * eig.spectral_norm();
    if eig.spectral_norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "zero operator has no state-model decomposition".into(),
        ));
    }
    let pos: Vec<f64> = eig.eigenvalues().iter().map(|&x| if x > tol { x } else { 0.0 }).collect();
    let neg: Vec<f64> = eig.eigenvalues().iter().map(|&x| if x < -tol { -x } else { 0.0 }).collect();
    let mut terms = Vec::with_capacity(2);
    for (part, sign) in [(pos, 1.0), (neg, -1.0)] {
        let tr: f64 = part.iter().sum();
        if tr > 0.0 {
            let normalized: Vec<f64> = part.iter().map(|x| x / tr).collect();
            terms.push(StateTerm {
                weight: sign * tr,
                state: eig.reconstruct(&normalized),
            });
        }
    }
    let one_norm = terms.iter().map(|t| t.weight.abs()).sum();
    Ok(StateModel { terms, one_norm })
}

/// Low-spectrum structure of a positive definite slack operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub lambda_min: f64,
    pub degeneracy: usize,
    /// Distance from the ground group to the next distinct eigenvalue; zero
    /// when there is no excited spectrum.
    pub gap: f64,
    pub grouping_tol: f64,
}

impl SpectralSummary {
    pub fn has_excited_spectrum(&self) -> bool {
        self.gap > 0.0
    }
}

/// Default eigenvalue grouping tolerance relative to `λ_min`.
pub const DEFAULT_GROUPING_REL: f64 = 1e-8;

/// Ground-space summary of `K`. `grouping_tol = None` uses `1e-8·λ_min`.
pub fn spectral_summary(k: &HermitianMatrix, grouping_tol: Option<f64>) -> Result<SpectralSummary> {
    summarize_spectrum(&eigendecompose(k)?, grouping_tol)
}

pub fn summarize_spectrum(eig: &EigenSystem, grouping_tol: Option<f64>) -> Result<SpectralSummary> {
    let values = eig.eigenvalues();
    let lambda_min = values[0];
    if lambda_min <= PSD_CLIP_TOL * eig.spectral_norm() {
        return Err(Error::DualInfeasible { lambda_min });
    }
    let tol = grouping_tol.unwrap_or(DEFAULT_GROUPING_REL * lambda_min);
    let degeneracy = values.iter().take_while(|&&x| x - lambda_min <= tol).count();
    let gap = values.get(degeneracy).map_or(0.0, |&x| x - lambda_min);
    Ok(SpectralSummary {
        lambda_min,
        degeneracy,
        gap,
        grouping_tol: tol,
    })
}

fn lambda_min(inst: &SdpInstance, mu: &DualPoint) -> Result<(f64, EigenSystem)> {
    let eig = eigendecompose(&dual_slack(inst, mu)?)?;
    Ok((eig.min(), eig))
}

/// Iteration cap for the phase-1 search.
pub const PHASE1_MAX_ITERS: usize = 5000;

/// A dual point with `λ_min(K_μ) > 0`.
pub fn find_strictly_feasible(inst: &SdpInstance) -> Result<DualPoint> {
    find_feasible_with_margin(inst, 0.0)
}

/// A dual point with `λ_min(K_μ) > margin`, by supergradient ascent on the
/// concave map `μ ↦ λ_min(K_μ)` starting from zero.
pub fn find_feasible_with_margin(inst: &SdpInstance, margin: f64) -> Result<DualPoint> {
    let c = inst.num_constraints();
    let mut mu = DualPoint::zeros(c);
    let (mut lam, mut eig) = lambda_min(inst, &mu)?;
    if lam > margin {
        return Ok(mu);
    }
    let q_scale = inst
        .constraints()
        .iter()
        .map(|q| q.max_norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let step0 = (lam.abs() + margin + 1.0) / q_scale;
    let mut best = lam;
    for k in 0..PHASE1_MAX_ITERS {
        let v = eig.eigenvectors().column(0);
        let grad: Vec<f64> = inst
            .constraints()
            .iter()
            .map(|q| -(v.adjoint() * q.entries() * v)[(0, 0)].re)
            .collect();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = step0 / ((k + 1) as f64).sqrt() / norm;
        mu = mu.step(&grad, step);
        (lam, eig) = lambda_min(inst, &mu)?;
        best = best.max(lam);
        if lam > margin {
            return Ok(mu);
        }
    }
    Err(Error::EmptyInterior {
        best_lambda_min: best,
        iterations: PHASE1_MAX_ITERS,
    })
}

/// Reference optimum of the unregularized dual.
#[derive(Clone, Debug, Serialize)]
pub struct OracleSolution {
    pub value: f64,
    pub mu: DualPoint,
}

/// Solves the unregularized dual to within `tol` without any of the
/// Bose-Einstein machinery: bisection on the feasibility boundary for a
/// single constraint, a log-det barrier path otherwise.
pub fn oracle_solve(inst: &SdpInstance, tol: f64) -> Result<OracleSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("oracle tolerance must be positive".into()));
    }
    if inst.num_constraints() == 1 {
        bisection_oracle(inst, tol)
    } else {
        barrier_oracle(inst, tol)
    }
}

const UNBOUNDED_RADIUS: f64 = 1e12;

fn bisection_oracle(inst: &SdpInstance, tol: f64) -> Result<OracleSolution> {
    let q = inst.targets()[0];
    let start = find_strictly_feasible(inst)?;
    let mu0 = start.as_slice()[0];
    if q == 0.0 {
        return Ok(OracleSolution { value: 0.0, mu: start });
    }
    let dir = q.signum();
    let feasible = |m: f64| -> Result<bool> {
        Ok(lambda_min(inst, &DualPoint(vec![m]))?.0 >= 0.0)
    };
    let mut step = 1.0;
    while feasible(mu0 + dir * step)? {
        step *= 2.0;
        if step > UNBOUNDED_RADIUS {
            return Err(Error::DualUnbounded);
        }
    }
    let (mut lo, mut hi) = (mu0, mu0 + dir * step);
    while (hi - lo).abs() * q.abs() > 0.5 * tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OracleSolution {
        value: q * lo,
        mu: DualPoint(vec![lo]),
    })
}

/// Barrier objective `μ·q + t Σ ln λ_j(K_μ)`; `None` outside the interior.
fn barrier_value(inst: &SdpInstance, mu: &DualPoint, t: f64) -> Result<Option<(f64, EigenSystem)>> {
    let (lam, eig) = lambda_min(inst, mu)?;
    if lam <= 0.0 {
        return Ok(None);
    }
    let logdet: f64 = eig.eigenvalues().iter().map(|x| x.ln()).sum();
    Ok(Some((mu.dot(inst.targets()) + t * logdet, eig)))
}

fn barrier_oracle(inst: &SdpInstance, tol: f64) -> Result<OracleSolution> {
    let c = inst.num_constraints();
    let d = inst.dim() as f64;
    let mut mu = find_strictly_feasible(inst)?;
    let mut t = 1.0_f64;
    let t_final = tol / d;
    let (mut value, mut eig) = barrier_value(inst, &mu, t)?.ok_or(Error::DualInfeasible {
        lambda_min: 0.0,
    })?;
    loop {
        // Damped Newton centering at fixed t.
        for _ in 0..200 {
            let inv: Vec<f64> = eig.eigenvalues().iter().map(|x| 1.0 / x).collect();
            let rotated: Vec<CMatrix> = inst.constraints().iter().map(|q| eig.to_eigenbasis(q)).collect();
            let grad = DVector::from_fn(c, |i, _| {
                let tr: f64 = (0..inv.len()).map(|a| rotated[i][(a, a)].re * inv[a]).sum();
                inst.targets()[i] - t * tr
            });
            let neg_hess = DMatrix::from_fn(c, c, |i, j| {
                let mut acc = 0.0;
                for a in 0..inv.len() {
                    for b in 0..inv.len() {
                        acc += (rotated[i][(a, b)] * rotated[j][(b, a)]).re * inv[a] * inv[b];
                    }
                }
                t * acc
            });
            let dir = solve_spd(&neg_hess, &grad)?;
            let decrement = grad.dot(&dir);
            if decrement <= 1e-12 * t.max(1e-300) || decrement <= 1e-24 {
                break;
            }
            let dir_vec: Vec<f64> = dir.iter().copied().collect();
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial = mu.step(&dir_vec, step);
                if let Some((v, e)) = barrier_value(inst, &trial, t)? {
                    if v >= value + 0.25 * step * decrement {
                        mu = trial;
                        value = v;
                        eig = e;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if mu.norm() > UNBOUNDED_RADIUS {
                return Err(Error::DualUnbounded);
            }
            if !accepted {
                break;
            }
        }
        if t <= t_final {
            break;
        }
        t = (t * 0.2).max(t_final);
        value = barrier_value(inst, &mu, t)?.expect("interior point").0;
    }
    Ok(OracleSolution {
        value: mu.dot(inst.targets()),
        mu,
    })
}

/// Solves `A x = b` for symmetric positive definite `A`, with a Tikhonov
/// shift when the Cholesky factorization fails.
pub(crate) fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut shift = 1e-12 * scale;
    for _ in 0..8 {
        let shifted = a + DMatrix::identity(a.nrows(), a.ncols()) * shift;
        if let Some(ch) = shifted.cholesky() {
            return Ok(ch.solve(b));
        }
        shift *= 100.0;
    }
    Err(Error::SingularHessian)
}
