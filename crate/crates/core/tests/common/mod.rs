//! Helpers shared by the integration tests: reference instances, random
//! dual points, finite differences, quadrature and a small circuit
//! simulator used as an independent oracle.

#![allow(dead_code)]

use bosonic_sdp::linalg::{CMatrix, C64};
use bosonic_sdp::random;
use bosonic_sdp::{DualPoint, HermitianMatrix, SdpInstance};
use rand::Rng;

pub fn diag(v: &[f64]) -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(v)
}

/// `H = diag(1, 2)`, `Q = I`, `q = 1`: optimum `E = 1` at `μ* = 1`.
pub fn inst_a() -> SdpInstance {
    SdpInstance::new(diag(&[1.0, 2.0]), vec![HermitianMatrix::identity(2)], vec![1.0]).unwrap()
}

/// `H = diag(1, 2)`, `Q = diag(1, 0)`, `q = 1`: optimum `E = 1`.
pub fn inst_b() -> SdpInstance {
    SdpInstance::new(diag(&[1.0, 2.0]), vec![diag(&[1.0, 0.0])], vec![1.0]).unwrap()
}

/// Random instance with `Q₁ = I` and a dual point whose slack has
/// `λ_min` equal to `gap`.
pub fn instance_with_point<R: Rng>(d: usize, c: usize, gap: f64, rng: &mut R) -> (SdpInstance, DualPoint) {
    let inst = random::slater_instance(d, c, rng);
    let mut mu: Vec<f64> = (0..c).map(|_| rng.random_range(-0.5..0.5)).collect();
    mu[0] = 0.0;
    let k = bosonic_sdp::sdp::dual_slack(&inst, &DualPoint::new(mu.clone()).unwrap()).unwrap();
    mu[0] = k.eigen().unwrap().min() - gap;
    (inst, DualPoint::new(mu).unwrap())
}

/// Five-point central difference of a scalar function of `μ`.
pub fn fd_gradient<F: Fn(&DualPoint) -> f64>(f: F, mu: &DualPoint, h: f64) -> Vec<f64> {
    (0..mu.len())
        .map(|i| {
            let mut e = vec![0.0; mu.len()];
            e[i] = 1.0;
            let at = |s: f64| f(&mu.step(&e, s));
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        })
        .collect()
}

/// Five-point central difference of a vector function; column `j` is the
/// derivative along `μ_j`.
pub fn fd_jacobian<F: Fn(&DualPoint) -> Vec<f64>>(f: F, mu: &DualPoint, h: f64) -> Vec<Vec<f64>> {
    (0..mu.len())
        .map(|j| {
            let mut e = vec![0.0; mu.len()];
            e[j] = 1.0;
            let at = |s: f64| f(&mu.step(&e, s));
            let (a, b, c, d) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            (0..a.len())
                .map(|i| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + d[i]) / (12.0 * h))
                .collect()
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_error(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(want).max(1e-300)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn evolution(k: &HermitianMatrix, t: f64) -> CMatrix {
    (k.entries() * C64::new(0.0, -t)).exp()
}

fn hadamard_gate() -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
}

/// Runs ancilla-controlled `w` on `|0⟩⟨0| ⊗ state` between two Hadamards
/// and returns `⟨Z⟩` of the ancilla.
fn controlled_test(state: &CMatrix, w: &CMatrix) -> f64 {
    let n = state.nrows();
    let id = CMatrix::identity(n, n);
    let p0 = CMatrix::from_row_slice(2, 2, &[one(), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let p1 = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), one()]);
    let h = kron(&hadamard_gate(), &id);
    let cw = kron(&p0, &id) + kron(&p1, w);
    let mut rho = kron(&p0, state);
    for gate in [&h, &cw, &h] {
        rho = gate * &rho * gate.adjoint();
    }
    let z = CMatrix::from_row_slice(2, 2, &[one(), C64::new(0.0, 0.0), C64::new(0.0, 0.0), -one()]);
    (kron(&z, &id) * rho).trace().re
}

/// Full simulation of the single-register Hadamard test.
pub fn simulate_hadamard(rho: &HermitianMatrix, k: &HermitianMatrix, t: f64) -> f64 {
    controlled_test(rho.entries(), &evolution(k, t))
}

/// Full simulation of the two-register test with controlled
/// `SWAP·(U₁ ⊗ U₂)`, acting on `2d²` dimensions.
pub fn simulate_swap_test(rho: &HermitianMatrix, sigma: &HermitianMatrix, k: &HermitianMatrix, t1: f64, t2: f64) -> f64 {
    let d = rho.dim();
    let mut swap = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            swap[(j * d + i, i * d + j)] = one();
        }
    }
    let w = swap * kron(&evolution(k, t1), &evolution(k, t2));
    controlled_test(&kron(rho.entries(), sigma.entries()), &w)
}
