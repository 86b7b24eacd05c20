//! Seeded random matrix and instance generators used by tests, the CLI
//! generators, and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, HermitianMatrix, C64};
use crate::sdp::SdpInstance;

fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / 2f64.sqrt()
    })
}

/// Hermitian matrix with Gaussian entries of unit scale.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_trusted(ginibre(d, rng))
}

/// Real symmetric matrix with Gaussian entries.
pub fn real_symmetric<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), 0.0));
    HermitianMatrix::from_trusted(g)
}

/// Wishart-type PSD matrix `G G† / d` (full rank almost surely).
pub fn psd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, rng);
    HermitianMatrix::from_trusted(&g * g.adjoint() / C64::new(d as f64, 0.0))
}

/// PSD matrix of the given rank.
pub fn psd_with_rank<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(d, rng);
    let g = g.columns(0, rank.min(d)).into_owned();
    HermitianMatrix::from_trusted(&g * g.adjoint())
}

/// PSD matrix with every eigenvalue at least `floor`.
pub fn strictly_pd<R: Rng + ?Sized>(d: usize, floor: f64, rng: &mut R) -> HermitianMatrix {
    psd(d, rng).shift(floor)
}

/// Density matrix: PSD with unit trace.
pub fn density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let p = psd(d, rng);
    let t = p.trace();
    p.scale(1.0 / t)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let r_jj = r[(j, j)];
        let phase = if r_jj.norm() > 0.0 {
            r_jj / r_jj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random instance satisfying strict feasibility on both sides: the first
/// constraint is the identity (so the dual interior is non-empty and the
/// primal feasible set is compact) and `q` is generated from a strictly
/// positive definite primal point.
pub fn slater_instance<R: Rng + ?Sized>(d: usize, c: usize, rng: &mut R) -> SdpInstance {
    assert!(c >= 1);
    let h = hermitian(d, rng);
    let mut qs = vec![HermitianMatrix::identity(d)];
    for _ in 1..c {
        qs.push(hermitian(d, rng));
    }
    let x0 = strictly_pd(d, 0.05, rng);
    let x0 = x0.scale(1.0 / x0.trace());
    let q = qs
        .iter()
        .map(|qi| crate::linalg::trace_product(qi, &x0).expect("same dimension"))
        .collect();
    SdpInstance::new(h, qs, q).expect("generated instance is well formed")
}
