mod common;

use bosonic_sdp::divergence::{self, AffineChannelParams};
use bosonic_sdp::random;
use bosonic_sdp::HermitianMatrix;
use common::gauss_legendre;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bregman_integral(x: f64, y: f64) -> f64 {
    let integral: f64 = gauss_legendre(64)
        .into_iter()
        .map(|(t, w)| {
            let z = y + t * (x - y);
            w * (1.0 - t) / (z * (z + 1.0))
        })
        .sum();
    (x - y) * (x - y) * integral
}

fn midpoint(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    a.add(b).unwrap().scale(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scalar_matches_bregman_integral(x in 0.1f64..10.0, y in 0.1f64..10.0) {
        let direct = divergence::scalar_dbe(x, y).unwrap();
        prop_assert!((direct - bregman_integral(x, y)).abs() <= 1e-8 * (1.0 + direct));
    }

    #[test]
    fn non_negative_and_faithful(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::psd(d, &mut rng);
        let y = random::psd(d, &mut rng);
        prop_assert!(divergence::dbe(&x, &y).unwrap() >= -1e-10);
        prop_assert!(divergence::dbe(&x, &x).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn spectral_form_and_invariances(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::strictly_pd(d, 0.05, &mut rng);
        let y = random::strictly_pd(d, 0.05, &mut rng);
        let direct = divergence::dbe(&x, &y).unwrap();
        prop_assert!((direct - divergence::dbe_spectral(&x, &y).unwrap()).abs() <= 1e-9 * (1.0 + direct));
        let u = random::unitary(d, &mut rng);
        let rotated = divergence::dbe_spectral(&x.conjugate_by(&u).unwrap(), &y.conjugate_by(&u).unwrap()).unwrap();
        prop_assert!((rotated - direct).abs() <= 1e-9 * (1.0 + direct));
        let z = random::strictly_pd(2, 0.05, &mut rng);
        let w = random::strictly_pd(2, 0.05, &mut rng);
        let sum = divergence::dbe(&x.direct_sum(&z), &y.direct_sum(&w)).unwrap();
        let parts = direct + divergence::dbe(&z, &w).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-9 * (1.0 + parts));
        let umegaki = divergence::umegaki(&x, &y).unwrap()
            - divergence::umegaki(&x.shift(1.0), &y.shift(1.0)).unwrap();
        prop_assert!((umegaki - direct).abs() <= 1e-9 * (1.0 + direct));
        let bregman = divergence::bregman_form(&x, &y).unwrap();
        prop_assert!((bregman - direct).abs() <= 1e-9 * (1.0 + direct));
    }

    #[test]
    fn strictly_convex_in_first_argument(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1 = random::psd(d, &mut rng);
        let x2 = random::psd(d, &mut rng);
        let y = random::strictly_pd(d, 0.1, &mut rng);
        let mid = divergence::dbe(&midpoint(&x1, &x2), &y).unwrap();
        let mean = 0.5 * (divergence::dbe(&x1, &y).unwrap() + divergence::dbe(&x2, &y).unwrap());
        prop_assert!(mid <= mean - 1e-12);
        prop_assert!((divergence::dbe(&midpoint(&x1, &x1), &y).unwrap() - divergence::dbe(&x1, &y).unwrap()).abs() <= 1e-12 * (1.0 + mean));
    }

    #[test]
    fn small_perturbation_is_detected(seed in any::<u64>(), d in 1usize..6, delta in 1e-4f64..1e-2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random::strictly_pd(d, 0.5, &mut rng);
        let e = random::hermitian(d, &mut rng);
        let e = e.scale(1.0 / e.eigen().unwrap().spectral_norm());
        let y = x.add(&e.scale(delta)).unwrap();
        prop_assert!(divergence::dbe(&x, &y).unwrap() > 0.0);
    }
}

#[test]
fn named_channels_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let channels = [
        AffineChannelParams::attenuator(0.5, 0.0).unwrap(),
        AffineChannelParams::attenuator(0.3, 1.2).unwrap(),
        AffineChannelParams::amplifier(1.7, 0.4).unwrap(),
        AffineChannelParams::additive_noise(0.8).unwrap(),
    ];
    for ch in &channels {
        assert!(ch.is_monotone());
        for _ in 0..100 {
            let d = rng.random_range(1..=4);
            let x = random::psd(d, &mut rng);
            let y = random::strictly_pd(d, 0.01, &mut rng);
            let check = divergence::affine_monotonicity_check(&x, &y, ch).unwrap();
            assert!(check.holds, "{ch:?}: {} < {}", check.lhs, check.rhs);
        }
    }
}

#[test]
fn violating_parameters_fail_on_grid() {
    let ch = AffineChannelParams::raw(3.0, 0.0).unwrap();
    assert!(!ch.is_monotone());
    let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let violations = grid
        .iter()
        .flat_map(|&x| grid.iter().map(move |&y| (x, y)))
        .filter(|&(x, y)| !divergence::scalar_monotonicity_check(x, y, &ch).unwrap().holds)
        .count();
    assert!(violations > 0);
}

#[test]
fn determinant_matches_finite_differences() {
    let (x, y) = (0.7, 1.9);
    let h = 1e-4;
    let f = |a: f64, b: f64| divergence::scalar_dbe(a, b).unwrap();
    let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
    let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
    let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    let fd = fxx * fyy - fxy * fxy;
    let exact = divergence::joint_convexity_det(x, y).unwrap();
    assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{fd} vs {exact}");
}

#[test]
fn joint_convexity_fails_along_witness() {
    for (x, y) in [(1.0, 2.0), (0.3, 4.0), (5.0, 0.5)] {
        let w = divergence::joint_convexity_witness(x, y).unwrap().expect("indefinite hessian");
        let direct = divergence::scalar_dbe(0.5 * (w.first.0 + w.second.0), 0.5 * (w.first.1 + w.second.1)).unwrap();
        let mean = 0.5
            * (divergence::scalar_dbe(w.first.0, w.first.1).unwrap() + divergence::scalar_dbe(w.second.0, w.second.1).unwrap());
        assert!(direct > mean, "({x}, {y}): {direct} <= {mean}");
    }
    assert!(divergence::joint_convexity_witness(1.0, 1.0).unwrap().is_none());
}
