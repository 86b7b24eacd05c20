mod common;

use bosonic_sdp::optimize::{self, EstimatorKind, Method, OptimizerConfig, StopReason, TemperatureSpec};
use bosonic_sdp::sdp::oracle_solve;
use bosonic_sdp::thermal::{self, TemperatureSchedule, ThermalPoint};
use bosonic_sdp::{random, DualPoint, HermitianMatrix, SdpInstance};
use common::inst_a;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(method: Method, t: f64) -> OptimizerConfig {
    let mut c = OptimizerConfig::new(method, TemperatureSpec::Fixed(t));
    c.lambda_floor = Some(0.5 * t);
    c
}

#[test]
fn ga_respects_floor_and_is_monotone() {
    let t = 0.05;
    let c = config(Method::Ga, t);
    let trace = optimize::run(&inst_a(), &c).unwrap();
    assert_eq!(trace.report.stop, StopReason::Converged);
    assert!(trace.report.grad_norm_final <= 1e-8);
    assert!((trace.report.f_tilde - 1.0).abs() <= 0.1);
    for w in trace.records.windows(2) {
        assert!(w[1].f_t >= w[0].f_t - 1e-12);
    }
    assert!(trace.records.iter().all(|r| r.lambda_min >= 0.5 * t));
    let l = trace.report.smoothness;
    let mu_star = trace.report.mu_final[0].abs();
    assert!((trace.report.iterations as f64) <= 10.0 * l * mu_star * mu_star / 1e-8);
}

#[test]
fn symmetric_instance_has_closed_form_dual() {
    let inst = SdpInstance::new(HermitianMatrix::identity(2), vec![HermitianMatrix::identity(2)], vec![1.0]).unwrap();
    for t in [0.05, 0.1, 0.3] {
        for method in [Method::Ga, Method::Newton] {
            let trace = optimize::run(&inst, &config(method, t)).unwrap();
            let mu = trace.report.mu_final[0];
            assert!((mu - (1.0 - t * 3f64.ln())).abs() < 1e-7, "{method:?} T={t}: {mu}");
        }
    }
}

#[test]
fn newton_step_solves_the_linear_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let d = rng.random_range(2..=6);
        let c = rng.random_range(1..=4);
        let (inst, mu) = common::instance_with_point(d, c, 0.3, &mut rng);
        let p = ThermalPoint::new(&inst, &mu, 0.4).unwrap();
        let h = p.hessian();
        let g = DVector::from_vec(p.gradient());
        let step = (-&h).cholesky().unwrap().solve(&g);
        let residual = (&h * -&step - &g).norm();
        assert!(residual <= 1e-10 * g.norm().max(1e-300));
    }
}

#[test]
fn newton_converges_quadratically() {
    let c = config(Method::Newton, 0.05);
    let ga = optimize::run(&inst_a(), &config(Method::Ga, 0.05)).unwrap();
    let trace = optimize::run(&inst_a(), &c).unwrap();
    assert!(trace.report.iterations <= ga.report.iterations);
    let norms: Vec<f64> = trace.records.iter().map(|r| r.grad_norm).filter(|&g| g > 1e-14).collect();
    assert!(norms.len() >= 4);
    for w in norms[norms.len() - 4..].windows(2) {
        assert!(w[1] / (w[0] * w[0]) <= 100.0, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn error_decomposition_dominates_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..8 {
        let d = rng.random_range(2..=4);
        let inst = random::slater_instance(d, rng.random_range(1..=3), &mut rng);
        let oracle = oracle_solve(&inst, 1e-10).unwrap();
        let schedule = TemperatureSchedule::Dimension { epsilon: 0.3, dim: d };
        let mut c = OptimizerConfig::new(Method::Newton, TemperatureSpec::Schedule(schedule));
        c.lambda_floor = Some(0.5 * thermal::temperature_for_precision(&TemperatureSchedule::Dimension { epsilon: 0.3, dim: d }).unwrap());
        let mut trace = optimize::run(&inst, &c).unwrap();
        trace.attach_oracle(oracle.value);
        let b = &trace.report.bound_decomposition;
        assert_eq!(b.dominated, Some(true), "{b:?}");
    }
}

#[test]
fn stochastic_newton_short_run() {
    let mut hits = 0;
    for seed in 0..10 {
        let mut c = config(Method::Snewton, 0.05);
        c.max_iters = 10;
        c.seed = seed;
        let trace = optimize::run(&inst_a(), &c).unwrap();
        assert_eq!(trace.report.stop, StopReason::Completed);
        assert_eq!(trace.records.len(), 11);
        if (trace.report.e_estimate - 1.0).abs() <= 0.2 {
            hits += 1;
        }
    }
    assert!(hits >= 8, "{hits}/10");
}

#[test]
fn estimator_call_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inst = random::slater_instance(2, 2, &mut rng);
    let j = 3;
    for kind in [EstimatorKind::Sampled, EstimatorKind::ExactExpectation] {
        let mut c = config(Method::Snewton, 0.5);
        c.max_iters = j;
        c.precision = optimize::EstimatorPrecision::Fixed(0.5);
        c.hessian_precision = 20.0;
        c.estimator = kind;
        let trace = optimize::run(&inst, &c).unwrap();
        let calls = trace.report.estimator_calls;
        let final_calls = if kind == EstimatorKind::Sampled { 3 } else { 0 };
        assert_eq!(calls.gradient, 2 * (j as u64 + 1) + final_calls, "{kind:?}");
        assert_eq!(calls.hessian, 4 * j as u64, "{kind:?}");
    }
}

#[test]
fn same_seed_same_trace() {
    let mut c = config(Method::Sga, 0.1);
    c.max_iters = 20;
    c.seed = 17;
    let a = optimize::run(&inst_a(), &c).unwrap();
    let b = optimize::run(&inst_a(), &c).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.to_csv(false), b.to_csv(false));
    let mus = |t: &optimize::RunTrace| t.records.iter().map(|r| r.mu.clone()).collect::<Vec<_>>();
    assert_eq!(mus(&a), mus(&b));
    c.seed = 18;
    let other = optimize::run(&inst_a(), &c).unwrap();
    assert_ne!(mus(&a), mus(&other));
}

#[test]
fn explicit_start_is_validated() {
    let mut c = config(Method::Ga, 0.1);
    c.start = Some(DualPoint::new(vec![5.0]).unwrap());
    assert!(optimize::run(&inst_a(), &c).is_err());
    c.start = Some(DualPoint::new(vec![0.0, 0.0]).unwrap());
    assert!(optimize::run(&inst_a(), &c).is_err());
}
