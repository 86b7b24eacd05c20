//! One function per subcommand. Each validates its inputs, computes, and
//! only then writes artifacts.

use std::fs;
use std::path::Path;

use bosonic_sdp::divergence::{self, AffineChannelParams};
use bosonic_sdp::linalg::{CMatrix, C64};
use bosonic_sdp::optimize::{
    self, EstimatorKind, EstimatorPrecision, Method, OptimizerConfig, RunTrace, StepSize, StopReason, TemperatureSpec,
};
use bosonic_sdp::qsim::{self, EstimateReport, EstimatorMode, RuntimeQuery, Sampling};
use bosonic_sdp::sdp::{decompose_state_model, dual_slack, oracle_solve, summarize_spectrum, SpectralSummary};
use bosonic_sdp::thermal::{self, TemperatureSchedule, ThermalPoint};
use bosonic_sdp::{random, DualPoint, HermitianMatrix, SdpInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{
    BudgetArgs, ChannelArg, Command, DivergenceArgs, EstimateArgs, EstimatorArg, GeneratorArg, MethodArg, ModeArg,
    OracleArgs, SamplingArg, ScheduleArg, SolveArgs,
};
use crate::output::{emit, envelope, number_or_inf, write_atomic, Exit, Failure, Outcome};

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Solve(a) => solve(command, a),
        Command::Oracle(a) => oracle(command, a),
        Command::Bounds(a) => bounds(command, a),
        Command::Estimate(a) => estimate(command, a),
        Command::Divergence(a) => divergence_cmd(command, a),
        Command::Budget(a) => budget(command, a),
    }
}

fn load_instance(path: &Path) -> Result<SdpInstance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
    SdpInstance::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Temperature rule plus, for the spectral schedule, the low spectrum of
/// the preliminary solve that fixed it.
struct ResolvedTemperature {
    spec: TemperatureSpec,
    preliminary: Option<SpectralSummary>,
}

fn check_epsilon(args: &SolveArgs) -> Result<(), Failure> {
    match (args.temperature.schedule, args.epsilon) {
        (Some(_), None) => Err(Failure::usage("--schedule needs --epsilon")),
        (None, Some(_)) => Err(Failure::usage("--epsilon only applies with --schedule")),
        _ => Ok(()),
    }
}

fn resolve_temperature(inst: &SdpInstance, args: &SolveArgs) -> Result<ResolvedTemperature, Failure> {
    let d = inst.dim();
    let schedule = match (args.temperature.temperature, args.temperature.schedule, args.epsilon) {
        (Some(t), _, _) => {
            return Ok(ResolvedTemperature {
                spec: TemperatureSpec::Fixed(t),
                preliminary: None,
            })
        }
        (None, Some(ScheduleArg::Entropy { s_max }), Some(epsilon)) => TemperatureSchedule::Entropy { epsilon, s_max },
        (None, Some(ScheduleArg::Dimension), Some(epsilon)) => TemperatureSchedule::Dimension { epsilon, dim: d },
        (None, Some(ScheduleArg::Spectral), Some(epsilon)) => {
            // The spectral rule needs the optimal slack spectrum, so a
            // preliminary Newton solve at the dimension temperature supplies it.
            let mut pre = OptimizerConfig::new(
                Method::Newton,
                TemperatureSpec::Schedule(TemperatureSchedule::Dimension { epsilon, dim: d }),
            );
            pre.lambda_floor = args.lambda_floor;
            let trace = optimize::run(inst, &pre)?;
            let mu = DualPoint::new(trace.report.mu_final)?;
            let point = ThermalPoint::new(inst, &mu, trace.report.temperature)?;
            let summary = summarize_spectrum(point.operator().k_spectrum(), None)?;
            let schedule = TemperatureSchedule::spectral(epsilon, &summary, d);
            return Ok(ResolvedTemperature {
                spec: TemperatureSpec::Schedule(schedule),
                preliminary: Some(summary),
            });
        }
        _ => return Err(Failure::usage("give --temperature or --schedule with --epsilon")),
    };
    Ok(ResolvedTemperature {
        spec: TemperatureSpec::Schedule(schedule),
        preliminary: None,
    })
}

fn optimizer_config(args: &SolveArgs, temperature: TemperatureSpec) -> Result<OptimizerConfig, Failure> {
    let method = match args.method {
        MethodArg::Ga => Method::Ga,
        MethodArg::Newton => Method::Newton,
        MethodArg::Sga => Method::Sga,
        MethodArg::Snewton => Method::Snewton,
    };
    let mut c = OptimizerConfig::new(method, temperature);
    c.max_iters = args.max_iters;
    c.grad_tol = args.grad_tol;
    c.lambda_floor = args.lambda_floor;
    c.step = args.step.map_or(StepSize::Auto, StepSize::Fixed);
    c.precision = EstimatorPrecision::Fixed(args.precision);
    c.estimator = match args.estimator {
        EstimatorArg::Sampled => EstimatorKind::Sampled,
        EstimatorArg::Exact => EstimatorKind::ExactExpectation,
        EstimatorArg::Series => EstimatorKind::TruncatedSeries,
    };
    c.seed = args.seed;
    c.validate()?;
    Ok(c)
}

struct Solved {
    trace: RunTrace,
    preliminary: Option<SpectralSummary>,
}

fn run_solver(inst: &SdpInstance, args: &SolveArgs) -> Result<Solved, Failure> {
    check_epsilon(args)?;
    // Validate every optimizer field before the spectral schedule's
    // preliminary solve.
    optimizer_config(args, TemperatureSpec::Fixed(1.0))?;
    let resolved = resolve_temperature(inst, args)?;
    let config = optimizer_config(args, resolved.spec)?;
    let trace = optimize::run(inst, &config)?;
    Ok(Solved {
        trace,
        preliminary: resolved.preliminary,
    })
}

fn stop_exit(stop: StopReason) -> Exit {
    match stop {
        StopReason::Converged | StopReason::Completed => Exit::Ok,
        StopReason::IterationCap => Exit::IterationCap,
    }
}

fn solve(command: &Command, args: &SolveArgs) -> Outcome {
    let inst = load_instance(&args.instance.instance)?;
    let Solved { mut trace, preliminary } = run_solver(&inst, args)?;
    if args.oracle {
        let sol = oracle_solve(&inst, 1e-10)?;
        trace.attach_oracle(sol.value);
    }
    let result = json!({
        "report": trace.report,
        "preliminary_spectrum": preliminary,
    });
    if let Some(p) = &args.trace {
        write_atomic(p, &trace.to_csv(args.wall_time))?;
    }
    emit(&envelope(command, &result), args.report.as_deref())?;
    Ok(stop_exit(trace.report.stop))
}

fn oracle(command: &Command, args: &OracleArgs) -> Outcome {
    let inst = load_instance(&args.instance.instance)?;
    let sol = oracle_solve(&inst, args.tol)?;
    emit(&envelope(command, &sol), args.report.as_deref())?;
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct BoundCheck {
    name: &'static str,
    /// Certified width of the window above the oracle value.
    bound: f64,
    /// Slack of the lower inequality (`E ≥ F_T` for the entropy bound,
    /// `f̃_T ≥ E` otherwise).
    e_side_slack: f64,
    /// Slack of the upper inequality `f̃_T − E ≤ bound`.
    f_side_slack: f64,
    holds: bool,
}

fn bounds(command: &Command, args: &SolveArgs) -> Outcome {
    let inst = load_instance(&args.instance.instance)?;
    let Solved { trace, preliminary } = run_solver(&inst, args)?;
    let oracle_tol = 1e-10;
    let sol = oracle_solve(&inst, oracle_tol)?;
    let r = &trace.report;
    let (t, d, e) = (r.temperature, inst.dim(), sol.value);
    let tol = 10.0 * args.grad_tol + oracle_tol;
    let gap = r.f_tilde - e;
    let entropy_width = r.bound_decomposition.entropy_correction;
    let mu = DualPoint::new(r.mu_final.clone())?;
    let point = ThermalPoint::new(&inst, &mu, t)?;
    let summary = summarize_spectrum(point.operator().k_spectrum(), None)?;
    let spectral_width = thermal::spectral_gap_excess(&summary, d, t);
    let check = |name, bound: f64, e_side_slack: f64| BoundCheck {
        name,
        bound,
        e_side_slack,
        f_side_slack: bound - gap,
        holds: e_side_slack >= -tol && bound - gap >= -tol,
    };
    let checks = vec![
        check("entropy", entropy_width, e - r.f_t),
        check("dimension", t * d as f64, gap),
        check("spectral", spectral_width, gap),
    ];
    let tightest = checks
        .iter()
        .min_by(|a, b| a.bound.total_cmp(&b.bound))
        .map(|c| c.name)
        .expect("three bounds");
    let violated: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.name).collect();
    let result = json!({
        "oracle_value": e,
        "oracle_mu": sol.mu,
        "f_tilde": r.f_tilde,
        "f_t": r.f_t,
        "temperature": t,
        "iterations": r.iterations,
        "stop": r.stop,
        "tolerance": tol,
        "spectrum": summary,
        "preliminary_spectrum": preliminary,
        "bounds": checks,
        "tightest": tightest,
        "violated": violated,
    });
    emit(&envelope(command, &result), args.report.as_deref())?;
    if r.stop == StopReason::IterationCap {
        return Ok(Exit::IterationCap);
    }
    if violated.is_empty() {
        Ok(Exit::Ok)
    } else {
        Err(Failure::acceptance(format!("violated bounds: {}", violated.join(", "))))
    }
}

fn estimate(command: &Command, args: &EstimateArgs) -> Outcome {
    let inst = load_instance(&args.instance.instance)?;
    let c = inst.num_constraints();
    let mu = match &args.mu {
        Some(v) if v.0.len() != c => {
            return Err(Failure::usage(format!("--mu has {} entries, instance has c = {c}", v.0.len())))
        }
        Some(v) => DualPoint::new(v.0.clone())?,
        None => DualPoint::zeros(c),
    };
    let (i, j) = match (args.mode, args.index.0.as_slice()) {
        (ModeArg::Gradient, &[i]) => (i, i),
        (ModeArg::Hessian, &[i]) => (i, i),
        (ModeArg::Hessian, &[i, j]) => (i, j),
        _ => return Err(Failure::usage("--index takes i (gradient) or i,j (hessian)")),
    };
    if i >= c || j >= c {
        return Err(Failure::usage(format!("--index out of range for c = {c}")));
    }
    let t = args.temperature;
    let point = ThermalPoint::new(&inst, &mu, t)?;
    let k = dual_slack(&inst, &mu)?;
    let h_norm = decompose_state_model(&k)?.one_norm();
    let model_i = decompose_state_model(&inst.constraints()[i])?;
    let sampling = match args.sampling {
        SamplingArg::Shots => Sampling::Shots { seed: args.seed },
        SamplingArg::Exact => Sampling::Exact,
    };
    let lambda_min = point.lambda_min();
    let (budget, est, exact, scale, gates) = match args.mode {
        ModeArg::Gradient => {
            let budget = qsim::plan_budget(lambda_min, t, args.epsilon, model_i.one_norm(), EstimatorMode::Gradient)?;
            let est = qsim::estimate_thermal_trace(&k, t, &model_i, &budget, sampling)?;
            let gates = qsim::runtime_model(&RuntimeQuery::Gradient {
                lambda_min,
                temperature: t,
                epsilon: args.epsilon,
                alpha_norm: model_i.one_norm(),
                h_norm,
            })?;
            (budget, est, point.constraint_traces()[i], 1.0, gates)
        }
        ModeArg::Hessian => {
            let model_j = decompose_state_model(&inst.constraints()[j])?;
            let alpha = model_i.one_norm() * model_j.one_norm();
            let budget = qsim::plan_budget(lambda_min, t, args.epsilon, alpha, EstimatorMode::Hessian)?;
            let est = qsim::estimate_hessian_element(&k, t, &model_i, &model_j, &budget, sampling)?;
            let gates = qsim::runtime_model(&RuntimeQuery::Hessian {
                lambda_min,
                temperature: t,
                epsilon: args.epsilon,
                alpha_i: model_i.one_norm(),
                alpha_j: model_j.one_norm(),
                h_norm,
            })?;
            // The Hessian budget covers the double sum before the −1/T factor.
            (budget, est, point.hessian()[(i, j)], 1.0 / t, gates)
        }
    };
    let error = (est.value - exact).abs();
    let tolerance = args.epsilon * scale + 3.0 * est.stderr;
    let passed = error <= tolerance;
    let result = json!({
        "budget": EstimateReport::new(&budget, Some(&est), gates.concrete),
        "asymptotic_gates": gates.asymptotic,
        "estimate": est.value,
        "stderr": est.stderr,
        "shots": est.shots,
        "exact": exact,
        "abs_error": error,
        "series_budget": args.epsilon * scale / 3.0,
        "tolerance": tolerance,
        "passed": passed,
    });
    emit(&envelope(command, &result), args.report.as_deref())?;
    if passed {
        Ok(Exit::Ok)
    } else {
        Err(Failure::acceptance(format!("|error| {error:e} exceeds {tolerance:e}")))
    }
}

#[derive(Deserialize)]
#[allow(non_snake_case)]
struct PairFile {
    X: Vec<Vec<[f64; 2]>>,
    Y: Vec<Vec<[f64; 2]>>,
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], field: &str) -> Result<HermitianMatrix, Failure> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Failure::usage(format!("field {field}: expected a non-empty square matrix")));
    }
    let m = CMatrix::from_fn(d, d, |r, c| C64::new(rows[r][c][0], rows[r][c][1]));
    HermitianMatrix::new(m).map_err(|e| Failure::usage(format!("field {field}: {e}")))
}

fn divergence_inputs(args: &DivergenceArgs) -> Result<(HermitianMatrix, HermitianMatrix), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (x, y) = match (&args.input, args.generator) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
            let pair: PairFile =
                serde_json::from_str(&text).map_err(|e| Failure::usage(format!("malformed JSON: {e}")))?;
            (matrix_from_rows(&pair.X, "X")?, matrix_from_rows(&pair.Y, "Y")?)
        }
        (None, Some(GeneratorArg::RandomPsd)) => (random::psd(args.dim, &mut rng), random::psd(args.dim, &mut rng)),
        (None, Some(GeneratorArg::Equal)) => {
            let x = random::psd(args.dim, &mut rng);
            (x.clone(), x)
        }
        (None, Some(GeneratorArg::Diagonal)) => match (&args.x_diag, &args.y_diag) {
            (Some(xd), Some(yd)) if xd.0.len() == yd.0.len() => (
                HermitianMatrix::from_real_diagonal(&xd.0),
                HermitianMatrix::from_real_diagonal(&yd.0),
            ),
            (Some(_), Some(_)) => return Err(Failure::usage("--x-diag and --y-diag lengths differ")),
            _ => return Err(Failure::usage("--generator diagonal needs --x-diag and --y-diag")),
        },
        (None, None) => return Err(Failure::usage("give --input or --generator")),
    };
    if x.dim() != y.dim() {
        return Err(Failure::usage(format!("X is {0}x{0} but Y is {1}x{1}", x.dim(), y.dim())));
    }
    for (name, m) in [("X", &x), ("Y", &y)] {
        m.eigen()?
            .psd_eigenvalues()
            .map_err(|e| Failure::usage(format!("{name}: {e}")))?;
    }
    Ok((x, y))
}

fn channel_params(arg: ChannelArg) -> Result<AffineChannelParams, Failure> {
    Ok(match arg {
        ChannelArg::Attenuator { eta, noise } => AffineChannelParams::attenuator(eta, noise)?,
        ChannelArg::Amplifier { gain, noise } => AffineChannelParams::amplifier(gain, noise)?,
        ChannelArg::Additive { noise } => AffineChannelParams::additive_noise(noise)?,
        ChannelArg::Raw { a, b } => AffineChannelParams::raw(a, b)?,
    })
}

fn divergence_cmd(command: &Command, args: &DivergenceArgs) -> Outcome {
    let (x, y) = divergence_inputs(args)?;
    let channel = args.channel.map(channel_params).transpose()?;
    let value = divergence::dbe(&x, &y)?;
    let strictly_pd = x.eigen()?.min() > 0.0 && y.eigen()?.min() > 0.0;
    let (spectral, umegaki_residual) = if strictly_pd && value.is_finite() {
        let spectral = divergence::dbe_spectral(&x, &y)?;
        let umegaki = divergence::umegaki(&x, &y)? - divergence::umegaki(&x.shift(1.0), &y.shift(1.0))?;
        (Some(spectral), Some((umegaki - value).abs()))
    } else {
        (None, None)
    };
    let spectral_residual = spectral.map(|s| (s - value).abs());
    let channel_report = match &channel {
        Some(p) => {
            let check = divergence::affine_monotonicity_check(&x, &y, p)?;
            Some(json!({
                "params": p,
                "guaranteed": p.is_monotone(),
                "lhs": number_or_inf(check.lhs),
                "rhs": number_or_inf(check.rhs),
                "holds": check.holds,
            }))
        }
        None => None,
    };
    let result = json!({
        "dim": x.dim(),
        "value": number_or_inf(value),
        "support_violation": value.is_infinite(),
        "spectral_value": spectral,
        "spectral_residual": spectral_residual,
        "umegaki_residual": umegaki_residual,
        "channel": channel_report,
    });
    emit(&envelope(command, &result), args.report.as_deref())?;
    let scale = 1.0 + value.abs();
    let residual_ok = [spectral_residual, umegaki_residual]
        .iter()
        .flatten()
        .all(|&r| r <= 1e-9 * scale);
    let channel_ok = channel
        .as_ref()
        .is_none_or(|p| !p.is_monotone() || divergence::affine_monotonicity_check(&x, &y, p).is_ok_and(|c| c.holds));
    if residual_ok && channel_ok {
        Ok(Exit::Ok)
    } else {
        Err(Failure::acceptance("divergence cross-check failed"))
    }
}

fn budget(command: &Command, args: &BudgetArgs) -> Outcome {
    let mode = match args.mode {
        ModeArg::Gradient => EstimatorMode::Gradient,
        ModeArg::Hessian => EstimatorMode::Hessian,
    };
    let plan = qsim::plan_budget(args.lambda_min, args.temperature, args.epsilon, args.alpha_norm, mode)?;
    let query = match mode {
        EstimatorMode::Gradient => RuntimeQuery::Gradient {
            lambda_min: args.lambda_min,
            temperature: args.temperature,
            epsilon: args.epsilon,
            alpha_norm: args.alpha_norm,
            h_norm: args.h_norm,
        },
        EstimatorMode::Hessian => RuntimeQuery::Hessian {
            lambda_min: args.lambda_min,
            temperature: args.temperature,
            epsilon: args.epsilon,
            alpha_i: args.alpha_norm,
            alpha_j: 1.0,
            h_norm: args.h_norm,
        },
    };
    let gates = qsim::runtime_model(&query)?;
    let result = json!({
        "budget": EstimateReport::new(&plan, None, gates.concrete),
        "asymptotic_gates": gates.asymptotic,
        "total_shots": plan.total_shots(),
        "error_split": plan.error_split,
    });
    if let Some(path) = &args.emit_density {
        let tau = args.tau.unwrap_or(1.0 / args.temperature);
        let range = plan.t_max[0];
        let n = args.points.max(2);
        let mut csv = String::from("t,p\n");
        for k in 0..n {
            let t = -range + 2.0 * range * k as f64 / (n - 1) as f64;
            csv.push_str(&format!("{t},{}\n", qsim::cauchy_density(t, tau)));
        }
        write_atomic(path, &csv)?;
    }
    emit(&envelope(command, &result), args.report.as_deref())?;
    Ok(Exit::Ok)
}
