//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::cell::RefCell;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use tsplit::diagnostics::snr_db;
use tsplit::image::GrayImage;
use tsplit::linalg::Vector;
use tsplit::problems::{gen_deblur, gen_lasso, gen_scad, AlgorithmOverrides, Operator, ProblemInstance};
use tsplit::prox::{prox_l1, prox_scad_composite, ScadParams, ZeroResolvent};
use tsplit::rng::SeededRng;
use tsplit::splitting::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn lasso_50x200(seed: u64) -> ProblemInstance {
    gen_lasso(50, 200, seed, 0.05, 0.1).unwrap()
}

fn c1_identities() -> Outcome {
    let mut rng = SeededRng::new(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 1 + rng.index(20);
        let (u, v, w) = (random_vector(&mut rng, n), random_vector(&mut rng, n), random_vector(&mut rng, n));
        let (a, b) = (rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0));

        // ||v + w||^2 = ||v||^2 + 2<v, w> + ||w||^2
        let lhs = (&v + &w).norm_sq();
        let terms = [v.norm_sq(), 2.0 * v.inner(&w), w.norm_sq()];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        worst = worst.max(rel_err_scaled(lhs, terms.iter().sum(), scale));

        // 2<v - w, v - u> = ||v - w||^2 + ||v - u||^2 - ||u - w||^2
        let lhs = 2.0 * (&v - &w).inner(&(&v - &u));
        let terms = [(&v - &w).norm_sq(), (&v - &u).norm_sq(), -(&u - &w).norm_sq()];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        worst = worst.max(rel_err_scaled(lhs, terms.iter().sum(), scale));

        // ||(1+a)x - (a-b)y - bz||^2 expanded into six terms
        let (x, y, z) = (&u, &v, &w);
        let combo = Vector::from_fn(n, |i| (1.0 + a) * x[i] - (a - b) * y[i] - b * z[i]);
        let lhs = combo.norm_sq();
        let terms = [
            (1.0 + a) * x.norm_sq(),
            -(a - b) * y.norm_sq(),
            -b * z.norm_sq(),
            (1.0 + a) * (a - b) * (x - y).norm_sq(),
            b * (1.0 + a) * (x - z).norm_sq(),
            -b * (a - b) * (y - z).norm_sq(),
        ];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        worst = worst.max(rel_err_scaled(lhs, terms.iter().sum(), scale));
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} over 3000 identities (tol 1e-10)"))
}

fn c2_averagedness() -> Outcome {
    let inst = lasso_50x200(7);
    let built = inst.build().unwrap();
    let c = built.problem.c.clone().unwrap();
    let eta = c.eta();
    let eps = 0.9;
    let gamma = 1.8 * eta * eps;
    let op = built.problem.davis_yin(gamma).unwrap();
    let beta = averaging_constant(gamma, eta);
    let jb = op.resolvent_b().clone();
    let mut rng = SeededRng::new(202);
    let mut min_slack = f64::INFINITY;
    for _ in 0..100 {
        let z = random_vector(&mut rng, 200);
        let w = random_vector(&mut rng, 200);
        let tz = op.eval(&z).unwrap().tz;
        let tw = op.eval(&w).unwrap().tz;
        let res = Vector::from_fn(200, |i| (z[i] - tz[i]) - (w[i] - tw[i]));
        let cz = c.grad(&jb.resolve(&z, gamma).unwrap());
        let cw = c.grad(&jb.resolve(&w, gamma).unwrap());
        let rhs = z.dist(&w).powi(2)
            - (1.0 - beta) / beta * res.norm_sq()
            - gamma * (2.0 * eta - gamma / eps) * cz.dist(&cw).powi(2);
        min_slack = min_slack.min(rhs - tz.dist(&tw).powi(2));
    }
    outcome(min_slack >= -1e-9, format!("min slack {min_slack:.3e} over 100 pairs (tol -1e-9)"))
}

fn c3_reductions() -> Outcome {
    let inst = lasso_50x200(11);
    let built = inst.build().unwrap();
    let eta = built.step_eta;
    let mut rng = SeededRng::new(303);
    let init = EngineState::new(
        random_vector(&mut rng, 200),
        random_vector(&mut rng, 200),
        random_vector(&mut rng, 200),
    )
    .unwrap();

    let plain = InertialParams::with_beta_rho(0.0, 0.0, 0.7, eta, eta);
    let op = built.problem.davis_yin(eta).unwrap();
    let (mut s1, mut s2) = (init.clone(), init.clone());
    let mut gap_dy: f64 = 0.0;
    for _ in 0..100 {
        s1 = step_two_step_dy(s1, &op, &plain).unwrap().0;
        s2 = step_davis_yin(s2, &op, plain.rho).unwrap().0;
        gap_dy = gap_dy.max((&s1.x_cur - &s2.x_cur).max_abs());
    }

    let params = InertialParams::with_beta_rho(0.49, -0.01, 0.7, eta, eta);
    let with_zero_b = built.problem.clone().with_b(Arc::new(ZeroResolvent));
    let op = with_zero_b.davis_yin(eta).unwrap();
    let a = built.problem.a.clone();
    let c = built.problem.c.clone().unwrap();
    let (mut s1, mut s2) = (init.clone(), init);
    let mut gap_fb: f64 = 0.0;
    for _ in 0..100 {
        s1 = step_two_step_dy(s1, &op, &params).unwrap().0;
        s2 = step_fb_two_step(s2, a.as_ref(), c.as_ref(), &params).unwrap().0;
        gap_fb = gap_fb.max((&s1.x_cur - &s2.x_cur).max_abs());
    }
    outcome(
        gap_dy <= 1e-12 && gap_fb <= 1e-12,
        format!("max iterate gap: no inertia vs Davis-Yin {gap_dy:.2e}, B = 0 vs forward-backward form {gap_fb:.2e} (tol 1e-12)"),
    )
}

fn c4_prox_oracles() -> Outcome {
    let grid = 1e-4;
    let tol = 2.0 * grid;
    let mut rng = SeededRng::new(404);
    let (mut worst_l1, mut worst_scad): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let v = rng.uniform_in(-3.0, 3.0);
        let tau = rng.uniform_in(0.0, 2.0);
        let got = prox_l1(&Vector::new(vec![v]).unwrap(), tau).unwrap()[0];
        worst_l1 = worst_l1.max((got - l1_prox_oracle(v, tau, grid)).abs());

        let xi = rng.uniform_in(0.01, 1.0);
        let c = rng.uniform_in(2.1, 5.0);
        let gamma = rng.uniform_in(0.01, 2.0);
        let v = rng.uniform_in(-3.0, 3.0) * c * xi;
        let p = ScadParams::new(xi, c).unwrap();
        let got = prox_scad_composite(&Vector::new(vec![v]).unwrap(), gamma, p).unwrap()[0];
        worst_scad = worst_scad.max((got - scad_prox_oracle(v, gamma, xi, c, grid)).abs());
    }
    outcome(
        worst_l1 <= tol && worst_scad <= tol,
        format!("max deviation from grid oracle: l1 {worst_l1:.2e}, scad {worst_scad:.2e} (tol {tol:.0e})"),
    )
}

fn c5_lyapunov() -> Outcome {
    let inst = lasso_50x200(5);
    let built = inst.build().unwrap();
    let eta = built.step_eta;
    let params = InertialParams::with_beta_rho(0.1, -0.005, 0.24, eta, eta);
    let report = validate(&params).unwrap();
    if !report.overall {
        return outcome(false, format!("parameters rejected by validator:\n{report}"));
    }
    let alg = Algorithm::TwoStep(params);
    let reference = run(
        &alg,
        &built.problem,
        inst.initial_state(),
        StopRule { eps: 1e-13, max_iters: 1_000_000 },
        RunOptions::default(),
    )
    .unwrap();
    let x_star = reference.final_point().clone();
    let setup = LedgerSetup::new(&built.problem, x_star, params).unwrap();

    let c = built.problem.c.clone().unwrap();
    let c_star = setup.c_star.clone();
    let gaps = RefCell::new(Vec::new());
    let observer = |_: &EngineState, info: &StepInfo| {
        let w = info.w.as_ref().unwrap();
        gaps.borrow_mut().push(c.grad(w).dist(&c_star).powi(2));
    };
    let rec = run(
        &alg,
        &built.problem,
        inst.initial_state(),
        StopRule { eps: 1e-11, max_iters: 1_000_000 },
        RunOptions {
            ledger: Some(setup),
            observer: Some(Box::new(observer)),
            ..Default::default()
        },
    )
    .unwrap();

    let gamma: Vec<f64> = rec.records.iter().map(|r| r.gamma_n.unwrap()).collect();
    let gamma_bar: Vec<f64> = rec.records.iter().map(|r| r.gamma_bar_n.unwrap()).collect();
    let min_gamma = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    let max_rise = gamma_bar.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let final_step = rec.last_record().unwrap().step_diff;
    let gaps = gaps.into_inner();
    let tail_start = gaps.len() - gaps.len() / 10;
    let tail_sum: f64 = gaps[tail_start..].iter().sum();
    let pass = rec.termination == Termination::Tolerance
        && min_gamma >= -1e-9
        && max_rise <= 1e-9
        && final_step < 1e-6
        && tail_sum < 1e-10;
    outcome(
        pass,
        format!(
            "{} iterations: min Gamma {min_gamma:.3e}, max Gamma-bar rise {max_rise:.3e}, final step {final_step:.2e}, tail sum {tail_sum:.2e}",
            rec.iterations
        ),
    )
}

fn c6_solution_quality() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 1..=10 {
        let inst = lasso_50x200(seed);
        let built = inst.build().unwrap();
        let alg = inst.algorithm(&built, AlgorithmKind::TwoStep, AlgorithmOverrides::default());
        let rec = run(
            &alg,
            &built.problem,
            inst.initial_state(),
            StopRule { eps: 1e-10, max_iters: 100_000 },
            RunOptions::default(),
        )
        .unwrap();
        let Operator::Dense(d) = &inst.operator else { unreachable!() };
        let reg = inst.reg.unwrap();
        let u_ref = fb_lasso_oracle(d, inst.b.as_slice(), reg, 100_000);
        let f_ref = lasso_objective_oracle(d, inst.b.as_slice(), reg, &u_ref);
        let f = lasso_objective_oracle(d, inst.b.as_slice(), reg, rec.final_point().as_slice());
        worst = worst.max(rel_err(f, f_ref));
    }
    outcome(worst <= 1e-6, format!("max relative objective gap {worst:.2e} over 10 seeds (tol 1e-6)"))
}

fn c7_scad() -> Outcome {
    let mut wins = 0;
    let mut counts = Vec::new();
    for seed in 1..=10 {
        let inst = gen_scad(200, 1000, seed).unwrap();
        let built = inst.build().unwrap();
        let stop = StopRule { eps: 1e-4, max_iters: 20_000 };
        let iters = |kind| {
            let alg = inst.algorithm(&built, kind, AlgorithmOverrides::default());
            let rec = run(&alg, &built.problem, inst.initial_state(), stop, RunOptions::default()).unwrap();
            (rec.iterations, rec.termination)
        };
        let (two, t1) = iters(AlgorithmKind::TwoStep);
        let (dy, _) = iters(AlgorithmKind::DavisYin);
        if t1 == Termination::Tolerance && two < dy {
            wins += 1;
        }
        counts.push(format!("{two}/{dy}"));
    }
    outcome(wins >= 8, format!("two-step fewer iterations in {wins}/10 seeds (two-step/Davis-Yin: {})", counts.join(" ")))
}

fn c8_deblur() -> Outcome {
    let img = GrayImage::test_pattern(64, 64);
    let mut wins = 0;
    let mut margins = Vec::new();
    for seed in 1..=10 {
        let inst = gen_deblur(&img, 9, 4.0, seed, 1e-3, 1e-4).unwrap();
        let built = inst.build().unwrap();
        let truth = inst.x_true.clone().unwrap();
        let snr = |kind| {
            let alg = inst.algorithm(&built, kind, AlgorithmOverrides::default());
            let stop = StopRule { eps: 0.0, max_iters: 300 };
            let rec = run(&alg, &built.problem, inst.initial_state(), stop, RunOptions::default()).unwrap();
            snr_db(&truth, rec.final_point()).unwrap()
        };
        let (two, dy) = (snr(AlgorithmKind::TwoStep), snr(AlgorithmKind::DavisYin));
        if two >= dy {
            wins += 1;
        }
        margins.push(format!("{two:.2}/{dy:.2}"));
    }
    outcome(wins >= 8, format!("two-step SNR >= Davis-Yin in {wins}/10 seeds (dB: {})", margins.join(" ")))
}

fn c9_feasibility() -> Outcome {
    // Fixture: T1 = span(1, 0), T2 = span(0, 1), start (1, 1).
    let v = |a: f64, b: f64| Vector::new(vec![a, b]).unwrap();
    let f = dr_feasibility_operator(v(1.0, 0.0), v(0.0, 1.0)).unwrap();
    let start = v(1.0, 1.0);
    let count = |theta, delta| f.iterate(&start, theta, delta, 1e-10, 100_000).unwrap();
    let (two, plain, one) = (count(0.49, -0.01), count(0.0, 0.0), count(0.49, 0.0));
    let pass = two.converged && plain.converged && two.iterations <= plain.iterations && plain.iterations <= one.iterations;

    // Context only: a 45 degree pair, where inertia slows both inertial variants.
    let g = dr_feasibility_operator(v(1.0, 0.0), v(0.5f64.sqrt(), 0.5f64.sqrt())).unwrap();
    let ctx = |theta, delta| g.iterate(&start, theta, delta, 1e-10, 100_000).unwrap().iterations;
    outcome(
        pass,
        format!(
            "orthogonal lines (1,0),(0,1) from (1,1): two-step {} <= plain {} <= one-step {}; degenerate fixture, all finish in one step. 45 degrees: two-step {}, plain {}, one-step {}",
            two.iterations,
            plain.iterations,
            one.iterations,
            ctx(0.49, -0.01),
            ctx(0.0, 0.0),
            ctx(0.49, 0.0)
        ),
    )
}

fn flags(r: &ConditionReport) -> RationalVerdict {
    RationalVerdict {
        cond_i: r.cond_i.satisfied,
        cond_ii: r.cond_ii.satisfied,
        cond_iii_lower: r.cond_iii_lower.satisfied,
        cond_iii_quadratic: r.cond_iii_quadratic.satisfied,
        derived_delta_bound: r.derived_delta_bound.satisfied,
    }
}

fn c10_validator() -> Outcome {
    let mut rng = SeededRng::new(1010);
    let mut mismatches = 0;
    let mut admissible = 0;
    for _ in 0..1000 {
        let eta = rng.uniform_in(0.1, 10.0);
        let gamma = rng.uniform_in(0.01, 1.99) * eta;
        let theta = rng.uniform_in(0.0, 0.6);
        let delta = -rng.uniform_in(0.0, 0.3);
        let beta_rho = rng.uniform_in(0.01, 1.1);
        let p = InertialParams::with_beta_rho(theta, delta, beta_rho, gamma, eta);
        let report = validate(&p).unwrap();
        let oracle = rational_conditions(p.theta, p.delta, p.rho, p.gamma, p.eta);
        if flags(&report) != oracle || report.overall != oracle.overall() {
            mismatches += 1;
        }
        admissible += usize::from(report.overall);
    }

    // Default rows (beta rho 0.7 and 0.24) with gamma = eta = 1.
    let t1 = InertialParams::with_beta_rho(0.49, -0.01, 0.7, 1.0, 1.0);
    let t3 = InertialParams::with_beta_rho(0.49, -0.01, 0.24, 1.0, 1.0);
    let (r1, r3) = (validate(&t1).unwrap(), validate(&t3).unwrap());
    let o1 = rational_conditions(t1.theta, t1.delta, t1.rho, t1.gamma, t1.eta);
    let o3 = rational_conditions(t3.theta, t3.delta, t3.rho, t3.gamma, t3.eta);
    let expect_t1 = RationalVerdict {
        cond_i: false,
        cond_ii: true,
        cond_iii_lower: false,
        cond_iii_quadratic: false,
        derived_delta_bound: false,
    };
    let expect_t3 = RationalVerdict {
        cond_i: true,
        cond_ii: true,
        cond_iii_lower: true,
        cond_iii_quadratic: false,
        derived_delta_bound: true,
    };
    let rows_ok = flags(&r1) == o1 && o1 == expect_t1 && flags(&r3) == o3 && o3 == expect_t3;
    outcome(
        mismatches == 0 && rows_ok,
        format!(
            "{mismatches} mismatches in 1000 tuples ({admissible} admissible); beta rho 0.7 row fails cond_i, cond_iii_lower, cond_iii_quadratic, derived bound; beta rho 0.24 row fails cond_iii_quadratic only: {}",
            if rows_ok { "confirmed" } else { "NOT confirmed" }
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Duration); 10] = [
        ("algebraic identities", c1_identities, Duration::from_secs(1)),
        ("averagedness", c2_averagedness, Duration::from_secs(5)),
        ("reductions", c3_reductions, Duration::from_secs(5)),
        ("prox oracles", c4_prox_oracles, Duration::from_secs(30)),
        ("Lyapunov ledger", c5_lyapunov, Duration::from_secs(30)),
        ("solution quality", c6_solution_quality, Duration::from_secs(120)),
        ("SCAD directional", c7_scad, Duration::from_secs(120)),
        ("deblurring directional", c8_deblur, Duration::from_secs(120)),
        ("feasibility demo", c9_feasibility, Duration::from_secs(1)),
        ("validator oracle", c10_validator, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < *limit;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} [{}] {name}: {} ({:.2} s, limit {} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
