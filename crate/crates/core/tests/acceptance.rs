//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles are computed here independently of the library where a
//! closed form exists.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use annulus_core::functionals::{cumulative_mass, invert_cumulative_mass, particle_path, particle_path_slope_error};
use annulus_core::orlicz::{domain_area, luxemburg_norm, omega, YoungKind};
use annulus_core::solver::compute_q_divergence_form;
use annulus_core::solver::mms::{loglog_slope, manufactured_residual, mms_run, mms_study, ManufacturedFlow};
use annulus_core::verify::{
    density_modulus, entropy_budget_series, library, log_embedding_check, log_mass, max_increase_rate,
    weak_residual_energy, weak_residual_mass, weak_residual_momentum, WeakForm,
};
use annulus_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn params() -> PhysParams {
    PhysParams::new(0.05, 0.02, 0.1, 1.0).unwrap()
}

fn xi(r: f64) -> f64 {
    (r - 0.1) / 0.9
}

/// Smooth nontrivial runs on (0.1, 1): temperature, velocity and density
/// pulses, and all three together.
fn zoo() -> Vec<(&'static str, Trajectory)> {
    let n = 201;
    let g = RadialGrid::uniform(0.1, 1.0, n).unwrap();
    let theta = g.map(|r| 1.0 + 0.3 * (PI * xi(r)).cos());
    let mut u = g.map(|r| 0.1 * (PI * xi(r)).sin());
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let rho = g.map(|r| 1.0 + 0.2 * (PI * xi(r)).cos());
    let bump = g.map(|r| 1.0 + 0.8 * (-((r - 0.55) / 0.1).powi(2)).exp());
    let cases = [
        (
            "temperature",
            FlowState::new(0.0, vec![1.0; n], vec![0.0; n], theta.clone()),
        ),
        ("velocity", FlowState::new(0.0, vec![1.0; n], u.clone(), vec![1.0; n])),
        ("density", FlowState::new(0.0, rho.clone(), vec![0.0; n], vec![1.0; n])),
        ("combined", FlowState::new(0.0, rho, u, theta)),
        ("concentrated", FlowState::new(0.0, bump, vec![0.0; n], vec![1.0; n])),
    ];
    let cfg = SolverConfig {
        t_end: 0.5,
        ..Default::default()
    };
    cases
        .into_iter()
        .map(|(name, s)| (name, run(s, &g, &params(), &Forcing::zero(), &cfg).unwrap()))
        .collect()
}

fn c1_constant_state() -> Outcome {
    let start = Instant::now();
    let g = RadialGrid::uniform(0.1, 1.0, 201).unwrap();
    let s0 = FlowState::at_rest(&g, 1.0, 1.0);
    let cfg = SolverConfig {
        t_end: 1.0,
        output_every: 1,
        ..Default::default()
    };
    let tr = run(s0.clone(), &g, &params(), &Forcing::zero(), &cfg).map_err(|e| e.to_string())?;
    let worst = tr.states.iter().map(|s| s.max_abs_diff(&s0)).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("{} states, max deviation {worst:.1e}, {secs:.2} s", tr.states.len());
    if worst <= 1e-12 && secs < 5.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_mass_conservation() -> Outcome {
    let n = 801;
    let g = RadialGrid::uniform(0.1, 1.0, n).unwrap();
    let mut u = g.map(|r| 0.2 * (2.0 * PI * xi(r)).sin());
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let s0 = FlowState::new(
        0.0,
        g.map(|r| 1.0 + 0.3 * (PI * xi(r)).cos()),
        u,
        g.map(|r| 1.0 + 0.3 * (3.0 * PI * xi(r)).cos()),
    );
    let cfg = SolverConfig {
        t_end: 0.5,
        ..Default::default()
    };
    let tr = run(s0, &g, &params(), &Forcing::zero(), &cfg).map_err(|e| e.to_string())?;
    let m0 = integrate_radial(&tr.initial().rho, &g).unwrap();
    let drift = tr
        .states
        .iter()
        .map(|s| (integrate_radial(&s.rho, &g).unwrap() - m0).abs() / m0)
        .fold(0.0, f64::max);
    let msg = format!("relative drift {drift:.1e} over {} steps", tr.diagnostics.steps);
    if drift <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_velocity(rng: &mut ChaCha8Rng, g: &RadialGrid) -> Vec<f64> {
    let n = g.len();
    let modes: Vec<(f64, f64)> = (0..4).map(|k| (rng.gen_range(-1.0..1.0), (k + 1) as f64)).collect();
    let mut u = g.map(|r| modes.iter().map(|(a, k)| a * (k * PI * xi(r)).sin()).sum());
    for v in &mut u {
        *v += rng.gen_range(-0.05..0.05);
    }
    u[0] = 0.0;
    u[n - 1] = 0.0;
    u
}

fn c3_q_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = RadialGrid::uniform(0.1, 1.0, 101).unwrap();
    let mut worst = f64::INFINITY;
    for k in 0..1000 {
        let mu = rng.gen_range(1e-3..2.0);
        // every tenth state sits on the edge μ + λ = 0
        let lambda = if k % 10 == 0 { -mu } else { rng.gen_range(-mu..2.0) };
        let p = PhysParams::new(mu, lambda, 0.1, 1.0).unwrap();
        let s = FlowState::new(0.0, vec![1.0; 101], random_velocity(&mut rng, &g), vec![1.0; 101]);
        let q = compute_q(&s, &p, &g).unwrap();
        worst = q.iter().copied().fold(worst, f64::min);
    }
    // both forms on a smooth field under refinement, away from the one-sided ends
    let p = params();
    let mut hs = Vec::new();
    let mut diffs = Vec::new();
    for n in [101, 201, 401, 801] {
        let g = RadialGrid::uniform(0.1, 1.0, n).unwrap();
        let u = g.map(|r| (PI * xi(r)).sin() * r);
        let s = FlowState::new(0.0, vec![1.0; n], u, vec![1.0; n]);
        let a = compute_q(&s, &p, &g).unwrap();
        let b = compute_q_divergence_form(&s, &p, &g).unwrap();
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        hs.push(g.min_spacing());
        diffs.push(d);
    }
    let order = loglog_slope(&hs, &diffs);
    let msg = format!(
        "min Q over 1000 states {worst:.1e}; form difference {:.1e} -> {:.1e}, order {order:.2}",
        diffs[0], diffs[3]
    );
    if worst >= -1e-14 && order >= 0.9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_entropy_budget(zoo: &[(&str, Trajectory)]) -> Outcome {
    let mut parts = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (name, tr) in zoo {
        let b = entropy_budget_series(tr).map_err(|e| e.to_string())?;
        let rate = max_increase_rate(&tr.times(), &b);
        worst = worst.max(rate);
        parts.push(format!("{name} {rate:.1e}"));
    }
    let msg = format!("max budget increase per unit time: {}", parts.join(", "));
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_mms() -> Outcome {
    let start = Instant::now();
    let (eps, outer) = (0.1, 1.0);
    let sol = Arc::new(ManufacturedFlow::new(eps, outer));
    let (study, _) =
        mms_study(sol, &params(), eps, outer, &[101, 201, 401, 801], 0.3, 0.2).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "orders rho {:.2}, u {:.2}, theta {:.2}; {secs:.1} s",
        study.order_rho, study.order_u, study.order_theta
    );
    if study.order_rho >= 0.9 && study.order_u >= 0.9 && study.order_theta >= 0.9 && secs < 120.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn manufactured_trajectories(sizes: &[usize]) -> (Forcing, Vec<Trajectory>) {
    let (eps, outer) = (0.1, 1.0);
    let sol = ManufacturedFlow::new(eps, outer);
    let forcing = manufactured_residual(Arc::new(sol), &params(), eps, outer).unwrap();
    let trajs = sizes
        .iter()
        .map(|&n| {
            mms_run(&sol, &forcing, &params(), eps, outer, n, 0.3, 0.2, 1)
                .unwrap()
                .1
        })
        .collect();
    (forcing, trajs)
}

fn c6_weak_residuals(forcing: &Forcing, trajs: &[Trajectory]) -> Outcome {
    let eta = 0.05;
    let hs: Vec<f64> = trajs.iter().map(|t| t.grid.min_spacing()).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |label: String, values: Vec<f64>| {
        if values.iter().all(|&v| v <= 1e-12) {
            lines.push(format!("{label} exact"));
            return;
        }
        let slope = loglog_slope(&hs, &values);
        ok &= slope >= 0.9;
        lines.push(format!("{label} {slope:.2}"));
    };
    for tf in library(0.1, 1.0) {
        let mass: Vec<f64> = trajs
            .iter()
            .map(|t| weak_residual_mass(t, forcing, &tf).unwrap())
            .collect();
        check(format!("mass/{}", tf.name), mass);
        if tf.admits(WeakForm::Momentum, 0.1, 1.0, 0.0) {
            let v = trajs
                .iter()
                .map(|t| weak_residual_momentum(t, forcing, &tf, MomentumTerms::Full).unwrap())
                .collect();
            check(format!("momentum/{}", tf.name), v);
        }
        if tf.admits(WeakForm::Energy, 0.1, 1.0, eta) {
            let v = trajs
                .iter()
                .map(|t| weak_residual_energy(t, forcing, &tf, eta, EnergyFlux::Radial).unwrap())
                .collect();
            check(format!("energy/{}", tf.name), v);
        }
    }
    // constant states
    let g = RadialGrid::uniform(0.1, 1.0, 201).unwrap();
    let cfg = SolverConfig {
        t_end: 0.5,
        ..Default::default()
    };
    let zero = Forcing::zero();
    let tr = run(FlowState::at_rest(&g, 1.3, 0.7), &g, &params(), &zero, &cfg).unwrap();
    let mut constant = 0.0_f64;
    for tf in library(0.1, 1.0) {
        constant = constant.max(weak_residual_mass(&tr, &zero, &tf).unwrap());
        if tf.admits(WeakForm::Momentum, 0.1, 1.0, 0.0) {
            constant = constant.max(weak_residual_momentum(&tr, &zero, &tf, MomentumTerms::Full).unwrap());
        }
        if tf.admits(WeakForm::Energy, 0.1, 1.0, eta) {
            constant = constant.max(weak_residual_energy(&tr, &zero, &tf, eta, EnergyFlux::Radial).unwrap());
        }
    }
    ok &= constant <= 1e-10;
    let msg = format!("slopes: {}; constant-state max {constant:.1e}", lines.join(", "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Closed-form Luxemburg norm of a constant, with the inverse Young function
/// found by an independent bisection.
fn constant_norm_oracle(kind: YoungKind, a: f64, area: f64) -> f64 {
    let phi = |s: f64| match kind {
        YoungKind::M => (1.0 + s) * (1.0 + s).ln() - s,
        YoungKind::N => s.exp() - s - 1.0,
        YoungKind::H => (s * s).exp() - 1.0,
    };
    let target = 1.0 / area;
    let (mut lo, mut hi) = (0.0, 1.0);
    while phi(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a / (0.5 * (lo + hi))
}

fn c7_orlicz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = 1e-13;
    let mut worst_closed = 0.0_f64;
    for _ in 0..50 {
        let eps = rng.gen_range(0.01..0.5);
        let outer = eps + rng.gen_range(0.2..2.0);
        let g = RadialGrid::uniform(eps, outer, 64).unwrap();
        let a = rng.gen_range(0.01..10.0);
        let area = PI * (outer * outer - eps * eps);
        for kind in YoungKind::ALL {
            let got = luxemburg_norm(&vec![a; 64], &g, kind, tol).map_err(|e| e.to_string())?;
            let want = constant_norm_oracle(kind, a, area);
            worst_closed = worst_closed.max((got - want).abs() / want);
        }
        debug_assert!((domain_area(&g) - area).abs() < 1e-12 * area);
    }
    let g = RadialGrid::uniform(0.1, 1.0, 101).unwrap();
    let (mut worst_hom, mut mono_fail) = (0.0_f64, 0usize);
    for _ in 0..1000 {
        let kind = YoungKind::ALL[rng.gen_range(0..3)];
        let f: Vec<f64> = (0..101).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c = rng.gen_range(-5.0..5.0);
        let nf = luxemburg_norm(&f, &g, kind, tol).unwrap();
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let ncf = luxemburg_norm(&cf, &g, kind, tol).unwrap();
        worst_hom = worst_hom.max((ncf - c.abs() * nf).abs() / (c.abs() * nf).max(1e-300));
        let bigger: Vec<f64> = f.iter().map(|v| v.abs() + rng.gen_range(0.0..0.5)).collect();
        if luxemburg_norm(&bigger, &g, kind, tol).unwrap() < nf * (1.0 - 1e-12) {
            mono_fail += 1;
        }
    }
    let msg = format!(
        "closed form rel. error {worst_closed:.1e}; homogeneity rel. error {worst_hom:.1e}; monotonicity failures {mono_fail}"
    );
    if worst_closed <= 1e-9 && worst_hom <= 1e-9 && mono_fail == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn seeded_regions(rng: &mut ChaCha8Rng, eps: f64, outer: f64) -> Vec<Region> {
    (0..20)
        .map(|_| {
            let pieces = rng.gen_range(1..4);
            let mut cuts: Vec<f64> = (0..2 * pieces).map(|_| rng.gen_range(eps..outer)).collect();
            cuts.sort_by(f64::total_cmp);
            Region(cuts.chunks(2).map(|c| (c[0], c[1])).collect())
        })
        .collect()
}

fn c8_omega(zoo: &[(&str, Trajectory)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let regions = seeded_regions(&mut rng, 0.1, 1.0);
    let (mut checks, mut violations, mut tightest) = (0usize, Vec::new(), f64::INFINITY);
    for (name, tr) in zoo {
        for s in &tr.states {
            let c = log_mass(&s.rho, &tr.grid).map_err(|e| e.to_string())?;
            for (k, e) in regions.iter().enumerate() {
                let (mass, bound) = density_modulus(&s.rho, e, &tr.grid, c).map_err(|e| e.to_string())?;
                checks += 1;
                tightest = tightest.min(bound - mass);
                if mass > bound {
                    violations.push(format!("{name} t={:.3} E#{k}", s.t));
                }
            }
        }
    }
    // independent spot check of ω against its definition G(y) = y ln y
    let (m, c) = (0.2, 0.05);
    let w = omega(m, c).map_err(|e| e.to_string())?;
    let y = w / m - 1.0;
    let spot = (y * y.ln() - c / m).abs();
    let msg = format!(
        "{checks} checks, {} violations, smallest slack {tightest:.2e}, G(G^-1) defect {spot:.1e}",
        violations.len()
    );
    if violations.is_empty() && spot < 1e-10 {
        Ok(msg)
    } else {
        Err(format!(
            "{msg}; first: {}",
            violations[..violations.len().min(3)].join("; ")
        ))
    }
}

fn c9_log_embedding(zoo: &[(&str, Trajectory)]) -> Outcome {
    let mut failed = Vec::new();
    let mut count = 0;
    for (name, tr) in zoo {
        for q in [1.0, 2.0, 4.0] {
            let rep = log_embedding_check(tr, q).map_err(|e| e.to_string())?;
            count += tr.states.len();
            if !rep.all_pass() {
                failed.push(format!("{name} q={q}"));
            }
        }
    }
    let msg = format!("{count} (run, q, time) checks, failures: {}", failed.len());
    if failed.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg} ({})", failed.join(", ")))
    }
}

fn c10_particle_paths(trajs: &[Trajectory]) -> Outcome {
    let h = 0.1;
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for tr in trajs {
        let path = particle_path(tr, h).map_err(|e| e.to_string())?;
        errs.push(particle_path_slope_error(tr, &path).map_err(|e| e.to_string())?);
        hs.push(tr.grid.min_spacing());
    }
    let order = loglog_slope(&hs, &errs);
    let labels = [0.02, 0.05, 0.1, 0.2, 0.3, 0.4];
    let mut monotone = true;
    for tr in trajs {
        for s in &tr.states {
            let cum = cumulative_mass(&s.rho, &tr.grid).unwrap();
            let radii: Vec<f64> = labels
                .iter()
                .map(|&l| invert_cumulative_mass(&cum, &s.rho, &tr.grid, l).unwrap())
                .collect();
            monotone &= radii.windows(2).all(|w| w[1] > w[0]);
        }
    }
    let msg = format!(
        "slope error {:.1e} -> {:.1e}, order {order:.2}; r_h monotone in h: {monotone}",
        errs[0],
        errs[errs.len() - 1]
    );
    if order > 0.5 && errs.windows(2).all(|w| w[1] < w[0]) && monotone {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c11_continuation() -> Outcome {
    let start = Instant::now();
    let eps = vec![0.2, 0.1, 0.05, 0.025];
    let data = InitialDataSpec::new(
        Profile::analytic(|r| 1.0 + 0.3 * (PI * r).cos()),
        Profile::analytic(|r| 0.1 * (2.0 * PI * r).sin()),
        Profile::analytic(|r| 1.0 + 0.3 * r * r),
        4.0,
        0.5,
        eps[0],
    );
    let plan = ContinuationPlan {
        eps_sequence: eps.clone(),
        data,
        forcing: Forcing::zero(),
        params: params(),
        outer: 1.0,
        grid: GridPolicy::Uniform { spacing: 0.005 },
        solver: SolverConfig {
            t_end: 0.5,
            ..Default::default()
        },
        output_times: Some((1..=50).map(|k| 0.01 * k as f64).collect()),
        h_probes: vec![0.02, 0.01, 0.005],
    };
    let family = run_sequence(&plan).map_err(|e| e.to_string())?;
    let mut trajs = Vec::new();
    for m in &family {
        match &m.outcome {
            Ok(t) => trajs.push(t),
            Err(e) => return Err(format!("eps = {} failed: {e}", m.eps)),
        }
    }
    let d: Vec<f64> = trajs
        .windows(2)
        .map(|w| overlap_distance(w[0], w[1], 0.3, 0.1, 0.5).map(|d| d.sup))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let masses: Vec<f64> = trajs
        .iter()
        .map(|t| integrate_radial(&t.last().rho, &t.grid).unwrap())
        .collect();
    let spread = masses.iter().fold(0.0_f64, |m, v| m.max((v - 0.5).abs()));
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "sup distances {}; mass spread {spread:.1e}; {secs:.1} s",
        d.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" > ")
    );
    if d.windows(2).all(|w| w[1] < w[0]) && spread <= 1e-8 && secs < 600.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c12_holder() -> Outcome {
    let t: Vec<f64> = (0..256).map(|k| k as f64 / 255.0).collect();
    let (a1, _) = holder_exponent(&t, &t).map_err(|e| e.to_string())?;
    let sq: Vec<f64> = t.iter().map(|v| v.sqrt()).collect();
    let (a2, _) = holder_exponent(&t, &sq).map_err(|e| e.to_string())?;
    let msg = format!("alpha(t) = {a1:.3}, alpha(sqrt t) = {a2:.3}");
    if (a1 - 1.0).abs() <= 0.05 && (a2 - 0.5).abs() <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let zoo = zoo();
    let (forcing, mms) = manufactured_trajectories(&[101, 201, 401, 801]);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 constant-state exactness", c1_constant_state()),
        ("2 mass conservation", c2_mass_conservation()),
        ("3 Q nonnegativity and dual form", c3_q_forms()),
        ("4 entropy budget", c4_entropy_budget(&zoo)),
        ("5 manufactured convergence", c5_mms()),
        ("6 weak residuals", c6_weak_residuals(&forcing, &mms)),
        ("7 Orlicz norm oracles", c7_orlicz()),
        ("8 omega modulus", c8_omega(&zoo)),
        ("9 logarithmic embedding", c9_log_embedding(&zoo)),
        ("10 particle paths", c10_particle_paths(&mms)),
        ("11 continuation Cauchy behaviour", c11_continuation()),
        ("12 Hoelder estimator", c12_holder()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
