use std::f64::consts::PI;
use std::sync::Arc;

use annulus_core::functionals::{higher_order_functionals, particle_path};
use annulus_core::solver::mms::{manufactured_residual, mms_run, ManufacturedFlow};
use annulus_core::verify::{check_global_estimates, energy_budget, uniform_integrability};
use annulus_core::*;

fn params() -> PhysParams {
    PhysParams::new(0.05, 0.02, 0.1, 1.0).unwrap()
}

fn spec(eps: f64) -> InitialDataSpec {
    InitialDataSpec::new(
        Profile::Pulse {
            base: 1.0,
            amplitude: 0.5,
            center: 0.5,
            width: 0.15,
        },
        Profile::analytic(|r| 0.05 * (2.0 * PI * r).sin()),
        Profile::analytic(|r| 1.0 + 0.2 * r * r),
        4.0,
        0.6,
        eps,
    )
}

#[test]
fn prepared_data_runs_and_passes_hard_checks() {
    let g = RadialGrid::uniform(0.1, 1.0, 181).unwrap();
    let s = spec(0.1);
    let state = prepare_initial_state(&s, &g).unwrap();
    let hyp = validate_initial_data(&state, &s, &g, 1.0).unwrap();
    assert!(hyp.all_pass(), "{hyp}");
    let cfg = SolverConfig {
        t_end: 0.3,
        ..Default::default()
    };
    let tr = run(state, &g, &params(), &Forcing::zero(), &cfg).unwrap();
    let rep = check_global_estimates(&tr, &Forcing::zero(), &Default::default()).unwrap();
    assert!(rep.get("relative mass drift").unwrap().pass);
    assert!(rep.get("min Q").unwrap().pass);
    assert!((rep.get("mass").unwrap().value - 0.6).abs() < 1e-10);
    // the discrete scheme loses energy; it never gains it without forcing
    assert!(energy_budget(&tr, &Forcing::zero()).unwrap().all_pass());
    let regions = vec![Region(vec![(0.4, 0.6)]), Region(vec![(0.2, 0.3), (0.8, 0.95)])];
    assert!(uniform_integrability(&tr, &regions, 0.3).unwrap().hard_pass());
}

#[test]
fn manufactured_paths_follow_mass_level_sets() {
    let sol = ManufacturedFlow::new(0.1, 1.0);
    let forcing = manufactured_residual(Arc::new(sol), &params(), 0.1, 1.0).unwrap();
    let (_, tr) = mms_run(&sol, &forcing, &params(), 0.1, 1.0, 401, 0.3, 0.2, 10).unwrap();
    let path = particle_path(&tr, 0.1).unwrap();
    for (t, r) in path.times.iter().zip(&path.radii) {
        // exact path: the level set m(t, r) = 0.1
        assert!((sol.cumulative_mass(*t, *r) - 0.1).abs() < 2e-4, "t={t}");
    }
    let triple = higher_order_functionals(&tr, 0.1, 3.0).unwrap();
    assert!(triple.a.is_finite() && triple.b.is_finite() && triple.d.is_finite());
}

#[test]
fn snapshot_of_a_run_reloads_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let g = RadialGrid::uniform(0.1, 1.0, 101).unwrap();
    let state = prepare_initial_state(&spec(0.1), &g).unwrap();
    let cfg = SolverConfig {
        t_end: 0.1,
        ..Default::default()
    };
    let tr = run(state, &g, &params(), &Forcing::zero(), &cfg).unwrap();
    let path = dir.path().join("state.csv");
    write_snapshot(&path, tr.last(), &g, &params()).unwrap();
    let (back, grid, meta) = read_snapshot(&path).unwrap();
    assert_eq!(back, *tr.last());
    assert_eq!(grid, g);
    assert_eq!(meta.params, params());
    let more = run(back, &grid, &meta.params, &Forcing::zero(), &cfg).unwrap();
    assert!((more.last().t - 0.2).abs() < 1e-12);
}

#[test]
fn continuation_family_conserves_mass() {
    let plan = ContinuationPlan {
        eps_sequence: vec![0.2, 0.1, 0.05],
        data: spec(0.2),
        forcing: Forcing::zero(),
        params: params(),
        outer: 1.0,
        grid: GridPolicy::Uniform { spacing: 0.01 },
        solver: SolverConfig {
            t_end: 0.2,
            ..Default::default()
        },
        output_times: Some((1..=20).map(|k| 0.01 * k as f64).collect()),
        h_probes: vec![0.02, 0.01, 0.005],
    };
    let family = run_sequence(&plan).unwrap();
    let trajs: Vec<&Trajectory> = family.iter().map(|m| m.trajectory().unwrap()).collect();
    for t in &trajs {
        for s in &t.states {
            assert!((integrate_radial(&s.rho, &t.grid).unwrap() - 0.6).abs() < 1e-8);
        }
    }
    let curve = estimate_vacuum_boundary(&trajs, &plan.h_probes, 0.5).unwrap();
    assert_eq!(curve.times.len(), 21);
    for (k, m) in family.iter().enumerate() {
        assert!(curve.per_member[k].iter().all(|&r| r >= m.eps && r < 1.0));
    }
    assert!(curve.alpha > 0.0 && curve.alpha <= 1.0 + 1e-9);
}
