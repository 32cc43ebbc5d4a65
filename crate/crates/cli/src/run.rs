//! `run`: one trajectory from a configuration file.

use std::time::Instant;

use annulus_core::{prepare_initial_state, run, validate_initial_data, write_snapshot};

use crate::config::Loaded;
use crate::failure::{Class, ClassifyCore, Failure, Outcome};
use crate::output::{Manifest, OutputDir, RunInfo, SnapshotRecord};
use crate::report::write_series;
use crate::Context;

pub fn execute(ctx: &Context, loaded: &Loaded) -> Outcome<()> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let grid = cfg.build_grid()?;
    let params = cfg.phys()?;
    let spec = cfg.initial_spec(grid.eps(), &loaded.base_dir)?;
    let forcing = cfg.build_forcing(grid.eps())?;
    let initial = prepare_initial_state(&spec, &grid).or_class(Class::Config)?;

    let mut out = OutputDir::create(&ctx.out)?;
    let hypotheses = validate_initial_data(&initial, &spec, &grid, params.k_gas).or_class(Class::Config)?;
    out.write_json("hypotheses.json", &hypotheses)?;
    if !hypotheses.hard_pass() {
        let names: Vec<&str> = hypotheses.failures().map(|e| e.name.as_str()).collect();
        return Err(Failure::msg(
            Class::Config,
            format!("prepared data violate: {} (raise initial.c0?)", names.join("; ")),
        ));
    }

    let traj = run(initial, &grid, &params, &forcing, &cfg.solver).or_class(Class::Solver)?;

    let mut snapshots = Vec::with_capacity(traj.states.len());
    for (k, s) in traj.states.iter().enumerate() {
        let rel = format!("snapshots/state_{k:05}.csv");
        write_snapshot(&out.path(&rel)?, s, &grid, &params).or_class(Class::Io)?;
        out.adopt(&rel)?;
        out.adopt(&rel.replace(".csv", ".json"))?;
        snapshots.push(SnapshotRecord { t: s.t, path: rel });
    }
    write_series(&mut out, &traj, cfg.checks.mass_label.unwrap_or(0.5 * spec.m0))?;

    let d = &traj.diagnostics;
    let fold = |init: f64, f: fn(f64, f64) -> f64| traj.dt_history.iter().copied().fold(init, f);
    let mut manifest = Manifest::new("run", loaded.input_sha256.clone(), ctx.seed, cfg.clone());
    manifest.run = Some(RunInfo {
        counters: d.clone(),
        vacuum_contaminated: d.vacuum_contaminated(),
        dt_min: fold(f64::INFINITY, f64::min),
        dt_max: fold(0.0, f64::max),
        snapshots,
    });
    if ctx.timing {
        manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let path = out.finish(manifest)?;
    println!(
        "{} steps, {} states, t = {}; manifest {}",
        d.steps,
        traj.states.len(),
        traj.last().t,
        path.display()
    );
    if d.vacuum_contaminated() {
        eprintln!(
            "warning: positivity floors were hit ({} rho, {} theta); the run is vacuum-contaminated",
            d.floor_rho_hits, d.floor_theta_hits
        );
    }
    Ok(())
}
