//! `verify`: estimate checks on a finished run.

use std::path::Path;

use annulus_core::verify::{
    check_global_estimates, check_pointwise_bounds, energy_budget, library, log_embedding_check, uniform_integrability,
    weak_residual_energy, weak_residual_mass, weak_residual_momentum, WeakForm,
};
use annulus_core::{
    validate_initial_data, EnergyFlux, EstimateReport, Forcing, InitialDataSpec, MomentumTerms, Profile, Region,
    Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, CHECK_NAMES};
use crate::failure::{Class, ClassifyCore, Failure, Outcome};
use crate::output::{sha256_file, Manifest, OutputDir};
use crate::report::load_run;
use crate::Context;

/// `count` regions of one to three random intervals inside `[b, R]`.
pub fn seeded_regions(seed: u64, count: usize, b: f64, outer: f64) -> Vec<Region> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pieces = rng.gen_range(1..=3);
            let mut cuts: Vec<f64> = (0..2 * pieces).map(|_| rng.gen_range(b..outer)).collect();
            cuts.sort_by(f64::total_cmp);
            Region(cuts.chunks(2).map(|c| (c[0], c[1])).collect())
        })
        .collect()
}

fn weak_report(traj: &Trajectory, forcing: &Forcing, eta: f64) -> Outcome<EstimateReport> {
    let (eps, outer) = (traj.grid.eps(), traj.grid.outer());
    let prov = "weak formulation";
    let rows: Vec<Vec<(String, f64)>> = library(eps, outer)
        .par_iter()
        .map(|tf| {
            let mut v = vec![(
                format!("weak mass residual / {}", tf.name),
                weak_residual_mass(traj, forcing, tf)?,
            )];
            if tf.admits(WeakForm::Momentum, eps, outer, 0.0) {
                let r = weak_residual_momentum(traj, forcing, tf, MomentumTerms::Full)?;
                v.push((format!("weak momentum residual / {}", tf.name), r));
            }
            if tf.admits(WeakForm::Energy, eps, outer, eta) {
                match weak_residual_energy(traj, forcing, tf, eta, EnergyFlux::Radial) {
                    Ok(r) => v.push((format!("weak energy residual / {}", tf.name), r)),
                    // the fluid edge of this run lies too far right for this function
                    Err(annulus_core::Error::Support(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(v)
        })
        .collect::<annulus_core::Result<_>>()
        .or_class(Class::Invariant)?;
    let mut rep = EstimateReport::new();
    for (name, value) in rows.into_iter().flatten() {
        rep.observe(&name, value, prov);
    }
    Ok(rep)
}

/// Runs the selected checks in [`CHECK_NAMES`] order.
pub fn run_checks(traj: &Trajectory, cfg: &ExperimentConfig, checks: &[String], seed: u64) -> Outcome<EstimateReport> {
    let forcing = cfg.build_forcing(traj.grid.eps())?;
    let c = &cfg.checks;
    let mut rep = EstimateReport::new();
    let hits = traj.diagnostics.floor_rho_hits + traj.diagnostics.floor_theta_hits;
    rep.upper("positivity floor hits", hits as f64, 0.0, 0.0, "certification");
    for name in CHECK_NAMES.iter().filter(|n| checks.iter().any(|c| c == *n)) {
        let part = match *name {
            "hypotheses" => {
                let mass = cfg.initial.mass.unwrap_or(f64::NAN);
                let u = Profile::Uniform(1.0);
                let spec = InitialDataSpec::new(u.clone(), u.clone(), u, cfg.initial.c0, mass, traj.grid.eps());
                validate_initial_data(traj.initial(), &spec, &traj.grid, traj.params.k_gas)
            }
            "global" => check_global_estimates(traj, &forcing, &c.tolerances),
            "pointwise" => check_pointwise_bounds(traj, c.mass_label.unwrap_or(0.0)),
            "energy" => energy_budget(traj, &forcing),
            "integrability" => {
                let b = c.b.unwrap_or(traj.grid.eps());
                let regions = seeded_regions(seed, c.regions, b, traj.grid.outer());
                uniform_integrability(traj, &regions, b)
            }
            "log_embedding" => {
                let mut r = EstimateReport::new();
                for &q in &c.q {
                    match log_embedding_check(traj, q) {
                        Ok(part) => r.extend(part),
                        Err(e) => return Err(Failure::new(Class::Invariant, e)),
                    }
                }
                Ok(r)
            }
            "weak" => {
                rep.extend(weak_report(traj, &forcing, c.eta)?);
                continue;
            }
            _ => unreachable!("check names are validated at parse time"),
        };
        rep.extend(part.or_class(Class::Invariant)?);
    }
    Ok(rep)
}

pub fn execute(ctx: &Context, manifest_path: &Path, checks: Option<&[String]>) -> Outcome<()> {
    let (manifest, traj) = load_run(manifest_path)?;
    let cfg = &manifest.config;
    let selected: Vec<String> = match checks {
        Some(list) => {
            if let Some(bad) = list.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
                return Err(Failure::msg(
                    Class::Config,
                    format!("unknown check '{bad}' (expected one of {})", CHECK_NAMES.join(", ")),
                ));
            }
            list.to_vec()
        }
        None => cfg.checks.list.clone(),
    };
    let rep = run_checks(&traj, cfg, &selected, ctx.seed)?;
    let text = rep.to_string();
    let mut out = OutputDir::create(&ctx.out)?;
    out.write_json("report.json", &rep)?;
    out.write("report.txt", text.as_bytes())?;
    let mut config = cfg.clone();
    config.checks.list = selected;
    let mut m = Manifest::new("verify", sha256_file(manifest_path)?, ctx.seed, config);
    m.source_manifest = Some(manifest_path.display().to_string());
    out.finish(m)?;
    print!("{text}");
    let failed: Vec<&str> = rep.failures().filter(|e| e.hard).map(|e| e.name.as_str()).collect();
    if failed.is_empty() {
        println!("all hard invariants hold ({} entries)", rep.entries.len());
        Ok(())
    } else {
        Err(Failure::msg(
            Class::Invariant,
            format!("{} hard invariant(s) failed: {}", failed.len(), failed.join("; ")),
        ))
    }
}
