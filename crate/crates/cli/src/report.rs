//! `report`: functional time series and plots of a finished run, and the
//! loader shared with `verify`.

use std::path::Path;

use annulus_core::functionals::{entropy_dissipation, particle_path, temperature_lq, total_energy, total_entropy};
use annulus_core::verify::entropy_budget_series;
use annulus_core::{read_snapshot, Trajectory};

use crate::failure::{Class, ClassifyCore, Failure, Outcome};
use crate::output::{csv_table, sha256_file, Manifest, OutputDir};
use crate::svg::{line_chart, Scale, Series};
use crate::Context;

pub const SERIES_COLUMNS: [&str; 8] = [
    "t",
    "mass",
    "energy",
    "entropy",
    "entropy_budget",
    "dissipation_rate",
    "theta_l2",
    "r_h",
];

/// One row per recorded state, in [`SERIES_COLUMNS`] order. `r_h` follows
/// the particle with mass label `mass_label`.
pub fn functional_series(traj: &Trajectory, mass_label: f64) -> Outcome<Vec<Vec<f64>>> {
    let g = &traj.grid;
    let p = &traj.params;
    let budget = entropy_budget_series(traj).or_class(Class::Invariant)?;
    let path = particle_path(traj, mass_label).or_class(Class::Invariant)?;
    traj.states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            Ok(vec![
                s.t,
                annulus_core::integrate_radial(&s.rho, g)?,
                total_energy(s, g)?,
                total_entropy(s, g, p.k_gas)?,
                budget[k],
                entropy_dissipation(s, g, p)?,
                temperature_lq(s, g, 2.0)?,
                path.radii[k],
            ])
        })
        .collect::<annulus_core::Result<_>>()
        .or_class(Class::Invariant)
}

/// Writes `series.csv` and one plot per functional under `plots/`.
pub fn write_series(out: &mut OutputDir, traj: &Trajectory, mass_label: f64) -> Outcome<Vec<Vec<f64>>> {
    let rows = functional_series(traj, mass_label)?;
    out.write("series.csv", &csv_table(&SERIES_COLUMNS, &rows)?)?;
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for (k, name) in SERIES_COLUMNS.iter().enumerate().skip(1) {
        let y: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let svg = line_chart(
            name,
            "t",
            name,
            &[Series {
                label: name,
                x: &t,
                y: &y,
            }],
            Scale::Linear,
            Scale::Linear,
        );
        out.write(&format!("plots/{name}.svg"), svg.as_bytes())?;
    }
    Ok(rows)
}

/// Loads a run from its manifest after checking every listed checksum.
pub fn load_run(manifest_path: &Path) -> Outcome<(Manifest, Trajectory)> {
    let manifest = Manifest::read(manifest_path)?;
    if manifest.subcommand != "run" {
        return Err(Failure::msg(
            Class::Config,
            format!(
                "{} is a `{}` manifest, not a run",
                manifest_path.display(),
                manifest.subcommand
            ),
        ));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    manifest.check_files(dir)?;
    let info = manifest
        .run
        .as_ref()
        .ok_or_else(|| Failure::msg(Class::Io, "run manifest has no run section"))?;
    let params = manifest.config.phys()?;
    let mut traj: Option<Trajectory> = None;
    for snap in &info.snapshots {
        let (state, grid, _) = read_snapshot(&dir.join(&snap.path)).or_class(Class::Io)?;
        match &mut traj {
            None => traj = Some(Trajectory::new(params, grid, state)),
            Some(t) => {
                if grid != t.grid {
                    return Err(Failure::msg(Class::Io, format!("{} is on a different grid", snap.path)));
                }
                t.record(state).or_class(Class::Io)?;
            }
        }
    }
    let mut traj = traj.ok_or_else(|| Failure::msg(Class::Io, "run manifest lists no snapshots"))?;
    traj.diagnostics = info.counters.clone();
    Ok((manifest, traj))
}

pub fn execute(ctx: &Context, manifest_path: &Path) -> Outcome<()> {
    let (manifest, traj) = load_run(manifest_path)?;
    let mass_label = manifest.config.checks.mass_label.unwrap_or(0.0);
    let mut out = OutputDir::create(&ctx.out)?;
    let rows = write_series(&mut out, &traj, mass_label)?;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let mut text = String::new();
    text.push_str(&format!("run        {}\n", manifest_path.display()));
    text.push_str(&format!("states     {}\n", rows.len()));
    text.push_str(&format!("steps      {}\n", traj.diagnostics.steps));
    text.push_str(&format!(
        "floor hits {} (rho) {} (theta)\n",
        traj.diagnostics.floor_rho_hits, traj.diagnostics.floor_theta_hits
    ));
    for (k, name) in SERIES_COLUMNS.iter().enumerate() {
        text.push_str(&format!("{name:<17} {:>22.15e} -> {:>22.15e}\n", first[k], last[k]));
    }
    out.write("summary.txt", text.as_bytes())?;
    print!("{text}");
    let mut m = Manifest::new("report", sha256_file(manifest_path)?, ctx.seed, manifest.config.clone());
    m.source_manifest = Some(manifest_path.display().to_string());
    out.finish(m)?;
    Ok(())
}
