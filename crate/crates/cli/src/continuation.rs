//! `continuation`: a family of runs with shrinking inner radius.

use std::time::Instant;

use annulus_core::{
    estimate_vacuum_boundary, integrate_radial, overlap_distance, run_sequence, ContinuationPlan, EstimateReport,
    OverlapDistance, Trajectory,
};
use serde::Serialize;

use crate::config::Loaded;
use crate::failure::{Class, ClassifyCore, Failure, Outcome};
use crate::output::{csv_table, Manifest, OutputDir};
use crate::svg::{line_chart, Scale, Series};
use crate::Context;

#[derive(Debug, Serialize)]
struct MemberSummary {
    eps: f64,
    delta: f64,
    nodes: Option<usize>,
    steps: Option<usize>,
    final_mass: Option<f64>,
    vacuum_contaminated: Option<bool>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct PairDistance {
    eps_i: f64,
    eps_j: f64,
    #[serde(flatten)]
    distance: OverlapDistance,
}

#[derive(Debug, Serialize)]
struct Summary {
    overlap_region: [f64; 3],
    members: Vec<MemberSummary>,
    /// Sup distance of `(u, θ)` between consecutive members.
    consecutive_sup: Vec<f64>,
    mass_spread: f64,
    vacuum_exponent: f64,
    holder_alpha: Option<f64>,
    holder_constant: Option<f64>,
    checks: EstimateReport,
}

pub fn execute(ctx: &Context, loaded: &Loaded) -> Outcome<()> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let section = cfg
        .plan
        .as_ref()
        .ok_or_else(|| Failure::msg(Class::Config, "missing [plan] section"))?;
    let eps0 = section.eps[0];
    let plan = ContinuationPlan {
        eps_sequence: section.eps.clone(),
        data: cfg.initial_spec(eps0, &loaded.base_dir)?,
        forcing: cfg.build_forcing(eps0)?,
        params: cfg.phys()?,
        outer: cfg.grid.outer,
        grid: cfg.grid_policy()?,
        solver: cfg.solver.clone(),
        output_times: section.output_times.clone(),
        h_probes: section.h_probes.clone().unwrap_or_default(),
    };
    plan.validate().or_class(Class::Config)?;
    let family = run_sequence(&plan).or_class(Class::Solver)?;
    let mass = plan.data.m0;

    let mut members = Vec::new();
    let mut trajs: Vec<(f64, &Trajectory)> = Vec::new();
    for m in &family {
        let mut s = MemberSummary {
            eps: m.eps,
            delta: m.delta,
            nodes: None,
            steps: None,
            final_mass: None,
            vacuum_contaminated: None,
            error: None,
        };
        match &m.outcome {
            Ok(t) => {
                s.nodes = Some(t.grid.len());
                s.steps = Some(t.diagnostics.steps);
                s.final_mass = Some(integrate_radial(&t.last().rho, &t.grid).or_class(Class::Invariant)?);
                s.vacuum_contaminated = Some(t.diagnostics.vacuum_contaminated());
                trajs.push((m.eps, t));
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        members.push(s);
    }

    let a = section.overlap_from;
    let [t0, t1] = section.window.unwrap_or([0.0, cfg.solver.t_end]);
    let mut pairs = Vec::new();
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let d = overlap_distance(trajs[i].1, trajs[j].1, a, t0, t1).or_class(Class::Config)?;
            pairs.push(PairDistance {
                eps_i: trajs[i].0,
                eps_j: trajs[j].0,
                distance: d,
            });
        }
    }
    let consecutive: Vec<f64> = (0..trajs.len().saturating_sub(1))
        .map(|i| {
            pairs
                .iter()
                .find(|p| p.eps_i == trajs[i].0 && p.eps_j == trajs[i + 1].0)
                .map(|p| p.distance.sup)
                .unwrap_or(f64::NAN)
        })
        .collect();

    let mut masses = Vec::new();
    for (_, t) in &trajs {
        for s in &t.states {
            masses.push(integrate_radial(&s.rho, &t.grid).or_class(Class::Invariant)?);
        }
    }
    let spread = masses.iter().fold(0.0_f64, |m, v| m.max((v - mass).abs()));

    let mut out = OutputDir::create(&ctx.out)?;
    let rows: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| {
            let d = &p.distance;
            vec![p.eps_i, p.eps_j, d.u_sup, d.theta_sup, d.sup, d.l2, d.rho_cumulative]
        })
        .collect();
    out.write(
        "distances.csv",
        &csv_table(
            &["eps_i", "eps_j", "u_sup", "theta_sup", "sup", "l2", "rho_cumulative"],
            &rows,
        )?,
    )?;

    let refs: Vec<&Trajectory> = trajs.iter().map(|(_, t)| *t).collect();
    let probes = section.h_probes.clone().unwrap_or_default();
    let curve = if refs.is_empty() {
        None
    } else {
        Some(estimate_vacuum_boundary(&refs, &probes, section.vacuum_exponent).or_class(Class::Invariant)?)
    };
    if let Some(c) = &curve {
        let mut header = vec!["t".to_string(), "lower".into(), "fit_residual".into()];
        header.extend(trajs.iter().map(|(e, _)| format!("edge_eps_{e}")));
        let rows: Vec<Vec<f64>> = (0..c.times.len())
            .map(|k| {
                let mut row = vec![c.times[k], c.lower[k], c.fit_residual[k]];
                row.extend(c.per_member.iter().map(|m| m[k]));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write("vacuum_curve.csv", &csv_table(&header, &rows)?)?;
        let labels: Vec<String> = trajs.iter().map(|(e, _)| format!("eps = {e}")).collect();
        let mut series = vec![Series {
            label: "extrapolated",
            x: &c.times,
            y: &c.lower,
        }];
        for (k, m) in c.per_member.iter().enumerate() {
            series.push(Series {
                label: &labels[k],
                x: &c.times,
                y: m,
            });
        }
        let svg = line_chart("vacuum edge", "t", "r", &series, Scale::Linear, Scale::Linear);
        out.write("plots/vacuum_curve.svg", svg.as_bytes())?;
    }
    if !consecutive.is_empty() {
        let eps: Vec<f64> = trajs[1..].iter().map(|(e, _)| *e).collect();
        let svg = line_chart(
            "consecutive overlap distance",
            "eps",
            "sup |(u, theta)_j - (u, theta)_j+1|",
            &[Series {
                label: "sup",
                x: &eps,
                y: &consecutive,
            }],
            Scale::Log,
            Scale::Log,
        );
        out.write("plots/cauchy.svg", svg.as_bytes())?;
    }

    let mut checks = EstimateReport::new();
    let prov = "continuation";
    let failed = members.iter().filter(|m| m.error.is_some()).count();
    checks.upper("failed members", failed as f64, 0.0, 0.0, prov);
    checks.upper("mass spread over the family", spread, 0.0, 1e-8 * mass.max(1.0), prov);
    let increases = consecutive.windows(2).filter(|w| !(w[1] < w[0])).count();
    checks.upper("increases in consecutive distances", increases as f64, 0.0, 0.0, prov);
    if let Some(c) = &curve {
        checks.observe("Hoelder exponent of the vacuum edge", c.alpha, prov);
    }
    let summary = Summary {
        overlap_region: [a, t0, t1],
        members,
        consecutive_sup: consecutive,
        mass_spread: spread,
        vacuum_exponent: section.vacuum_exponent,
        holder_alpha: curve.as_ref().map(|c| c.alpha),
        holder_constant: curve.as_ref().map(|c| c.holder_constant),
        checks: checks.clone(),
    };
    out.write_json("summary.json", &summary)?;
    let mut manifest = Manifest::new("continuation", loaded.input_sha256.clone(), ctx.seed, cfg.clone());
    if ctx.timing {
        manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    out.finish(manifest)?;

    print!("{checks}");
    println!(
        "consecutive sup distances: {}",
        summary
            .consecutive_sup
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if failed > 0 {
        let msgs: Vec<String> = summary
            .members
            .iter()
            .filter_map(|m| m.error.as_ref().map(|e| format!("eps = {}: {e}", m.eps)))
            .collect();
        return Err(Failure::msg(Class::Solver, msgs.join("; ")));
    }
    if !checks.hard_pass() {
        let names: Vec<&str> = checks.failures().filter(|e| e.hard).map(|e| e.name.as_str()).collect();
        return Err(Failure::msg(Class::Invariant, names.join("; ")));
    }
    Ok(())
}
