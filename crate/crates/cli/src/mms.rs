//! `mms`: grid refinement against the manufactured solution.

use std::sync::Arc;
use std::time::Instant;

use annulus_core::solver::mms::{mms_study, ManufacturedFlow};
use annulus_core::EstimateReport;

use crate::config::Loaded;
use crate::failure::{Class, ClassifyCore, Failure, Outcome};
use crate::output::{csv_table, Manifest, OutputDir};
use crate::svg::{line_chart, Scale, Series};
use crate::Context;

pub fn execute(ctx: &Context, loaded: &Loaded) -> Outcome<()> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let m = cfg.mms.clone().unwrap_or_default();
    let (eps, outer) = (cfg.grid.eps, cfg.grid.outer);
    let params = cfg.phys()?;
    let sol = Arc::new(ManufacturedFlow::new(eps, outer));
    let (study, _) = mms_study(sol, &params, eps, outer, &m.sizes, m.t_end, m.dt_per_h).or_class(Class::Solver)?;

    let mut out = OutputDir::create(&ctx.out)?;
    let rows: Vec<Vec<f64>> = study
        .rows
        .iter()
        .map(|r| vec![r.n as f64, r.h, r.steps as f64, r.err_rho, r.err_u, r.err_theta])
        .collect();
    out.write(
        "convergence.csv",
        &csv_table(&["n", "h", "steps", "err_rho", "err_u", "err_theta"], &rows)?,
    )?;
    let h: Vec<f64> = study.rows.iter().map(|r| r.h).collect();
    let col = |f: fn(&annulus_core::solver::mms::MmsRow) -> f64| study.rows.iter().map(f).collect::<Vec<_>>();
    let (er, eu, et) = (col(|r| r.err_rho), col(|r| r.err_u), col(|r| r.err_theta));
    let svg = line_chart(
        "manufactured solution: L2 error at t_end",
        "h",
        "error",
        &[
            Series {
                label: "rho",
                x: &h,
                y: &er,
            },
            Series {
                label: "u",
                x: &h,
                y: &eu,
            },
            Series {
                label: "theta",
                x: &h,
                y: &et,
            },
        ],
        Scale::Log,
        Scale::Log,
    );
    out.write("plots/convergence.svg", svg.as_bytes())?;

    let mut rep = EstimateReport::new();
    let prov = "manufactured solution";
    rep.lower("observed order rho", study.order_rho, m.min_order, 0.0, prov);
    rep.lower("observed order u", study.order_u, m.min_order, 0.0, prov);
    rep.lower("observed order theta", study.order_theta, m.min_order, 0.0, prov);
    out.write_json("summary.json", &rep)?;
    let mut manifest = Manifest::new("mms", loaded.input_sha256.clone(), ctx.seed, cfg.clone());
    if ctx.timing {
        manifest.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    out.finish(manifest)?;
    print!("{rep}");
    if rep.hard_pass() {
        Ok(())
    } else {
        Err(Failure::msg(
            Class::Invariant,
            format!("observed order below {}", m.min_order),
        ))
    }
}
