//! Machine-checkable reports on computed trajectories: the global a priori
//! bounds, pointwise bounds away from the origin, weak-form residuals, the
//! energy budget, uniform integrability and the embedding inequalities.

mod testfn;
mod weak;

pub use testfn::{library, SpaceProfile, TestFunction, WeakForm};
pub use weak::{
    fluid_edge, weak_residual_energy, weak_residual_mass, weak_residual_momentum, EnergyFlux, MomentumTerms,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    entropy_dissipation, particle_path, temperature_gradient_l1, temperature_lq_accumulated, total_energy,
    total_entropy, total_mass, velocity_global_norms,
};
use crate::grid::{cumulative_time_integral, integrate_time, radial_derivative, FlowState, RadialGrid, Trajectory};
use crate::orlicz::{g, log_embedding_bound, omega};
use crate::report::EstimateReport;
use crate::solver::{compute_q, Forcing};

/// Tolerances for [`check_global_estimates`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative mass drift.
    pub mass: f64,
    /// Allowed increase of entropy plus accumulated dissipation per unit time.
    pub entropy_rate: f64,
    /// Lower bound for `Q`.
    pub q_floor: f64,
    /// Exponent of the accumulated temperature norm.
    pub q_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-8,
            entropy_rate: 1e-8,
            q_floor: -1e-14,
            q_exponent: 2.0,
        }
    }
}

const GLOBAL: &str = "energy and entropy estimates";
const GLOBAL_UT: &str = "global estimates of u and theta";

/// Entropy plus accumulated dissipation at every recorded time.
pub fn entropy_budget_series(traj: &Trajectory) -> Result<Vec<f64>> {
    let grid = &traj.grid;
    let times = traj.times();
    let mut s = Vec::with_capacity(times.len());
    let mut d = Vec::with_capacity(times.len());
    for st in &traj.states {
        s.push(total_entropy(st, grid, traj.params.k_gas)?);
        d.push(entropy_dissipation(st, grid, &traj.params)?);
    }
    let cum = cumulative_time_integral(&times, &d);
    Ok(s.iter().zip(&cum).map(|(a, b)| a + b).collect())
}

/// Largest `(B(t_{k+1}) − B(t_k)) / (t_{k+1} − t_k)` of a series.
pub fn max_increase_rate(times: &[f64], series: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(series.windows(2))
        .map(|(t, b)| (b[1] - b[0]) / (t[1] - t[0]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Mass constancy, energy bound, the entropy budget, and the time-accumulated
/// norms of `θ` and `u`.
pub fn check_global_estimates(traj: &Trajectory, forcing: &Forcing, tol: &Tolerances) -> Result<EstimateReport> {
    let grid = &traj.grid;
    let params = &traj.params;
    let times = traj.times();
    let mut rep = EstimateReport::new();

    let masses = traj
        .states
        .iter()
        .map(|s| total_mass(s, grid))
        .collect::<Result<Vec<_>>>()?;
    let m0 = masses[0];
    let drift = masses.iter().map(|m| ((m - m0) / m0).abs()).fold(0.0, f64::max);
    rep.observe("mass", m0, GLOBAL);
    rep.upper("relative mass drift", drift, 0.0, tol.mass, GLOBAL);

    let energies = traj
        .states
        .iter()
        .map(|s| total_energy(s, grid))
        .collect::<Result<Vec<_>>>()?;
    rep.observe("initial energy", energies[0], GLOBAL);
    rep.observe(
        "max energy",
        energies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        GLOBAL,
    );

    let budget = entropy_budget_series(traj)?;
    rep.observe("initial entropy", budget[0], GLOBAL);
    let rate = if times.len() > 1 {
        max_increase_rate(&times, &budget)
    } else {
        0.0
    };
    if forcing.is_unforced() {
        rep.upper("entropy budget increase rate", rate, 0.0, tol.entropy_rate, GLOBAL);
    } else {
        rep.observe("entropy budget increase rate (forced)", rate, GLOBAL);
    }

    let mut q_min = f64::INFINITY;
    for s in &traj.states {
        q_min = compute_q(s, params, grid)?.into_iter().fold(q_min, f64::min);
    }
    if params.mu + params.lambda >= 0.0 {
        rep.lower("min Q", q_min, 0.0, -tol.q_floor, "dissipation form");
    }

    rep.observe(
        &format!("accumulated theta L^{} norm", tol.q_exponent),
        temperature_lq_accumulated(traj, tol.q_exponent)?,
        GLOBAL_UT,
    );
    let mut grad_l1 = Vec::new();
    let mut w = Vec::new();
    let mut l4 = Vec::new();
    for s in &traj.states {
        grad_l1.push(temperature_gradient_l1(s, grid)?);
        let (a, b) = velocity_global_norms(s, grid)?;
        w.push(a);
        l4.push(b);
    }
    rep.observe(
        "accumulated theta_r L^1 norm",
        integrate_time(&times, &grad_l1),
        GLOBAL_UT,
    );
    rep.observe(
        "accumulated u W^{1,4/3} integral",
        integrate_time(&times, &w),
        GLOBAL_UT,
    );
    rep.observe("accumulated u L^4 integral", integrate_time(&times, &l4), GLOBAL_UT);
    Ok(rep)
}

/// Observed bounds on `{r ≥ r_h(t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBounds {
    pub h: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `∫₀ᵀ max_{r ≥ r_h} θ dt`.
    pub theta_sup_integral: f64,
}

pub fn pointwise_bounds(traj: &Trajectory, h: f64) -> Result<PointwiseBounds> {
    let path = particle_path(traj, h)?;
    let r = traj.grid.nodes();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut sup_theta = Vec::with_capacity(traj.states.len());
    for (s, &rh) in traj.states.iter().zip(&path.radii) {
        let mut top = f64::NEG_INFINITY;
        for i in (0..r.len()).filter(|&i| r[i] >= rh) {
            lo = lo.min(s.rho[i]);
            hi = hi.max(s.rho[i]);
            top = top.max(s.theta[i]);
        }
        sup_theta.push(top);
    }
    Ok(PointwiseBounds {
        h,
        rho_min: lo,
        rho_max: hi,
        theta_sup_integral: integrate_time(&traj.times(), &sup_theta),
    })
}

pub fn check_pointwise_bounds(traj: &Trajectory, h: f64) -> Result<EstimateReport> {
    let b = pointwise_bounds(traj, h)?;
    let prov = "pointwise bounds away from the origin";
    let mut rep = EstimateReport::new();
    rep.lower(&format!("rho min on r >= r_h (h = {h})"), b.rho_min, 0.0, 0.0, prov);
    rep.observe(&format!("rho max on r >= r_h (h = {h})"), b.rho_max, prov);
    rep.observe(
        &format!("integral of max theta on r >= r_h (h = {h})"),
        b.theta_sup_integral,
        prov,
    );
    Ok(rep)
}

/// `ℰ(t) − ℰ(0) − ∫₀ᵗ ∫ (ρ u f + heat source) r dr dτ` at every recorded time.
pub fn energy_defect_series(traj: &Trajectory, forcing: &Forcing) -> Result<Vec<f64>> {
    let grid = &traj.grid;
    let times = traj.times();
    let mut energy = Vec::with_capacity(times.len());
    let mut work = Vec::with_capacity(times.len());
    for s in &traj.states {
        energy.push(total_energy(s, grid)?);
        work.push(if forcing.is_unforced() {
            0.0
        } else {
            let v: Vec<f64> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &r)| s.rho[i] * s.u[i] * forcing.f.eval(s.t, r) + forcing.heat_source.eval(s.t, r))
                .collect();
            crate::grid::integrate_radial(&v, grid)?
        });
    }
    let cum = cumulative_time_integral(&times, &work);
    Ok(energy.iter().zip(&cum).map(|(e, w)| e - energy[0] - w).collect())
}

/// Energy budget. Without forcing the defect must stay nonpositive up to
/// `1e-8`; with forcing it is reported against `ℰ(0)`.
pub fn energy_budget(traj: &Trajectory, forcing: &Forcing) -> Result<EstimateReport> {
    let defect = energy_defect_series(traj, forcing)?;
    let e0 = total_energy(traj.initial(), &traj.grid)?;
    let worst = defect.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let largest = defect.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let prov = "energy minus work is nonincreasing";
    let mut rep = EstimateReport::new();
    if forcing.is_unforced() {
        rep.upper("max energy defect", worst, 0.0, 1e-8, prov);
    } else {
        rep.observe("max energy defect (forced)", worst, prov);
    }
    rep.observe("max |energy defect| / initial energy", largest / e0, prov);
    Ok(rep)
}

/// Finite union of radial intervals, measured with `r dr` on grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region(pub Vec<(f64, f64)>);

impl Region {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn contains(&self, r: f64) -> bool {
        self.0.iter().any(|&(a, b)| r >= a && r <= b)
    }

    /// `∫_E f r dr` with the grid's weights restricted to nodes in `E`.
    pub fn integrate(&self, f: &[f64], grid: &RadialGrid) -> f64 {
        grid.nodes()
            .iter()
            .zip(grid.weights())
            .zip(f)
            .filter(|((r, _), _)| self.contains(**r))
            .map(|((_, w), v)| w * v)
            .sum()
    }

    /// `|E| = ∫_E r dr`.
    pub fn measure(&self, grid: &RadialGrid) -> f64 {
        self.integrate(&vec![1.0; grid.len()], grid)
    }
}

/// `|∫ ρ ln ρ r dr|`.
pub fn log_mass(rho: &[f64], grid: &RadialGrid) -> Result<f64> {
    let v: Vec<f64> = rho.iter().map(|p| p * p.ln()).collect();
    Ok(crate::grid::integrate_radial(&v, grid)?.abs())
}

/// `∫ ρ |ln ρ| r dr`.
pub fn abs_log_mass(rho: &[f64], grid: &RadialGrid) -> Result<f64> {
    let v: Vec<f64> = rho.iter().map(|p| p * p.ln().abs()).collect();
    crate::grid::integrate_radial(&v, grid)
}

/// `(∫_E ρ r dr, ω(|E|, c))` for the constant `c` given.
pub fn density_modulus(rho: &[f64], region: &Region, grid: &RadialGrid, c: f64) -> Result<(f64, f64)> {
    let mass = region.integrate(rho, grid).abs();
    let m = region.measure(grid);
    if m == 0.0 {
        return Ok((mass, 0.0));
    }
    Ok((mass, omega(m, c)?))
}

/// Smallest `c` with `value ≤ ω(m, c)`.
pub fn fit_omega_constant(value: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    m * g((value / m - 1.0).max(1.0))
}

/// Smallest `c` with `value ≤ c · ω(m, c)^{1/4}`, by bisection.
pub fn fit_quartic_constant(value: f64, m: f64) -> Result<f64> {
    if value <= 0.0 || m <= 0.0 {
        return Ok(0.0);
    }
    let f = |c: f64| -> Result<bool> { Ok(c * omega(m, c)?.powf(0.25) >= value) };
    let mut hi = 1.0;
    while !f(hi)? {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The uniform-integrability quantities on `[b, R]`, with `regions` playing
/// the role of `E(t)` (clipped to `[b, R]`) and the final density used for
/// the log-mass comparison.
pub fn uniform_integrability(traj: &Trajectory, regions: &[Region], b: f64) -> Result<EstimateReport> {
    let grid = &traj.grid;
    let r = grid.nodes();
    let times = traj.times();
    let prov = "uniform integrability";
    let mut rep = EstimateReport::new();

    let sup_terms: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let (mut a, mut l) = (0.0_f64, 0.0_f64);
            for i in (0..r.len()).filter(|&i| r[i] >= b) {
                a = a.max(s.u[i].abs() / s.theta[i].sqrt());
                l = l.max(s.theta[i].max(1.0).ln());
            }
            a + l
        })
        .collect();
    rep.observe(
        &format!("sup-norm integral on [{b}, R]"),
        integrate_time(&times, &sup_terms),
        prov,
    );

    let rho = &traj.last().rho;
    let c_stated = log_mass(rho, grid)?;
    let c_abs = abs_log_mass(rho, grid)?;
    let clipped: Vec<Region> = regions
        .iter()
        .map(|e| {
            Region(
                e.0.iter()
                    .filter_map(|&(lo, hi)| {
                        let lo = lo.max(b);
                        (hi >= lo).then_some((lo, hi))
                    })
                    .collect(),
            )
        })
        .collect();
    let (mut worst_stated, mut worst_abs) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for e in &clipped {
        let (mass, bound) = density_modulus(rho, e, grid, c_stated)?;
        worst_stated = worst_stated.max(mass - bound);
        let (mass, bound) = density_modulus(rho, e, grid, c_abs)?;
        worst_abs = worst_abs.max(mass - bound);
    }
    if !clipped.is_empty() {
        rep.upper(
            "density over E minus omega(|E|, |int rho ln rho|)",
            worst_stated,
            0.0,
            0.0,
            prov,
        );
        rep.upper(
            "density over E minus omega(|E|, int rho |ln rho|)",
            worst_abs,
            0.0,
            0.0,
            prov,
        );
    }

    let (mut c_theta, mut c_kin) = (0.0_f64, 0.0_f64);
    for e in &clipped {
        let mut m = Vec::with_capacity(times.len());
        let mut heat = Vec::with_capacity(times.len());
        let mut kin = Vec::with_capacity(times.len());
        for s in &traj.states {
            m.push(e.integrate(&s.rho, grid));
            let rt: Vec<f64> = s.rho.iter().zip(&s.theta).map(|(a, b)| a * b).collect();
            heat.push(e.integrate(&rt, grid));
            let ru: Vec<f64> = s.rho.iter().zip(&s.u).map(|(a, b)| a * b * b).collect();
            kin.push(e.integrate(&ru, grid));
        }
        let m = integrate_time(&times, &m);
        c_theta = c_theta.max(fit_omega_constant(integrate_time(&times, &heat), m));
        c_kin = c_kin.max(fit_quartic_constant(integrate_time(&times, &kin), m)?);
    }
    rep.observe("fitted C for rho theta over E", c_theta, prov);
    rep.observe("fitted C for rho u^2 over E", c_kin, prov);
    Ok(rep)
}

/// `‖v‖_{L²} / (‖∂_r v‖_{L²} + ∫ ρ|v| dx)` with 2D measure.
pub fn korn_poincare_ratio(v: &[f64], rho: &[f64], grid: &RadialGrid) -> Result<f64> {
    grid.check_len(v)?;
    grid.check_len(rho)?;
    let dv = radial_derivative(v, grid)?;
    let sq = |f: &[f64]| -> f64 { 2.0 * PI * f.iter().zip(grid.weights()).map(|(x, w)| w * x * x).sum::<f64>() };
    let num = sq(v).sqrt();
    let den = sq(&dv).sqrt()
        + 2.0
            * PI
            * rho
                .iter()
                .zip(v)
                .zip(grid.weights())
                .map(|((p, x), w)| w * p * x.abs())
                .sum::<f64>();
    if den == 0.0 {
        return Err(Error::Domain("Korn-Poincare ratio has a zero denominator".into()));
    }
    Ok(num / den)
}

/// The log-embedding inequality at every recorded time.
pub fn log_embedding_check(traj: &Trajectory, q: f64) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new();
    let mut worst = f64::NEG_INFINITY;
    let mut margin_at = 0.0;
    for s in &traj.states {
        let (lq, bound) = log_embedding_bound(&s.theta, &traj.grid, q, 1e-10)?;
        if lq - bound > worst {
            worst = lq - bound;
            margin_at = s.t;
        }
    }
    rep.upper(
        &format!("theta L^{q} minus log-embedding bound (worst at t = {margin_at})"),
        worst,
        0.0,
        0.0,
        "Sobolev embedding",
    );
    Ok(rep)
}

/// `max (u_r^ζ + |u/r|^ζ) / (2^{ζ/2} |∇u|^ζ)` over nodes where `∇u ≠ 0`; at most 1.
pub fn gradient_power_ratio(state: &FlowState, grid: &RadialGrid, zeta: f64) -> Result<f64> {
    let ur = radial_derivative(&state.u, grid)?;
    Ok(grid
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, &r)| {
            let a = ur[i].abs();
            let b = (state.u[i] / r).abs();
            let grad = (a * a + b * b).sqrt();
            (grad > 0.0).then(|| (a.powf(zeta) + b.powf(zeta)) / (2f64.powf(zeta / 2.0) * grad.powf(zeta)))
        })
        .fold(0.0, f64::max))
}

/// `(|∫_E ρ r dr|, ω(|E|, |∫ ρ ln ρ r dr|))`.
pub fn omega_bound_for(rho: &[f64], region: &Region, grid: &RadialGrid) -> Result<(f64, f64)> {
    density_modulus(rho, region, grid, log_mass(rho, grid)?)
}
