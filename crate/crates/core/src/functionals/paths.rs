use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{radial_derivative, RadialGrid, Trajectory};

/// Running mass `∫_eps^{r_i} ρ s ds` at every node, cell by cell with the same
/// trapezoid rule as [`crate::grid::integrate_radial`], so the last entry is
/// exactly the total mass.
pub fn cumulative_mass(rho: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    grid.check_len(rho)?;
    let r = grid.nodes();
    let mut out = Vec::with_capacity(r.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..r.len() - 1 {
        acc += 0.5 * (r[i + 1] - r[i]) * (rho[i] * r[i] + rho[i + 1] * r[i + 1]);
        out.push(acc);
    }
    Ok(out)
}

/// The radius where the cumulative mass reaches `h`. Inside a cell the
/// integrand `ρ r` is linear, so the cumulative mass is quadratic and is
/// inverted exactly.
pub fn invert_cumulative_mass(cum: &[f64], rho: &[f64], grid: &RadialGrid, h: f64) -> Result<f64> {
    let total = *cum.last().expect("non-empty grid");
    if !(h > 0.0 && h < total) {
        return Err(Error::Domain(format!("mass label {h} outside (0, {total})")));
    }
    let r = grid.nodes();
    let k = cum.partition_point(|&c| c <= h).clamp(1, r.len() - 1) - 1;
    let dr = r[k + 1] - r[k];
    let g0 = rho[k] * r[k];
    let g1 = rho[k + 1] * r[k + 1];
    let slope = (g1 - g0) / dr;
    let need = h - cum[k];
    // g0 s + slope s²/2 = need, in the cancellation-free form
    let disc = (g0 * g0 + 2.0 * slope * need).max(0.0);
    let s = 2.0 * need / (g0 + disc.sqrt());
    Ok((r[k] + s).clamp(r[k], r[k + 1]))
}

/// Radius `r_h(t)` enclosing the fixed mass `h`, at each recorded time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticlePath {
    pub h: f64,
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
}

pub fn particle_path(traj: &Trajectory, h: f64) -> Result<ParticlePath> {
    let mut radii = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let cum = cumulative_mass(&s.rho, &traj.grid)?;
        radii.push(invert_cumulative_mass(&cum, &s.rho, &traj.grid, h)?);
    }
    Ok(ParticlePath {
        h,
        times: traj.times(),
        radii,
    })
}

/// Largest deviation between the centered time difference of `r_h` and the
/// interpolated velocity `u(t, r_h(t))` over interior recorded times.
pub fn particle_path_slope_error(traj: &Trajectory, path: &ParticlePath) -> Result<f64> {
    let n = path.times.len();
    if n < 3 {
        return Err(Error::Cadence("need at least 3 recorded states".into()));
    }
    let mut worst = 0.0_f64;
    for k in 1..n - 1 {
        let slope = (path.radii[k + 1] - path.radii[k - 1]) / (path.times[k + 1] - path.times[k - 1]);
        let u = traj.grid.interpolate(&traj.states[k].u, path.radii[k]);
        worst = worst.max((slope - u).abs());
    }
    Ok(worst)
}

/// Cut-off `φ` transported by the flow, sampled at the trajectory's recorded times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffField {
    pub p: f64,
    /// `r_h(0)`: `φ₀` vanishes left of it and equals 1 right of `2 r_h(0)`.
    pub r_start: f64,
    pub times: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
}

impl CutoffField {
    /// `max |φ_r| / φ^{(p−1)/p}` over nodes with `φ ≥ floor`, at each time.
    pub fn growth_ratio(&self, grid: &RadialGrid, floor: f64) -> Result<Vec<f64>> {
        let e = (self.p - 1.0) / self.p;
        self.phi
            .iter()
            .map(|phi| {
                let d = radial_derivative(phi, grid)?;
                Ok(phi
                    .iter()
                    .zip(&d)
                    .filter(|(f, _)| **f >= floor)
                    .map(|(f, d)| d.abs() / f.powf(e))
                    .fold(0.0, f64::max))
            })
            .collect()
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Initial cut-off `φ₀(r) = s(ξ)^p`, `ξ = (r − r_h)/r_h`, with `s` the quintic
/// smoothstep; then `φ' = p s' s^{p−1} / r_h ≤ (15p/8r_h) φ^{(p−1)/p}`.
pub fn initial_cutoff(r: f64, r_start: f64, p: f64) -> f64 {
    smoothstep((r - r_start) / r_start).powf(p)
}

/// Solves `φ_t + u φ_r = 0` from `φ₀` along the trajectory by semi-Lagrangian
/// steps between recorded states, with midpoint backtracking and linear
/// interpolation at the feet (so `0 ≤ φ ≤ 1` is preserved).
pub fn transport_cutoff(traj: &Trajectory, h: f64, p: f64) -> Result<CutoffField> {
    if !(p > 2.0) {
        return Err(Error::Domain(format!("cut-off exponent p > 2 required, got {p}")));
    }
    let grid = &traj.grid;
    let s0 = traj.initial();
    let cum = cumulative_mass(&s0.rho, grid)?;
    let r_start = invert_cumulative_mass(&cum, &s0.rho, grid, h)?;
    if 2.0 * r_start >= grid.outer() {
        return Err(Error::Domain(format!(
            "cut-off needs 2 r_h(0) < R, got r_h(0) = {r_start}"
        )));
    }
    let mut phi = grid.map(|r| initial_cutoff(r, r_start, p));
    let mut out = vec![phi.clone()];
    let h_min = grid.min_spacing();
    for k in 0..traj.states.len() - 1 {
        let (a, b) = (&traj.states[k], &traj.states[k + 1]);
        let span = b.t - a.t;
        let umax = a.u.iter().chain(&b.u).fold(0.0_f64, |m, u| m.max(u.abs()));
        let sub = ((umax * span / h_min).ceil() as usize).max(1);
        let dt = span / sub as f64;
        for j in 0..sub {
            let w_mid = (j as f64 + 0.5) / sub as f64;
            let u_mid: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x + w_mid * (y - x)).collect();
            phi = grid
                .nodes()
                .iter()
                .map(|&r| {
                    let half = r - 0.5 * dt * grid.interpolate(&u_mid, r);
                    let foot = r - dt * grid.interpolate(&u_mid, half);
                    grid.interpolate(&phi, foot)
                })
                .collect();
        }
        out.push(phi.clone());
    }
    Ok(CutoffField {
        p,
        r_start,
        times: traj.times(),
        phi: out,
    })
}
