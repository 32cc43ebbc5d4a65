//! Operator-split finite-volume solver for the radial system on a fixed annulus.
//!
//! Nodes carry all three fields; the dual cell around node `i` has volume
//! `grid.weights()[i]` (the trapezoid weight of `∫ · r dr`), and faces sit at
//! the midpoints between nodes. Mass and `ρθ` are transported by conservative
//! upwind fluxes `r_f u_f q_upwind`, so the boundary fluxes vanish and the
//! total mass telescopes exactly.

mod field;
pub mod mms;
mod tridiag;

use serde::{Deserialize, Serialize};

pub use field::{Forcing, SpaceTimeField, TabulatedField};
pub use tridiag::solve_tridiagonal;

use crate::error::{Error, Result};
use crate::grid::{radial_derivative, FlowState, PhysParams, RadialGrid, Trajectory};

/// Identifier of the discretization. Only one is shipped; it is recorded in
/// manifests so that outputs stay attributable if another is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    SplitUpwindImplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub floor_rho: f64,
    pub floor_theta: f64,
    /// Record every `output_every` steps (the final state is always recorded).
    pub output_every: usize,
    pub scheme: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_max: 1e-2,
            t_end: 1.0,
            floor_rho: 1e-13,
            floor_theta: 1e-13,
            output_every: 10,
            scheme: Scheme::SplitUpwindImplicit,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::Param("cfl must lie in (0, 0.9]".into()));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::Param("dt_max > 0 required".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Param("t_end > 0 required".into()));
        }
        for (name, v) in [("floor_rho", self.floor_rho), ("floor_theta", self.floor_theta)] {
            if !(v > 0.0 && v <= 1e-10) {
                return Err(Error::Param(format!("{name} must lie in (0, 1e-10]")));
            }
        }
        if self.output_every == 0 {
            return Err(Error::Param("output_every >= 1 required".into()));
        }
        Ok(())
    }
}

/// Viscous heating in the manifestly nonnegative form
/// `(λ + μ)(u_r + u/r)² + μ(u_r − u/r)²`, which equals
/// `λ(u_r + u/r)² + 2μ(u_r² + u²/r²)`.
pub fn compute_q(state: &FlowState, params: &PhysParams, grid: &RadialGrid) -> Result<Vec<f64>> {
    let ur = radial_derivative(&state.u, grid)?;
    Ok(q_from_parts(&ur, &state.u, grid.nodes(), params))
}

fn q_from_parts(ur: &[f64], u: &[f64], r: &[f64], params: &PhysParams) -> Vec<f64> {
    ur.iter()
        .zip(u)
        .zip(r)
        .map(|((&a, &u), &r)| {
            let b = u / r;
            (params.lambda + params.mu) * (a + b) * (a + b) + params.mu * (a - b) * (a - b)
        })
        .collect()
}

/// The same quantity written as `ν(u_r + u/r)² − (2μ/r)(u²)_r`, with `(u²)_r`
/// differentiated numerically. Agrees with [`compute_q`] up to discretization error.
pub fn compute_q_divergence_form(state: &FlowState, params: &PhysParams, grid: &RadialGrid) -> Result<Vec<f64>> {
    let ur = radial_derivative(&state.u, grid)?;
    let u2: Vec<f64> = state.u.iter().map(|u| u * u).collect();
    let u2r = radial_derivative(&u2, grid)?;
    Ok((0..grid.len())
        .map(|i| {
            let r = grid.nodes()[i];
            let div = ur[i] + state.u[i] / r;
            params.nu * div * div - 2.0 * params.mu / r * u2r[i]
        })
        .collect())
}

/// Advective time step `min(cfl·h_min / max(|u| + √(Kθ)), dt_max)` and whether
/// the CFL bound (rather than the cap) was binding.
pub fn cfl_dt(state: &FlowState, params: &PhysParams, grid: &RadialGrid, config: &SolverConfig) -> (f64, bool) {
    let speed = state
        .u
        .iter()
        .zip(&state.theta)
        .map(|(u, th)| u.abs() + (params.k_gas * th.max(0.0)).sqrt())
        .fold(0.0_f64, f64::max);
    if speed <= 0.0 {
        return (config.dt_max, false);
    }
    let dt = config.cfl * grid.min_spacing() / speed;
    if dt < config.dt_max {
        (dt, true)
    } else {
        (config.dt_max, false)
    }
}

/// Result of a single step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: FlowState,
    pub floor_rho_hits: usize,
    pub floor_theta_hits: usize,
}

/// Grid geometry reused across steps.
#[derive(Debug, Clone)]
struct Stepper<'a> {
    grid: &'a RadialGrid,
    params: &'a PhysParams,
    forcing: &'a Forcing,
    config: &'a SolverConfig,
    face_r: Vec<f64>,
    spacing: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &'a RadialGrid, params: &'a PhysParams, forcing: &'a Forcing, config: &'a SolverConfig) -> Self {
        let r = grid.nodes();
        let face_r = (0..r.len() - 1).map(|k| grid.face(k)).collect();
        let spacing = r.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            grid,
            params,
            forcing,
            config,
            face_r,
            spacing,
        }
    }

    /// Conservative upwind fluxes `r_f u_f q_up` on interior faces.
    fn fluxes(&self, u_face: &[f64], q: &[f64]) -> Vec<f64> {
        u_face
            .iter()
            .enumerate()
            .map(|(k, &uf)| self.face_r[k] * uf * if uf >= 0.0 { q[k] } else { q[k + 1] })
            .collect()
    }

    fn divergence(&self, flux: &[f64], i: usize) -> f64 {
        let n = self.grid.len();
        let right = if i + 1 < n { flux[i] } else { 0.0 };
        let left = if i > 0 { flux[i - 1] } else { 0.0 };
        (right - left) / self.grid.weights()[i]
    }

    fn step(&self, s: &FlowState, dt: f64) -> Result<StepOutcome> {
        let n = self.grid.len();
        let r = self.grid.nodes();
        let w = self.grid.weights();
        let p = self.params;
        let t = s.t;
        let mut floor_rho_hits = 0;
        let mut floor_theta_hits = 0;

        let u_face: Vec<f64> = s.u.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

        // (i) mass
        let mass_flux = self.fluxes(&u_face, &s.rho);
        let mut rho = vec![0.0; n];
        for i in 0..n {
            let mut v = s.rho[i] - dt * self.divergence(&mass_flux, i);
            if !self.forcing.mass_source.is_zero() {
                v += dt * self.forcing.mass_source.eval(t, r[i]);
            }
            if v < self.config.floor_rho {
                floor_rho_hits += 1;
                v = self.config.floor_rho;
            }
            rho[i] = v;
        }
        check_finite(&rho, "rho")?;

        // (ii) momentum advection, pressure gradient, force
        let pressure: Vec<f64> = s.rho.iter().zip(&s.theta).map(|(&a, &b)| p.pressure(a, b)).collect();
        let mom: Vec<f64> = s.rho.iter().zip(&s.u).map(|(a, b)| a * b).collect();
        let mom_flux = self.fluxes(&u_face, &mom);
        let mut u_star = vec![0.0; n];
        for i in 1..n - 1 {
            let mut m = mom[i]
                - dt * self.divergence(&mom_flux, i)
                - dt * (pressure[i + 1] - pressure[i - 1]) / (r[i + 1] - r[i - 1]);
            if !self.forcing.f.is_zero() {
                m += dt * s.rho[i] * self.forcing.f.eval(t, r[i]);
            }
            u_star[i] = m / rho[i];
        }

        // (iii) implicit viscosity ν((r u)_r / r)_r on interior nodes
        let u = if n > 2 {
            let m = n - 2;
            let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            for i in 1..n - 1 {
                let half_span = 0.5 * (r[i + 1] - r[i - 1]);
                let cr = p.nu / (half_span * self.spacing[i] * self.face_r[i]);
                let cl = p.nu / (half_span * self.spacing[i - 1] * self.face_r[i - 1]);
                let k = i - 1;
                di[k] = rho[i] / dt + (cr + cl) * r[i];
                up[k] = -cr * r[i + 1];
                lo[k] = -cl * r[i - 1];
                rhs[k] = rho[i] / dt * u_star[i];
            }
            let inner = solve_tridiagonal(&lo, &di, &up, &rhs)?;
            let mut u = Vec::with_capacity(n);
            u.push(0.0);
            u.extend(inner);
            u.push(0.0);
            u
        } else {
            vec![0.0; n]
        };
        check_finite(&u, "u")?;

        // (iv) ρθ transport, compression work with the new velocity, heating
        let ur = radial_derivative(&u, self.grid)?;
        let q = q_from_parts(&ur, &u, r, p);
        let energy: Vec<f64> = s.rho.iter().zip(&s.theta).map(|(a, b)| a * b).collect();
        let energy_flux = self.fluxes(&u_face, &energy);
        let mut theta_star = vec![0.0; n];
        for i in 0..n {
            let div = ur[i] + u[i] / r[i];
            let mut e = energy[i] - dt * self.divergence(&energy_flux, i) - dt * pressure[i] * div + dt * q[i];
            if !self.forcing.heat_source.is_zero() {
                e += dt * self.forcing.heat_source.eval(t, r[i]);
            }
            let mut th = e / rho[i];
            if th < self.config.floor_theta {
                floor_theta_hits += 1;
                th = self.config.floor_theta;
            }
            theta_star[i] = th;
        }

        // (v) implicit conduction with zero-flux ends, in conservative form
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let a = w[i] * rho[i] / dt;
            let cr = if i + 1 < n {
                p.kappa * self.face_r[i] / self.spacing[i]
            } else {
                0.0
            };
            let cl = if i > 0 {
                p.kappa * self.face_r[i - 1] / self.spacing[i - 1]
            } else {
                0.0
            };
            di[i] = a + cr + cl;
            up[i] = -cr;
            lo[i] = -cl;
            // solved for the increment so that flat profiles stay exactly flat
            let right = if i + 1 < n {
                cr * (theta_star[i + 1] - theta_star[i])
            } else {
                0.0
            };
            let left = if i > 0 {
                cl * (theta_star[i - 1] - theta_star[i])
            } else {
                0.0
            };
            rhs[i] = right + left;
        }
        let increment = solve_tridiagonal(&lo, &di, &up, &rhs)?;
        let mut theta: Vec<f64> = theta_star.iter().zip(&increment).map(|(a, b)| a + b).collect();
        for th in &mut theta {
            if *th < self.config.floor_theta {
                floor_theta_hits += 1;
                *th = self.config.floor_theta;
            }
        }
        check_finite(&theta, "theta")?;

        Ok(StepOutcome {
            state: FlowState::new(t + dt, rho, u, theta),
            floor_rho_hits,
            floor_theta_hits,
        })
    }
}

fn check_finite(v: &[f64], field: &'static str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(node) => Err(Error::NonFinite { field, node }),
        None => Ok(()),
    }
}

/// One split step of size `dt` from `state`.
///
/// Sub-steps, in order: upwind mass update; momentum advection, centered
/// pressure gradient and force; backward-Euler viscosity; `ρθ` transport with
/// compression work and viscous heating; backward-Euler conduction.
pub fn step(
    state: &FlowState,
    grid: &RadialGrid,
    params: &PhysParams,
    forcing: &Forcing,
    dt: f64,
    config: &SolverConfig,
) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Param(format!("time step must be positive, got {dt}")));
    }
    grid.check_len(&state.rho)?;
    Stepper::new(grid, params, forcing, config).step(state, dt)
}

/// Integrates from `initial` to `config.t_end`. The final step is shortened
/// so the run ends exactly at `t_end`.
pub fn run(
    initial: FlowState,
    grid: &RadialGrid,
    params: &PhysParams,
    forcing: &Forcing,
    config: &SolverConfig,
) -> Result<Trajectory> {
    config.validate()?;
    initial.validate(grid)?;
    let stepper = Stepper::new(grid, params, forcing, config);
    let t0 = initial.t;
    let t_end = t0 + config.t_end;
    let mut traj = Trajectory::new(*params, grid.clone(), initial.clone());
    let mut state = initial;
    let mut since_output = 0;
    while state.t < t_end {
        let (mut dt, limited) = cfl_dt(&state, params, grid, config);
        let remaining = t_end - state.t;
        let last = dt >= remaining * (1.0 - 1e-12);
        if last {
            dt = remaining;
        }
        let t_fail = state.t;
        let out = stepper.step(&state, dt).map_err(|e| Error::Step {
            t: t_fail,
            source: Box::new(e),
        })?;
        state = out.state;
        if last {
            state.t = t_end;
        }
        let d = &mut traj.diagnostics;
        d.steps += 1;
        d.floor_rho_hits += out.floor_rho_hits;
        d.floor_theta_hits += out.floor_theta_hits;
        if limited {
            d.cfl_limited_steps += 1;
        }
        traj.dt_history.push(dt);
        since_output += 1;
        if last || since_output == config.output_every {
            traj.record(state.clone())?;
            since_output = 0;
        }
        if last {
            break;
        }
    }
    Ok(traj)
}
