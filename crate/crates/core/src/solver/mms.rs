//! Manufactured solutions: exact fields plus the sources that balance them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_dual::{Dual2_64, Dual64, DualNum};
use serde::{Deserialize, Serialize};

use super::{run, Forcing, SolverConfig, SpaceTimeField};
use crate::error::{Error, Result};
use crate::grid::{integrate_radial, FlowState, PhysParams, RadialGrid, Trajectory};

/// Real or dual number with `f64` parts.
pub trait Scalar: DualNum<Primitive = f64> + Copy {}
impl<T: DualNum<Primitive = f64> + Copy> Scalar for T {}

/// Smooth exact fields, written generically so they can be differentiated
/// with dual numbers.
pub trait ExactSolution: Send + Sync {
    fn rho<D: Scalar>(&self, t: D, r: D) -> D;
    fn u<D: Scalar>(&self, t: D, r: D) -> D;
    fn theta<D: Scalar>(&self, t: D, r: D) -> D;

    fn state_at(&self, t: f64, grid: &RadialGrid) -> FlowState {
        let mut u = grid.map(|r| self.u(t, r));
        let n = u.len();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        FlowState::new(t, grid.map(|r| self.rho(t, r)), u, grid.map(|r| self.theta(t, r)))
    }
}

/// Values and derivatives of the exact fields at one point.
#[derive(Debug, Clone, Copy)]
pub struct LocalJet {
    pub rho: f64,
    pub rho_t: f64,
    pub rho_r: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_r: f64,
    pub u_rr: f64,
    pub theta: f64,
    pub theta_t: f64,
    pub theta_r: f64,
    pub theta_rr: f64,
}

impl LocalJet {
    pub fn of<S: ExactSolution + ?Sized>(sol: &S, t: f64, r: f64) -> Self {
        let tt = Dual64::from_re(t).derivative();
        let rt = Dual64::from(r);
        let ts = Dual2_64::from(t);
        let rs = Dual2_64::from_re(r).derivative();
        let (rho_s, u_s, th_s) = (sol.rho(ts, rs), sol.u(ts, rs), sol.theta(ts, rs));
        Self {
            rho: rho_s.re,
            rho_t: sol.rho(tt, rt).eps,
            rho_r: rho_s.v1,
            u: u_s.re,
            u_t: sol.u(tt, rt).eps,
            u_r: u_s.v1,
            u_rr: u_s.v2,
            theta: th_s.re,
            theta_t: sol.theta(tt, rt).eps,
            theta_r: th_s.v1,
            theta_rr: th_s.v2,
        }
    }

    /// Residuals `(mass, momentum, energy)` of the radial system at radius `r`
    /// with zero force and sources. The momentum residual is per unit volume.
    pub fn residuals(&self, r: f64, p: &PhysParams) -> (f64, f64, f64) {
        let Self {
            rho,
            rho_t,
            rho_r,
            u,
            u_t,
            u_r,
            u_rr,
            theta,
            theta_t,
            theta_r,
            theta_rr,
        } = *self;
        let div = u_r + u / r;
        let mass = rho_t + rho_r * u + rho * div;
        let mom = rho_t * u
            + rho * u_t
            + rho_r * u * u
            + 2.0 * rho * u * u_r
            + rho * u * u / r
            + p.k_gas * (rho_r * theta + rho * theta_r)
            - p.nu * (u_rr + u_r / r - u / (r * r));
        let b = u / r;
        let q = (p.lambda + p.mu) * div * div + p.mu * (u_r - b) * (u_r - b);
        let energy = rho_t * theta
            + rho * theta_t
            + (rho_r * u * theta + rho * u_r * theta + rho * u * theta_r)
            + rho * u * theta / r
            - p.kappa * (theta_rr + theta_r / r)
            + p.k_gas * rho * theta * div
            - q;
        (mass, mom, energy)
    }
}

/// Force and sources that make `sol` an exact solution of the radial system.
///
/// Rejects fields that violate `u = θ_r = 0` at either end of `[eps, outer]`.
pub fn manufactured_residual<S>(sol: Arc<S>, params: &PhysParams, eps: f64, outer: f64) -> Result<Forcing>
where
    S: ExactSolution + 'static,
{
    for t in [0.0, 0.37, 1.0, 2.9] {
        for r in [eps, outer] {
            let jet = LocalJet::of(sol.as_ref(), t, r);
            let scale = 1.0 + jet.theta.abs();
            if jet.u.abs() > 1e-12 || jet.theta_r.abs() > 1e-12 * scale {
                return Err(Error::Domain(format!(
                    "exact fields incompatible with u = theta_r = 0 at r = {r} (t = {t}): u = {:e}, theta_r = {:e}",
                    jet.u, jet.theta_r
                )));
            }
        }
    }
    let p = *params;
    let component = |k: usize| {
        let sol = Arc::clone(&sol);
        SpaceTimeField::analytic(move |t, r| {
            let jet = LocalJet::of(sol.as_ref(), t, r);
            let (m, f, e) = jet.residuals(r, &p);
            match k {
                0 => m,
                1 => f / jet.rho,
                _ => e,
            }
        })
    };
    Ok(Forcing {
        name: "manufactured".into(),
        mass_source: component(0),
        f: component(1),
        heat_source: component(2),
    })
}

/// Constant density and temperature at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFlow {
    pub rho: f64,
    pub theta: f64,
}

impl ExactSolution for ConstantFlow {
    fn rho<D: Scalar>(&self, t: D, _r: D) -> D {
        t * 0.0 + self.rho
    }
    fn u<D: Scalar>(&self, t: D, _r: D) -> D {
        t * 0.0
    }
    fn theta<D: Scalar>(&self, t: D, _r: D) -> D {
        t * 0.0 + self.theta
    }
}

/// Smooth non-trivial flow built from a cumulative mass
/// `m(t, r) = (r² − eps²)/2 + sin(t)·β r sin(πξ)`, `ξ = (r − eps)/(R − eps)`.
///
/// `ρ = m_r / r` and `r ρ u = −m_t`, so the mass equation holds exactly and
/// particle paths are the level sets of `m`. The temperature
/// `1 + γ(1 + sin(2t)/2)·cos(πξ)` is flat at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedFlow {
    pub eps: f64,
    pub outer: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ManufacturedFlow {
    pub fn new(eps: f64, outer: f64) -> Self {
        Self {
            eps,
            outer,
            beta: 0.15,
            gamma: 0.3,
        }
    }

    fn xi<D: Scalar>(&self, r: D) -> D {
        (r - self.eps) / (self.outer - self.eps)
    }

    /// Cumulative mass `∫_eps^r ρ s ds` in closed form.
    pub fn cumulative_mass(&self, t: f64, r: f64) -> f64 {
        let xi = self.xi(r);
        0.5 * (r * r - self.eps * self.eps) + t.sin() * self.beta * r * (PI * xi).sin()
    }
}

impl ExactSolution for ManufacturedFlow {
    fn rho<D: Scalar>(&self, t: D, r: D) -> D {
        let xi = self.xi(r);
        let span = self.outer - self.eps;
        let bracket = (xi * PI).sin() / r + (xi * PI).cos() * (PI / span);
        t.sin() * bracket * self.beta + 1.0
    }

    fn u<D: Scalar>(&self, t: D, r: D) -> D {
        let xi = self.xi(r);
        -(t.cos() * (xi * PI).sin() * self.beta) / self.rho(t, r)
    }

    fn theta<D: Scalar>(&self, t: D, r: D) -> D {
        let xi = self.xi(r);
        let c = (t * 2.0).sin() * 0.5 + 1.0;
        c * (xi * PI).cos() * self.gamma + 1.0
    }
}

/// One row of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsRow {
    pub n: usize,
    pub h: f64,
    pub steps: usize,
    pub err_rho: f64,
    pub err_u: f64,
    pub err_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsStudy {
    pub rows: Vec<MmsRow>,
    pub order_rho: f64,
    pub order_u: f64,
    pub order_theta: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `(∫ (a − b)² r dr)^{1/2}`.
pub fn l2_distance(a: &[f64], b: &[f64], grid: &RadialGrid) -> Result<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok(integrate_radial(&d, grid)?.sqrt())
}

/// Runs the manufactured problem on uniform grids of the given sizes with
/// `dt = dt_per_h · h`, and measures the L² error at `t_end`.
pub fn mms_study<S: ExactSolution + 'static>(
    sol: Arc<S>,
    params: &PhysParams,
    eps: f64,
    outer: f64,
    sizes: &[usize],
    t_end: f64,
    dt_per_h: f64,
) -> Result<(MmsStudy, Vec<Trajectory>)> {
    let forcing = manufactured_residual(Arc::clone(&sol), params, eps, outer)?;
    let mut rows = Vec::new();
    let mut trajs = Vec::new();
    for &n in sizes {
        let (row, traj) = mms_run(
            sol.as_ref(),
            &forcing,
            params,
            eps,
            outer,
            n,
            t_end,
            dt_per_h,
            usize::MAX,
        )?;
        rows.push(row);
        trajs.push(traj);
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let order = |f: fn(&MmsRow) -> f64| loglog_slope(&hs, &rows.iter().map(f).collect::<Vec<_>>());
    let study = MmsStudy {
        order_rho: order(|r| r.err_rho),
        order_u: order(|r| r.err_u),
        order_theta: order(|r| r.err_theta),
        rows,
    };
    Ok((study, trajs))
}

/// A single manufactured run; `output_every` controls the recorded cadence.
#[allow(clippy::too_many_arguments)]
pub fn mms_run<S: ExactSolution>(
    sol: &S,
    forcing: &Forcing,
    params: &PhysParams,
    eps: f64,
    outer: f64,
    n: usize,
    t_end: f64,
    dt_per_h: f64,
    output_every: usize,
) -> Result<(MmsRow, Trajectory)> {
    let grid = RadialGrid::uniform(eps, outer, n)?;
    let h = grid.min_spacing();
    let config = SolverConfig {
        cfl: 0.9,
        dt_max: dt_per_h * h,
        t_end,
        output_every,
        ..SolverConfig::default()
    };
    let traj = run(sol.state_at(0.0, &grid), &grid, params, forcing, &config)?;
    let last = traj.last();
    let exact = sol.state_at(last.t, &grid);
    let row = MmsRow {
        n,
        h,
        steps: traj.diagnostics.steps,
        err_rho: l2_distance(&last.rho, &exact.rho, &grid)?,
        err_u: l2_distance(&last.u, &exact.u, &grid)?,
        err_theta: l2_distance(&last.theta, &exact.theta, &grid)?,
    };
    Ok((row, traj))
}
