use serde::{Deserialize, Serialize};

use super::testfn::{TestFunction, WeakForm};
use crate::error::Result;
use crate::grid::{integrate_time, radial_derivative, FlowState, RadialGrid, Trajectory};
use crate::solver::Forcing;

/// Which terms enter the momentum identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MomentumTerms {
    #[default]
    Full,
    /// Drops `ν ∫∫ (u_r + u/r)(ψ_r + ψ/r) r dr dt`.
    WithoutViscosity,
}

/// Radial form of the viscous energy flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EnergyFlux {
    /// `κ θ_r + ν u u_r + λ u²/r`, the radial component of `κ∇θ + S u`.
    #[default]
    Radial,
    /// `κ θ_r + ν u u_r + μ u²/r`, the radial reduction of the flux written
    /// with `μ (div u) u + λ (∇u) u`, which differs from `S u` unless `μ = λ`.
    SwappedViscosities,
}

/// Coefficients `(a, b, c)` of an integrand `(a ψ + b ψ_t + c ψ_r) r` at one node.
type Coefficients = (f64, f64, f64);

const GAUSS: [(f64, f64); 6] = [
    (-0.932_469_514_203_152, 0.171_324_492_379_170),
    (-0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (-0.238_619_186_083_197, 0.467_913_934_572_691),
    (0.238_619_186_083_197, 0.467_913_934_572_691),
    (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (0.932_469_514_203_152, 0.171_324_492_379_170),
];

/// `∫ (a ψ + b ψ_t + c ψ_r) r dr` at time `t`, with `a r`, `b r`, `c r`
/// linear in each cell and `ψ` evaluated exactly at Gauss points. For
/// `ψ ≡ 1` this is the trapezoid rule of the grid.
fn pair_integral(grid: &RadialGrid, tf: &TestFunction, t: f64, coef: &[Coefficients]) -> f64 {
    let r = grid.nodes();
    let mut total = 0.0;
    for k in 0..r.len() - 1 {
        let (r0, r1) = (r[k], r[k + 1]);
        let (a0, b0, c0) = coef[k];
        let (a1, b1, c1) = coef[k + 1];
        let half = 0.5 * (r1 - r0);
        for &(x, w) in &GAUSS {
            let s = 0.5 * (1.0 + x);
            let rr = r0 + s * (r1 - r0);
            let lin = |v0: f64, v1: f64| (1.0 - s) * v0 * r0 + s * v1 * r1;
            let (psi, psi_t, psi_r) = tf.eval(t, rr);
            total += half * w * (lin(a0, a1) * psi + lin(b0, b1) * psi_t + lin(c0, c1) * psi_r);
        }
    }
    total
}

/// `∫ ψ(t_last) d r dr − ∫ ψ(t_first) d r dr` for a per-node density `d`.
fn endpoint_difference(traj: &Trajectory, tf: &TestFunction, density: impl Fn(&FlowState, usize) -> f64) -> f64 {
    let grid = &traj.grid;
    let at = |s: &FlowState| {
        let coef: Vec<Coefficients> = (0..grid.len()).map(|i| (density(s, i), 0.0, 0.0)).collect();
        pair_integral(grid, tf, s.t, &coef)
    };
    at(traj.last()) - at(traj.initial())
}

/// Per-node integrand context at one recorded time.
struct Slice<'a> {
    s: &'a FlowState,
    r: &'a [f64],
    u_r: Vec<f64>,
    theta_r: Vec<f64>,
}

fn space_time(
    traj: &Trajectory,
    tf: &TestFunction,
    mut integrand: impl FnMut(&Slice, usize) -> Coefficients,
) -> Result<f64> {
    let grid: &RadialGrid = &traj.grid;
    let mut per_time = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let slice = Slice {
            s,
            r: grid.nodes(),
            u_r: radial_derivative(&s.u, grid)?,
            theta_r: radial_derivative(&s.theta, grid)?,
        };
        let coef: Vec<Coefficients> = (0..grid.len()).map(|i| integrand(&slice, i)).collect();
        per_time.push(pair_integral(grid, tf, s.t, &coef));
    }
    Ok(integrate_time(&traj.times(), &per_time))
}

/// Smallest radius where the density exceeds `1e-8` times its mean, over
/// all recorded times: the left end of the observed fluid region.
pub fn fluid_edge(traj: &Trajectory) -> f64 {
    let grid = &traj.grid;
    traj.states
        .iter()
        .map(|s| {
            let mean = s.rho.iter().sum::<f64>() / s.rho.len() as f64;
            let k = s.rho.iter().position(|&v| v >= 1e-8 * mean).unwrap_or(0);
            grid.nodes()[k]
        })
        .fold(grid.eps(), f64::max)
}

/// `|∫ρψ r dr|_{t₀}^{t₁} − ∫∫(ρψ_t + ρuψ_r + m ψ) r dr dt|` over the recorded
/// span, with `m` the forcing's mass source.
pub fn weak_residual_mass(traj: &Trajectory, forcing: &Forcing, tf: &TestFunction) -> Result<f64> {
    let grid = &traj.grid;
    tf.check_support(WeakForm::Mass, grid.eps(), grid.outer(), grid.eps(), 0.0)?;
    let boundary = endpoint_difference(traj, tf, |s, i| s.rho[i]);
    let volume = space_time(traj, tf, |c, i| {
        let rho = c.s.rho[i];
        (forcing.mass_source.eval(c.s.t, c.r[i]), rho, rho * c.s.u[i])
    })?;
    Ok((boundary - volume).abs())
}

/// Residual of the radial momentum identity for `ψ` vanishing at both ends.
pub fn weak_residual_momentum(
    traj: &Trajectory,
    forcing: &Forcing,
    tf: &TestFunction,
    terms: MomentumTerms,
) -> Result<f64> {
    let grid = &traj.grid;
    let p = traj.params;
    tf.check_support(WeakForm::Momentum, grid.eps(), grid.outer(), grid.eps(), 0.0)?;
    let boundary = endpoint_difference(traj, tf, |s, i| s.rho[i] * s.u[i]);
    let viscous = matches!(terms, MomentumTerms::Full);
    let volume = space_time(traj, tf, |c, i| {
        let (rho, u, theta, r) = (c.s.rho[i], c.s.u[i], c.s.theta[i], c.r[i]);
        // the (ψ_r + ψ/r) factor splits into a ψ_r part and a ψ/r part
        let mut sym = p.pressure(rho, theta);
        if viscous {
            sym -= p.nu * (c.u_r[i] + u / r);
        }
        (rho * forcing.f.eval(c.s.t, r) + sym / r, rho * u, rho * u * u + sym)
    })?;
    Ok((boundary - volume).abs())
}

/// Residual of the total-energy identity for `ψ` supported `eta` right of the
/// fluid region's left edge.
pub fn weak_residual_energy(
    traj: &Trajectory,
    forcing: &Forcing,
    tf: &TestFunction,
    eta: f64,
    flux: EnergyFlux,
) -> Result<f64> {
    let grid = &traj.grid;
    let p = traj.params;
    tf.check_support(WeakForm::Energy, grid.eps(), grid.outer(), fluid_edge(traj), eta)?;
    let boundary = endpoint_difference(traj, tf, |s, i| s.rho[i] * (0.5 * s.u[i] * s.u[i] + s.theta[i]));
    let geometric = match flux {
        EnergyFlux::Radial => p.lambda,
        EnergyFlux::SwappedViscosities => p.mu,
    };
    let volume = space_time(traj, tf, |c, i| {
        let (rho, u, theta, r, t) = (c.s.rho[i], c.s.u[i], c.s.theta[i], c.r[i], c.s.t);
        let e = rho * (0.5 * u * u + theta);
        let diffusive = p.kappa * c.theta_r[i] + p.nu * u * c.u_r[i] + geometric * u * u / r;
        let source = rho * u * forcing.f.eval(t, r) + forcing.heat_source.eval(t, r)
            - 0.5 * u * u * forcing.mass_source.eval(t, r);
        (source, e, (e + p.pressure(rho, theta)) * u - diffusive)
    })?;
    Ok((boundary - volume).abs())
}
