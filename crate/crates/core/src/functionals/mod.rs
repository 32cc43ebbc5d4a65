//! Integral functionals of flow states: mass, energy, entropy, dissipation
//! and the global norms of `u` and `θ`.

mod higher;
mod paths;

pub use higher::{higher_order_functionals, HigherOrderTriple};
pub use paths::{
    cumulative_mass, invert_cumulative_mass, particle_path, particle_path_slope_error, transport_cutoff, CutoffField,
    ParticlePath,
};

use crate::error::{Error, Result};
use crate::grid::{integrate_radial, integrate_time, radial_derivative, FlowState, PhysParams, RadialGrid, Trajectory};
use crate::solver::compute_q;

/// `Ψ(s) = s − ln s − 1`, nonnegative with its only zero at `s = 1`.
pub fn psi(s: f64) -> f64 {
    s - s.ln() - 1.0
}

fn integrate_map<F: Fn(usize) -> f64>(grid: &RadialGrid, f: F) -> Result<f64> {
    let v: Vec<f64> = (0..grid.len()).map(f).collect();
    integrate_radial(&v, grid)
}

/// `∫ ρ r dr`.
pub fn total_mass(state: &FlowState, grid: &RadialGrid) -> Result<f64> {
    integrate_radial(&state.rho, grid)
}

/// `∫ ρ(u²/2 + θ) r dr`.
pub fn total_energy(state: &FlowState, grid: &RadialGrid) -> Result<f64> {
    grid.check_len(&state.u)?;
    grid.check_len(&state.theta)?;
    integrate_map(grid, |i| {
        state.rho[i] * (0.5 * state.u[i] * state.u[i] + state.theta[i])
    })
}

/// Entropy density `S = K Ψ(1/ρ) + Ψ(θ) + u²/2`.
pub fn entropy_density(rho: f64, u: f64, theta: f64, k_gas: f64) -> f64 {
    k_gas * psi(1.0 / rho) + psi(theta) + 0.5 * u * u
}

/// `∫ ρ S r dr`.
pub fn total_entropy(state: &FlowState, grid: &RadialGrid, k_gas: f64) -> Result<f64> {
    grid.check_len(&state.u)?;
    grid.check_len(&state.theta)?;
    integrate_map(grid, |i| {
        state.rho[i] * entropy_density(state.rho[i], state.u[i], state.theta[i], k_gas)
    })
}

/// The two parts `(∫ κ(θ_r/θ)² r dr, ∫ Q/θ r dr)` of the entropy dissipation.
pub fn entropy_dissipation_parts(state: &FlowState, grid: &RadialGrid, params: &PhysParams) -> Result<(f64, f64)> {
    let th_r = radial_derivative(&state.theta, grid)?;
    let q = compute_q(state, params, grid)?;
    let heat = integrate_map(grid, |i| {
        let g = th_r[i] / state.theta[i];
        params.kappa * g * g
    })?;
    let visc = integrate_map(grid, |i| q[i] / state.theta[i])?;
    Ok((heat, visc))
}

/// `∫ [κ(θ_r/θ)² + Q/θ] r dr`.
pub fn entropy_dissipation(state: &FlowState, grid: &RadialGrid, params: &PhysParams) -> Result<f64> {
    let (a, b) = entropy_dissipation_parts(state, grid, params)?;
    Ok(a + b)
}

/// `∫ θ^q r dr`, the per-time building block of the temperature estimate.
pub fn temperature_lq(state: &FlowState, grid: &RadialGrid, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q >= 1 required, got {q}")));
    }
    integrate_map(grid, |i| state.theta[i].powf(q))
}

/// `∫₀ᵀ (∫ θ^q r dr)^{2/q} dt` over the recorded states.
pub fn temperature_lq_accumulated(traj: &Trajectory, q: f64) -> Result<f64> {
    let v = traj
        .states
        .iter()
        .map(|s| temperature_lq(s, &traj.grid, q).map(|x| x.powf(2.0 / q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(integrate_time(&traj.times(), &v))
}

/// `∫ |θ_r| r dr`.
pub fn temperature_gradient_l1(state: &FlowState, grid: &RadialGrid) -> Result<f64> {
    let th_r = radial_derivative(&state.theta, grid)?;
    integrate_map(grid, |i| th_r[i].abs())
}

/// `|∇u|² = u_r² + u²/r²` for the radial field `u(r) x/|x|`.
pub fn grad_u_squared(state: &FlowState, grid: &RadialGrid) -> Result<Vec<f64>> {
    let ur = radial_derivative(&state.u, grid)?;
    Ok((0..grid.len())
        .map(|i| {
            let b = state.u[i] / grid.nodes()[i];
            ur[i] * ur[i] + b * b
        })
        .collect())
}

/// `(∫ (|u_r|^{4/3} + |u/r|^{4/3}) r dr, (∫ u⁴ r dr)^{1/3})`.
pub fn velocity_global_norms(state: &FlowState, grid: &RadialGrid) -> Result<(f64, f64)> {
    let ur = radial_derivative(&state.u, grid)?;
    let p = 4.0 / 3.0;
    let w = integrate_map(grid, |i| {
        ur[i].abs().powf(p) + (state.u[i] / grid.nodes()[i]).abs().powf(p)
    })?;
    let l4 = integrate_map(grid, |i| state.u[i].powi(4))?.cbrt();
    Ok((w, l4))
}

/// `∫ |∂_r ln(1 + θ)|² r dr`.
pub fn log_temp_gradient(state: &FlowState, grid: &RadialGrid) -> Result<f64> {
    let th_r = radial_derivative(&state.theta, grid)?;
    integrate_map(grid, |i| {
        let g = th_r[i] / (1.0 + state.theta[i]);
        g * g
    })
}

/// Value of a scalar functional at every recorded time.
pub fn time_series<F>(traj: &Trajectory, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&FlowState) -> Result<f64>,
{
    traj.states.iter().map(|s| Ok((s.t, f(s)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn disk(n: usize) -> RadialGrid {
        // inner radius small enough that the (0, 1) oracles hold to ~1e-6
        RadialGrid::uniform(1e-4, 1.0, n).unwrap()
    }

    #[test]
    fn mass_energy_entropy_of_uniform_states() {
        let g = disk(2001);
        let s = FlowState::at_rest(&g, 1.0, 1.0);
        assert!((total_mass(&s, &g).unwrap() - 0.5).abs() < 1e-7);
        assert!((total_energy(&s, &g).unwrap() - 0.5).abs() < 1e-7);
        assert_eq!(total_entropy(&s, &g, 1.0).unwrap(), 0.0);
        let s = FlowState::at_rest(&g, 1.0, E);
        assert!((total_entropy(&s, &g, 3.0).unwrap() - 0.5 * (E - 2.0)).abs() < 1e-7);
        assert_eq!(
            entropy_dissipation(&s, &g, &PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn doubling_temperature_doubles_thermal_energy() {
        let g = RadialGrid::uniform(0.1, 1.0, 101).unwrap();
        let rho = g.map(|r| 1.0 + r);
        let th = g.map(|r| 2.0 - r * r);
        let s1 = FlowState::new(0.0, rho.clone(), vec![0.0; 101], th.clone());
        let s2 = FlowState::new(0.0, rho, vec![0.0; 101], th.iter().map(|x| 2.0 * x).collect());
        let e1 = total_energy(&s1, &g).unwrap();
        let e2 = total_energy(&s2, &g).unwrap();
        assert!((e2 - 2.0 * e1).abs() < 1e-15);
    }

    #[test]
    fn dissipation_of_quadratic_temperature() {
        // ∫₀¹ (2r/(1+r²))² r dr = 2 ln 2 − 1
        let g = disk(4001);
        let th = g.map(|r| 1.0 + r * r);
        let s = FlowState::new(0.0, vec![1.0; g.len()], vec![0.0; g.len()], th);
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let (heat, visc) = entropy_dissipation_parts(&s, &g, &p).unwrap();
        assert_eq!(visc, 0.0);
        assert!((heat - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn temperature_lq_values() {
        let g = disk(2001);
        let s = FlowState::at_rest(&g, 1.0, 2.0);
        assert!((temperature_lq(&s, &g, 2.0).unwrap() - 2.0).abs() < 1e-6);
        assert!(temperature_lq(&s, &g, 0.5).is_err());
        // θ = 1 + r²: ∫ (1 + r²)² r dr = 7/6
        let s = FlowState::new(0.0, vec![1.0; 2001], vec![0.0; 2001], g.map(|r| 1.0 + r * r));
        assert!((temperature_lq(&s, &g, 2.0).unwrap() - 7.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn velocity_norms_for_linear_field() {
        let g = disk(4001);
        let s = FlowState::new(0.0, vec![1.0; g.len()], g.nodes().to_vec(), vec![1.0; g.len()]);
        let (w, l4) = velocity_global_norms(&s, &g).unwrap();
        assert!((w - 1.0).abs() < 1e-6);
        assert!((l4 - (1.0f64 / 6.0).cbrt()).abs() < 1e-6);
        assert!(grad_u_squared(&s, &g).unwrap().iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn log_gradient_oracle() {
        // ∫₀¹ (2r/(2+r²))² r dr = 2 ln(3/2) − 2/3 with s = 2 + r²
        let g = disk(4001);
        let s = FlowState::new(0.0, vec![1.0; g.len()], vec![0.0; g.len()], g.map(|r| 1.0 + r * r));
        let exact = 2.0 * (1.5f64).ln() - 2.0 / 3.0;
        assert!((log_temp_gradient(&s, &g).unwrap() - exact).abs() < 1e-6);
        let c = FlowState::at_rest(&g, 1.0, 3.0);
        assert_eq!(log_temp_gradient(&c, &g).unwrap(), 0.0);
    }

    #[test]
    fn psi_is_nonnegative() {
        for k in -40..40 {
            let s = (k as f64 * 0.2).exp();
            assert!(psi(s) >= 0.0);
        }
        assert_eq!(psi(1.0), 0.0);
    }
}
