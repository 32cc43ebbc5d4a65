use serde::{Deserialize, Serialize};

use super::paths::{particle_path, transport_cutoff};
use crate::error::{Error, Result};
use crate::grid::{integrate_time, radial_derivative, RadialGrid, Trajectory};

/// The functionals `A`, `B`, `D` with their sup-in-time and time-integral parts.
///
/// The sup is a maximum over recorded times, hence a lower bound for the
/// continuous supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderTriple {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub a_parts: [f64; 2],
    pub b_parts: [f64; 2],
    pub d_parts: [f64; 2],
}

fn masked_integral(grid: &RadialGrid, from: f64, f: impl Fn(usize) -> f64) -> f64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .filter(|(_, (r, _))| **r >= from)
        .map(|(i, (_, w))| w * f(i))
        .sum()
}

/// Convective derivative `∂_t q + u ∂_r q` at recorded time `k`, with centered
/// differences in time (one-sided at the first and last record).
fn convective(traj: &Trajectory, k: usize, field: fn(&crate::grid::FlowState) -> &Vec<f64>) -> Result<Vec<f64>> {
    let n = traj.states.len();
    let (lo, hi) = match k {
        0 => (0, 1),
        k if k == n - 1 => (n - 2, n - 1),
        k => (k - 1, k + 1),
    };
    let (a, b) = (&traj.states[lo], &traj.states[hi]);
    let dt = b.t - a.t;
    let s = &traj.states[k];
    let q = field(s);
    let q_r = radial_derivative(q, &traj.grid)?;
    Ok((0..q.len())
        .map(|i| (field(b)[i] - field(a)[i]) / dt + s.u[i] * q_r[i])
        .collect())
}

/// `A`, `B`, `D` for mass label `h` and cut-off exponent `p`, on the region
/// `r ≥ r_h(t)` selected node by node.
pub fn higher_order_functionals(traj: &Trajectory, h: f64, p: f64) -> Result<HigherOrderTriple> {
    let n = traj.states.len();
    if n < 3 {
        return Err(Error::Cadence(format!(
            "need at least 3 recorded states to form convective derivatives, got {n}"
        )));
    }
    let grid = &traj.grid;
    let path = particle_path(traj, h)?;
    let cut = transport_cutoff(traj, h, p)?;
    let times = traj.times();
    let (mut sup_a, mut sup_b, mut sup_d) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut int_a, mut int_b, mut int_d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let s = &traj.states[k];
        let sigma = s.t.min(1.0);
        let phi = &cut.phi[k];
        let from = path.radii[k];
        let r = grid.nodes();
        let u_r = radial_derivative(&s.u, grid)?;
        let th_r = radial_derivative(&s.theta, grid)?;
        let u_dot = convective(traj, k, |s| &s.u)?;
        let th_dot = convective(traj, k, |s| &s.theta)?;

        let div2 = masked_integral(grid, from, |i| {
            let d = u_r[i] + s.u[i] / r[i];
            phi[i] * d * d
        });
        sup_a = sup_a.max(sigma * div2);
        int_a[k] = sigma * masked_integral(grid, from, |i| phi[i] * u_dot[i] * u_dot[i]);

        sup_b = sup_b.max(sigma * masked_integral(grid, from, |i| phi[i] * s.theta[i] * s.theta[i]));
        int_b[k] = sigma * masked_integral(grid, from, |i| phi[i] * th_r[i] * th_r[i]);

        let s2 = sigma * sigma;
        sup_d = sup_d.max(s2 * masked_integral(grid, from, |i| phi[i] * phi[i] * th_r[i] * th_r[i]));
        int_d[k] = s2 * masked_integral(grid, from, |i| phi[i] * phi[i] * th_dot[i] * th_dot[i]);
    }
    let a_parts = [sup_a, integrate_time(&times, &int_a)];
    let b_parts = [sup_b, integrate_time(&times, &int_b)];
    let d_parts = [sup_d, integrate_time(&times, &int_d)];
    Ok(HigherOrderTriple {
        a: a_parts[0] + a_parts[1],
        b: b_parts[0] + b_parts[1],
        d: d_parts[0] + d_parts[1],
        a_parts,
        b_parts,
        d_parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::paths::initial_cutoff;
    use crate::grid::{FlowState, PhysParams};

    fn steady(grid: &RadialGrid, theta: Vec<f64>, times: &[f64]) -> Trajectory {
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let n = grid.len();
        let mk = |t| FlowState::new(t, vec![1.0; n], vec![0.0; n], theta.clone());
        let mut tr = Trajectory::new(p, grid.clone(), mk(times[0]));
        for &t in &times[1..] {
            tr.record(mk(t)).unwrap();
        }
        tr
    }

    #[test]
    fn constant_state() {
        let g = RadialGrid::uniform(0.1, 1.0, 181).unwrap();
        let times: Vec<f64> = (0..=12).map(|k| 0.125 * k as f64).collect();
        let tr = steady(&g, vec![2.0; g.len()], &times);
        let hot = higher_order_functionals(&tr, 0.05, 4.0).unwrap();
        assert_eq!(hot.a, 0.0);
        assert_eq!(hot.d, 0.0);
        assert_eq!(hot.b_parts[1], 0.0);
        // σ = 1 from t = 1 on, so B = ∫ φ θ̄² r dr over r ≥ r_h
        let cut = transport_cutoff(&tr, 0.05, 4.0).unwrap();
        let rh = particle_path(&tr, 0.05).unwrap().radii[0];
        let oracle = masked_integral(&g, rh, |i| cut.phi[0][i] * 4.0);
        assert!((hot.b - oracle).abs() < 1e-14);
    }

    #[test]
    fn steady_temperature_profile() {
        let g = RadialGrid::uniform(0.1, 1.0, 721).unwrap();
        let th = g.map(|r| 1.0 + r * r);
        let times: Vec<f64> = (0..=6).map(|k| 0.25 * k as f64).collect();
        let tr = steady(&g, th, &times);
        let hot = higher_order_functionals(&tr, 0.05, 4.0).unwrap();
        // sup σ² ∫ φ² θ_r² r dr with θ_r = 2r, from a fine-quadrature oracle
        let rh = particle_path(&tr, 0.05).unwrap().radii[0];
        let m = 200_000;
        let (a, b) = (rh, 1.0);
        let hq = (b - a) / m as f64;
        let oracle: f64 = (0..m)
            .map(|j| {
                let r = a + (j as f64 + 0.5) * hq;
                let phi = initial_cutoff(r, rh, 4.0);
                phi * phi * 4.0 * r * r * r * hq
            })
            .sum();
        assert!(
            (hot.d_parts[0] - oracle).abs() < 1e-4 * oracle,
            "{} vs {oracle}",
            hot.d_parts[0]
        );
        assert_eq!(hot.d_parts[1], 0.0);
        assert_eq!(hot.a, 0.0);
    }

    #[test]
    fn too_few_states() {
        let g = RadialGrid::uniform(0.1, 1.0, 31).unwrap();
        let tr = steady(&g, vec![1.0; 31], &[0.0, 0.1]);
        assert!(matches!(
            higher_order_functionals(&tr, 0.05, 4.0),
            Err(Error::Cadence(_))
        ));
    }
}
