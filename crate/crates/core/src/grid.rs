//! Discrete annulus, the fields living on it, and r-weighted calculus.
//!
//! Every "area" integral in this crate is `∫ f(r) r dr` over `[eps, R]`, with
//! no factor 2π. The Orlicz module applies 2π itself where a genuine 2D
//! measure is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes `eps = r_0 < … < r_{n-1} = R` and trapezoid weights for `∫ f r dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    eps: f64,
    outer: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid on `[eps, R]` with `n` nodes.
    pub fn uniform(eps: f64, outer: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Grid(format!("eps must be > 0, got {eps}")));
        }
        if !(eps < outer) || !outer.is_finite() {
            return Err(Error::Grid(format!("need eps < R, got eps={eps}, R={outer}")));
        }
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {n}")));
        }
        let h = (outer - eps) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| eps + h * i as f64).collect();
        nodes[n - 1] = outer;
        Self::from_nodes(nodes)
    }

    /// Grid from explicit nodes (graded grids near `eps` are allowed).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {n}")));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::Grid(format!("inner radius must be > 0, got {}", nodes[0])));
        }
        if nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::Grid("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Grid(format!("nodes not strictly increasing at index {i}")));
        }
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += half * nodes[i];
            weights[i + 1] += half * nodes[i + 1];
        }
        Ok(Self {
            eps: nodes[0],
            outer: nodes[n - 1],
            nodes,
            weights,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights with the factor `r` folded in.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest node spacing.
    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// `∫_eps^R r dr = (R² − eps²)/2`.
    pub fn area(&self) -> f64 {
        0.5 * (self.outer * self.outer - self.eps * self.eps)
    }

    /// Midpoint radius of the cell `[r_i, r_{i+1}]`.
    pub fn face(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    pub(crate) fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: field.len(),
            });
        }
        Ok(())
    }

    /// Index `i` of the cell `[r_i, r_{i+1}]` containing `r` (clamped).
    pub fn locate(&self, r: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Piecewise-linear interpolation of a nodal field, clamped to `[eps, R]`.
    pub fn interpolate(&self, field: &[f64], r: f64) -> f64 {
        let r = r.clamp(self.eps, self.outer);
        let i = self.locate(r);
        let (r0, r1) = (self.nodes[i], self.nodes[i + 1]);
        let s = (r - r0) / (r1 - r0);
        field[i] + s * (field[i + 1] - field[i])
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}

/// Trapezoid approximation of `∫_eps^R f(r) r dr`.
pub fn integrate_radial(field: &[f64], grid: &RadialGrid) -> Result<f64> {
    grid.check_len(field)?;
    Ok(dot(field, grid.weights()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Second-order three-point derivative: central in the interior, one-sided at
/// the two ends. Exact for quadratics on any node distribution.
pub fn radial_derivative(field: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    grid.check_len(field)?;
    let r = grid.nodes();
    let n = r.len();
    let mut out = vec![0.0; n];
    out[0] = lagrange_slope(&r[0..3], &field[0..3], r[0]);
    for i in 1..n - 1 {
        out[i] = lagrange_slope(&r[i - 1..i + 2], &field[i - 1..i + 2], r[i]);
    }
    out[n - 1] = lagrange_slope(&r[n - 3..n], &field[n - 3..n], r[n - 1]);
    Ok(out)
}

fn lagrange_slope(x: &[f64], f: &[f64], at: f64) -> f64 {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let l0 = ((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2));
    let l2 = ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1));
    // the weights sum to zero; differencing keeps constants exact
    (f[0] - f[1]) * l0 + (f[2] - f[1]) * l2
}

/// Viscosities, heat conduction and gas constant. `nu = lambda + 2 mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub k_gas: f64,
    pub nu: f64,
}

impl PhysParams {
    pub fn new(mu: f64, lambda: f64, kappa: f64, k_gas: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::Param("mu > 0 required".into()));
        }
        if !(mu + lambda >= 0.0) {
            return Err(Error::Param("mu + lambda >= 0 required".into()));
        }
        if !(kappa > 0.0) {
            return Err(Error::Param("kappa > 0 required".into()));
        }
        if !(k_gas > 0.0) {
            return Err(Error::Param("K > 0 required".into()));
        }
        Ok(Self {
            mu,
            lambda,
            kappa,
            k_gas,
            nu: lambda + 2.0 * mu,
        })
    }

    pub fn pressure(&self, rho: f64, theta: f64) -> f64 {
        self.k_gas * rho * theta
    }
}

/// Density, radial velocity and temperature at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
}

impl FlowState {
    pub fn new(t: f64, rho: Vec<f64>, u: Vec<f64>, theta: Vec<f64>) -> Self {
        Self { t, rho, u, theta }
    }

    /// Spatially constant density and temperature at rest.
    pub fn at_rest(grid: &RadialGrid, rho: f64, theta: f64) -> Self {
        let n = grid.len();
        Self::new(0.0, vec![rho; n], vec![0.0; n], vec![theta; n])
    }

    /// Checks lengths, positivity of `rho` and `theta`, and `u = 0` at both ends.
    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        grid.check_len(&self.rho)?;
        grid.check_len(&self.u)?;
        grid.check_len(&self.theta)?;
        for (name, f) in [("rho", &self.rho), ("u", &self.u), ("theta", &self.theta)] {
            if let Some(i) = f.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { field: name, node: i });
            }
        }
        if let Some(i) = self.rho.iter().position(|&x| x <= 0.0) {
            return Err(Error::InitialData(format!("rho <= 0 at node {i}")));
        }
        if let Some(i) = self.theta.iter().position(|&x| x <= 0.0) {
            return Err(Error::InitialData(format!("theta <= 0 at node {i}")));
        }
        let n = self.u.len();
        if self.u[0] != 0.0 || self.u[n - 1] != 0.0 {
            return Err(Error::InitialData("u must vanish at both endpoints".into()));
        }
        Ok(())
    }

    pub fn pressure(&self, params: &PhysParams) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.theta)
            .map(|(&r, &th)| params.pressure(r, th))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &FlowState) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        d(&self.rho, &other.rho)
            .max(d(&self.u, &other.u))
            .max(d(&self.theta, &other.theta))
    }
}

/// Counters accumulated by the solver.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub steps: usize,
    pub floor_rho_hits: usize,
    pub floor_theta_hits: usize,
    /// Steps whose size was set by the advective CFL bound rather than `dt_max`.
    pub cfl_limited_steps: usize,
}

impl StepDiagnostics {
    /// A run that needed the positivity floors is not used to certify estimates.
    pub fn vacuum_contaminated(&self) -> bool {
        self.floor_rho_hits + self.floor_theta_hits > 0
    }
}

/// Recorded states of one run, all on the same grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: PhysParams,
    pub grid: RadialGrid,
    pub states: Vec<FlowState>,
    pub dt_history: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

impl Trajectory {
    pub fn new(params: PhysParams, grid: RadialGrid, initial: FlowState) -> Self {
        Self {
            params,
            grid,
            states: vec![initial],
            dt_history: Vec::new(),
            diagnostics: StepDiagnostics::default(),
        }
    }

    /// Appends a state; times must increase strictly.
    pub fn record(&mut self, state: FlowState) -> Result<()> {
        self.grid.check_len(&state.rho)?;
        if let Some(last) = self.states.last() {
            if !(state.t > last.t) {
                return Err(Error::Domain(format!(
                    "recorded times must increase: {} after {}",
                    state.t, last.t
                )));
            }
        }
        self.states.push(state);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn initial(&self) -> &FlowState {
        &self.states[0]
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectory holds at least one state")
    }
}

/// Trapezoid rule in time over (possibly non-uniform) samples.
pub fn integrate_time(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_time_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(0.0);
    for (t, v) in times.windows(2).zip(values.windows(2)) {
        acc += 0.5 * (t[1] - t[0]) * (v[0] + v[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_spacing_and_area() {
        let g = RadialGrid::uniform(0.1, 1.0, 11).unwrap();
        assert!((g.nodes()[1] - g.nodes()[0] - 0.09).abs() < 1e-15);
        let one = vec![1.0; 11];
        assert!((integrate_radial(&one, &g).unwrap() - 0.495).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::uniform(0.5, 0.5, 11).is_err());
        assert!(RadialGrid::uniform(0.0, 1.0, 11).is_err());
        assert!(RadialGrid::uniform(-0.1, 1.0, 11).is_err());
        assert!(RadialGrid::uniform(0.6, 0.5, 11).is_err());
        assert!(RadialGrid::uniform(0.1, 1.0, 2).is_err());
        assert!(RadialGrid::from_nodes(vec![0.1, 0.3, 0.3, 1.0]).is_err());
    }

    #[test]
    fn unit_quadrature_is_exact_on_graded_grids() {
        let nodes: Vec<f64> = (0..40).map(|i| 0.05 + 0.95 * ((i as f64) / 39.0).powi(2)).collect();
        let g = RadialGrid::from_nodes(nodes).unwrap();
        let one = vec![1.0; g.len()];
        let q = integrate_radial(&one, &g).unwrap();
        assert!(((q - g.area()) / g.area()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_r_and_r_squared() {
        // ∫₀¹ r·r dr = 1/3, ∫₀¹ r²·r dr = 1/4
        let g = RadialGrid::uniform(1e-12, 1.0, 2001).unwrap();
        let f1 = g.map(|r| r);
        let f2 = g.map(|r| r * r);
        assert!((integrate_radial(&f1, &g).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        assert!((integrate_radial(&f2, &g).unwrap() - 0.25).abs() < 1e-6);
        let zero = vec![0.0; g.len()];
        assert_eq!(integrate_radial(&zero, &g).unwrap(), 0.0);
        assert!(integrate_radial(&zero[1..], &g).is_err());
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        let f = |r: f64| (3.0 * r).sin();
        // ∫_{0.2}^{1} sin(3r) r dr, closed form
        let exact = |r: f64| (3.0 * r).sin() / 9.0 - r * (3.0 * r).cos() / 3.0;
        let exact = exact(1.0) - exact(0.2);
        let err = |n| {
            let g = RadialGrid::uniform(0.2, 1.0, n).unwrap();
            (integrate_radial(&g.map(f), &g).unwrap() - exact).abs()
        };
        let slope = (err(41) / err(161)).log2() / 2.0;
        assert!(slope > 1.95, "slope {slope}");
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let g = RadialGrid::uniform(0.1, 1.0, 37).unwrap();
        let d = radial_derivative(&g.map(|r| r * r), &g).unwrap();
        for (r, dr) in g.nodes().iter().zip(&d) {
            assert!((dr - 2.0 * r).abs() < 1e-10);
        }
        let c = radial_derivative(&vec![4.2; g.len()], &g).unwrap();
        assert!(c.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn derivative_of_sine_converges_at_second_order() {
        let err = |n| {
            let g = RadialGrid::uniform(0.1, 1.0, n).unwrap();
            let d = radial_derivative(&g.map(f64::sin), &g).unwrap();
            g.nodes()
                .iter()
                .zip(&d)
                .map(|(r, x)| (x - r.cos()).abs())
                .fold(0.0, f64::max)
        };
        let slope = (err(51) / err(201)).log2() / 2.0;
        assert!(slope > 1.9, "slope {slope}");
    }

    #[test]
    fn interpolation_and_location() {
        let g = RadialGrid::uniform(0.1, 1.0, 10).unwrap();
        let f = g.map(|r| 2.0 * r + 1.0);
        assert!((g.interpolate(&f, 0.55) - 2.1).abs() < 1e-14);
        assert_eq!(g.locate(1.0), 8);
        assert_eq!(g.locate(0.1), 0);
        assert!((g.interpolate(&f, 5.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn params_constraints() {
        assert!(PhysParams::new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, -1.5, 1.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, 0.0, 0.0, 1.0).is_err());
        let p = PhysParams::new(0.7, -0.2, 1.0, 1.0).unwrap();
        assert_eq!(p.nu, -0.2 + 2.0 * 0.7);
    }

    #[test]
    fn trajectory_requires_increasing_time() {
        let g = RadialGrid::uniform(0.1, 1.0, 5).unwrap();
        let p = PhysParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let s = FlowState::at_rest(&g, 1.0, 1.0);
        let mut tr = Trajectory::new(p, g, s.clone());
        assert!(tr.record(s.clone()).is_err());
        let mut s2 = s;
        s2.t = 0.5;
        tr.record(s2).unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.5]);
    }

    #[test]
    fn time_integrals() {
        let t = [0.0, 0.5, 1.0, 2.0];
        let v = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(integrate_time(&t, &v), 2.0);
        assert_eq!(cumulative_time_integral(&t, &v), vec![0.0, 0.5, 1.0, 2.0]);
    }
}
