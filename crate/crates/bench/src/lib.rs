//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use annulus_core::{FlowState, PhysParams, RadialGrid};

pub fn params() -> PhysParams {
    PhysParams::new(0.05, 0.02, 0.1, 1.0).expect("valid parameters")
}

pub fn grid(n: usize) -> RadialGrid {
    RadialGrid::uniform(0.1, 1.0, n).expect("valid grid")
}

/// A smooth state with all three fields varying.
pub fn smooth_state(grid: &RadialGrid) -> FlowState {
    let xi = |r: f64| (r - 0.1) / 0.9;
    let n = grid.len();
    let mut u = grid.map(|r| 0.1 * (PI * xi(r)).sin());
    u[0] = 0.0;
    u[n - 1] = 0.0;
    FlowState::new(
        0.0,
        grid.map(|r| 1.0 + 0.2 * (PI * xi(r)).cos()),
        u,
        grid.map(|r| 1.0 + 0.3 * (PI * xi(r)).cos()),
    )
}
