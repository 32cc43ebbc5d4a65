//! Shrinking-hole study: a family of annulus runs with `eps_j → 0`, their
//! mutual distances away from the hole, and the left edge of the fluid region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{cumulative_mass, invert_cumulative_mass};
use crate::grid::{integrate_time, FlowState, PhysParams, RadialGrid, Trajectory};
use crate::initial::{prepare_initial_state, InitialDataSpec};
use crate::solver::{run, Forcing, SolverConfig};

/// How each member's grid is laid out. Uniform nodes are anchored at `R`, so
/// members with different `eps` share their nodes away from the hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridPolicy {
    Uniform {
        spacing: f64,
    },
    /// Cells grow geometrically from `inner_spacing` at `eps` until they reach
    /// `spacing`.
    Graded {
        spacing: f64,
        inner_spacing: f64,
        ratio: f64,
    },
}

impl GridPolicy {
    pub fn outer_spacing(&self) -> f64 {
        match *self {
            Self::Uniform { spacing } | Self::Graded { spacing, .. } => spacing,
        }
    }

    pub fn inner_spacing(&self) -> f64 {
        match *self {
            Self::Uniform { spacing } => spacing,
            Self::Graded { inner_spacing, .. } => inner_spacing,
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.outer_spacing();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Grid(format!("grid spacing must be positive, got {h}")));
        }
        if let Self::Graded {
            inner_spacing, ratio, ..
        } = *self
        {
            if !(inner_spacing > 0.0 && inner_spacing <= h) {
                return Err(Error::Grid(format!(
                    "need 0 < inner_spacing <= spacing, got {inner_spacing}"
                )));
            }
            if !(ratio > 1.0 && ratio.is_finite()) {
                return Err(Error::Grid(format!("grading ratio must exceed 1, got {ratio}")));
            }
        }
        Ok(())
    }

    pub fn build(&self, eps: f64, outer: f64) -> Result<RadialGrid> {
        self.validate()?;
        if !(eps > 0.0 && eps < outer) {
            return Err(Error::Grid(format!("need 0 < eps < R, got eps={eps}, R={outer}")));
        }
        let h = self.outer_spacing();
        let mut left = vec![eps];
        if let Self::Graded {
            inner_spacing, ratio, ..
        } = *self
        {
            let mut step = inner_spacing;
            while step < h {
                let next = left[left.len() - 1] + step;
                if next > outer - h {
                    break;
                }
                left.push(next);
                step *= ratio;
            }
        }
        let start = left[left.len() - 1];
        // R − k h down to the last node at least h/2 right of `start`
        let mut right = Vec::new();
        let mut k = 0usize;
        loop {
            let r = outer - h * k as f64;
            if r < start + 0.5 * h {
                break;
            }
            right.push(r);
            k += 1;
        }
        right.reverse();
        left.extend(right);
        RadialGrid::from_nodes(left)
    }
}

/// A family of runs sharing data, forcing, parameters and end time.
#[derive(Debug, Clone)]
pub struct ContinuationPlan {
    /// Strictly decreasing inner radii.
    pub eps_sequence: Vec<f64>,
    /// Shared data; its `eps` and `delta` are replaced per member with
    /// `eps_j` and `eps_j / 4`.
    pub data: InitialDataSpec,
    pub forcing: Forcing,
    pub params: PhysParams,
    pub outer: f64,
    pub grid: GridPolicy,
    /// `t_end` is the common final time `T`.
    pub solver: SolverConfig,
    /// Times every member records, in `(0, T]`. `None` keeps the solver's own
    /// output cadence.
    pub output_times: Option<Vec<f64>>,
    /// Mass labels for the vacuum-edge estimate, decreasing.
    pub h_probes: Vec<f64>,
}

impl ContinuationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.eps_sequence.is_empty() {
            return Err(Error::Param("empty eps sequence".into()));
        }
        if let Some(w) = self.eps_sequence.windows(2).find(|w| !(w[1] < w[0])) {
            return Err(Error::Param(format!(
                "eps sequence must decrease strictly: {} then {}",
                w[0], w[1]
            )));
        }
        let smallest = self.eps_sequence[self.eps_sequence.len() - 1];
        let resolvable = self.grid.inner_spacing();
        if !(smallest >= resolvable) {
            return Err(Error::Param(format!(
                "eps = {smallest} is below the grid's inner spacing {resolvable}"
            )));
        }
        if !(self.eps_sequence[0] < self.outer) {
            return Err(Error::Param(format!("eps must be below R = {}", self.outer)));
        }
        self.grid.validate()?;
        self.solver.validate()?;
        if let Some(times) = &self.output_times {
            let t_end = self.solver.t_end;
            let increasing = times.windows(2).all(|w| w[1] > w[0]);
            if times.is_empty() || !increasing || times[0] <= 0.0 || times[times.len() - 1] > t_end {
                return Err(Error::Cadence(format!(
                    "output times must increase within (0, {t_end}]"
                )));
            }
        }
        if self.h_probes.windows(2).any(|w| !(w[1] < w[0])) || self.h_probes.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Param("h probes must be positive and decreasing".into()));
        }
        Ok(())
    }

    /// Data for member `eps` with `delta = eps / 4`.
    pub fn member_data(&self, eps: f64) -> InitialDataSpec {
        let mut spec = self.data.clone();
        spec.eps = eps;
        spec.delta = eps / 4.0;
        spec
    }
}

/// One run of the family; a failed run keeps its error and the others go on.
#[derive(Debug)]
pub struct FamilyMember {
    pub eps: f64,
    pub delta: f64,
    pub outcome: Result<Trajectory>,
}

impl FamilyMember {
    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.outcome.as_ref().ok()
    }
}

/// Runs with recorded states at exactly `times`, by restarting the solver
/// at each output time.
fn run_with_outputs(
    initial: FlowState,
    grid: &RadialGrid,
    params: &PhysParams,
    forcing: &Forcing,
    config: &SolverConfig,
    times: &[f64],
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(*params, grid.clone(), initial.clone());
    let mut state = initial;
    for &t in times {
        let segment = SolverConfig {
            t_end: t - state.t,
            output_every: usize::MAX,
            ..config.clone()
        };
        let part = run(state, grid, params, forcing, &segment)?;
        traj.dt_history.extend(&part.dt_history);
        let d = &mut traj.diagnostics;
        d.steps += part.diagnostics.steps;
        d.floor_rho_hits += part.diagnostics.floor_rho_hits;
        d.floor_theta_hits += part.diagnostics.floor_theta_hits;
        d.cfl_limited_steps += part.diagnostics.cfl_limited_steps;
        state = part.last().clone();
        state.t = t;
        traj.record(state.clone())?;
    }
    Ok(traj)
}

fn run_member(plan: &ContinuationPlan, eps: f64) -> Result<Trajectory> {
    let grid = plan.grid.build(eps, plan.outer)?;
    let initial = prepare_initial_state(&plan.member_data(eps), &grid)?;
    match &plan.output_times {
        Some(times) => run_with_outputs(initial, &grid, &plan.params, &plan.forcing, &plan.solver, times),
        None => run(initial, &grid, &plan.params, &plan.forcing, &plan.solver),
    }
}

/// One trajectory per `eps_j`, run concurrently.
pub fn run_sequence(plan: &ContinuationPlan) -> Result<Vec<FamilyMember>> {
    plan.validate()?;
    Ok(plan
        .eps_sequence
        .par_iter()
        .map(|&eps| FamilyMember {
            eps,
            delta: eps / 4.0,
            outcome: run_member(plan, eps),
        })
        .collect())
}

/// Distances between two members on `[a, R] × [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapDistance {
    pub u_sup: f64,
    pub theta_sup: f64,
    /// `max(u_sup, theta_sup)`.
    pub sup: f64,
    /// `(∫∫ (Δu² + Δθ²) r dr dt)^{1/2}` over the region.
    pub l2: f64,
    /// `max_t sup_r |∫_a^r (ρ_i − ρ_j) s ds|`, a weak-metric stand-in for `ρ`.
    pub rho_cumulative: f64,
}

/// Distances of `(u, θ)` on `[a, R] × [t0, t1]`, with the finer member
/// interpolated onto the coarser member's nodes, at the common recorded times.
pub fn overlap_distance(ti: &Trajectory, tj: &Trajectory, a: f64, t0: f64, t1: f64) -> Result<OverlapDistance> {
    let outer = ti.grid.outer();
    if !(a > ti.grid.eps().max(tj.grid.eps()) && a < outer) {
        return Err(Error::Domain(format!(
            "overlap start {a} must lie above both inner radii and below R"
        )));
    }
    if (tj.grid.outer() - outer).abs() > 1e-12 * outer {
        return Err(Error::Domain("members have different outer radii".into()));
    }
    let in_region = |g: &RadialGrid| g.nodes().iter().filter(|&&r| r >= a).count();
    let (coarse, fine) = if in_region(&ti.grid) <= in_region(&tj.grid) {
        (ti, tj)
    } else {
        (tj, ti)
    };
    let same = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
    let pairs: Vec<(&FlowState, &FlowState)> = coarse
        .states
        .iter()
        .filter(|s| s.t >= t0 - 1e-12 && s.t <= t1 + 1e-12)
        .filter_map(|s| fine.states.iter().find(|o| same(o.t, s.t)).map(|o| (s, o)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Cadence(format!("no common recorded times in [{t0}, {t1}]")));
    }

    let g = &coarse.grid;
    let idx: Vec<usize> = (0..g.len()).filter(|&i| g.nodes()[i] >= a).collect();
    let r: Vec<f64> = idx.iter().map(|&i| g.nodes()[i]).collect();
    let (mut u_sup, mut theta_sup, mut rho_cumulative) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut times = Vec::with_capacity(pairs.len());
    let mut sq = Vec::with_capacity(pairs.len());
    for (c, f) in &pairs {
        let du: Vec<f64> = idx
            .iter()
            .map(|&i| c.u[i] - fine.grid.interpolate(&f.u, g.nodes()[i]))
            .collect();
        let dth: Vec<f64> = idx
            .iter()
            .map(|&i| c.theta[i] - fine.grid.interpolate(&f.theta, g.nodes()[i]))
            .collect();
        let drho: Vec<f64> = idx
            .iter()
            .map(|&i| c.rho[i] - fine.grid.interpolate(&f.rho, g.nodes()[i]))
            .collect();
        u_sup = du.iter().fold(u_sup, |m, v| m.max(v.abs()));
        theta_sup = dth.iter().fold(theta_sup, |m, v| m.max(v.abs()));
        let (mut acc, mut l2) = (0.0, 0.0);
        for k in 0..r.len().saturating_sub(1) {
            let dr = r[k + 1] - r[k];
            acc += 0.5 * dr * (drho[k] * r[k] + drho[k + 1] * r[k + 1]);
            rho_cumulative = rho_cumulative.max(acc.abs());
            let e = |m: usize| (du[m] * du[m] + dth[m] * dth[m]) * r[m];
            l2 += 0.5 * dr * (e(k) + e(k + 1));
        }
        times.push(c.t);
        sq.push(l2);
    }
    let l2 = if times.len() > 1 {
        integrate_time(&times, &sq).sqrt()
    } else {
        sq[0].sqrt()
    };
    Ok(OverlapDistance {
        u_sup,
        theta_sup,
        sup: u_sup.max(theta_sup),
        l2,
        rho_cumulative,
    })
}

/// Edge of the fluid region over time, extrapolated from `r_h` as `h → 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumCurve {
    pub times: Vec<f64>,
    /// Extrapolated edge from the member with the smallest `eps`.
    pub lower: Vec<f64>,
    /// RMS residual of the extrapolation fit at each time.
    pub fit_residual: Vec<f64>,
    /// Extrapolated edge of every member, by member then time.
    pub per_member: Vec<Vec<f64>>,
    pub exponent: f64,
    pub alpha: f64,
    pub holder_constant: f64,
}

/// Fits `r_h = a + b h^p` by least squares and returns `(a, rms residual)`.
fn extrapolate(h: &[f64], radii: &[f64], p: f64) -> (f64, f64) {
    let x: Vec<f64> = h.iter().map(|v| v.powf(p)).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = radii.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(radii).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rms = (x.iter().zip(radii).map(|(xv, y)| (y - a - b * xv).powi(2)).sum::<f64>() / n).sqrt();
    (a, rms)
}

/// Edge estimate at every recorded time of one trajectory.
pub fn vacuum_edge(traj: &Trajectory, h_probes: &[f64], exponent: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if h_probes.len() < 2 {
        return Err(Error::Param("need at least two h probes".into()));
    }
    let grid = &traj.grid;
    let (mut lower, mut residual) = (Vec::new(), Vec::new());
    for s in &traj.states {
        let cum = cumulative_mass(&s.rho, grid)?;
        let radii = h_probes
            .iter()
            .map(|&h| invert_cumulative_mass(&cum, &s.rho, grid, h))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(k) = radii.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Domain(format!(
                "r_h not monotone in h at t = {}: probes {} and {} (grid too coarse for these labels)",
                s.t,
                h_probes[k],
                h_probes[k + 1]
            )));
        }
        let (a, rms) = extrapolate(h_probes, &radii, exponent);
        // no fluid inside the hole, and never right of the smallest probe
        lower.push(a.max(grid.eps()).min(radii[radii.len() - 1]));
        residual.push(rms);
    }
    Ok((lower, residual))
}

/// Vacuum curve of a family; the reported edge comes from the last
/// (smallest `eps`) member that completed.
pub fn estimate_vacuum_boundary(family: &[&Trajectory], h_probes: &[f64], exponent: f64) -> Result<VacuumCurve> {
    let finest = *family.last().ok_or_else(|| Error::Param("empty family".into()))?;
    let mut per_member = Vec::with_capacity(family.len());
    for traj in family {
        per_member.push(vacuum_edge(traj, h_probes, exponent)?.0);
    }
    let (lower, fit_residual) = vacuum_edge(finest, h_probes, exponent)?;
    let times = finest.times();
    let (alpha, holder_constant) = if times.len() >= 16 {
        holder_exponent(&times, &lower)?
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(VacuumCurve {
        times,
        lower,
        fit_residual,
        per_member,
        exponent,
        alpha,
        holder_constant,
    })
}

/// Hölder fit `|f(t) − f(s)| ≈ C |t − s|^α`: for each dyadic lag `2^k`
/// samples, the largest increment over all pairs at that lag is regressed in
/// log-log against the largest time gap. A constant curve gives `(1, 0)`.
pub fn holder_exponent(times: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    if times.len() < 16 {
        return Err(Error::Param(format!("need at least 16 samples, got {}", times.len())));
    }
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lag = 1;
    while lag < times.len() {
        let mut inc = 0.0_f64;
        let mut gap = 0.0_f64;
        for i in 0..times.len() - lag {
            inc = inc.max((values[i + lag] - values[i]).abs());
            gap = gap.max(times[i + lag] - times[i]);
        }
        if inc > 1e-14 * scale && gap > 0.0 {
            xs.push(gap.ln());
            ys.push(inc.ln());
        }
        lag *= 2;
    }
    if xs.len() < 2 {
        return Ok((1.0, 0.0));
    }
    let (c, alpha) = {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        ((my - slope * mx).exp(), slope)
    };
    Ok((alpha, c))
}
