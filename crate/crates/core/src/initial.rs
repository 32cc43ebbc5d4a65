//! Mollified initial data on the annulus and the data hypotheses.
//!
//! Each field is sampled on a fine uniform auxiliary grid padded by more than
//! the mollifier width on both sides, convolved with the discrete bump kernel,
//! and interpolated back onto the computational grid.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{total_entropy, total_mass};
use crate::grid::{integrate_radial, FlowState, RadialGrid};
use crate::report::EstimateReport;

/// A radial profile on `[0, R]`.
#[derive(Clone)]
pub enum Profile {
    Uniform(f64),
    /// `base + amplitude · exp(−((r − center)/width)²)`
    Pulse {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `left` for `r < at`, `right` otherwise.
    Jump {
        left: f64,
        right: f64,
        at: f64,
    },
    /// Linear interpolation in a table, constant beyond its ends.
    Tabulated {
        r: Vec<f64>,
        v: Vec<f64>,
    },
    Analytic(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform(v) => write!(f, "Uniform({v})"),
            Self::Pulse {
                base,
                amplitude,
                center,
                width,
            } => write!(f, "Pulse({base}, {amplitude}, {center}, {width})"),
            Self::Jump { left, right, at } => write!(f, "Jump({left}, {right}, {at})"),
            Self::Tabulated { r, .. } => write!(f, "Tabulated({} rows)", r.len()),
            Self::Analytic(_) => write!(f, "Analytic(..)"),
        }
    }
}

impl Profile {
    pub fn analytic<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != v.len() {
            return Err(Error::InitialData(
                "tabulated profile needs >= 2 rows of (r, value)".into(),
            ));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InitialData("tabulated radii must increase strictly".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InitialData("tabulated profile has non-finite values".into()));
        }
        Ok(Self::Tabulated { r, v })
    }

    /// Reads a headered two-column CSV `r,value`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut r = Vec::new();
        let mut v = Vec::new();
        for row in rdr.deserialize() {
            let (a, b): (f64, f64) = row?;
            r.push(a);
            v.push(b);
        }
        Self::tabulated(r, v)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Uniform(v) => *v,
            Self::Pulse {
                base,
                amplitude,
                center,
                width,
            } => {
                let z = (r - center) / width;
                base + amplitude * (-z * z).exp()
            }
            Self::Jump { left, right, at } => {
                if r < *at {
                    *left
                } else {
                    *right
                }
            }
            Self::Tabulated { r: xs, v } => {
                let n = xs.len();
                if r <= xs[0] {
                    return v[0];
                }
                if r >= xs[n - 1] {
                    return v[n - 1];
                }
                let k = xs.partition_point(|&x| x <= r) - 1;
                let s = (r - xs[k]) / (xs[k + 1] - xs[k]);
                v[k] + s * (v[k + 1] - v[k])
            }
            Self::Analytic(f) => f(r),
        }
    }
}

/// User data, hypothesis constant `C0`, target mass and mollifier width.
#[derive(Debug, Clone)]
pub struct InitialDataSpec {
    pub rho0: Profile,
    pub u0: Profile,
    pub theta0: Profile,
    pub c0: f64,
    /// Target `∫ ρ₀ r dr` for the prepared density.
    pub m0: f64,
    pub eps: f64,
    pub delta: f64,
}

impl InitialDataSpec {
    /// Spec with `delta = eps/4`.
    pub fn new(rho0: Profile, u0: Profile, theta0: Profile, c0: f64, m0: f64, eps: f64) -> Self {
        Self {
            rho0,
            u0,
            theta0,
            c0,
            m0,
            eps,
            delta: eps / 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 >= 1.0) {
            return Err(Error::InitialData(format!("C0 >= 1 required, got {}", self.c0)));
        }
        if !(self.m0 > 0.0) {
            return Err(Error::InitialData(format!("M0 > 0 required, got {}", self.m0)));
        }
        if !(self.eps > 0.0 && self.delta > 0.0 && self.delta < self.eps) {
            return Err(Error::InitialData(format!(
                "need 0 < delta < eps, got delta = {}, eps = {}",
                self.delta, self.eps
            )));
        }
        Ok(())
    }
}

/// Normalized discrete bump `exp(−1/(1 − s²))` on `|s| < 1`, with `s = j·spacing/delta`.
pub fn mollifier_kernel(spacing: f64, delta: f64) -> Vec<f64> {
    let m = (delta / spacing).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * m)
        .map(|j| {
            let s = (j as f64 - m as f64) * spacing / delta;
            if s.abs() < 1.0 {
                (-1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

/// Discrete convolution of uniformly spaced samples with the bump of half-width
/// `delta`. The first and last `pad` samples are padding; the result covers
/// the samples in between.
pub fn mollify(samples: &[f64], spacing: f64, delta: f64, pad: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0 && spacing > 0.0) {
        return Err(Error::InitialData("mollifier needs delta > 0 and spacing > 0".into()));
    }
    let kernel = mollifier_kernel(spacing, delta);
    let m = kernel.len() / 2;
    if pad < m || samples.len() < 2 * pad + 1 {
        return Err(Error::InitialData(format!(
            "insufficient padding: kernel half-width {m} samples, padding {pad}"
        )));
    }
    Ok((pad..samples.len() - pad)
        .map(|i| kernel.iter().enumerate().map(|(j, k)| k * samples[i + m - j]).sum())
        .collect())
}

/// Fine uniform grid covering `[eps − pad·h, R + pad·h]`.
struct Padded {
    x: Vec<f64>,
    spacing: f64,
    pad: usize,
}

impl Padded {
    fn new(grid: &RadialGrid, delta: f64) -> Self {
        let span = grid.outer() - grid.eps();
        let target = grid.min_spacing().min(delta / 8.0);
        let cells = (span / target).ceil() as usize;
        let spacing = span / cells as f64;
        let pad = (delta / spacing).ceil() as usize + 1;
        let x = (0..cells + 1 + 2 * pad)
            .map(|j| grid.eps() + (j as f64 - pad as f64) * spacing)
            .collect();
        Self { x, spacing, pad }
    }

    /// Mollifies `f` sampled at the padded points and interpolates to `grid`.
    fn smooth(&self, f: impl Fn(f64) -> f64, grid: &RadialGrid, delta: f64) -> Result<Vec<f64>> {
        let samples: Vec<f64> = self.x.iter().map(|&x| f(x)).collect();
        let inner = mollify(&samples, self.spacing, delta, self.pad)?;
        let xs = &self.x[self.pad..self.x.len() - self.pad];
        Ok(grid
            .nodes()
            .iter()
            .map(|&r| {
                let k = (((r - xs[0]) / self.spacing).floor().max(0.0) as usize).min(xs.len() - 2);
                let s = ((r - xs[k]) / self.spacing).clamp(0.0, 1.0);
                inner[k] + s * (inner[k + 1] - inner[k])
            })
            .collect())
    }
}

/// `∫_a^b f r dr / ∫_a^b r dr` by a fine midpoint rule.
fn weighted_average(f: &Profile, a: f64, b: f64) -> f64 {
    let m = 4096;
    let h = (b - a) / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..m {
        let r = a + (j as f64 + 0.5) * h;
        num += f.eval(r) * r;
        den += r;
    }
    num / den
}

/// Density: extend by its average outside `[eps, R]`, mollify, restrict, and
/// rescale so that `∫ ρ r dr = M0`.
pub fn prepare_density(spec: &InitialDataSpec, grid: &RadialGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    let (eps, outer) = (grid.eps(), grid.outer());
    let avg = weighted_average(&spec.rho0, eps, outer);
    let pad = Padded::new(grid, spec.delta);
    let rho0 = &spec.rho0;
    let smooth = pad.smooth(
        |r| if r < eps || r > outer { avg } else { rho0.eval(r) },
        grid,
        spec.delta,
    )?;
    let mass = integrate_radial(&smooth, grid)?;
    if !(mass > 0.0) {
        return Err(Error::InitialData("mollified density has no mass".into()));
    }
    let scale = spec.m0 / mass;
    let rho: Vec<f64> = smooth.iter().map(|v| v * scale).collect();
    if let Some(i) = rho.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InitialData(format!(
            "prepared density is not positive at node {i}"
        )));
    }
    Ok(rho)
}

/// Velocity: zero on `[0, 2 eps]` and `[R − 2δ, R]`, then mollified.
pub fn prepare_velocity(spec: &InitialDataSpec, grid: &RadialGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    let (eps, outer, delta) = (grid.eps(), grid.outer(), spec.delta);
    let pad = Padded::new(grid, delta);
    let u0 = &spec.u0;
    let mut u = pad.smooth(
        |r| {
            if r <= 2.0 * eps || r >= outer - 2.0 * delta {
                0.0
            } else {
                u0.eval(r)
            }
        },
        grid,
        delta,
    )?;
    let n = u.len();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    Ok(u)
}

/// Temperature: replaced by its average on `[0, 2 eps]` and on `[R − 2δ, R]`
/// (and beyond the ends), then mollified, so it is constant near both ends.
pub fn prepare_temperature(spec: &InitialDataSpec, grid: &RadialGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    let (eps, outer, delta) = (grid.eps(), grid.outer(), spec.delta);
    let inner_avg = weighted_average(&spec.theta0, 0.0, 2.0 * eps);
    let outer_avg = weighted_average(&spec.theta0, outer - 2.0 * delta, outer);
    let pad = Padded::new(grid, delta);
    let th0 = &spec.theta0;
    let theta = pad.smooth(
        |r| {
            if r <= 2.0 * eps {
                inner_avg
            } else if r >= outer - 2.0 * delta {
                outer_avg
            } else {
                th0.eval(r)
            }
        },
        grid,
        delta,
    )?;
    if let Some(i) = theta.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InitialData(format!(
            "prepared temperature is not positive at node {i}"
        )));
    }
    Ok(theta)
}

/// All three prepared fields as the state at `t = 0`.
pub fn prepare_initial_state(spec: &InitialDataSpec, grid: &RadialGrid) -> Result<FlowState> {
    let state = FlowState::new(
        0.0,
        prepare_density(spec, grid)?,
        prepare_velocity(spec, grid)?,
        prepare_temperature(spec, grid)?,
    );
    state.validate(grid)?;
    Ok(state)
}

/// Checks `C0⁻¹ ≤ ρ₀ ≤ C0`, `C0⁻¹ ≤ θ₀`, `∫ ρ₀ S r dr ≤ C0` and the mass.
pub fn validate_initial_data(
    state: &FlowState,
    spec: &InitialDataSpec,
    grid: &RadialGrid,
    k_gas: f64,
) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new();
    let c0 = spec.c0;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let prov = "data hypotheses";
    rep.lower("rho0 min >= 1/C0", min(&state.rho), 1.0 / c0, 0.0, prov);
    rep.upper("rho0 max <= C0", max(&state.rho), c0, 0.0, prov);
    rep.lower("theta0 min >= 1/C0", min(&state.theta), 1.0 / c0, 0.0, prov);
    rep.upper(
        "initial entropy <= C0",
        total_entropy(state, grid, k_gas)?,
        c0,
        0.0,
        prov,
    );
    rep.close(
        "initial mass = M0",
        total_mass(state, grid)?,
        spec.m0,
        1e-10 * spec.m0,
        "mass normalization",
    );
    Ok(rep)
}

/// Serializable description of a registry profile, for configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Uniform {
        value: f64,
    },
    Pulse {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Jump {
        left: f64,
        right: f64,
        at: f64,
    },
    Tabulated {
        path: String,
    },
}

impl ProfileSpec {
    /// Builds the profile; table paths are resolved against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Profile> {
        Ok(match self {
            Self::Uniform { value } => Profile::Uniform(*value),
            Self::Pulse {
                base,
                amplitude,
                center,
                width,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::InitialData("pulse width must be positive".into()));
                }
                Profile::Pulse {
                    base: *base,
                    amplitude: *amplitude,
                    center: *center,
                    width: *width,
                }
            }
            Self::Jump { left, right, at } => Profile::Jump {
                left: *left,
                right: *right,
                at: *at,
            },
            Self::Tabulated { path } => Profile::from_csv(&base_dir.join(path))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::radial_derivative;
    use std::f64::consts::E;

    fn spec(rho0: Profile, u0: Profile, theta0: Profile, m0: f64) -> InitialDataSpec {
        InitialDataSpec::new(rho0, u0, theta0, 10.0, m0, 0.1)
    }

    #[test]
    fn kernel_mass_and_symmetry() {
        let k = mollifier_kernel(0.001, 0.025);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let n = k.len();
        for j in 0..n {
            assert_eq!(k[j], k[n - 1 - j]);
        }
    }

    #[test]
    fn mollify_constants_and_lines() {
        let h = 0.002;
        let pad = 20;
        let c = mollify(&vec![3.0; 200], h, 0.03, pad).unwrap();
        assert!(c.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let line: Vec<f64> = (0..200).map(|j| 2.5 * j as f64 * h).collect();
        let out = mollify(&line, h, 0.03, pad).unwrap();
        for (i, v) in out.iter().enumerate() {
            assert!((v - line[i + pad]).abs() < 1e-10);
        }
        assert!(mollify(&line, h, 0.03, 5).is_err());
    }

    #[test]
    fn mollify_step_keeps_total_and_monotonicity() {
        let h = 0.002;
        let pad = 20;
        let step: Vec<f64> = (0..300).map(|j| if j < 150 { 1.0 } else { 2.0 }).collect();
        // total over a window that contains the whole transition
        let out = mollify(&step, h, 0.03, pad).unwrap();
        let inside: f64 = step[pad..300 - pad].iter().sum();
        let total: f64 = out.iter().sum();
        assert!((total - inside).abs() < 1e-8);
        assert!(out.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn density_rescaled_to_target_mass() {
        let g = RadialGrid::uniform(0.1, 1.0, 181).unwrap();
        let s = spec(Profile::Uniform(1.0), Profile::Uniform(0.0), Profile::Uniform(1.0), 0.5);
        let rho = prepare_density(&s, &g).unwrap();
        for v in &rho {
            assert!((v - 0.5 / 0.495).abs() < 1e-12);
        }
        let s = spec(
            Profile::Jump {
                left: 0.5,
                right: 2.0,
                at: 0.55,
            },
            Profile::Uniform(0.0),
            Profile::Uniform(1.0),
            0.7,
        );
        let rho = prepare_density(&s, &g).unwrap();
        assert!(((integrate_radial(&rho, &g).unwrap() - 0.7) / 0.7).abs() < 1e-10);
        assert!(rho.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn velocity_vanishes_near_both_ends() {
        let g = RadialGrid::uniform(0.1, 1.0, 361).unwrap();
        let s = spec(Profile::Uniform(1.0), Profile::Uniform(1.0), Profile::Uniform(1.0), 0.5);
        let u = prepare_velocity(&s, &g).unwrap();
        for (&r, &v) in g.nodes().iter().zip(&u) {
            if r <= 2.0 * 0.1 - 1.1 * s.delta || r >= 1.0 - 0.9 * s.delta {
                assert_eq!(v, 0.0, "r = {r}");
            }
            if (0.2 + s.delta..=1.0 - 2.0 * s.delta - s.delta).contains(&r) {
                assert!((v - 1.0).abs() < 1e-12, "r = {r}");
            }
        }
        let z = spec(Profile::Uniform(1.0), Profile::Uniform(0.0), Profile::Uniform(1.0), 0.5);
        assert!(prepare_velocity(&z, &g).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn temperature_flat_at_ends() {
        let g = RadialGrid::uniform(0.1, 1.0, 361).unwrap();
        let s = spec(
            Profile::Uniform(1.0),
            Profile::Uniform(0.0),
            Profile::analytic(|r| 1.0 + r),
            0.5,
        );
        let th = prepare_temperature(&s, &g).unwrap();
        let d = radial_derivative(&th, &g).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(*d.last().unwrap(), 0.0);
        assert!(th.iter().all(|&v| v >= 1.0 - 1e-8));
        let c = spec(Profile::Uniform(1.0), Profile::Uniform(0.0), Profile::Uniform(2.0), 0.5);
        assert!(prepare_temperature(&c, &g)
            .unwrap()
            .iter()
            .all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn hypothesis_report() {
        let g = RadialGrid::uniform(1e-6, 1.0, 201).unwrap();
        let s = InitialDataSpec::new(
            Profile::Uniform(1.0),
            Profile::Uniform(0.0),
            Profile::Uniform(1.0),
            2.0,
            0.5,
            0.1,
        );
        let st = FlowState::at_rest(&g, 1.0, 1.0);
        let rep = validate_initial_data(&st, &s, &g, 1.0).unwrap();
        assert_eq!(rep.get("initial entropy <= C0").unwrap().value, 0.0);
        assert!(rep.all_pass());
        let hot = FlowState::at_rest(&g, 1.0, E);
        let rep = validate_initial_data(&hot, &s, &g, 1.0).unwrap();
        assert!((rep.get("initial entropy <= C0").unwrap().value - 0.5 * (E - 2.0)).abs() < 1e-9);
        let dense = FlowState::at_rest(&g, 2.0, 1.0);
        let s15 = InitialDataSpec { c0: 1.5, ..s };
        let rep = validate_initial_data(&dense, &s15, &g, 1.0).unwrap();
        assert!(!rep.get("rho0 max <= C0").unwrap().pass);
        assert!(!rep.hard_pass());
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(Profile::Uniform(1.0), Profile::Uniform(0.0), Profile::Uniform(1.0), 0.5);
        assert!(s.validate().is_ok());
        s.delta = 0.2;
        assert!(s.validate().is_err());
        s.delta = 0.02;
        s.c0 = 0.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let p = Profile::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(1.5), 2.5);
        assert_eq!(p.eval(3.0), 2.0);
        assert!(Profile::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}
