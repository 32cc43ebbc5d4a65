use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{integrate_radial, RadialGrid};

type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A scalar function of `(t, r)`.
#[derive(Clone, Default)]
pub enum SpaceTimeField {
    #[default]
    Zero,
    Analytic(FieldFn),
    Tabulated(TabulatedField),
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic(_) => write!(f, "Analytic(..)"),
            Self::Tabulated(t) => write!(f, "Tabulated({}x{})", t.times.len(), t.radii.len()),
        }
    }
}

impl SpaceTimeField {
    pub fn analytic<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn eval(&self, t: f64, r: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Analytic(f) => f(t, r),
            Self::Tabulated(tab) => tab.eval(t, r),
        }
    }

    pub fn sample(&self, t: f64, grid: &RadialGrid) -> Vec<f64> {
        match self {
            Self::Zero => vec![0.0; grid.len()],
            _ => grid.map(|r| self.eval(t, r)),
        }
    }
}

/// Values on a `(t, r)` lattice, bilinear in between and clamped outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedField {
    times: Vec<f64>,
    radii: Vec<f64>,
    /// Row-major: `values[it * radii.len() + ir]`.
    values: Vec<f64>,
}

impl TabulatedField {
    pub fn new(times: Vec<f64>, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || radii.len() < 2 {
            return Err(Error::Domain("tabulated field needs >= 1 time and >= 2 radii".into()));
        }
        if values.len() != times.len() * radii.len() {
            return Err(Error::LengthMismatch {
                expected: times.len() * radii.len(),
                got: values.len(),
            });
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&times) || !increasing(&radii) {
            return Err(Error::Domain("tabulated axes must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("tabulated field has non-finite entries".into()));
        }
        Ok(Self { times, radii, values })
    }

    /// Builds a table from unordered `(t, r, value)` triples on a full lattice.
    pub fn from_triples(mut rows: Vec<(f64, f64, f64)>) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        times.dedup();
        let mut radii: Vec<f64> = rows.iter().map(|r| r.1).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let values = rows.iter().map(|r| r.2).collect();
        Self::new(times, radii, values)
    }

    pub fn eval(&self, t: f64, r: f64) -> f64 {
        let (it, st) = bracket(&self.times, t);
        let (ir, sr) = bracket(&self.radii, r);
        let nr = self.radii.len();
        let at = |i: usize, j: usize| self.values[i * nr + j];
        let row = |i: usize| at(i, ir) + sr * (at(i, ir + 1) - at(i, ir));
        if self.times.len() == 1 {
            return row(0);
        }
        row(it) + st * (row(it + 1) - row(it))
    }
}

fn bracket(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if n == 1 {
        return (0, 0.0);
    }
    let x = x.clamp(axis[0], axis[n - 1]);
    let k = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    (k, (x - axis[k]) / (axis[k + 1] - axis[k]))
}

/// External radial force `f(t, r)` plus optional volumetric sources.
///
/// The mass and heat sources are zero for physical runs; manufactured
/// solutions use them to balance the equations.
#[derive(Debug, Clone, Default)]
pub struct Forcing {
    pub name: String,
    pub f: SpaceTimeField,
    pub mass_source: SpaceTimeField,
    pub heat_source: SpaceTimeField,
}

impl Forcing {
    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            ..Self::default()
        }
    }

    pub fn force(name: &str, f: SpaceTimeField) -> Self {
        Self {
            name: name.into(),
            f,
            ..Self::default()
        }
    }

    /// Entries of the named registry. `strength` scales the force.
    ///
    /// * `zero`
    /// * `radial_pull`: `f = -strength · r`
    /// * `oscillating`: `f = strength · sin(2π t) · sin(π (r - eps)/(R - eps))`
    /// * `swirl_push`: `f = strength · exp(-t) · sin(2π (r - eps)/(R - eps))`
    pub fn named(name: &str, strength: f64, eps: f64, outer: f64) -> Result<Self> {
        let span = outer - eps;
        let f = match name {
            "zero" => return Ok(Self::zero()),
            "radial_pull" => SpaceTimeField::analytic(move |_, r| -strength * r),
            "oscillating" => SpaceTimeField::analytic(move |t, r| {
                strength * (2.0 * std::f64::consts::PI * t).sin() * (std::f64::consts::PI * (r - eps) / span).sin()
            }),
            "swirl_push" => SpaceTimeField::analytic(move |t, r| {
                strength * (-t).exp() * (2.0 * std::f64::consts::PI * (r - eps) / span).sin()
            }),
            other => return Err(Error::Param(format!("unknown forcing '{other}'"))),
        };
        Ok(Self::force(name, f))
    }

    pub fn is_unforced(&self) -> bool {
        self.f.is_zero()
    }

    /// `(∫ f² r dr, sup |f|)` at time `t`, the two norms the force hypothesis uses.
    pub fn norms_at(&self, t: f64, grid: &RadialGrid) -> (f64, f64) {
        let f = self.f.sample(t, grid);
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        let l2 = integrate_radial(&sq, grid).unwrap_or(f64::NAN);
        let sup = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        (l2, sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_table() {
        let tab = TabulatedField::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0],
        )
        .unwrap();
        assert!((tab.eval(0.5, 0.5) - 5.5).abs() < 1e-14);
        assert!((tab.eval(-1.0, 3.0) - 2.0).abs() < 1e-14);
        assert!((tab.eval(2.0, 1.5) - 11.5).abs() < 1e-14);
        assert!(TabulatedField::new(vec![0.0], vec![1.0, 0.5], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn triples_roundtrip() {
        let rows = vec![(1.0, 0.5, 4.0), (0.0, 0.5, 2.0), (0.0, 0.1, 1.0), (1.0, 0.1, 3.0)];
        let tab = TabulatedField::from_triples(rows).unwrap();
        assert!((tab.eval(0.5, 0.3) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn registry() {
        let g = RadialGrid::uniform(0.1, 1.0, 101).unwrap();
        let f = Forcing::named("radial_pull", 2.0, 0.1, 1.0).unwrap();
        let (l2, sup) = f.norms_at(0.0, &g);
        assert!((sup - 2.0).abs() < 1e-14);
        // ∫ 4 r³ dr on [0.1, 1]
        assert!((l2 - (1.0 - 1e-4)).abs() < 1e-3);
        assert!(Forcing::named("nope", 1.0, 0.1, 1.0).is_err());
        assert!(Forcing::named("zero", 1.0, 0.1, 1.0).unwrap().is_unforced());
    }
}
