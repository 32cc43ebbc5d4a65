//! Young functions, Luxemburg norms over the 2D annulus, the modulus
//! `ω(r, c) = r + r G⁻¹(c/r)` with `G(y) = y ln y`, and the logarithmic
//! embedding bound for temperatures.
//!
//! Integrals here are genuine 2D integrals `∫_Ω · dx = 2π ∫ · r dr`, and
//! `|Ω| = π(R² − eps²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum YoungKind {
    /// `M(s) = (1 + s) ln(1 + s) − s`
    M,
    /// `N(s) = e^s − s − 1`
    N,
    /// `H(s) = e^{s²} − 1`
    H,
}

impl YoungKind {
    pub const ALL: [YoungKind; 3] = [YoungKind::M, YoungKind::N, YoungKind::H];

    fn eval_unchecked(self, s: f64) -> f64 {
        match self {
            YoungKind::M => (1.0 + s) * s.ln_1p() - s,
            YoungKind::N => s.exp_m1() - s,
            YoungKind::H => (s * s).exp_m1(),
        }
    }
}

pub fn young_eval(kind: YoungKind, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Young functions take s >= 0, got {s}")));
    }
    Ok(kind.eval_unchecked(s))
}

/// `Φ⁻¹(y)` for `y ≥ 0`, by bisection to machine resolution.
pub fn young_inverse(kind: YoungKind, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!(
            "inverse Young function needs finite y >= 0, got {y}"
        )));
    }
    let mut hi = 1.0;
    while kind.eval_unchecked(hi) < y {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kind.eval_unchecked(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `|Ω| = π(R² − eps²)`.
pub fn domain_area(grid: &RadialGrid) -> f64 {
    2.0 * PI * grid.area()
}

/// `∫_Ω f dx` for a radial field.
pub fn integrate_2d(field: &[f64], grid: &RadialGrid) -> Result<f64> {
    grid.check_len(field)?;
    Ok(2.0 * PI * dot(field, grid.weights()))
}

/// The modular `∫_Ω Φ(|u|/k) dx`.
pub fn modular(field: &[f64], grid: &RadialGrid, kind: YoungKind, k: f64) -> f64 {
    let s: f64 = field
        .iter()
        .zip(grid.weights())
        .map(|(u, w)| w * kind.eval_unchecked(u.abs() / k))
        .sum();
    2.0 * PI * s
}

const MAX_HALVINGS: usize = 2100;

/// Smallest `k` with `∫_Ω Φ(|u|/k) dx ≤ 1`, found by bisection on the
/// decreasing map `k ↦ ∫ Φ(|u|/k)` to relative width `tol`. Returns the upper
/// (feasible) end of the final bracket; 0 for the zero field.
pub fn luxemburg_norm(field: &[f64], grid: &RadialGrid, kind: YoungKind, tol: f64) -> Result<f64> {
    grid.check_len(field)?;
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if let Some(i) = field.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            field: "orlicz input",
            node: i,
        });
    }
    let peak = field.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let feasible = |k: f64| modular(field, grid, kind, k) <= 1.0;
    let (mut lo, mut hi) = (peak, peak);
    let mut guard = 0;
    while !feasible(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > MAX_HALVINGS || !hi.is_finite() {
            return Err(Error::Bracket("modular stays above 1 for every scale".into()));
        }
    }
    guard = 0;
    while feasible(lo) {
        lo *= 0.5;
        guard += 1;
        if guard > MAX_HALVINGS || lo == 0.0 {
            return Err(Error::Bracket("modular stays below 1 at every scale".into()));
        }
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `(|∫_Ω u v dx|, 2‖u‖_M ‖v‖_N)`; the generalized Hölder inequality says the
/// first is at most the second.
pub fn holder_orlicz_pair(u: &[f64], v: &[f64], grid: &RadialGrid, tol: f64) -> Result<(f64, f64)> {
    grid.check_len(u)?;
    grid.check_len(v)?;
    let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
    let lhs = integrate_2d(&uv, grid)?.abs();
    let rhs = 2.0 * luxemburg_norm(u, grid, YoungKind::M, tol)? * luxemburg_norm(v, grid, YoungKind::N, tol)?;
    Ok((lhs, rhs))
}

/// `G(y) = y ln y` on `[1, ∞)`.
pub fn g(y: f64) -> f64 {
    y * y.ln()
}

/// The `y ≥ 1` with `y ln y = c`, by Newton's method safeguarded with a bracket.
pub fn g_inverse(c: f64) -> Result<f64> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("G⁻¹ needs finite c >= 0, got {c}")));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    // G(y) ≥ y on [e, ∞), so the root lies in [1, max(e, c)]
    let (mut lo, mut hi) = (1.0, c.max(std::f64::consts::E));
    let mut y = if c > 1.0 { (c / c.ln()).clamp(lo, hi) } else { 1.0 + c };
    let target = 1e-12 * c.max(1.0);
    for _ in 0..200 {
        let f = g(y) - c;
        if f.abs() <= target {
            return Ok(y);
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let next = y - f / (y.ln() + 1.0);
        y = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            return Ok(y);
        }
    }
    Ok(y)
}

/// `ω(r, c) = r + r G⁻¹(c/r)`.
pub fn omega(r: f64, c: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("omega needs r > 0, got {r}")));
    }
    Ok(r + r * g_inverse(c / r)?)
}

/// `(∫_Ω θ^q dx, (e^{qΛ²} − 1)^q |Ω| + 1 + |Ω|)` with `Λ = ‖ln(1 + θ)‖_H`.
///
/// `Λ` is taken from the feasible side of the bisection bracket, which keeps
/// the inequality valid for the discrete quadrature as well.
pub fn log_embedding_bound(theta: &[f64], grid: &RadialGrid, q: f64, tol: f64) -> Result<(f64, f64)> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q >= 1 required, got {q}")));
    }
    if let Some(i) = theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::Domain(format!("temperature must be positive (node {i})")));
    }
    let lq = integrate_2d(&theta.iter().map(|t| t.powf(q)).collect::<Vec<_>>(), grid)?;
    let log1p: Vec<f64> = theta.iter().map(|t| t.ln_1p()).collect();
    let lambda = luxemburg_norm(&log1p, grid, YoungKind::H, tol)?;
    let area = domain_area(grid);
    let bound = (q * lambda * lambda).exp_m1().powf(q) * area + 1.0 + area;
    Ok((lq, bound))
}

/// Luxemburg norms `[‖u‖_M, ‖u‖_N, ‖u‖_H]`, used to report the embedding chain.
pub fn norm_chain(field: &[f64], grid: &RadialGrid, tol: f64) -> Result<[f64; 3]> {
    Ok([
        luxemburg_norm(field, grid, YoungKind::M, tol)?,
        luxemburg_norm(field, grid, YoungKind::N, tol)?,
        luxemburg_norm(field, grid, YoungKind::H, tol)?,
    ])
}
