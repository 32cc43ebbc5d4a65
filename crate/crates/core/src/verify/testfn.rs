use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial part of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceProfile {
    /// `ψ ≡ 1`.
    One,
    /// `exp(−1/(1 − s²))`, `s` the affine map of `(a, b)` onto `(−1, 1)`.
    Bump { a: f64, b: f64 },
    /// Smooth step from 0 (`r ≤ a`) to 1 (`r ≥ b`), flat to all orders at both.
    Ramp { a: f64, b: f64 },
}

fn flat(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn flat_slope(x: f64) -> f64 {
    if x > 0.0 {
        flat(x) / (x * x)
    } else {
        0.0
    }
}

impl SpaceProfile {
    /// `(ψ, ψ_r)`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            Self::One => (1.0, 0.0),
            Self::Bump { a, b } => {
                let s = (2.0 * r - a - b) / (b - a);
                if s.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let d = 1.0 - s * s;
                let v = (-1.0 / d).exp();
                (v, v * (-2.0 * s / (d * d)) * 2.0 / (b - a))
            }
            Self::Ramp { a, b } => {
                let x = (r - a) / (b - a);
                let (p, q) = (flat(x), flat(1.0 - x));
                let den = p + q;
                let dp = flat_slope(x);
                let dq = -flat_slope(1.0 - x);
                let v = p / den;
                let dv = (dp * q - p * dq) / (den * den);
                (v, dv / (b - a))
            }
        }
    }

    /// Closed interval outside which `ψ` vanishes, if bounded on the left.
    pub fn lower_edge(&self) -> Option<f64> {
        match *self {
            Self::One => None,
            Self::Bump { a, .. } | Self::Ramp { a, .. } => Some(a),
        }
    }

    /// Right end of the support, if `ψ` vanishes near `R`.
    pub fn upper_edge(&self) -> Option<f64> {
        match *self {
            Self::Bump { b, .. } => Some(b),
            _ => None,
        }
    }
}

/// `ψ(t, r) = (c₀ + c₁ t + c₂ t²) · s(r)` with analytic partials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub name: String,
    pub space: SpaceProfile,
    pub time: [f64; 3],
}

/// The weak forms a test function can be used in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakForm {
    Mass,
    Momentum,
    Energy,
}

impl TestFunction {
    pub fn new(name: &str, space: SpaceProfile, time: [f64; 3]) -> Self {
        Self {
            name: name.to_string(),
            space,
            time,
        }
    }

    /// `(ψ, ψ_t, ψ_r)`.
    pub fn eval(&self, t: f64, r: f64) -> (f64, f64, f64) {
        let [c0, c1, c2] = self.time;
        let g = c0 + t * (c1 + t * c2);
        let g_t = c1 + 2.0 * c2 * t;
        let (s, s_r) = self.space.eval(r);
        (g * s, g_t * s, g * s_r)
    }

    /// Momentum needs `ψ = 0` at both ends of `[eps, R]`; energy needs the
    /// support to stay `eta` right of `edge` (the left end of the fluid region).
    pub fn check_support(&self, form: WeakForm, eps: f64, outer: f64, edge: f64, eta: f64) -> Result<()> {
        let lo = self.space.lower_edge();
        let hi = self.space.upper_edge();
        match form {
            WeakForm::Mass => Ok(()),
            WeakForm::Momentum => match (lo, hi) {
                (Some(a), Some(b)) if a >= eps && b <= outer => Ok(()),
                _ => Err(Error::Support(format!(
                    "{}: momentum test functions must vanish at r = {eps} and r = {outer}",
                    self.name
                ))),
            },
            WeakForm::Energy => match lo {
                Some(a) if a >= edge + eta => Ok(()),
                _ => Err(Error::Support(format!(
                    "{}: energy test functions need support in r >= {} (edge {edge} + margin {eta})",
                    self.name,
                    edge + eta
                ))),
            },
        }
    }

    pub fn admits(&self, form: WeakForm, eps: f64, outer: f64, eta: f64) -> bool {
        self.check_support(form, eps, outer, eps, eta).is_ok()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Shipped test functions for an annulus `[eps, R]`, scaled to its width.
pub fn library(eps: f64, outer: f64) -> Vec<TestFunction> {
    let span = outer - eps;
    let at = |x: f64| eps + x * span;
    vec![
        TestFunction::new("one", SpaceProfile::One, [1.0, 0.0, 0.0]),
        TestFunction::new(
            "ramp_linear",
            SpaceProfile::Ramp { a: at(0.2), b: at(0.7) },
            [1.0, 1.0, 0.0],
        ),
        TestFunction::new(
            "bump_center",
            SpaceProfile::Bump { a: at(0.1), b: at(0.9) },
            [1.0, 0.0, 0.0],
        ),
        TestFunction::new(
            "bump_left_quadratic",
            SpaceProfile::Bump {
                a: at(0.15),
                b: at(0.55),
            },
            [1.0, -0.5, 1.0],
        ),
        TestFunction::new(
            "bump_right_linear",
            SpaceProfile::Bump {
                a: at(0.45),
                b: at(0.95),
            },
            [0.5, 1.0, 0.0],
        ),
    ]
}
