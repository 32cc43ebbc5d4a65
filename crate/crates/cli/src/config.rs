//! Experiment configuration files (TOML). The keys are listed in the README.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use annulus_core::verify::Tolerances;
use annulus_core::{Forcing, GridPolicy, InitialDataSpec, PhysParams, Profile, ProfileSpec, RadialGrid, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::{Class, Classify, ClassifyCore, Failure, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Run,
    Verify,
    Continuation,
    Mms,
    Report,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Run => "run",
            Self::Verify => "verify",
            Self::Continuation => "continuation",
            Self::Mms => "mms",
            Self::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    #[serde(default)]
    pub grid: GridSection,
    pub params: ParamsSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms: Option<MmsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub eps: f64,
    pub outer: f64,
    /// Node count of a uniform grid. Ignored when `spacing` is set.
    pub n: usize,
    /// Uniform spacing anchored at `outer`; the first cell absorbs the remainder.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            eps: 0.1,
            outer: 1.0,
            n: 201,
            spacing: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub mu: f64,
    #[serde(default)]
    pub lambda: f64,
    pub kappa: f64,
    #[serde(default = "one")]
    pub k_gas: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// Entry of the named data registry; `rho`, `u`, `theta` override its fields.
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<ProfileSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<ProfileSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<ProfileSpec>,
    pub c0: f64,
    /// Target `∫ ρ₀ r dr`; defaults to that of the unmollified density.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Mollifier half-width; defaults to `eps / 4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            name: "rest".into(),
            rho: None,
            u: None,
            theta: None,
            c0: 10.0,
            mass: None,
            delta: None,
        }
    }
}

pub const DATA_NAMES: [&str; 5] = [
    "rest",
    "density_pulse",
    "temperature_pulse",
    "velocity_wave",
    "smooth_mix",
];

/// `(rho, u, theta)` of a registry entry.
fn registry(name: &str) -> Option<(Profile, Profile, Profile)> {
    let rest = (Profile::Uniform(1.0), Profile::Uniform(0.0), Profile::Uniform(1.0));
    let pulse = |amplitude| Profile::Pulse {
        base: 1.0,
        amplitude,
        center: 0.55,
        width: 0.1,
    };
    Some(match name {
        "rest" => rest,
        "density_pulse" => (pulse(0.8), rest.1, rest.2),
        "temperature_pulse" => (rest.0, rest.1, pulse(0.5)),
        "velocity_wave" => (rest.0, Profile::analytic(|r| 0.1 * (2.0 * PI * r).sin()), rest.2),
        "smooth_mix" => (
            Profile::analytic(|r| 1.0 + 0.3 * (PI * r).cos()),
            Profile::analytic(|r| 0.1 * (2.0 * PI * r).sin()),
            Profile::analytic(|r| 1.0 + 0.3 * r * r),
        ),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub name: String,
    pub strength: f64,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            name: "zero".into(),
            strength: 1.0,
        }
    }
}

pub const CHECK_NAMES: [&str; 7] = [
    "hypotheses",
    "global",
    "pointwise",
    "energy",
    "integrability",
    "log_embedding",
    "weak",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSection {
    pub list: Vec<String>,
    /// Mass label of the particle path used by the pointwise bounds; defaults
    /// to half the total mass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_label: Option<f64>,
    /// Number of seeded regions for the integrability check.
    pub regions: usize,
    /// Left end of the integrability window; defaults to the midpoint of the annulus.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub q: Vec<f64>,
    /// Distance kept from the fluid edge by energy test functions.
    pub eta: f64,
    pub tolerances: Tolerances,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            list: CHECK_NAMES.iter().map(|s| s.to_string()).collect(),
            mass_label: None,
            regions: 20,
            b: None,
            q: vec![1.0, 2.0, 4.0],
            eta: 0.05,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    /// Strictly decreasing inner radii.
    pub eps: Vec<f64>,
    pub spacing: f64,
    /// Geometric grading towards `eps`; both keys or neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Common output times; defaults to `output_count` equal steps up to `t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_times: Option<Vec<f64>>,
    #[serde(default = "default_output_count")]
    pub output_count: usize,
    /// Left end `a` of the overlap region `[a, R]`.
    #[serde(default = "default_overlap_from")]
    pub overlap_from: f64,
    /// Time window `[t0, t1]` of the overlap region; defaults to `[0.2, 1] · t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Mass labels for the vacuum-edge extrapolation; defaults to `M0 · {0.04, 0.02, 0.01}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_probes: Option<Vec<f64>>,
    #[serde(default = "default_vacuum_exponent")]
    pub vacuum_exponent: f64,
}

fn default_output_count() -> usize {
    50
}

fn default_overlap_from() -> f64 {
    0.3
}

fn default_vacuum_exponent() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsSection {
    pub sizes: Vec<usize>,
    pub t_end: f64,
    pub dt_per_h: f64,
    pub min_order: f64,
}

impl Default for MmsSection {
    fn default() -> Self {
        Self {
            sizes: vec![101, 201, 401, 801],
            t_end: 0.3,
            dt_per_h: 0.2,
            min_order: 0.9,
        }
    }
}

/// A parsed, validated configuration with defaults filled in, and the
/// directory that relative table paths are resolved against.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    /// SHA-256 over the configuration file and every table it references.
    pub input_sha256: String,
}

/// Reads and validates `path` for `sub`.
pub fn parse_config(path: &Path, sub: Subcommand) -> Outcome<Loaded> {
    let text = fs::read_to_string(path).class_with(Class::Io, || format!("reading {}", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut config = parse_str(&text, sub).map_err(|e| {
        let msg = format!("{}: {:#}", path.display(), e.error);
        Failure::msg(e.class, msg)
    })?;
    config.resolve(sub, &base_dir)?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    for table in config.table_paths() {
        let p = base_dir.join(table);
        let bytes = fs::read(&p).class_with(Class::Io, || format!("reading {}", p.display()))?;
        hasher.update(&bytes);
    }
    Ok(Loaded {
        config,
        base_dir,
        input_sha256: hex::encode(hasher.finalize()),
    })
}

/// Parses and checks a configuration without touching the file system.
pub fn parse_str(text: &str, sub: Subcommand) -> Outcome<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).class(Class::Config)?;
    if let Some(declared) = config.subcommand {
        if declared != sub {
            return Err(Failure::msg(
                Class::Config,
                format!(
                    "configuration is for `{}` but `{}` was invoked",
                    declared.name(),
                    sub.name()
                ),
            ));
        }
    }
    config.validate(sub)?;
    Ok(config)
}

fn config_err(msg: impl std::fmt::Display) -> Failure {
    Failure::msg(Class::Config, msg)
}

impl ExperimentConfig {
    pub fn phys(&self) -> Outcome<PhysParams> {
        let p = self.params;
        PhysParams::new(p.mu, p.lambda, p.kappa, p.k_gas).class(Class::Config)
    }

    fn validate(&self, sub: Subcommand) -> Outcome<()> {
        self.phys()?;
        self.solver.validate().class(Class::Config)?;
        let g = &self.grid;
        if !(g.eps > 0.0 && g.eps < g.outer && g.outer.is_finite()) {
            return Err(config_err(format!(
                "grid: need 0 < eps < outer, got eps = {}, outer = {}",
                g.eps, g.outer
            )));
        }
        if g.spacing.is_none() && g.n < 3 {
            return Err(config_err(format!("grid.n >= 3 required, got {}", g.n)));
        }
        if let Some(h) = g.spacing {
            if !(h > 0.0 && h < g.outer - g.eps) {
                return Err(config_err(format!(
                    "grid.spacing must lie in (0, outer - eps), got {h}"
                )));
            }
        }
        let init = &self.initial;
        if registry(&init.name).is_none() {
            return Err(config_err(format!(
                "initial.name: unknown data '{}' (expected one of {})",
                init.name,
                DATA_NAMES.join(", ")
            )));
        }
        if !(init.c0 >= 1.0) {
            return Err(config_err(format!("initial.c0 >= 1 required, got {}", init.c0)));
        }
        if let Some(m) = init.mass {
            if !(m > 0.0 && m.is_finite()) {
                return Err(config_err(format!("initial.mass > 0 required, got {m}")));
            }
        }
        if let Some(d) = init.delta {
            if !(d > 0.0 && d < g.eps) {
                return Err(config_err(format!("initial.delta must lie in (0, eps), got {d}")));
            }
        }
        Forcing::named(&self.forcing.name, self.forcing.strength, g.eps, g.outer)
            .map_err(|e| config_err(format!("forcing.name: {e}")))?;
        if !self.forcing.strength.is_finite() {
            return Err(config_err("forcing.strength must be finite"));
        }
        self.validate_checks()?;
        match sub {
            Subcommand::Continuation => self.validate_plan()?,
            Subcommand::Mms => {
                let m = self.mms.clone().unwrap_or_default();
                if m.sizes.len() < 2 || m.sizes.iter().any(|&n| n < 3) {
                    return Err(config_err("mms.sizes needs at least two grids of >= 3 nodes"));
                }
                if !(m.t_end > 0.0 && m.dt_per_h > 0.0) {
                    return Err(config_err("mms.t_end > 0 and mms.dt_per_h > 0 required"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_checks(&self) -> Outcome<()> {
        let c = &self.checks;
        if let Some(bad) = c.list.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
            return Err(config_err(format!(
                "checks.list: unknown check '{bad}' (expected one of {})",
                CHECK_NAMES.join(", ")
            )));
        }
        if let Some(b) = c.b {
            if !(b >= self.grid.eps && b < self.grid.outer) {
                return Err(config_err(format!("checks.b must lie in [eps, outer), got {b}")));
            }
        }
        if c.q.iter().any(|&q| !(q >= 1.0)) {
            return Err(config_err("checks.q entries must be >= 1"));
        }
        if !(c.eta >= 0.0) {
            return Err(config_err("checks.eta >= 0 required"));
        }
        Ok(())
    }

    fn validate_plan(&self) -> Outcome<()> {
        let plan = self
            .plan
            .as_ref()
            .ok_or_else(|| config_err("continuation needs a [plan] section"))?;
        if plan.eps.is_empty() {
            return Err(config_err("plan.eps must not be empty"));
        }
        if plan.inner_spacing.is_some() != plan.ratio.is_some() {
            return Err(config_err("plan.inner_spacing and plan.ratio go together"));
        }
        if plan.output_times.is_none() && plan.output_count == 0 {
            return Err(config_err("plan.output_count >= 1 required"));
        }
        if let Some([t0, t1]) = plan.window {
            if !(0.0 <= t0 && t0 <= t1) {
                return Err(config_err(format!("plan.window needs 0 <= t0 <= t1, got [{t0}, {t1}]")));
            }
        }
        self.grid_policy()?;
        Ok(())
    }

    /// Fills `delta`, `mass`, the plan defaults and the check defaults that
    /// depend on the data.
    fn resolve(&mut self, sub: Subcommand, base_dir: &Path) -> Outcome<()> {
        let eps = match (sub, &self.plan) {
            (Subcommand::Continuation, Some(plan)) => plan.eps[0],
            _ => self.grid.eps,
        };
        if self.initial.delta.is_none() && sub != Subcommand::Continuation {
            self.initial.delta = Some(eps / 4.0);
        }
        if self.initial.mass.is_none() {
            let (rho, _, _) = self.profiles(base_dir)?;
            self.initial.mass = Some(raw_mass(&rho, eps, self.grid.outer));
        }
        let mass = self.initial.mass.unwrap_or(1.0);
        if self.checks.mass_label.is_none() {
            self.checks.mass_label = Some(0.5 * mass);
        }
        if self.checks.b.is_none() {
            self.checks.b = Some(0.5 * (self.grid.eps + self.grid.outer));
        }
        if sub == Subcommand::Mms && self.mms.is_none() {
            self.mms = Some(MmsSection::default());
        }
        let t_end = self.solver.t_end;
        if let Some(plan) = &mut self.plan {
            if plan.output_times.is_none() {
                let k = plan.output_count;
                plan.output_times = Some((1..=k).map(|j| t_end * j as f64 / k as f64).collect());
            }
            if plan.window.is_none() {
                plan.window = Some([0.2 * t_end, t_end]);
            }
            if plan.h_probes.is_none() {
                plan.h_probes = Some(vec![0.04 * mass, 0.02 * mass, 0.01 * mass]);
            }
        }
        Ok(())
    }

    /// Registry profiles with the explicit overrides applied.
    pub fn profiles(&self, base_dir: &Path) -> Outcome<(Profile, Profile, Profile)> {
        let (mut rho, mut u, mut theta) =
            registry(&self.initial.name).ok_or_else(|| config_err("initial.name: unknown data"))?;
        let build = |spec: &ProfileSpec, key: &str| {
            spec.build(base_dir)
                .map_err(|e| Failure::new(crate::failure::core_class(&e, Class::Config), e))
                .map_err(|f| Failure::msg(f.class, format!("initial.{key}: {:#}", f.error)))
        };
        if let Some(s) = &self.initial.rho {
            rho = build(s, "rho")?;
        }
        if let Some(s) = &self.initial.u {
            u = build(s, "u")?;
        }
        if let Some(s) = &self.initial.theta {
            theta = build(s, "theta")?;
        }
        Ok((rho, u, theta))
    }

    fn table_paths(&self) -> Vec<String> {
        [&self.initial.rho, &self.initial.u, &self.initial.theta]
            .into_iter()
            .flatten()
            .filter_map(|s| match s {
                ProfileSpec::Tabulated { path } => Some(path.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn build_grid(&self) -> Outcome<RadialGrid> {
        let g = &self.grid;
        match g.spacing {
            Some(h) => GridPolicy::Uniform { spacing: h }.build(g.eps, g.outer),
            None => RadialGrid::uniform(g.eps, g.outer, g.n),
        }
        .class(Class::Config)
    }

    /// Initial data for inner radius `eps` (the grid's unless overridden).
    pub fn initial_spec(&self, eps: f64, base_dir: &Path) -> Outcome<InitialDataSpec> {
        let (rho, u, theta) = self.profiles(base_dir)?;
        let init = &self.initial;
        let mass = init.mass.ok_or_else(|| config_err("initial.mass unresolved"))?;
        let mut spec = InitialDataSpec::new(rho, u, theta, init.c0, mass, eps);
        if let Some(d) = init.delta {
            spec.delta = d;
        }
        spec.validate().or_class(Class::Config)?;
        Ok(spec)
    }

    pub fn build_forcing(&self, eps: f64) -> Outcome<Forcing> {
        Forcing::named(&self.forcing.name, self.forcing.strength, eps, self.grid.outer).or_class(Class::Config)
    }

    pub fn grid_policy(&self) -> Outcome<GridPolicy> {
        let plan = self.plan.as_ref().ok_or_else(|| config_err("missing [plan] section"))?;
        Ok(match (plan.inner_spacing, plan.ratio) {
            (Some(inner_spacing), Some(ratio)) => GridPolicy::Graded {
                spacing: plan.spacing,
                inner_spacing,
                ratio,
            },
            _ => GridPolicy::Uniform { spacing: plan.spacing },
        })
    }
}

/// `∫_eps^R ρ₀ r dr` by composite Simpson on 4096 intervals.
fn raw_mass(rho: &Profile, eps: f64, outer: f64) -> f64 {
    let m = 4096;
    let h = (outer - eps) / m as f64;
    let f = |k: usize| {
        let r = eps + h * k as f64;
        rho.eval(r) * r
    };
    let inner: f64 = (1..m).map(|k| if k % 2 == 1 { 4.0 * f(k) } else { 2.0 * f(k) }).sum();
    h / 3.0 * (f(0) + inner + f(m))
}
