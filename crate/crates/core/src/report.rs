use std::fmt;

use serde::{Deserialize, Serialize};

/// One named quantity, its bound or target, and whether it passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Hard entries are invariants; a failure makes the whole check fail.
    pub hard: bool,
    pub provenance: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub entries: Vec<ReportEntry>,
}

impl EstimateReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// `value <= bound + tolerance`, a hard invariant.
    pub fn upper(&mut self, name: &str, value: f64, bound: f64, tolerance: f64, provenance: &str) {
        let pass = value.is_finite() && value <= bound + tolerance;
        self.push(name, value, Some(bound), tolerance, pass, true, provenance);
    }

    /// `value >= bound - tolerance`, a hard invariant.
    pub fn lower(&mut self, name: &str, value: f64, bound: f64, tolerance: f64, provenance: &str) {
        let pass = value.is_finite() && value >= bound - tolerance;
        self.push(name, value, Some(bound), tolerance, pass, true, provenance);
    }

    /// `|value - target| <= tolerance`, a hard invariant.
    pub fn close(&mut self, name: &str, value: f64, target: f64, tolerance: f64, provenance: &str) {
        let pass = (value - target).abs() <= tolerance;
        self.push(name, value, Some(target), tolerance, pass, true, provenance);
    }

    /// Observed quantity with no target; passes when finite.
    pub fn observe(&mut self, name: &str, value: f64, provenance: &str) {
        let pass = value.is_finite();
        self.push(name, value, None, 0.0, pass, false, provenance);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        name: &str,
        value: f64,
        bound: Option<f64>,
        tolerance: f64,
        pass: bool,
        hard: bool,
        provenance: &str,
    ) {
        self.entries.push(ReportEntry {
            name: name.to_string(),
            value,
            bound,
            tolerance,
            pass,
            hard,
            provenance: provenance.to_string(),
        });
    }

    pub fn extend(&mut self, other: EstimateReport) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// True when no hard invariant failed.
    pub fn hard_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass || !e.hard)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.pass { "ok  " } else { "FAIL" };
            match e.bound {
                Some(b) => writeln!(
                    f,
                    "{status} {:<44} {:>14.6e}  vs {:>14.6e} (tol {:.1e})  [{}]",
                    e.name, e.value, b, e.tolerance, e.provenance
                )?,
                None => writeln!(f, "{status} {:<44} {:>14.6e}  [{}]", e.name, e.value, e.provenance)?,
            }
        }
        Ok(())
    }
}
