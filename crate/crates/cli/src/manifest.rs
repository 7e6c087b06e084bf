use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::ScenarioConfig;

/// Name of the manifest file in every experiment directory.
pub const MANIFEST_FILE: &str = "run-manifest.json";

/// JSON has no NaN or infinities; they travel as `null` or as strings.
mod lossy_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_none()
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
        Null(()),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            Some(Repr::Num(v)) => v,
            Some(Repr::Text(t)) if t == "inf" => f64::INFINITY,
            Some(Repr::Text(t)) if t == "-inf" => f64::NEG_INFINITY,
            _ => f64::NAN,
        })
    }
}

/// Acceptance region of a checked quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { max: f64 },
    AtLeast { min: f64 },
    Within { min: f64, max: f64 },
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost { max } => v <= max,
            Bound::AtLeast { min } => v >= min,
            Bound::Within { min, max } => v >= min && v <= max,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost { max } => write!(f, "<= {max:e}"),
            Bound::AtLeast { min } => write!(f, ">= {min:e}"),
            Bound::Within { min, max } => write!(f, "in [{min:.6}, {max:.6}]"),
        }
    }
}

/// One built-in invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "lossy_f64")]
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            value,
            passed: bound.admits(value),
            bound,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, max: f64) -> Self {
        Self::new(name, value, Bound::AtMost { max })
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self::new(name, value, Bound::AtLeast { min })
    }

    pub fn within(name: impl Into<String>, value: f64, min: f64, max: f64) -> Self {
        Self::new(name, value, Bound::Within { min, max })
    }

    /// A yes/no property, recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub wnt_lab: String,
    pub wnt_core: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            wnt_lab: env!("CARGO_PKG_VERSION").to_string(),
            wnt_core: wnt_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub experiment: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub threads: usize,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub status: RunStatus,
    #[serde(default)]
    pub error: Option<String>,
    /// Name of the check shown by `report`.
    #[serde(default)]
    pub key_check: Option<String>,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub metrics: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Ok && self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The designated key check, or the first failing one, or the first one.
    pub fn key(&self) -> Option<&Check> {
        self.key_check
            .as_deref()
            .and_then(|k| self.check(k))
            .or_else(|| self.checks.iter().find(|c| !c.passed))
            .or_else(|| self.checks.first())
    }

    pub fn metric_f64(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).and_then(|v| v.as_f64())
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Check::at_most("a", 0.5, 1.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(!Check::within("b", 1.2, 0.9, 1.1).passed);
        assert!(Check::holds("c", true).passed && !Check::holds("c", false).passed);
    }

    #[test]
    fn non_finite_values_survive_json() {
        for v in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY, 2.5] {
            let c = Check::at_most("x", v, 1.0);
            let back: Check = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert!(back.value == v || (v.is_nan() && back.value.is_nan()));
        }
    }
}
