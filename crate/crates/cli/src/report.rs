//! Summary table over run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::manifest::{Manifest, MANIFEST_FILE};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub name: String,
    pub key: String,
    pub value: f64,
    pub tolerance: String,
    pub violations: usize,
    pub passed: bool,
}

impl ReportRow {
    pub fn from_manifest(m: &Manifest) -> Self {
        let (key, value, tolerance) = match m.key() {
            Some(c) => (c.name.clone(), c.value, c.bound.to_string()),
            None => ("-".into(), f64::NAN, "-".into()),
        };
        Self {
            experiment: m.experiment.clone(),
            name: m.name.clone(),
            key,
            value,
            tolerance,
            violations: m.violations(),
            passed: m.passed(),
        }
    }

    fn verdict(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Inputs that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// A directory stands for the manifest inside it.
fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

impl Report {
    pub fn collect(paths: &[PathBuf]) -> Self {
        let mut rep = Report::default();
        for p in paths {
            let path = manifest_path(p);
            match Manifest::read(&path) {
                Ok(m) => rep.rows.push(ReportRow::from_manifest(&m)),
                Err(e) => rep.skipped.push((path, e.to_string())),
            }
        }
        rep
    }

    /// True when at least one manifest was read and every run passed.
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let head = ["experiment", "name", "key metric", "value", "tolerance", "status"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                let status = if r.passed || r.violations == 0 {
                    r.verdict().to_string()
                } else {
                    format!("FAIL ({})", r.violations)
                };
                [
                    r.experiment.clone(),
                    r.name.clone(),
                    r.key.clone(),
                    format!("{:.4e}", r.value),
                    r.tolerance.clone(),
                    status,
                ]
            })
            .collect();
        let mut width = head.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |row: &[String]| {
            let parts: Vec<String> = row.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(out, "{}", parts.join("  ").trim_end()).expect("string write");
        };
        line(&head.map(String::from));
        for row in &cells {
            line(row);
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("experiment,name,key_metric,value,tolerance,violations,status\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.12e},\"{}\",{},{}",
                r.experiment,
                r.name,
                r.key,
                r.value,
                r.tolerance,
                r.violations,
                r.verdict()
            )
            .expect("string write");
        }
        out
    }
}
