// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Golden scenarios: `<name>.toml` next to `<name>.expected.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::run::{run_scenario, SUMMARY_FILE};
use crate::scenario::ScenarioFile;
use crate::Failure;

pub const EXPECTED_SUFFIX: &str = ".expected.json";

/// Stored value of one metric; `null` stands for a non-finite value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub value: Option<f64>,
    #[serde(default)]
    pub abs_tol: f64,
    #[serde(default)]
    pub rel_tol: f64,
}

impl Tolerance {
    /// `|actual − value| ≤ abs_tol + rel_tol·|value|`.
    pub fn accepts(&self, actual: Option<f64>) -> bool {
        match (self.value, actual.filter(|x| x.is_finite())) {
            (None, None) => true,
            (Some(v), Some(a)) => (a - v).abs() <= self.abs_tol + self.rel_tol * v.abs(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub metrics: BTreeMap<String, Tolerance>,
}

#[derive(Debug)]
pub struct Outcome {
    pub name: String,
    /// Empty when the scenario passes.
    pub problems: Vec<String>,
}

/// Default tolerances for newly blessed metrics.
#[derive(Debug, Clone, Copy)]
pub struct Bless {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

fn fmt(x: Option<f64>) -> String {
    x.map_or("non-finite".into(), |v| format!("{v:e}"))
}

/// Re-run every golden in `dir` and compare metrics, or with `bless` rewrite
/// the stored values (keeping existing tolerances).
pub fn verify(dir: &Path, bless: Option<Bless>) -> Result<Vec<Outcome>, Failure> {
    let mut scenarios: Vec<PathBuf> = Vec::new();
    let mut expected: Vec<String> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if let Some(stem) = name.strip_suffix(EXPECTED_SUFFIX) {
            expected.push(stem.to_string());
        } else if path.extension().is_some_and(|e| e == "toml") {
            scenarios.push(path);
        }
    }
    scenarios.sort();
    expected.sort();
    if scenarios.is_empty() {
        return Err(Failure::Validation(format!("no golden scenarios in {}", dir.display())));
    }

    let scratch = tempfile::tempdir()?;
    let mut outcomes: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|path| {
                let root = scratch.path().to_path_buf();
                scope.spawn(move || check_one(path, &root, bless))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("golden worker panicked")).collect()
    });
    for stem in expected {
        if !scenarios.iter().any(|p| p.file_stem().and_then(|s| s.to_str()) == Some(stem.as_str())) {
            outcomes.push(Outcome {
                name: stem.clone(),
                problems: vec![format!("{stem}{EXPECTED_SUFFIX} has no scenario file")],
            });
        }
    }
    Ok(outcomes)
}

fn check_one(path: &Path, root: &Path, bless: Option<Bless>) -> Outcome {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let problems = match compare(path, &name, root, bless) {
        Ok(p) => p,
        Err(e) => vec![e.to_string()],
    };
    Outcome { name, problems }
}

fn compare(path: &Path, name: &str, root: &Path, bless: Option<Bless>) -> Result<Vec<String>, Failure> {
    let mut file = ScenarioFile::load(path)?;
    // isolate goldens that share an output name
    file.output = Some(PathBuf::from(name));
    let out = run_scenario(&file, root)?;
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join(SUMMARY_FILE))?)?;
    let actual: BTreeMap<String, Option<f64>> =
        serde_json::from_value(summary["metrics"].clone()).map_err(|e| Failure::Io(e.to_string()))?;
    let expected_path = path.with_file_name(format!("{name}{EXPECTED_SUFFIX}"));

    if let Some(b) = bless {
        let old: Option<Expected> = fs::read(&expected_path).ok().and_then(|bytes| serde_json::from_slice(&bytes).ok());
        let metrics = actual
            .iter()
            .map(|(k, &v)| {
                let (abs_tol, rel_tol) = old
                    .as_ref()
                    .and_then(|o| o.metrics.get(k))
                    .map_or((b.abs_tol, b.rel_tol), |t| (t.abs_tol, t.rel_tol));
                (k.clone(), Tolerance { value: v.filter(|x| x.is_finite()), abs_tol, rel_tol })
            })
            .collect();
        lightstore::export::write_json(&expected_path, &Expected { metrics })?;
        return Ok(Vec::new());
    }

    let bytes = match fs::read(&expected_path) {
        Ok(b) => b,
        Err(_) => return Ok(vec![format!("missing golden output {}", expected_path.display())]),
    };
    let expected: Expected =
        serde_json::from_slice(&bytes).map_err(|e| Failure::Validation(format!("{}: {e}", expected_path.display())))?;
    let mut problems = Vec::new();
    for (key, tol) in &expected.metrics {
        match actual.get(key) {
            None => problems.push(format!("metric {key} not produced")),
            Some(&a) if !tol.accepts(a) => problems.push(format!(
                "{key} = {} outside {} ± ({:e} + {:e}·|value|)",
                fmt(a),
                fmt(tol.value),
                tol.abs_tol,
                tol.rel_tol
            )),
            Some(_) => {}
        }
    }
    Ok(problems)
}
