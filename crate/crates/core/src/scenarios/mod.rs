//! Reproducible scenarios: a catalog of builders with machine-checkable
//! expected outcomes, the run configuration, and report emission.

mod builders;
pub mod examples;
pub mod oracle;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use oracle::{oracle_1d, random_cases, OracleCase, ORACLE_CELLS};

/// Parameters of one run. `output` is where files go and is not part of the
/// report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub resolution: usize,
    pub jmax: usize,
    pub tolerance: f64,
    pub seed: u64,
    #[serde(skip)]
    pub output: PathBuf,
}

impl RunConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            resolution: 16,
            jmax: 256,
            tolerance: 1e-6,
            seed: 0,
            output: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 8 {
            return Err(Error::Config(format!("resolution {} < 8", self.resolution)));
        }
        if self.jmax < 8 {
            return Err(Error::Config(format!("jmax {} < 8", self.jmax)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tolerance)));
        }
        Ok(())
    }

    /// `8, 16, 32, …` up to `jmax`, with `jmax` itself always last.
    pub fn js(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut j = 8;
        while j < self.jmax {
            out.push(j);
            j *= 2;
        }
        out.push(self.jmax);
        out
    }
}

/// One machine-checkable piece of the expected outcome.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Clause {
    pub name: String,
    pub expected: String,
    pub observed: Value,
    pub passed: bool,
}

impl Clause {
    pub fn new(name: impl Into<String>, expected: impl Into<String>, observed: impl Into<Value>, passed: bool) -> Self {
        Self {
            name: name.into(),
            expected: expected.into(),
            observed: observed.into(),
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(name, format!("<= {bound:e}"), observed, observed <= bound)
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(name, format!(">= {bound:e}"), observed, observed >= bound)
    }

    pub fn holds(name: impl Into<String>, observed: bool) -> Self {
        Self::new(name, "true", observed, observed)
    }
}

/// A CSV table with columns `j, value, gap`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub rows: Vec<(usize, f64, f64)>,
}

/// What a builder hands back: clauses plus everything that goes into the
/// report and data files.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub clauses: Vec<Clause>,
    pub f_u: Option<f64>,
    pub per_j: Vec<(usize, f64)>,
    pub margin: Option<f64>,
    pub flags: Vec<String>,
    pub details: serde_json::Map<String, Value>,
    pub tables: Vec<Table>,
    /// Plot-ready `x y` series.
    pub dat: Vec<(String, Vec<(f64, f64)>)>,
}

impl Outcome {
    pub fn clause(&mut self, c: Clause) {
        self.clauses.push(c);
    }

    pub fn detail(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.details.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn flag(&mut self, f: impl Into<String>) {
        let f = f.into();
        if !self.flags.contains(&f) {
            self.flags.push(f);
        }
    }
}

pub type Builder = fn(&RunConfig) -> Result<Outcome>;

/// A catalog entry.
#[derive(Clone, Copy)]
pub struct Scenario {
    pub id: &'static str,
    pub summary: &'static str,
    /// Name of the builder function, used for the content hash.
    builder_name: &'static str,
    pub builder: Builder,
}

impl Scenario {
    /// Git-style `sha256("blob {len}\0" + source)` of the builder's source.
    pub fn builder_hash(&self) -> String {
        let src = builders::source_of(self.builder_name);
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", src.len()).as_bytes());
        h.update(src.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

macro_rules! scenario {
    ($id:expr, $f:ident, $summary:expr) => {
        Scenario {
            id: $id,
            summary: $summary,
            builder_name: stringify!($f),
            builder: builders::$f,
        }
    };
}

pub fn scenario_catalog() -> Vec<Scenario> {
    vec![
        scenario!("sawtooth-oscillation", sawtooth_oscillation, "oscillating sawtooth: Young generation, LSC and Jensen"),
        scenario!("ramp-concentration", ramp_concentration, "steepening ramps: concentration measure and Jensen"),
        scenario!("atom-absorbs-jump", atom_absorbs_jump, "a jump sitting on an atom of the reference measure"),
        scenario!("boundary-term-demo", boundary_term_demo, "boundary term against extension by zero, 1D and 2D"),
        scenario!("reshetnyak-ramp", reshetnyak_ramp, "continuity along area-strict smoothing"),
        scenario!("nonquasiconvex-violation", nonquasiconvex_violation, "w-shaped integrand: refuter, rank-one and LSC failure"),
        scenario!("sq-envelope-monotone", sq_envelope_monotone, "SQ approximations decreasing to the area integrand"),
        scenario!("example1", example1, "weight vanishing on a ball"),
        scenario!("example2", example2, "weight vanishing on a fat carpet"),
        scenario!("x-dependent-F-lsc", x_dependent_lsc, "LSC with (1 + x/2)|A| and the boundary term"),
        scenario!("boundary-ramp-lsc", boundary_ramp_lsc, "mass escaping to the boundary"),
        scenario!("oracle-equivalence", oracle_equivalence, "evaluate against the 1D reference on random cases"),
        scenario!("integration-by-parts", integration_by_parts, "Gauss-Green residuals of the function catalog"),
        scenario!("transform-recession", transform_recession, "ball compactification round trip and recession limits"),
    ]
}

pub fn find(id: &str) -> Result<Scenario> {
    scenario_catalog()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))
}

/// The JSON report. Field order is fixed so identical configs give identical
/// bytes.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub config: RunConfig,
    pub builder_hash: String,
    pub passed: bool,
    pub clauses: Vec<Clause>,
    #[serde(rename = "F_u")]
    pub f_u: Option<f64>,
    pub per_j: Vec<(usize, f64)>,
    pub margin: Option<f64>,
    pub flags: Vec<String>,
    pub details: serde_json::Map<String, Value>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Clauses that did not hold.
    pub fn failures(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| !c.passed).collect()
    }
}

/// Runs the builder and assembles the report without touching the disk.
pub fn evaluate_scenario(config: &RunConfig) -> Result<(Report, Outcome)> {
    config.validate()?;
    let s = find(&config.scenario)?;
    let out = (s.builder)(config)?;
    let report = Report {
        scenario: s.id.to_string(),
        config: config.clone(),
        builder_hash: s.builder_hash(),
        passed: !out.clauses.is_empty() && out.clauses.iter().all(|c| c.passed),
        clauses: out.clauses.clone(),
        f_u: out.f_u,
        per_j: out.per_j.clone(),
        margin: out.margin,
        flags: out.flags.clone(),
        details: out.details.clone(),
    };
    Ok((report, out))
}

/// Runs a scenario and writes `report.json`, `tables/*.csv` and `*.dat`
/// under `config.output`.
pub fn run(config: &RunConfig) -> Result<Report> {
    let (report, out) = evaluate_scenario(config)?;
    write_outputs(&config.output, &report, &out)?;
    Ok(report)
}

fn write_outputs(dir: &Path, report: &Report, out: &Outcome) -> Result<()> {
    let tables = dir.join("tables");
    fs::create_dir_all(&tables)?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    for t in &out.tables {
        let mut w = csv::Writer::from_path(tables.join(format!("{}.csv", t.name))).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(["j", "value", "gap"]).map_err(|e| Error::Io(e.to_string()))?;
        for (j, v, g) in &t.rows {
            w.write_record([j.to_string(), v.to_string(), g.to_string()])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    for (name, pts) in &out.dat {
        let body: String = pts.iter().map(|(x, y)| format!("{x} {y}\n")).collect();
        fs::write(dir.join(format!("{name}.dat")), body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_and_validation() {
        let mut c = RunConfig::new("example2");
        c.jmax = 100;
        assert_eq!(c.js(), vec![8, 16, 32, 64, 100]);
        c.jmax = 8;
        assert_eq!(c.js(), vec![8]);
        c.resolution = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn catalog_ids_are_unique() {
        let cat = scenario_catalog();
        assert!(cat.len() >= 10);
        let mut ids: Vec<_> = cat.iter().map(|s| s.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), cat.len());
        for s in &cat {
            assert!(!builders::source_of(s.builder_name).is_empty(), "{}", s.id);
        }
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(find("nope"), Err(Error::UnknownScenario(_))));
    }
}
