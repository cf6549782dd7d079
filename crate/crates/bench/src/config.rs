//! JSON run configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "problem": { "kind": "UniformDense", "m": 1000, "n": 100, "seed": 1 },
//!   "schemes": ["K1", "K2", { "id": "K3", "block_size": 10 }],
//!   "stop": { "itmax": 100000, "tol": 1e-6 },
//!   "block_size": "sqrt",
//!   "distribution": "Uniform",
//!   "trials": 1,
//!   "seed": 42,
//!   "output_dir": "out"
//! }
//! ```
//!
//! Everything except `problem` and `schemes` has a default; see
//! [`BenchConfig`].

use std::path::{Path, PathBuf};

use randsolve::{
    load_matrixmarket, Distribution, ProblemKind, ProblemSpec, Scheme, SchemeId, SpdMatrix,
    StopRule,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// `"sqrt"` (`⌊√n⌋`) or an explicit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockPolicy {
    #[default]
    Sqrt,
    Fixed(usize),
}

impl Serialize for BlockPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BlockPolicy::Sqrt => s.serialize_str("sqrt"),
            BlockPolicy::Fixed(l) => s.serialize_u64(*l as u64),
        }
    }
}

impl<'de> Deserialize<'de> for BlockPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "sqrt" => Ok(BlockPolicy::Sqrt),
            Value::Number(n) => n
                .as_u64()
                .filter(|&l| l > 0)
                .map(|l| BlockPolicy::Fixed(l as usize))
                .ok_or_else(|| serde::de::Error::custom("block_size must be a positive integer")),
            other => Err(serde::de::Error::custom(format!(
                "block_size must be \"sqrt\" or a positive integer, got {other}"
            ))),
        }
    }
}

impl BlockPolicy {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BlockPolicy::Sqrt => ((n as f64).sqrt().floor() as usize).max(1),
            BlockPolicy::Fixed(l) => l,
        }
    }
}

/// Weight matrix for K5, K6, C5 and C6.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPolicy {
    #[default]
    Identity,
    /// `A⁻¹` (square SPD problems only).
    AInverse,
    /// MatrixMarket file holding `G`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeEntry {
    pub id: SchemeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Distribution>,
}

impl SchemeEntry {
    pub fn new(id: SchemeId) -> Self {
        Self {
            id,
            block_size: None,
            distribution: None,
        }
    }
}

/// A bare id string or a full entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeItem {
    Id(SchemeId),
    Entry(SchemeEntry),
}

impl SchemeItem {
    pub fn entry(&self) -> SchemeEntry {
        match self {
            SchemeItem::Id(id) => SchemeEntry::new(*id),
            SchemeItem::Entry(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSettings {
    #[serde(default = "RateSettings::default_iterations")]
    pub iterations: usize,
    #[serde(default = "RateSettings::default_tolerance")]
    pub tolerance: f64,
}

impl RateSettings {
    fn default_iterations() -> usize {
        500
    }

    fn default_tolerance() -> f64 {
        0.02
    }
}

impl Default for RateSettings {
    fn default() -> Self {
        Self {
            iterations: Self::default_iterations(),
            tolerance: Self::default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationSettings {
    #[serde(default = "ExpectationSettings::default_samples")]
    pub samples: usize,
    #[serde(default = "ExpectationSettings::default_bootstrap")]
    pub bootstrap: usize,
}

impl ExpectationSettings {
    fn default_samples() -> usize {
        10_000
    }

    fn default_bootstrap() -> usize {
        200
    }
}

impl Default for ExpectationSettings {
    fn default() -> Self {
        Self {
            samples: Self::default_samples(),
            bootstrap: Self::default_bootstrap(),
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_trials() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub problem: ProblemSpec,
    pub schemes: Vec<SchemeItem>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub block_size: BlockPolicy,
    /// Applied to every scheme that supports it; per-entry values win.
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Trace/stop-check interval; per-scheme default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_every: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub g: WeightPolicy,
    #[serde(default)]
    pub rates: RateSettings,
    #[serde(default)]
    pub expectation: ExpectationSettings,
}

impl BenchConfig {
    pub fn new(problem: ProblemSpec, schemes: Vec<SchemeItem>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem,
            schemes,
            stop: StopRule::default(),
            block_size: BlockPolicy::default(),
            distribution: Distribution::default(),
            trials: default_trials(),
            seed: 0,
            trace_every: None,
            output_dir: default_output_dir(),
            g: WeightPolicy::default(),
            rates: RateSettings::default(),
            expectation: ExpectationSettings::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that do not need the generated matrix.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.trace_every == Some(0) {
            return bad("trace_every must be at least 1".into());
        }
        self.stop.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.problem
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let symmetric_ok = matches!(self.problem.kind, ProblemKind::SparseSpd | ProblemKind::FromFile);
        let mut labels = std::collections::BTreeSet::new();
        for item in &self.schemes {
            let e = item.entry();
            if e.id.family() == randsolve::Family::S && !symmetric_ok {
                return bad(format!(
                    "{} needs an SPD problem (SparseSpd or FromFile), not {:?}",
                    e.id, self.problem.kind
                ));
            }
            if !labels.insert(self.label(&e, self.problem.n)) {
                return bad(format!("scheme {} is listed twice with the same settings", e.id));
            }
        }
        Ok(())
    }

    fn effective_distribution(&self, e: &SchemeEntry) -> Distribution {
        e.distribution.unwrap_or_else(|| {
            let supported = match self.distribution {
                Distribution::Uniform => true,
                Distribution::NormProportional => matches!(e.id, SchemeId::K1 | SchemeId::C1),
                Distribution::TraceProportional => e.id == SchemeId::S1,
            };
            if supported {
                self.distribution
            } else {
                Distribution::Uniform
            }
        })
    }

    fn effective_block(&self, e: &SchemeEntry, n: usize) -> usize {
        if e.id.is_block() {
            e.block_size.unwrap_or_else(|| self.block_size.resolve(n))
        } else {
            1
        }
    }

    /// File-name label such as `K3-l10` or `K1-norm`.
    pub fn label(&self, e: &SchemeEntry, n: usize) -> String {
        let mut s = e.id.to_string();
        if e.id.is_block() {
            s += &format!("-l{}", self.effective_block(e, n));
        }
        match self.effective_distribution(e) {
            Distribution::Uniform => {}
            Distribution::NormProportional => s += "-norm",
            Distribution::TraceProportional => s += "-trace",
        }
        s
    }

    fn weight(&self, id: SchemeId, a: &randsolve::DenseMatrix) -> Result<SpdMatrix, HarnessError> {
        let (m, n) = a.shape();
        let dim = match id.family() {
            randsolve::Family::C => m,
            _ => n,
        };
        let cfg = |e: randsolve::Error| HarnessError::Config(format!("weight G for {id}: {e}"));
        match &self.g {
            WeightPolicy::Identity => Ok(SpdMatrix::identity(dim)),
            WeightPolicy::AInverse => Ok(SpdMatrix::new(a.clone()).map_err(cfg)?.inverse()),
            WeightPolicy::File(p) => SpdMatrix::new(load_matrixmarket(p).map_err(cfg)?).map_err(cfg),
        }
    }

    /// Concrete schemes for a problem matrix, with their labels.
    pub fn build_schemes(&self, a: &randsolve::DenseMatrix) -> Result<Vec<(String, Scheme)>, HarnessError> {
        let n = a.ncols();
        let cfg = |id: SchemeId, e: randsolve::Error| HarnessError::Config(format!("{id}: {e}"));
        let mut out = Vec::with_capacity(self.schemes.len());
        for item in &self.schemes {
            let e = item.entry();
            let base = if e.id.requires_g() {
                Scheme::with_weight(e.id, self.weight(e.id, a)?)
            } else {
                Scheme::new(e.id)
            }
            .map_err(|err| cfg(e.id, err))?;
            let scheme = base
                .with_block_size(self.effective_block(&e, n))
                .and_then(|s| s.with_distribution(self.effective_distribution(&e)))
                .map_err(|err| cfg(e.id, err))?;
            out.push((self.label(&e, n), scheme));
        }
        Ok(out)
    }
}

/// Sets `path` (dot separated) in a JSON document. `raw` is parsed as JSON
/// when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), HarnessError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override {assignment:?} is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(HarnessError::Config(format!("override path {path:?} has an empty key")));
        }
        let obj = match cursor {
            Value::Object(map) => map,
            _ => {
                return Err(HarnessError::Config(format!(
                    "override path {path:?}: {} is not an object",
                    keys[..i].join(".")
                )))
            }
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one key")
}
