//! Experiment runner behind the `qclab` binary.
//!
//! Every run writes its CSV (and, where there is a fit to report, a JSON
//! summary) into the output directory and appends one line to
//! `manifest.jsonl` there. CSVs end with `# manifest: config_hash=<hex>`.
//!
//! Columns per experiment:
//!
//! | experiment | CSV columns |
//! |---|---|
//! | `dioph-scan` | `l, min_gap, floor, fitted_gap, relative_residual, center` |
//! | `free-check` | `l, words, distinct, expected` |
//! | `cayley` | `r, shell, ball, shell_ratio, polynomial, ball_over_polynomial` |
//! | `u1-scan` | `epsilon, complexity, reference_line, n, m, offset, chain_holds, implied_bound` |
//! | `complexity-scan` | `base, denominator, quaternion, base_distance, epsilon, complexity, lower_bound_line, accepted` |
//! | `flag` | `string, degree` |
//! | `geodesic` | `q, delta, distance, endpoint_error, converged, pair, lower_bound_ok` |
//! | `holder` | `q, delta, distance, endpoint_error, converged` |
//! | `cutloc` | `q, delta, distance, endpoint_error, converged, direct, horizontal` |
//!
//! In `geodesic`, `delta` is the bi-invariant distance of the random pair; in
//! `cutloc` it is the crossover `δ*`.

mod experiments;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

pub use experiments::{
    CayleyParams, ComplexityParams, CutlocParams, DiophParams, FlagParams, FreeCheckParams,
    GeodesicParams, HolderParams, U1Params,
};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const DEFAULT_OUTPUT_DIR: &str = "qclab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DiophScan,
    FreeCheck,
    Cayley,
    U1Scan,
    ComplexityScan,
    Flag,
    Geodesic,
    Holder,
    Cutloc,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::DiophScan,
        Experiment::FreeCheck,
        Experiment::Cayley,
        Experiment::U1Scan,
        Experiment::ComplexityScan,
        Experiment::Flag,
        Experiment::Geodesic,
        Experiment::Holder,
        Experiment::Cutloc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DiophScan => "dioph-scan",
            Experiment::FreeCheck => "free-check",
            Experiment::Cayley => "cayley",
            Experiment::U1Scan => "u1-scan",
            Experiment::ComplexityScan => "complexity-scan",
            Experiment::Flag => "flag",
            Experiment::Geodesic => "geodesic",
            Experiment::Holder => "holder",
            Experiment::Cutloc => "cutloc",
        }
    }

    /// Experiments that draw random inputs or seed a solver.
    pub fn stochastic(self) -> bool {
        matches!(
            self,
            Experiment::ComplexityScan | Experiment::Geodesic | Experiment::Holder | Experiment::Cutloc
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "empty_params")]
    pub params: Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

/// The config file as written; every field may be overridden from the
/// command line.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    #[serde(default = "empty_params")]
    params: Value,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{name}: {message}")]
    Module { name: String, message: String },
}

impl HarnessError {
    pub fn name(&self) -> String {
        match self {
            HarnessError::Config(_) => "ConfigError".into(),
            HarnessError::Io { .. } => "IoError".into(),
            HarnessError::Module { name, .. } => name.clone(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io { .. } => 1,
            HarnessError::Module { name, .. } => exit_code_for(name),
        }
    }
}

fn exit_code_for(name: &str) -> i32 {
    match name {
        "NoConvergence" | "NotFound" | "InsufficientData" | "BracketError" => 3,
        "InvalidArgument" | "InvalidAngle" | "UnknownPattern" | "InvalidDistribution"
        | "InvalidPauli" | "InvalidPath" | "HorizontalityViolation" | "DimensionCap" => 2,
        _ => 1,
    }
}

/// Wraps a module error, naming it by its variant.
pub(crate) fn module_error<E: fmt::Debug + fmt::Display>(e: E) -> HarnessError {
    let debug = format!("{e:?}");
    let name: String = debug
        .chars()
        .take_while(|c| c.is_alphanumeric() || *c == '_')
        .collect();
    // transparent wrappers report the inner variant
    let name = match name.as_str() {
        "Algebra" | "SubRiemannian" => debug
            .split(|c: char| !(c.is_alphanumeric() || c == '_'))
            .filter(|s| !s.is_empty())
            .nth(1)
            .unwrap_or("Algebra")
            .to_string(),
        _ => name,
    };
    HarnessError::Module {
        name,
        message: e.to_string(),
    }
}

/// Reads a config file and applies the command-line overrides.
pub fn load_config(
    path: &Path,
    experiment: Option<Experiment>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let raw: RawConfig =
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let experiment = match (experiment, raw.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(HarnessError::Config(format!(
                "command names {a} but the config file names {b}"
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(HarnessError::Config("no experiment given".into())),
    };
    if !raw.params.is_object() {
        return Err(HarnessError::Config("params must be an object".into()));
    }
    let config = ExperimentConfig {
        experiment,
        params: raw.params,
        seed: seed.or(raw.seed),
        output_dir: output_dir.or(raw.output_dir).unwrap_or_else(default_output_dir),
    };
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, params: Value, seed: Option<u64>, output_dir: PathBuf) -> Self {
        Self {
            experiment,
            params,
            seed,
            output_dir,
        }
    }

    /// Checks the seed requirement and that the params parse.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.experiment.stochastic() && self.seed.is_none() {
            return Err(HarnessError::Config(format!("{} needs a seed", self.experiment)));
        }
        experiments::parse_params(self).map(|_| ())
    }

    /// SHA-256 of the canonical JSON of experiment, params and seed. The
    /// output directory is left out so that moving outputs keeps the hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.seed,
        });
        // serde_json maps are sorted, so this is canonical
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }
}

/// SHA-256 of `blob <len>\0<content>`, the git object hash with SHA-256.
pub fn git_blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub experiment: Experiment,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub outputs: Vec<OutputFile>,
    /// Hash over the `(file, hash)` list, like a git tree.
    pub outputs_hash: String,
    pub wall_time_s: f64,
    pub status: String,
    pub error: Option<String>,
}

/// What an experiment produced before it is written out.
pub(crate) struct Output {
    /// `(file name, content without the manifest line)`; CSVs get the
    /// manifest comment appended.
    pub files: Vec<(String, String)>,
    pub total: usize,
    pub failed: usize,
    /// Status reported when failures dominate.
    pub failure: &'static str,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub entry: ManifestEntry,
    pub exit_code: i32,
}

/// Runs one experiment, writes its outputs and appends the manifest line.
pub fn run(config: &ExperimentConfig) -> RunReport {
    let start = Instant::now();
    let config_hash = config.hash();
    let result = experiments::dispatch(config).and_then(|out| {
        let written = write_outputs(&config.output_dir, &config_hash, &out.files)?;
        Ok((out, written))
    });
    let (outputs, status, error, exit_code) = match result {
        Ok((out, written)) => {
            if out.total > 0 && 2 * out.failed > out.total {
                let msg = format!("{} of {} items failed", out.failed, out.total);
                (written, out.failure.to_string(), Some(msg), 3)
            } else {
                (written, "ok".to_string(), None, 0)
            }
        }
        Err(e) => (Vec::new(), e.name(), Some(e.to_string()), e.exit_code()),
    };
    let entry = ManifestEntry {
        experiment: config.experiment,
        config_hash,
        seed: config.seed,
        outputs_hash: tree_hash(&outputs),
        outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
        error,
    };
    let exit_code = match append_manifest(&config.output_dir, &entry) {
        Ok(()) => exit_code,
        Err(_) if exit_code != 0 => exit_code,
        Err(_) => 1,
    };
    RunReport { entry, exit_code }
}

fn tree_hash(outputs: &[OutputFile]) -> String {
    let mut h = Sha256::new();
    for o in outputs {
        h.update(format!("{}\0{}\n", o.file, o.hash).as_bytes());
    }
    hex::encode(h.finalize())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_outputs(dir: &Path, config_hash: &str, files: &[(String, String)]) -> Result<Vec<OutputFile>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut out = Vec::with_capacity(files.len());
    for (name, content) in files {
        let mut content = content.clone();
        if name.ends_with(".csv") {
            content.push_str(&format!("# manifest: config_hash={config_hash}\n"));
        }
        let path = dir.join(name);
        fs::write(&path, &content).map_err(io_err(&path))?;
        out.push(OutputFile {
            file: name.clone(),
            hash: git_blob_hash(content.as_bytes()),
        });
    }
    Ok(out)
}

fn append_manifest(dir: &Path, entry: &ManifestEntry) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(MANIFEST_FILE);
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(io_err(&path))?;
    let line = serde_json::to_string(entry).expect("manifest entry serializes");
    writeln!(f, "{line}").map_err(io_err(&path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn blob_hash_matches_git_format() {
        // sha256 of "blob 0\0", as `git hash-object` computes for an empty file
        // in a sha256 repository
        assert_eq!(
            git_blob_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = ExperimentConfig::new(Experiment::Cayley, json!({"r_max": 3}), None, "a".into());
        let b = ExperimentConfig::new(Experiment::Cayley, json!({"r_max": 3}), None, "b".into());
        let c = ExperimentConfig::new(Experiment::Cayley, json!({"r_max": 4}), None, "a".into());
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn stochastic_experiments_need_a_seed() {
        let c = ExperimentConfig::new(Experiment::Geodesic, json!({}), None, "x".into());
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let c = ExperimentConfig::new(Experiment::Geodesic, json!({}), Some(1), "x".into());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_params_are_config_errors() {
        let c = ExperimentConfig::new(Experiment::Cayley, json!({"radius": 3}), None, "x".into());
        let err = c.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn module_errors_are_named_by_variant() {
        use crate::words::WordError;
        let e = module_error(WordError::NotFound { max_cost: 3 });
        assert_eq!(e.name(), "NotFound");
        assert_eq!(e.exit_code(), 3);
        let e = module_error(WordError::Algebra(crate::algebra::AlgebraError::DimensionCap(9)));
        assert_eq!(e.name(), "DimensionCap");
    }
}
