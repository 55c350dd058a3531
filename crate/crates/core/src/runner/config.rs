//! TOML experiment configs.
//!
//! A config names its experiment at the top level and keeps that
//! experiment's parameters in a section of the same name:
//!
//! ```toml
//! experiment = "nls-run"
//! output_dir = "runs/soliton"
//!
//! [nls-run]
//! t_final = 10.0
//! dt = 1e-3
//! ```
//!
//! Validation collects every problem (missing keys, wrong types, unknown
//! keys, bad choices) before reporting.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use toml::{Table, Value};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    NlsRun,
    DerrickScan,
    SnGround,
    SnRun,
    Relaxation,
    Branch,
    SignalingScan,
    Resonance,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::NlsRun,
        Experiment::DerrickScan,
        Experiment::SnGround,
        Experiment::SnRun,
        Experiment::Relaxation,
        Experiment::Branch,
        Experiment::SignalingScan,
        Experiment::Resonance,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::NlsRun => "nls-run",
            Experiment::DerrickScan => "derrick-scan",
            Experiment::SnGround => "sn-ground",
            Experiment::SnRun => "sn-run",
            Experiment::Relaxation => "relaxation",
            Experiment::Branch => "branch",
            Experiment::SignalingScan => "signaling-scan",
            Experiment::Resonance => "resonance",
        }
    }

    /// Experiments that draw random numbers and therefore need `rng_seed`.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Experiment::Relaxation | Experiment::Branch)
    }

    fn valid_tags() -> String {
        Experiment::ALL.map(Experiment::tag).join(", ")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown experiment '{s}'; valid tags: {}", Experiment::valid_tags())]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NlsRunParams {
    pub n: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub convention: String,
    pub profile: String,
    pub lambda: f64,
    pub delta: f64,
    pub boost_v: f64,
    pub amplitude: f64,
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerrickScanParams {
    pub n: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub lambda: f64,
    pub param_min: f64,
    pub param_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnGroundParams {
    pub n: usize,
    pub r_max: f64,
    pub norm: f64,
    pub hbar: f64,
    pub mass: f64,
    pub grav: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnRunParams {
    pub n: usize,
    pub r_max: f64,
    pub initial: String,
    pub rms_radius: f64,
    pub norm: f64,
    pub hbar: f64,
    pub mass: f64,
    pub grav: f64,
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationParams {
    pub side: f64,
    pub mass: f64,
    pub modes_per_axis: u32,
    pub phase_seed: u64,
    pub initial: String,
    pub initial_m: u32,
    pub initial_k: u32,
    pub samples: usize,
    pub cells: usize,
    pub periods: f64,
    pub records: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchParams {
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
    pub centers: Vec<f64>,
    pub width: f64,
    pub dynamics: String,
    pub mass: f64,
    pub amplitude: f64,
    pub dt: f64,
    pub horizon: f64,
    pub samples: usize,
    pub tol: f64,
    pub dead_zone: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalingScanParams {
    pub state: String,
    pub d_a: usize,
    pub d_b: usize,
    pub coeffs: Vec<f64>,
    pub unitaries: String,
    pub random_count: usize,
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRunParams {
    pub k: f64,
    pub delta: f64,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub pre_times: Vec<f64>,
    pub post_times: Vec<f64>,
    pub profile_times: Vec<f64>,
    pub noise_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    NlsRun(NlsRunParams),
    DerrickScan(DerrickScanParams),
    SnGround(SnGroundParams),
    SnRun(SnRunParams),
    Relaxation(RelaxationParams),
    Branch(BranchParams),
    SignalingScan(SignalingScanParams),
    Resonance(ResonanceRunParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub rng_seed: Option<u64>,
    pub output_dir: PathBuf,
    pub params: Params,
    /// `key=value` overrides applied on top of the file, in order.
    pub overrides: Vec<String>,
}

const TOP_LEVEL_KEYS: [&str; 3] = ["experiment", "rng_seed", "output_dir"];

/// Where a config comes from, plus the command-line and environment layers.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub text: String,
    pub path: Option<PathBuf>,
    /// Experiment implied by the subcommand, if any.
    pub experiment: Option<Experiment>,
    pub overrides: Vec<String>,
    /// Takes precedence over `output_dir` in the file (`DSL_OUTPUT_DIR`).
    pub output_dir: Option<PathBuf>,
}

/// Reads and validates `path`.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&ConfigSource { text, path: Some(path.to_path_buf()), ..Default::default() })
}

pub fn parse_config(source: &ConfigSource) -> Result<ExperimentConfig> {
    let mut table: Table = toml::from_str(&source.text).map_err(|e| Error::Parse {
        path: source.path.clone().unwrap_or_else(|| PathBuf::from("<config>")),
        message: e.to_string(),
    })?;
    let mut errors = Vec::new();
    let mut unqualified = Vec::new();
    for o in &source.overrides {
        let key = o.split_once('=').map_or(o.as_str(), |(k, _)| k.trim());
        if key.contains('.') || TOP_LEVEL_KEYS.contains(&key) {
            if let Err(e) = apply_override(&mut table, o) {
                errors.push(e);
            }
        } else {
            unqualified.push(o.as_str());
        }
    }

    let experiment = match (table.get("experiment"), source.experiment) {
        (Some(Value::String(s)), implied) => match s.parse::<Experiment>() {
            Ok(e) if implied.is_some_and(|i| i != e) => {
                errors.push(format!("config is for '{e}' but was run as '{}'", implied.expect("checked")));
                None
            }
            Ok(e) => Some(e),
            Err(Error::Config(mut m)) => {
                errors.append(&mut m);
                None
            }
            Err(e) => return Err(e),
        },
        (Some(other), _) => {
            errors.push(format!("experiment: expected a string, found {}", other.type_str()));
            None
        }
        (None, Some(implied)) => Some(implied),
        (None, None) => {
            errors.push(format!("missing key 'experiment'; valid tags: {}", Experiment::valid_tags()));
            None
        }
    };

    if let Some(e) = experiment {
        for o in unqualified {
            if let Err(msg) = apply_override(&mut table, &format!("{}.{o}", e.tag())) {
                errors.push(msg);
            }
        }
    }

    let rng_seed = match table.get("rng_seed") {
        None => None,
        Some(Value::Integer(i)) if *i >= 0 => Some(*i as u64),
        Some(other) => {
            errors.push(format!("rng_seed: expected a non-negative integer, found {other}"));
            None
        }
    };
    if let Some(e) = experiment {
        if e.is_stochastic() && rng_seed.is_none() && !table.contains_key("rng_seed") {
            errors.push(format!("missing key 'rng_seed' (required for the stochastic experiment '{e}')"));
        }
    }
    let file_dir = match table.get("output_dir") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            errors.push(format!("output_dir: expected a string, found {}", other.type_str()));
            None
        }
    };

    for key in table.keys() {
        let known_top = TOP_LEVEL_KEYS.contains(&key.as_str());
        let is_own_section = experiment.is_some_and(|e| e.tag() == key);
        if !known_top && !is_own_section {
            errors.push(format!("unknown key '{key}'"));
        }
    }

    let Some(experiment) = experiment else {
        return Err(Error::Config(errors));
    };
    let empty = Table::new();
    let section = match table.get(experiment.tag()) {
        None => &empty,
        Some(Value::Table(t)) => t,
        Some(other) => {
            errors.push(format!("[{experiment}]: expected a table, found {}", other.type_str()));
            &empty
        }
    };
    let mut r = Reader { table: section, section: experiment.tag(), used: BTreeSet::new(), errors: &mut errors };
    let params = read_params(experiment, &mut r);
    r.finish();
    if let Params::SignalingScan(p) = &params {
        if p.unitaries == "random" && rng_seed.is_none() && !table.contains_key("rng_seed") {
            errors.push("missing key 'rng_seed' (required when signaling-scan.unitaries = \"random\")".into());
        }
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let output_dir = source
        .output_dir
        .clone()
        .or(file_dir)
        .unwrap_or_else(|| PathBuf::from("runs").join(experiment.tag()));
    Ok(ExperimentConfig { experiment, rng_seed, output_dir, params, overrides: source.overrides.clone() })
}

/// `section.key=value` or `key=value`; the value is read as a TOML literal,
/// falling back to a bare string.
fn apply_override(table: &mut Table, item: &str) -> std::result::Result<(), String> {
    let (path, raw) = item.split_once('=').ok_or_else(|| format!("override '{item}' is not of the form key=value"))?;
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = path.trim().split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| format!("override '{item}' has an empty key"))?;
    let mut node = table;
    for p in parts {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry.as_table_mut().ok_or_else(|| format!("override '{item}': '{p}' is not a section"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

struct Reader<'a> {
    table: &'a Table,
    section: &'static str,
    used: BTreeSet<String>,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn get(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    fn fail(&mut self, key: &str, message: String) {
        self.errors.push(format!("{}.{key}: {message}", self.section));
    }

    fn missing(&mut self, key: &str) {
        self.errors.push(format!("missing key '{}.{key}'", self.section));
    }

    fn float(&mut self, key: &str, default: Option<f64>) -> f64 {
        match self.get(key).cloned() {
            Some(Value::Float(f)) => f,
            Some(Value::Integer(i)) => i as f64,
            Some(other) => {
                self.fail(key, format!("expected a number, found {}", other.type_str()));
                f64::NAN
            }
            None => default.unwrap_or_else(|| {
                self.missing(key);
                f64::NAN
            }),
        }
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> f64 {
        let v = self.float(key, default);
        if !(v > 0.0) && !v.is_nan() {
            self.fail(key, format!("must be > 0, got {v}"));
        }
        v
    }

    fn uint(&mut self, key: &str, default: Option<u64>) -> u64 {
        match self.get(key).cloned() {
            Some(Value::Integer(i)) if i >= 0 => i as u64,
            Some(Value::Integer(i)) => {
                self.fail(key, format!("must be non-negative, got {i}"));
                0
            }
            Some(other) => {
                self.fail(key, format!("expected an integer, found {}", other.type_str()));
                0
            }
            None => default.unwrap_or_else(|| {
                self.missing(key);
                0
            }),
        }
    }

    fn count(&mut self, key: &str, default: Option<u64>) -> usize {
        let v = self.uint(key, default) as usize;
        if matches!(self.table.get(key), Some(Value::Integer(0))) {
            self.fail(key, "must be >= 1".into());
        }
        v
    }

    fn choice(&mut self, key: &str, choices: &[&str], default: &str) -> String {
        match self.get(key).cloned() {
            Some(Value::String(s)) if choices.contains(&s.as_str()) => s,
            Some(Value::String(s)) => {
                self.fail(key, format!("unknown value '{s}'; expected one of {}", choices.join(", ")));
                default.to_string()
            }
            Some(other) => {
                self.fail(key, format!("expected a string, found {}", other.type_str()));
                default.to_string()
            }
            None => default.to_string(),
        }
    }

    fn floats(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        match self.get(key).cloned() {
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Value::Float(f) => out.push(f),
                        Value::Integer(i) => out.push(i as f64),
                        other => {
                            self.fail(key, format!("expected an array of numbers, found {}", other.type_str()));
                            return default.to_vec();
                        }
                    }
                }
                out
            }
            Some(other) => {
                self.fail(key, format!("expected an array, found {}", other.type_str()));
                default.to_vec()
            }
            None => default.to_vec(),
        }
    }

    fn finish(self) {
        for key in self.table.keys() {
            if !self.used.contains(key) {
                self.errors.push(format!("unknown key '{}.{key}'", self.section));
            }
        }
    }
}

const CONVENTIONS: &[&str] = &["unit-dispersion", "self-focusing"];

fn read_params(experiment: Experiment, r: &mut Reader<'_>) -> Params {
    match experiment {
        Experiment::NlsRun => Params::NlsRun(NlsRunParams {
            n: r.count("n", Some(1024)),
            z_min: r.float("z_min", Some(-40.0)),
            z_max: r.float("z_max", Some(40.0)),
            convention: r.choice("convention", CONVENTIONS, "unit-dispersion"),
            profile: r.choice("profile", &["soliton", "gaussian"], "soliton"),
            lambda: r.positive("lambda", Some(1.0)),
            delta: r.float("delta", Some(0.0)),
            boost_v: r.float("boost_v", Some(0.0)),
            amplitude: r.positive("amplitude", Some(2.0)),
            t_final: r.positive("t_final", Some(10.0)),
            dt: r.positive("dt", Some(1e-3)),
            record_every: r.count("record_every", Some(100)),
        }),
        Experiment::DerrickScan => Params::DerrickScan(DerrickScanParams {
            n: r.count("n", Some(2048)),
            z_min: r.float("z_min", Some(-60.0)),
            z_max: r.float("z_max", Some(60.0)),
            lambda: r.positive("lambda", Some(1.0)),
            param_min: r.positive("param_min", Some(0.5)),
            param_max: r.positive("param_max", Some(2.0)),
            points: r.count("points", Some(31)),
        }),
        Experiment::SnGround => Params::SnGround(SnGroundParams {
            n: r.count("n", Some(4096)),
            r_max: r.positive("r_max", Some(80.0)),
            norm: r.positive("norm", Some(1.0)),
            hbar: r.positive("hbar", Some(1.0)),
            mass: r.positive("mass", Some(1.0)),
            grav: r.positive("grav", Some(1.0)),
            tol: r.positive("tol", Some(1e-12)),
        }),
        Experiment::SnRun => Params::SnRun(SnRunParams {
            n: r.count("n", Some(8192)),
            r_max: r.positive("r_max", Some(400.0)),
            initial: r.choice("initial", &["gaussian", "ground-state"], "gaussian"),
            rms_radius: r.positive("rms_radius", Some(1.0)),
            norm: r.positive("norm", Some(1.0)),
            hbar: r.positive("hbar", Some(1.0)),
            mass: r.positive("mass", Some(1.0)),
            grav: r.positive("grav", Some(1.0)),
            t_final: r.positive("t_final", Some(20.0)),
            dt: r.positive("dt", Some(5e-3)),
            record_every: r.count("record_every", Some(100)),
        }),
        Experiment::Relaxation => Params::Relaxation(RelaxationParams {
            side: r.positive("side", Some(std::f64::consts::PI)),
            mass: r.positive("mass", Some(1.0)),
            modes_per_axis: r.count("modes_per_axis", Some(4)) as u32,
            phase_seed: r.uint("phase_seed", Some(2024)),
            initial: r.choice("initial", &["box-mode", "equilibrium"], "box-mode"),
            initial_m: r.count("initial_m", Some(1)) as u32,
            initial_k: r.count("initial_k", Some(1)) as u32,
            samples: r.count("samples", Some(10_000)),
            cells: r.count("cells", Some(16)),
            periods: r.positive("periods", Some(8.0)),
            records: r.count("records", Some(16)),
            tol: r.positive("tol", Some(1e-8)),
        }),
        Experiment::Branch => Params::Branch(BranchParams {
            weights: r.floats("weights", &[0.3, 0.7]),
            phases: r.floats("phases", &[]),
            centers: r.floats("centers", &[-8.0, 8.0]),
            width: r.positive("width", Some(1.0)),
            dynamics: r.choice("dynamics", &["free", "unit-dispersion", "self-focusing"], "free"),
            mass: r.positive("mass", Some(1.0)),
            amplitude: r.positive("amplitude", Some(1.0)),
            dt: r.positive("dt", Some(1e-3)),
            horizon: r.positive("horizon", Some(2.0)),
            samples: r.count("samples", Some(10_000)),
            tol: r.positive("tol", Some(1e-8)),
            dead_zone: r.float("dead_zone", Some(0.5)),
        }),
        Experiment::SignalingScan => Params::SignalingScan(SignalingScanParams {
            state: r.choice("state", &["schmidt", "bell", "custom"], "schmidt"),
            d_a: r.count("d_a", Some(2)),
            d_b: r.count("d_b", Some(2)),
            coeffs: r.floats("coeffs", &[]),
            unitaries: r.choice("unitaries", &["identity-hadamard", "random"], "identity-hadamard"),
            random_count: r.count("random_count", Some(20)),
            exponents: r.floats("exponents", &[1.0, 2.0]),
        }),
        Experiment::Resonance => Params::Resonance(ResonanceRunParams {
            k: r.float("k", Some(0.6)),
            delta: r.float("delta", Some(0.0)),
            n: r.count("n", Some(32768)),
            x_min: r.float("x_min", Some(-150.0)),
            x_max: r.float("x_max", Some(150.0)),
            pre_times: r.floats("pre_times", &[-300.0, -250.0]),
            post_times: r.floats("post_times", &[210.0, 260.0]),
            profile_times: r.floats("profile_times", &[-300.0, 0.0, 260.0]),
            noise_floor: r.positive("noise_floor", Some(1e-3)),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(&ConfigSource { text: text.into(), ..Default::default() })
    }

    fn errors(text: &str) -> Vec<String> {
        match parse(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_nls_config_gets_defaults() {
        let c = parse("experiment = \"nls-run\"\n").unwrap();
        let Params::NlsRun(p) = c.params else { panic!() };
        assert_eq!(p.dt, 1e-3);
        assert_eq!(p.record_every, 100);
        assert_eq!(c.output_dir, PathBuf::from("runs/nls-run"));
    }

    #[test]
    fn relaxation_requires_seed() {
        let e = errors("experiment = \"relaxation\"\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("rng_seed"));
    }

    #[test]
    fn unknown_tag_lists_valid_ones() {
        let e = errors("experiment = \"warp-drive\"\n");
        assert!(e[0].contains("warp-drive") && e[0].contains("signaling-scan") && e[0].contains("nls-run"));
    }

    #[test]
    fn all_errors_are_reported() {
        let e = errors("experiment = \"nls-run\"\n[nls-run]\ndt = \"small\"\nrecord_every = 1.5\nwibble = 3\n");
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn overrides_replace_values() {
        let source = ConfigSource {
            text: "experiment = \"nls-run\"\n[nls-run]\ndt = 1e-3\n".into(),
            overrides: vec!["nls-run.dt=5e-4".into(), "convention=self-focusing".into()],
            ..Default::default()
        };
        let c = parse_config(&source).unwrap();
        let Params::NlsRun(p) = c.params else { panic!() };
        assert_eq!(p.dt, 5e-4);
        assert_eq!(p.convention, "self-focusing");
        assert_eq!(c.overrides.len(), 2);
    }

    #[test]
    fn subcommand_supplies_or_checks_experiment() {
        let implied = ConfigSource { text: "rng_seed = 1\n".into(), experiment: Some(Experiment::Branch), ..Default::default() };
        assert_eq!(parse_config(&implied).unwrap().experiment, Experiment::Branch);
        let clash = ConfigSource { text: "experiment = \"sn-run\"\n".into(), experiment: Some(Experiment::Branch), ..Default::default() };
        assert!(parse_config(&clash).is_err());
    }

    #[test]
    fn environment_directory_wins() {
        let source = ConfigSource {
            text: "experiment = \"sn-ground\"\noutput_dir = \"a\"\n".into(),
            output_dir: Some(PathBuf::from("b")),
            ..Default::default()
        };
        assert_eq!(parse_config(&source).unwrap().output_dir, PathBuf::from("b"));
    }
}
