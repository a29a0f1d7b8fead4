//! Scenario configuration: JSON or flat key=value text, with defaults and validation.

use std::collections::BTreeMap;
use std::fmt;

use gravac_core::analysis::Observable;
use gravac_core::generators::Variant;
use gravac_core::params::{to_dimensionless, DimensionlessParams, PhysicalParams};
use serde_json::Value as Json;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Coeffs,
    Evolve,
    Steady,
    Ladder,
    SweepCutoff,
    FreeParticle,
    Validity,
    Discriminate,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Coeffs,
        Scenario::Evolve,
        Scenario::Steady,
        Scenario::Ladder,
        Scenario::SweepCutoff,
        Scenario::FreeParticle,
        Scenario::Validity,
        Scenario::Discriminate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Coeffs => "coeffs",
            Scenario::Evolve => "evolve",
            Scenario::Steady => "steady",
            Scenario::Ladder => "ladder",
            Scenario::SweepCutoff => "sweep-cutoff",
            Scenario::FreeParticle => "free-particle",
            Scenario::Validity => "validity",
            Scenario::Discriminate => "discriminate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Str,
    Float,
    Int,
    Bool,
    FloatList,
}

/// A key the configuration accepts.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` when the key has no default and stays unset unless given.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { name, kind, default, help }
}

pub const KEYS: &[KeySpec] = &[
    key("scenario", Kind::Str, None, "coeffs | evolve | steady | ladder | sweep-cutoff | free-particle | validity | discriminate"),
    key("variant", Kind::Str, Some("xi_rwa"), "x_full | x_rwa | xi_full | xi_rwa | amp | pha"),
    key("observable", Kind::Str, Some("xi"), "x | xi (sweep-cutoff, free-particle)"),
    key("dim", Kind::Int, Some("12"), "Fock truncation"),
    key("lambda_cut", Kind::Float, Some("10"), "Ω_max/ω"),
    key("gamma_bar", Kind::Float, Some("0.001"), "Γ/ω including coupling_scale"),
    key("coupling_scale", Kind::Float, Some("1"), "amplification applied to Γ derived from SI parameters"),
    key("mu", Kind::Float, None, "reduced mass (kg)"),
    key("omega", Kind::Float, None, "trap frequency (rad/s); with omega_max, sets lambda_cut and gamma_bar"),
    key("omega_max", Kind::Float, None, "UV cutoff (rad/s)"),
    key("renormalized", Kind::Bool, Some("true"), "use the renormalized shifts"),
    key("initial", Kind::Str, None, "thermal | fock | superposition (default: superposition for discriminate, thermal otherwise)"),
    key("beta_bar", Kind::Float, Some("0.6931471805599453"), "ħωβ of the thermal seed"),
    key("fock_n", Kind::Int, Some("0"), "level of the Fock seed"),
    key("amplitudes", Kind::FloatList, Some("0.7071067811865476,0,0.7071067811865476"), "real amplitudes of the superposition seed"),
    key("t_final", Kind::Float, Some("10"), "final time (1/ω)"),
    key("dt", Kind::Float, None, "RK4 step (default: 1e-3 of the fastest period)"),
    key("record_every", Kind::Float, Some("1"), "output interval"),
    key("stepper", Kind::Str, Some("rk4"), "rk4 | adaptive"),
    key("tol", Kind::Float, Some("1e-10"), "adaptive-stepper tolerance"),
    key("lambda_min", Kind::Float, Some("100"), "smallest cutoff of the sweep"),
    key("lambda_max", Kind::Float, Some("10000"), "largest cutoff of the sweep"),
    key("lambda_points", Kind::Int, Some("41"), "log-spaced sweep points"),
    key("gamma_t", Kind::Float, Some("0.001"), "Γt of the positivity probe"),
    key("rate", Kind::Float, Some("0.1"), "channel rate (discriminate)"),
    key("mean_q", Kind::Float, Some("0"), "Gaussian seed ⟨q⟩"),
    key("mean_p", Kind::Float, Some("0"), "Gaussian seed ⟨p⟩"),
    key("var_q", Kind::Float, Some("1"), "Gaussian seed position variance"),
    key("var_p", Kind::Float, Some("0.5"), "Gaussian seed momentum variance"),
    key("cov", Kind::Float, Some("0"), "Gaussian seed ½⟨{q,p}⟩ − ⟨q⟩⟨p⟩"),
    key("delta", Kind::Float, Some("0.001"), "free-particle Δ in units ħ = μ = 1"),
    key("jobs", Kind::Int, Some("1"), "worker threads for sweeps"),
    key("output", Kind::Str, Some("-"), "output path, - for stdout"),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Float(f64),
    Int(i64),
    Bool(bool),
    FloatList(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "{s}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::FloatList(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// One unparsed setting.
#[derive(Debug, Clone, PartialEq)]
pub enum Raw {
    Text(String),
    Json(Json),
}

fn mismatch(key: &str, expected: &str, got: &str) -> CliError {
    CliError::Config(format!("{key}: type mismatch, expected {expected}, got {got}"))
}

fn parse_text(spec: &KeySpec, s: &str) -> Result<Value, CliError> {
    let s = s.trim();
    let k = spec.name;
    Ok(match spec.kind {
        Kind::Str => Value::Str(s.to_string()),
        Kind::Float => Value::Float(s.parse().map_err(|_| mismatch(k, "a number", s))?),
        Kind::Int => Value::Int(s.parse().map_err(|_| mismatch(k, "an integer", s))?),
        Kind::Bool => Value::Bool(s.parse().map_err(|_| mismatch(k, "true or false", s))?),
        Kind::FloatList => Value::FloatList(
            s.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse().map_err(|_| mismatch(k, "a comma-separated list of numbers", s)))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn parse_json(spec: &KeySpec, v: &Json) -> Result<Value, CliError> {
    let k = spec.name;
    let shown = v.to_string();
    Ok(match (spec.kind, v) {
        (Kind::Str, Json::String(s)) => Value::Str(s.clone()),
        (Kind::Float, Json::Number(n)) => Value::Float(n.as_f64().ok_or_else(|| mismatch(k, "a number", &shown))?),
        (Kind::Int, Json::Number(n)) => Value::Int(n.as_i64().ok_or_else(|| mismatch(k, "an integer", &shown))?),
        (Kind::Bool, Json::Bool(b)) => Value::Bool(*b),
        (Kind::FloatList, Json::Array(a)) => Value::FloatList(
            a.iter().map(|x| x.as_f64().ok_or_else(|| mismatch(k, "an array of numbers", &shown))).collect::<Result<_, _>>()?,
        ),
        (kind, _) => {
            let expected = match kind {
                Kind::Str => "a string",
                Kind::Float => "a number",
                Kind::Int => "an integer",
                Kind::Bool => "a boolean",
                Kind::FloatList => "an array of numbers",
            };
            return Err(mismatch(k, expected, &shown));
        }
    })
}

/// Splits mixed input into a JSON object (if any) and key=value lines, then merges with JSON winning.
pub fn parse_raw(text: &str) -> Result<BTreeMap<String, Raw>, CliError> {
    let mut kv = BTreeMap::new();
    let mut json_text = String::new();
    let mut depth: i64 = 0;
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if depth > 0 || (json_text.is_empty() && t.starts_with('{')) {
            json_text.push_str(line);
            json_text.push('\n');
            depth += t.matches('{').count() as i64 - t.matches('}').count() as i64;
            continue;
        }
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{t}`", lineno + 1)))?;
        kv.insert(k.trim().to_string(), Raw::Text(v.trim().to_string()));
    }
    if !json_text.is_empty() {
        let parsed: Json = serde_json::from_str(&json_text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let obj = parsed.as_object().ok_or_else(|| CliError::Config("JSON configuration must be an object".into()))?;
        for (k, v) in obj {
            kv.insert(k.clone(), Raw::Json(v.clone()));
        }
    }
    Ok(kv)
}

/// A fully resolved configuration; every key with a default is present.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    values: BTreeMap<&'static str, Value>,
}

impl ScenarioConfig {
    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("`{key}` is resolved"))
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            other => panic!("`{key}` is not a float: {other:?}"),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.is_set(key).then(|| self.f64(key))
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Int(v) => *v as usize,
            other => panic!("`{key}` is not an integer: {other:?}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(v) => *v,
            other => panic!("`{key}` is not a boolean: {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(v) => v,
            other => panic!("`{key}` is not a string: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            other => panic!("`{key}` is not a list: {other:?}"),
        }
    }

    pub fn variant(&self) -> Variant {
        Variant::parse(self.str("variant")).expect("validated")
    }

    pub fn observable(&self) -> Observable {
        Observable::parse(self.str("observable")).expect("validated")
    }

    pub fn dimensionless(&self) -> DimensionlessParams<f64> {
        DimensionlessParams::with_scale(self.f64("lambda_cut"), self.f64("gamma_bar"), self.f64("coupling_scale")).expect("validated")
    }

    /// Every resolved key with its value, in key order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        self.values.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    /// `# key=value` header lines.
    pub fn header(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }

    /// key=value text that parses back to the same configuration.
    pub fn to_kv(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Parses JSON or key=value text (JSON wins on conflicts) and resolves defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    resolve(parse_raw(text)?)
}

pub fn resolve(raw: BTreeMap<String, Raw>) -> Result<ScenarioConfig, CliError> {
    let mut values: BTreeMap<&'static str, Value> = BTreeMap::new();
    for (k, r) in &raw {
        let spec = key_spec(k).ok_or_else(|| CliError::Config(format!("unknown key `{k}`")))?;
        let v = match r {
            Raw::Text(s) => parse_text(spec, s)?,
            Raw::Json(j) => parse_json(spec, j)?,
        };
        values.insert(spec.name, v);
    }
    let scenario = match values.get("scenario") {
        Some(Value::Str(s)) => Scenario::parse(s).ok_or_else(|| CliError::Config(format!("scenario: unknown scenario `{s}`")))?,
        _ => return Err(CliError::Config("scenario required".into())),
    };
    if !values.contains_key("initial") {
        let init = if scenario == Scenario::Discriminate { "superposition" } else { "thermal" };
        values.insert("initial", Value::Str(init.into()));
    }
    let physical = ["mu", "omega", "omega_max"].iter().any(|k| values.contains_key(k));
    if physical {
        let get = |values: &BTreeMap<&'static str, Value>, k: &str| match values.get(k) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        };
        let (Some(omega), Some(omega_max)) = (get(&values, "omega"), get(&values, "omega_max")) else {
            return Err(CliError::Config("omega: SI parameters need both omega and omega_max".into()));
        };
        let mu = get(&values, "mu").unwrap_or(1.0);
        let scale = get(&values, "coupling_scale").unwrap_or(1.0);
        let p = PhysicalParams::new(mu, omega, omega_max).map_err(CliError::from_config)?;
        let d = to_dimensionless(&p, scale).map_err(CliError::from_config)?;
        for (k, derived) in [("lambda_cut", d.lambda_cut), ("gamma_bar", d.gamma_bar)] {
            match get(&values, k) {
                Some(v) if v != derived => {
                    return Err(CliError::Config(format!("{k}: given as {v} but the SI parameters give {derived}")));
                }
                _ => {
                    values.insert(k, Value::Float(derived));
                }
            }
        }
    }
    for spec in KEYS {
        if let (false, Some(d)) = (values.contains_key(spec.name), spec.default) {
            values.insert(spec.name, parse_text(spec, d)?);
        }
    }
    let cfg = ScenarioConfig { scenario, values };
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(cfg: &ScenarioConfig, key: &str) -> Result<(), CliError> {
    let v = cfg.f64(key);
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Config(format!("{key}: must be positive, got {v}")));
    }
    Ok(())
}

fn validate(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let dim = match cfg.get("dim") {
        Value::Int(d) => *d,
        _ => unreachable!(),
    };
    if dim < 2 {
        return Err(CliError::Config(format!("dim: a Fock truncation needs at least 2 levels, got {dim}")));
    }
    if Variant::parse(cfg.str("variant")).is_none() {
        return Err(CliError::Config(format!("variant: unknown variant `{}`", cfg.str("variant"))));
    }
    if Observable::parse(cfg.str("observable")).is_none() {
        return Err(CliError::Config(format!("observable: expected x or xi, got `{}`", cfg.str("observable"))));
    }
    if !["thermal", "fock", "superposition"].contains(&cfg.str("initial")) {
        return Err(CliError::Config(format!("initial: expected thermal, fock or superposition, got `{}`", cfg.str("initial"))));
    }
    if !["rk4", "adaptive"].contains(&cfg.str("stepper")) {
        return Err(CliError::Config(format!("stepper: expected rk4 or adaptive, got `{}`", cfg.str("stepper"))));
    }
    DimensionlessParams::with_scale(cfg.f64("lambda_cut"), cfg.f64("gamma_bar"), cfg.f64("coupling_scale"))
        .map_err(CliError::from_config)?;
    for key in ["t_final", "record_every", "tol", "beta_bar", "rate", "lambda_min", "lambda_max"] {
        positive(cfg, key)?;
    }
    if cfg.is_set("dt") {
        positive(cfg, "dt")?;
    }
    if cfg.f64("gamma_t") < 0.0 {
        return Err(CliError::Config("gamma_t: must be non-negative".into()));
    }
    if cfg.usize("jobs") == 0 || matches!(cfg.get("jobs"), Value::Int(j) if *j < 0) {
        return Err(CliError::Config("jobs: must be at least 1".into()));
    }
    if matches!(cfg.get("fock_n"), Value::Int(n) if *n < 0 || *n >= dim) {
        return Err(CliError::Config(format!("fock_n: must lie in 0..{dim}")));
    }
    if cfg.list("amplitudes").len() > dim as usize {
        return Err(CliError::Config(format!("amplitudes: more than dim = {dim} entries")));
    }
    if matches!(cfg.get("lambda_points"), Value::Int(n) if *n < 8) {
        return Err(CliError::Config("lambda_points: need at least 8".into()));
    }
    Ok(())
}
