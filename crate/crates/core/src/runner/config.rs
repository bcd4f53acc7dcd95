//! Experiment configs: TOML flattened to dotted keys, environment overrides,
//! and validation that reports every problem at once.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{Error, Result, ValidationIssue};
use crate::grid::{Generator, Grid, GridField};
use crate::phi::{BoxDomain, Family, PhiFunction};
use crate::spatial::SpatialFn;

/// Prefix of environment variables that override config keys:
/// `OMAX__GRID__H=0.01` sets `grid.h`.
pub const ENV_PREFIX: &str = "OMAX__";

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialSpec {
    Constant(f64),
    Affine { base: f64, slope: f64 },
    ClampedRamp { base: f64, slope: f64, lo: f64, hi: f64 },
    GaussianBump { base: f64, amplitude: f64, center: Vec<f64>, width: f64 },
    LogDecay { limit: f64, amplitude: f64 },
    File(PathBuf),
}

impl SpatialSpec {
    pub fn build(&self) -> Result<SpatialFn> {
        Ok(match self {
            SpatialSpec::Constant(c) => SpatialFn::Constant(*c),
            SpatialSpec::Affine { base, slope } => SpatialFn::Affine { base: *base, slope: *slope },
            SpatialSpec::ClampedRamp { base, slope, lo, hi } => SpatialFn::ClampedRamp {
                base: *base,
                slope: *slope,
                lo: *lo,
                hi: *hi,
            },
            SpatialSpec::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => SpatialFn::GaussianBump {
                base: *base,
                amplitude: *amplitude,
                center: center.clone(),
                width: *width,
            },
            SpatialSpec::LogDecay { limit, amplitude } => SpatialFn::LogDecay {
                limit: *limit,
                amplitude: *amplitude,
            },
            SpatialSpec::File(path) => SpatialFn::Sampled(std::sync::Arc::new(crate::grid::read_field(path)?)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiSpec {
    PowerLaw { p: f64 },
    Autonomous { p: f64 },
    VariableExponent { p_field: SpatialSpec },
    DoublePhase { p: f64, q: f64, a: SpatialSpec },
    Weighted { p: f64, weight: SpatialSpec },
}

impl PhiSpec {
    pub fn build(&self, dim: usize) -> Result<PhiFunction> {
        let family = match self {
            PhiSpec::PowerLaw { p } => Family::PowerLaw { p: *p },
            PhiSpec::Autonomous { p } => Family::Autonomous { p: *p },
            PhiSpec::VariableExponent { p_field } => Family::VariableExponent { p_field: p_field.build()? },
            PhiSpec::DoublePhase { p, q, a } => Family::DoublePhase {
                p: *p,
                q: *q,
                a_field: a.build()?,
            },
            PhiSpec::Weighted { p, weight } => Family::Weighted {
                p: *p,
                weight: weight.build()?,
            },
        };
        PhiFunction::new(family, BoxDomain::whole(dim))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::covering(&self.lo, &self.hi, self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Zero,
    Constant(f64),
    Indicator { lo: Vec<f64>, hi: Vec<f64> },
    Tent { center: Vec<f64>, radius: f64, height: f64 },
    SmoothBump { center: Vec<f64>, radius: f64, height: f64 },
    CosBump { center: Vec<f64>, radius: f64, height: f64 },
    PolyBump { center: Vec<f64>, radius: f64, height: f64 },
    Gaussian { center: Vec<f64>, width: f64, height: f64 },
    Noise { seed: Option<u64>, amplitude: f64, passes: usize, center: Vec<f64>, radius: f64 },
    File(PathBuf),
}

impl FieldSpec {
    /// Generator for this spec; noise without its own seed uses `run_seed`.
    pub fn generator(&self, run_seed: u64) -> Generator {
        match self.clone() {
            FieldSpec::Zero => Generator::Zero,
            FieldSpec::Constant(c) => Generator::Constant(c),
            FieldSpec::Indicator { lo, hi } => Generator::Indicator { lo, hi },
            FieldSpec::Tent { center, radius, height } => Generator::Tent { center, radius, height },
            FieldSpec::SmoothBump { center, radius, height } => Generator::SmoothBump { center, radius, height },
            FieldSpec::CosBump { center, radius, height } => Generator::CosBump { center, radius, height },
            FieldSpec::PolyBump { center, radius, height } => Generator::PolyBump { center, radius, height },
            FieldSpec::Gaussian { center, width, height } => Generator::Gaussian { center, width, height },
            FieldSpec::Noise {
                seed,
                amplitude,
                passes,
                center,
                radius,
            } => Generator::Noise {
                seed: seed.unwrap_or(run_seed),
                amplitude,
                passes,
                center,
                radius,
            },
            FieldSpec::File(path) => Generator::File(path),
        }
    }

    /// File fields cannot be resampled on a refined grid.
    pub fn refinable(&self) -> bool {
        !matches!(self, FieldSpec::File(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyParams {
    pub eps: f64,
    /// `R` of the observation ball `B(0, R)`.
    pub radius: f64,
    /// Radii of the balls `B(0, r)` used in the decay estimate.
    pub decay_radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityParams {
    pub field: Option<String>,
    pub m_steps: usize,
    pub start: f64,
    pub ratio: f64,
    pub families: Vec<String>,
    pub bump_center: Vec<f64>,
    pub bump_radius: f64,
    pub noise_center: Vec<f64>,
    pub noise_radius: f64,
    pub radius: f64,
    pub lambda: f64,
    pub delta0: f64,
    pub eps: f64,
    /// Final output gap must fall below this fraction of the first one.
    pub target_ratio: f64,
    /// Final radius-stability measure must fall below this fraction of `|B(0,R)|`.
    pub stability_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionParams {
    pub p_inf: Option<f64>,
    pub cap: f64,
}

/// A validated experiment config.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub phi: PhiSpec,
    pub grid: GridSpec,
    /// Ordered by name.
    pub fields: Vec<(String, FieldSpec)>,
    pub seed: u64,
    pub r_max: Option<f64>,
    pub radius_tol: f64,
    pub norm_tol: f64,
    pub verify: VerifyParams,
    pub continuity: ContinuityParams,
    pub conditions: ConditionParams,
    pub out_dir: Option<PathBuf>,
    /// Canonical `key = value` lines of the effective (overridden) config.
    pub echo: String,
}

impl ExperimentConfig {
    /// SHA-256 of the canonical echo, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.echo.as_bytes()))
    }

    /// Replaces the seed and its line in the echo, so the hash follows.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        let mut lines: Vec<String> = self
            .echo
            .lines()
            .filter(|l| !l.starts_with("seed = "))
            .map(str::to_string)
            .chain([format!("seed = {seed}")])
            .collect();
        lines.sort();
        self.echo = lines.into_iter().map(|l| l + "\n").collect();
        self
    }

    pub fn build_fields(&self, grid: &Grid) -> Result<Vec<(String, GridField)>> {
        self.fields
            .iter()
            .map(|(name, spec)| Ok((name.clone(), crate::grid::make_field(grid, &spec.generator(self.seed))?)))
            .collect()
    }
}

/// Reads, overrides from the process environment, and validates.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    parse_config_with_env(path, std::env::vars())
}

pub fn parse_config_with_env(
    path: impl AsRef<Path>,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Validation(vec![ValidationIssue {
            path: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    parse_config_str(&text, env, path.parent())
}

/// Parses config text; relative file paths resolve against `base_dir`.
pub fn parse_config_str(
    text: &str,
    env: impl IntoIterator<Item = (String, String)>,
    base_dir: Option<&Path>,
) -> Result<ExperimentConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Validation(vec![ValidationIssue {
            path: "<syntax>".into(),
            message: e.message().to_string(),
        }])
    })?;
    let mut map = BTreeMap::new();
    flatten("", &Value::Table(table), &mut map);
    for (key, raw) in env {
        if let Some(rest) = key.strip_prefix(ENV_PREFIX) {
            let dotted = rest.split("__").map(str::to_lowercase).collect::<Vec<_>>().join(".");
            map.insert(dotted, parse_scalar(&raw));
        }
    }
    let mut r = Reader {
        map: &map,
        used: BTreeSet::new(),
        issues: Vec::new(),
        base_dir: base_dir.map(Path::to_path_buf),
    };
    let cfg = build(&mut r);
    for key in map.keys() {
        if !r.used.contains(key) {
            r.issue(key, "unknown key");
        }
    }
    if r.issues.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Validation(r.issues))
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        v => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

/// An override value parsed as a TOML value, falling back to a string.
fn parse_scalar(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

struct Reader<'a> {
    map: &'a BTreeMap<String, Value>,
    used: BTreeSet<String>,
    issues: Vec<ValidationIssue>,
    base_dir: Option<PathBuf>,
}

impl Reader<'_> {
    fn issue(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn get(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.map.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::Float(v)) => Some(v),
            Some(Value::Integer(v)) => Some(v as f64),
            Some(other) => {
                self.issue(key, format!("expected a number, got {other}"));
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.opt_f64(key).unwrap_or(default)
    }

    fn req_f64(&mut self, key: &str) -> f64 {
        if !self.has(key) {
            self.issue(key, "missing required number");
            self.used.insert(key.to_string());
            return f64::NAN;
        }
        self.opt_f64(key).unwrap_or(f64::NAN)
    }

    fn positive(&mut self, key: &str, value: f64) -> f64 {
        if !(value > 0.0 && value.is_finite()) && !value.is_nan() {
            self.issue(key, format!("must be a positive finite number, got {value}"));
        }
        value
    }

    fn opt_u64(&mut self, key: &str) -> Option<u64> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::Integer(v)) if v >= 0 => Some(v as u64),
            Some(other) => {
                self.issue(key, format!("expected a nonnegative integer, got {other}"));
                None
            }
        }
    }

    fn vec_f64(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for item in items {
                    match item {
                        Value::Float(v) => out.push(v),
                        Value::Integer(v) => out.push(v as f64),
                        other => {
                            self.issue(key, format!("expected an array of numbers, found {other}"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(Value::Float(v)) => Some(vec![v]),
            Some(Value::Integer(v)) => Some(vec![v as f64]),
            Some(other) => {
                self.issue(key, format!("expected an array of numbers, got {other}"));
                None
            }
        }
    }

    fn req_vec(&mut self, key: &str) -> Vec<f64> {
        if !self.has(key) {
            self.issue(key, "missing required array");
            self.used.insert(key.to_string());
            return Vec::new();
        }
        self.vec_f64(key).unwrap_or_default()
    }

    fn opt_str(&mut self, key: &str) -> Option<String> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(other) => {
                self.issue(key, format!("expected a string, got {other}"));
                None
            }
        }
    }

    fn str_list(&mut self, key: &str) -> Option<Vec<String>> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::Array(items)) => items
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Some(s),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .or_else(|| {
                    self.issue(key, "expected an array of strings");
                    None
                }),
            Some(Value::String(s)) => Some(s.split(',').map(|p| p.trim().to_string()).collect()),
            Some(other) => {
                self.issue(key, format!("expected an array of strings, got {other}"));
                None
            }
        }
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        let raw = self.opt_str(key)?;
        let p = PathBuf::from(raw);
        let p = match (&self.base_dir, p.is_relative()) {
            (Some(base), true) => base.join(p),
            _ => p,
        };
        if !p.exists() {
            self.issue(key, format!("file {} does not exist", p.display()));
        }
        Some(p)
    }

    fn spatial(&mut self, prefix: &str) -> SpatialSpec {
        let kind_key = format!("{prefix}.kind");
        let Some(kind) = self.opt_str(&kind_key) else {
            if self.has(prefix) {
                // Bare number shorthand: `phi.a = 0.5`.
                return SpatialSpec::Constant(self.req_f64(prefix));
            }
            self.issue(&kind_key, "missing spatial function kind");
            return SpatialSpec::Constant(f64::NAN);
        };
        let k = |s: &str| format!("{prefix}.{s}");
        match kind.as_str() {
            "constant" => SpatialSpec::Constant(self.req_f64(&k("value"))),
            "affine" => SpatialSpec::Affine {
                base: self.f64_or(&k("base"), 0.0),
                slope: self.req_f64(&k("slope")),
            },
            "clamped_ramp" => SpatialSpec::ClampedRamp {
                base: self.f64_or(&k("base"), 0.0),
                slope: self.req_f64(&k("slope")),
                lo: self.req_f64(&k("lo")),
                hi: self.req_f64(&k("hi")),
            },
            "gaussian_bump" => SpatialSpec::GaussianBump {
                base: self.req_f64(&k("base")),
                amplitude: self.req_f64(&k("amplitude")),
                center: self.vec_f64(&k("center")).unwrap_or_default(),
                width: {
                    let w = self.f64_or(&k("width"), 1.0);
                    self.positive(&k("width"), w)
                },
            },
            "log_decay" => SpatialSpec::LogDecay {
                limit: self.req_f64(&k("limit")),
                amplitude: self.req_f64(&k("amplitude")),
            },
            "file" => match self.path(&k("path")) {
                Some(p) => SpatialSpec::File(p),
                None => {
                    self.issue(&k("path"), "missing field file path");
                    SpatialSpec::Constant(f64::NAN)
                }
            },
            other => {
                self.issue(
                    &kind_key,
                    format!("unknown spatial function '{other}' (expected constant, affine, clamped_ramp, gaussian_bump, log_decay, file)"),
                );
                SpatialSpec::Constant(f64::NAN)
            }
        }
    }

    fn exponent(&mut self, key: &str) -> f64 {
        let p = self.req_f64(key);
        if !(p >= 1.0) && !p.is_nan() {
            self.issue(key, format!("exponent must be >= 1, got {p}"));
        }
        p
    }

    fn phi(&mut self) -> PhiSpec {
        let family = self.opt_str("phi.family");
        match family.as_deref() {
            Some("power_law") => PhiSpec::PowerLaw { p: self.exponent("phi.p") },
            Some("autonomous") => PhiSpec::Autonomous { p: self.exponent("phi.p") },
            Some("variable_exponent") => PhiSpec::VariableExponent {
                p_field: self.spatial("phi.p_field"),
            },
            Some("double_phase") => {
                let p = self.exponent("phi.p");
                let q = self.req_f64("phi.q");
                if q.is_finite() && p.is_finite() && q <= p {
                    self.issue("phi.q", format!("q must exceed p = {p}, got {q}"));
                }
                PhiSpec::DoublePhase {
                    p,
                    q,
                    a: self.spatial("phi.a"),
                }
            }
            Some("weighted") => PhiSpec::Weighted {
                p: self.exponent("phi.p"),
                weight: self.spatial("phi.weight"),
            },
            Some(other) => {
                self.issue(
                    "phi.family",
                    format!("unknown family '{other}' (expected power_law, autonomous, variable_exponent, double_phase, weighted)"),
                );
                PhiSpec::PowerLaw { p: 2.0 }
            }
            None => {
                if !self.has("phi.family") {
                    self.issue("phi.family", "missing required family");
                }
                PhiSpec::PowerLaw { p: 2.0 }
            }
        }
    }

    fn grid(&mut self) -> GridSpec {
        let lo = self.req_vec("grid.lo");
        let hi = self.req_vec("grid.hi");
        let h = self.req_f64("grid.h");
        self.positive("grid.h", h);
        if let Some(dim) = self.opt_u64("grid.dim") {
            if !(1..=2).contains(&dim) {
                self.issue("grid.dim", format!("dimension must be 1 or 2, got {dim}"));
            } else if !lo.is_empty() && lo.len() as u64 != dim {
                self.issue("grid.lo", format!("expected {dim} coordinates, got {}", lo.len()));
            }
        }
        if !lo.is_empty() && !hi.is_empty() {
            if lo.len() != hi.len() || lo.len() > 2 {
                self.issue("grid.hi", "grid.lo and grid.hi must both have 1 or 2 coordinates");
            } else if lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
                self.issue("grid.hi", "each upper bound must exceed the lower bound");
            } else if h > 0.0 && lo.iter().zip(&hi).any(|(a, b)| (b - a) / h < 1.0 - 1e-9) {
                self.issue("grid.h", "spacing must give at least two nodes per axis");
            }
        }
        GridSpec { lo, hi, h }
    }

    fn field(&mut self, name: &str) -> FieldSpec {
        let k = |s: &str| format!("fields.{name}.{s}");
        let Some(kind) = self.opt_str(&k("kind")) else {
            self.issue(&k("kind"), "missing field kind");
            return FieldSpec::Zero;
        };
        let radial = |r: &mut Self| {
            let center = r.vec_f64(&k("center")).unwrap_or_else(|| vec![0.0]);
            let radius = r.f64_or(&k("radius"), 1.0);
            r.positive(&k("radius"), radius);
            let height = r.f64_or(&k("height"), 1.0);
            (center, radius, height)
        };
        match kind.as_str() {
            "zero" => FieldSpec::Zero,
            "constant" => FieldSpec::Constant(self.req_f64(&k("value"))),
            "indicator" => FieldSpec::Indicator {
                lo: self.req_vec(&k("lo")),
                hi: self.req_vec(&k("hi")),
            },
            "tent" => {
                let (center, radius, height) = radial(self);
                FieldSpec::Tent { center, radius, height }
            }
            "smooth_bump" => {
                let (center, radius, height) = radial(self);
                FieldSpec::SmoothBump { center, radius, height }
            }
            "cos_bump" => {
                let (center, radius, height) = radial(self);
                FieldSpec::CosBump { center, radius, height }
            }
            "poly_bump" => {
                let (center, radius, height) = radial(self);
                FieldSpec::PolyBump { center, radius, height }
            }
            "gaussian" => {
                let center = self.vec_f64(&k("center")).unwrap_or_else(|| vec![0.0]);
                let width = self.f64_or(&k("width"), 1.0);
                self.positive(&k("width"), width);
                FieldSpec::Gaussian {
                    center,
                    width,
                    height: self.f64_or(&k("height"), 1.0),
                }
            }
            "noise" => {
                let seed = self.opt_u64(&k("seed"));
                let amplitude = self.f64_or(&k("amplitude"), 1.0);
                let passes = self.opt_u64(&k("passes")).unwrap_or(4) as usize;
                let (center, radius, _) = radial(self);
                FieldSpec::Noise {
                    seed,
                    amplitude,
                    passes,
                    center,
                    radius,
                }
            }
            "file" => match self.path(&k("path")) {
                Some(p) => FieldSpec::File(p),
                None => {
                    self.issue(&k("path"), "missing field file path");
                    FieldSpec::Zero
                }
            },
            other => {
                self.issue(
                    &k("kind"),
                    format!("unknown field kind '{other}' (expected zero, constant, indicator, tent, smooth_bump, cos_bump, poly_bump, gaussian, noise, file)"),
                );
                FieldSpec::Zero
            }
        }
    }

    fn tolerance(&mut self, key: &str, default: f64) -> f64 {
        let v = self.f64_or(key, default);
        self.positive(key, v)
    }
}

fn build(r: &mut Reader) -> ExperimentConfig {
    let seed = r.opt_u64("seed").unwrap_or(0);
    let phi = r.phi();
    let grid = r.grid();

    let names: BTreeSet<String> = r
        .map
        .keys()
        .filter_map(|k| k.strip_prefix("fields."))
        .filter_map(|rest| rest.split('.').next())
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        r.issue("fields", "at least one field is required");
    }
    let fields: Vec<(String, FieldSpec)> = names.iter().map(|n| (n.clone(), r.field(n))).collect();

    let r_max = r.opt_f64("maximal.r_max");
    if let Some(v) = r_max {
        r.positive("maximal.r_max", v);
        if grid.h > 0.0 && v < grid.h {
            r.issue("maximal.r_max", format!("must be at least grid.h = {}", grid.h));
        }
    }
    let radius_tol = {
        let v = r.f64_or("maximal.rel_tol", crate::maximal::DEFAULT_RADIUS_REL_TOL);
        if !(v >= 0.0) {
            r.issue("maximal.rel_tol", format!("must be >= 0, got {v}"));
        }
        v
    };
    let norm_tol = r.tolerance("norm.tol", crate::modular::DEFAULT_NORM_TOL);

    let verify = VerifyParams {
        eps: r.tolerance("verify.eps", 0.1),
        radius: r.tolerance("verify.radius", 2.0),
        decay_radii: r.vec_f64("verify.decay_radii").unwrap_or_else(|| vec![1.0, 2.0, 3.0]),
    };

    let m_steps = r.opt_u64("continuity.m_steps").unwrap_or(32) as usize;
    if m_steps == 0 {
        r.issue("continuity.m_steps", "must be positive");
    }
    let ratio = r.f64_or("continuity.ratio", 0.8);
    if !(ratio > 0.0 && ratio < 1.0) {
        r.issue("continuity.ratio", format!("must lie in (0, 1), got {ratio}"));
    }
    let families = r
        .str_list("continuity.families")
        .unwrap_or_else(|| vec!["scale".into(), "bump".into(), "noise".into()]);
    for fam in &families {
        if !["scale", "bump", "noise"].contains(&fam.as_str()) {
            r.issue("continuity.families", format!("unknown family '{fam}' (expected scale, bump, noise)"));
        }
    }
    let field = r.opt_str("continuity.field");
    if let Some(name) = &field {
        if !names.contains(name) {
            r.issue("continuity.field", format!("no field named '{name}'"));
        }
    }
    let continuity = ContinuityParams {
        field,
        m_steps,
        start: r.tolerance("continuity.start", 1.0),
        ratio,
        families,
        bump_center: r.vec_f64("continuity.bump_center").unwrap_or_else(|| vec![2.5]),
        bump_radius: r.tolerance("continuity.bump_radius", 0.5),
        noise_center: r.vec_f64("continuity.noise_center").unwrap_or_else(|| vec![0.0]),
        noise_radius: r.tolerance("continuity.noise_radius", 1.5),
        radius: r.tolerance("continuity.radius", 2.0),
        lambda: r.tolerance("continuity.lambda", 0.25),
        delta0: r.tolerance("continuity.delta0", 0.1),
        eps: r.tolerance("continuity.eps", 0.1),
        target_ratio: r.tolerance("continuity.target_ratio", 0.1),
        stability_fraction: r.tolerance("continuity.stability_fraction", 0.05),
    };
    let conditions = ConditionParams {
        p_inf: r.opt_f64("conditions.p_inf"),
        cap: r.tolerance("conditions.cap", 10.0),
    };
    let out_dir = r.opt_str("output.dir").map(PathBuf::from);

    let echo = r
        .map
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect::<String>();
    ExperimentConfig {
        phi,
        grid,
        fields,
        seed,
        r_max,
        radius_tol,
        norm_tol,
        verify,
        continuity,
        conditions,
        out_dir,
        echo,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        phi.family = "power_law"
        phi.p = 2
        grid.lo = [-4.0]
        grid.hi = [4.0]
        grid.h = 0.015625
        fields.chi.kind = "indicator"
        fields.chi.lo = [0.0]
        fields.chi.hi = [1.0]
    "#;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config_str(text, Vec::new(), None)
    }

    fn issue_paths(err: Error) -> Vec<String> {
        match err {
            Error::Validation(issues) => issues.into_iter().map(|i| i.path).collect(),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.phi, PhiSpec::PowerLaw { p: 2.0 });
        assert_eq!(cfg.fields.len(), 1);
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn zero_spacing_names_grid_h() {
        let err = parse(&MINIMAL.replace("grid.h = 0.015625", "grid.h = 0")).unwrap_err();
        assert!(issue_paths(err).contains(&"grid.h".to_string()));
    }

    #[test]
    fn double_phase_without_q_names_phi_q() {
        let text = MINIMAL.replace(
            "phi.family = \"power_law\"",
            "phi.family = \"double_phase\"\nphi.a.kind = \"affine\"\nphi.a.slope = 1.0",
        );
        assert_eq!(issue_paths(parse(&text).unwrap_err()), vec!["phi.q"]);
    }

    #[test]
    fn all_issues_are_reported() {
        let text = MINIMAL
            .replace("grid.h = 0.015625", "grid.h = -1")
            .replace("phi.family = \"power_law\"", "phi.family = \"cubic\"")
            + "\nnorm.tol = 0\nbogus = 1\n";
        let paths = issue_paths(parse(&text).unwrap_err());
        for p in ["grid.h", "phi.family", "norm.tol", "bogus"] {
            assert!(paths.contains(&p.to_string()), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn environment_overrides_dotted_keys() {
        let env = vec![("OMAX__GRID__H".to_string(), "0.125".to_string()), ("OTHER".into(), "x".into())];
        let cfg = parse_config_str(MINIMAL, env, None).unwrap();
        assert_eq!(cfg.grid.h, 0.125);
        assert!(cfg.echo.contains("grid.h = 0.125"));
        assert_ne!(cfg.hash(), parse(MINIMAL).unwrap().hash());
    }
}
