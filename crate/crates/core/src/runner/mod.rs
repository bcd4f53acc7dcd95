//! Config-driven experiment runs and their report files.
//!
//! Every operation error inside a run is captured into the report and fails
//! the summary; only setup problems (an unbuildable grid or Φ-function) are
//! returned as `Err`.

pub mod config;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use config::{
    parse_config, parse_config_str, parse_config_with_env, ContinuityParams, ExperimentConfig, FieldSpec, GridSpec,
    PhiSpec, SpatialSpec, VerifyParams, ENV_PREFIX,
};

use crate::error::{Error, Result};
use crate::grid::{continuum_ball_measure, make_field, write_field_string, Ball, Grid, GridField};
use crate::maximal::{
    average_decay_bound, decay_constants, default_r_max, localization_check, maximal_csv, maximal_scan,
    radius_upper_bound, CONSTANT_SAMPLES,
};
use crate::modular::{
    check_embedding, check_holder, check_norm_modular_comparison, check_tail_and_smallness, luxemburg_norm, NormReport,
};
use crate::phi::{
    check_a0, check_a1_double_phase, check_a1_variable_exponent, check_a2_variable_exponent, check_adec, check_ainc,
    ConditionReport, Family, PhiFunction, SampleSpec,
};
use crate::report::{write_atomic, VerificationReport, CSV_HEADER};
use crate::sobolev::{
    check_derivative_formula, check_gradient_bound, continuity_experiment, traces_csv, weak_gradient,
    ContinuityOptions, ContinuityTrace, PerturbationFamily, Schedule,
};
use crate::spatial::SpatialFn;

/// Spatial samples used by the condition checks.
const CONDITION_POINTS: usize = 1025;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Norm,
    Maximal,
    Conditions,
    Verify,
    Continuity,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Norm,
        Command::Maximal,
        Command::Conditions,
        Command::Verify,
        Command::Continuity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Maximal => "maximal",
            Command::Conditions => "conditions",
            Command::Verify => "verify",
            Command::Continuity => "continuity",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunError {
    pub stage: String,
    pub message: String,
    pub numerical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedNorm {
    pub field: String,
    pub report: NormReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedTraces {
    pub family: String,
    pub traces: Vec<ContinuityTrace>,
}

/// Deterministic part of a run: identical for identical config and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub phi: String,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub reports: Vec<VerificationReport>,
    pub norms: Vec<NamedNorm>,
    pub conditions: Vec<ConditionReport>,
    pub continuity: Vec<NamedTraces>,
    pub errors: Vec<RunError>,
}

/// An extra output file, written next to the reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
    pub elapsed: Duration,
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
    threads: usize,
}

#[derive(Serialize)]
struct JsonFile<'a> {
    body: &'a RunReport,
    timing: Timing,
}

impl RunOutput {
    /// 0 pass, 1 verification failure, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        if self.report.errors.iter().any(|e| e.numerical) {
            3
        } else if self.report.passed {
            0
        } else {
            1
        }
    }

    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    pub fn json(&self) -> String {
        let file = JsonFile {
            body: &self.report,
            timing: Timing {
                wall_seconds: self.elapsed.as_secs_f64(),
                threads: rayon::current_num_threads(),
            },
        };
        serde_json::to_string_pretty(&file).expect("report serializes")
    }

    pub fn csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.report.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    /// Writes `report.json`, `report.csv` and the artifacts, each atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("report.json"), self.json().as_bytes())?;
        write_atomic(&dir.join("report.csv"), self.csv().as_bytes())?;
        for a in &self.artifacts {
            write_atomic(&dir.join(&a.file_name), a.contents.as_bytes())?;
        }
        Ok(())
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    phi: PhiFunction,
    grid: Grid,
    fields: Vec<(String, GridField)>,
    r_max: f64,
    report: RunReport,
    artifacts: Vec<Artifact>,
}

impl Run<'_> {
    /// Runs `f`, recording any error under `stage`.
    fn attempt<T>(&mut self, stage: impl Into<String>, f: impl FnOnce(&Self) -> Result<T>) -> Option<T> {
        match f(self) {
            Ok(v) => Some(v),
            Err(e) => {
                self.report.errors.push(RunError {
                    stage: stage.into(),
                    message: e.to_string(),
                    numerical: e.is_numerical(),
                });
                None
            }
        }
    }

    fn push(&mut self, r: VerificationReport) {
        self.report.reports.push(r);
    }

    fn nonzero_fields(&self) -> Vec<(String, GridField)> {
        self.fields.iter().filter(|(_, f)| !f.is_zero()).cloned().collect()
    }

    fn growth(&self) -> Result<(f64, f64)> {
        self.phi
            .growth_exponents()
            .ok_or_else(|| Error::Precondition(format!("no closed-form growth exponents for {}", self.phi.describe())))
    }

    fn norm(&mut self) {
        for (name, field) in self.fields.clone() {
            let tol = self.cfg.norm_tol;
            if let Some(nr) = self.attempt(format!("norm[{name}]"), |r| luxemburg_norm(&r.phi, &field, tol)) {
                self.push(
                    VerificationReport::new(format!("norm[{name}]"), true, nr.norm, tol)
                        .with_iters(nr.bisection_iters)
                        .detail("modular", nr.modular),
                );
                self.report.norms.push(NamedNorm { field: name, report: nr });
            }
        }
    }

    fn maximal(&mut self) {
        let tol = self.cfg.radius_tol;
        for (name, field) in self.fields.clone() {
            let Some(scan) = self.attempt(format!("maximal[{name}]"), |r| maximal_scan(&field, r.r_max, tol)) else {
                continue;
            };
            let dominated = scan
                .maximal
                .values()
                .iter()
                .zip(field.values())
                .all(|(m, f)| *m >= f.abs());
            let peak = scan.maximal.max_abs();
            self.push(
                VerificationReport::new(format!("maximal[{name}]"), dominated, peak, 0.0)
                    .detail("r_max", self.r_max)
                    .note("passed: Mf >= |f| at every node"),
            );
            self.artifacts.push(Artifact {
                file_name: format!("maximal_{name}.field"),
                contents: write_field_string(&scan.maximal),
            });
            self.artifacts.push(Artifact {
                file_name: format!("maximal_{name}.csv"),
                contents: maximal_csv(&scan),
            });
        }
    }

    fn record_condition(&mut self, label: &str, c: ConditionReport) {
        self.push(VerificationReport::new(label, c.passed, c.witness_constant, c.tolerance).detail("samples", c.samples_used as f64));
        self.report.conditions.push(c);
    }

    fn conditions(&mut self) {
        let samples = SampleSpec::on_grid_subsampled(&self.grid, CONDITION_POINTS).with_cap(self.cfg.conditions.cap);
        if let Some((p, q)) = self.attempt("conditions", |r| r.growth()) {
            if let Some(c) = self.attempt("aInc", |r| check_ainc(&r.phi, p, 1.0, &samples)) {
                self.record_condition(&format!("aInc[p={p}]"), c);
            }
            if let Some(c) = self.attempt("aDec", |r| check_adec(&r.phi, q, 1.0, &samples)) {
                self.record_condition(&format!("aDec[q={q}]"), c);
            }
        }
        if let Some(c) = self.attempt("A0", |r| check_a0(&r.phi, &samples)) {
            self.record_condition("A0", c);
        }
        match self.phi.family().clone() {
            Family::VariableExponent { p_field } => {
                if let Some(c) = self.attempt("A1", |_| check_a1_variable_exponent(&p_field, &samples)) {
                    self.record_condition("A1", c);
                }
                let p_inf = self.cfg.conditions.p_inf.or(match p_field {
                    SpatialFn::LogDecay { limit, .. } => Some(limit),
                    SpatialFn::Constant(c) => Some(c),
                    _ => None,
                });
                match p_inf {
                    Some(p_inf) => {
                        if let Some(c) = self.attempt("A2", |_| check_a2_variable_exponent(&p_field, p_inf, &samples)) {
                            self.record_condition("A2", c);
                        }
                    }
                    None => self.push(VerificationReport::skipped("A2", "set conditions.p_inf to check (A2)")),
                }
            }
            Family::DoublePhase { p, q, a_field } => {
                let dim = self.grid.dim();
                if let Some(c) = self.attempt("A1", |_| check_a1_double_phase(&a_field, p, q, dim, &samples)) {
                    self.record_condition("A1", c);
                }
            }
            _ => {}
        }
    }

    fn verify(&mut self) {
        let fields = self.nonzero_fields();
        if fields.is_empty() {
            self.push(VerificationReport::new("verify", false, f64::NAN, 0.0).note("every configured field is zero"));
            return;
        }
        let eps = self.cfg.verify.eps;
        let radius = self.cfg.verify.radius;
        let tol = self.cfg.radius_tol;
        let r_max = self.r_max;
        let growth = self.attempt("growth_exponents", |r| r.growth());

        for (name, f) in &fields {
            if let Some((p, _)) = growth {
                if let Some(r) = self.attempt(format!("norm_modular_comparison[{name}]"), |r| {
                    check_norm_modular_comparison(&r.phi, p, 1.0, f)
                }) {
                    self.push(tagged(r, name));
                }
            }
        }
        for (k, (name, f)) in fields.iter().enumerate() {
            let (other_name, g) = &fields[(k + 1) % fields.len()];
            let label = format!("{name},{other_name}");
            if let Some(r) = self.attempt(format!("holder[{label}]"), |r| check_holder(&r.phi, f, g)) {
                self.push(tagged(r, &label));
            }
        }
        if let Some((p, _)) = growth {
            let coarse: Vec<GridField> = fields.iter().map(|(_, f)| f.clone()).collect();
            let refined = self.attempt("embedding.refine", |r| {
                if !r.cfg.fields.iter().all(|(_, s)| s.refinable()) {
                    return Ok(None);
                }
                let fine = r.grid.refined();
                r.cfg
                    .fields
                    .iter()
                    .filter(|(n, _)| fields.iter().any(|(m, _)| m == n))
                    .map(|(_, s)| make_field(&fine, &s.generator(r.cfg.seed)))
                    .collect::<Result<Vec<_>>>()
                    .map(Some)
            });
            let refined = refined.flatten();
            if let Some(r) = self.attempt("embedding", |r| check_embedding(&r.phi, p, &coarse, refined.as_deref())) {
                self.push(r);
            }
        }
        for (name, f) in &fields {
            if let Some(r) = self.attempt(format!("tail_smallness[{name}]"), |r| check_tail_and_smallness(&r.phi, f, eps)) {
                self.push(tagged(r, name));
            }
        }

        if let Some((_, q)) = growth {
            let samples = SampleSpec::on_grid_subsampled(&self.grid, CONSTANT_SAMPLES);
            if let Some(c) = self.attempt("decay_constants", |r| decay_constants(&r.phi, q, &samples)) {
                let origin = vec![0.0; self.grid.dim()];
                for (name, f) in &fields {
                    for &rad in &self.cfg.verify.decay_radii {
                        if let Some(r) = self.attempt(format!("average_decay[{name},r={rad}]"), |r| {
                            average_decay_bound(&r.phi, f, c.p, c.a, c.beta, &Ball::new(origin.clone(), rad)?)
                        }) {
                            self.push(tagged(r, name));
                        }
                    }
                }
            }
        }

        for (name, f) in &fields {
            let Some(b) = self.attempt(format!("radius_bound[{name}]"), |r| radius_upper_bound(&r.phi, f, radius, r_max, tol))
            else {
                continue;
            };
            self.push(
                VerificationReport::new(format!("radius_bound[{name}]"), b.holds(), b.r0, b.a_priori)
                    .detail("r0", b.r0)
                    .detail("a_priori", b.a_priori)
                    .detail("lower", b.lower)
                    .detail("r_hat", b.r_hat)
                    .detail("norm", b.norm),
            );
            let frak_r = b.r0 + radius + self.grid.h();
            if let Some(r) = self.attempt(format!("localization[{name}]"), |_| localization_check(f, radius, frak_r, tol)) {
                self.push(tagged(r, name));
            }
        }

        for (name, f) in &fields {
            let Some(sf) = self.attempt(format!("weak_gradient[{name}]"), |_| weak_gradient(f)) else {
                continue;
            };
            if let Some(r) = self.attempt(format!("gradient_bound[{name}]"), |r| check_gradient_bound(&r.phi, &sf, r_max)) {
                self.push(tagged(r, name));
            }
            if let Some(r) = self.attempt(format!("derivative_formula[{name}]"), |r| {
                check_derivative_formula(&r.phi, &sf, r_max, tol)
            }) {
                self.push(tagged(r, name));
            }
        }
    }

    fn continuity(&mut self) {
        let params = self.cfg.continuity.clone();
        let base_name = params.field.clone().unwrap_or_else(|| self.fields[0].0.clone());
        let base = self.fields.iter().find(|(n, _)| *n == base_name).map(|(_, f)| f.clone()).expect("validated");
        let Some(sf) = self.attempt("continuity.base", |_| weak_gradient(&base)) else {
            return;
        };
        let schedule = Schedule::Geometric {
            start: params.start,
            ratio: params.ratio,
        };
        let opts = ContinuityOptions {
            r_max: self.r_max,
            radius: params.radius,
            lambda: params.lambda,
            delta0: params.delta0,
            eps: params.eps,
            rel_tol: self.cfg.radius_tol,
        };
        let ball = continuum_ball_measure(params.radius, self.grid.dim()).min(self.grid.measure());
        for fam in &params.families {
            let Some(family) = self.attempt(format!("continuity[{fam}]"), |r| match fam.as_str() {
                "scale" => Ok(PerturbationFamily::scale(schedule)),
                "bump" => PerturbationFamily::bump(&r.grid, params.bump_center.clone(), params.bump_radius, schedule),
                _ => PerturbationFamily::noise(&r.grid, r.cfg.seed, params.noise_center.clone(), params.noise_radius, schedule),
            }) else {
                continue;
            };
            let Some(traces) = self.attempt(format!("continuity[{fam}]"), |r| {
                continuity_experiment(&r.phi, &sf, &family, params.m_steps, &opts)
            }) else {
                continue;
            };
            let first = traces.first().map_or(0.0, |t| t.output_gap);
            let last = traces.last().expect("m_steps > 0");
            let ratio = if first > 0.0 { last.output_gap / first } else { 0.0 };
            let stability_limit = params.stability_fraction * ball;
            let passed = ratio < params.target_ratio && last.stability_measure <= stability_limit;
            self.push(
                VerificationReport::new(format!("continuity[{fam}]"), passed, ratio, params.target_ratio)
                    .with_iters(traces.len())
                    .detail("first_output_gap", first)
                    .detail("last_output_gap", last.output_gap)
                    .detail("last_input_gap", last.input_gap)
                    .detail("last_stability_measure", last.stability_measure)
                    .detail("stability_limit", stability_limit)
                    .detail("oscillation_diag", last.oscillation_diag),
            );
            self.artifacts.push(Artifact {
                file_name: format!("continuity_{fam}.csv"),
                contents: traces_csv(&traces),
            });
            self.report.continuity.push(NamedTraces {
                family: family.label(),
                traces,
            });
        }
    }
}

fn tagged(mut r: VerificationReport, tag: &str) -> VerificationReport {
    r.name = format!("{}@{tag}", r.name);
    r
}

/// Runs `command` on a validated config.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let grid = cfg.grid.build()?;
    let phi = cfg.phi.build(grid.dim())?;
    let fields = cfg.build_fields(&grid)?;
    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(&grid));
    let mut run = Run {
        cfg,
        report: RunReport {
            command: command.to_string(),
            phi: phi.describe(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            passed: false,
            reports: Vec::new(),
            norms: Vec::new(),
            conditions: Vec::new(),
            continuity: Vec::new(),
            errors: Vec::new(),
        },
        phi,
        grid,
        fields,
        r_max,
        artifacts: Vec::new(),
    };
    match command {
        Command::Norm => run.norm(),
        Command::Maximal => run.maximal(),
        Command::Conditions => run.conditions(),
        Command::Verify => run.verify(),
        Command::Continuity => run.continuity(),
    }
    let report = &mut run.report;
    report.passed = report.errors.is_empty() && report.reports.iter().all(|r| r.passed || r.skipped);
    Ok(RunOutput {
        report: run.report,
        artifacts: run.artifacts,
        elapsed: start.elapsed(),
    })
}
