//! Sampled checks of `(aInc)_p`, `(aDec)_q`, `(A0)` and the example-family
//! criteria for `(A1)` / `(A2)`.
//!
//! "Passed" always means "no violation on the declared sample set".

use std::f64::consts::E;

use serde::Serialize;

use super::Integrand;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spatial::{dist, norm, SpatialFn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Condition {
    AInc { p: f64 },
    ADec { q: f64 },
    A0,
    A1,
    A2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Counterexample {
    /// A point and the two scalar arguments at which the inequality fails.
    Scalars { x: Vec<f64>, s: f64, t: f64 },
    /// A pair of points violating a modulus-of-continuity bound.
    Pair { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub passed: bool,
    /// Best constant found: `a` for (aInc)/(aDec), `β` for (A0), `C` or the
    /// Hölder seminorm for the (A1)/(A2) criteria.
    pub witness_constant: f64,
    pub counterexample: Option<Counterexample>,
    pub samples_used: usize,
    pub tolerance: f64,
    pub notes: Vec<String>,
}

/// Sample set for condition checks: logarithmic `t`-samples on
/// `[t_min, t_max]` and an explicit list of spatial points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub points: Vec<Vec<f64>>,
    /// Relative slack admitted when comparing the two sides.
    pub tol: f64,
    /// Largest estimated constant accepted by the (A1)/(A2) criteria.
    pub cap: f64,
}

impl SampleSpec {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        Self {
            t_min: 1e-6,
            t_max: 1e6,
            t_count: 200,
            points,
            tol: 1e-9,
            cap: 10.0,
        }
    }

    /// Grid nodes as spatial samples.
    pub fn on_grid(grid: &Grid) -> Self {
        Self::new(grid.points())
    }

    /// At most `max_points` grid nodes, evenly strided (first and last node
    /// included).
    pub fn on_grid_subsampled(grid: &Grid, max_points: usize) -> Self {
        let n = grid.len();
        let k = max_points.clamp(2, n.max(2));
        if n <= k {
            return Self::on_grid(grid);
        }
        let mut idx: Vec<usize> = (0..k).map(|i| i * (n - 1) / (k - 1)).collect();
        idx.dedup();
        Self::new(idx.into_iter().map(|i| grid.point(i)).collect())
    }

    pub fn with_t_range(mut self, t_min: f64, t_max: f64, t_count: usize) -> Self {
        self.t_min = t_min;
        self.t_max = t_max;
        self.t_count = t_count;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    /// Logarithmically spaced values from `t_min` to `t_max`.
    pub fn t_samples(&self) -> Vec<f64> {
        log_space(self.t_min, self.t_max, self.t_count)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_count >= 2) {
            return Err(Error::Argument(format!(
                "t-samples need 0 < t_min < t_max and at least two points, got [{}, {}] x {}",
                self.t_min, self.t_max, self.t_count
            )));
        }
        if self.points.is_empty() {
            return Err(Error::Argument("no spatial sample points".into()));
        }
        Ok(())
    }
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Logs of `φ(x, t) / t^e` over the t-samples, skipping samples where `φ`
/// is zero or infinite.
fn log_ratios(phi: &dyn Integrand, x: &[f64], ts: &[f64], e: f64) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut ls = Vec::with_capacity(ts.len());
    let mut kept = Vec::with_capacity(ts.len());
    let mut dropped = 0;
    for &t in ts {
        let v = phi.value(x, t)?;
        if v > 0.0 && v.is_finite() {
            ls.push(v.ln() - e * t.ln());
            kept.push(t);
        } else {
            dropped += 1;
        }
    }
    Ok((ls, kept, dropped))
}

/// `(aInc)_p`: `φ(x,s)/s^p <= a φ(x,t)/t^p` for sampled `0 < s < t`.
pub fn check_ainc(phi: &dyn Integrand, p: f64, a: f64, samples: &SampleSpec) -> Result<ConditionReport> {
    check_almost_monotone(phi, p, a, samples, true)
}

/// `(aDec)_q`: `φ(x,t)/t^q <= a φ(x,s)/s^q` for sampled `0 < s < t`.
pub fn check_adec(phi: &dyn Integrand, q: f64, a: f64, samples: &SampleSpec) -> Result<ConditionReport> {
    check_almost_monotone(phi, q, a, samples, false)
}

fn check_almost_monotone(
    phi: &dyn Integrand,
    e: f64,
    a: f64,
    samples: &SampleSpec,
    increasing: bool,
) -> Result<ConditionReport> {
    samples.validate()?;
    if !(e > 0.0) {
        return Err(Error::Argument(format!("exponent must be positive, got {e}")));
    }
    if !(a >= 1.0) {
        return Err(Error::Argument(format!("constant a must be >= 1, got {a}")));
    }
    let ts = samples.t_samples();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at: Option<(usize, f64, f64)> = None;
    let mut used = 0;
    let mut dropped = 0;
    for (xi, x) in samples.points.iter().enumerate() {
        let (ls, kept, d) = log_ratios(phi, x, &ts, e)?;
        dropped += d;
        used += kept.len();
        // Running extremum over earlier (smaller) t.
        let mut ext = f64::NAN;
        let mut ext_t = 0.0;
        for (j, &l) in ls.iter().enumerate() {
            if j > 0 {
                // log of the smallest admissible a for the pair (ext_t, t_j)
                let need = if increasing { ext - l } else { l - ext };
                if need > worst {
                    worst = need;
                    worst_at = Some((xi, ext_t, kept[j]));
                }
            }
            let better = if increasing { !(l <= ext) } else { !(l >= ext) };
            if better {
                ext = l;
                ext_t = kept[j];
            }
        }
    }
    let a_min = worst.exp();
    let passed = worst <= a.ln() + samples.tol.ln_1p();
    let condition = if increasing {
        Condition::AInc { p: e }
    } else {
        Condition::ADec { q: e }
    };
    let mut notes = Vec::new();
    if dropped > 0 {
        notes.push(format!("{dropped} samples with φ = 0 or ∞ were skipped"));
    }
    Ok(ConditionReport {
        condition,
        passed,
        witness_constant: if a_min.is_finite() { a_min.max(1.0) } else { f64::INFINITY },
        counterexample: if passed {
            None
        } else {
            worst_at.map(|(xi, s, t)| Counterexample::Scalars {
                x: samples.points[xi].clone(),
                s,
                t,
            })
        },
        samples_used: used,
        tolerance: samples.tol,
        notes,
    })
}

/// `(A0)` through the equivalent form `φ(x, β) <= 1 <= φ(x, 1/β)`, searching
/// `β` on a logarithmic grid from 1 down to `t_min`.
pub fn check_a0(phi: &dyn Integrand, samples: &SampleSpec) -> Result<ConditionReport> {
    samples.validate()?;
    let betas: Vec<f64> = log_space(samples.t_min, 1.0, samples.t_count).into_iter().rev().collect();
    let tol = samples.tol;
    let mut evaluated = 0;
    // Larger β is harder; the first passing β from the top is the largest.
    for &beta in &betas {
        let mut ok = true;
        for x in &samples.points {
            evaluated += 1;
            if phi.value(x, beta)? > 1.0 + tol || phi.value(x, 1.0 / beta)? < 1.0 - tol {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(ConditionReport {
                condition: Condition::A0,
                passed: true,
                witness_constant: beta,
                counterexample: None,
                samples_used: evaluated,
                tolerance: tol,
                notes: Vec::new(),
            });
        }
    }
    let beta = *betas.last().unwrap();
    let mut counterexample = None;
    for x in &samples.points {
        if phi.value(x, beta)? > 1.0 + tol || phi.value(x, 1.0 / beta)? < 1.0 - tol {
            counterexample = Some(Counterexample::Scalars {
                x: x.clone(),
                s: beta,
                t: 1.0 / beta,
            });
            break;
        }
    }
    Ok(ConditionReport {
        condition: Condition::A0,
        passed: false,
        witness_constant: 0.0,
        counterexample,
        samples_used: evaluated,
        tolerance: tol,
        notes: vec![format!("no β in [{}, 1] satisfies φ(x,β) <= 1 <= φ(x,1/β) at every sample", samples.t_min)],
    })
}

/// Largest pairwise value of `weight(i, j, |x_i - x_j|)` over distinct
/// sample points, where it occurs, and the number of pairs visited.
fn pair_sup(points: &[Vec<f64>], mut weight: impl FnMut(usize, usize, f64) -> f64) -> (f64, Option<(usize, usize)>, usize) {
    let mut best = 0.0;
    let mut at = None;
    let mut pairs = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = dist(&points[i], &points[j]);
            if d == 0.0 {
                continue;
            }
            pairs += 1;
            let w = weight(i, j, d);
            if w > best || w.is_nan() {
                best = if w.is_nan() { f64::INFINITY } else { w };
                at = Some((i, j));
            }
        }
    }
    (best, at, pairs)
}

fn modulus_report(
    condition: Condition,
    c: f64,
    at: Option<(usize, usize)>,
    points: &[Vec<f64>],
    used: usize,
    samples: &SampleSpec,
    mut notes: Vec<String>,
) -> ConditionReport {
    let passed = c.is_finite() && c <= samples.cap;
    if !passed {
        notes.push(format!("estimated constant {c} exceeds cap {}", samples.cap));
    }
    ConditionReport {
        condition,
        passed,
        witness_constant: c,
        counterexample: if passed {
            None
        } else {
            at.map(|(i, j)| Counterexample::Pair {
                x: points[i].clone(),
                y: points[j].clone(),
            })
        },
        samples_used: used,
        tolerance: samples.tol,
        notes,
    }
}

/// Log-Hölder continuity of `1/p`:
/// `|1/p(x) - 1/p(y)| <= C / log(e + 1/|x - y|)`; estimates the smallest `C`
/// over all sampled pairs.
pub fn check_a1_variable_exponent(p_field: &SpatialFn, samples: &SampleSpec) -> Result<ConditionReport> {
    if samples.points.len() < 2 {
        return Err(Error::Argument("need at least two sample points".into()));
    }
    let inv: Vec<f64> = samples.points.iter().map(|x| 1.0 / p_field.eval(x)).collect();
    if let Some(i) = inv.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
        return Err(Error::Argument(format!("p(x) must be >= 1, violated at {:?}", samples.points[i])));
    }
    let pts = &samples.points;
    let (c, at, used) = pair_sup(pts, |i, j, d| (inv[i] - inv[j]).abs() * (E + 1.0 / d).ln());
    Ok(modulus_report(Condition::A1, c, at, pts, used, samples, Vec::new()))
}

/// Log-Hölder decay of `1/p`: `|1/p(x) - 1/p_∞| <= C / log(e + |x|)`.
pub fn check_a2_variable_exponent(p_field: &SpatialFn, p_inf: f64, samples: &SampleSpec) -> Result<ConditionReport> {
    if !(p_inf >= 1.0) {
        return Err(Error::Argument(format!("p_inf must be >= 1, got {p_inf}")));
    }
    if samples.points.is_empty() {
        return Err(Error::Argument("no spatial sample points".into()));
    }
    let mut best = 0.0;
    let mut at = None;
    for (i, x) in samples.points.iter().enumerate() {
        let p = p_field.eval(x);
        if !(p >= 1.0) {
            return Err(Error::Argument(format!("p(x) must be >= 1, violated at {x:?}")));
        }
        let c = (1.0 / p - 1.0 / p_inf).abs() * (E + norm(x)).ln();
        if c > best {
            best = c;
            at = Some(i);
        }
    }
    let passed = best.is_finite() && best <= samples.cap;
    let mut notes = Vec::new();
    if !passed {
        notes.push(format!("estimated constant {best} exceeds cap {}", samples.cap));
    }
    Ok(ConditionReport {
        condition: Condition::A2,
        passed,
        witness_constant: best,
        counterexample: if passed {
            None
        } else {
            at.map(|i| Counterexample::Scalars {
                x: samples.points[i].clone(),
                s: p_field.eval(&samples.points[i]),
                t: p_inf,
            })
        },
        samples_used: samples.points.len(),
        tolerance: samples.tol,
        notes,
    })
}

/// Hölder seminorm of the double-phase weight with exponent `(n/p)(q - p)`,
/// clamped to 1 (and flagged) when larger.
pub fn check_a1_double_phase(
    a_field: &SpatialFn,
    p: f64,
    q: f64,
    dim: usize,
    samples: &SampleSpec,
) -> Result<ConditionReport> {
    if !(q > p && p >= 1.0) {
        return Err(Error::Argument(format!("need q > p >= 1, got p = {p}, q = {q}")));
    }
    if samples.points.len() < 2 {
        return Err(Error::Argument("need at least two sample points".into()));
    }
    let raw = dim as f64 / p * (q - p);
    let mut notes = Vec::new();
    let alpha = if raw > 1.0 {
        notes.push(format!("Hölder exponent (n/p)(q-p) = {raw} exceeds 1; clamped to 1"));
        1.0
    } else {
        raw
    };
    let values: Vec<f64> = samples.points.iter().map(|x| a_field.eval(x)).collect();
    let pts = &samples.points;
    let (c, at, used) = pair_sup(pts, |i, j, d| (values[i] - values[j]).abs() / d.powf(alpha));
    notes.push(format!("Hölder exponent used: {alpha}"));
    Ok(modulus_report(Condition::A1, c, at, pts, used, samples, notes))
}
