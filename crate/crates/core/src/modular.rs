//! Modular `ρ_φ`, Luxemburg norm, and the norm-level inequalities that the
//! maximal-operator results lean on.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, GridField};
use crate::phi::{check_a0, check_ainc, Conjugate, Integrand, PhiFunction, SampleSpec};
use crate::report::VerificationReport;
use crate::roots::bisect_threshold;
use crate::spatial::norm;

pub const DEFAULT_NORM_TOL: f64 = 1e-8;

/// Largest number of doublings/halvings tried while bracketing the norm.
const BRACKET_STEPS: usize = 2100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// `ρ_φ(f)`
    pub modular: f64,
    /// `‖f‖_φ`, the upper end of the final bracket.
    pub norm: f64,
    pub bisection_iters: usize,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

/// Evaluates `λ ↦ ρ_φ(f / λ)` on a fixed field.
struct ScaledModular<'a> {
    phi: &'a dyn Integrand,
    points: Vec<Vec<f64>>,
    abs: Vec<f64>,
    cell: f64,
}

impl<'a> ScaledModular<'a> {
    fn new(phi: &'a dyn Integrand, field: &GridField) -> Self {
        let grid = field.grid();
        let support: Vec<usize> = (0..field.len()).filter(|&i| field.values()[i] != 0.0).collect();
        Self {
            phi,
            points: support.iter().map(|&i| grid.point(i)).collect(),
            abs: support.iter().map(|&i| field.values()[i].abs()).collect(),
            cell: grid.cell_volume(),
        }
    }

    fn at(&self, lambda: f64) -> Result<f64> {
        let terms = self
            .points
            .par_iter()
            .zip(self.abs.par_iter())
            .map(|(x, &v)| self.phi.value(x, v / lambda))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.cell * pairwise_sum(&terms))
    }
}

/// `ρ_φ(f) = h^dim Σ φ(x_i, |f_i|)`.
pub fn modular(phi: &dyn Integrand, field: &GridField) -> Result<f64> {
    ScaledModular::new(phi, field).at(1.0)
}

/// `‖f‖_φ = inf{λ > 0 : ρ_φ(f/λ) <= 1}` by bisection on the non-increasing
/// map `λ ↦ ρ_φ(f/λ)`, to relative bracket width `tol`.
pub fn luxemburg_norm(phi: &dyn Integrand, field: &GridField, tol: f64) -> Result<NormReport> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let sm = ScaledModular::new(phi, field);
    if sm.abs.is_empty() {
        return Ok(NormReport {
            modular: 0.0,
            norm: 0.0,
            bisection_iters: 0,
            bracket: (0.0, 0.0),
            tolerance: tol,
        });
    }
    let rho_one = sm.at(1.0)?;
    let fits = |lambda: f64| sm.at(lambda).map(|r| r <= 1.0);

    let mut hi = (field.max_abs() * field.grid().measure()).max(1.0);
    let mut steps = 0;
    while !fits(hi)? {
        hi *= 2.0;
        steps += 1;
        if steps > BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::numerical("luxemburg_norm", "upper bracket expansion exhausted"));
        }
    }
    let mut lo = hi / 2.0;
    steps = 0;
    while fits(lo)? {
        hi = lo;
        lo /= 2.0;
        steps += 1;
        if steps > BRACKET_STEPS || lo == 0.0 {
            return Err(Error::numerical("luxemburg_norm", "lower bracket shrink exhausted"));
        }
    }
    let b = bisect_threshold(fits, lo, hi, tol, 0.0, 10_000)?;
    Ok(NormReport {
        modular: rho_one,
        norm: b.hi,
        bisection_iters: b.iters,
        bracket: (b.lo, b.hi),
        tolerance: tol,
    })
}

/// Discrete `L^p` norm `(h^dim Σ |f_i|^p)^{1/p}`.
pub fn lp_norm(field: &GridField, p: f64) -> f64 {
    let terms: Vec<f64> = field.values().iter().map(|v| v.abs().powf(p)).collect();
    (field.grid().cell_volume() * pairwise_sum(&terms)).powf(1.0 / p)
}

/// Checks `min{(ρ/a)^{1/p}, 1} <= ‖f‖_φ <= max{(aρ)^{1/p}, 1}` after
/// confirming `(aInc)_p` with constant `a` on the grid nodes.
pub fn check_norm_modular_comparison(
    phi: &PhiFunction,
    p: f64,
    a: f64,
    field: &GridField,
) -> Result<VerificationReport> {
    let name = format!("norm_modular_comparison[{}]", phi.describe());
    let ainc = check_ainc(phi, p, a, &SampleSpec::on_grid(field.grid()))?;
    if !ainc.passed {
        return Ok(VerificationReport::new(name, false, f64::NAN, 0.0)
            .note(format!("precondition (aInc)_{p} with a = {a} fails on samples (needs a = {})", ainc.witness_constant)));
    }
    let nr = luxemburg_norm(phi, field, DEFAULT_NORM_TOL)?;
    let rho = nr.modular;
    let lower = (rho / a).powf(1.0 / p).min(1.0);
    let upper = (a * rho).powf(1.0 / p).max(1.0);
    let tol = 4.0 * DEFAULT_NORM_TOL;
    let slack = (nr.norm - lower).min(upper - nr.norm);
    let passed = lower <= nr.norm * (1.0 + tol) && nr.norm <= upper * (1.0 + tol);
    Ok(VerificationReport::new(name, passed, slack, tol)
        .with_iters(nr.bisection_iters)
        .detail("modular", rho)
        .detail("norm", nr.norm)
        .detail("lower", lower)
        .detail("upper", upper))
}

/// Hölder inequality `∫|f||g| <= 2 ‖f‖_φ ‖g‖_{φ*}` with `φ*` computed
/// numerically.
pub fn check_holder(phi: &PhiFunction, f: &GridField, g: &GridField) -> Result<VerificationReport> {
    if f.grid() != g.grid() {
        return Err(Error::Argument("Hölder check needs fields on one grid".into()));
    }
    let prod: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| (a * b).abs()).collect();
    let lhs = f.grid().cell_volume() * pairwise_sum(&prod);
    let nf = luxemburg_norm(phi, f, DEFAULT_NORM_TOL)?;
    let conj = Conjugate::new(phi);
    let ng = luxemburg_norm(&conj, g, DEFAULT_NORM_TOL)?;
    let rhs = 2.0 * nf.norm * ng.norm;
    let tol = 1e-6;
    let passed = lhs <= rhs * (1.0 + tol) + f64::MIN_POSITIVE;
    Ok(
        VerificationReport::new(format!("holder[{}]", phi.describe()), passed, rhs - lhs, tol)
            .with_iters(nf.bisection_iters + ng.bisection_iters)
            .detail("lhs", lhs)
            .detail("rhs", rhs)
            .detail("norm_phi_f", nf.norm)
            .detail("norm_conj_g", ng.norm),
    )
}

/// Embedding `L^φ ↪ L^p` on the grid box: `‖f‖_p / ‖f‖_φ` must stay below
/// `(a + |box|)^{1/p} / β` (constants from sampled `(aInc)_p` and `(A0)`),
/// and, when `refined` fields are given, its maximum must move by at most 20%.
pub fn check_embedding(
    phi: &PhiFunction,
    p: f64,
    fields: &[GridField],
    refined: Option<&[GridField]>,
) -> Result<VerificationReport> {
    let first = fields
        .iter()
        .find(|f| !f.is_zero())
        .ok_or_else(|| Error::Argument("embedding check needs a nonzero field".into()))?;
    let samples = SampleSpec::on_grid(first.grid());
    let ainc = check_ainc(phi, p, 1.0, &samples)?;
    let a0 = check_a0(phi, &samples)?;
    let name = format!("embedding[{},p={p}]", phi.describe());
    if !a0.passed {
        return Ok(VerificationReport::skipped(name, "precondition (A0) fails on samples"));
    }
    let a = ainc.witness_constant;
    let bound = (a + first.grid().measure()).powf(1.0 / p) / a0.witness_constant;
    let max_ratio = |set: &[GridField]| -> Result<(f64, usize)> {
        let mut best = 0.0f64;
        let mut iters = 0;
        for f in set.iter().filter(|f| !f.is_zero()) {
            let nr = luxemburg_norm(phi, f, DEFAULT_NORM_TOL)?;
            iters += nr.bisection_iters;
            best = best.max(lp_norm(f, p) / nr.norm);
        }
        Ok((best, iters))
    };
    let (ratio, mut iters) = max_ratio(fields)?;
    let tol = 1e-6;
    let mut passed = ratio.is_finite() && ratio <= bound * (1.0 + tol);
    let mut report = VerificationReport::new(name, false, ratio, tol)
        .detail("max_ratio", ratio)
        .detail("bound", bound)
        .detail("ainc_a", a)
        .detail("a0_beta", a0.witness_constant);
    if let Some(refined) = refined {
        let (r2, it2) = max_ratio(refined)?;
        iters += it2;
        let drift = (r2 / ratio - 1.0).abs();
        passed &= r2 <= bound * (1.0 + tol) && drift <= 0.2;
        report = report.detail("refined_max_ratio", r2).detail("refinement_drift", drift);
    }
    report.passed = passed;
    Ok(report.with_iters(iters))
}

/// Smallest grid-aligned `R = k h` with `h^dim Σ_{|x_i| > R} φ(x_i, |f_i|/(ε/2)) <= 1`,
/// which forces `‖f χ_{|x| > R}‖_φ <= ε/2 < ε`.
pub fn tail_radius(phi: &dyn Integrand, field: &GridField, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let grid = field.grid();
    let cell = grid.cell_volume();
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for i in 0..field.len() {
        let v = field.values()[i];
        if v != 0.0 {
            let x = grid.point(i);
            terms.push((norm(&x), cell * phi.value(&x, v.abs() / (eps / 2.0))?));
        }
    }
    if terms.is_empty() {
        return Ok(0.0);
    }
    // Farthest first; tail(R) sums terms with distance > R.
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let h = grid.h();
    let k_max = (terms[0].0 / h).ceil() as usize;
    let tail = |r: f64| -> f64 {
        let outside: Vec<f64> = terms.iter().take_while(|t| t.0 > r).map(|t| t.1).collect();
        pairwise_sum(&outside)
    };
    // tail is non-increasing in R: binary search the smallest passing k.
    let (mut lo, mut hi) = (0usize, k_max);
    if tail(0.0) <= 1.0 {
        return Ok(0.0);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid as f64 * h) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 * h)
}

/// Worst-set data behind [`smallness_threshold`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Smallness {
    pub lambda: f64,
    /// Cells in the largest greedy worst set whose norm stays below `eps`.
    pub cells: usize,
    /// Norm of the field on that worst set.
    pub worst_norm: f64,
}

/// `λ` such that every union of fewer than `λ / h^dim` cells carries norm
/// below `eps`. Cells are ranked by `φ(x_i, |f_i|/(ε/2))`; the longest prefix
/// of that ranking whose restricted norm stays below `eps` sets `λ`.
pub fn smallness(phi: &dyn Integrand, field: &GridField, eps: f64) -> Result<Smallness> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let grid = field.grid();
    let total = grid.measure();
    let mut keyed = Vec::with_capacity(field.len());
    for i in 0..field.len() {
        let v = field.values()[i].abs();
        keyed.push((phi.value(&grid.point(i), v / (eps / 2.0))?, i));
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let prefix_norm = |k: usize| -> Result<f64> {
        let mut vals = vec![0.0; field.len()];
        for &(_, i) in &keyed[..k] {
            vals[i] = field.values()[i];
        }
        Ok(luxemburg_norm(phi, &GridField::new(grid.clone(), vals)?, DEFAULT_NORM_TOL)?.norm)
    };
    let n = keyed.len();
    let full = prefix_norm(n)?;
    if full < eps {
        return Ok(Smallness {
            lambda: total,
            cells: n,
            worst_norm: full,
        });
    }
    // prefix norms are non-decreasing in k; find the largest k with norm < eps.
    let (mut lo, mut hi) = (0usize, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if prefix_norm(mid)? < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Smallness {
        lambda: ((lo + 1) as f64 * grid.cell_volume()).min(total),
        cells: lo,
        worst_norm: prefix_norm(lo)?,
    })
}

pub fn smallness_threshold(phi: &dyn Integrand, field: &GridField, eps: f64) -> Result<f64> {
    Ok(smallness(phi, field, eps)?.lambda)
}

/// Recomputes the tail norm at [`tail_radius`] and the worst-set norm behind
/// [`smallness_threshold`]; both must fall below `eps`.
pub fn check_tail_and_smallness(phi: &PhiFunction, field: &GridField, eps: f64) -> Result<VerificationReport> {
    let r = tail_radius(phi, field, eps)?;
    let tail = field.restricted(|x| norm(x) > r);
    let tail_norm = luxemburg_norm(phi, &tail, DEFAULT_NORM_TOL)?.norm;
    let small = smallness(phi, field, eps)?;
    let passed = tail_norm < eps && small.worst_norm < eps;
    Ok(VerificationReport::new(
        format!("tail_and_smallness[{},eps={eps}]", phi.describe()),
        passed,
        eps - tail_norm.max(small.worst_norm),
        0.0,
    )
    .detail("tail_radius", r)
    .detail("tail_norm", tail_norm)
    .detail("smallness_lambda", small.lambda)
    .detail("worst_set_norm", small.worst_norm)
    .note("worst set: greedy union of whole cells ranked by φ(x, |f|/(ε/2))"))
}
