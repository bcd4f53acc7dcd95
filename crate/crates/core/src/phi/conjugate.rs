use super::{Integrand, PhiFunction};
use crate::error::{Error, Result};
use crate::roots::golden_max;

/// Bracket growth and refinement settings for the numerical conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub initial_upper: f64,
    pub growth: f64,
    /// Expansion steps before the supremum is declared unbounded.
    pub max_expansions: usize,
    /// Relative bracket width at which golden-section refinement stops.
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            initial_upper: 1.0,
            growth: 2.0,
            max_expansions: 128,
            rel_tol: 1e-12,
            max_iters: 400,
        }
    }
}

/// `φ*(x, t) = sup_{s >= 0} (t s - φ(x, s))`.
///
/// The objective is expanded geometrically until it stops increasing, then
/// the maximizer is refined by golden-section search. The result is the best
/// value found, hence a lower bound of the supremum; for integrands convex in
/// `s` it is within the refinement tolerance.
pub fn conjugate(phi: &dyn Integrand, x: &[f64], t: f64, search: &SearchSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("conjugate is evaluated for t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let mut objective = |s: f64| match phi.value(x, s) {
        Ok(v) => t * s - v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    // Geometric expansion: s_{-1} = 0, s_0 = initial_upper, s_k = growth^k s_0.
    let mut before = 0.0;
    let mut prev = 0.0;
    let mut prev_val = 0.0;
    let mut s = search.initial_upper;
    let mut expansions = 0;
    loop {
        let val = objective(s);
        if !(val > prev_val) {
            break;
        }
        before = prev;
        prev = s;
        prev_val = val;
        expansions += 1;
        if expansions > search.max_expansions {
            return Err(Error::UnboundedConjugate { t, s_cap: s });
        }
        s *= search.growth;
    }
    let (_, best) = golden_max(&mut objective, before, s, search.rel_tol, search.max_iters);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(best.max(prev_val).max(0.0))
}

/// The numerical conjugate of a Φ-function, usable as an integrand.
#[derive(Debug, Clone)]
pub struct Conjugate<'a> {
    pub phi: &'a PhiFunction,
    pub search: SearchSpec,
}

impl<'a> Conjugate<'a> {
    pub fn new(phi: &'a PhiFunction) -> Self {
        Self {
            phi,
            search: SearchSpec::default(),
        }
    }
}

impl Integrand for Conjugate<'_> {
    fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        conjugate(self.phi, x, t, &self.search)
    }

    fn label(&self) -> String {
        format!("conjugate({})", self.phi.describe())
    }
}
