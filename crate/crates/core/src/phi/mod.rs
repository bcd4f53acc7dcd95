//! Generalized Orlicz integrands `φ(x, t)`: the example families, their
//! left-inverses and numerical conjugates, and sampled checks of the
//! structural conditions.
//!
//! Every family here is continuous and strictly increasing in `t` with
//! `φ(x, 0) = 0` and `φ(x, t) → ∞`, so the left-inverse is a true inverse.

mod conditions;
mod conjugate;

pub use conditions::{
    check_a0, check_a1_double_phase, check_a1_variable_exponent, check_a2_variable_exponent, check_adec,
    check_ainc, Condition, ConditionReport, Counterexample, SampleSpec,
};
pub use conjugate::{conjugate, Conjugate, SearchSpec};

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::roots::{bisect_threshold, expand_upper};
use crate::spatial::SpatialFn;

/// Anything that can be integrated as `∫ ψ(x, |f(x)|) dx`.
pub trait Integrand: Sync {
    fn value(&self, x: &[f64], t: f64) -> Result<f64>;

    fn label(&self) -> String;
}

/// Axis-aligned box, possibly unbounded, on which `x`-dependence is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn whole(dim: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::Argument(format!("invalid box [{lo:?}, {hi:?}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(k, &v)| {
                let slack = 1e-12 * (1.0 + v.abs());
                v >= self.lo[k] - slack && v <= self.hi[k] + slack
            })
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `t^p`
    PowerLaw { p: f64 },
    /// `t^p log(e + t)`, an x-independent integrand between `p`- and
    /// `(p + 1)`-growth.
    Autonomous { p: f64 },
    /// `t^{p(x)}`
    VariableExponent { p_field: SpatialFn },
    /// `t^p + a(x) t^q`
    DoublePhase { p: f64, q: f64, a_field: SpatialFn },
    /// `w(x) t^p` with `w > 0`.
    Weighted { p: f64, weight: SpatialFn },
}

#[derive(Debug, Clone)]
pub struct PhiFunction {
    family: Family,
    domain: BoxDomain,
}

impl PhiFunction {
    pub fn new(family: Family, domain: BoxDomain) -> Result<Self> {
        let check_exp = |name: &str, p: f64| {
            if p >= 1.0 && p.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be a finite real >= 1, got {p}")))
            }
        };
        match &family {
            Family::PowerLaw { p } | Family::Autonomous { p } | Family::Weighted { p, .. } => check_exp("p", *p)?,
            Family::DoublePhase { p, q, .. } => {
                check_exp("p", *p)?;
                if !(q > p) || !q.is_finite() {
                    return Err(Error::Argument(format!("q must be finite and exceed p = {p}, got {q}")));
                }
            }
            Family::VariableExponent { p_field } => {
                if let Some((lo, _)) = p_field.closed_form_range() {
                    check_exp("inf p(x)", lo)?;
                }
            }
        }
        Ok(Self { family, domain })
    }

    pub fn power_law(p: f64, dim: usize) -> Result<Self> {
        Self::new(Family::PowerLaw { p }, BoxDomain::whole(dim))
    }

    pub fn autonomous(p: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Autonomous { p }, BoxDomain::whole(dim))
    }

    pub fn variable_exponent(p_field: SpatialFn, dim: usize) -> Result<Self> {
        Self::new(Family::VariableExponent { p_field }, BoxDomain::whole(dim))
    }

    pub fn double_phase(p: f64, q: f64, a_field: SpatialFn, dim: usize) -> Result<Self> {
        Self::new(Family::DoublePhase { p, q, a_field }, BoxDomain::whole(dim))
    }

    pub fn weighted(p: f64, weight: SpatialFn, dim: usize) -> Result<Self> {
        Self::new(Family::Weighted { p, weight }, BoxDomain::whole(dim))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Exponents `(p, q)` for which the family satisfies `(aInc)_p` and
    /// `(aDec)_q` with constant 1, when known in closed form.
    pub fn growth_exponents(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::PowerLaw { p } | Family::Weighted { p, .. } => Some((*p, *p)),
            Family::Autonomous { p } => Some((*p, p + 1.0)),
            Family::DoublePhase { p, q, .. } => Some((*p, *q)),
            Family::VariableExponent { p_field } => p_field.closed_form_range(),
        }
    }

    /// `φ(x, t)`, exactly 0 at `t = 0`.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        if !(t >= 0.0) {
            return Err(Error::Argument(format!("φ is defined for t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.family {
            Family::PowerLaw { p } => t.powf(*p),
            Family::Autonomous { p } => t.powf(*p) * (E + t).ln(),
            Family::VariableExponent { p_field } => {
                let p = p_field.eval(x);
                if !(p >= 1.0) {
                    return Err(Error::Argument(format!("p(x) = {p} < 1 at {x:?}")));
                }
                t.powf(p)
            }
            Family::DoublePhase { p, q, a_field } => {
                let a = a_field.eval(x);
                if !(a >= 0.0) {
                    return Err(Error::Argument(format!("a(x) = {a} < 0 at {x:?}")));
                }
                // Skip the q-term where a vanishes so that 0 * inf never occurs.
                if a == 0.0 {
                    t.powf(*p)
                } else {
                    t.powf(*p) + a * t.powf(*q)
                }
            }
            Family::Weighted { p, weight } => {
                let w = weight.eval(x);
                if !(w > 0.0) {
                    return Err(Error::Argument(format!("weight w(x) = {w} must be positive at {x:?}")));
                }
                w * t.powf(*p)
            }
        })
    }

    /// Left-inverse `inf{t >= 0 : φ(x, t) >= tau}` by bracketing from
    /// `[0, 1]` (doubling the upper end, at most 64 times) then bisection to
    /// relative width `tol`.
    pub fn left_inverse(&self, x: &[f64], tau: f64, tol: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::Argument(format!("tau must be >= 0, got {tau}")));
        }
        if !(tol > 0.0) {
            return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
        }
        if tau == 0.0 {
            return Ok(0.0);
        }
        let reaches = |t: f64| self.eval(x, t).map(|v| v >= tau);
        let (hi, doublings) = expand_upper(reaches, 1.0, 64).map_err(|e| match e {
            Error::Numerical { detail, .. } => Error::numerical(
                "left_inverse",
                format!("could not bracket tau = {tau} at x = {x:?}: {detail}"),
            ),
            other => other,
        })?;
        let lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
        let b = bisect_threshold(reaches, lo, hi, tol, f64::MIN_POSITIVE, 2000)?;
        Ok(0.5 * (b.lo + b.hi))
    }

    /// Short description such as `double_phase(p=2,q=4,a=affine(0+1x))`.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::PowerLaw { p } => format!("power_law(p={p})"),
            Family::Autonomous { p } => format!("autonomous(p={p})"),
            Family::VariableExponent { p_field } => format!("variable_exponent(p={})", p_field.name()),
            Family::DoublePhase { p, q, a_field } => format!("double_phase(p={p},q={q},a={})", a_field.name()),
            Family::Weighted { p, weight } => format!("weighted(p={p},w={})", weight.name()),
        }
    }
}

impl Integrand for PhiFunction {
    fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        self.eval(x, t)
    }

    fn label(&self) -> String {
        self.describe()
    }
}

/// Free-function form of [`PhiFunction::eval`].
pub fn eval_phi(phi: &PhiFunction, x: &[f64], t: f64) -> Result<f64> {
    phi.eval(x, t)
}

/// Free-function form of [`PhiFunction::left_inverse`].
pub fn left_inverse(phi: &PhiFunction, x: &[f64], tau: f64, tol: f64) -> Result<f64> {
    phi.left_inverse(x, tau, tol)
}
