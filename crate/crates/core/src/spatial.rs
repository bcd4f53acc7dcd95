//! Catalog of spatial functions used as variable exponents `p(x)` and
//! double-phase weights `a(x)`.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use crate::grid::GridField;

type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real function of position.
///
/// Affine and ramp variants act on the first coordinate; bump and decay
/// variants are radial.
#[derive(Clone)]
pub enum SpatialFn {
    Constant(f64),
    /// `base + slope * x_1`
    Affine { base: f64, slope: f64 },
    /// `base + slope * clamp(x_1, lo, hi)`
    ClampedRamp { base: f64, slope: f64, lo: f64, hi: f64 },
    /// `base + amplitude * exp(-|x - center|^2 / width^2)`
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// `limit + amplitude / log(e + |x|)`
    LogDecay { limit: f64, amplitude: f64 },
    /// Nearest-node lookup in a sampled field (zero outside its box).
    Sampled(Arc<GridField>),
    Custom { name: String, f: Arc<PointFn> },
}

impl SpatialFn {
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        SpatialFn::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SpatialFn::Constant(c) => *c,
            SpatialFn::Affine { base, slope } => base + slope * x[0],
            SpatialFn::ClampedRamp { base, slope, lo, hi } => base + slope * x[0].clamp(*lo, *hi),
            SpatialFn::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let d2: f64 = x
                    .iter()
                    .zip(center.iter().chain(std::iter::repeat(&0.0)))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                base + amplitude * (-d2 / (width * width)).exp()
            }
            SpatialFn::LogDecay { limit, amplitude } => limit + amplitude / (E + norm(x)).ln(),
            SpatialFn::Sampled(field) => field.nearest_value(x).unwrap_or(0.0),
            SpatialFn::Custom { f, .. } => f(x),
        }
    }

    /// Best available lower and upper bounds of the function, when they are
    /// known in closed form.
    pub fn closed_form_range(&self) -> Option<(f64, f64)> {
        match self {
            SpatialFn::Constant(c) => Some((*c, *c)),
            SpatialFn::ClampedRamp { base, slope, lo, hi } => {
                let (a, b) = (base + slope * lo, base + slope * hi);
                Some((a.min(b), a.max(b)))
            }
            SpatialFn::GaussianBump { base, amplitude, .. } => {
                Some((base.min(base + amplitude), base.max(base + amplitude)))
            }
            SpatialFn::LogDecay { limit, amplitude } => {
                Some((limit.min(limit + amplitude), limit.max(limit + amplitude)))
            }
            SpatialFn::Sampled(field) => {
                let lo = field.values().iter().cloned().fold(0.0, f64::min);
                let hi = field.values().iter().cloned().fold(0.0, f64::max);
                Some((lo, hi))
            }
            SpatialFn::Affine { .. } | SpatialFn::Custom { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SpatialFn::Constant(c) => format!("constant({c})"),
            SpatialFn::Affine { base, slope } => format!("affine({base}+{slope}x)"),
            SpatialFn::ClampedRamp { base, slope, lo, hi } => {
                format!("clamped_ramp({base}+{slope}*clamp(x,{lo},{hi}))")
            }
            SpatialFn::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => format!("gaussian_bump({base}+{amplitude}*g({center:?},{width}))"),
            SpatialFn::LogDecay { limit, amplitude } => format!("log_decay({limit}+{amplitude}/log(e+|x|))"),
            SpatialFn::Sampled(field) => format!("sampled({} nodes)", field.len()),
            SpatialFn::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for SpatialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        assert_eq!(SpatialFn::Constant(2.5).eval(&[7.0]), 2.5);
        assert_eq!(SpatialFn::Affine { base: 1.0, slope: 2.0 }.eval(&[3.0]), 7.0);
        let ramp = SpatialFn::ClampedRamp {
            base: 2.0,
            slope: 1.0,
            lo: 0.0,
            hi: 1.0,
        };
        assert_eq!(ramp.eval(&[-3.0]), 2.0);
        assert_eq!(ramp.eval(&[0.25]), 2.25);
        assert_eq!(ramp.eval(&[9.0]), 3.0);
        let g = SpatialFn::GaussianBump {
            base: 2.0,
            amplitude: 0.5,
            center: vec![0.0],
            width: 1.0,
        };
        assert_eq!(g.eval(&[0.0]), 2.5);
        let d = SpatialFn::LogDecay {
            limit: 2.0,
            amplitude: 1.0,
        };
        assert!((d.eval(&[0.0]) - 3.0).abs() < 1e-15);
        assert!(d.eval(&[1e6]) < 2.1);
    }
}
