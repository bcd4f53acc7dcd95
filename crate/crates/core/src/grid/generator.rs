use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, GridField};
use crate::error::{Error, Result};
use crate::spatial::dist;

type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Named field generators.
///
/// Radial generators take `s = |x - center| / radius` and vanish for `s >= 1`.
#[derive(Clone)]
pub enum Generator {
    Zero,
    Constant(f64),
    /// Indicator of the closed box `[lo, hi]`.
    Indicator { lo: Vec<f64>, hi: Vec<f64> },
    /// `height * max(0, 1 - s)`
    Tent { center: Vec<f64>, radius: f64, height: f64 },
    /// `height * exp(1 - 1 / (1 - s^2))`, smooth.
    SmoothBump { center: Vec<f64>, radius: f64, height: f64 },
    /// `height * cos^2(pi s / 2)`, continuously differentiable.
    CosBump { center: Vec<f64>, radius: f64, height: f64 },
    /// `height * (1 - s^2)^2`, continuously differentiable.
    PolyBump { center: Vec<f64>, radius: f64, height: f64 },
    /// `height * exp(-|x - center|^2 / width^2)`
    Gaussian { center: Vec<f64>, width: f64, height: f64 },
    /// Seeded uniform noise in `[-amplitude, amplitude]`, smoothed by
    /// `passes` sweeps of the `[1, 2, 1] / 4` stencil along each axis and
    /// multiplied by a `PolyBump` cutoff of the given center and radius.
    Noise {
        seed: u64,
        amplitude: f64,
        passes: usize,
        center: Vec<f64>,
        radius: f64,
    },
    Sum(Vec<Generator>),
    Scaled(f64, Box<Generator>),
    /// Field file in the plain-text field format.
    File(PathBuf),
    Custom { name: String, f: Arc<PointFn> },
}

impl Generator {
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Generator::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn indicator_1d(lo: f64, hi: f64) -> Self {
        Generator::Indicator {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn plus(self, other: Generator) -> Self {
        match self {
            Generator::Sum(mut parts) => {
                parts.push(other);
                Generator::Sum(parts)
            }
            g => Generator::Sum(vec![g, other]),
        }
    }

    pub fn times(self, c: f64) -> Self {
        Generator::Scaled(c, Box::new(self))
    }

    /// Pointwise value, for every generator that is not grid-dependent.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let radial = |center: &[f64], radius: f64| dist(x, &pad(center, x.len())) / radius;
        Some(match self {
            Generator::Zero => 0.0,
            Generator::Constant(c) => *c,
            Generator::Indicator { lo, hi } => {
                let inside = x
                    .iter()
                    .enumerate()
                    .all(|(k, &v)| v >= lo[k.min(lo.len() - 1)] && v <= hi[k.min(hi.len() - 1)]);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Generator::Tent { center, radius, height } => height * (1.0 - radial(center, *radius)).max(0.0),
            Generator::SmoothBump { center, radius, height } => {
                let s = radial(center, *radius);
                if s < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            }
            Generator::CosBump { center, radius, height } => {
                let s = radial(center, *radius);
                if s < 1.0 {
                    height * (std::f64::consts::FRAC_PI_2 * s).cos().powi(2)
                } else {
                    0.0
                }
            }
            Generator::PolyBump { center, radius, height } => height * poly_bump(radial(center, *radius)),
            Generator::Gaussian { center, width, height } => {
                let d = dist(x, &pad(center, x.len()));
                height * (-(d * d) / (width * width)).exp()
            }
            Generator::Sum(parts) => {
                let mut total = 0.0;
                for p in parts {
                    total += p.eval(x)?;
                }
                total
            }
            Generator::Scaled(c, g) => c * g.eval(x)?,
            Generator::Custom { f, .. } => f(x),
            Generator::Noise { .. } | Generator::File(_) => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Generator::Zero => "zero".into(),
            Generator::Constant(c) => format!("constant({c})"),
            Generator::Indicator { lo, hi } => format!("indicator({lo:?},{hi:?})"),
            Generator::Tent { center, radius, height } => format!("tent({center:?},{radius},{height})"),
            Generator::SmoothBump { center, radius, height } => {
                format!("smooth_bump({center:?},{radius},{height})")
            }
            Generator::CosBump { center, radius, height } => format!("cos_bump({center:?},{radius},{height})"),
            Generator::PolyBump { center, radius, height } => format!("poly_bump({center:?},{radius},{height})"),
            Generator::Gaussian { center, width, height } => format!("gaussian({center:?},{width},{height})"),
            Generator::Noise {
                seed,
                amplitude,
                passes,
                center,
                radius,
            } => format!("noise(seed={seed},{amplitude},{passes},{center:?},{radius})"),
            Generator::Sum(parts) => parts.iter().map(Generator::name).collect::<Vec<_>>().join("+"),
            Generator::Scaled(c, g) => format!("{c}*({})", g.name()),
            Generator::File(p) => format!("file({})", p.display()),
            Generator::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn pad(center: &[f64], dim: usize) -> Vec<f64> {
    (0..dim).map(|k| center.get(k).copied().unwrap_or(0.0)).collect()
}

fn poly_bump(s: f64) -> f64 {
    if s < 1.0 {
        let w = 1.0 - s * s;
        w * w
    } else {
        0.0
    }
}

/// Samples a generator at the nodes of `grid`.
pub fn make_field(grid: &Grid, generator: &Generator) -> Result<GridField> {
    match generator {
        Generator::File(path) => {
            let field = super::read_field(path)?;
            if field.grid() != grid {
                return Err(Error::Format(format!(
                    "field file {} has grid {:?}, expected {:?}",
                    path.display(),
                    field.grid(),
                    grid
                )));
            }
            Ok(field)
        }
        Generator::Noise {
            seed,
            amplitude,
            passes,
            center,
            radius,
        } => noise_field(grid, *seed, *amplitude, *passes, center, *radius),
        Generator::Sum(parts) => {
            let mut acc = GridField::zeros(grid.clone());
            for p in parts {
                acc = acc.add(&make_field(grid, p)?)?;
            }
            Ok(acc)
        }
        Generator::Scaled(c, g) => Ok(make_field(grid, g)?.scaled(*c)),
        g => GridField::from_fn(grid.clone(), |x| g.eval(x).expect("pointwise generator")),
    }
}

fn noise_field(grid: &Grid, seed: u64, amplitude: f64, passes: usize, center: &[f64], radius: f64) -> Result<GridField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    for _ in 0..passes {
        for axis in 0..grid.dim() {
            let prev = values.clone();
            for (i, v) in values.iter_mut().enumerate() {
                let c = grid.coords(i);
                let (c0, c1) = (c[0] as isize, c[1] as isize);
                let (lo, hi) = if axis == 0 {
                    ((c0 - 1, c1), (c0 + 1, c1))
                } else {
                    ((c0, c1 - 1), (c0, c1 + 1))
                };
                let at = |(a, b): (isize, isize)| grid.checked_index(a, b).map_or(prev[i], |j| prev[j]);
                *v = 0.25 * at(lo) + 0.5 * prev[i] + 0.25 * at(hi);
            }
        }
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm = if max > 0.0 { amplitude / max } else { 0.0 };
    let center = pad(center, grid.dim());
    let mut field = GridField::zeros(grid.clone());
    for (i, v) in field.values_mut().iter_mut().enumerate() {
        let s = dist(&grid.point(i), &center) / radius;
        *v = norm * values[i] * poly_bump(s);
    }
    Ok(field)
}
