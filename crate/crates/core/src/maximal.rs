//! The discrete centered maximal operator, radius sets, and the quantitative
//! statements about optimal averaging radii.
//!
//! `Mf(x)` is the maximum of the node-centered ball averages of `|f|` over
//! the radii `j h / 2`, `j = 1..=steps`, together with the `r -> 0` value
//! `|f(x)|`. The average of radius `h / 2` is the single center node, so the
//! marker always ties with the smallest ball.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ball_average, Ball, Grid, GridField, RingScanner};
use crate::modular::{luxemburg_norm, DEFAULT_NORM_TOL};
use crate::phi::{check_a0, check_ainc, Conjugate, PhiFunction, SampleSpec};
use crate::report::{csv_escape, VerificationReport};
use crate::spatial::norm;

/// Default radius-set slack relative to `Mf(x)`.
pub const DEFAULT_RADIUS_REL_TOL: f64 = 1e-9;

/// Spatial samples used when estimating conjugate constants.
pub const CONSTANT_SAMPLES: usize = 65;

/// Radii beyond the box diameter only enlarge the divisor, so scanning up to
/// the diameter loses nothing.
pub fn default_r_max(grid: &Grid) -> f64 {
    grid.diameter().max(grid.h())
}

/// Near-optimal averaging radii at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSet {
    pub node: usize,
    pub point: Vec<f64>,
    /// Ascending; `0.0` is the `r -> 0` marker.
    pub radii: Vec<f64>,
    pub tol: f64,
    pub max_value: f64,
    /// Distinct lattice balls among `radii`; the marker counts as the
    /// one-node ball.
    pub distinct_balls: usize,
}

impl RadiusSet {
    pub fn contains_marker(&self) -> bool {
        self.radii.first() == Some(&0.0)
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    /// Smallest positive radius in the set.
    pub fn smallest_ball(&self) -> Option<f64> {
        self.radii.iter().copied().find(|&r| r > 0.0)
    }

    /// Every radius of `self` lies within `lambda` of some radius of `other`.
    pub fn within(&self, other: &RadiusSet, lambda: f64) -> bool {
        self.radii.iter().all(|&r| {
            let k = other.radii.partition_point(|&s| s < r);
            let near = |i: usize| other.radii.get(i).is_some_and(|&s| (s - r).abs() <= lambda);
            near(k) || (k > 0 && near(k - 1))
        })
    }
}

fn radius_set_from(scanner: &RingScanner, node: usize, avgs: &[f64], tol: f64) -> RadiusSet {
    let max_value = avgs.iter().copied().fold(0.0, f64::max);
    let threshold = max_value - tol;
    let mut radii = Vec::new();
    let mut distinct_balls = 0;
    let mut last_count = 0;
    for (j, &v) in avgs.iter().enumerate() {
        if v >= threshold {
            radii.push(scanner.radius(j));
            let count = if j == 0 { 1 } else { scanner.lattice_count(j) };
            if count != last_count {
                distinct_balls += 1;
                last_count = count;
            }
        }
    }
    RadiusSet {
        node,
        point: scanner.grid().point(node),
        radii,
        tol,
        max_value,
        distinct_balls,
    }
}

/// `Mf` together with the radius set of every scanned node.
#[derive(Debug, Clone)]
pub struct MaximalScan {
    pub maximal: GridField,
    /// Indexed like the scanned node list.
    pub sets: Vec<RadiusSet>,
    pub r_max: f64,
    pub rel_tol: f64,
}

/// Radius sets at `nodes` with slack `rel_tol * Mf(x)`.
pub fn radius_sets(field: &GridField, nodes: &[usize], r_max: f64, rel_tol: f64) -> Result<Vec<RadiusSet>> {
    if !(rel_tol >= 0.0) {
        return Err(Error::Argument(format!("radius tolerance must be >= 0, got {rel_tol}")));
    }
    let scanner = RingScanner::new(field.grid(), r_max)?;
    let abs = field.abs();
    Ok(nodes
        .par_iter()
        .map_init(Vec::new, |buf, &node| {
            scanner.averages_into(abs.values(), node, buf);
            let max = buf.iter().copied().fold(0.0, f64::max);
            radius_set_from(&scanner, node, buf, rel_tol * max)
        })
        .collect())
}

/// `Mf` and all radius sets.
pub fn maximal_scan(field: &GridField, r_max: f64, rel_tol: f64) -> Result<MaximalScan> {
    let nodes: Vec<usize> = (0..field.len()).collect();
    let sets = radius_sets(field, &nodes, r_max, rel_tol)?;
    let values = sets.iter().map(|s| s.max_value).collect();
    Ok(MaximalScan {
        maximal: GridField::new(field.grid().clone(), values)?,
        sets,
        r_max,
        rel_tol,
    })
}

/// `Mf(x_i) = max(|f(x_i)|, max_j ⨍_{B(x_i, j h/2)} |f|)` for radii up to `r_max`.
pub fn maximal_function(field: &GridField, r_max: f64) -> Result<GridField> {
    let scanner = RingScanner::new(field.grid(), r_max)?;
    let abs = field.abs();
    let values = (0..field.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, node| {
            scanner.averages_into(abs.values(), node, buf);
            buf.iter().copied().fold(0.0, f64::max)
        })
        .collect();
    GridField::new(field.grid().clone(), values)
}

/// Radius set at one node with absolute slack `tol`.
pub fn radius_set(field: &GridField, node: usize, r_max: f64, tol: f64) -> Result<RadiusSet> {
    if node >= field.len() {
        return Err(Error::Argument(format!("node {node} out of range")));
    }
    if !(tol >= 0.0) {
        return Err(Error::Argument(format!("radius tolerance must be >= 0, got {tol}")));
    }
    let scanner = RingScanner::new(field.grid(), r_max)?;
    let avgs = scanner.averages(field.abs().values(), node);
    Ok(radius_set_from(&scanner, node, &avgs, tol))
}

/// Per-node CSV: coordinates, `Mf`, and the radius set joined by `;`.
pub fn maximal_csv(scan: &MaximalScan) -> String {
    let grid = scan.maximal.grid();
    let mut out = String::from(if grid.dim() == 1 { "x,Mf,radii\n" } else { "x,y,Mf,radii\n" });
    for (i, set) in scan.sets.iter().enumerate() {
        let coords: Vec<String> = grid.point(set.node).iter().map(|c| c.to_string()).collect();
        let radii: Vec<String> = set.radii.iter().map(|r| r.to_string()).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            coords.join(","),
            scan.maximal.values()[i],
            csv_escape(&radii.join(";"))
        ));
    }
    out
}

/// Constants of the decay estimate: `φ*` satisfies `(aInc)_{p'}` with `a`
/// and `(A0)` with `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub p: f64,
    pub p_conj: f64,
    pub a: f64,
    pub beta: f64,
}

impl DecayConstants {
    /// `2 a^{1/p'} / β`
    pub fn factor(&self) -> f64 {
        2.0 * self.a.powf(1.0 / self.p_conj) / self.beta
    }
}

/// Estimates `a` and `β` on the numerically conjugated integrand.
pub fn decay_constants(phi: &PhiFunction, p: f64, samples: &SampleSpec) -> Result<DecayConstants> {
    if !(p > 1.0) {
        return Err(Error::Argument(format!("decay estimate needs p > 1, got {p}")));
    }
    let p_conj = p / (p - 1.0);
    let conj = Conjugate::new(phi);
    let a = check_ainc(&conj, p_conj, 1.0, samples)?.witness_constant;
    let a0 = check_a0(&conj, samples)?;
    if !a0.passed {
        return Err(Error::Precondition("conjugate fails (A0) on samples".into()));
    }
    Ok(DecayConstants {
        p,
        p_conj,
        a,
        beta: a0.witness_constant,
    })
}

/// `⨍_B |f| <= (2 a^{1/p'} / β) ‖f‖_φ |B|^{1/p' - 1}` for a ball with
/// `|B| >= 1`. The left side is the discrete average, `|B|` the continuum
/// measure.
pub fn average_decay_bound(
    phi: &PhiFunction,
    field: &GridField,
    p: f64,
    a: f64,
    beta: f64,
    ball: &Ball,
) -> Result<VerificationReport> {
    if !(p > 1.0 && a >= 1.0 && beta > 0.0 && beta <= 1.0) {
        return Err(Error::Argument(format!("need p > 1, a >= 1, β in (0,1]; got p = {p}, a = {a}, β = {beta}")));
    }
    let name = format!("average_decay[{},r={}]", phi.describe(), ball.radius);
    let measure = ball.measure(field.grid().dim());
    if measure < 1.0 {
        return Ok(VerificationReport::skipped(name, format!("|B| = {measure} < 1")));
    }
    let p_conj = p / (p - 1.0);
    let left = ball_average(&field.abs(), ball)?;
    let nr = luxemburg_norm(phi, field, DEFAULT_NORM_TOL)?;
    let right = 2.0 * a.powf(1.0 / p_conj) / beta * nr.norm * measure.powf(1.0 / p_conj - 1.0);
    let tol = 1e-9;
    Ok(VerificationReport::new(name, left <= right * (1.0 + tol), right - left, tol)
        .with_iters(nr.bisection_iters)
        .detail("left", left)
        .detail("right", right)
        .detail("ball_measure", measure)
        .note("left: discrete lattice average; |B|: continuum measure"))
}

fn nodes_in_ball(grid: &Grid, radius: f64) -> Vec<usize> {
    (0..grid.len()).filter(|&i| norm(&grid.point(i)) <= radius).collect()
}

/// Largest radius in any radius set over the nodes of `B(0, R)`.
pub fn max_optimal_radius(field: &GridField, radius: f64, r_max: f64, rel_tol: f64) -> Result<f64> {
    if field.is_zero() {
        return Err(Error::UndefinedBound);
    }
    let nodes = nodes_in_ball(field.grid(), radius);
    if nodes.is_empty() {
        return Err(Error::Argument(format!("B(0, {radius}) contains no grid node")));
    }
    let sets = radius_sets(field, &nodes, r_max, rel_tol)?;
    Ok(sets.iter().map(RadiusSet::max_radius).fold(0.0, f64::max))
}

/// `R0` and the a-priori bound it must respect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusBound {
    /// Largest near-optimal radius over nodes of `B(0, R)`.
    pub r0: f64,
    /// Radius beyond which the decay estimate forces averages below `lower`.
    pub a_priori: f64,
    /// Lower bound of `Mf` on `B(0, R)`.
    pub lower: f64,
    /// Radius `R̂ >= R` whose mass gives `lower`.
    pub r_hat: f64,
    pub constants: DecayConstants,
    pub norm: f64,
}

impl RadiusBound {
    pub fn holds(&self) -> bool {
        self.r0.is_finite() && self.r0 <= self.a_priori
    }
}

/// `R0 = sup{r : r ∈ R f(x), x ∈ B(0, R)}` with the a-priori bound from the
/// decay estimate: for `x ∈ B(0, R)` and `R̂ >= R`, the ball `B(x, 2R̂)`
/// covers `B(0, R̂)`, so `Mf(x) >= lower`; a radius whose ball has measure
/// above `max(1, (C ‖f‖_φ / lower)^p)` averages below `lower`.
///
/// `p` is the upper growth exponent of `phi`; `tol` is relative to `Mf(x)`.
pub fn radius_upper_bound(phi: &PhiFunction, field: &GridField, radius: f64, r_max: f64, tol: f64) -> Result<RadiusBound> {
    if field.is_zero() {
        return Err(Error::UndefinedBound);
    }
    if !(radius > 0.0) {
        return Err(Error::Argument(format!("R must be positive, got {radius}")));
    }
    let grid = field.grid();
    let nodes = nodes_in_ball(grid, radius);
    if nodes.is_empty() {
        return Err(Error::Argument(format!("B(0, {radius}) contains no grid node")));
    }
    let sets = radius_sets(field, &nodes, r_max, tol)?;
    let r0 = sets.iter().map(RadiusSet::max_radius).fold(0.0, f64::max);
    let max_slack = sets.iter().map(|s| s.tol).fold(0.0, f64::max);

    let (_, p) = phi
        .growth_exponents()
        .ok_or_else(|| Error::Precondition(format!("no growth exponent known for {}", phi.describe())))?;
    let constants = decay_constants(phi, p, &SampleSpec::on_grid_subsampled(grid, CONSTANT_SAMPLES))?;
    let f_norm = luxemburg_norm(phi, field, DEFAULT_NORM_TOL)?.norm;

    // Support nodes by distance from the origin; prefix sums give the mass of
    // B(0, R̂) in lattice units.
    let scanner = RingScanner::new(grid, r_max)?;
    let mut support: Vec<(f64, f64)> = (0..field.len())
        .filter(|&i| field.values()[i] != 0.0)
        .map(|i| (norm(&grid.point(i)), field.values()[i].abs()))
        .collect();
    support.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut lower = 0.0;
    let mut r_hat = f64::NAN;
    let mut mass = 0.0;
    let mut k = 0;
    let mut candidates: Vec<f64> = support.iter().map(|s| s.0.max(radius)).collect();
    candidates.dedup();
    for rh in candidates {
        while k < support.len() && support[k].0 <= rh {
            mass += support[k].1;
            k += 1;
        }
        let j = (4.0 * rh / grid.h() - 1e-9).ceil().max(1.0) as usize;
        if j > scanner.steps() {
            break;
        }
        let candidate = mass / scanner.lattice_count(j) as f64;
        if candidate > lower {
            lower = candidate;
            r_hat = rh;
        }
    }
    if !(lower > max_slack) {
        return Err(Error::Precondition(format!(
            "no ball B(x, 2R̂) with R̂ >= {radius} fits within r_max = {r_max}"
        )));
    }
    let ratio = constants.factor() * f_norm / (lower - max_slack);
    let measure = ratio.powf(p).max(1.0);
    Ok(RadiusBound {
        r0,
        a_priori: crate::grid::radius_of_measure(measure, grid.dim()),
        lower,
        r_hat,
        constants,
        norm: f_norm,
    })
}

/// Zeroes `field` outside `B(0, 𝔯)` and checks that `Mf` and the radius sets
/// are unchanged, bit for bit, on the nodes of `B(0, R)`. Requires
/// `𝔯 > R0 + R`.
pub fn localization_check(field: &GridField, radius: f64, frak_r: f64, tol: f64) -> Result<VerificationReport> {
    let r_max = default_r_max(field.grid());
    let r0 = max_optimal_radius(field, radius, r_max, tol)?;
    if !(frak_r > r0 + radius) {
        return Err(Error::Precondition(format!("need 𝔯 > R0 + R = {r0} + {radius}, got {frak_r}")));
    }
    let g = field.restricted(|x| norm(x) <= frak_r);
    let (mismatches, checked) = compare_on_ball(field, &g, radius, r_max, tol)?;
    Ok(VerificationReport::new(
        format!("localization[R={radius},frak_R={frak_r}]"),
        mismatches == 0,
        mismatches as f64,
        0.0,
    )
    .detail("r0", r0)
    .detail("nodes_checked", checked as f64)
    .detail("mismatches", mismatches as f64))
}

/// Number of nodes of `B(0, R)` where `Mf`, `Mg` or the radius sets differ,
/// and the number of nodes compared.
pub fn compare_on_ball(f: &GridField, g: &GridField, radius: f64, r_max: f64, rel_tol: f64) -> Result<(usize, usize)> {
    if f.grid() != g.grid() {
        return Err(Error::Argument("fields live on different grids".into()));
    }
    let nodes = nodes_in_ball(f.grid(), radius);
    let sf = radius_sets(f, &nodes, r_max, rel_tol)?;
    let sg = radius_sets(g, &nodes, r_max, rel_tol)?;
    let mismatches = sf
        .iter()
        .zip(&sg)
        .filter(|(a, b)| a.max_value.to_bits() != b.max_value.to_bits() || a.radii != b.radii)
        .count();
    Ok((mismatches, nodes.len()))
}
