//! Uniform grids over boxes in one or two dimensions, sampled fields with
//! zero extension outside the box, and discrete ball averages.

mod generator;
mod io;
mod scan;

pub use generator::{make_field, Generator};
pub use io::{read_field, read_field_str, write_field, write_field_string};
pub use scan::RingScanner;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack, in units of `h`, when testing lattice membership of
/// arbitrary (off-node) balls.
const MEMBERSHIP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    origin: Vec<f64>,
    h: f64,
    extents: Vec<usize>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, h: f64, extents: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Argument(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if extents.len() != dim {
            return Err(Error::Argument(format!(
                "grid has {dim} origin coordinates but {} extents",
                extents.len()
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        if extents.iter().any(|&n| n < 2) {
            return Err(Error::Argument(format!("every extent must be at least 2, got {extents:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Argument("grid origin must be finite".into()));
        }
        Ok(Self {
            dim,
            origin,
            h,
            extents,
        })
    }

    /// Grid covering `[lo, hi]` per axis with spacing `h`; the number of nodes
    /// per axis is `round((hi - lo) / h) + 1`.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Argument("box corners have different dimensions".into()));
        }
        let extents = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / h).round() as usize + 1)
            .collect();
        Self::new(lo.to_vec(), h, extents)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Discrete measure of the box: node count times cell volume.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.cell_volume()
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> Vec<f64> {
        self.origin
            .iter()
            .zip(&self.extents)
            .map(|(o, &n)| o + (n - 1) as f64 * self.h)
            .collect()
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        let len2: f64 = self
            .extents
            .iter()
            .map(|&n| ((n - 1) as f64 * self.h).powi(2))
            .sum();
        len2.sqrt()
    }

    /// Integer coordinates of a linear (row-major) node index.
    pub fn coords(&self, index: usize) -> [usize; 2] {
        if self.dim == 1 {
            [index, 0]
        } else {
            [index / self.extents[1], index % self.extents[1]]
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        if self.dim == 1 {
            coords[0]
        } else {
            coords[0] * self.extents[1] + coords[1]
        }
    }

    /// Linear index of the node at signed integer coordinates, if inside the box.
    pub fn checked_index(&self, c0: isize, c1: isize) -> Option<usize> {
        if c0 < 0 || c0 as usize >= self.extents[0] {
            return None;
        }
        if self.dim == 1 {
            return (c1 == 0).then_some(c0 as usize);
        }
        if c1 < 0 || c1 as usize >= self.extents[1] {
            return None;
        }
        Some(c0 as usize * self.extents[1] + c1 as usize)
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let c = self.coords(index);
        (0..self.dim).map(|k| self.origin[k] + c[k] as f64 * self.h).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Nearest node to `x`, or `None` when `x` is more than `h/2` outside the box.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let mut c = [0usize; 2];
        for k in 0..self.dim {
            let u = ((x[k] - self.origin[k]) / self.h).round();
            if u < 0.0 || u >= self.extents[k] as f64 {
                return None;
            }
            c[k] = u as usize;
        }
        Some(self.index(c))
    }

    /// Same lattice, halved spacing, covering the same box.
    pub fn refined(&self) -> Self {
        Self {
            dim: self.dim,
            origin: self.origin.clone(),
            h: self.h / 2.0,
            extents: self.extents.iter().map(|&n| 2 * n - 1).collect(),
        }
    }
}

/// A field sampled at the nodes of a grid and extended by zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn nearest_value(&self, x: &[f64]) -> Option<f64> {
        self.grid.nearest(x).map(|i| self.values[i])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Argument("fields live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Keeps values at nodes where `keep(point)` holds and zeroes the rest.
    pub fn restricted(&self, keep: impl Fn(&[f64]) -> bool) -> Self {
        let values = (0..self.len())
            .map(|i| if keep(&self.grid.point(i)) { self.values[i] } else { 0.0 })
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Riemann sum `h^dim * Σ |f_i|`.
    pub fn integral_abs(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        self.grid.cell_volume() * pairwise_sum(&abs)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// A closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Lebesgue measure of the ball in `dim` dimensions.
    pub fn measure(&self, dim: usize) -> f64 {
        continuum_ball_measure(self.radius, dim)
    }
}

pub fn continuum_ball_measure(radius: f64, dim: usize) -> f64 {
    match dim {
        1 => 2.0 * radius,
        2 => std::f64::consts::PI * radius * radius,
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}

/// Radius of the ball with the given measure.
pub fn radius_of_measure(measure: f64, dim: usize) -> f64 {
    match dim {
        1 => measure / 2.0,
        2 => (measure / std::f64::consts::PI).sqrt(),
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}

/// Average of `field` over the lattice points inside `ball`.
///
/// The lattice is the grid's node lattice extended over all of `R^dim`; the
/// sum runs over in-box nodes (the field is zero elsewhere) while the divisor
/// counts every lattice point in the ball, so constants average exactly.
///
/// Terms are added one at a time from the center outwards (by distance, then
/// by lattice offset), the order used by [`RingScanner`], so that node-centered
/// averages agree bit for bit with the scanner.
pub fn ball_average(field: &GridField, ball: &Ball) -> Result<f64> {
    let grid = field.grid();
    if !(ball.radius > 0.0) {
        return Err(Error::Argument(format!("ball radius must be positive, got {}", ball.radius)));
    }
    if ball.center.len() != grid.dim() {
        return Err(Error::Argument("ball and grid dimensions differ".into()));
    }
    let h = grid.h();
    let rho = ball.radius / h;
    let u: Vec<f64> = (0..grid.dim()).map(|k| (ball.center[k] - grid.origin()[k]) / h).collect();
    let on_node = u.iter().all(|v| (v - v.round()).abs() <= MEMBERSHIP_EPS);
    let span = |center: f64, half: f64| -> (i64, i64) {
        (
            (center - half - MEMBERSHIP_EPS).ceil() as i64,
            (center + half + MEMBERSHIP_EPS).floor() as i64,
        )
    };
    // Integer offsets from the center node give an exact ordering key.
    let base = if on_node {
        [u[0].round() as i64, u.get(1).map_or(0, |v| v.round() as i64)]
    } else {
        [0, 0]
    };
    let mut count: u64 = 0;
    // (exact squared offset, squared distance, relative lattice coords, value)
    let mut terms: Vec<(i64, f64, [i64; 2], f64)> = Vec::new();
    let mut visit = |k: [i64; 2]| {
        count += 1;
        if let Some(i) = grid.checked_index(k[0] as isize, k[1] as isize) {
            let rel = [k[0] - base[0], k[1] - base[1]];
            let d0 = k[0] as f64 - u[0];
            let d1 = u.get(1).map_or(0.0, |c| k[1] as f64 - c);
            terms.push((rel[0] * rel[0] + rel[1] * rel[1], d0 * d0 + d1 * d1, rel, field.values()[i]));
        }
    };
    let (a0, b0) = span(u[0], rho);
    for k0 in a0..=b0 {
        if grid.dim() == 1 {
            visit([k0, 0]);
            continue;
        }
        let dy = k0 as f64 - u[0];
        let w2 = rho * rho - dy * dy;
        if w2 < -2.0 * MEMBERSHIP_EPS * rho.max(1.0) {
            continue;
        }
        let (a1, b1) = span(u[1], w2.max(0.0).sqrt());
        for k1 in a1..=b1 {
            visit([k0, k1]);
        }
    }
    if count == 0 {
        return Err(Error::EmptyBall {
            center: ball.center.clone(),
            radius: ball.radius,
        });
    }
    if on_node {
        terms.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    } else {
        terms.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
    }
    let mut sum = 0.0;
    for t in &terms {
        sum += t.3;
    }
    Ok(sum / count as f64)
}

/// Candidate averaging radii `{k h / 2 : k = 1..ceil(2 r_max / h)}`, preceded
/// by `0.0`, which stands for the limit `r -> 0+` (the value `|f(x)|`).
pub fn candidate_radii(grid: &Grid, r_max: f64) -> Result<Vec<f64>> {
    let steps = radius_steps(grid, r_max)?;
    let half = grid.h() / 2.0;
    Ok(std::iter::once(0.0)
        .chain((1..=steps).map(|k| k as f64 * half))
        .collect())
}

/// Number of half-spacing radius steps needed to reach `r_max`.
pub(crate) fn radius_steps(grid: &Grid, r_max: f64) -> Result<usize> {
    if !(r_max >= grid.h() * (1.0 - 1e-12)) {
        return Err(Error::Argument(format!(
            "r_max = {r_max} must be at least the grid spacing {}",
            grid.h()
        )));
    }
    Ok((2.0 * r_max / grid.h() - 1e-9).ceil() as usize)
}

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, h: f64) -> Grid {
        Grid::covering(&[lo], &[hi], h).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0], 0.0, vec![4]).is_err());
        assert!(Grid::new(vec![0.0], 0.1, vec![1]).is_err());
        assert!(Grid::new(vec![0.0; 3], 0.1, vec![3; 3]).is_err());
        let g = line(-4.0, 4.0, 1.0 / 64.0);
        assert_eq!(g.len(), 513);
        assert_eq!(g.point(256), vec![0.0]);
        assert_eq!(g.cell_volume(), 1.0 / 64.0);
    }

    #[test]
    fn two_dimensional_indexing_is_row_major() {
        let g = Grid::new(vec![0.0, 10.0], 0.5, vec![3, 4]).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.coords(5), [1, 1]);
        assert_eq!(g.point(5), vec![0.5, 10.5]);
        assert_eq!(g.index([2, 3]), 11);
        assert_eq!(g.checked_index(2, 4), None);
        assert_eq!(g.nearest(&[0.9, 11.1]), Some(g.index([2, 2])));
    }

    #[test]
    fn constant_field_averages_exactly() {
        let g = line(0.0, 1.0, 0.125);
        let f = GridField::new(g.clone(), vec![3.0; g.len()]).unwrap();
        // Ball fully inside the box.
        let avg = ball_average(&f, &Ball::new(vec![0.5], 0.3).unwrap()).unwrap();
        assert_eq!(avg, 3.0);
    }

    #[test]
    fn constant_one_averages_to_one_everywhere_inside() {
        let g = Grid::new(vec![-1.0, -1.0], 0.25, vec![9, 9]).unwrap();
        let f = GridField::new(g.clone(), vec![1.0; g.len()]).unwrap();
        for r in [0.1, 0.25, 0.3, 0.5, 0.77] {
            let avg = ball_average(&f, &Ball::new(vec![0.0, 0.0], r).unwrap()).unwrap();
            assert_eq!(avg, 1.0, "radius {r}");
        }
    }

    #[test]
    fn zero_extension_counts_outside_nodes() {
        // Ball centered at the left corner: half its nodes fall outside.
        let g = line(0.0, 1.0, 0.25);
        let f = GridField::new(g.clone(), vec![1.0; g.len()]).unwrap();
        let avg = ball_average(&f, &Ball::new(vec![0.0], 0.5).unwrap()).unwrap();
        assert_eq!(avg, 3.0 / 5.0);
    }

    #[test]
    fn empty_ball_is_an_error() {
        let g = line(0.0, 1.0, 0.25);
        let f = GridField::zeros(g);
        let err = ball_average(&f, &Ball::new(vec![0.1], 0.05).unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptyBall { .. }));
    }

    #[test]
    fn candidate_radius_lists() {
        let g = line(0.0, 4.0, 0.25);
        let r = candidate_radii(&g, 1.0).unwrap();
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[1], 0.125);
        assert_eq!(*r.last().unwrap(), 1.0);
        assert_eq!(candidate_radii(&g, 0.25).unwrap(), vec![0.0, 0.125, 0.25]);
        let fine = line(-4.0, 4.0, 1.0 / 64.0);
        assert_eq!(candidate_radii(&fine, 8.0).unwrap().len(), 1025);
        assert!(candidate_radii(&g, 0.1).is_err());
    }

    #[test]
    fn refinement_keeps_the_box() {
        let g = line(-2.0, 2.0, 0.5);
        let r = g.refined();
        assert_eq!(r.h(), 0.25);
        assert_eq!(r.upper(), g.upper());
    }
}
