//! Incremental node-centered ball sums for the radii `j h / 2`.

use super::{radius_steps, Grid};
use crate::error::Result;

/// Precomputed lattice offsets for scanning all balls of radius `j h / 2`,
/// `j = 1..=steps`, around grid nodes.
///
/// Offsets are visited from the center outwards, so the ball of radius
/// `j h / 2` is a prefix of the visit order and its sum is built by adding one
/// term at a time. [`super::ball_average`] uses the same order, which makes the
/// two paths agree exactly.
#[derive(Debug, Clone)]
pub struct RingScanner {
    grid: Grid,
    steps: usize,
    /// Sorted by squared length, then lexicographically.
    offsets: Vec<[i64; 2]>,
    /// `ends[j]` = number of lattice points within radius `j h / 2`.
    ends: Vec<usize>,
}

impl RingScanner {
    pub fn new(grid: &Grid, r_max: f64) -> Result<Self> {
        let steps = radius_steps(grid, r_max)?;
        let reach = (steps / 2) as i64;
        let limit = (steps * steps) as i64;
        let mut offsets = Vec::new();
        let (lo1, hi1) = if grid.dim() == 2 { (-reach, reach) } else { (0, 0) };
        for d0 in -reach..=reach {
            for d1 in lo1..=hi1 {
                if 4 * (d0 * d0 + d1 * d1) <= limit {
                    offsets.push([d0, d1]);
                }
            }
        }
        let sq = |d: &[i64; 2]| d[0] * d[0] + d[1] * d[1];
        offsets.sort_by(|a, b| sq(a).cmp(&sq(b)).then(a.cmp(b)));
        let ends = (0..=steps)
            .map(|j| {
                let j2 = (j * j) as i64;
                offsets.partition_point(|d| 4 * sq(d) <= j2)
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            steps,
            offsets,
            ends,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest radius index; radii are `j h / 2` for `j = 1..=steps`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn radius(&self, j: usize) -> f64 {
        j as f64 * self.grid.h() / 2.0
    }

    /// Lattice points (in or out of the box) within radius `j h / 2`.
    pub fn lattice_count(&self, j: usize) -> usize {
        self.ends[j]
    }

    /// Fills `out` with `steps + 1` entries: `out[0] = values[node]` (the
    /// `r -> 0` limit) and `out[j]` the ball average of radius `j h / 2`.
    /// `values` must be nonnegative for the result to be a maximal-operator
    /// input, but any finite values are summed as given.
    pub fn averages_into(&self, values: &[f64], node: usize, out: &mut Vec<f64>) {
        out.clear();
        out.push(values[node]);
        let [c0, c1] = self.grid.coords(node);
        let (c0, c1) = (c0 as i64, c1 as i64);
        let total = self.grid.len();
        let mut sum = 0.0;
        let mut seen = 0;
        let mut next = 0;
        for j in 1..=self.steps {
            let end = self.ends[j];
            // Once every box node is in, larger balls only add zeros.
            while seen < total && next < end {
                let d = self.offsets[next];
                next += 1;
                if let Some(i) = self.grid.checked_index((c0 + d[0]) as isize, (c1 + d[1]) as isize) {
                    sum += values[i];
                    seen += 1;
                }
            }
            out.push(sum / end as f64);
        }
    }

    pub fn averages(&self, values: &[f64], node: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps + 1);
        self.averages_into(values, node, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_average, Ball, GridField};

    #[test]
    fn lattice_counts() {
        let g = Grid::covering(&[0.0], &[1.0], 0.25).unwrap();
        let s = RingScanner::new(&g, 1.0).unwrap();
        assert_eq!(s.steps(), 8);
        let counts: Vec<usize> = (1..=8).map(|j| s.lattice_count(j)).collect();
        assert_eq!(counts, vec![1, 3, 3, 5, 5, 7, 7, 9]);
        let g2 = Grid::new(vec![0.0, 0.0], 1.0, vec![3, 3]).unwrap();
        let s2 = RingScanner::new(&g2, 2.0).unwrap();
        // radius 1/2: center; 1: plus 4 neighbours; 3/2: plus 4 diagonals; 2: plus 4 at distance 2.
        let counts: Vec<usize> = (1..=4).map(|j| s2.lattice_count(j)).collect();
        assert_eq!(counts, vec![1, 5, 9, 13]);
    }

    #[test]
    fn matches_ball_average_bit_for_bit() {
        let g = Grid::new(vec![-1.0, -1.0], 0.125, vec![17, 17]).unwrap();
        let f = GridField::from_fn(g.clone(), |x| (3.0 * x[0]).sin().abs() + x[1] * x[1] / 7.0).unwrap();
        let s = RingScanner::new(&g, 2.9).unwrap();
        for node in [0, 40, 144, 288] {
            let avgs = s.averages(f.values(), node);
            for j in 1..=s.steps() {
                let b = Ball::new(g.point(node), s.radius(j)).unwrap();
                assert_eq!(avgs[j].to_bits(), ball_average(&f, &b).unwrap().to_bits(), "node {node}, j {j}");
            }
        }
    }
}
