//! Discrete `W^{1,φ}`: central-difference gradients, Sobolev norms, and the
//! checks on derivatives of `Mf`, radius-set stability and continuity of `M`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{make_field, ball_average, Ball, Generator, Grid, GridField, RingScanner};
use crate::maximal::{maximal_function, maximal_scan, max_optimal_radius, radius_sets, RadiusSet};
use crate::modular::{luxemburg_norm, DEFAULT_NORM_TOL};
use crate::phi::{check_a0, check_adec, check_ainc, Integrand, PhiFunction, SampleSpec};
use crate::report::VerificationReport;
use crate::spatial::norm;

/// Jump detection threshold relative to `max |f|`.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.2;

/// A field and its discrete gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevField {
    pub u: GridField,
    /// One component per axis, on `u`'s grid.
    pub grad: Vec<GridField>,
}

/// Central differences `(u_{i+1} - u_{i-1}) / 2h` inside the box, one-sided
/// differences on its faces.
pub fn weak_gradient(u: &GridField) -> Result<SobolevField> {
    let grid = u.grid();
    let h = grid.h();
    let ext = grid.extents();
    let mut grad = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let n = ext[axis];
        let mut d = vec![0.0; u.len()];
        for (i, slot) in d.iter_mut().enumerate() {
            let c = grid.coords(i);
            let k = c[axis];
            let at = |kk: usize| {
                let mut cc = c;
                cc[axis] = kk;
                u.values()[grid.index(cc)]
            };
            *slot = if k == 0 {
                (at(1) - at(0)) / h
            } else if k + 1 == n {
                (at(k) - at(k - 1)) / h
            } else {
                (at(k + 1) - at(k - 1)) / (2.0 * h)
            };
        }
        grad.push(GridField::new(grid.clone(), d)?);
    }
    Ok(SobolevField { u: u.clone(), grad })
}

/// `[‖u‖_φ, ‖D_1 u‖_φ, ...]`
pub fn sobolev_components(phi: &dyn Integrand, sf: &SobolevField) -> Result<Vec<f64>> {
    std::iter::once(&sf.u)
        .chain(&sf.grad)
        .map(|f| luxemburg_norm(phi, f, DEFAULT_NORM_TOL).map(|r| r.norm))
        .collect()
}

/// `‖u‖_{1,φ} = ‖u‖_φ + Σ_i ‖D_i u‖_φ`
pub fn sobolev_norm(phi: &dyn Integrand, sf: &SobolevField) -> Result<f64> {
    Ok(sobolev_components(phi, sf)?.iter().sum())
}

/// Nodes within `2h` of a jump, where a jump is a neighbour difference
/// larger than `threshold * max |f|`.
pub fn jump_mask(f: &GridField, threshold: f64) -> Vec<bool> {
    let grid = f.grid();
    let limit = threshold * f.max_abs();
    let mut mask = vec![false; f.len()];
    if limit == 0.0 {
        return mask;
    }
    let mark = |mask: &mut Vec<bool>, c: [usize; 2]| {
        for d0 in -2isize..=2 {
            for d1 in -2isize..=2 {
                if d0 * d0 + d1 * d1 > 4 || (grid.dim() == 1 && d1 != 0) {
                    continue;
                }
                if let Some(j) = grid.checked_index(c[0] as isize + d0, c[1] as isize + d1) {
                    mask[j] = true;
                }
            }
        }
    };
    for i in 0..f.len() {
        let c = grid.coords(i);
        for axis in 0..grid.dim() {
            let mut n = c;
            n[axis] += 1;
            if n[axis] >= grid.extents()[axis] {
                continue;
            }
            if (f.values()[grid.index(n)] - f.values()[i]).abs() > limit {
                mark(&mut mask, c);
                mark(&mut mask, n);
            }
        }
    }
    mask
}

/// Nodes excluded from pointwise derivative checks: the jump mask plus the
/// faces of the box, where differences are one-sided.
pub fn pointwise_mask(f: &GridField, threshold: f64) -> Vec<bool> {
    let grid = f.grid();
    let mut mask = jump_mask(f, threshold);
    for (i, m) in mask.iter_mut().enumerate() {
        let c = grid.coords(i);
        if (0..grid.dim()).any(|k| c[k] == 0 || c[k] + 1 == grid.extents()[k]) {
            *m = true;
        }
    }
    mask
}

/// `C_h = 4h (max |D f| + max |f| / s)` with `s` the half-width of the
/// support's bounding box (at least `h`).
pub fn discretization_allowance(sf: &SobolevField) -> f64 {
    let grid = sf.u.grid();
    let h = grid.h();
    let max_f = sf.u.max_abs();
    if max_f == 0.0 {
        return 0.0;
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for i in (0..sf.u.len()).filter(|&i| sf.u.values()[i] != 0.0) {
        for (k, x) in grid.point(i).into_iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let scale = (0..grid.dim()).map(|k| (hi[k] - lo[k]) / 2.0).fold(h, f64::max);
    let max_grad = sf.grad.iter().map(GridField::max_abs).fold(0.0, f64::max);
    4.0 * h * (max_grad + max_f / scale)
}

/// `(A0)`, `(aInc)_p`, `(aDec)_q` on sampled points; `None` when all hold.
fn structural_precondition(phi: &PhiFunction, grid: &Grid) -> Result<Option<String>> {
    let Some((p, q)) = phi.growth_exponents() else {
        return Ok(Some(format!("no growth exponents known for {}", phi.describe())));
    };
    let samples = SampleSpec::on_grid_subsampled(grid, 65);
    if !check_a0(phi, &samples)?.passed {
        return Ok(Some("(A0) fails on samples".into()));
    }
    if !check_ainc(phi, p, 1.0, &samples)?.passed {
        return Ok(Some(format!("(aInc)_{p} fails on samples")));
    }
    if !check_adec(phi, q, 1.0, &samples)?.passed {
        return Ok(Some(format!("(aDec)_{q} fails on samples")));
    }
    Ok(None)
}

/// Nodewise `|D_i Mf| <= M(D_i f) + C_h` outside [`pointwise_mask`]; also
/// reports `‖Mf‖_{1,φ} / ‖f‖_{1,φ}`.
pub fn check_gradient_bound(phi: &PhiFunction, f: &SobolevField, r_max: f64) -> Result<VerificationReport> {
    let name = format!("gradient_bound[{}]", phi.describe());
    if let Some(reason) = structural_precondition(phi, f.u.grid())? {
        return Ok(VerificationReport::skipped(name, reason));
    }
    let mf = weak_gradient(&maximal_function(&f.u, r_max)?)?;
    let c_h = discretization_allowance(f);
    let mask = pointwise_mask(&f.u, DEFAULT_JUMP_THRESHOLD);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (axis, d) in f.grad.iter().enumerate() {
        let m_d = maximal_function(d, r_max)?;
        for i in (0..f.u.len()).filter(|&i| !mask[i]) {
            let slack = mf.grad[axis].values()[i].abs() - m_d.values()[i];
            worst = worst.max(slack);
            if slack > c_h {
                failures += 1;
            }
        }
    }
    let unmasked = mask.iter().filter(|m| !**m).count();
    let f_norm = sobolev_norm(phi, f)?;
    let ratio = if f_norm > 0.0 {
        sobolev_norm(phi, &mf)? / f_norm
    } else {
        0.0
    };
    Ok(VerificationReport::new(name, failures == 0, worst.max(0.0), c_h)
        .detail("max_violation", worst.max(0.0))
        .detail("c_h", c_h)
        .detail("failures", failures as f64)
        .detail("unmasked_nodes", unmasked as f64)
        .detail("operator_ratio", ratio))
}

/// At unmasked nodes whose radius set is a single lattice ball:
/// `|D_i Mf(x) - ⨍_{B(x,r*)} D_i|f||` (or `|D_i Mf(x) - D_i|f|(x)|` when the
/// `r -> 0` marker is optimal) must stay below `C_h`. `tol` is the radius-set
/// slack relative to `Mf(x)`.
///
/// The argmax counts as strict along axis `i` only if both stencil neighbours
/// `x ± h e_i` also have a single optimal ball with radius within `2h` of `r*`;
/// otherwise the difference straddles a switch of the optimal radius, where
/// `Mf` has a kink.
pub fn check_derivative_formula(phi: &PhiFunction, f: &SobolevField, r_max: f64, tol: f64) -> Result<VerificationReport> {
    let name = format!("derivative_formula[{}]", phi.describe());
    if let Some(reason) = structural_precondition(phi, f.u.grid())? {
        return Ok(VerificationReport::skipped(name, reason));
    }
    let scan = maximal_scan(&f.u, r_max, tol)?;
    let dm = weak_gradient(&scan.maximal)?;
    let dabs = weak_gradient(&f.u.abs())?;
    let c_h = discretization_allowance(f);
    let mask = pointwise_mask(&f.u, DEFAULT_JUMP_THRESHOLD);
    let grid = f.u.grid();
    let h = grid.h();
    let optimal = |i: usize| {
        let set = &scan.sets[i];
        (set.distinct_balls == 1).then(|| set.smallest_ball()).flatten()
    };
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut switches = 0;
    let mut marker_nodes = 0;
    let mut failures = 0;
    if !f.u.is_zero() {
        for i in (0..f.u.len()).filter(|&i| !mask[i]) {
            let Some(r) = optimal(i) else { continue };
            let c = grid.coords(i);
            for axis in 0..grid.dim() {
                let mut lo = c;
                let mut hi = c;
                lo[axis] -= 1;
                hi[axis] += 1;
                let stable = [lo, hi]
                    .iter()
                    .all(|&n| optimal(grid.index(n)).is_some_and(|rn| (rn - r).abs() <= 2.0 * h * (1.0 + 1e-9)));
                if !stable {
                    switches += 1;
                    continue;
                }
                checked += 1;
                let expected = if scan.sets[i].contains_marker() {
                    marker_nodes += 1;
                    dabs.grad[axis].values()[i]
                } else {
                    ball_average(&dabs.grad[axis], &Ball::new(grid.point(i), r)?)?
                };
                let err = (dm.grad[axis].values()[i] - expected).abs();
                worst = worst.max(err);
                if err > c_h {
                    failures += 1;
                }
            }
        }
    }
    Ok(VerificationReport::new(name, failures == 0, worst, c_h)
        .detail("max_error", worst)
        .detail("c_h", c_h)
        .detail("checks", checked as f64)
        .detail("marker_checks", marker_nodes as f64)
        .detail("radius_switches", switches as f64)
        .detail("failures", failures as f64))
}

fn nodes_in_ball(grid: &Grid, radius: f64) -> Vec<usize> {
    (0..grid.len()).filter(|&i| norm(&grid.point(i)) <= radius).collect()
}

fn unstable_measure(base: &[RadiusSet], other: &[RadiusSet], lambda: f64, cell: f64) -> f64 {
    base.iter().zip(other).filter(|(b, o)| !o.within(b, lambda)).count() as f64 * cell
}

/// Measure of `{x ∈ B(0,R) : R f_m(x) ⊄ R f(x)_(λ)}` on the grid. `tol` is
/// the radius-set slack relative to the maximal value.
pub fn radius_stability(f: &GridField, f_m: &GridField, radius: f64, lambda: f64, r_max: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("λ must be positive, got {lambda}")));
    }
    if f.grid() != f_m.grid() {
        return Err(Error::Argument("fields live on different grids".into()));
    }
    let nodes = nodes_in_ball(f.grid(), radius);
    let base = radius_sets(f, &nodes, r_max, tol)?;
    let other = radius_sets(f_m, &nodes, r_max, tol)?;
    Ok(unstable_measure(&base, &other, lambda, f.grid().cell_volume()))
}

/// One bound `𝔎` for the radius sets of all `f_m` on `B(0, R)`: every
/// `R0(f_m)` is finite and the second half of the sequence stays within a
/// window of width `max(R0(f) / 4, 2h)`.
pub fn uniform_radius_bound_check(
    f: &GridField,
    sequence: &[GridField],
    radius: f64,
    r_max: f64,
    tol: f64,
) -> Result<VerificationReport> {
    if sequence.is_empty() {
        return Err(Error::Argument("empty sequence".into()));
    }
    let base = max_optimal_radius(f, radius, r_max, tol)?;
    let bounds = sequence
        .iter()
        .map(|g| max_optimal_radius(g, radius, r_max, tol))
        .collect::<Result<Vec<f64>>>()?;
    let tail = &bounds[bounds.len() / 2..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(0.0, f64::max);
    let window = (base / 4.0).max(2.0 * f.grid().h());
    let sup = bounds.iter().copied().fold(0.0, f64::max);
    let passed = sup.is_finite() && hi - lo <= window;
    Ok(VerificationReport::new(format!("uniform_radius_bound[R={radius}]"), passed, sup, window)
        .detail("r0_limit", base)
        .detail("sup_r0", sup)
        .detail("tail_spread", hi - lo)
        .detail("window", window))
}

/// `ε_m` for `m = 1, 2, ...`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Schedule {
    /// `start * ratio^(m - 1)`
    Geometric { start: f64, ratio: f64 },
    /// `start / m`
    Harmonic { start: f64 },
}

impl Schedule {
    pub fn eps(&self, m: usize) -> f64 {
        match *self {
            Schedule::Geometric { start, ratio } => start * ratio.powi(m as i32 - 1),
            Schedule::Harmonic { start } => start / m as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Perturbation {
    /// `f_m = (1 + ε_m) f`
    Scale,
    /// `f_m = f + ε_m g` for a fixed profile `g`.
    Add { label: String, profile: GridField },
}

/// A grid-representable sequence `f_m -> f`.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    pub perturbation: Perturbation,
    pub schedule: Schedule,
}

impl PerturbationFamily {
    pub fn scale(schedule: Schedule) -> Self {
        Self {
            perturbation: Perturbation::Scale,
            schedule,
        }
    }

    /// Adds a smooth bump of unit height.
    pub fn bump(grid: &Grid, center: Vec<f64>, radius: f64, schedule: Schedule) -> Result<Self> {
        let profile = make_field(
            grid,
            &Generator::SmoothBump {
                center,
                radius,
                height: 1.0,
            },
        )?;
        Ok(Self {
            perturbation: Perturbation::Add {
                label: "bump".into(),
                profile,
            },
            schedule,
        })
    }

    /// Adds mollified noise of unit amplitude supported in `B(center, radius)`.
    pub fn noise(grid: &Grid, seed: u64, center: Vec<f64>, radius: f64, schedule: Schedule) -> Result<Self> {
        let profile = make_field(
            grid,
            &Generator::Noise {
                seed,
                amplitude: 1.0,
                passes: 4,
                center,
                radius,
            },
        )?;
        Ok(Self {
            perturbation: Perturbation::Add {
                label: format!("noise(seed={seed})"),
                profile,
            },
            schedule,
        })
    }

    pub fn label(&self) -> String {
        match &self.perturbation {
            Perturbation::Scale => "scale".into(),
            Perturbation::Add { label, .. } => label.clone(),
        }
    }

    pub fn member(&self, f: &GridField, m: usize) -> Result<GridField> {
        let eps = self.schedule.eps(m);
        match &self.perturbation {
            Perturbation::Scale => Ok(f.scaled(1.0 + eps)),
            Perturbation::Add { profile, .. } => f.add(&profile.scaled(eps)),
        }
    }
}

/// Parameters shared by every step of a continuity run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityOptions {
    pub r_max: f64,
    /// `R` of the observation ball `B(0, R)`.
    pub radius: f64,
    /// `λ` of the radius-set neighbourhood.
    pub lambda: f64,
    /// `δ₀` of the oscillation diagnostic.
    pub delta0: f64,
    /// `ε` of the oscillation threshold `ε / ‖χ_{B(0,R)}‖_φ`.
    pub eps: f64,
    /// Radius-set slack relative to the maximal value.
    pub rel_tol: f64,
}

/// One step `m` of a continuity run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityTrace {
    pub m: usize,
    /// `‖f_m - f‖_{1,φ}`
    pub input_gap: f64,
    /// `‖Mf_m - Mf‖_{1,φ}`
    pub output_gap: f64,
    /// `[‖·‖_φ, ‖D_1 ·‖_φ, ...]` of `Mf_m - Mf`.
    pub output_components: Vec<f64>,
    pub stability_measure: f64,
    /// `max |u_x(r_1) - u_x(r_2)|` over nodes of `B(0,R)`, axes and
    /// `|r_1 - r_2| <= δ₀`, with `u_x(r) = ⨍_{B(x,r)} D_i|f|`.
    pub oscillation_diag: f64,
    /// Measure of the nodes where that oscillation exceeds `ε / ‖χ_{B(0,R)}‖_φ`.
    pub oscillation_set_measure: f64,
}

pub const TRACE_CSV_HEADER: &str = "m,input_gap,output_gap,stability_measure,oscillation_diag";

impl ContinuityTrace {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e}",
            self.m, self.input_gap, self.output_gap, self.stability_measure, self.oscillation_diag
        )
    }
}

pub fn traces_csv(traces: &[ContinuityTrace]) -> String {
    let mut out = format!("{TRACE_CSV_HEADER}\n");
    for t in traces {
        out.push_str(&t.csv_row());
        out.push('\n');
    }
    out
}

/// Largest `u_x` oscillation over windows of `δ₀` and the measure of nodes
/// above `threshold`.
fn oscillation(f: &GridField, nodes: &[usize], r_max: f64, delta0: f64, threshold: f64) -> Result<(f64, f64)> {
    let dabs = weak_gradient(&f.abs())?;
    let scanner = RingScanner::new(f.grid(), r_max)?;
    let width = (2.0 * delta0 / f.grid().h() + 1e-9).floor() as usize;
    let mut worst = 0.0f64;
    let mut above = 0;
    let mut buf = Vec::new();
    for &node in nodes {
        let mut node_worst = 0.0f64;
        for g in &dabs.grad {
            scanner.averages_into(g.values(), node, &mut buf);
            for start in 0..buf.len() {
                let window = &buf[start..(start + width + 1).min(buf.len())];
                let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
                node_worst = node_worst.max(hi - lo);
            }
        }
        worst = worst.max(node_worst);
        above += usize::from(node_worst > threshold);
    }
    Ok((worst, above as f64 * f.grid().cell_volume()))
}

/// Runs `m = 1..=m_steps` of a perturbation family and records input and
/// output gaps in `‖·‖_{1,φ}`, radius-set stability, and the oscillation
/// diagnostic. Rejects families whose input gaps do not decrease.
pub fn continuity_experiment(
    phi: &dyn Integrand,
    f: &SobolevField,
    family: &PerturbationFamily,
    m_steps: usize,
    opts: &ContinuityOptions,
) -> Result<Vec<ContinuityTrace>> {
    if m_steps == 0 {
        return Err(Error::Argument("m_steps must be positive".into()));
    }
    let base = &f.u;
    let members = (1..=m_steps).map(|m| family.member(base, m)).collect::<Result<Vec<_>>>()?;
    let input_gaps = members
        .iter()
        .map(|fm| sobolev_norm(phi, &weak_gradient(&fm.sub(base)?)?))
        .collect::<Result<Vec<f64>>>()?;
    let rises = input_gaps.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-9));
    if let Some(k) = rises {
        return Err(Error::Precondition(format!(
            "family {} does not converge: ‖f_m - f‖ rises from {} at m = {} to {} at m = {}",
            family.label(),
            input_gaps[k],
            k + 1,
            input_gaps[k + 1],
            k + 2
        )));
    }
    if m_steps > 1 && !(input_gaps[m_steps - 1] < input_gaps[0]) {
        return Err(Error::Precondition(format!("family {} has constant input gaps", family.label())));
    }

    let grid = base.grid();
    let nodes = nodes_in_ball(grid, opts.radius);
    let base_scan = maximal_scan(base, opts.r_max, opts.rel_tol)?;
    let base_sets: Vec<RadiusSet> = nodes.iter().map(|&i| base_scan.sets[i].clone()).collect();
    let ball_chi = GridField::from_fn(grid.clone(), |x| if norm(x) <= opts.radius { 1.0 } else { 0.0 })?;
    let chi_norm = luxemburg_norm(phi, &ball_chi, DEFAULT_NORM_TOL)?.norm;
    let threshold = if chi_norm > 0.0 { opts.eps / chi_norm } else { f64::INFINITY };
    let (osc, osc_measure) = oscillation(base, &nodes, opts.r_max, opts.delta0, threshold)?;

    members
        .iter()
        .zip(input_gaps)
        .enumerate()
        .map(|(k, (fm, input_gap))| {
            let scan = maximal_scan(fm, opts.r_max, opts.rel_tol)?;
            let diff = weak_gradient(&scan.maximal.sub(&base_scan.maximal)?)?;
            let output_components = sobolev_components(phi, &diff)?;
            let sets: Vec<RadiusSet> = nodes.iter().map(|&i| scan.sets[i].clone()).collect();
            Ok(ContinuityTrace {
                m: k + 1,
                input_gap,
                output_gap: output_components.iter().sum(),
                output_components,
                stability_measure: unstable_measure(&base_sets, &sets, opts.lambda, grid.cell_volume()),
                oscillation_diag: osc,
                oscillation_set_measure: osc_measure,
            })
        })
        .collect()
}
