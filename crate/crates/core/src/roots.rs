//! Bracketing, bisection and golden-section search on scalar monotone or
//! unimodal maps.

use crate::error::{Error, Result};

/// Outcome of a bisection on a monotone predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    /// Largest point known to fail the predicate.
    pub lo: f64,
    /// Smallest point known to satisfy the predicate.
    pub hi: f64,
    pub iters: usize,
}

/// Bisects on a predicate that is false on `[lo, x*)` and true on `[x*, ∞)`.
///
/// Requires `!pred(lo)` and `pred(hi)`; stops once `hi - lo <= rel_tol * hi`
/// (or `hi - lo <= abs_floor`).
pub fn bisect_threshold<F>(
    mut pred: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_iters: usize,
) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut iters = 0;
    while hi - lo > (rel_tol * hi).max(abs_floor) {
        if iters >= max_iters {
            return Err(Error::numerical(
                "bisect_threshold",
                format!("no convergence after {max_iters} iterations, bracket [{lo}, {hi}]"),
            ));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    Ok(Bracket { lo, hi, iters })
}

/// Doubles `start` until `pred` holds, at most `max_doublings` times.
pub fn expand_upper<F>(mut pred: F, start: f64, max_doublings: usize) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut x = start;
    for k in 0..=max_doublings {
        if pred(x)? {
            return Ok((x, k));
        }
        x *= 2.0;
    }
    Err(Error::numerical(
        "expand_upper",
        format!("predicate still false after {max_doublings} doublings from {start} (reached {x})"),
    ))
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
///
/// Returns `(argmax, max)`; the best evaluated point is returned, so the value
/// is a lower bound of the true maximum.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64, max_iters: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iters {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two_threshold() {
        let b = bisect_threshold(|x| Ok(x * x >= 2.0), 1.0, 2.0, 1e-14, 0.0, 200).unwrap();
        assert!(b.lo * b.lo < 2.0 && b.hi * b.hi >= 2.0);
        assert!((b.hi - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn expand_reports_budget_exhaustion() {
        let err = expand_upper(|_| Ok(false), 1.0, 8).unwrap_err();
        assert!(err.is_numerical());
        let (x, k) = expand_upper(|x| Ok(x >= 10.0), 1.0, 8).unwrap();
        assert_eq!((x, k), (16.0, 4));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (s, v) = golden_max(|s| 2.0 * s - s * s, 0.0, 4.0, 1e-12, 200);
        assert!((s - 1.0).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
