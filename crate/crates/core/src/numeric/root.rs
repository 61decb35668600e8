//! Bracketing and bisection for nondecreasing functions.

use crate::error::{Error, Result};

/// Bisects `[lo, hi]` for the point where a nondecreasing `f` crosses `target`.
///
/// Requires `f(lo) <= target <= f(hi)`. Stops when the bracket width is below
/// `rel_tol * max(|hi|, tiny)`.
pub fn bisect_increasing<F>(mut f: F, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    for _ in 0..400 {
        let width = hi - lo;
        if width <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Expands `hi` geometrically from `start` until `f(hi) >= target`.
///
/// Returns `(lo, hi)` bracketing the crossing, or `None` if `limit` is reached
/// first.
pub fn bracket_upward<F>(mut f: F, target: f64, start: f64, factor: f64, limit: f64) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = start;
    let mut hi = if start > 0.0 { start * factor } else { 1.0 };
    loop {
        if hi >= limit {
            hi = limit;
            if f(hi)? >= target {
                return Ok(Some((lo, hi)));
            }
            return Ok(None);
        }
        if f(hi)? >= target {
            return Ok(Some((lo, hi)));
        }
        lo = hi;
        hi *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = bisect_increasing(|x| Ok(x * x), 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bracket_finds_crossing() {
        let (lo, hi) = bracket_upward(|x| Ok(x.ln()), 10.0, 1.0, 2.0, f64::INFINITY)
            .unwrap()
            .unwrap();
        assert!(lo.ln() < 10.0 && hi.ln() >= 10.0);
    }

    #[test]
    fn bracket_respects_limit() {
        let r = bracket_upward(|x| Ok(1.0 - 1.0 / x), 2.0, 1.0, 2.0, 1e6).unwrap();
        assert!(r.is_none());
    }
}
