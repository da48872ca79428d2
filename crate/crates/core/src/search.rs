//! One-dimensional searches: golden-section extremum refinement and
//! bisection on monotone functions.

use std::cmp::Ordering;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximiser of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))` for the best point seen, endpoints included.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), a, b, tol);
    (x, -v)
}

/// Golden-section search for the minimiser of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))` for the best point seen, endpoints included.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let x = golden_compare(|x, y| f(x).total_cmp(&f(y)), a, b, tol);
    [a, b]
        .into_iter()
        .map(|e| (e, f(e)))
        .fold((x, f(x)), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Golden-section search driven only by a comparator: `cmp(x, y)` is
/// `Less` when `x` is the better point. Returns the centre of the final
/// bracket. Useful when the objective itself is infinite but differences
/// between two points are still meaningful.
pub fn golden_compare<C: Fn(f64, f64) -> Ordering>(cmp: C, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if cmp(c, d) != Ordering::Greater {
            b = d;
        } else {
            a = c;
        }
        c = b - INV_PHI * (b - a);
        d = a + INV_PHI * (b - a);
    }
    0.5 * (a + b)
}

/// Bisection for `g(θ) = target` with `g` nondecreasing on `[lo, hi]`,
/// assuming `g(lo) ≤ target ≤ g(hi)`. Stops when the bracket is narrower than
/// `tol·max(1, |θ|)` or after `max_iter` halvings.
pub fn bisect_increasing<G: FnMut(f64) -> f64>(
    mut g: G,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-11);
        let (x, _) = golden_min(|x| (x - 0.7) * (x - 0.7), 0.0, 1.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-6);
    }

    #[test]
    fn bisection_solves_monotone_equation() {
        let root = bisect_increasing(|t: f64| t.powi(3), 2.0, 0.0, 5.0, 1e-14, 200);
        assert!((root - 2f64.cbrt()).abs() < 1e-12);
    }
}
