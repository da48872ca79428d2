//! Adaptive Gauss–Kronrod quadrature with a geometric mode for integrands
//! that blow up at one point.
//!
//! [`integrate`] is a global-error adaptive G7/K15 scheme: the interval with
//! the largest error estimate is bisected until the total estimate drops
//! below tolerance or the subdivision cap is hit.
//!
//! [`integrate_toward`] and [`integrate_around`] handle an endpoint or
//! interior singularity by cutting the domain into dyadic pieces shrinking
//! toward the singular point. The sequence of piece contributions tells a
//! convergent singularity (contributions shrink geometrically, tail
//! extrapolated) from a divergent one (contributions stop shrinking, or the
//! partial sum passes [`DIVERGENCE_THRESHOLD`]).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// Partial sums beyond this magnitude are declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Contribution ratio at or above which dyadic pieces are considered to have
/// stopped shrinking.
const STALL_RATIO: f64 = 0.95;

/// Maximum number of dyadic pieces toward a singular point.
const MAX_PIECES: i32 = 50;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Integral estimate. Infinite or NaN when the integrand returned a
    /// non-finite value at a node.
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position so that the order of
        // work never depends on anything but the inputs.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let value = res_k * half;
    let error = rescale_error(err, res_abs * half.abs(), res_asc * half.abs());
    Segment { a, b, value, error }
}

/// Adaptive integral of `f` over `[a, b]`. Endpoints are never evaluated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            converged: true,
            evaluations: 0,
        };
    }
    let first = gk15(&f, a, b);
    let mut evaluations = 15;
    if !first.value.is_finite() {
        return QuadResult {
            value: first.value,
            error: f64::INFINITY,
            converged: false,
            evaluations,
        };
    }
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut converged = total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs());
    let mut splits = 0;
    while !converged && splits < cfg.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        if !left.value.is_finite() || !right.value.is_finite() {
            let bad = if left.value.is_finite() { right.value } else { left.value };
            return QuadResult {
                value: bad,
                error: f64::INFINITY,
                converged: false,
                evaluations,
            };
        }
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
        converged = total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs());
    }
    // Re-sum from the pieces, left to right, to drop the running-update drift.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().map(|s| s.value).sum();
    let error = pieces.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        error,
        converged,
        evaluations,
    }
}

/// Integral over `[points[0], points[last]]` split at every listed point
/// (discontinuities of the integrand, trimming bounds).
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadConfig) -> QuadResult {
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        converged: true,
        evaluations: 0,
    };
    for pair in points.windows(2) {
        let r = integrate(&f, pair[0], pair[1], cfg);
        out.value += r.value;
        out.error += r.error;
        out.converged &= r.converged;
        out.evaluations += r.evaluations;
    }
    out
}

/// Which end of the interval the integrand is singular at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Outcome of an integral that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integral {
    Finite { value: f64, error: f64 },
    Divergent { positive: bool },
}

impl Integral {
    pub fn to_ext(self) -> ExtReal {
        match self {
            Integral::Finite { value, .. } => ExtReal::Finite(value),
            Integral::Divergent { positive: true } => ExtReal::PosInf,
            Integral::Divergent { positive: false } => ExtReal::NegInf,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Integral::Finite { value, .. } => Some(value),
            Integral::Divergent { .. } => None,
        }
    }

    fn combine(self, other: Integral) -> Result<Integral> {
        use Integral::*;
        match (self, other) {
            (Finite { value: v1, error: e1 }, Finite { value: v2, error: e2 }) => Ok(Finite {
                value: v1 + v2,
                error: e1 + e2,
            }),
            (Divergent { positive: p }, Finite { .. }) | (Finite { .. }, Divergent { positive: p }) => {
                Ok(Divergent { positive: p })
            }
            (Divergent { positive: p }, Divergent { positive: q }) if p == q => Ok(Divergent { positive: p }),
            _ => Err(Error::Quadrature(
                "integral diverges to +inf on one side of the singular point and to -inf on the other".into(),
            )),
        }
    }
}

fn classify_nonfinite(v: f64) -> Result<Integral> {
    if v.is_nan() {
        Err(Error::Quadrature("integrand produced NaN".into()))
    } else {
        Ok(Integral::Divergent { positive: v > 0.0 })
    }
}

/// Integral over `[a, b]` of a function that may be singular at the given
/// end. The interval is cut into pieces of width `L·2^{-k-1}` converging on
/// the singular end; see the module docs for the divergence rule.
pub fn integrate_toward<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    side: Side,
    cfg: &QuadConfig,
) -> Result<Integral> {
    if !(a < b) {
        return if a == b {
            Ok(Integral::Finite { value: 0.0, error: 0.0 })
        } else {
            Err(Error::Quadrature(format!("empty interval [{a}, {b}]")))
        };
    }
    let len = b - a;
    let end = match side {
        Side::Lower => a,
        Side::Upper => b,
    };
    // Keep piece endpoints distinguishable from the singular end.
    let resolution = 8.0 * f64::EPSILON * end.abs().max(f64::MIN_POSITIVE);
    let mut pieces = 0;
    while pieces < MAX_PIECES && len * 0.5f64.powi(pieces + 1) > resolution {
        pieces += 1;
    }
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces.max(1) as f64,
        ..*cfg
    };

    let mut contributions = Vec::with_capacity(pieces as usize);
    let mut sum = 0.0;
    let mut error = 0.0;
    for k in 0..pieces {
        let far = len * 0.5f64.powi(k);
        let near = len * 0.5f64.powi(k + 1);
        let (lo, hi) = match side {
            Side::Lower => (a + near, a + far),
            Side::Upper => (b - far, b - near),
        };
        let r = integrate(&f, lo, hi, &piece_cfg);
        if !r.value.is_finite() {
            return classify_nonfinite(r.value);
        }
        sum += r.value;
        error += r.error;
        contributions.push(r.value);
        if sum.abs() > DIVERGENCE_THRESHOLD {
            return Ok(Integral::Divergent { positive: sum > 0.0 });
        }
    }

    let n = contributions.len();
    if n < 3 {
        return Ok(Integral::Finite { value: sum, error });
    }
    let last = contributions[n - 1];
    // Geometric mean of the last few contribution ratios.
    let window = 5.min(n - 1);
    let mut log_ratio = 0.0;
    let mut usable = true;
    for i in (n - window)..n {
        let (prev, cur) = (contributions[i - 1], contributions[i]);
        if prev == 0.0 || cur == 0.0 || prev.signum() != cur.signum() {
            usable = false;
            break;
        }
        log_ratio += (cur / prev).abs().ln();
    }
    let ratio = if usable { (log_ratio / window as f64).exp() } else { 0.0 };

    if last.abs() <= cfg.abs_tol {
        let tail = if usable && ratio < 1.0 { last * ratio / (1.0 - ratio) } else { 0.0 };
        return Ok(Integral::Finite {
            value: sum + tail,
            error: error + tail.abs(),
        });
    }
    if usable && ratio < STALL_RATIO {
        let tail = last * ratio / (1.0 - ratio);
        return Ok(Integral::Finite {
            value: sum + tail,
            error: error + tail.abs() * (1.0 - ratio),
        });
    }
    Ok(Integral::Divergent { positive: last > 0.0 })
}

/// Integral over `[a, b]` of a function that may be singular at `point`
/// (which may coincide with either end).
pub fn integrate_around<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    point: f64,
    cfg: &QuadConfig,
) -> Result<Integral> {
    if point <= a {
        integrate_toward(f, a, b, Side::Lower, cfg)
    } else if point >= b {
        integrate_toward(f, a, b, Side::Upper, cfg)
    } else {
        let left = integrate_toward(&f, a, point, Side::Upper, cfg)?;
        let right = integrate_toward(&f, point, b, Side::Lower, cfg)?;
        left.combine(right)
    }
}

/// Integral over `[a, b]` of a function that may be singular at either end:
/// the halves are refined geometrically toward their outer ends.
pub fn integrate_open<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Integral> {
    let mid = 0.5 * (a + b);
    let left = integrate_toward(&f, a, mid, Side::Lower, cfg)?;
    let right = integrate_toward(&f, mid, b, Side::Upper, cfg)?;
    left.combine(right)
}
