//! Special functions and closed-form reference values.

use statrs::function::{erf, gamma};

/// `Γ(x)` for `x > 0`. Integer arguments up to 171 use the exact factorial
/// product; everything else goes through the Lanczos approximation.
pub fn gamma_fn(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=171.0).contains(&x) {
        return factorial(x as u32 - 1);
    }
    gamma::gamma(x)
}

/// `k!` as a float; exact for `k ≤ 22`, correctly rounded products above.
pub fn factorial(k: u32) -> f64 {
    (2..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `log Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

/// `log(Σ exp(v))` without overflow. Returns `-inf` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Natural log of the Erlang survival function
/// `P(G ≥ x) = e^{−x} Σ_{k=0}^{n−1} x^k / k!` for `G ~ Gamma(n, 1)`.
///
/// Terms are accumulated in log space, so the value is accurate far into
/// the tail (e.g. `n = 100, x = 200`).
pub fn ln_erlang_survival(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "shape must be at least 1");
    if x <= 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut ln_fact = 0.0;
    let mut terms = Vec::with_capacity(n as usize);
    for k in 0..n {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        terms.push(k as f64 * lx - ln_fact);
    }
    -x + log_sum_exp(&terms)
}

/// `Σ_{k≥2} 1/k² = π²/6 − 1`, evaluated as a partial sum plus an
/// Euler–Maclaurin tail so that it does not rely on a stored constant.
pub fn basel_minus_one() -> f64 {
    const K: u32 = 2000;
    // Summed from the small end of the magnitudes upwards.
    let partial: f64 = (2..=K).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
    let kf = K as f64;
    // Σ_{k>K} k^{-2} = 1/K − 1/(2K²) + 1/(6K³) − 1/(30K⁵) + …
    let tail = 1.0 / kf - 1.0 / (2.0 * kf * kf) + 1.0 / (6.0 * kf.powi(3)) - 1.0 / (30.0 * kf.powi(5));
    partial + tail
}

/// Standard normal distribution function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}
