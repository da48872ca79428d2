//! Exact simulation of `C_n(w)` from independent exponential spacings.
//!
//! Spacing `k` of an `Exp(λ)` sample of size `n` is `Exp(λ(n−k))`, so a draw
//! is `Σ_k w(k/n) E_k / (λ(n−k))` with `E_k` standard exponential. Under the
//! exponential tilt `dQ/dP ∝ e^{nθ C_n}` the spacings stay independent with
//! rates `λ(n−k) − nθ w(k/n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::parallel;
use crate::rng::ReplicateStream;
use crate::weights::WeightFunction;

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
    pub replicates: usize,
    pub tilt_theta: Option<f64>,
}

impl SimConfig {
    pub fn new(n: usize, lambda: f64, seed: u64, replicates: usize) -> Result<Self> {
        let cfg = Self {
            n,
            lambda,
            seed,
            replicates,
            tilt_theta: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tilt(mut self, theta: f64) -> Self {
        self.tilt_theta = Some(theta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("sample size n must be at least 1"));
        }
        check_lambda(self.lambda)?;
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if let Some(t) = self.tilt_theta {
            if !t.is_finite() {
                return Err(Error::invalid(format!("tilt θ must be finite, got {t}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("λ must be a positive finite number, got {lambda}")))
    }
}

/// A draw under the tilted law with its log likelihood ratio `log(dP/dQ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltedDraw {
    pub value: f64,
    pub log_weight: f64,
}

/// Per-configuration constants shared by all replicates.
#[derive(Debug, Clone)]
pub struct SpacingPlan {
    /// `w(k/n)`.
    weights: Vec<f64>,
    /// Untilted: `w(k/n)/(n−k)`, scaled by `1/λ` at the end of a draw.
    /// Tilted: `w(k/n)/(λ(n−k) − nθ w(k/n))`.
    coef: Vec<f64>,
    lambda: f64,
    tilt: Option<Tilt>,
}

#[derive(Debug, Clone, Copy)]
struct Tilt {
    /// `nθ`
    scaled_theta: f64,
    /// `Σ_k log(λ(n−k)/(λ(n−k) − nθ w_k))`
    log_mgf: f64,
}

impl SpacingPlan {
    pub fn new(wf: &WeightFunction, n: usize, lambda: f64, tilt_theta: Option<f64>) -> Result<Self> {
        Self::from_weights(wf.grid_values(n)?, lambda, tilt_theta)
    }

    /// Plan from precomputed `w(k/n)`, `k = 0..n`.
    pub fn from_weights(weights: Vec<f64>, lambda: f64, tilt_theta: Option<f64>) -> Result<Self> {
        check_lambda(lambda)?;
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("sample size n must be at least 1"));
        }
        let (coef, tilt) = match tilt_theta {
            None => (weights.iter().enumerate().map(|(k, w)| w / (n - k) as f64).collect(), None),
            Some(theta) => {
                let nt = n as f64 * theta;
                let mut coef = Vec::with_capacity(n);
                let mut log_mgf = 0.0;
                for (k, &w) in weights.iter().enumerate() {
                    let base = lambda * (n - k) as f64;
                    let rate = base - nt * w;
                    if !(rate > 0.0) {
                        return Err(Error::TiltDomain { k, theta, rate });
                    }
                    coef.push(w / rate);
                    log_mgf -= (-nt * w / base).ln_1p();
                }
                (coef, Some(Tilt { scaled_theta: nt, log_mgf }))
            }
        };
        Ok(Self {
            weights,
            coef,
            lambda,
            tilt,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_tilted(&self) -> bool {
        self.tilt.is_some()
    }

    /// One draw of `C_n(w)` under the plan's law.
    pub fn draw(&self, stream: &mut ReplicateStream) -> f64 {
        let s: f64 = self.coef.iter().map(|a| a * stream.std_exp()).sum();
        if self.tilt.is_some() {
            s
        } else {
            s / self.lambda
        }
    }

    /// One draw with its log likelihood ratio (zero when untilted).
    pub fn draw_weighted(&self, stream: &mut ReplicateStream) -> TiltedDraw {
        let value = self.draw(stream);
        let log_weight = match self.tilt {
            None => 0.0,
            Some(t) => -t.scaled_theta * value + t.log_mgf,
        };
        TiltedDraw { value, log_weight }
    }

    /// Draws for replicates `0..count` of `seed`, in replicate order.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<TiltedDraw> {
        parallel::map_replicates(count, |r| self.draw_weighted(&mut ReplicateStream::new(seed, r)))
    }

    /// Untilted values for replicates `0..count`.
    pub fn sample_values(&self, seed: u64, count: usize) -> Vec<f64> {
        parallel::map_replicates(count, |r| self.draw(&mut ReplicateStream::new(seed, r)))
    }
}

/// Independent draws of `C_n(w)`, one per replicate.
pub fn sample_cn(wf: &WeightFunction, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if cfg.tilt_theta.is_some() {
        return Err(Error::invalid("sample_cn takes an untilted configuration; use sample_cn_tilted"));
    }
    Ok(SpacingPlan::new(wf, cfg.n, cfg.lambda, None)?.sample_values(cfg.seed, cfg.replicates))
}

/// Draws under the exponential tilt `θ = cfg.tilt_theta` with their
/// likelihood ratios. Fails with [`Error::TiltDomain`] when
/// `θ·h_w(k/n) ≥ λ` for some `k`.
pub fn sample_cn_tilted(wf: &WeightFunction, cfg: &SimConfig) -> Result<Vec<TiltedDraw>> {
    cfg.validate()?;
    let theta = cfg
        .tilt_theta
        .ok_or_else(|| Error::invalid("sample_cn_tilted needs tilt_theta"))?;
    Ok(SpacingPlan::new(wf, cfg.n, cfg.lambda, Some(theta))?.sample(cfg.seed, cfg.replicates))
}

/// `(E C_n(w), Var C_n(w))`.
pub fn exact_mean_var(wf: &WeightFunction, n: usize, lambda: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("sample size n must be at least 1"));
    }
    check_lambda(lambda)?;
    Ok(mean_var_from_weights(&wf.grid_values(n)?, lambda))
}

pub(crate) fn mean_var_from_weights(weights: &[f64], lambda: f64) -> (f64, f64) {
    let n = weights.len();
    let (mut m, mut v) = (0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        let t = w / (n - k) as f64;
        m += t;
        v += t * t;
    }
    (m / lambda, v / (lambda * lambda))
}

/// `log E[e^{θ C_n(w)}] = Σ_k log(λ(n−k)/(λ(n−k) − θ w(k/n)))`, or `+∞`
/// when some factor is not finite.
pub fn log_mgf(wf: &WeightFunction, n: usize, lambda: f64, theta: f64) -> Result<ExtReal> {
    if n == 0 {
        return Err(Error::invalid("sample size n must be at least 1"));
    }
    check_lambda(lambda)?;
    let mut total = 0.0;
    for k in 0..n {
        let w = wf.eval_w(k as f64 / n as f64)?;
        let base = lambda * (n - k) as f64;
        if theta * w >= base {
            return Ok(ExtReal::PosInf);
        }
        total -= (-theta * w / base).ln_1p();
    }
    Ok(ExtReal::Finite(total))
}

/// `C_n(w)` evaluated on an observed sample: sorts it, prepends `X_{0:n} = 0`
/// and sums `w(k/n)(X_{k+1:n} − X_{k:n})`.
pub fn empirical_cn(wf: &WeightFunction, sample: &[f64]) -> Result<f64> {
    let sorted = sorted_positive(sample)?;
    let n = sorted.len();
    let mut prev = 0.0;
    let mut total = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        total += wf.eval_w(k as f64 / n as f64)? * (x - prev);
        prev = x;
    }
    Ok(total)
}

/// Validates a sample (nonempty, finite, strictly positive) and sorts it.
pub(crate) fn sorted_positive(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::domain("sample is empty"));
    }
    if let Some(&bad) = sample.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("sample entries must be positive and finite, got {bad}")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}
