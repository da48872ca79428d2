//! Monte Carlo checks of the large- and moderate-deviation asymptotics, the
//! CLT, and the L-statistic mean/variance identities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quad::{self, Integral, QuadConfig};
use crate::rate::{self, RateEngine};
use crate::sampler::{self, check_lambda, SpacingPlan, TiltedDraw};
use crate::search;
use crate::stats::{self, CompensatedSum};
use crate::weights::{ScoreFunction, WeightFunction};

/// Effective sample sizes below this raise a warning flag.
pub const ESS_WARNING: f64 = 50.0;

/// Relative backoff from a non-steep domain end when tilting there.
pub const BOUNDARY_BACKOFF: f64 = 1e-6;

/// Direction of a half-line event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// `{C_n ≥ y}`
    Upper,
    /// `{C_n ≤ y}`
    Lower,
}

impl Tail {
    fn hit(self, value: f64, level: f64) -> bool {
        match self {
            Tail::Upper => value >= level,
            Tail::Lower => value <= level,
        }
    }
}

/// Importance-sampling estimate of an event probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsEstimate {
    pub p_hat: f64,
    /// `log p̂`, kept separately since `p̂` itself may underflow.
    pub log_p_hat: ExtReal,
    pub std_error: f64,
    /// `(Σ f·w)² / Σ (f·w)²` over the likelihood-ratio weights `w` of the
    /// draws that hit the event.
    pub ess: f64,
    pub hits: usize,
}

/// Aggregates draws in replicate order, in log space relative to the
/// largest log weight among the hits.
pub fn is_estimate(draws: &[TiltedDraw], tail: Tail, level: f64) -> IsEstimate {
    let r = draws.len() as f64;
    let hits: Vec<f64> = draws
        .iter()
        .filter(|d| tail.hit(d.value, level))
        .map(|d| d.log_weight)
        .collect();
    if hits.is_empty() {
        return IsEstimate {
            p_hat: 0.0,
            log_p_hat: ExtReal::NegInf,
            std_error: 0.0,
            ess: 0.0,
            hits: 0,
        };
    }
    let m = hits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut s1, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
    for &lw in &hits {
        let e = (lw - m).exp();
        s1.add(e);
        s2.add(e * e);
    }
    let (s1, s2) = (s1.value(), s2.value());
    let mean_scaled = s1 / r;
    let var_scaled = if r > 1.0 {
        ((s2 / r - mean_scaled * mean_scaled) * r / (r - 1.0)).max(0.0)
    } else {
        0.0
    };
    let log_p = m + mean_scaled.ln();
    IsEstimate {
        p_hat: log_p.exp(),
        log_p_hat: ExtReal::Finite(log_p),
        std_error: m.exp() * (var_scaled / r).sqrt(),
        ess: s1 * s1 / s2,
        hits: hits.len(),
    }
}

/// One `(n, y)` cell of a large-deviation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdpRow {
    pub n: usize,
    pub y: f64,
    pub tail: Tail,
    pub p_hat: f64,
    pub log_p_hat: ExtReal,
    pub std_error: f64,
    /// `−(1/n) log p̂`
    pub empirical_rate: ExtReal,
    /// `Λ_w*(y)`
    pub analytic_rate: ExtReal,
    pub theta_star: f64,
    /// Set when the tilt was backed off from a non-steep domain end.
    pub boundary_tilt: bool,
    pub ess: f64,
    pub ess_warning: bool,
    pub zero_count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpReport {
    pub weight: String,
    pub lambda: f64,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<LdpRow>,
}

fn check_runs(n_list: &[usize], replicates: usize) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list is empty"));
    }
    if n_list.contains(&0) {
        return Err(Error::invalid("every n in n_list must be at least 1"));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    Ok(())
}

/// Estimates `P(C_n ≥ y)` (or `P(C_n ≤ y)` below the mean) by exponential
/// tilting at the Legendre maximiser `θ*` and compares `−(1/n) log p̂` with
/// `Λ_w*(y)`.
pub fn verify_ldp(
    wf: &WeightFunction,
    lambda: f64,
    y_grid: &[f64],
    n_list: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<LdpReport> {
    check_runs(n_list, replicates)?;
    if y_grid.is_empty() {
        return Err(Error::invalid("y_grid is empty"));
    }
    let engine = RateEngine::new(wf, lambda)?;
    let mu = engine.mu_w();

    struct Target {
        y: f64,
        tail: Tail,
        theta: f64,
        boundary: bool,
        rate: ExtReal,
    }
    let mut targets = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        if !y.is_finite() {
            return Err(Error::invalid(format!("y must be finite, got {y}")));
        }
        let tail = if y >= mu { Tail::Upper } else { Tail::Lower };
        if tail == Tail::Lower && !(engine.inf_h() > 0.0) {
            return Err(Error::invalid(format!(
                "lower-tail level y = {y} < μ_w needs h_w > 0, but inf h_w = {}",
                engine.inf_h()
            )));
        }
        let p = engine.legendre_point(y);
        let mut theta = p.theta_star.ok_or_else(|| {
            Error::domain(format!("Λ_w*({y}) = +∞: the event is unreachable by exponential tilting"))
        })?;
        if p.at_boundary {
            theta -= BOUNDARY_BACKOFF * theta.abs();
        }
        targets.push(Target {
            y,
            tail,
            theta,
            boundary: p.at_boundary,
            rate: p.value,
        });
    }

    let mut rows = Vec::with_capacity(n_list.len() * targets.len());
    for &n in n_list {
        let weights = wf.grid_values(n)?;
        for t in &targets {
            let plan = SpacingPlan::from_weights(weights.clone(), lambda, Some(t.theta))?;
            let draws = plan.sample(seed, replicates);
            let est = is_estimate(&draws, t.tail, t.y);
            rows.push(LdpRow {
                n,
                y: t.y,
                tail: t.tail,
                p_hat: est.p_hat,
                log_p_hat: est.log_p_hat,
                std_error: est.std_error,
                empirical_rate: scaled_neg_log(est.log_p_hat, 1.0 / n as f64),
                analytic_rate: t.rate,
                theta_star: t.theta,
                boundary_tilt: t.boundary,
                ess: est.ess,
                ess_warning: est.ess < ESS_WARNING,
                zero_count: est.hits == 0,
            });
        }
    }
    Ok(LdpReport {
        weight: wf.label(),
        lambda,
        replicates,
        seed,
        rows,
    })
}

/// `−scale · log p`, with `+∞` for an unseen event.
fn scaled_neg_log(log_p: ExtReal, scale: f64) -> ExtReal {
    match log_p {
        ExtReal::Finite(l) => ExtReal::Finite(-scale * l),
        _ => ExtReal::PosInf,
    }
}

/// Normalising sequence `a_n` of a moderate-deviation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rho", rename_all = "snake_case")]
pub enum AnRule {
    /// `a_n = n^{−ρ}` with `0 < ρ < 1`.
    PowerLaw(f64),
}

impl AnRule {
    pub fn a_n(&self, n: usize) -> f64 {
        match *self {
            AnRule::PowerLaw(rho) => (n as f64).powf(-rho),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdpConfig {
    pub an_rule: AnRule,
    pub n_list: Vec<usize>,
    pub y_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl MdpConfig {
    pub fn validate(&self) -> Result<()> {
        let AnRule::PowerLaw(rho) = self.an_rule;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid(format!("ρ must lie strictly between 0 and 1, got {rho}")));
        }
        check_runs(&self.n_list, self.replicates)?;
        if self.y_grid.is_empty() || self.y_grid.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("y_grid must be a nonempty list of finite values"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdpRow {
    pub n: usize,
    pub a_n: f64,
    pub y: f64,
    pub tail: Tail,
    /// Level of `C_n` matching `√(n a_n)(C_n − E C_n) = y`.
    pub level: f64,
    /// `y² / (2σ_w²)`
    pub target: f64,
    pub p_hat: f64,
    pub log_p_hat: ExtReal,
    pub std_error: f64,
    /// `−a_n log p̂`
    pub empirical: ExtReal,
    pub abs_gap: ExtReal,
    /// Tilt θ used for the draws (0 for plain Monte Carlo).
    pub tilt_theta: f64,
    pub ess: f64,
    pub ess_warning: bool,
    /// `p̂ = 0`: the empirical value is only a lower bound.
    pub zero_count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdpReport {
    pub weight: String,
    pub lambda: f64,
    pub sigma2: f64,
    pub config: MdpConfig,
    pub rows: Vec<MdpRow>,
}

/// Tilt `θ` under which the finite-n mean of `C_n` equals `level`:
/// solves `Σ_k w_k / (λ(n−k) − nθ w_k) = level`.
pub fn finite_n_tilt(weights: &[f64], lambda: f64, level: f64) -> Result<f64> {
    let n = weights.len();
    let tilted_mean = |t: f64| -> f64 {
        let mut s = 0.0;
        for (k, &w) in weights.iter().enumerate() {
            let d = lambda * (n - k) as f64 - t * w;
            if d <= 0.0 {
                return if w > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
            }
            s += w / d;
        }
        s
    };
    let base = tilted_mean(0.0);
    if level == base {
        return Ok(0.0);
    }
    let upper = level > base;
    // Poles of the tilted mean: t = λ(n−k)/w_k.
    let pole = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| if upper { w > 0.0 } else { w < 0.0 })
        .map(|(k, &w)| lambda * (n - k) as f64 / w)
        .fold(None, |acc: Option<f64>, p| {
            Some(match acc {
                None => p,
                Some(a) if upper => a.min(p),
                Some(a) => a.max(p),
            })
        });
    let (lo, hi) = match pole {
        Some(p) => {
            if upper {
                (0.0, p)
            } else {
                (p, 0.0)
            }
        }
        None => {
            let dir = if upper { 1.0 } else { -1.0 };
            let mut far = dir * lambda;
            let mut reached = false;
            for _ in 0..1100 {
                let m = tilted_mean(far);
                if (upper && m >= level) || (!upper && m <= level) {
                    reached = true;
                    break;
                }
                far *= 2.0;
            }
            if !reached {
                return Err(Error::domain(format!("no exponential tilt reaches the level {level}")));
            }
            if upper {
                (0.0, far)
            } else {
                (far, 0.0)
            }
        }
    };
    let t = search::bisect_increasing(tilted_mean, level, lo, hi, 1e-14, 400);
    Ok(t / n as f64)
}

/// Checks `−a_n log P(√(n a_n)(C_n − E C_n) ≥ y) → y²/(2σ_w²)`.
///
/// For `y > 0` the upper-tail event is estimated by tilting so that the
/// finite-n mean sits at the event level; `y < 0` uses the mirrored event
/// `{statistic ≤ y}`; `y = 0` is plain Monte Carlo.
pub fn verify_mdp(wf: &WeightFunction, lambda: f64, cfg: &MdpConfig) -> Result<MdpReport> {
    cfg.validate()?;
    let engine = RateEngine::new(wf, lambda)?;
    let sigma2 = engine.sigma2_w();
    let mut rows = Vec::with_capacity(cfg.n_list.len() * cfg.y_grid.len());
    for &n in &cfg.n_list {
        let weights = wf.grid_values(n)?;
        let (mean, _) = sampler::mean_var_from_weights(&weights, lambda);
        let a_n = cfg.an_rule.a_n(n);
        let scale = (n as f64 * a_n).sqrt();
        for &y in &cfg.y_grid {
            let level = mean + y / scale;
            let tail = if y < 0.0 { Tail::Lower } else { Tail::Upper };
            let theta = if y == 0.0 {
                0.0
            } else {
                finite_n_tilt(&weights, lambda, level)?
            };
            let tilt = if theta == 0.0 { None } else { Some(theta) };
            let plan = SpacingPlan::from_weights(weights.clone(), lambda, tilt)?;
            let est = is_estimate(&plan.sample(cfg.seed, cfg.replicates), tail, level);
            let target = y * y / (2.0 * sigma2);
            let empirical = scaled_neg_log(est.log_p_hat, a_n);
            rows.push(MdpRow {
                n,
                a_n,
                y,
                tail,
                level,
                target,
                p_hat: est.p_hat,
                log_p_hat: est.log_p_hat,
                std_error: est.std_error,
                empirical,
                abs_gap: match empirical {
                    ExtReal::Finite(e) => ExtReal::Finite((e - target).abs()),
                    _ => ExtReal::PosInf,
                },
                tilt_theta: theta,
                ess: est.ess,
                ess_warning: est.ess < ESS_WARNING,
                zero_count: est.hits == 0,
            });
        }
    }
    Ok(MdpReport {
        weight: wf.label(),
        lambda,
        sigma2,
        config: cfg.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Sample variance of `√n (C_n − E C_n)`.
    pub sample_var: f64,
    pub target_sigma2: f64,
    pub rel_var_error: f64,
    /// KS distance of `(C_n − E C_n)/√(σ_w²/n)` to the standard normal.
    pub ks_distance: f64,
}

/// Normal approximation of `√n (C_n − E C_n)`; needs a finite Lyapunov
/// integral `∫ |h_w|³`.
pub fn clt_check(wf: &WeightFunction, lambda: f64, n: usize, replicates: usize, seed: u64) -> Result<CltReport> {
    check_runs(&[n], replicates)?;
    let m = rate::moments(wf, lambda)?;
    if !m.lyapunov_integral.is_finite() {
        return Err(Error::Condition {
            condition: "Lyapunov condition",
            detail: format!("∫ |w|³/(1−x)³ diverges for {}", wf.label()),
        });
    }
    let sigma2 = m.sigma2.to_f64();
    let weights = wf.grid_values(n)?;
    let (mean, _) = sampler::mean_var_from_weights(&weights, lambda);
    let plan = SpacingPlan::from_weights(weights, lambda, None)?;
    let root_n = (n as f64).sqrt();
    let scaled: Vec<f64> = plan
        .sample_values(seed, replicates)
        .into_iter()
        .map(|c| root_n * (c - mean))
        .collect();
    let sample_var = stats::variance(&scaled);
    let sd = sigma2.sqrt();
    let z: Vec<f64> = scaled.iter().map(|s| s / sd).collect();
    Ok(CltReport {
        n,
        replicates,
        seed,
        sample_var,
        target_sigma2: sigma2,
        rel_var_error: (sample_var - sigma2).abs() / sigma2,
        ks_distance: stats::ks_normal(&z),
    })
}

fn bridge_quad() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    }
}

/// `∫_lo^hi f` split at the score's breakpoints; pieces touching 0 or 1 are
/// refined geometrically toward those ends.
fn integrate_score_pieces(j: &ScoreFunction, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    if lo >= hi {
        return Ok(0.0);
    }
    let cfg = bridge_quad();
    let pts = j.split_points(lo, hi);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let r = if a == 0.0 || b == 1.0 {
            quad::integrate_open(&f, a, b, &cfg)?
        } else {
            let q = quad::integrate(&f, a, b, &cfg);
            Integral::Finite {
                value: q.value,
                error: q.error,
            }
        };
        match r {
            Integral::Finite { value, .. } if value.is_finite() => total += value,
            _ => {
                return Err(Error::Quadrature(format!(
                    "integral over [{a}, {b}] for score '{}' does not converge",
                    j.name()
                )))
            }
        }
    }
    Ok(total)
}

/// `m(J, F) = −(1/λ) ∫₀¹ log(1−r) J(r) dr` for `F = Exp(λ)`.
pub fn gz_mean(j: &ScoreFunction, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let (a, b) = j.support();
    let v = integrate_score_pieces(j, a, b, |r| (-r).ln_1p() * j.eval(r))?;
    Ok(-v / lambda)
}

/// `σ²(J, F) = (2/λ²) ∫₀¹ J(s) ∫₀^s r/(1−r) J(r) dr ds` for `F = Exp(λ)`.
pub fn gz_variance(j: &ScoreFunction, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let (a, b) = j.support();
    let inner = |s: f64| -> f64 {
        integrate_score_pieces(j, a, s, |r| r / (1.0 - r) * j.eval(r)).unwrap_or(f64::NAN)
    };
    let v = integrate_score_pieces(j, a, b, |s| {
        let js = j.eval(s);
        if js == 0.0 {
            0.0
        } else {
            js * inner(s)
        }
    })?;
    Ok(2.0 * v / (lambda * lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    pub score: String,
    pub lambda: f64,
    pub m_gz: f64,
    pub mu_weight: f64,
    pub sigma2_gz: f64,
    pub sigma2_weight: f64,
    pub mean_gap: f64,
    pub variance_gap: f64,
    pub max_abs_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares the L-statistic mean and variance of `J` with `μ_w` and `σ_w²`
/// of the weight `w(J; ·)`.
pub fn gz_equivalence_check(j: &ScoreFunction, lambda: f64, tol: f64) -> Result<BridgeReport> {
    let m_gz = gz_mean(j, lambda)?;
    let sigma2_gz = gz_variance(j, lambda)?;
    let m = rate::moments(&WeightFunction::from_score(j.clone())?, lambda)?;
    let sigma2_weight = m.sigma2.finite().ok_or_else(|| {
        Error::Quadrature(format!("σ² of the weight built from '{}' diverges", j.name()))
    })?;
    let mean_gap = (m_gz - m.mu).abs();
    let variance_gap = (sigma2_gz - sigma2_weight).abs();
    let max_abs_gap = mean_gap.max(variance_gap);
    Ok(BridgeReport {
        score: j.name().to_string(),
        lambda,
        m_gz,
        mu_weight: m.mu,
        sigma2_gz,
        sigma2_weight,
        mean_gap,
        variance_gap,
        max_abs_gap,
        tol,
        pass: max_abs_gap <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special;

    #[test]
    fn is_estimate_plain_counts() {
        let draws: Vec<TiltedDraw> = [0.5, 1.5, 2.5, 3.5]
            .iter()
            .map(|&value| TiltedDraw { value, log_weight: 0.0 })
            .collect();
        let e = is_estimate(&draws, Tail::Upper, 2.0);
        assert_eq!(e.hits, 2);
        assert!((e.p_hat - 0.5).abs() < 1e-15);
        assert!((e.ess - 2.0).abs() < 1e-12);
        let e = is_estimate(&draws, Tail::Upper, 9.0);
        assert_eq!(e.log_p_hat, ExtReal::NegInf);
    }

    #[test]
    fn finite_n_tilt_centres_the_tilted_law() {
        let w = WeightFunction::w2().grid_values(40).unwrap();
        for level in [0.2, 0.9, 1.7] {
            let theta = finite_n_tilt(&w, 1.3, level).unwrap();
            let n = w.len() as f64;
            let m: f64 = w
                .iter()
                .enumerate()
                .map(|(k, wk)| wk / (1.3 * (40 - k) as f64 - n * theta * wk))
                .sum();
            assert!((m - level).abs() < 1e-10, "{level}: {m}");
        }
    }

    #[test]
    fn mdp_zero_level_is_half() {
        let cfg = MdpConfig {
            an_rule: AnRule::PowerLaw(0.5),
            n_list: vec![1000],
            y_grid: vec![0.0],
            replicates: 4000,
            seed: 2,
        };
        let r = verify_mdp(&WeightFunction::w1(), 1.0, &cfg).unwrap();
        assert_eq!(r.rows[0].target, 0.0);
        assert!((0.4..=0.6).contains(&r.rows[0].p_hat));
    }

    #[test]
    fn mdp_rejects_bad_rho() {
        let cfg = MdpConfig {
            an_rule: AnRule::PowerLaw(1.0),
            n_list: vec![10],
            y_grid: vec![1.0],
            replicates: 10,
            seed: 0,
        };
        assert!(verify_mdp(&WeightFunction::w1(), 1.0, &cfg).is_err());
    }

    #[test]
    fn clt_rejects_infinite_lyapunov() {
        let err = clt_check(&WeightFunction::poly(0.6).unwrap(), 1.0, 100, 10, 0).unwrap_err();
        assert!(matches!(err, Error::Condition { .. }));
    }

    #[test]
    fn ldp_w1_matches_erlang_tail() {
        let r = verify_ldp(&WeightFunction::w1(), 1.0, &[2.0], &[30], 20_000, 1).unwrap();
        let row = r.rows[0];
        let exact = special::ln_erlang_survival(30, 60.0).exp();
        assert!((row.p_hat - exact).abs() < 3.0 * row.std_error, "{row:?} vs {exact}");
    }

    #[test]
    fn bridge_zero_score() {
        let z = ScoreFunction::zero();
        assert_eq!(gz_mean(&z, 1.0).unwrap(), 0.0);
        assert_eq!(gz_variance(&z, 1.0).unwrap(), 0.0);
        assert!(gz_equivalence_check(&z, 1.0, 1e-5).unwrap().pass);
    }

    #[test]
    fn bridge_ce_mean_is_basel() {
        let m = gz_mean(&ScoreFunction::cumulative_entropy(), 2.0).unwrap();
        assert!((m - special::basel_minus_one() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn bridge_identities() {
        for j in [ScoreFunction::cumulative_entropy(), ScoreFunction::indicator(0.2, 0.8).unwrap()] {
            let r = gz_equivalence_check(&j, 1.0, 1e-5).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
