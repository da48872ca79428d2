//! The limiting cumulant function
//!
//! ```text
//! Λ_w(θ) = ∫₀¹ log(λ / (λ − θ h_w(x))) dx
//! ```
//!
//! with its derivatives, Legendre transform `Λ_w*`, steepness diagnostic,
//! asymptotic moments, the relative-entropy upper bound `M_w` and the Jensen
//! lower bound on `σ_w²`.
//!
//! All integrals go through the geometric singular-point quadrature of
//! [`crate::quad`], refined toward the extremum of `h_w` that controls the
//! blow-up at the relevant end of the θ-domain.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::quad::{self, Integral, QuadConfig};
use crate::sampler::check_lambda;
use crate::search;
use crate::weights::{self, WeightFamily, WeightFunction, DEFAULT_GRID};

/// Bisection tolerance on θ (relative to `max(1, |θ|)`).
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

/// Slopes `Λ'_w` beyond this along the boundary approach count as divergent.
pub const STEEPNESS_THRESHOLD: f64 = 1e6;

/// Agreement required between the direct and reduced forms of `M_w`.
const M_CROSS_CHECK_TOL: f64 = 1e-8;

fn rate_quad() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    }
}

/// `μ_w`, `σ_w²`, `γ_w = λμ_w` and `∫|h_w|³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mu: f64,
    pub sigma2: ExtReal,
    pub gamma: f64,
    pub lyapunov_integral: ExtReal,
}

/// Asymptotic moments of `C_n(w)` for any weight satisfying Condition 1.
/// Unlike the engine this does not need a bounded `h_w`; `σ_w²` and the
/// Lyapunov integral may come out infinite.
pub fn moments(wf: &WeightFunction, lambda: f64) -> Result<MomentSummary> {
    check_lambda(lambda)?;
    if has_unit_ratio(wf) {
        return Ok(MomentSummary {
            mu: 1.0 / lambda,
            sigma2: ExtReal::Finite(1.0 / (lambda * lambda)),
            gamma: 1.0,
            lyapunov_integral: ExtReal::Finite(1.0),
        });
    }
    let cfg = rate_quad();
    let h = |x: f64| wf.eval_h(x).unwrap_or(f64::NAN);
    let gamma = match quad::integrate_open(h, 0.0, 1.0, &cfg)? {
        Integral::Finite { value, .. } => value,
        Integral::Divergent { .. } => {
            return Err(Error::Condition {
                condition: "Condition 1",
                detail: format!("∫ w/(1−x) diverges for {}", wf.label()),
            })
        }
    };
    let i2 = quad::integrate_open(|x| h(x).powi(2), 0.0, 1.0, &cfg)?.to_ext();
    let i3 = quad::integrate_open(|x| h(x).abs().powi(3), 0.0, 1.0, &cfg)?.to_ext();
    Ok(MomentSummary {
        mu: gamma / lambda,
        sigma2: match i2 {
            ExtReal::Finite(v) => ExtReal::Finite(v / (lambda * lambda)),
            other => other,
        },
        gamma,
        lyapunov_integral: i3,
    })
}

/// Families with `h_w ≡ 1`, whose moment integrals are exactly one.
fn has_unit_ratio(wf: &WeightFunction) -> bool {
    match wf.family() {
        WeightFamily::W1 => true,
        WeightFamily::PolyBeta(b) => *b == 1.0,
        WeightFamily::FracCre(q) => *q == 0.0,
        _ => false,
    }
}

/// `H(Exp(λ1) | Exp(λ2)) = λ2/λ1 − 1 − log(λ2/λ1)`.
pub fn relative_entropy_exp(lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(Error::domain(format!(
            "exponential rates must be positive, got ({lambda1}, {lambda2})"
        )));
    }
    let r = lambda2 / lambda1;
    Ok(r - 1.0 - r.ln())
}

/// One point of the geometric approach to `theta_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproachPoint {
    pub theta: f64,
    pub slope: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Steepness {
    pub steep: bool,
    /// `Λ'_w(theta_max)`, infinite when steep.
    pub boundary_slope: ExtReal,
    /// `Λ'_w(theta_max(1 − 2^{-j}))` for `j = 1, 2, …`.
    pub approach: Vec<ApproachPoint>,
}

/// Result of the Legendre transform at one `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendrePoint {
    pub y: f64,
    pub value: ExtReal,
    /// Maximising θ, when the supremum is attained.
    pub theta_star: Option<f64>,
    /// Set when the supremum sits at an endpoint of a non-steep domain.
    pub at_boundary: bool,
}

/// `λ`, the weight, the θ-domain and the extrema of `h_w`, fixed at build.
#[derive(Debug, Clone)]
pub struct RateEngine {
    lambda: f64,
    wf: WeightFunction,
    theta_min: ExtReal,
    theta_max: ExtReal,
    sup_h: f64,
    inf_h: f64,
    argmax_h: f64,
    argmin_h: f64,
    moments: MomentSummary,
    slope_at_max: ExtReal,
    slope_at_min: ExtReal,
}

impl RateEngine {
    /// Locates the extrema of `h_w` and the domain of `Λ_w`. Fails with a
    /// Condition 2 error when `h_w` is unbounded.
    pub fn new(wf: &WeightFunction, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let c2 = weights::check_condition2(wf, lambda)?;
        if !c2.holds {
            return Err(Error::Condition {
                condition: "Condition 2",
                detail: format!(
                    "h_w = w/(1−x) is unbounded on [0, 1) for {}, so Λ_w is infinite on one side of 0",
                    wf.label()
                ),
            });
        }
        let ext = weights::h_extrema(wf, DEFAULT_GRID)?;
        let theta_max = if ext.sup > 0.0 {
            ExtReal::Finite(lambda / ext.sup)
        } else {
            ExtReal::PosInf
        };
        let theta_min = if ext.inf < 0.0 {
            ExtReal::Finite(lambda / ext.inf)
        } else {
            ExtReal::NegInf
        };
        let mut engine = Self {
            lambda,
            wf: wf.clone(),
            theta_min,
            theta_max,
            sup_h: ext.sup,
            inf_h: ext.inf,
            argmax_h: ext.argmax,
            argmin_h: ext.argmin,
            moments: moments(wf, lambda)?,
            slope_at_max: ExtReal::PosInf,
            slope_at_min: ExtReal::NegInf,
        };
        if let ExtReal::Finite(t) = theta_max {
            engine.slope_at_max = engine.lambda_w_prime(t);
        }
        if let ExtReal::Finite(t) = theta_min {
            engine.slope_at_min = engine.lambda_w_prime(t);
        }
        Ok(engine)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.wf
    }

    pub fn theta_min(&self) -> ExtReal {
        self.theta_min
    }

    pub fn theta_max(&self) -> ExtReal {
        self.theta_max
    }

    pub fn sup_h(&self) -> f64 {
        self.sup_h
    }

    pub fn inf_h(&self) -> f64 {
        self.inf_h
    }

    pub fn moments(&self) -> MomentSummary {
        self.moments
    }

    pub fn mu_w(&self) -> f64 {
        self.moments.mu
    }

    /// Finite under Condition 2.
    pub fn sigma2_w(&self) -> f64 {
        self.moments.sigma2.to_f64()
    }

    pub fn lyapunov_integral(&self) -> ExtReal {
        self.moments.lyapunov_integral
    }

    /// `γ_w²/λ² = μ_w²`, a lower bound for `σ_w²`.
    pub fn jensen_lower_bound(&self) -> f64 {
        let g = self.moments.gamma;
        g * g / (self.lambda * self.lambda)
    }

    fn h(&self, x: f64) -> f64 {
        self.wf.eval_h(x).unwrap_or(f64::NAN)
    }

    fn in_domain(&self, theta: f64) -> bool {
        let t = ExtReal::Finite(theta);
        self.theta_min <= t && t <= self.theta_max
    }

    /// Where the integrands of `Λ_w` and its derivatives peak for this θ.
    fn critical_point(&self, theta: f64) -> f64 {
        if theta >= 0.0 {
            self.argmax_h
        } else {
            self.argmin_h
        }
    }

    fn integrate(&self, theta: f64, f: impl Fn(f64) -> f64) -> ExtReal {
        match quad::integrate_around(f, 0.0, 1.0, self.critical_point(theta), &rate_quad()) {
            Ok(r) => r.to_ext(),
            Err(_) => ExtReal::PosInf,
        }
    }

    /// `Λ_w(θ)`; `+∞` outside `[theta_min, theta_max]` and where the
    /// boundary integral diverges.
    pub fn lambda_w(&self, theta: f64) -> ExtReal {
        if theta == 0.0 {
            return ExtReal::ZERO;
        }
        if !self.in_domain(theta) {
            return ExtReal::PosInf;
        }
        let l = self.lambda;
        self.integrate(theta, |x| {
            let a = theta * self.h(x) / l;
            if a >= 1.0 {
                f64::INFINITY
            } else {
                -(-a).ln_1p()
            }
        })
    }

    /// `Λ'_w(θ) = ∫ h/(λ − θh)`.
    pub fn lambda_w_prime(&self, theta: f64) -> ExtReal {
        if !self.in_domain(theta) {
            return if theta > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf };
        }
        let l = self.lambda;
        self.integrate(theta, |x| {
            let h = self.h(x);
            let d = l - theta * h;
            if d <= 0.0 {
                h.signum() * f64::INFINITY
            } else {
                h / d
            }
        })
    }

    /// `Λ''_w(θ) = ∫ h²/(λ − θh)²`.
    pub fn lambda_w_second(&self, theta: f64) -> ExtReal {
        if !self.in_domain(theta) {
            return ExtReal::PosInf;
        }
        let l = self.lambda;
        self.integrate(theta, |x| {
            let h = self.h(x);
            let d = l - theta * h;
            if d <= 0.0 {
                f64::INFINITY
            } else {
                (h / d) * (h / d)
            }
        })
    }

    /// Steepness at the upper end of the domain. The boundary slope is the
    /// integral `Λ'_w(theta_max)` itself; the geometric approach is logged
    /// alongside and also declares steepness once it passes
    /// [`STEEPNESS_THRESHOLD`].
    pub fn check_steepness(&self) -> Steepness {
        let tmax = match self.theta_max {
            ExtReal::Finite(t) => t,
            _ => {
                return Steepness {
                    steep: true,
                    boundary_slope: ExtReal::PosInf,
                    approach: Vec::new(),
                }
            }
        };
        let approach: Vec<ApproachPoint> = (1..=40)
            .map(|j| {
                let theta = tmax * (1.0 - 0.5f64.powi(j));
                ApproachPoint {
                    theta,
                    slope: self.lambda_w_prime(theta),
                }
            })
            .collect();
        let crossed = approach
            .iter()
            .any(|p| p.slope > ExtReal::Finite(STEEPNESS_THRESHOLD));
        let steep = crossed || !self.slope_at_max.is_finite();
        Steepness {
            steep,
            boundary_slope: if steep { ExtReal::PosInf } else { self.slope_at_max },
            approach,
        }
    }

    /// `Λ_w*(y) = sup_θ {θy − Λ_w(θ)}`.
    pub fn legendre(&self, y: f64) -> ExtReal {
        self.legendre_point(y).value
    }

    /// Legendre transform together with the maximising θ.
    ///
    /// Inside the domain the maximiser solves `Λ'_w(θ) = y`, found by
    /// bisection. When `y` lies beyond a finite boundary slope the supremum
    /// is attained at the domain end.
    pub fn legendre_point(&self, y: f64) -> LegendrePoint {
        let mu = self.moments.mu;
        let infinite = LegendrePoint {
            y,
            value: ExtReal::PosInf,
            theta_star: None,
            at_boundary: false,
        };
        if !y.is_finite() {
            return infinite;
        }
        if y == mu {
            return LegendrePoint {
                y,
                value: ExtReal::ZERO,
                theta_star: Some(0.0),
                at_boundary: false,
            };
        }
        let upper = y > mu;
        let (end, end_slope) = if upper {
            (self.theta_max, self.slope_at_max)
        } else {
            (self.theta_min, self.slope_at_min)
        };
        let slope = |t: f64| self.lambda_w_prime(t).to_f64();

        let theta = match end {
            ExtReal::Finite(te) => {
                let beyond = match end_slope {
                    ExtReal::Finite(s) => (upper && y >= s) || (!upper && y <= s),
                    _ => false,
                };
                if beyond {
                    return match self.lambda_w(te) {
                        ExtReal::Finite(l) => LegendrePoint {
                            y,
                            value: ExtReal::Finite((te * y - l).max(0.0)),
                            theta_star: Some(te),
                            at_boundary: true,
                        },
                        _ => infinite,
                    };
                }
                let (lo, hi) = if upper { (0.0, te) } else { (te, 0.0) };
                search::bisect_increasing(slope, y, lo, hi, BISECTION_TOL, BISECTION_MAX_ITER)
            }
            _ => {
                // Unbounded side. Λ'_w tends to 0 there, so targets on the far
                // side of 0 are unreachable and the transform is infinite.
                if (upper && y >= 0.0 && self.sup_h <= 0.0) || (!upper && y <= 0.0 && self.inf_h >= 0.0) {
                    return infinite;
                }
                let dir = if upper { 1.0 } else { -1.0 };
                let mut near = 0.0;
                let mut far = dir / self.lambda;
                let mut found = false;
                for _ in 0..1100 {
                    let s = slope(far);
                    if (upper && s >= y) || (!upper && s <= y) {
                        found = true;
                        break;
                    }
                    near = far;
                    far *= 2.0;
                    if !far.is_finite() {
                        break;
                    }
                }
                if !found {
                    return infinite;
                }
                let (lo, hi) = if upper { (near, far) } else { (far, near) };
                search::bisect_increasing(slope, y, lo, hi, BISECTION_TOL, BISECTION_MAX_ITER)
            }
        };
        match self.lambda_w(theta) {
            ExtReal::Finite(l) => LegendrePoint {
                y,
                value: ExtReal::Finite((theta * y - l).max(0.0)),
                theta_star: Some(theta),
                at_boundary: false,
            },
            _ => infinite,
        }
    }

    fn require_positive_h(&self) -> Result<()> {
        for i in 0..DEFAULT_GRID {
            let x = (i as f64 + 0.5) / DEFAULT_GRID as f64;
            let h = self.wf.eval_h(x)?;
            if !(h > 0.0) {
                return Err(Error::Positivity { x, value: h });
            }
        }
        Ok(())
    }

    /// `∫ 1/h_w`, refined toward the minimiser of `h_w`.
    fn inverse_h_integral(&self) -> Result<ExtReal> {
        Ok(quad::integrate_around(|x| 1.0 / self.h(x), 0.0, 1.0, self.argmin_h, &rate_quad())?.to_ext())
    }

    /// `M_w(y) = ∫₀¹ H(Exp(1/y) | Exp(λ/h_w(x))) dx`, an upper bound for
    /// `Λ_w*(y)` when `h_w > 0`.
    ///
    /// Evaluated both as the direct integral and in the reduced form
    /// `λy∫h⁻¹ − 1 − log λ + ∫log h − log y`; the two must agree to 1e-8.
    pub fn m_upper_bound(&self, y: f64) -> Result<ExtReal> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::domain(format!("M_w is defined for y > 0, got {y}")));
        }
        self.require_positive_h()?;
        let l = self.lambda;
        let cfg = rate_quad();
        let direct = quad::integrate_around(
            |x| {
                let r = l * y / self.h(x);
                if r.is_infinite() {
                    f64::INFINITY
                } else {
                    r - 1.0 - r.ln()
                }
            },
            0.0,
            1.0,
            self.argmin_h,
            &cfg,
        )?
        .to_ext();
        let reduced = match self.inverse_h_integral()? {
            ExtReal::Finite(a) => {
                let b = quad::integrate_around(|x| self.h(x).ln(), 0.0, 1.0, self.argmin_h, &cfg)?;
                match b {
                    Integral::Finite { value: b, .. } => ExtReal::Finite(l * y * a - 1.0 - l.ln() + b - y.ln()),
                    Integral::Divergent { .. } => ExtReal::PosInf,
                }
            }
            _ => ExtReal::PosInf,
        };
        let agree = match (direct, reduced) {
            (ExtReal::Finite(d), ExtReal::Finite(r)) => (d - r).abs() <= M_CROSS_CHECK_TOL * r.abs().max(1.0),
            (d, r) => d == r,
        };
        if !agree {
            return Err(Error::Quadrature(format!(
                "direct ({direct}) and reduced ({reduced}) forms of M_w({y}) disagree"
            )));
        }
        Ok(reduced)
    }

    /// `ȳ_w = (λ ∫ h_w⁻¹)⁻¹`, the minimiser of `M_w`; zero when `∫ h_w⁻¹`
    /// diverges (then `M_w ≡ +∞`).
    pub fn m_minimizer(&self) -> Result<f64> {
        self.require_positive_h()?;
        Ok(match self.inverse_h_integral()? {
            ExtReal::Finite(a) => 1.0 / (self.lambda * a),
            _ => 0.0,
        })
    }
}

/// Alias matching the state-record name used in reports.
pub type RateEngineState = RateEngine;

/// Builds a [`RateEngine`].
pub fn build_engine(wf: &WeightFunction, lambda: f64) -> Result<RateEngine> {
    RateEngine::new(wf, lambda)
}
