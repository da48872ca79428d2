//! Empirical cumulative entropies as special cases of `C_n(w)`.
//!
//! | kind        | weight                          |
//! |-------------|---------------------------------|
//! | `ce`        | `−x log x`                      |
//! | `fgce:<α>`  | `x(−log x)^α / Γ(α+1)`          |
//! | `fcre:<q>`  | `(1−x)(−log(1−x))^q`            |

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{self, check_lambda};
use crate::special;
use crate::weights::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum EntropySpec {
    /// Cumulative entropy.
    Ce,
    /// Fractional generalized cumulative entropy of order `α > 0`.
    FracGce(f64),
    /// Fractional cumulative residual entropy of order `q ≥ 0`.
    FracCre(f64),
}

impl EntropySpec {
    /// Parses `ce`, `fgce:<alpha>` or `fcre:<q>`.
    pub fn parse(s: &str) -> Result<Self> {
        let param = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::invalid(format!("cannot parse entropy order '{v}'")))
        };
        let spec = match s.trim().split_once(':') {
            None if s.trim() == "ce" => EntropySpec::Ce,
            Some(("fgce", a)) => EntropySpec::FracGce(param(a)?),
            Some(("fcre", q)) => EntropySpec::FracCre(param(q)?),
            _ => return Err(Error::invalid(format!("unknown entropy kind '{s}' (expected ce, fgce:<α>, fcre:<q>)"))),
        };
        spec.weight()?;
        Ok(spec)
    }

    /// The weight whose `C_n` is this estimator.
    pub fn weight(&self) -> Result<WeightFunction> {
        match *self {
            EntropySpec::Ce => WeightFunction::frac_gce(1.0),
            EntropySpec::FracGce(a) => WeightFunction::frac_gce(a),
            EntropySpec::FracCre(q) => WeightFunction::frac_cre(q),
        }
    }
}

impl fmt::Display for EntropySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropySpec::Ce => f.write_str("ce"),
            EntropySpec::FracGce(a) => write!(f, "fgce:{a}"),
            EntropySpec::FracCre(q) => write!(f, "fcre:{q}"),
        }
    }
}

/// `Σ_k w(k/n)(X_{k+1:n} − X_{k:n})` for the spec's weight.
pub fn empirical_entropy(spec: EntropySpec, sample: &[f64]) -> Result<f64> {
    sampler::empirical_cn(&spec.weight()?, sample)
}

/// `∫₀^∞ w(F̂_n(z)) dz`, summed over the intervals between distinct sample
/// values, on which `F̂_n` is constant.
pub fn entropy_direct(spec: EntropySpec, sample: &[f64]) -> Result<f64> {
    let wf = spec.weight()?;
    let sorted = sampler::sorted_positive(sample)?;
    let n = sorted.len();
    // On [0, x_(1)) the empirical distribution function is 0.
    let mut total = wf.eval_w(0.0)? * sorted[0];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        // F̂_n = j/n on [x_(i), x_(j)); the last block extends to infinity
        // where w(1) = 0 for every supported kind.
        if j < n {
            total += wf.eval_w(j as f64 / n as f64)? * (sorted[j] - sorted[i]);
        }
        i = j;
    }
    Ok(total)
}

/// Cumulative entropy of `Exp(λ)`: `(π²/6 − 1)/λ`.
pub fn exact_ce_exponential(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(special::basel_minus_one() / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ce_examples() {
        let v = empirical_entropy(EntropySpec::Ce, &[1.0, 2.0]).unwrap();
        assert!((v - 0.5 * std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(empirical_entropy(EntropySpec::Ce, &[3.0]).unwrap(), 0.0);
        let s = [0.3, 1.7, 0.9, 2.2];
        assert_eq!(
            empirical_entropy(EntropySpec::FracGce(1.0), &s).unwrap(),
            empirical_entropy(EntropySpec::Ce, &s).unwrap()
        );
    }

    #[test]
    fn direct_route_examples() {
        let s = [1.0, 2.0, 3.0];
        let a = empirical_entropy(EntropySpec::Ce, &s).unwrap();
        let b = entropy_direct(EntropySpec::Ce, &s).unwrap();
        assert!((a - b).abs() <= 1e-12);
        let v = entropy_direct(EntropySpec::FracCre(1.0), &[1.0, 2.0]).unwrap();
        assert!((v - 0.5 * std::f64::consts::LN_2).abs() < 1e-15);
        let s = [0.4, 1.1, 1.1, 5.0];
        assert_eq!(
            entropy_direct(EntropySpec::FracCre(0.0), &s).unwrap(),
            sampler::empirical_cn(&WeightFunction::w1(), &s).unwrap()
        );
    }

    #[test]
    fn rejects_nonpositive_samples() {
        assert!(empirical_entropy(EntropySpec::Ce, &[1.0, -2.0]).is_err());
        assert!(entropy_direct(EntropySpec::Ce, &[0.0]).is_err());
    }

    #[test]
    fn exponential_reference() {
        let one = exact_ce_exponential(1.0).unwrap();
        assert!((one - 0.644_934_066_848_226_4).abs() < 1e-12);
        assert_eq!(exact_ce_exponential(2.0).unwrap(), one / 2.0);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(EntropySpec::parse("ce").unwrap(), EntropySpec::Ce);
        assert_eq!(EntropySpec::parse("fgce:0.5").unwrap(), EntropySpec::FracGce(0.5));
        assert_eq!(EntropySpec::parse("fcre:2").unwrap(), EntropySpec::FracCre(2.0));
        assert!(EntropySpec::parse("fgce:0").is_err());
        assert!(EntropySpec::parse("fcre:-1").is_err());
        assert!(EntropySpec::parse("renyi").is_err());
    }
}
