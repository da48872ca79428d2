use proptest::prelude::*;
use spacings::asymptotics::{is_estimate, Tail};
use spacings::rate::RateEngine;
use spacings::rng::ReplicateStream;
use spacings::sampler::{exact_mean_var, log_mgf, SpacingPlan};
use spacings::stats;
use spacings::WeightFunction;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn draws_scale_exactly_with_rate(seed in any::<u64>(), n in 1usize..200, lambda in 0.01f64..100.0) {
        for wf in [WeightFunction::w1(), WeightFunction::w3(), WeightFunction::parse("fgce:1.5").unwrap()] {
            let unit = SpacingPlan::new(&wf, n, 1.0, None).unwrap().sample_values(seed, 8);
            let scaled = SpacingPlan::new(&wf, n, lambda, None).unwrap().sample_values(seed, 8);
            for (a, b) in unit.iter().zip(&scaled) {
                prop_assert_eq!(*b, *a / lambda);
            }
        }
    }
}

/// `C_n(w1)` has the law of the mean of `n` i.i.d. `Exp(λ)` variables.
#[test]
fn w1_statistic_is_a_sample_mean() {
    let (n, lambda, reps) = (20, 1.5, 10_000);
    let cn = SpacingPlan::new(&WeightFunction::w1(), n, lambda, None).unwrap().sample_values(11, reps);
    let means: Vec<f64> = (0..reps as u64)
        .map(|r| {
            let mut s = ReplicateStream::new(0xdead_beef, r);
            (0..n).map(|_| s.std_exp()).sum::<f64>() / (n as f64 * lambda)
        })
        .collect();
    let d = stats::ks_two_sample(&cn, &means);
    assert!(d < stats::ks_two_sample_critical_1pct(reps, reps), "KS distance {d}");
}

/// Tilted and plain estimates of `P(C_n ≥ E C_n)` agree within 99% intervals.
#[test]
fn tilting_is_unbiased() {
    let wf = WeightFunction::w2();
    let (n, lambda, reps) = (50, 1.0, 40_000);
    let (mean, _) = exact_mean_var(&wf, n, lambda).unwrap();
    let plain = SpacingPlan::new(&wf, n, lambda, None).unwrap().sample(3, reps);
    let tilted = SpacingPlan::new(&wf, n, lambda, Some(0.05)).unwrap().sample(4, reps);
    let a = is_estimate(&plain, Tail::Upper, mean);
    let b = is_estimate(&tilted, Tail::Upper, mean);
    assert!(a.p_hat > 0.3 && a.p_hat < 0.7);
    let gap = (a.p_hat - b.p_hat).abs();
    assert!(gap <= 2.576 * (a.std_error + b.std_error), "{} vs {}", a.p_hat, b.p_hat);
}

#[test]
fn scaled_log_mgf_approaches_lambda() {
    let n = 10_000;
    for lambda in [0.5, 1.0, 2.0] {
        for wf in [WeightFunction::w1(), WeightFunction::w2()] {
            let theta = lambda / 2.0;
            let finite = log_mgf(&wf, n, lambda, n as f64 * theta).unwrap().to_f64() / n as f64;
            let limit = RateEngine::new(&wf, lambda).unwrap().lambda_w(theta).to_f64();
            assert!((finite - limit).abs() <= 0.01, "{} λ = {lambda}: {finite} vs {limit}", wf.label());
        }
    }
}

#[test]
fn exact_moments_match_samples() {
    let reps = 100_000;
    for (wf, n, lambda) in [
        (WeightFunction::w2(), 30, 1.0),
        (WeightFunction::w3(), 100, 2.0),
        (WeightFunction::parse("fcre:0.5").unwrap(), 40, 0.7),
    ] {
        let xs = SpacingPlan::new(&wf, n, lambda, None).unwrap().sample_values(5, reps);
        let (m, v) = exact_mean_var(&wf, n, lambda).unwrap();
        let sm = stats::mean(&xs);
        let sv = stats::variance(&xs);
        assert!((sm - m).abs() <= 4.0 * (v / reps as f64).sqrt(), "{}: mean {sm} vs {m}", wf.label());
        let m4 = xs.iter().map(|x| (x - sm).powi(4)).sum::<f64>() / reps as f64;
        let se_var = ((m4 - sv * sv) / reps as f64).sqrt();
        assert!((sv - v).abs() <= 4.0 * se_var, "{}: var {sv} vs {v}", wf.label());
    }
}
