use proptest::prelude::*;
use spacings::rate::RateEngine;
use spacings::{ExtReal, WeightFunction};

fn bounded_weights() -> Vec<WeightFunction> {
    vec![
        WeightFunction::w1(),
        WeightFunction::w2(),
        WeightFunction::w3(),
        WeightFunction::parse("fgce:1").unwrap(),
        WeightFunction::parse("fgce:2").unwrap(),
        WeightFunction::parse("fcre:0").unwrap(),
        WeightFunction::parse("score:indicator").unwrap(),
    ]
}

fn weight_strategy() -> impl Strategy<Value = WeightFunction> {
    (0..bounded_weights().len()).prop_map(|i| bounded_weights().swap_remove(i))
}

fn fin(x: ExtReal) -> f64 {
    x.finite().expect("finite value")
}

/// Interior θ grid staying 5% away from finite domain ends.
fn theta_grid(e: &RateEngine, points: usize) -> Vec<f64> {
    let hi = e.theta_max().finite().map_or(3.0 * e.lambda(), |t| 0.95 * t);
    let lo = e.theta_min().finite().map_or(-3.0 * e.lambda(), |t| 0.95 * t);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_vanishes_at_zero_and_is_convex(wf in weight_strategy(), lambda in 0.2f64..5.0) {
        let e = RateEngine::new(&wf, lambda).unwrap();
        prop_assert_eq!(e.lambda_w(0.0), ExtReal::Finite(0.0));
        let ts = theta_grid(&e, 25);
        let vs: Vec<f64> = ts.iter().map(|&t| fin(e.lambda_w(t))).collect();
        for i in 1..ts.len() - 1 {
            let d2 = vs[i + 1] - 2.0 * vs[i] + vs[i - 1];
            prop_assert!(d2 >= -1e-8, "{}: second difference {d2} at θ = {}", wf.label(), ts[i]);
        }
    }

    #[test]
    fn derivatives_match_finite_differences(wf in weight_strategy(), lambda in 0.2f64..5.0) {
        let e = RateEngine::new(&wf, lambda).unwrap();
        let step = 1e-4 * lambda;
        for t in theta_grid(&e, 9) {
            let fd1 = (fin(e.lambda_w(t + step)) - fin(e.lambda_w(t - step))) / (2.0 * step);
            let d1 = fin(e.lambda_w_prime(t));
            prop_assert!((fd1 - d1).abs() <= 1e-6f64.max(1e-4 * d1.abs()), "Λ' at {t}: {d1} vs {fd1}");

            let fd2 = (fin(e.lambda_w_prime(t + step)) - fin(e.lambda_w_prime(t - step))) / (2.0 * step);
            let d2 = fin(e.lambda_w_second(t));
            prop_assert!((fd2 - d2).abs() <= 1e-6f64.max(1e-4 * d2.abs()), "Λ'' at {t}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn legendre_is_nonnegative_convex_and_vanishes_at_mean(wf in weight_strategy(), lambda in 0.2f64..5.0) {
        let e = RateEngine::new(&wf, lambda).unwrap();
        let mu = e.mu_w();
        prop_assert!(fin(e.legendre(mu)) <= 1e-10);
        let ys: Vec<f64> = (0..30).map(|i| mu * (0.2 + 0.1 * i as f64)).collect();
        let vs: Vec<f64> = ys.iter().map(|&y| e.legendre(y).to_f64()).collect();
        for v in &vs {
            prop_assert!(*v >= 0.0);
        }
        for i in 1..ys.len() - 1 {
            if vs[i + 1].is_finite() {
                prop_assert!(vs[i + 1] - 2.0 * vs[i] + vs[i - 1] >= -1e-8, "{} at y = {}", wf.label(), ys[i]);
            }
        }
    }

    #[test]
    fn legendre_duality(wf in weight_strategy(), lambda in 0.2f64..5.0, frac in 0.3f64..1.8) {
        let e = RateEngine::new(&wf, lambda).unwrap();
        let y = e.mu_w() * frac;
        let p = e.legendre_point(y);
        if let (Some(t), false) = (p.theta_star, p.at_boundary) {
            prop_assert!((fin(e.lambda_w_prime(t)) - y).abs() <= 1e-8);
            let v = t * y - fin(e.lambda_w(t));
            prop_assert!((v - fin(p.value)).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn scale_covariance(wf in weight_strategy(), lambda in 0.2f64..5.0, u in -0.9f64..0.9) {
        let e = RateEngine::new(&wf, lambda).unwrap();
        let e1 = RateEngine::new(&wf, 1.0).unwrap();
        let theta = u * fin(e.theta_max());
        prop_assert!((fin(e.lambda_w(theta)) - fin(e1.lambda_w(theta / lambda))).abs() <= 1e-10);
        prop_assert!((e.mu_w() - e1.mu_w() / lambda).abs() <= 1e-12 * e.mu_w().abs().max(1.0));
        prop_assert!((e.sigma2_w() - e1.sigma2_w() / (lambda * lambda)).abs() <= 1e-12 * e.sigma2_w().max(1.0));
    }
}

#[test]
fn theta_grid_helper_excludes_boundary() {
    let e = RateEngine::new(&WeightFunction::w3(), 1.0).unwrap();
    assert!(theta_grid(&e, 5).iter().all(|&t| t < 1.0));
}

#[test]
fn scaled_w1_closed_forms() {
    for gamma in [0.5, 2.0] {
        for lambda in [0.5, 1.0, 3.0] {
            let l = WeightFunction::scaled_w1(gamma).unwrap();
            let e = RateEngine::new(&l, lambda).unwrap();
            let e1 = RateEngine::new(&WeightFunction::w1(), lambda).unwrap();
            assert!((fin(e.theta_max()) - lambda / gamma).abs() < 1e-12);
            for i in 0..40 {
                let theta = -3.0 * lambda + (3.0 * lambda + 0.99 * lambda / gamma) * i as f64 / 39.0;
                assert!((fin(e.lambda_w(theta)) - fin(e1.lambda_w(theta * gamma))).abs() < 1e-10);
            }
            for i in 1..=40 {
                let y = 0.1 * i as f64 / lambda;
                let r = lambda * y / gamma;
                let exact = r - 1.0 - r.ln();
                assert!((fin(e.legendre(y)) - exact).abs() < 1e-8, "γ = {gamma}, λ = {lambda}, y = {y}");
            }
        }
    }
}

#[test]
fn relative_entropy_bound_dominates_rate() {
    for wf in [WeightFunction::w1(), WeightFunction::w3(), WeightFunction::scaled_w1(2.0).unwrap()] {
        for lambda in [0.5, 1.0, 2.0] {
            let e = RateEngine::new(&wf, lambda).unwrap();
            for i in 1..=40 {
                let y = 0.1 * i as f64 * e.mu_w();
                let m = e.m_upper_bound(y).unwrap().to_f64();
                let r = e.legendre(y).to_f64();
                assert!(m - r >= -1e-8, "{} λ = {lambda} y = {y}: M = {m}, Λ* = {r}", wf.label());
            }
        }
    }
}

/// Golden-section search on `M_w` against the engine's minimiser and the
/// closed forms `(2 − β)/λ` for `(1−x)^β` and `γ/λ` for `γ(1−x)`.
#[test]
fn m_minimizer_matches_search() {
    let lambda = 1.3;
    for (wf, exact) in [
        (WeightFunction::poly(1.5).unwrap(), 0.5 / lambda),
        (WeightFunction::scaled_w1(2.0).unwrap(), 2.0 / lambda),
    ] {
        let e = RateEngine::new(&wf, lambda).unwrap();
        let ybar = e.m_minimizer().unwrap();
        assert!((ybar - exact).abs() < 1e-8, "{}: ȳ {ybar} vs {exact}", wf.label());
        let m = |y: f64| e.m_upper_bound(y).unwrap().to_f64();
        let (mut a, mut b) = (1e-3, 10.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-9 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if m(c) < m(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let found = 0.5 * (a + b);
        assert!((found - ybar).abs() < 1e-6, "{}: search {found} vs ȳ {ybar}", wf.label());
    }
}

#[test]
fn m_bound_is_infinite_when_inverse_h_diverges() {
    let e = RateEngine::new(&WeightFunction::w3(), 1.0).unwrap();
    assert_eq!(e.m_minimizer().unwrap(), 0.0);
    assert!(e.m_upper_bound(0.7).unwrap().is_pos_inf());
}
