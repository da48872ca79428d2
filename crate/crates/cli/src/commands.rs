//! One function per subcommand. Each writes `<command>.json` plus its detail
//! files into the output directory and echoes the JSON to stdout.

use serde::Serialize;

use spacings::asymptotics::{self, AnRule, MdpConfig};
use spacings::entropy::{self, EntropySpec};
use spacings::rate::{LegendrePoint, MomentSummary, RateEngine, Steepness};
use spacings::sampler::{self, SpacingPlan};
use spacings::weights::{self, Condition1Check, Condition2Check, DEFAULT_GRID};
use spacings::{stats, Error, ExtReal, ScoreFunction};

use crate::config::RunConfig;
use crate::input;
use crate::output::{self, num};
use crate::CliError;

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    version: &'static str,
    config: &'a RunConfig,
    result: R,
}

fn emit<R: Serialize>(cfg: &RunConfig, result: R) -> Result<(), CliError> {
    let env = Envelope {
        command: &cfg.command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        result,
    };
    let json = output::to_json(&env)?;
    output::write_text(&cfg.output_dir, &format!("{}.json", cfg.command), &json)?;
    print!("{json}");
    Ok(())
}

pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command.as_str() {
        "check" => check(cfg),
        "rate" => rate(cfg),
        "simulate" => simulate(cfg),
        "verify-ldp" => verify_ldp(cfg),
        "verify-mdp" => verify_mdp(cfg),
        "clt" => clt(cfg),
        "entropy" => entropy(cfg),
        "bridge" => bridge(cfg),
        other => Err(CliError::Validation(format!("unknown command '{other}'"))),
    }
}

#[derive(Serialize)]
struct CheckResult {
    weight: String,
    condition1: bool,
    condition2: bool,
    /// Absent when Condition 2 fails and `Λ_w` has no two-sided domain.
    steep: Option<bool>,
    boundary_slope: Option<ExtReal>,
    theta_min: Option<ExtReal>,
    theta_max: Option<ExtReal>,
    condition1_detail: Condition1Check,
    condition2_detail: Condition2Check,
}

fn check(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let c1 = weights::check_condition1(&wf, DEFAULT_GRID)?;
    let c2 = weights::check_condition2(&wf, cfg.lambda)?;
    let (steep, slope, tmin, tmax) = if c2.holds {
        let engine = RateEngine::new(&wf, cfg.lambda)?;
        let s = engine.check_steepness();
        (Some(s.steep), Some(s.boundary_slope), Some(engine.theta_min()), Some(engine.theta_max()))
    } else {
        (None, None, None, None)
    };
    emit(
        cfg,
        CheckResult {
            weight: wf.label(),
            condition1: c1.holds,
            condition2: c2.holds,
            steep,
            boundary_slope: slope,
            theta_min: tmin,
            theta_max: tmax,
            condition1_detail: c1,
            condition2_detail: c2,
        },
    )
}

#[derive(Serialize)]
struct LambdaRow {
    theta: f64,
    lambda_w: ExtReal,
    lambda_w_prime: ExtReal,
    lambda_w_second: ExtReal,
}

#[derive(Serialize)]
struct LegendreRow {
    #[serde(flatten)]
    point: LegendrePoint,
    /// Relative-entropy upper bound; absent when `h_w` is not positive.
    m_bound: Option<ExtReal>,
}

#[derive(Serialize)]
struct RateResult {
    weight: String,
    theta_min: ExtReal,
    theta_max: ExtReal,
    sup_h: f64,
    inf_h: f64,
    moments: MomentSummary,
    jensen_lower_bound: f64,
    steepness: Steepness,
    m_minimizer: Option<f64>,
    lambda_table: Vec<LambdaRow>,
    legendre_table: Vec<LegendreRow>,
}

/// Default θ grid: 21 points across the effective domain, backed off 1%
/// from finite ends and capped at ±5λ elsewhere.
fn default_theta_grid(engine: &RateEngine) -> Vec<f64> {
    let l = engine.lambda();
    let hi = engine.theta_max().finite().map_or(5.0 * l, |t| 0.99 * t);
    let lo = engine.theta_min().finite().map_or(-5.0 * l, |t| 0.99 * t);
    (0..=20).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect()
}

fn default_y_grid(engine: &RateEngine) -> Vec<f64> {
    let mu = engine.mu_w();
    if mu > 0.0 {
        (1..=12).map(|k| mu * k as f64 / 4.0).collect()
    } else {
        let s = 1.0 / engine.lambda();
        (0..=12).map(|k| mu + s * (k as f64 - 6.0) / 4.0).collect()
    }
}

fn rate(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let engine = RateEngine::new(&wf, cfg.lambda)?;
    let thetas = cfg.theta.clone().unwrap_or_else(|| default_theta_grid(&engine));
    let ys = cfg.y_grid.clone().unwrap_or_else(|| default_y_grid(&engine));

    let lambda_table: Vec<LambdaRow> = thetas
        .iter()
        .map(|&t| LambdaRow {
            theta: t,
            lambda_w: engine.lambda_w(t),
            lambda_w_prime: engine.lambda_w_prime(t),
            lambda_w_second: engine.lambda_w_second(t),
        })
        .collect();

    let m_minimizer = match engine.m_minimizer() {
        Ok(v) => Some(v),
        Err(Error::Positivity { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut legendre_table = Vec::with_capacity(ys.len());
    for &y in &ys {
        let m_bound = if m_minimizer.is_some() && y > 0.0 {
            Some(engine.m_upper_bound(y)?)
        } else {
            None
        };
        legendre_table.push(LegendreRow { point: engine.legendre_point(y), m_bound });
    }

    let dir = &cfg.output_dir;
    output::write_csv(
        dir,
        "lambda.csv",
        &["theta", "lambda_w", "lambda_w_prime", "lambda_w_second"],
        &lambda_table
            .iter()
            .map(|r| {
                vec![
                    num(r.theta),
                    num(r.lambda_w.to_f64()),
                    num(r.lambda_w_prime.to_f64()),
                    num(r.lambda_w_second.to_f64()),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    output::write_csv(
        dir,
        "legendre.csv",
        &["y", "rate", "theta_star", "at_boundary", "m_bound"],
        &legendre_table
            .iter()
            .map(|r| {
                vec![
                    num(r.point.y),
                    num(r.point.value.to_f64()),
                    r.point.theta_star.map_or(String::new(), num),
                    r.point.at_boundary.to_string(),
                    r.m_bound.map_or(String::new(), |m| num(m.to_f64())),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    output::write_tsv(
        dir,
        "lambda.tsv",
        &lambda_table.iter().map(|r| (r.theta, r.lambda_w.to_f64())).collect::<Vec<_>>(),
    )?;
    output::write_tsv(
        dir,
        "legendre.tsv",
        &legendre_table.iter().map(|r| (r.point.y, r.point.value.to_f64())).collect::<Vec<_>>(),
    )?;

    emit(
        cfg,
        RateResult {
            weight: wf.label(),
            theta_min: engine.theta_min(),
            theta_max: engine.theta_max(),
            sup_h: engine.sup_h(),
            inf_h: engine.inf_h(),
            moments: engine.moments(),
            jensen_lower_bound: engine.jensen_lower_bound(),
            steepness: engine.check_steepness(),
            m_minimizer,
            lambda_table,
            legendre_table,
        },
    )
}

#[derive(Serialize)]
struct SimulateResult {
    weight: String,
    exact_mean: f64,
    exact_var: f64,
    sample_mean: f64,
    sample_var: f64,
    /// Self-normalised importance-sampling mean under the original law.
    weighted_mean: Option<f64>,
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let n = cfg.n.unwrap_or(100);
    let reps = cfg.replicates.unwrap_or(1000);
    let plan = SpacingPlan::new(&wf, n, cfg.lambda, cfg.tilt)?;
    let draws = plan.sample(cfg.seed, reps);
    let values: Vec<f64> = draws.iter().map(|d| d.value).collect();
    let (exact_mean, exact_var) = sampler::exact_mean_var(&wf, n, cfg.lambda)?;

    let weighted_mean = plan.is_tilted().then(|| {
        let m = draws.iter().map(|d| d.log_weight).fold(f64::NEG_INFINITY, f64::max);
        let num_ = stats::compensated_sum(draws.iter().map(|d| d.value * (d.log_weight - m).exp()));
        let den = stats::compensated_sum(draws.iter().map(|d| (d.log_weight - m).exp()));
        num_ / den
    });

    let rows: Vec<Vec<String>> = draws
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let lw = if plan.is_tilted() { num(d.log_weight) } else { String::new() };
            vec![i.to_string(), num(d.value), lw]
        })
        .collect();
    output::write_csv(&cfg.output_dir, "simulate.csv", &["replicate", "value", "log_weight"], &rows)?;

    emit(
        cfg,
        SimulateResult {
            weight: wf.label(),
            exact_mean,
            exact_var,
            sample_mean: stats::mean(&values),
            sample_var: stats::variance(&values),
            weighted_mean,
        },
    )
}

fn verify_ldp(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let ys = cfg.y_grid.clone().unwrap_or_default();
    let ns = cfg.n_list.clone().unwrap_or_default();
    let report = asymptotics::verify_ldp(&wf, cfg.lambda, &ys, &ns, cfg.replicates.unwrap_or(10_000), cfg.seed)?;
    for r in report.rows.iter().filter(|r| r.ess_warning) {
        eprintln!("warning: n = {}, y = {}: effective sample size {:.1} is low", r.n, r.y, r.ess);
    }
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.y),
                format!("{:?}", r.tail).to_lowercase(),
                num(r.p_hat),
                num(r.log_p_hat.to_f64()),
                num(r.std_error),
                num(r.empirical_rate.to_f64()),
                num(r.analytic_rate.to_f64()),
                num(r.theta_star),
                r.boundary_tilt.to_string(),
                num(r.ess),
                r.zero_count.to_string(),
            ]
        })
        .collect();
    output::write_csv(
        &cfg.output_dir,
        "ldp.csv",
        &[
            "n",
            "y",
            "tail",
            "p_hat",
            "log_p_hat",
            "std_error",
            "empirical_rate",
            "analytic_rate",
            "theta_star",
            "boundary_tilt",
            "ess",
            "zero_count",
        ],
        &rows,
    )?;
    output::write_tsv(
        &cfg.output_dir,
        "ldp.tsv",
        &report.rows.iter().map(|r| (r.y, r.empirical_rate.to_f64())).collect::<Vec<_>>(),
    )?;
    emit(cfg, report)
}

fn verify_mdp(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let mcfg = MdpConfig {
        an_rule: AnRule::PowerLaw(cfg.rho.unwrap_or(0.5)),
        n_list: cfg.n_list.clone().unwrap_or_default(),
        y_grid: cfg.y_grid.clone().unwrap_or_default(),
        replicates: cfg.replicates.unwrap_or(10_000),
        seed: cfg.seed,
    };
    let report = asymptotics::verify_mdp(&wf, cfg.lambda, &mcfg)?;
    for r in report.rows.iter().filter(|r| r.ess_warning) {
        eprintln!("warning: n = {}, y = {}: effective sample size {:.1} is low", r.n, r.y, r.ess);
    }
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.a_n),
                num(r.y),
                format!("{:?}", r.tail).to_lowercase(),
                num(r.level),
                num(r.target),
                num(r.p_hat),
                num(r.std_error),
                num(r.empirical.to_f64()),
                num(r.abs_gap.to_f64()),
                num(r.tilt_theta),
                num(r.ess),
                r.zero_count.to_string(),
            ]
        })
        .collect();
    output::write_csv(
        &cfg.output_dir,
        "mdp.csv",
        &[
            "n",
            "a_n",
            "y",
            "tail",
            "level",
            "target",
            "p_hat",
            "std_error",
            "empirical",
            "abs_gap",
            "tilt_theta",
            "ess",
            "zero_count",
        ],
        &rows,
    )?;
    output::write_tsv(
        &cfg.output_dir,
        "mdp.tsv",
        &report.rows.iter().map(|r| (r.y, r.empirical.to_f64())).collect::<Vec<_>>(),
    )?;
    emit(cfg, report)
}

fn clt(cfg: &RunConfig) -> Result<(), CliError> {
    let wf = cfg.weight_function()?;
    let report = asymptotics::clt_check(
        &wf,
        cfg.lambda,
        cfg.n.unwrap_or(1000),
        cfg.replicates.unwrap_or(10_000),
        cfg.seed,
    )?;
    emit(cfg, report)
}

#[derive(Serialize)]
struct EntropyResult {
    spec: EntropySpec,
    n: usize,
    /// Estimator computed as a weighted sum of spacings.
    estimate: f64,
    /// Same estimator from the step-function integral over distinct values.
    direct: f64,
    warnings: Vec<String>,
}

fn entropy(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = EntropySpec::parse(cfg.kind.as_deref().unwrap_or("ce"))?;
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Validation("entropy needs --input".into()))?;
    let sample = input::read_sample(path, cfg.column.as_deref())?;
    let value = entropy::empirical_entropy(spec, &sample)?;
    let direct = entropy::entropy_direct(spec, &sample)?;
    let mut warnings = Vec::new();
    if let EntropySpec::FracGce(a) = spec {
        if a < 1.0 {
            warnings.push(format!(
                "fgce:{a}: h_w is unbounded near 1 (Condition 2 fails), so large and moderate deviation results do not apply to this estimator"
            ));
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    emit(
        cfg,
        EntropyResult {
            spec,
            n: sample.len(),
            estimate: value,
            direct,
            warnings,
        },
    )
}

fn bridge(cfg: &RunConfig) -> Result<(), CliError> {
    let score = ScoreFunction::builtin(cfg.score.as_deref().unwrap_or("ce"))?;
    let report = asymptotics::gz_equivalence_check(&score, cfg.lambda, cfg.tol.unwrap_or(1e-5))?;
    emit(cfg, report)
}
