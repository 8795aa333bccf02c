use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::regression::loglog_slope;
use super::svg::{Plot, Series};
use super::table::{Cell, ResultTable};
use super::{Check, ExperimentOutput};
use crate::error::{Error, Result};
use crate::matrix::{norm, Matrix};
use crate::mda::{
    bayes_risk, estimate_error, estimate_excess_risk, fit_mda, generate_labeled, tv_gap_estimate,
};
use crate::mixture::kl_vs_standard_normal;
use crate::numerics::{gauss_hermite_rule, rng_stream, stream_id_for, QuadratureRule, StreamPurpose};
use crate::population::{
    contraction_radius, init_radius, kl_decay_factor, property_report, run_population_em,
    PopulationSetting, RadiusPolicy,
};
use crate::sample::{fit, median, perturbation_sup, IterationBudget, SampleContext};

/// Accepted range for the log–log slope of mean final KL against `n`.
pub const KL_SLOPE_BAND: (f64, f64) = (-1.25, -0.80);
/// Accepted range for the log–log slope of the median perturbation sup.
pub const PERTURBATION_SLOPE_BAND: (f64, f64) = (-0.65, -0.35);
/// Accepted range for the log–log slope of the mean final `‖θ̂‖`.
pub const THETA_SLOPE_BAND: (f64, f64) = (-0.75, -0.25);
/// Excess risk ceiling at the largest sample size of `mda-error`.
pub const EXCESS_CEILING: f64 = 0.01;
/// KL level below which trace ratios are treated as round-off.
pub const TRACE_RATIO_FLOOR: f64 = 1e-14;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::PopTrace => run_pop_trace(cfg),
        ExperimentKind::KlVsN => run_kl_vs_n(cfg),
        ExperimentKind::MdaError => run_mda_error(cfg),
        ExperimentKind::Perturbation => run_perturbation(cfg),
        ExperimentKind::Properties => run_properties(cfg),
    }
}

fn rule_for(cfg: &ExperimentConfig) -> Result<QuadratureRule> {
    gauss_hermite_rule(cfg.quadrature_order)
}

fn budget_for(cfg: &ExperimentConfig) -> IterationBudget {
    IterationBudget {
        c2: cfg.budget_c2,
        delta: cfg.delta,
        t_min: cfg.budget_t_min,
        ..IterationBudget::default()
    }
}

fn in_band(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

fn fmt_slope(fit: &super::SlopeFit) -> String {
    match fit.se() {
        Some(se) => format!("slope {:.4} ± {:.4}", fit.slope, se),
        None => format!("slope {:.4}", fit.slope),
    }
}

/// Population EM traces, one block per `(d, p)`.
pub fn run_pop_trace(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rule = rule_for(cfg)?;
    let mut out = ExperimentOutput::new(cfg);
    let mut table = ResultTable::new(
        "pop_trace",
        &["d", "p", "t", "theta_norm", "sigma_sq", "kl", "kl_ratio", "decay_bound", "within_radius"],
    );

    for &d in &cfg.d {
        let theta0 = norm(&cfg.theta0_for(d)?);
        let mut ps = cfg.p.clone();
        ps.sort_by(|a, b| a.total_cmp(b));
        let mut traces = Vec::new();
        let mut series = Vec::new();
        for &p in &ps {
            let setting = PopulationSetting::new(d, p, rule.clone())?;
            let radius = init_radius(&setting);
            let inside = theta0 < radius;
            if !inside {
                if cfg.strict_radius {
                    return Err(Error::Radius {
                        what: format!("pop-trace start for d={d}, p={p}"),
                        radius,
                        value: theta0,
                    });
                }
                out.notes.push(format!(
                    "d={d}, p={p}: |theta0| = {theta0:.6} exceeds the initialization radius {radius:.6}; \
                     traced anyway, guarantees do not apply"
                ));
            }
            let trace = run_population_em(theta0, cfg.iterations, &setting, RadiusPolicy::DomainOnly)?;
            let factor = kl_decay_factor(theta0, &setting);

            let mut decreasing = true;
            let mut worst_ratio: f64 = 0.0;
            for (i, e) in trace.entries.iter().enumerate() {
                let ratio = (i > 0).then(|| e.kl / trace.entries[i - 1].kl);
                if i > 0 && trace.entries[i - 1].kl >= TRACE_RATIO_FLOOR {
                    decreasing &= e.kl < trace.entries[i - 1].kl;
                    worst_ratio = worst_ratio.max(ratio.unwrap_or(0.0));
                }
                table.push(vec![
                    d.into(),
                    p.into(),
                    e.t.into(),
                    e.theta_norm.into(),
                    e.sigma_sq.into(),
                    e.kl.into(),
                    ratio.into(),
                    factor.into(),
                    Cell::Int(inside as i64),
                ])?;
            }
            out.checks.push(Check::new(
                format!("kl_strictly_decreasing[d={d},p={p}]"),
                decreasing,
                format!("{} entries", trace.len()),
            ));
            out.checks.push(Check::new(
                format!("geometric_decay[d={d},p={p}]"),
                worst_ratio <= factor + 1e-10,
                format!("max KL ratio {worst_ratio:.6e} vs bound 1/(1+c2) = {factor:.6e}"),
            ));
            series.push(Series {
                label: format!("p={p}"),
                points: trace.entries.iter().map(|e| (e.t as f64, e.kl)).collect(),
            });
            traces.push((p, trace));
        }

        // Larger p must give smaller KL at every t ≥ 1.
        for pair in traces.windows(2) {
            let (slow_p, slow) = (&pair[0].0, &pair[0].1);
            let (fast_p, fast) = (&pair[1].0, &pair[1].1);
            let mut violations = Vec::new();
            for t in 1..=cfg.iterations {
                let s = slow.entries.get(t).map(|e| e.kl);
                let f = fast.entries.get(t).map(|e| e.kl);
                let ok = match (s, f) {
                    (Some(s), Some(f)) => f < s,
                    (Some(s), None) => fast.last().is_none_or(|e| e.kl < s),
                    (None, Some(_)) => false,
                    (None, None) => true,
                };
                if !ok {
                    violations.push(t);
                }
            }
            let detail = match violations.last() {
                None => format!("ordered at every t in 1..={}", cfg.iterations),
                Some(&last) => format!(
                    "violated at t = {violations:?}; ordered for t >= {}",
                    last + 1
                ),
            };
            out.checks.push(Check::new(
                format!("p_ordering[d={d},p={fast_p}<p={slow_p}]"),
                violations.is_empty(),
                detail,
            ));
        }

        out.plots.push((
            format!("pop_trace_d{d}"),
            Plot {
                title: format!("Population EM, d = {d}, |theta0| = {theta0:.4}"),
                x_label: "iteration t".into(),
                y_label: "KL".into(),
                log_x: false,
                log_y: true,
                series,
            },
        ));
    }
    out.add_table(table);
    Ok(out)
}

fn standard_normal_sample(n: usize, d: usize, seed: u64, stream: u64) -> Matrix {
    let mut rng = rng_stream(seed, stream);
    let mut v = vec![0.0; n * d];
    rng.fill_normal(&mut v);
    Matrix::from_vec(n, d, v).expect("shape")
}

fn train_stream(n_index: usize, rep: usize) -> u64 {
    stream_id_for(StreamPurpose::Train, ((n_index as u64) << 24) | rep as u64)
}

/// Final KL of sample EM versus `n`, with a log–log slope.
pub fn run_kl_vs_n(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rule = rule_for(cfg)?;
    let budget = budget_for(cfg);
    let d = cfg.d[0];
    let p = cfg.p[0];
    let theta0 = cfg.theta0_for(d)?;
    let mut out = ExperimentOutput::new(cfg);

    let jobs: Vec<(usize, usize)> = (0..cfg.n_list.len())
        .flat_map(|i| (0..cfg.replications).map(move |r| (i, r)))
        .collect();
    let results: Vec<Result<(f64, f64, f64, usize)>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let n = cfg.n_list[i];
            let data = standard_normal_sample(n, d, cfg.base_seed, train_stream(i, r));
            let ctx = SampleContext::new(data, p)?;
            let (params, trace) = fit(&ctx, &theta0, &budget, &rule)?;
            let kl = kl_vs_standard_normal(&params, &rule)?;
            Ok((kl, params.theta_norm(), params.sigma_sq(), trace.len() - 1))
        })
        .collect();

    let mut runs = ResultTable::new(
        "kl_vs_n_runs",
        &["n", "replication", "final_kl", "theta_norm", "sigma_sq", "iterations", "status"],
    );
    let mut per_n: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.n_list.len()];
    let mut failed = vec![0usize; cfg.n_list.len()];
    for (&(i, r), res) in jobs.iter().zip(&results) {
        let n = cfg.n_list[i];
        match res {
            Ok((kl, tn, s, iters)) => {
                per_n[i].push((*kl, *tn));
                runs.push(vec![
                    n.into(),
                    r.into(),
                    (*kl).into(),
                    (*tn).into(),
                    (*s).into(),
                    (*iters).into(),
                    "ok".into(),
                ])?;
            }
            Err(e) => {
                if matches!(e, Error::Radius { .. }) {
                    return Err(Error::Radius {
                        what: "kl-vs-n starting point".into(),
                        radius: match e {
                            Error::Radius { radius, .. } => *radius,
                            _ => unreachable!(),
                        },
                        value: norm(&theta0),
                    });
                }
                failed[i] += 1;
                runs.push(vec![
                    n.into(),
                    r.into(),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    format!("failed: {e}").into(),
                ])?;
            }
        }
    }

    let mut summary = ResultTable::new(
        "kl_vs_n_summary",
        &["n", "mean_kl", "se_mean_kl", "mean_theta_norm", "se_mean_theta_norm", "reps_ok", "reps_failed"],
    );
    let (mut ns, mut kls, mut kl_rel, mut thetas, mut theta_rel) = (vec![], vec![], vec![], vec![], vec![]);
    for (i, vals) in per_n.iter().enumerate() {
        let n = cfg.n_list[i];
        let k = vals.len();
        if k == 0 {
            summary.push(vec![n.into(), Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing, 0usize.into(), failed[i].into()])?;
            continue;
        }
        let mean_se = |f: &dyn Fn(&(f64, f64)) -> f64| {
            let m = vals.iter().map(f).sum::<f64>() / k as f64;
            let se = if k > 1 {
                (vals.iter().map(|v| (f(v) - m).powi(2)).sum::<f64>() / (k - 1) as f64 / k as f64).sqrt()
            } else {
                f64::NAN
            };
            (m, se)
        };
        let (mk, sk) = mean_se(&|v| v.0);
        let (mt, st) = mean_se(&|v| v.1);
        summary.push(vec![n.into(), mk.into(), sk.into(), mt.into(), st.into(), k.into(), failed[i].into()])?;
        ns.push(n as f64);
        kls.push(mk);
        kl_rel.push(sk / mk);
        thetas.push(mt);
        theta_rel.push(st / mt);
    }
    let total_failed: usize = failed.iter().sum();
    if total_failed > 0 {
        out.notes.push(format!("{total_failed} replications failed and were excluded"));
    }

    let distinct = {
        let mut v = ns.clone();
        v.dedup();
        v.len()
    };
    let kl_fit = if distinct >= 2 {
        let se = kl_rel.iter().all(|s| s.is_finite()).then_some(kl_rel.as_slice());
        loglog_slope(&ns, &kls, se)
    } else {
        None
    };
    let theta_fit = if distinct >= 2 {
        let se = theta_rel.iter().all(|s| s.is_finite()).then_some(theta_rel.as_slice());
        loglog_slope(&ns, &thetas, se)
    } else {
        None
    };
    match &kl_fit {
        Some(f) => out.checks.push(Check::new(
            "kl_slope_in_band",
            in_band(f.slope, KL_SLOPE_BAND),
            format!("{} (band [{}, {}])", fmt_slope(f), KL_SLOPE_BAND.0, KL_SLOPE_BAND.1),
        )),
        None => out
            .notes
            .push("KL slope undefined: fewer than two distinct sample sizes with successful fits".into()),
    }
    if let Some(f) = &theta_fit {
        out.checks.push(Check::new(
            "theta_norm_slope_in_band",
            in_band(f.slope, THETA_SLOPE_BAND),
            format!("{} (band [{}, {}])", fmt_slope(f), THETA_SLOPE_BAND.0, THETA_SLOPE_BAND.1),
        ));
    }
    out.slopes.insert("log_mean_kl_vs_log_n".into(), kl_fit);
    out.slopes.insert("log_mean_theta_norm_vs_log_n".into(), theta_fit);

    out.plots.push((
        "kl_vs_n".into(),
        Plot {
            title: format!("Mean final KL vs n (d = {d}, p = {p})"),
            x_label: "n".into(),
            y_label: "mean KL".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "mean KL".into(),
                points: ns.iter().copied().zip(kls.iter().copied()).collect(),
            }],
        },
    ));
    out.add_table(runs);
    out.add_table(summary);
    Ok(out)
}

struct MdaRun {
    error: f64,
    ci: f64,
    excess: f64,
    excess_se: f64,
    tv_plus: f64,
    tv_plus_se: f64,
    tv_minus: f64,
    tv_minus_se: f64,
    theta_norm: f64,
    sigma_sq: f64,
    kl: f64,
}

/// Excess classification risk of the fitted MDA rule versus `n`.
pub fn run_mda_error(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rule = rule_for(cfg)?;
    let budget = budget_for(cfg);
    let d = cfg.d[0];
    let p = cfg.p[0];
    let mu = cfg.mu.clone();
    if mu.len() != d {
        return Err(Error::Config(format!("mu has {} entries but d = {d}", mu.len())));
    }
    if cfg.n_list.len() < 3 {
        return Err(Error::Config("mda-error needs at least 3 sample sizes".into()));
    }
    if cfg.test_size < 100_000 {
        return Err(Error::Config("mda-error needs a test size of at least 1e5".into()));
    }
    let theta0 = cfg.theta0_for(d)?;
    let bayes = bayes_risk(norm(&mu));
    let mut out = ExperimentOutput::new(cfg);

    let jobs: Vec<(usize, usize)> = (0..cfg.n_list.len())
        .flat_map(|i| (0..cfg.seeds).map(move |s| (i, s)))
        .collect();
    let results: Vec<Result<MdaRun>> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let n = cfg.n_list[i];
            let seed = cfg.base_seed;
            let mut train = rng_stream(seed, train_stream(i, s));
            let ds = generate_labeled(&mu, n, &mut train)?;
            let (model, _) = fit_mda(&ds, p, &theta0, &budget, &rule)?;
            // Test and TV draws depend on the seed only, so all sample sizes
            // are scored on the same points.
            let mut test = rng_stream(seed, stream_id_for(StreamPurpose::Test, s as u64));
            let err = estimate_error(&model, &mu, cfg.test_size, &mut test)?;
            let mut ex = rng_stream(seed, stream_id_for(StreamPurpose::Excess, s as u64));
            let excess = estimate_excess_risk(&model, &mu, cfg.test_size, &mut ex)?;
            let mut tp = rng_stream(seed, stream_id_for(StreamPurpose::TvPlus, s as u64));
            let tv_plus = tv_gap_estimate(&model, &mu, 1, cfg.mc_size, &mut tp)?;
            let mut tm = rng_stream(seed, stream_id_for(StreamPurpose::TvMinus, s as u64));
            let tv_minus = tv_gap_estimate(&model, &mu, -1, cfg.mc_size, &mut tm)?;
            Ok(MdaRun {
                error: err.rate,
                ci: err.ci_half_width,
                excess: excess.value,
                excess_se: excess.se,
                tv_plus: tv_plus.value,
                tv_plus_se: tv_plus.se,
                tv_minus: tv_minus.value,
                tv_minus_se: tv_minus.se,
                theta_norm: model.mixture().theta_norm(),
                sigma_sq: model.mixture().sigma_sq(),
                kl: kl_vs_standard_normal(model.mixture(), &rule)?,
            })
        })
        .collect();

    let mut table = ResultTable::new(
        "mda_error_runs",
        &[
            "n", "seed", "error_rate", "ci", "raw_excess", "excess_risk", "excess_se", "tv_plus",
            "tv_minus", "tv_plus_se", "tv_minus_se", "theta_norm", "sigma_sq", "kl",
        ],
    );
    let mut per_n: Vec<Vec<f64>> = vec![Vec::new(); cfg.n_list.len()];
    let mut sandwich_ok = true;
    let mut sandwich_worst = f64::INFINITY;
    let mut nonneg = true;
    let mut failed = 0;
    for (&(i, s), res) in jobs.iter().zip(results) {
        let run = match res {
            Ok(r) => r,
            Err(e @ Error::Radius { .. }) => return Err(e),
            Err(e) => {
                failed += 1;
                out.notes.push(format!("n={}, seed={s}: excluded ({e})", cfg.n_list[i]));
                continue;
            }
        };
        per_n[i].push(run.excess);
        let noise = (run.excess_se.powi(2) + run.tv_plus_se.powi(2) + run.tv_minus_se.powi(2)).sqrt();
        let slack = run.tv_plus + run.tv_minus + 3.0 * noise - run.excess;
        sandwich_worst = sandwich_worst.min(slack);
        sandwich_ok &= slack >= 0.0;
        nonneg &= run.excess >= -run.excess_se;
        table.push(vec![
            cfg.n_list[i].into(),
            s.into(),
            run.error.into(),
            run.ci.into(),
            (run.error - bayes).into(),
            run.excess.into(),
            run.excess_se.into(),
            run.tv_plus.into(),
            run.tv_minus.into(),
            run.tv_plus_se.into(),
            run.tv_minus_se.into(),
            run.theta_norm.into(),
            run.sigma_sq.into(),
            run.kl.into(),
        ])?;
    }
    if failed > 0 {
        out.notes.push(format!("{failed} runs failed and were excluded"));
    }

    let mut summary = ResultTable::new("mda_error_summary", &["n", "median_excess_risk", "runs"]);
    let mut ns = Vec::new();
    let mut medians = Vec::new();
    for (i, vals) in per_n.iter().enumerate() {
        let med = (!vals.is_empty()).then(|| median(vals));
        summary.push(vec![cfg.n_list[i].into(), med.into(), vals.len().into()])?;
        if let Some(m) = med {
            ns.push(cfg.n_list[i] as f64);
            medians.push(m);
        }
    }
    let nonincreasing = medians.windows(2).all(|w| w[1] <= w[0]);
    out.checks.push(Check::new(
        "median_excess_nonincreasing",
        nonincreasing && medians.len() == cfg.n_list.len(),
        format!("medians {medians:?}"),
    ));
    let last = medians.last().copied().unwrap_or(f64::NAN);
    out.checks.push(Check::new(
        "excess_at_largest_n_below_ceiling",
        last < EXCESS_CEILING,
        format!("median excess {last:.3e} at n = {} (ceiling {EXCESS_CEILING})", cfg.n_list.last().unwrap()),
    ));
    out.checks.push(Check::new(
        "tv_sandwich",
        sandwich_ok,
        format!("worst slack tv+ + tv- + 3se - excess = {sandwich_worst:.3e}"),
    ));
    out.checks.push(Check::new(
        "excess_not_below_bayes",
        nonneg,
        "excess risk >= -se on every run",
    ));
    let fit = loglog_slope(&ns, &medians, None);
    out.slopes.insert("log_median_excess_vs_log_n".into(), fit);
    out.notes.push(format!("Bayes risk Phi(-|mu|) = {bayes:.12}"));

    out.plots.push((
        "mda_excess".into(),
        Plot {
            title: format!("Median excess risk vs n (|mu| = {:.3})", norm(&mu)),
            x_label: "n".into(),
            y_label: "excess risk".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "median".into(),
                points: ns.iter().copied().zip(medians.iter().copied()).collect(),
            }],
        },
    ));
    out.add_table(table);
    out.add_table(summary);
    Ok(out)
}

/// `sup |mₙ − m|` over `[0, r]` versus `n`.
pub fn run_perturbation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rule = rule_for(cfg)?;
    let setting = PopulationSetting::new(cfg.d[0], cfg.p[0], rule)?;
    let mut out = ExperimentOutput::new(cfg);
    let mut runs = ResultTable::new("perturbation_runs", &["n", "seed", "sup_gap"]);
    let mut summary = ResultTable::new("perturbation_summary", &["n", "median", "q10", "q90"]);
    let mut ns = Vec::new();
    let mut medians = Vec::new();
    for &n in &cfg.n_list {
        let stats = perturbation_sup(&setting, n, cfg.radius, cfg.grid_size, cfg.seeds, cfg.base_seed)?;
        for (s, &sup) in stats.sups.iter().enumerate() {
            runs.push(vec![n.into(), s.into(), sup.into()])?;
        }
        summary.push(vec![n.into(), stats.median.into(), stats.q10.into(), stats.q90.into()])?;
        ns.push(n as f64);
        medians.push(stats.median);
    }
    let fit = loglog_slope(&ns, &medians, None);
    match &fit {
        Some(f) => out.checks.push(Check::new(
            "perturbation_slope_in_band",
            in_band(f.slope, PERTURBATION_SLOPE_BAND),
            format!(
                "{} (band [{}, {}])",
                fmt_slope(f),
                PERTURBATION_SLOPE_BAND.0,
                PERTURBATION_SLOPE_BAND.1
            ),
        )),
        None => out.notes.push("perturbation slope undefined: need two distinct n".into()),
    }
    out.slopes.insert("log_median_sup_vs_log_n".into(), fit);
    out.notes.push(format!(
        "at theta = 0 the sample operator equals (2p-1)*mean(Z) = {:.2}*mean(Z), so the sup is positive even for r = 0",
        2.0 * cfg.p[0] - 1.0
    ));
    out.plots.push((
        "perturbation".into(),
        Plot {
            title: format!("Median sup |m_n - m| on [0, {}]", cfg.radius),
            x_label: "n".into(),
            y_label: "sup gap".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "median".into(),
                points: ns.iter().copied().zip(medians.iter().copied()).collect(),
            }],
        },
    ));
    out.add_table(runs);
    out.add_table(summary);
    Ok(out)
}

/// Contraction, convexity, PL and lower-bound checks over `(d, p)`.
pub fn run_properties(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rule = rule_for(cfg)?;
    let mut out = ExperimentOutput::new(cfg);
    let mut table = ResultTable::new(
        "properties",
        &["d", "p", "theta0", "rho", "init_radius", "property", "status", "worst_margin", "points"],
    );
    const NAMES: [&str; 5] = [
        "m_slope_below_one",
        "contraction",
        "convexity",
        "pl_inequality",
        "m_lower_bound",
    ];
    for &d in &cfg.d {
        for &p in &cfg.p {
            let setting = PopulationSetting::new(d, p, rule.clone())?;
            let radius = init_radius(&setting);
            let theta0 = if cfg.theta0.is_empty() {
                cfg.radius_fraction * radius
            } else {
                norm(&cfg.theta0)
            };
            if !(theta0 < radius) || theta0 >= contraction_radius(&setting) {
                for name in NAMES {
                    table.push(vec![
                        d.into(),
                        p.into(),
                        theta0.into(),
                        Cell::Missing,
                        radius.into(),
                        name.into(),
                        "skipped: radius".into(),
                        Cell::Missing,
                        0usize.into(),
                    ])?;
                }
                out.notes.push(format!(
                    "d={d}, p={p}: theta0 {theta0:.6} outside radius {radius:.6}, skipped"
                ));
                continue;
            }
            let report = property_report(&setting, theta0, cfg.grid_size)?;
            for c in &report.checks {
                table.push(vec![
                    d.into(),
                    p.into(),
                    theta0.into(),
                    report.rho.into(),
                    report.init_radius.into(),
                    c.name.into(),
                    if c.passed { "pass" } else { "fail" }.into(),
                    c.worst_margin.into(),
                    c.points.into(),
                ])?;
            }
            out.checks.push(Check::new(
                format!("properties[d={d},p={p}]"),
                report.all_passed(),
                format!("theta0 = {theta0:.6}, rho = {:.6}", report.rho),
            ));
        }
    }
    out.add_table(table);
    Ok(out)
}
