use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use assoc_walk::gaussian::{conditional_tilt_coeffs, gaussian_tilt, martingale_coeffs, martingale_mass, tilt_density_mass};
use assoc_walk::io::MarkovSpec;
use assoc_walk::markov::{
    associated, duality_roundtrip, one_step_martingale_identity, perron_eigenvalue, solve_tilt, SolveOptions,
};
use assoc_walk::queueing::{
    comparison_factor, key_parameter, mm1_theta, simulate_queue, tail_decay_batch_stderr, tail_decay_estimate, Arrivals,
    ServiceDist,
};
use assoc_walk::verify::{
    assumption1_scan, assumption2_convergence, cylinder_errors_decreasing, martingale_mc_test, phi_sweep,
    GaussianTarget, MarkovTarget, ScanMode, TiltTarget, Trend,
};
use assoc_walk::{defaults, MarkovModel64};

use crate::config::{self, *};
use crate::csv::{cell, opt, Table};
use crate::{CliError, Common, Output};

fn resolve_seed(flag: Option<u64>, configured: Option<u64>) -> u64 {
    flag.or(configured).unwrap_or_else(|| rand::rng().random())
}

fn to_json<C: Serialize>(cfg: &C) -> Result<Value, CliError> {
    serde_json::to_value(cfg).map_err(|e| CliError::Numerical(format!("cannot serialise config: {e}")))
}

fn load_config<C: serde::de::DeserializeOwned>(c: &Common, command: &str) -> Result<C, CliError> {
    let value = config::load(c.config.as_deref(), command, true)?.expect("required config is present");
    config::parse(value)
}

fn markov_setup(
    spec: &MarkovSpec,
    eigen_tol: f64,
    root_tol: f64,
    theta_cap: f64,
) -> Result<(MarkovModel64, SolveOptions<f64>), CliError> {
    check_positive("eigen_tol", eigen_tol)?;
    check_positive("root_tol", root_tol)?;
    check_positive("theta_cap", theta_cap)?;
    let model = spec.to_model()?;
    Ok((
        model,
        SolveOptions {
            eigen_tol,
            root_tol,
            theta_cap,
        },
    ))
}

pub fn markov_solve(c: &Common) -> Result<Output, CliError> {
    let mut cfg: MarkovConfig = load_config(c, "markov solve")?;
    cfg.seed = Some(resolve_seed(c.seed, cfg.seed));
    let (model, opts) = markov_setup(&cfg.model, cfg.eigen_tol, cfg.root_tol, cfg.theta_cap)?;
    let tilt = solve_tilt(&model, &opts)?;
    let lambda = perron_eigenvalue(&model, tilt.theta, cfg.eigen_tol)?;
    Ok(Output {
        command: "markov solve",
        config: to_json(&cfg)?,
        result: json!({
            "theta": tilt.theta,
            "v": tilt.v,
            "c": tilt.c,
            "q": tilt.q,
            "eigenvalue_residual": (lambda - 1.0).abs(),
        }),
        csv: None,
        failures: Vec::new(),
    })
}

pub fn markov_associate(c: &Common) -> Result<Output, CliError> {
    let mut cfg: MarkovConfig = load_config(c, "markov associate")?;
    cfg.seed = Some(resolve_seed(c.seed, cfg.seed));
    let (model, opts) = markov_setup(&cfg.model, cfg.eigen_tol, cfg.root_tol, cfg.theta_cap)?;
    let tilt = solve_tilt(&model, &opts)?;
    let assoc = associated(&model, &tilt)?;
    let duality = duality_roundtrip(&model, &tilt, cfg.eigen_tol)?;
    Ok(Output {
        command: "markov associate",
        config: to_json(&cfg)?,
        result: json!({
            "theta": tilt.theta,
            "P*": assoc.transition().to_rows(),
            "pi*": assoc.pi(),
            "duality_error": duality.max_abs_error,
            "dual_eigenvalue": duality.dual_eigenvalue,
            "associated_model": MarkovSpec::from_model(&assoc),
        }),
        csv: None,
        failures: Vec::new(),
    })
}

pub fn gauss_solve(c: &Common) -> Result<Output, CliError> {
    let mut cfg: GaussConfig = load_config(c, "gauss solve")?;
    cfg.seed = Some(resolve_seed(c.seed, cfg.seed));
    let model = cfg.model.to_model()?;
    let tilt = gaussian_tilt(&model)?;
    Ok(Output {
        command: "gauss solve",
        config: to_json(&cfg)?,
        result: json!({"theta": tilt.theta, "R": tilt.r_sum, "S": tilt.s_sum, "q": tilt.q}),
        csv: None,
        failures: Vec::new(),
    })
}

pub fn queue_run(c: &Common) -> Result<Output, CliError> {
    let mut cfg: QueueConfig = load_config(c, "queue run")?;
    let seed = resolve_seed(c.seed, cfg.seed);
    cfg.seed = Some(seed);
    check_positive("root_tol", cfg.root_tol)?;
    let burn_in = *cfg
        .burn_in
        .get_or_insert((cfg.customers as f64 * defaults::BURN_IN_FRACTION) as usize);
    let model = cfg.model.to_model()?;

    let theta = match (&model.arrivals, &model.service) {
        (Arrivals::Poisson { lambda }, ServiceDist::Exponential { mu }) => mm1_theta(*lambda, *mu)?,
        _ => key_parameter(&model, cfg.root_tol)?,
    };
    let residual = (model.service.log_mgf(theta) + model.arrivals.log_factor(theta)).exp() - 1.0;
    let comparison = match (&model.arrivals, &model.service) {
        (Arrivals::Appointments { lambda, .. }, ServiceDist::Exponential { mu }) => json!({
            "factor": comparison_factor(*lambda, *mu),
            "theta_random_arrivals": mu - lambda,
        }),
        _ => Value::Null,
    };

    let sample = simulate_queue(&model, cfg.customers, burn_in, seed)?;
    let fit = tail_decay_estimate(&sample, cfg.tail_lower_q, cfg.tail_upper_q)?;
    // batch means when every batch has enough tail mass, else the
    // (optimistic) regression stderr
    let (stderr, stderr_method) =
        match tail_decay_batch_stderr(&sample.waits, cfg.tail_lower_q, cfg.tail_upper_q, cfg.stderr_batches) {
            Ok(se) => (se, "batch_means"),
            Err(_) => (fit.stderr, "regression"),
        };
    let mut table = Table::new(&["x", "log_survival"]);
    for (x, ls) in &fit.points {
        table.push(vec![cell(x), cell(ls)]);
    }
    Ok(Output {
        command: "queue run",
        config: to_json(&cfg)?,
        result: json!({
            "theta_analytic": theta,
            "residual": residual,
            "theta_hat": fit.theta_hat,
            "stderr": stderr,
            "stderr_method": stderr_method,
            "regression_stderr": fit.stderr,
            "n_positive": fit.n_positive,
            "comparison": comparison,
        }),
        csv: Some(table),
        failures: Vec::new(),
    })
}

fn parse_trend(s: &str) -> Result<Trend, CliError> {
    match s {
        "decreasing" => Ok(Trend::Decreasing),
        "flat" => Ok(Trend::Flat),
        "increasing" => Ok(Trend::Increasing),
        "mixed" => Ok(Trend::Mixed),
        other => Err(CliError::Input(format!("unknown trend `{other}`"))),
    }
}

/// Collected outcome of one suite.
struct Suite<'a> {
    label: String,
    report: serde_json::Map<String, Value>,
    failures: Vec<String>,
    csv: &'a mut Table,
}

impl Suite<'_> {
    fn record(&mut self, check: &str, passed: bool, detail: Value, why: impl FnOnce() -> String) {
        let mut entry = json!({"passed": passed});
        if let (Value::Object(e), Value::Object(d)) = (&mut entry, detail) {
            e.extend(d);
        }
        self.report.insert(check.into(), entry);
        if !passed {
            self.failures.push(format!("{}/{check}: {}", self.label, why()));
        }
    }

    fn row(&mut self, check: &str, param: String, m: String, n: String, value: f64, stderr: Option<f64>) {
        self.csv
            .push(vec![self.label.clone(), check.into(), param, m, n, cell(value), opt(stderr)]);
    }
}

fn csv_table() -> Table {
    Table::new(&["suite", "check", "param", "m", "n", "value", "stderr"])
}

fn run_scan(suite: &mut Suite, target: &dyn TiltTarget<f64>, cfg: &ScanConfig, seed: u64) -> Result<(), CliError> {
    check_positive("scan.tol", cfg.tol)?;
    let theta = target.theta();
    let exact = assumption1_scan(target, theta, &cfg.n_grid, ScanMode::Exact, cfg.tol)?;
    for r in &exact.rows {
        suite.row("scan", "exact".into(), String::new(), cell(r.n), r.value, None);
    }
    let mut detail = json!({
        "theta": theta,
        "n_grid": cfg.n_grid,
        "values": exact.rows.iter().map(|r| r.value).collect::<Vec<_>>(),
        "final_delta": exact.final_delta,
        "q_hat": exact.q_hat,
        "converged": exact.converged,
    });
    let mut passed = exact.converged;
    let mut why = format!("final delta {:e} not below {:e}", exact.final_delta, cfg.tol);
    if let Some(mc_cfg) = &cfg.mc {
        let mode = ScanMode::MonteCarlo {
            samples: mc_cfg.samples,
            seed,
        };
        let mc = assumption1_scan(target, theta, &mc_cfg.n_grid, mode, cfg.tol)?;
        let reference = assumption1_scan(target, theta, &mc_cfg.n_grid, ScanMode::Exact, cfg.tol)?;
        let mut agree = true;
        for (e, m) in reference.rows.iter().zip(&mc.rows) {
            let se = m.stderr.unwrap_or(0.0);
            agree &= (e.value - m.value).abs() <= defaults::MARTINGALE_Z * se;
            suite.row("scan", "mc".into(), String::new(), cell(m.n), m.value, m.stderr);
        }
        detail["mc_n_grid"] = json!(mc_cfg.n_grid);
        detail["mc_values"] = json!(mc.rows.iter().map(|r| r.value).collect::<Vec<_>>());
        detail["mc_stderr"] = json!(mc.rows.iter().map(|r| r.stderr).collect::<Vec<_>>());
        detail["mc_agrees"] = json!(agree);
        if passed && !agree {
            why = "Monte Carlo values disagree with the exact ones beyond 4 stderr".into();
        }
        passed &= agree;
    }
    suite.record("scan", passed, detail, || why);
    Ok(())
}

fn run_sweep(suite: &mut Suite, target: &dyn TiltTarget<f64>, cfg: &mut SweepConfig) -> Result<(), CliError> {
    check_positive("sweep.flat_tol", cfg.flat_tol)?;
    let expected_names = cfg.expected.get_or_insert_with(|| {
        cfg.factors
            .iter()
            .map(|f| Trend::expected_for(*f).as_str().to_string())
            .collect()
    });
    if expected_names.len() != cfg.factors.len() {
        return Err(CliError::Input("sweep.expected needs one trend per factor".into()));
    }
    let expected = expected_names.iter().map(|s| parse_trend(s)).collect::<Result<Vec<_>, _>>()?;
    let rows = phi_sweep(target, target.theta(), &cfg.factors, &cfg.n_grid, cfg.flat_tol)?;
    let mut mismatches = Vec::new();
    let mut details = Vec::new();
    for (row, want) in rows.iter().zip(&expected) {
        for (n, lv) in row.n_grid.iter().zip(&row.log_values) {
            suite.row("sweep", cell(row.factor), String::new(), cell(n), *lv, None);
        }
        if row.trend != *want {
            mismatches.push(format!(
                "factor {}: expected {}, observed {}",
                row.factor,
                want.as_str(),
                row.trend.as_str()
            ));
        }
        details.push(json!({
            "factor": row.factor,
            "phi": row.phi,
            "log_values": row.log_values,
            "final_delta": row.final_delta,
            "trend": row.trend.as_str(),
            "expected": want.as_str(),
        }));
    }
    let passed = mismatches.is_empty();
    suite.record("sweep", passed, json!({"factors": details, "mismatches": mismatches}), || {
        mismatches.join("; ")
    });
    Ok(())
}

fn run_martingale(
    suite: &mut Suite,
    target: &dyn TiltTarget<f64>,
    cfg: &MartingaleConfig,
    seed: u64,
    identity: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let rows = martingale_mc_test(target, cfg.k_max, cfg.samples, seed)?;
    let mut passed = rows.iter().all(|r| r.passed);
    let mut why = "a residual lies beyond 4 stderr of zero".to_string();
    for r in &rows {
        suite.row("martingale", String::new(), String::new(), cell(r.k), r.estimate.mean, Some(r.estimate.stderr));
    }
    let mut detail = json!({
        "k": rows.iter().map(|r| r.k).collect::<Vec<_>>(),
        "mean": rows.iter().map(|r| r.estimate.mean).collect::<Vec<_>>(),
        "stderr": rows.iter().map(|r| r.estimate.stderr).collect::<Vec<_>>(),
    });
    if let (Some(residuals), Some(tol)) = (identity, cfg.identity_tol) {
        let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        detail["identity_residuals"] = json!(residuals);
        if max >= tol {
            passed = false;
            why = format!("one-step identity residual {max:e} not below {tol:e}");
        }
    }
    suite.record("martingale", passed, detail, || why);
    Ok(())
}

fn markov_suite(cfg: &mut MarkovVerifyConfig, label: String, table: &mut Table) -> Result<(Value, Vec<String>), CliError> {
    let seed = cfg.seed.expect("seed resolved");
    let (model, opts) = markov_setup(&cfg.model, cfg.eigen_tol, cfg.root_tol, cfg.theta_cap)?;
    let tilt = solve_tilt(&model, &opts)?;
    let target = MarkovTarget { model, tilt };
    let checks = cfg.checks.get_or_insert_with(MarkovChecks::full);
    let mut suite = Suite {
        label,
        report: Default::default(),
        failures: Vec::new(),
        csv: table,
    };
    suite.report.insert("theta".into(), json!(target.tilt.theta));
    suite.report.insert("q".into(), json!(target.tilt.q));
    if let Some(scan) = &checks.scan {
        run_scan(&mut suite, &target, scan, seed)?;
    }
    if let Some(sweep) = &mut checks.sweep {
        run_sweep(&mut suite, &target, sweep)?;
    }
    if let Some(m) = &checks.martingale {
        let identity = target
            .model
            .states()
            .iter()
            .map(|s| one_step_martingale_identity(&target.model, &target.tilt, *s))
            .collect::<Result<Vec<_>, _>>()?;
        run_martingale(&mut suite, &target, m, seed, Some(identity))?;
    }
    if let Some(cyl) = &checks.cylinders {
        check_positive("cylinders.tol", cyl.tol)?;
        let rows = assumption2_convergence(&target.model, &target.tilt, cyl.k, &cyl.grid)?;
        for r in &rows {
            suite.row("cylinders", cell(cyl.k), cell(r.m), cell(r.n), r.max_error, None);
        }
        let passed = cylinder_errors_decreasing(&rows, f64::EPSILON, cyl.tol);
        let detail = json!({
            "grid": cyl.grid,
            "max_error": rows.iter().map(|r| r.max_error).collect::<Vec<_>>(),
            "ratio_sum": rows.iter().map(|r| r.ratio_sum).collect::<Vec<_>>(),
        });
        suite.record("cylinders", passed, detail, || {
            format!("errors not decreasing to below {:e}", cyl.tol)
        });
    }
    Ok((Value::Object(suite.report), suite.failures))
}

fn gauss_suite(cfg: &mut GaussVerifyConfig, label: String, table: &mut Table) -> Result<(Value, Vec<String>), CliError> {
    let seed = cfg.seed.expect("seed resolved");
    let model = cfg.model.to_model()?;
    let tilt = gaussian_tilt(&model)?;
    let checks = cfg.checks.get_or_insert_with(GaussChecks::full);
    let k_max = checks.martingale.as_ref().map_or(0, |m| m.k_max);
    let max_len = checks
        .scan
        .as_ref()
        .and_then(|s| s.mc.as_ref())
        .and_then(|mc| mc.n_grid.iter().max().copied())
        .unwrap_or(0)
        .max(k_max + 1);
    let target = GaussianTarget::new(&model, max_len, if k_max > 0 { k_max + 1 } else { 0 })?;
    let mut suite = Suite {
        label,
        report: Default::default(),
        failures: Vec::new(),
        csv: table,
    };
    suite.report.insert("theta".into(), json!(tilt.theta));
    suite.report.insert("q".into(), json!(tilt.q));
    if let Some(scan) = &checks.scan {
        run_scan(&mut suite, &target, scan, seed)?;
    }
    if let Some(sweep) = &mut checks.sweep {
        run_sweep(&mut suite, &target, sweep)?;
    }
    if let Some(m) = &checks.martingale {
        run_martingale(&mut suite, &target, m, seed, None)?;
    }
    if let Some(norm) = &checks.normalization {
        check_positive("normalization.tol", norm.tol)?;
        let mut tilt_mass = Vec::new();
        let mut mart_mass = Vec::new();
        let mut worst = 0.0f64;
        for &k in &norm.ks {
            let a = tilt_density_mass(&model, &conditional_tilt_coeffs(&model, k, defaults::TRUNCATION_START)?);
            worst = worst.max((a - tilt.q).abs());
            suite.row("normalization", "tilt_density".into(), String::new(), cell(k), a, None);
            tilt_mass.push(a);
            if k >= 1 {
                let b = martingale_mass(&model, &martingale_coeffs(&model, k, defaults::TRUNCATION_START)?);
                worst = worst.max((b - tilt.q).abs());
                suite.row("normalization", "martingale".into(), String::new(), cell(k), b, None);
                mart_mass.push(b);
            }
        }
        let passed = worst < norm.tol;
        let detail = json!({"ks": norm.ks, "tilt_density_mass": tilt_mass, "martingale_mass": mart_mass, "max_error": worst});
        suite.record("normalization", passed, detail, || {
            format!("mass differs from q by {worst:e}")
        });
    }
    Ok((Value::Object(suite.report), suite.failures))
}

pub fn markov_verify(c: &Common) -> Result<Output, CliError> {
    let mut cfg: MarkovVerifyConfig = load_config(c, "markov verify")?;
    cfg.seed = Some(resolve_seed(c.seed, cfg.seed));
    let mut table = csv_table();
    let (report, failures) = markov_suite(&mut cfg, "markov".into(), &mut table)?;
    Ok(Output {
        command: "markov verify",
        config: to_json(&cfg)?,
        result: json!({"passed": failures.is_empty(), "checks": report, "failures": failures}),
        csv: Some(table),
        failures,
    })
}

pub fn gauss_verify(c: &Common) -> Result<Output, CliError> {
    let mut cfg: GaussVerifyConfig = load_config(c, "gauss verify")?;
    cfg.seed = Some(resolve_seed(c.seed, cfg.seed));
    let mut table = csv_table();
    let (report, failures) = gauss_suite(&mut cfg, "gaussian".into(), &mut table)?;
    Ok(Output {
        command: "gauss verify",
        config: to_json(&cfg)?,
        result: json!({"passed": failures.is_empty(), "checks": report, "failures": failures}),
        csv: Some(table),
        failures,
    })
}

pub fn verify_run(c: &Common) -> Result<Output, CliError> {
    let mut cfg: VerifyRunConfig = match config::load(c.config.as_deref(), "verify run", false)? {
        Some(value) => config::parse(value)?,
        None => VerifyRunConfig::default(),
    };
    let seed = resolve_seed(c.seed, cfg.seed);
    cfg.seed = Some(seed);
    let mut table = csv_table();
    let mut failures = Vec::new();
    let mut markov = Vec::new();
    for (i, suite) in cfg.markov.iter_mut().enumerate() {
        suite.seed.get_or_insert(seed);
        let (report, f) = markov_suite(suite, format!("markov[{i}]"), &mut table)?;
        markov.push(report);
        failures.extend(f);
    }
    let mut gaussian = Vec::new();
    for (i, suite) in cfg.gaussian.iter_mut().enumerate() {
        suite.seed.get_or_insert(seed);
        let (report, f) = gauss_suite(suite, format!("gaussian[{i}]"), &mut table)?;
        gaussian.push(report);
        failures.extend(f);
    }
    Ok(Output {
        command: "verify run",
        config: to_json(&cfg)?,
        result: json!({"passed": failures.is_empty(), "markov": markov, "gaussian": gaussian, "failures": failures}),
        csv: Some(table),
        failures,
    })
}
