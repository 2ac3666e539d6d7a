//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Oracles are computed here independently of the library wherever
//! the value is derived rather than given in closed form.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use assoc_walk::gaussian::{
    conditional_tilt_coeffs, gaussian_tilt, laplace_sn_exact, tilt_density_mass, Correlation, GaussianModel,
};
use assoc_walk::linalg::Matrix;
use assoc_walk::markov::{
    associated, duality_roundtrip, one_step_martingale_identity, solve_theta, solve_tilt, MarkovModel, SolveOptions,
};
use assoc_walk::queueing::{
    appointments_g, appointments_theta, comparison_factor, simulate_queue, tail_decay_estimate, Arrivals, QueueModel,
    ServiceDist,
};
use assoc_walk::verify::{assumption2_convergence, martingale_mc_test, phi_sweep, GaussianTarget, MarkovTarget, Trend};
use assoc_walk::{defaults, Error};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn lib<T>(r: assoc_walk::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const P2: [[f64; 2]; 2] = [[0.8, 0.2], [0.6, 0.4]];
const S2: [f64; 2] = [1.0, -1.0];

fn two_state() -> MarkovModel<f64> {
    let p = Matrix::from_rows(&[P2[0].to_vec(), P2[1].to_vec()]).unwrap();
    MarkovModel::with_stationary(S2.to_vec(), p, 1e-13).unwrap()
}

/// Null vector of a singular 2×2 matrix `a` (right) or of `aᵀ` (left).
fn null_2x2(a: [[f64; 2]; 2], left: bool) -> [f64; 2] {
    if left {
        [-a[1][0], a[0][0]]
    } else {
        [-a[0][1], a[0][0]]
    }
}

/// Benchmark oracle from the characteristic polynomial. With `x = e^{-θ}`,
/// `det(Q(θ) - I) = 0` reads `(0.8x - 1)(0.4/x - 1) - 0.12 = 0`, i.e.
/// `0.8x² - 1.2x + 0.4 = 0`, whose root other than `x = 1` gives θ.
struct Oracle {
    theta: f64,
    q: f64,
    p_star: [[f64; 2]; 2],
    pi_star: [f64; 2],
}

fn oracle() -> Oracle {
    let (a, b, c) = (0.8f64, -1.2f64, 0.4f64);
    let disc = (b * b - 4.0 * a * c).sqrt();
    let x = [(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)]
        .into_iter()
        .find(|x| (x - 1.0).abs() > 1e-9)
        .unwrap();
    let theta = -x.ln();
    let w = [(-theta * S2[0]).exp(), (-theta * S2[1]).exp()];
    let q_minus_i = [
        [P2[0][0] * w[0] - 1.0, P2[0][1] * w[1]],
        [P2[1][0] * w[0], P2[1][1] * w[1] - 1.0],
    ];
    let mut cvec = null_2x2(q_minus_i, false);
    let mut v = null_2x2(q_minus_i, true);
    let vs = v[0] + v[1];
    v = [v[0] / vs, v[1] / vs];
    let vc = v[0] * cvec[0] + v[1] * cvec[1];
    cvec = [cvec[0] / vc, cvec[1] / vc];
    // stationary law of P from its own null vector
    let mut pi = null_2x2([[P2[0][0] - 1.0, P2[0][1]], [P2[1][0], P2[1][1] - 1.0]], true);
    let ps = pi[0] + pi[1];
    pi = [pi[0] / ps, pi[1] / ps];
    let q = pi[0] * cvec[0] + pi[1] * cvec[1];
    let mut p_star = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            p_star[i][j] = P2[i][j] * w[j] * cvec[j] / cvec[i];
        }
    }
    Oracle {
        theta,
        q,
        p_star,
        pi_star: [cvec[0] * v[0], cvec[1] * v[1]],
    }
}

fn criterion_1() -> Outcome {
    let o = oracle();
    check((o.theta - std::f64::consts::LN_2).abs() < 1e-15, "oracle θ is not ln 2")?;
    check((o.q - 27.0 / 32.0).abs() < 1e-15, "oracle q is not 27/32")?;
    let model = two_state();
    let theta = lib(solve_theta(&model, &SolveOptions::default()))?;
    check((theta - o.theta).abs() < 1e-10, format!("θ = {theta}"))?;
    let tilt = lib(solve_tilt(&model, &SolveOptions::default()))?;
    check((tilt.q - o.q).abs() < 1e-10, format!("q = {}", tilt.q))?;
    let assoc = lib(associated(&model, &tilt))?;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((assoc.transition()[(i, j)] - o.p_star[i][j]).abs());
        }
        worst = worst.max((assoc.pi()[i] - o.pi_star[i]).abs());
    }
    check(worst < 1e-10, format!("P*/π* error {worst:e}"))?;
    check(
        (o.p_star[0][0] - 0.4).abs() < 1e-12 && (o.pi_star[0] - 0.25).abs() < 1e-12,
        "oracle P*/π* differ from the stated values",
    )?;
    let dual = lib(duality_roundtrip(&model, &tilt, defaults::EIGEN_TOL))?;
    check(dual.max_abs_error < 1e-10, format!("duality error {:e}", dual.max_abs_error))?;
    Ok(format!(
        "θ = {theta:.15}, q = {:.15}, max |P*,π* − oracle| = {worst:.1e}, duality error = {:.1e}",
        tilt.q, dual.max_abs_error
    ))
}

fn criterion_2() -> Outcome {
    let model = two_state();
    let tilt = lib(solve_tilt(&model, &SolveOptions::default()))?;
    let grid = [(5, 5), (10, 10), (20, 20), (30, 30)];
    let rows = lib(assumption2_convergence(&model, &tilt, 1, &grid))?;
    let errors: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
    check(
        errors.windows(2).all(|w| w[1] < w[0]),
        format!("errors not decreasing: {errors:?}"),
    )?;
    let last = *errors.last().unwrap();
    check(last < 1e-10, format!("error at (30,30) = {last:e}"))?;
    let shown: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!("max errors along the grid: [{}]", shown.join(", ")))
}

fn criterion_3() -> Outcome {
    let model = two_state();
    let tilt = lib(solve_tilt(&model, &SolveOptions::default()))?;
    let mut worst: f64 = 0.0;
    for s in S2 {
        worst = worst.max(lib(one_step_martingale_identity(&model, &tilt, s))?.abs());
    }
    check(worst < 1e-12, format!("one-step residual {worst:e}"))?;
    let target = MarkovTarget { model, tilt };
    let rows = lib(martingale_mc_test(&target, 5, 100_000, 2024))?;
    let z: Vec<f64> = rows.iter().map(|r| r.estimate.mean / r.estimate.stderr).collect();
    check(rows.len() == 5 && rows.iter().all(|r| r.passed), format!("MC residual z-scores {z:.2?}"))?;
    Ok(format!("one-step residual {worst:.1e}; MC z-scores k=1..5: {z:.2?}"))
}

fn criterion_4() -> Outcome {
    let iid = lib(GaussianModel::new(1.0f64, 1.0, Correlation::Iid))?;
    let t = lib(gaussian_tilt(&iid))?;
    check(t.theta == 2.0 && t.q == 1.0, format!("IID θ = {}, q = {}", t.theta, t.q))?;

    let ar1 = lib(GaussianModel::new(1.0f64, 1.0, Correlation::Ar1 { phi: 0.5 }))?;
    let t = lib(gaussian_tilt(&ar1))?;
    let q_oracle = (-8.0f64 / 9.0).exp();
    check((t.theta - 2.0 / 3.0).abs() < 1e-15, format!("AR1 θ = {}", t.theta))?;
    check((t.q - q_oracle).abs() < 1e-15, format!("AR1 q = {}", t.q))?;
    let l200 = lib(laplace_sn_exact(&ar1, t.theta, 200))?;
    check((l200 - q_oracle).abs() < 1e-6, format!("E(e^(-θS_200)) = {l200}"))?;

    let ma = lib(GaussianModel::new(1.0f64, 1.0, Correlation::Ma { coeffs: vec![-1.0] }))?;
    let degenerate = matches!(gaussian_tilt(&ma), Err(Error::DegenerateCase { .. }));
    check(degenerate, "MA(b₁ = −1) was not rejected as degenerate")?;
    Ok(format!(
        "IID (θ, q) = (2, 1); AR1 θ = {:.15}, q = {:.15}, |E(e^(-θS_200)) − q| = {:.1e}; MA(−1) rejected",
        t.theta,
        t.q,
        (l200 - q_oracle).abs()
    ))
}

fn gaussian_models() -> Vec<(&'static str, GaussianModel<f64>)> {
    vec![
        ("IID", GaussianModel::new(1.0, 1.0, Correlation::Iid).unwrap()),
        ("AR1(0.5)", GaussianModel::new(1.0, 1.0, Correlation::Ar1 { phi: 0.5 }).unwrap()),
        ("MA(0.5)", GaussianModel::new(1.0, 1.0, Correlation::Ma { coeffs: vec![0.5] }).unwrap()),
        ("MA(1)", GaussianModel::new(1.0, 1.0, Correlation::Ma { coeffs: vec![1.0] }).unwrap()),
    ]
}

fn criterion_5() -> Outcome {
    let grid = [50, 100, 200, 400];
    let mut summary = Vec::new();
    for (name, model) in gaussian_models() {
        let target = lib(GaussianTarget::new(&model, 1, 0))?;
        let theta = lib(gaussian_tilt(&model))?.theta;
        let rows = lib(phi_sweep(&target, theta, &[0.5, 1.0, 2.0], &grid, 1e-6))?;
        check(rows[0].trend == Trend::Decreasing, format!("{name}: φ = θ/2 is {:?}", rows[0].trend))?;
        check(rows[2].trend == Trend::Increasing, format!("{name}: φ = 2θ is {:?}", rows[2].trend))?;
        // Cauchy at φ = θ: the last step of the exact sequence
        let values: Vec<f64> = grid
            .iter()
            .map(|n| laplace_sn_exact(&model, theta, *n))
            .collect::<assoc_walk::Result<_>>()
            .map_err(|e| e.to_string())?;
        let delta = (values[3] - values[2]).abs();
        check(delta < 1e-6, format!("{name}: final delta at φ = θ is {delta:e}"))?;
        summary.push(format!("{name} Δ = {delta:.1e}"));
    }
    Ok(format!("θ/2 decreasing, 2θ increasing; {}", summary.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, model) in gaussian_models() {
        let q = lib(gaussian_tilt(&model))?.q;
        for k in 0..=2 {
            let coeffs = lib(conditional_tilt_coeffs(&model, k, defaults::TRUNCATION_START))?;
            let mass = tilt_density_mass(&model, &coeffs);
            let err = (mass - q).abs();
            check(err < 1e-8, format!("{name}, k = {k}: mass {mass} vs q {q}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("max |mass − q| over IID/AR1/MA models, k = 0..2: {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mm1 = lib(QueueModel::new(Arrivals::Poisson { lambda: 1.0 }, ServiceDist::Exponential { mu: 2.0 }))?;
    let sample = lib(simulate_queue(&mm1, 1_000_000, 10_000, 7))?;
    let fit = lib(tail_decay_estimate(&sample, defaults::TAIL_LOWER_Q, defaults::TAIL_UPPER_Q))?;
    check(
        (0.9..=1.1).contains(&fit.theta_hat),
        format!("M/M/1 θ̂ = {}", fit.theta_hat),
    )?;

    // independent bisection on ln(2/(2-θ)) - θ, θ ∈ (1, 2)
    let f = |t: f64| (2.0 / (2.0 - t)).ln() - t;
    let (mut lo, mut hi) = (1.0f64, 1.999f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let service = ServiceDist::Exponential { mu: 2.0 };
    let root = lib(appointments_theta(&service, 1.0, defaults::ROOT_TOL))?;
    let residual = appointments_g(&service, 1.0, root).abs();
    check((root - oracle).abs() < 1e-10, format!("root {root} vs oracle {oracle}"))?;
    check((root - 1.5936).abs() < 5e-5, format!("root {root} is not ≈ 1.5936"))?;
    check(residual < 1e-10, format!("residual {residual:e}"))?;
    check(root > 1.0, "appointments root not above the M/M/1 value")?;
    let factor = comparison_factor(1.0, 2.0);
    check(
        (factor - 2.0 * (-1.0f64).exp()).abs() < 1e-15 && factor < 1.0,
        format!("comparison factor {factor}"),
    )?;
    Ok(format!(
        "M/M/1 θ̂ = {:.4}; appointments root = {root:.13} (residual {residual:.1e}); factor = {factor:.5}",
        fit.theta_hat
    ))
}

struct Scratch(PathBuf);

impl Scratch {
    fn new() -> Self {
        let dir = std::env::temp_dir().join(format!("assoc-walk-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.0.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run_cli(args: &[&str], config: Option<&Path>, out: &Path, threads: Option<usize>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_assoc-walk"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    if let Some(t) = threads {
        cmd.arg("--threads").arg(t.to_string());
    }
    let status = cmd.status().map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("`{}` exited with {status}", args.join(" ")));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn criterion_8() -> Outcome {
    let dir = Scratch::new();
    let markov = dir.file("markov.json", r#"{"states":[1,-1],"P":[[0.8,0.2],[0.6,0.4]]}"#);
    let ar1 = dir.file("ar1.json", r#"{"mu":1,"sigma2":1,"corr":{"type":"ar1","phi":0.5}}"#);
    let appointments = dir.file(
        "queue.json",
        r#"{"model":{"arrivals":{"type":"appointments","lambda":1,"error":{"type":"uniform","a":0.2}},
            "service":{"type":"exponential","mu":2}},"customers":200000}"#,
    );
    let runs: [(&[&str], Option<&Path>); 7] = [
        (&["markov", "solve"], Some(&markov)),
        (&["markov", "associate"], Some(&markov)),
        (&["markov", "verify"], Some(&markov)),
        (&["gauss", "solve"], Some(&ar1)),
        (&["gauss", "verify"], Some(&ar1)),
        (&["queue", "run"], Some(&appointments)),
        (&["verify", "run"], None),
    ];
    for (i, (args, config)) in runs.iter().enumerate() {
        let name = args.join(" ");
        // seed omitted: generated and embedded
        let first_path = dir.0.join(format!("run{i}-a.json"));
        let first = run_cli(args, *config, &first_path, None)?;
        let replay = run_cli(args, Some(&first_path), &dir.0.join(format!("run{i}-b.json")), Some(1))?;
        check(first == replay, format!("{name}: replay from embedded config differs"))?;
        let parallel = run_cli(args, Some(&first_path), &dir.0.join(format!("run{i}-c.json")), Some(4))?;
        check(first == parallel, format!("{name}: --threads 4 differs from --threads 1"))?;
        let doc: serde_json::Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
        check(doc["config"]["seed"].is_u64(), format!("{name}: seed not embedded"))?;
    }
    Ok(format!("{} commands: replay and --threads 1/4 byte-identical", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("2-state Markov benchmark", criterion_1),
        ("Markov cylinder-ratio convergence", criterion_2),
        ("Markov martingale", criterion_3),
        ("Gaussian closed forms", criterion_4),
        ("Gaussian dichotomy", criterion_5),
        ("Gaussian tilt-density normalization", criterion_6),
        ("Queueing tail decay and appointments root", criterion_7),
        ("CLI reproducibility", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
