//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 2 8`.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use abc_rates_core::analysis::{
    bias_sweep, fit_mse_curve, fixed_mode_mse_ratio, geometric_levels, optimal_delta,
    pilot_tolerance, rate_experiment, schedule_scan, AcceptanceProbability, GridCenter, Problem,
    RateConfig, SchedulePlan,
};
use abc_rates_core::sampler::rng_from_seed;
use abc_rates_core::toy::{
    ball_moments, bias_constant, d_opt, posterior_interval_probability, prior_interval_probability,
    IndicatorTest, ToyModel,
};
use abc_rates_core::{
    abc_rejection, derive_replicate_seed, whitening_transform, AbcConfig, AcceptanceNorm,
    CostModel, StopRule, Whitened,
};
use nalgebra::DMatrix;
use rand::Rng;

const S_STAR: [f64; 2] = [1.0, 1.0];
/// Published values for the toy problem.
const Y_POSTERIOR: f64 = 0.3648;
const Y_PRIOR: f64 = 0.3829;
const C_STAR: f64 = 0.0323;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn with_toy<T>(f: impl FnOnce(&Problem<'_, ToyModel, &(dyn Fn(&[f64]) -> f64 + Sync)>) -> T) -> T {
    let model = ToyModel::default();
    let norm = AcceptanceNorm::euclidean(2);
    let test = IndicatorTest::default();
    let h = move |t: &[f64]| test.eval(t);
    let h: &(dyn Fn(&[f64]) -> f64 + Sync) = &h;
    let y = posterior_interval_probability(S_STAR, &test);
    let problem = Problem::new(&model, &norm, &S_STAR, h, y);
    f(&problem)
}

fn closed_form_posterior() -> Verdict {
    let test = IndicatorTest::default();
    let y = posterior_interval_probability(S_STAR, &test);
    let prior = prior_interval_probability(&test);
    verdict(
        (y - Y_POSTERIOR).abs() <= 5e-5 && (prior - Y_PRIOR).abs() <= 5e-5,
        format!("posterior {y:.7} (want {Y_POSTERIOR} ± 5e-5), prior {prior:.7} (want {Y_PRIOR} ± 5e-5)"),
    )
}

fn bias_constant_value() -> Verdict {
    let c = bias_constant(S_STAR, &IndicatorTest::default(), 1e-2);
    verdict(
        (c - C_STAR).abs() <= 5e-4,
        format!("C = {c:.7} (want {C_STAR} ± 5e-4)"),
    )
}

fn bias_law() -> Verdict {
    let test = IndicatorTest::default();
    let y = posterior_interval_probability(S_STAR, &test);
    let rows = match with_toy(|p| bias_sweep(p, &[0.4, 0.6, 0.8, 1.0], 500, 2000, 0xB1A5)) {
        Ok(rows) => rows,
        Err(e) => return verdict(false, format!("sweep failed: {e}")),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &rows {
        let oracle = ball_moments(S_STAR, r.delta, &test).unwrap().y_delta - y;
        let mut ok = (r.mean_bias - oracle).abs() <= 3.0 * r.std_error;
        let law = C_STAR * r.delta * r.delta;
        if r.delta <= 0.6 {
            ok &= (r.mean_bias - law).abs() <= (3.0 * r.std_error).max(0.15 * law);
        }
        pass &= ok;
        parts.push(format!(
            "δ={}: {:.5} ± {:.5} vs oracle {:.5}, Cδ² {:.5}{}",
            r.delta,
            r.mean_bias,
            r.std_error,
            oracle,
            law,
            if ok { "" } else { " ✗" }
        ));
    }
    verdict(pass, parts.join("; "))
}

fn rate_exponents() -> Verdict {
    let d = d_opt(S_STAR, &IndicatorTest::default()).unwrap();
    let kappas = geometric_levels(1000.0, 100.0, 5);
    let cfg = RateConfig::new(kappas.clone(), 300, GridCenter::FromDOpt(d));
    let res = match with_toy(|p| rate_experiment(p, &cfg, 0x5CA1E)) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("experiment failed: {e}")),
    };
    let kept = res.levels.iter().filter(|l| l.fit.is_ok()).count();
    let span = kappas.last().unwrap() / kappas[0];
    let dg = res.delta_fit.gradient;
    let mg = res.mse_fit.gradient;
    let pass = kept >= 5
        && span >= 100.0
        && (-0.20..=-0.13).contains(&dg)
        && (-0.75..=-0.58).contains(&mg);
    verdict(
        pass,
        format!(
            "{kept} of {} levels fitted over {span:.0}x cost; δ* gradient {dg:.4} (se {:.4}) in [-0.20, -0.13]; \
             MSE gradient {mg:.4} (se {:.4}) in [-0.75, -0.58]",
            res.levels.len(),
            res.delta_fit.gradient_se,
            res.mse_fit.gradient_se
        ),
    )
}

fn mode_equivalence() -> Verdict {
    let delta = 0.5;
    let test = IndicatorTest::default();
    let p = ball_moments(S_STAR, delta, &test).unwrap().p_delta;
    let fallback = prior_interval_probability(&test);
    let mut pass = true;
    let mut parts = Vec::new();
    for (target, lo, hi) in [(200u64, 0.85, 1.15), (1000, 0.92, 1.08)] {
        let cmp = match with_toy(|pr| {
            fixed_mode_mse_ratio(
                pr,
                delta,
                target,
                2000,
                fallback,
                AcceptanceProbability::Known(p),
                0x0DE5,
            )
        }) {
            Ok(c) => c,
            Err(e) => return verdict(false, format!("comparison failed: {e}")),
        };
        let ok = (lo..=hi).contains(&cmp.ratio);
        pass &= ok;
        parts.push(format!(
            "N̂p≈{target} (N̂={}, n={}): ratio {:.4} in [{lo}, {hi}]{}",
            cmp.n_hat,
            cmp.n,
            cmp.ratio,
            if ok { "" } else { " ✗" }
        ));
    }
    verdict(pass, parts.join("; "))
}

fn norm_equivalence() -> Verdict {
    let model = ToyModel::default();
    let euclid = AcceptanceNorm::euclidean(2);
    let mut rng = rng_from_seed(0x5EED);
    let mut proposals = 0;
    let mut accepted = 0;
    for i in 0..20u64 {
        let b = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
        let a = &b * b.transpose() + DMatrix::identity(2, 2) * 0.05;
        let norm = match whitening_transform(&a) {
            Ok(n) => n,
            Err(e) => return verdict(false, format!("matrix {i}: {e}")),
        };
        let whitened = Whitened::new(&model, &norm);
        let mut w_star = [0.0; 2];
        norm.apply(&S_STAR, &mut w_star);

        // a radius accepting about a third of proposals exercises both outcomes
        let scout = Problem::new(&whitened, &euclid, &w_star, |_: &[f64]| 0.0, 0.0);
        let delta = pilot_tolerance(&scout, 5000, 0.3, derive_replicate_seed(i, 1)).unwrap();

        let stop = StopRule::proposals(10_000, 0.0);
        let seed = derive_replicate_seed(0xA11, i);
        let direct = abc_rejection(
            &model,
            &norm,
            &AbcConfig::new(S_STAR.to_vec(), delta, stop, seed),
        )
        .unwrap();
        let reduced = abc_rejection(
            &whitened,
            &euclid,
            &AbcConfig::new(w_star.to_vec(), delta, stop, seed),
        )
        .unwrap();
        if direct.accepted_at != reduced.accepted_at || direct.accepted != reduced.accepted {
            return verdict(false, format!("matrix {i}: acceptance decisions differ"));
        }
        proposals += direct.n_proposals;
        accepted += direct.n_accepted;
    }
    verdict(
        true,
        format!("20 matrices, {proposals} proposals, {accepted} accepted, decisions identical on every proposal"),
    )
}

fn cost_law() -> Verdict {
    let model = ToyModel::default();
    let norm = AcceptanceNorm::euclidean(2);
    let n = 100;
    let mut pass = true;
    let mut parts = Vec::new();
    for delta in [0.1, 0.3] {
        let p = ball_moments(S_STAR, delta, &IndicatorTest::default())
            .unwrap()
            .p_delta;
        let counts: Vec<f64> = (0..500)
            .map(|j| {
                let cfg = AbcConfig::new(
                    S_STAR.to_vec(),
                    delta,
                    StopRule::accepted(n),
                    derive_replicate_seed(0xC057, j),
                );
                abc_rejection(&model, &norm, &cfg).unwrap().n_proposals as f64
            })
            .collect();
        let m = counts.iter().sum::<f64>() / 500.0;
        let sd = (counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / 499.0).sqrt();
        let se = sd / 500f64.sqrt();
        let expected = n as f64 / p;
        let ok = (m - expected).abs() <= 3.0 * se;
        pass &= ok;
        parts.push(format!(
            "δ={delta}: mean {m:.1} vs n/p {expected:.1} (se {se:.1}){}",
            if ok { "" } else { " ✗" }
        ));
    }
    verdict(pass, parts.join("; "))
}

/// Minimiser of `a·δ^(-q) + b·δ⁴` by bisection on the sign of the derivative.
fn bisection_minimiser(a: f64, b: f64, q: u32) -> f64 {
    let qf = q as f64;
    let slope = |d: f64| -qf * a * d.powf(-qf - 1.0) + 4.0 * b * d.powi(3);
    let (mut lo, mut hi) = (1e-8f64, 1e8f64);
    for _ in 0..500 {
        let mid = (lo * hi).sqrt();
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

fn curve_fit_exactness() -> Verdict {
    let (a, b) = (1e-3, 2e-2);
    let points: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&d: &f64| (d, a * d.powi(-2) + b * d.powi(4)))
        .collect();
    let fit = match fit_mse_curve(&points, 2) {
        Ok(f) => f,
        Err(e) => return verdict(false, format!("fit failed: {e}")),
    };
    let fit_err = ((fit.a - a) / a).abs().max(((fit.b - b) / b).abs());

    let mut rng = rng_from_seed(0xF17);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = 10f64.powf(rng.random_range(-4.0..1.0));
        let b = 10f64.powf(rng.random_range(-4.0..1.0));
        let q = rng.random_range(1..=8);
        let d = optimal_delta(a, b, q).unwrap();
        let oracle = bisection_minimiser(a, b, q);
        worst = worst.max(((d - oracle) / oracle).abs());
    }
    verdict(
        fit_err <= 1e-10 && worst <= 1e-8,
        format!("(a, b) recovered to {fit_err:.1e} (want ≤ 1e-10); optimal δ worst relative gap {worst:.1e} over 100 draws (want ≤ 1e-8)"),
    )
}

fn schedule_optimality() -> Verdict {
    let d = d_opt(S_STAR, &IndicatorTest::default()).unwrap();
    let n0 = 100u64;
    let delta0 = d * (n0 as f64).powf(-0.25);
    let ratios = geometric_levels(1.0, 100.0, 5);
    let mut gradients = Vec::new();
    for r in [0.125, 0.25, 0.5] {
        let plan = SchedulePlan {
            n0,
            delta0,
            exponent: r,
            q: 2,
            cost_ratios: ratios.clone(),
        };
        match with_toy(|p| schedule_scan(p, &plan, 2000, &CostModel::default(), 0x5CED)) {
            Ok(scan) => gradients.push(scan.fit.gradient),
            Err(e) => return verdict(false, format!("schedule r = {r} failed: {e}")),
        }
    }
    let (slow, opt, fast) = (gradients[0], gradients[1], gradients[2]);
    verdict(
        slow - opt >= 0.05 && fast - opt >= 0.05,
        format!(
            "MSE-vs-cost gradients: n^(-1/8) {slow:.4}, n^(-1/4) {opt:.4}, n^(-1/2) {fast:.4}; \
             gaps {:.4} and {:.4} (want ≥ 0.05)",
            slow - opt,
            fast - opt
        ),
    )
}

fn run_cli(args: &[&str], out: &Path, threads: &str) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_abc-rates"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("ABC_RATES_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).trim().to_string())
    }
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Verdict {
    let runs: [&[&str]; 6] = [
        &[
            "bias-sweep",
            "--deltas",
            "0.5,0.8,1.2",
            "--n",
            "100",
            "--k",
            "200",
            "--seed",
            "42",
        ],
        &[
            "mse-sweep",
            "--deltas",
            "0.5,0.7,1.0,1.4",
            "--kappa",
            "400",
            "--k",
            "100",
            "--seed",
            "42",
        ],
        &[
            "rate-scan",
            "--cost-grid",
            "200,400,800",
            "--grid-points",
            "5",
            "--k",
            "30",
            "--seed",
            "42",
        ],
        &[
            "mode-compare",
            "--delta",
            "0.5",
            "--n-targets",
            "50,100",
            "--k",
            "100",
            "--seed",
            "42",
        ],
        &[
            "sample", "--delta", "0.5", "--n-hat", "5000", "--seed", "42",
        ],
        &["tune", "--q", "2", "--beta", "10"],
    ];
    let tmp = match tempfile::tempdir() {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut compared = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (j, threads) in ["1", "1", "4"].iter().enumerate() {
            let out = tmp.path().join(format!("{i}-{j}"));
            if let Err(e) = run_cli(args, &out, threads) {
                return verdict(false, format!("{} failed: {e}", args[0]));
            }
            outputs.push(csv_files(&out));
        }
        if outputs[0].is_empty() {
            return verdict(false, format!("{} wrote no CSV", args[0]));
        }
        if outputs[0] != outputs[1] {
            return verdict(false, format!("{}: rerun changed the CSV bytes", args[0]));
        }
        if outputs[0] != outputs[2] {
            return verdict(
                false,
                format!("{}: changing --threads changed the CSV bytes", args[0]),
            );
        }
        compared += outputs[0].len();
    }
    verdict(
        true,
        format!(
            "{} experiments, {compared} CSVs byte-identical across reruns and 1 vs 4 threads",
            runs.len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "closed-form posterior", closed_form_posterior),
    (2, "bias constant", bias_constant_value),
    (3, "bias law", bias_law),
    (4, "rate exponents", rate_exponents),
    (5, "fixed-mode equivalence", mode_equivalence),
    (6, "norm equivalence", norm_equivalence),
    (7, "cost law", cost_law),
    (8, "curve-fit exactness", curve_fit_exactness),
    (9, "schedule optimality direction", schedule_optimality),
    (10, "reproducibility", reproducibility),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} [{id:>2}] {name}: {} ({:.1} s)",
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
