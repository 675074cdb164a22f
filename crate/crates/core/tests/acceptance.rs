//! Acceptance criteria 1 to 11. Each test prints one `criterion N: PASS|FAIL` line.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::panic;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{default_lab, linear_lab, rel_err, state};
use rand::Rng;
use redmix::config::RunConfig;
use redmix::coupling::{couple_step, run_coupling, Branch};
use redmix::diagnostics::*;
use redmix::dynamics::{dist_h, SpectralState};
use redmix::noise::{haar_eval, sample_donsker, HaarIndex, RedNoiseSpec};
use redmix::rng::{stream, StreamDomain};
use statrs::distribution::{ContinuousCDF, Normal};

const SEED: u64 = 2024;

fn report(n: u32, pass: bool, elapsed: Duration, limit: Duration, detail: String) -> bool {
    let ok = pass && elapsed <= limit;
    println!(
        "criterion {n}: {} ({detail}; {:.2}s, limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| format!("{v:.4}"))
}

fn bases() -> &'static [BasePoint] {
    static BASES: OnceLock<Vec<BasePoint>> = OnceLock::new();
    BASES.get_or_init(|| base_points(&default_lab(), 200, RunConfig::default().diag.burn_in).unwrap())
}

fn default_spec() -> RedNoiseSpec {
    RunConfig::default().noise_spec().unwrap()
}

/// Level of flat index `a`: 0 for the indicator, then `2^k - 1 + l`.
fn level_of(a: usize) -> usize {
    (usize::BITS - 1 - (a + 1).leading_zeros()) as usize
}

/// Haar function from its definition: the indicator of `[0, 1)` at level 0,
/// otherwise `+2^{k/2}` on the left half of `[l 2^-k, (l+1) 2^-k)` and
/// `-2^{k/2}` on the right half.
fn haar(flat: usize, t: f64) -> f64 {
    if flat == 0 {
        return if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 };
    }
    let k = level_of(flat) as i32;
    let l = (flat + 1 - (1 << k)) as f64;
    let w = (-k as f64).exp2();
    let x = (t - l * w) / w;
    let h = (k as f64 / 2.0).exp2();
    if (0.0..0.5).contains(&x) {
        h
    } else if (0.5..1.0).contains(&x) {
        -h
    } else {
        0.0
    }
}

fn criterion_01_haar_orthonormality() -> bool {
    let start = Instant::now();
    let count = (1usize << 7) - 1;
    // every function up to level 6 is constant on the 2^7 cells
    let cells = 1usize << 7;
    let mid = |m: usize| (m as f64 + 0.5) / cells as f64;
    let values: Vec<Vec<f64>> = (0..count).map(|a| (0..cells).map(|m| haar(a, mid(m))).collect()).collect();
    let mut defect = 0.0f64;
    for a in 0..count {
        for b in 0..count {
            let ip: f64 = values[a].iter().zip(&values[b]).map(|(x, y)| x * y).sum::<f64>() / cells as f64;
            defect = defect.max((ip - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut mismatch = 0.0f64;
    for (a, row) in values.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            let lib = haar_eval(HaarIndex::from_flat(a), mid(m)).unwrap();
            mismatch = mismatch.max((lib - v).abs());
        }
    }
    let lib_defect = redmix::noise::orthonormality_defect(6);
    report(
        1,
        defect <= 1e-12 && lib_defect <= 1e-12 && mismatch == 0.0,
        start.elapsed(),
        Duration::from_secs(1),
        format!("max defect {defect:.2e}, library defect {lib_defect:.2e}, eval mismatch {mismatch:.1e}"),
    )
}

fn criterion_02_noise_boundedness() -> bool {
    let start = Instant::now();
    let spec = default_spec();
    // c_0 = 1, c_k 2^{k/2} = k^-2
    let bound: f64 = 1.0 + (1..=6).map(|k| 1.0 / (k * k) as f64).sum::<f64>();
    let cells = 1usize << 7;
    let mut worst = 0.0f64;
    let mut violations = 0;
    for i in 0..10_000u64 {
        let path = spec.sample(&mut stream(SEED, StreamDomain::Samples, i, 0), 0);
        let draws = path.draws();
        let mut sup = 0.0f64;
        for m in 0..cells {
            let t = (m as f64 + 0.5) / cells as f64;
            let v: f64 = (0..draws.len())
                .map(|a| {
                    spec.coefficients()[level_of(a)] * draws[a] * haar(a, t)
                })
                .sum();
            sup = sup.max(v.abs());
        }
        worst = worst.max(sup);
        if sup > bound {
            violations += 1;
        }
    }
    report(
        2,
        violations == 0,
        start.elapsed(),
        Duration::from_secs(10),
        format!("10000 paths, max sup {worst:.4} vs bound {bound:.4}, {violations} violations"),
    )
}

fn criterion_03_donsker() -> bool {
    let start = Instant::now();
    let spec = default_spec();
    let n = 4096;
    let scale = 1.0 / 3f64.sqrt();
    let mut z: Vec<f64> = (0..5000u64)
        .map(|s| sample_donsker(&spec, SEED, s, n, 1.0).unwrap() / scale)
        .collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let m = z.len() as f64;
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    report(
        3,
        ks <= 0.03,
        start.elapsed(),
        Duration::from_secs(60),
        format!("KS {ks:.4} <= 0.03, N = {n}, 5000 samples"),
    )
}

fn criterion_04_tangent_consistency() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let s = lab.solver();
    let k_ctl = 6;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let u0 = lab.burn_in(&SpectralState::zeros(64).unwrap(), 500 + i, 10).unwrap();
        let eta = lab.force(500 + i, 0);
        let xi = lab.independent_force(500 + i, 0);
        let base = eta.embed(k_ctl).unwrap();
        let dir = xi.embed(k_ctl).unwrap();
        let shifted = |sign: f64| {
            let coords: Vec<f64> = base.iter().zip(&dir).map(|(a, b)| a + sign * h * b).collect();
            s.shift(&u0, &eta.with_embedded(k_ctl, &coords).unwrap()).unwrap()
        };
        let fd = shifted(1.0).sub(&shifted(-1.0)).unwrap().scaled(0.5 / h);
        let traj = s.shift_with_trajectory(&u0, &eta).unwrap();
        let tangent = s.tangent(&traj, &xi).unwrap();
        worst = worst.max(rel_err(&tangent, &fd));
    }
    report(
        4,
        worst <= 1e-4,
        start.elapsed(),
        Duration::from_secs(120),
        format!("max relative error {worst:.2e} over 20 triples"),
    )
}

fn criterion_05_linear_coalescence() -> bool {
    let start = Instant::now();
    let lab = linear_lab();
    let delta = 1e-3;
    let (mut fired, mut worst) = (0, 0.0f64);
    for i in 0..20u64 {
        let u = lab.burn_in(&SpectralState::zeros(64).unwrap(), i, 10).unwrap();
        let mut v = u.clone();
        v.axpy(delta, &lab.random_direction(i).unwrap()).unwrap();
        let out = couple_step(&lab, 0, &u, &v, &lab.force(i, 0), &lab.independent_force(i, 0)).unwrap();
        if out.record.branch == Branch::Homological {
            fired += 1;
            worst = worst.max(dist_h(&out.u_next, &out.v_next).unwrap() / out.record.delta);
        }
    }
    report(
        5,
        fired > 0 && worst <= 1e-8,
        start.elapsed(),
        Duration::from_secs(60),
        format!("max |u1 - v1| / delta {worst:.2e} <= 1e-8 over {fired}/20 homological steps"),
    )
}

fn criterion_06_contraction_frequency() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let r = contraction_scan(&lab, bases(), 1e-3).unwrap();
    report(
        6,
        r.fired > 0 && r.fraction >= 0.7,
        start.elapsed(),
        Duration::from_secs(1800),
        format!(
            "{}/{} fired steps contract by 1/2 (fraction {:.3} >= 0.7), {} guard rejections, {} residual rejections",
            r.contracted, r.fired, r.fraction, r.guard_violations, r.residual_rejections
        ),
    )
}

fn criterion_07_coupling_convergence() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let horizon = 100;
    let d0 = 0.9 * lab.policy().delta0;
    let series: Vec<Vec<f64>> = bases()[..50]
        .iter()
        .map(|b| {
            let mut v = b.state.clone();
            v.axpy(d0, &b.direction).unwrap();
            let mut d = run_coupling(&lab, &b.state, &v, b.sample, horizon).unwrap().distances();
            let last = *d.last().unwrap();
            d.resize(horizon + 1, last);
            d
        })
        .collect();
    let med: Vec<f64> = (0..=horizon)
        .map(|k| median(&series.iter().map(|s| s[k]).collect::<Vec<_>>()).unwrap())
        .collect();
    let t: Vec<f64> = (0..=horizon).map(|k| k as f64).collect();
    let fit = fit_exponential(&t, &med, lab.policy().coalesce_tol);
    let (pass, detail) = match &fit {
        Ok(f) => (
            f.rate < 0.0 && f.r2 >= 0.8,
            format!("rate {:.3}, R2 {:.3} >= 0.8 on {} points above {:.0e}", f.rate, f.r2, f.points, lab.policy().coalesce_tol),
        ),
        Err(e) => (false, format!("no fit: {e}")),
    };
    report(7, pass, start.elapsed(), Duration::from_secs(3600), format!("50 runs, {detail}"))
}

fn criterion_08_mixing() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let a = state(64, &[(0, 0.7, 0.0)]);
    let b = state(64, &[(0, -0.7, 0.0)]);
    let r = mixing_distance(&lab, &a, &b, 200, 50, &ObservableSet::default(), 1_000_000).unwrap();
    let last = *r.distance.last().unwrap();
    let below = last < 2.0 * r.noise_floor;
    let rate_ok = r.rate.is_some_and(|x| x < 0.0) && r.r2.is_some_and(|x| x >= 0.5);
    report(
        8,
        below && rate_ok,
        start.elapsed(),
        Duration::from_secs(3600),
        format!(
            "|u01 - u02| = {:.2}, distance at t=50 {last:.4} vs 2x floor {:.4}, rate {}, R2 {} >= 0.5",
            dist_h(&a, &b).unwrap(),
            2.0 * r.noise_floor,
            fmt(r.rate),
            fmt(r.r2)
        ),
    )
}

fn criterion_09_zero_stability() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let (eps, m0) = (0.1, 1.0);
    let initial: Vec<SpectralState> = (0..10u64)
        .map(|i| lab.random_direction(900 + i).unwrap().scaled(1e-3))
        .collect();
    let r = verify_zero_stability(&lab, &initial, 20, 40).unwrap();
    let target = -eps * m0;
    let small = r.rates.iter().map(|x| ((x - target) / target).abs()).fold(0.0, f64::max);

    let linear = linear_lab();
    let modes = [0i64, 1, -3, 7, 15];
    let init: Vec<SpectralState> = modes.iter().map(|&k| state(64, &[(k, 1e-3, 5e-4)])).collect();
    let lr = verify_zero_stability(&linear, &init, 2, 10).unwrap();
    let exact = modes
        .iter()
        .zip(&lr.rates)
        .map(|(&k, x)| (x + eps * ((k * k) as f64 + m0)).abs())
        .fold(0.0, f64::max);
    report(
        9,
        small <= 0.1 && exact <= 1e-12,
        start.elapsed(),
        Duration::from_secs(60),
        format!("max relative deviation from -eps*m0 {small:.4} <= 0.1, linear per-mode error {exact:.1e}"),
    )
}

fn criterion_10_marginal_law() -> bool {
    let start = Instant::now();
    let lab = default_lab();
    let r = marginal_law_distance(&lab, bases(), &[1e-2, 1e-3, 1e-4], Default::default()).unwrap();
    report(
        10,
        r.monotone && r.power.is_some_and(|a| a > 0.0),
        start.elapsed(),
        Duration::from_secs(1800),
        format!(
            "KS [{}] over delta {:?}, monotone {}, exponent {} > 0, fired {:?}",
            r.ks.iter().map(|k| fmt(*k)).collect::<Vec<_>>().join(", "),
            r.deltas,
            r.monotone,
            fmt(r.power),
            r.fired
        ),
    )
}

fn run_cli(out: &Path, workers: &str, command: &str, overrides: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_redmix"))
        .args([command, "--workers", workers])
        .args(overrides)
        .arg(format!("out_dir={}", out.display()))
        .env_remove("REDMIX_OUT")
        .status()
        .unwrap();
    assert!(status.success(), "{command} with {workers} workers failed");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_11_reproducibility() -> bool {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 5] = [
        ("simulate", &["simulate.trajectories=4", "simulate.horizon=5"]),
        ("couple", &["init.burn_in=5"]),
        ("mixing", &["diag.ensemble=100", "diag.horizon=4"]),
        ("noise-check", &["noise.check_paths=1000", "noise.donsker_n=64", "noise.donsker_samples=500"]),
        (
            "hypotheses",
            &[
                "diag.absorbing_initial=2",
                "diag.absorbing_noises=2",
                "diag.absorbing_horizon=4",
                "diag.zero_initial=2",
                "diag.zero_fit_start=1",
                "diag.zero_horizon=4",
                "diag.rank_samples=2",
                "diag.burn_in=2",
            ],
        ),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for (command, overrides) in runs {
        let outs: Vec<_> = ["1", "2", "1"]
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let dir = tmp.path().join(format!("{command}-{i}"));
                run_cli(&dir, w, command, overrides);
                csv_files(&dir)
            })
            .collect();
        assert!(!outs[0].is_empty());
        compared += outs[0].len();
        if outs[0] != outs[1] || outs[0] != outs[2] {
            differing.push(command);
        }
    }
    report(
        11,
        differing.is_empty(),
        start.elapsed(),
        Duration::from_secs(600),
        format!("{compared} CSV files byte-identical across --workers 1/2 and reruns; differing: {differing:?}"),
    )
}

/// The test-side Haar formula must match the library before it is used as an oracle.
fn oracle_matches_library() {
    let mut rng = stream(1, StreamDomain::Initial, 0, 0);
    for _ in 0..200 {
        let a = rng.gen_range(0..127usize);
        let t: f64 = rng.gen_range(0.0..1.0);
        assert_eq!(haar(a, t), haar_eval(HaarIndex::from_flat(a), t).unwrap());
    }
}

fn main() {
    oracle_matches_library();
    let criteria: [(u32, fn() -> bool); 11] = [
        (1, criterion_01_haar_orthonormality),
        (2, criterion_02_noise_boundedness),
        (3, criterion_03_donsker),
        (4, criterion_04_tangent_consistency),
        (5, criterion_05_linear_coalescence),
        (6, criterion_06_contraction_frequency),
        (7, criterion_07_coupling_convergence),
        (8, criterion_08_mixing),
        (9, criterion_09_zero_stability),
        (10, criterion_10_marginal_law),
        (11, criterion_11_reproducibility),
    ];
    let mut failed = Vec::new();
    for (n, run) in criteria {
        let ok = panic::catch_unwind(run).unwrap_or_else(|_| {
            println!("criterion {n}: FAIL (panicked)");
            false
        });
        if !ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
