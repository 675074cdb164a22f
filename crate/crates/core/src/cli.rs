//! Command-line front end. Every command writes its artifacts, the resolved
//! configuration and a metadata file into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;

use crate::config::{RunConfig, OUT_ENV};
use crate::coupling::{run_coupling, Branch};
use crate::diagnostics::{
    base_points, contraction_scan, h3_rank_scan, marginal_law_distance, mixing_distance, noise_check,
    verify_absorbing, verify_zero_stability,
};
use crate::dynamics::SpectralState;
use crate::error::{Error, Result};
use crate::rng::{stream, StreamDomain};

pub const COMMANDS: [&str; 5] = ["simulate", "couple", "mixing", "noise-check", "hypotheses"];

#[derive(Debug, Parser)]
#[command(name = "redmix", version, about = "Coupling and mixing experiments for the randomly forced CGL equation")]
pub struct Args {
    /// One of simulate, couple, mixing, noise-check, hypotheses. Defaults to `command` in the config.
    pub command: Option<String>,
    /// TOML configuration file.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Worker threads for ensembles; results do not depend on it.
    #[arg(short, long, default_value_t = 1)]
    pub workers: usize,
    /// Configuration overrides `section.key=value`, applied last.
    #[arg(value_name = "KEY=VALUE", trailing_var_arg = true)]
    pub overrides: Vec<String>,
}

/// Files written by one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Parse arguments, run, and map failures to exit codes (0, 2 config, 3 numerical).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("redmix: {e}");
            e.exit_code()
        }
    }
}

pub fn run(args: &Args) -> Result<Outcome> {
    if args.workers == 0 {
        return Err(Error::config("--workers must be at least 1"));
    }
    // the command may come from the file, so positional overrides can be mistaken for it
    let mut overrides = args.overrides.clone();
    let mut command = args.command.clone();
    if let Some(c) = &command {
        if c.contains('=') {
            overrides.insert(0, c.clone());
            command = None;
        }
    }
    let mut cfg = RunConfig::load(args.config.as_deref(), &overrides, std::env::var(OUT_ENV).ok())?;
    let command = command
        .or_else(|| cfg.command.clone())
        .ok_or_else(|| Error::config(format!("no command given; expected one of {}", COMMANDS.join(", "))))?;
    cfg.command = Some(command.clone());
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&out_dir)?;
    let mut files = vec![write(&out_dir, "resolved_config.toml", &cfg.to_toml())?];
    files.extend(pool.install(|| dispatch(&command, &cfg, &out_dir))?);
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "workers": args.workers,
        "unix_time": stamp,
    });
    files.push(write(&out_dir, "meta.json", &pretty(&meta))?);
    Ok(Outcome { out_dir, files })
}

fn dispatch(command: &str, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    match command {
        "simulate" => simulate(cfg, out),
        "couple" => couple(cfg, out),
        "mixing" => mixing(cfg, out),
        "noise-check" => noise(cfg, out),
        "hypotheses" => hypotheses(cfg, out),
        other => Err(Error::config(format!("unknown command '{other}'"))),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn initial_pair(cfg: &RunConfig) -> Result<(SpectralState, SpectralState)> {
    let lab = cfg.lab()?;
    let u0 = cfg.state(&cfg.init.u0)?;
    let mut v0 = u0.clone();
    v0.axpy(1.0, &cfg.state(&cfg.init.v0_offset)?)?;
    // both copies see the same burn-in noise, which keeps them close
    let u = lab.burn_in(&u0, 0, cfg.init.burn_in)?;
    let v = lab.burn_in(&v0, 0, cfg.init.burn_in)?;
    Ok((u, v))
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    use rayon::prelude::*;
    let lab = cfg.lab()?;
    let u0 = lab.burn_in(&cfg.state(&cfg.init.u0)?, 0, cfg.init.burn_in)?;
    let modes = &cfg.simulate.dump_modes;
    let bodies: Vec<String> = (0..cfg.simulate.trajectories)
        .into_par_iter()
        .map(|traj| {
            let mut body = String::new();
            lab.simulate(&u0, traj, 0, cfg.simulate.horizon, |t, u| {
                let _ = write!(body, "{traj},{t},{},{}", u.norm(), u.sobolev_norm());
                for &k in modes {
                    let c = u.get(k).unwrap_or_default();
                    let _ = write!(body, ",{},{}", c.re, c.im);
                }
                body.push('\n');
            })?;
            Ok(body)
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("trajectory,t,norm,sobolev_norm");
    for k in modes {
        let _ = write!(csv, ",re_u_{k},im_u_{k}");
    }
    csv.push('\n');
    bodies.iter().for_each(|b| csv.push_str(b));
    Ok(vec![write(out, "trajectory.csv", &csv)?])
}

fn couple(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let lab = cfg.lab()?;
    let (u0, v0) = initial_pair(cfg)?;
    let run = run_coupling(&lab, &u0, &v0, 0, lab.policy().max_steps)?;
    let mut csv = String::from("k,branch,delta,residual,phi_norm,guard_violation\n");
    for r in &run.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.k,
            r.branch,
            r.delta,
            opt(r.residual),
            opt(r.phi_norm),
            r.guard_violation
        );
    }
    let distances = run.distances();
    let mut files = vec![write(out, "coupling.csv", &csv)?];
    let mut summary = json!({
        "steps": run.records.len(),
        "coalesced": run.coalesced,
        "initial_distance": distances[0],
        "final_distance": distances[distances.len() - 1],
        "branches": {
            "independent": run.records.iter().filter(|r| r.branch == Branch::Independent).count(),
            "homological": run.records.iter().filter(|r| r.branch == Branch::Homological).count(),
            "trivial": run.records.iter().filter(|r| r.branch == Branch::Trivial).count(),
        },
    });
    if cfg.diag.coupling_scan {
        let bases = base_points(&lab, cfg.diag.samples, cfg.diag.burn_in)?;
        let marginal = marginal_law_distance(&lab, &bases, &cfg.diag.delta_grid, Default::default())?;
        let mut m = String::from("delta,ks,fired,pooled,flagged,median_ratio\n");
        for i in 0..marginal.deltas.len() {
            let _ = writeln!(
                m,
                "{},{},{},{},{},{}",
                marginal.deltas[i],
                opt(marginal.ks[i]),
                marginal.fired[i],
                marginal.pooled[i],
                marginal.flagged[i],
                opt(marginal.median_ratio[i])
            );
        }
        files.push(write(out, "marginal_law.csv", &m)?);
        let mut contraction = Vec::new();
        for &d in &cfg.diag.delta_grid {
            if d <= lab.policy().delta0 {
                contraction.push(contraction_scan(&lab, &bases, d)?);
            }
        }
        summary["marginal_law"] = json!({
            "monotone": marginal.monotone,
            "power": marginal.power,
            "power_r2": marginal.power_r2,
            "power_positive": marginal.power.is_some_and(|a| a > 0.0),
            "contraction_exponent": marginal.contraction_exponent,
        });
        summary["contraction"] = serde_json::to_value(
            contraction
                .iter()
                .map(|c| json!({"delta": c.delta, "fired": c.fired, "contracted": c.contracted, "fraction": c.fraction,
                    "guard_violations": c.guard_violations, "residual_rejections": c.residual_rejections,
                    "median_ratio": c.median_ratio}))
                .collect::<Vec<_>>(),
        )
        .expect("JSON value");
    }
    files.push(write(out, "coupling.json", &pretty(&summary))?);
    Ok(files)
}

fn mixing(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let lab = cfg.lab()?;
    let u01 = cfg.state(&cfg.diag.u01)?;
    let u02 = cfg.state(&cfg.diag.u02)?;
    let rep = mixing_distance(
        &lab,
        &u01,
        &u02,
        cfg.diag.ensemble,
        cfg.diag.horizon,
        &cfg.observables()?,
        cfg.diag.mixing_offset,
    )?;
    let mut csv = String::from("t,distance,noise_floor");
    for name in &rep.observables {
        let _ = write!(csv, ",w1_{}", name.replace(':', "_"));
    }
    csv.push('\n');
    for (i, t) in rep.times.iter().enumerate() {
        let _ = write!(csv, "{t},{},{}", rep.distance[i], rep.floor_series[i]);
        for series in &rep.per_observable {
            let _ = write!(csv, ",{}", series[i]);
        }
        csv.push('\n');
    }
    let last = *rep.distance.last().expect("horizon >= 2");
    let summary = json!({
        "ensemble": rep.ensemble,
        "horizon": cfg.diag.horizon,
        "initial_separation": crate::dynamics::dist_h(&u01, &u02)?,
        "noise_floor": rep.noise_floor,
        "final_distance": last,
        "rate": rep.rate,
        "r2": rep.r2,
        "fit_points": rep.fit_points,
        "inconclusive": rep.inconclusive,
        "pass": {
            "below_twice_floor": last < 2.0 * rep.noise_floor,
            "negative_rate": rep.rate.is_some_and(|r| r < 0.0),
        },
    });
    Ok(vec![write(out, "mixing.csv", &csv)?, write(out, "mixing.json", &pretty(&summary))?])
}

fn noise(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = cfg.noise_spec()?;
    let rep = noise_check(&spec, cfg.seed, cfg.noise.check_paths, cfg.noise.donsker_n, cfg.noise.donsker_samples)?;
    let path = spec.sample(&mut stream(cfg.seed, StreamDomain::Samples, 0, 0), 0);
    let cells = path.cell_values();
    let mut csv = String::from("t,value\n");
    for (m, v) in cells.iter().enumerate() {
        let _ = writeln!(csv, "{},{}", m as f64 / cells.len() as f64, v);
    }
    let mut summary = serde_json::to_value(&rep).expect("report serializes");
    summary["pass"] = json!({
        "orthonormality": rep.orthonormality_defect <= 1e-12,
        "boundedness": rep.bound_violations == 0,
        "donsker": rep.donsker_ks <= 0.03,
    });
    Ok(vec![write(out, "noise_path.csv", &csv)?, write(out, "noise_check.json", &pretty(&summary))?])
}

/// Initial data with norms spread geometrically over `[max/100, max]`.
fn spread_initial(cfg: &RunConfig, count: usize, max_norm: f64, offset: u64) -> Result<Vec<SpectralState>> {
    let lab = cfg.lab()?;
    (0..count)
        .map(|i| {
            let frac = if count == 1 { 1.0 } else { i as f64 / (count - 1) as f64 };
            let norm = max_norm * 100f64.powf(frac - 1.0);
            Ok(lab.random_direction(offset + i as u64)?.scaled(norm))
        })
        .collect()
}

fn hypotheses(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let lab = cfg.lab()?;
    let d = &cfg.diag;
    let big = spread_initial(cfg, d.absorbing_initial, d.absorbing_max_norm, 1 << 32)?;
    let mut fine = cfg.params();
    fine.dt_log2 = d.absorbing_dt_log2;
    let absorbing = verify_absorbing(&lab.with_params(fine)?, &big, d.absorbing_noises, d.absorbing_horizon)?;
    let small: Vec<SpectralState> = spread_initial(cfg, d.zero_initial, 1.0, 2 << 32)?
        .into_iter()
        .map(|u| {
            let n = u.norm();
            u.scaled(d.zero_norm / n)
        })
        .collect();
    let zero = verify_zero_stability(&lab, &small, d.zero_fit_start, d.zero_horizon)?;
    let rank = h3_rank_scan(&lab, d.rank_samples, d.burn_in)?;

    let mut a = String::from("initial_condition,initial_norm,entry_time,radius\n");
    for i in 0..absorbing.radii.len() {
        let _ = writeln!(a, "{i},{},{},{}", absorbing.initial_norms[i], absorbing.entry_times[i], absorbing.radii[i]);
    }
    let mut z = String::from("initial_condition,rate,monotone\n");
    for (i, (r, m)) in zero.rates.iter().zip(&zero.monotone).enumerate() {
        let _ = writeln!(z, "{i},{r},{m}");
    }
    let mut s = String::from("sample,rank,sigma_max,sigma_min\n");
    for (i, (sv, r)) in rank.singular_values.iter().zip(&rank.ranks).enumerate() {
        let _ = writeln!(
            s,
            "{i},{r},{},{}",
            sv.first().copied().unwrap_or(0.0),
            sv.last().copied().unwrap_or(0.0)
        );
    }
    let target = -cfg.cgl.epsilon * cfg.cgl.mass_shift;
    let summary = json!({
        "absorbing": {
            "radius": absorbing.radius,
            "radius_spread": absorbing.radius_spread(),
            "max_sobolev": absorbing.max_sobolev,
            "trajectories": absorbing.trajectories,
            "blow_ups": absorbing.blow_ups.len(),
            "dt_log2": d.absorbing_dt_log2,
            "pass": absorbing.passed(0.1),
        },
        "zero_stability": {
            "target_rate": target,
            "min_rate": zero.min_rate,
            "median_rate": zero.median_rate,
            "all_monotone": zero.monotone.iter().all(|&m| m),
            "pass": zero.rates.iter().all(|r| (r - target).abs() <= 0.1 * target.abs()),
        },
        "rank_scan": {
            "full_rank": rank.full_rank,
            "full_rank_fraction": rank.full_rank_fraction,
        },
    });
    Ok(vec![
        write(out, "absorbing.csv", &a)?,
        write(out, "zero_stability.csv", &z)?,
        write(out, "rank_scan.csv", &s)?,
        write(out, "hypotheses.json", &pretty(&summary))?,
    ])
}
