//! Sweep orchestration: one job per grid point, evaluated on a bounded worker
//! pool and merged in grid order.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use kawahara::evolution::{
    abscissa_sweep, evolve_linear, growth_curve, random_datum, reduced_generator, spectral_abscissa,
};
use kawahara::linalg;
use kawahara::periodic::{
    c_derivative_check, k0, k2_coefficient, solve_periodic_wave, stokes_expansion, x_n, DEFAULT_TOL,
};
use kawahara::solitary::{resonance_coefficients, shoot_solitary, DEFAULT_MATCH};
use kawahara::spectra::{
    assemble, bloch_sweep, critical_eigenvalue, default_lambda_grid, kernel_check, spectrum,
    weyl_ratio, witness_scan, WeylConfig,
};

use crate::config::{Kind, RunConfig};
use crate::output::{
    csv, csv_float, sha256_hex, write_atomic, FileEntry, Manifest, PointEntry, PointError, MANIFEST,
};

type C = Complex64;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "KAWAHARA_WORKERS";

/// Computed content of one sweep point.
pub struct Artifacts {
    pub result: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    /// Set when the point completed but reports a failed check.
    pub failed: bool,
}

type Work = Box<dyn Fn() -> kawahara::Result<Artifacts> + Send + Sync>;

pub struct Job {
    pub point: String,
    pub params: Value,
    work: Work,
}

/// Outcome of a run.
pub struct Outcome {
    pub manifest: Manifest,
    pub reused: usize,
    pub failed_checks: bool,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn f(x: f64) -> String {
    csv_float(x)
}

fn job(
    point: String,
    params: Value,
    work: impl Fn() -> kawahara::Result<Artifacts> + Send + Sync + 'static,
) -> Job {
    Job {
        point,
        params,
        work: Box::new(work),
    }
}

/// Floquet exponents `j/64`, `j = −31..=32`.
pub fn default_gammas() -> Vec<f64> {
    (-31..=32).map(|j| j as f64 / 64.0).collect()
}

/// Jobs of a configuration in grid order.
pub fn jobs(cfg: &RunConfig) -> Vec<Job> {
    let (n, tol, seed) = (cfg.modes, cfg.tol, cfg.seed);
    let mut out = Vec::new();
    let lambdas = |default: Vec<Option<f64>>| -> Vec<Option<f64>> {
        if cfg.lambda.is_empty() {
            default
        } else {
            cfg.lambda.iter().map(|&l| Some(l)).collect()
        }
    };
    match cfg.subcommand {
        Kind::Wave => {
            for &a in &cfg.a {
                for &c in &cfg.c {
                    out.push(job(
                        format!("wave_a{a}_c{c}"),
                        json!({"a": a, "c": c, "modes": n, "tol": tol, "seed": seed}),
                        move || {
                            let w = solve_periodic_wave(a, c, n, tol)?;
                            let m = 4 * n;
                            let rows = w
                                .profile
                                .sample(m)
                                .iter()
                                .enumerate()
                                .map(|(j, u)| {
                                    let x = w.period() * j as f64 / m as f64;
                                    vec![seed.to_string(), f(x), f(u.re)]
                                })
                                .collect();
                            Ok(Artifacts {
                                result: to_value(&w),
                                csv_header: vec!["seed", "x", "u"],
                                csv_rows: rows,
                                failed: false,
                            })
                        },
                    ));
                }
            }
        }
        Kind::Spectrum => {
            let gammas = if cfg.gamma.is_empty() {
                vec![0.0]
            } else {
                cfg.gamma.clone()
            };
            for &a in &cfg.a {
                for &c in &cfg.c {
                    for &g in &gammas {
                        for l in lambdas(vec![Some(0.0)]) {
                            let l = l.expect("explicit drift");
                            out.push(job(
                                format!("spectrum_a{a}_c{c}_g{g}_l{l}"),
                                json!({"a": a, "c": c, "gamma": g, "lambda": l, "modes": n, "tol": tol, "seed": seed}),
                                move || {
                                    let w = solve_periodic_wave(a, c, n, tol)?;
                                    let r = spectrum(&assemble(&w, g, C::new(l, 0.0), n)?)?;
                                    let rows = r
                                        .eigenvalues
                                        .iter()
                                        .map(|z| vec![seed.to_string(), f(z.re), f(z.im)])
                                        .collect();
                                    Ok(Artifacts {
                                        result: to_value(&r),
                                        csv_header: vec!["seed", "re", "im"],
                                        csv_rows: rows,
                                        failed: false,
                                    })
                                },
                            ));
                        }
                    }
                }
            }
        }
        Kind::BlochSweep => {
            let gammas = if cfg.gamma.is_empty() {
                default_gammas()
            } else {
                cfg.gamma.clone()
            };
            for &a in &cfg.a {
                for &c in &cfg.c {
                    for l in lambdas(vec![Some(0.0)]) {
                        let l = l.expect("explicit drift");
                        let gammas = gammas.clone();
                        out.push(job(
                            format!("bloch_a{a}_c{c}_l{l}"),
                            json!({"a": a, "c": c, "lambda": l, "gamma": gammas, "modes": n, "tol": tol, "seed": seed}),
                            move || {
                                let w = solve_periodic_wave(a, c, n, tol)?;
                                let reports = bloch_sweep(&w, C::new(l, 0.0), &gammas, n)?;
                                let rows = reports
                                    .iter()
                                    .flat_map(|r| {
                                        r.eigenvalues.iter().map(move |z| {
                                            vec![seed.to_string(), f(r.gamma), f(z.re), f(z.im)]
                                        })
                                    })
                                    .collect();
                                Ok(Artifacts {
                                    result: to_value(&reports),
                                    csv_header: vec!["seed", "gamma", "re", "im"],
                                    csv_rows: rows,
                                    failed: false,
                                })
                            },
                        ));
                    }
                }
            }
        }
        Kind::Weyl => {
            for &a in &cfg.a {
                for &c in &cfg.c {
                    for l in lambdas(vec![None]) {
                        let (tau, ns) = (cfg.tau, cfg.ns.clone());
                        let label = l.map_or("default".to_string(), |l| l.to_string());
                        out.push(job(
                            format!("weyl_a{a}_c{c}_l{label}"),
                            json!({"a": a, "c": c, "lambda": l, "tau": tau, "ns": ns, "modes": n, "tol": tol, "seed": seed}),
                            move || {
                                let w = solve_periodic_wave(a, c, n, tol)?;
                                let lambda = match l {
                                    Some(l) => l,
                                    None => {
                                        let scan = witness_scan(&w, None, n)?;
                                        0.5 * scan.threshold.ok_or_else(|| {
                                            kawahara::Error::Degenerate("no witness on the default grid".into())
                                        })?
                                    }
                                };
                                let r = weyl_ratio(
                                    &w,
                                    &WeylConfig {
                                        lambda,
                                        tau,
                                        ns: ns.clone(),
                                        spacing: None,
                                        modes: n,
                                    },
                                )?;
                                let rows = r
                                    .ns
                                    .iter()
                                    .zip(&r.ratios)
                                    .map(|(m, q)| vec![seed.to_string(), m.to_string(), f(*q)])
                                    .collect();
                                Ok(Artifacts {
                                    result: to_value(&r),
                                    csv_header: vec!["seed", "n", "ratio"],
                                    csv_rows: rows,
                                    failed: false,
                                })
                            },
                        ));
                    }
                }
            }
        }
        Kind::Solitary => {
            for &c in &cfg.c {
                for &a in &cfg.a {
                    let xm = cfg.x_match.unwrap_or(DEFAULT_MATCH / c.abs().sqrt());
                    let mt = cfg.match_tol;
                    out.push(job(
                        format!("solitary_c{c}_a{a}"),
                        json!({"a": a, "c": c, "x_match": xm, "match_tol": mt, "seed": seed}),
                        move || {
                            let s = shoot_solitary(c, a, xm, mt)?;
                            let rows = s
                                .grid
                                .iter()
                                .zip(&s.states)
                                .map(|(x, u)| {
                                    vec![
                                        seed.to_string(),
                                        f(*x),
                                        f(u[0]),
                                        f(u[1]),
                                        f(u[2]),
                                        f(u[3]),
                                    ]
                                })
                                .collect();
                            Ok(Artifacts {
                                result: to_value(&s),
                                csv_header: vec!["seed", "x", "u", "u1", "u2", "u3"],
                                csv_rows: rows,
                                failed: false,
                            })
                        },
                    ));
                }
            }
        }
        Kind::Growth => {
            for &a in &cfg.a {
                for &c in &cfg.c {
                    let (ls, omegas) = (cfg.lambda.clone(), cfg.omega.clone());
                    out.push(job(
                        format!("growth_a{a}_c{c}"),
                        json!({"a": a, "c": c, "lambda": ls, "omega": omegas, "modes": n, "tol": tol, "seed": seed}),
                        move || {
                            let w = solve_periodic_wave(a, c, n, tol)?;
                            let grid = if ls.is_empty() {
                                default_lambda_grid(critical_eigenvalue(&w, n)?)
                            } else {
                                ls.clone()
                            };
                            let curve = growth_curve(&w, &grid, n, seed)?;
                            let abscissa = abscissa_sweep(&w, &omegas, n)?;
                            let rows = curve
                                .rows
                                .iter()
                                .map(|r| {
                                    vec![
                                        seed.to_string(),
                                        f(r.lambda),
                                        f(r.nu),
                                        f(r.omega),
                                        f(r.lambda_growth),
                                        f(r.measured),
                                    ]
                                })
                                .collect();
                            let sweep: Vec<Value> = omegas
                                .iter()
                                .zip(&abscissa)
                                .map(|(o, s)| json!({"omega": o, "abscissa": s}))
                                .collect();
                            Ok(Artifacts {
                                result: json!({"curve": to_value(&curve), "abscissa": sweep}),
                                csv_header: vec!["seed", "lambda", "nu", "omega", "lambda_growth", "measured"],
                                csv_rows: rows,
                                failed: false,
                            })
                        },
                    ));
                }
            }
        }
        Kind::VerifyAll => {
            out.push(job(
                "verify".to_string(),
                json!({"seed": seed}),
                move || {
                    let checks = verify_checks(seed)?;
                    let failed = checks.iter().any(|c| !c.pass);
                    let rows = checks
                        .iter()
                        .map(|c| vec![seed.to_string(), c.name.to_string(), c.pass.to_string()])
                        .collect();
                    Ok(Artifacts {
                        result: to_value(&checks),
                        csv_header: vec!["seed", "check", "pass"],
                        csv_rows: rows,
                        failed,
                    })
                },
            ));
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Fast consistency checks at fixed parameters.
fn verify_checks(seed: u64) -> kawahara::Result<Vec<Check>> {
    let n = 32;
    let mut out = Vec::new();

    let (a, c) = (0.1, 0.1);
    let w = solve_periodic_wave(a, c, n, DEFAULT_TOL)?;
    let s = stokes_expansion(a, c, 2, n)?;
    let diff = w
        .profile
        .add_scaled(-1.0, &s.profile)?
        .sup_norm_sampled(256);
    let dk = (w.k - k0(c)? - k2_coefficient(c)? * a * a).abs();
    out.push(Check {
        name: "stokes_newton",
        pass: diff <= 10.0 * c * a.powi(4) && dk <= 10.0 * a.powi(4),
        detail: format!("profile difference {diff:.3e}, wavenumber difference {dk:.3e}"),
    });

    let nu = critical_eigenvalue(&w, n)?;
    let ratio = nu / (a * a * c * c / (4.0 * x_n(2, c)?));
    out.push(Check {
        name: "critical_eigenvalue",
        pass: nu > 0.0 && (ratio - 1.0).abs() <= 0.1,
        detail: format!("ν = {nu:.6e}, ratio to leading order {ratio:.6}"),
    });

    let w2 = solve_periodic_wave(0.2, 0.1, n, DEFAULT_TOL)?;
    let kr = kernel_check(&w2, n)?;
    out.push(Check {
        name: "kernel",
        pass: kr.zero_count == 2 && kr.translation_residual <= 1e-8,
        detail: format!(
            "{} zeros, translation residual {:.1e}",
            kr.zero_count, kr.translation_residual
        ),
    });

    let scan = witness_scan(&w2, None, n)?;
    out.push(Check {
        name: "witness",
        pass: scan.threshold.is_some_and(|t| t > 0.0),
        detail: format!("threshold {:?}", scan.threshold),
    });

    let cd = c_derivative_check(0.1, 1e-4, n)?;
    out.push(Check {
        name: "speed_derivative",
        pass: cd.passes,
        detail: format!("max deviation {:.2e}", cd.max_deviation),
    });

    let (d10, d20) = resonance_coefficients();
    out.push(Check {
        name: "resonance",
        pass: d10 == 1.0 && d20 == -1.0,
        detail: format!("({d10}, {d20})"),
    });

    let lambda = scan.nu / 10.0;
    let ws = witness_scan(&w2, Some(&[lambda]), n)?;
    let mu = ws.points[0]
        .eigenvalue
        .ok_or_else(|| kawahara::Error::Degenerate("no witness at ν/10".into()))?;
    let omega = (-mu).sqrt();
    let abscissa = spectral_abscissa(&linalg::eigenvalues(&reduced_generator(&w2, omega, n)?)?);
    let ev = evolve_linear(&w2, omega, 20.0 / abscissa, &random_datum(n, seed), 201, n)?;
    let rel = (ev.slope - abscissa).abs() / abscissa;
    out.push(Check {
        name: "growth",
        pass: rel <= 0.05 && abscissa >= lambda - 1e-6,
        detail: format!("abscissa {abscissa:.4e}, measured {:.4e}", ev.slope),
    });
    Ok(out)
}

fn io_error(e: std::io::Error, what: &str) -> kawahara::Error {
    kawahara::Error::Domain(format!("{what}: {e}"))
}

/// Runs all jobs and writes outputs and the manifest into the output directory.
pub fn run(cfg: &RunConfig, jobs: Vec<Job>) -> Result<Outcome, String> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let previous = Manifest::load(dir);
    let results: Vec<Result<(PointEntry, bool, bool), PointError>> = jobs
        .par_iter()
        .map(|j| {
            if let Some(e) = previous
                .as_ref()
                .and_then(|m| m.reusable(dir, &j.point, &j.params))
            {
                return Ok((e, true, false));
            }
            let art = (j.work)().map_err(|e| PointError {
                point: j.point.clone(),
                kind: e.kind().to_string(),
                message: e.to_string(),
            })?;
            write_point(dir, cfg, j, &art)
                .map(|e| (e, false, art.failed))
                .map_err(|e| PointError {
                    point: j.point.clone(),
                    kind: "io".into(),
                    message: e.to_string(),
                })
        })
        .collect();
    let mut outputs = Vec::new();
    let mut errors = Vec::new();
    let mut reused = 0;
    let mut failed_checks = false;
    for r in results {
        match r {
            Ok((e, was_reused, failed)) => {
                reused += usize::from(was_reused);
                failed_checks |= failed;
                outputs.push(e);
            }
            Err(e) => errors.push(e),
        }
    }
    let manifest = Manifest {
        tool: "kawahara".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg.clone(),
        outputs,
        errors,
    };
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(dir, MANIFEST, &bytes).map_err(|e| format!("cannot write manifest: {e}"))?;
    Ok(Outcome {
        manifest,
        reused,
        failed_checks,
    })
}

fn write_point(
    dir: &Path,
    cfg: &RunConfig,
    j: &Job,
    art: &Artifacts,
) -> kawahara::Result<PointEntry> {
    let doc = json!({
        "subcommand": cfg.subcommand.name(),
        "seed": cfg.seed,
        "params": j.params,
        "result": art.result,
    });
    let json_bytes = serde_json::to_vec_pretty(&doc).expect("document serializes");
    let csv_bytes = csv(&art.csv_header, &art.csv_rows).into_bytes();
    let mut files = Vec::new();
    for (ext, bytes) in [("json", json_bytes), ("csv", csv_bytes)] {
        let name = format!("{}.{ext}", j.point);
        write_atomic(dir, &name, &bytes).map_err(|e| io_error(e, &name))?;
        files.push(FileEntry {
            path: name,
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(PointEntry {
        point: j.point.clone(),
        params: j.params.clone(),
        files,
    })
}
