use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{assemble, refine_cluster, Cluster, ZERO_TOL};
use crate::error::{Error, Result};
use crate::periodic::{solve_periodic_wave, x_n, PeriodicWave, DEFAULT_TOL};

type C = Complex64;

/// Number of points in the default `Λ` grid of [`witness_scan`].
pub const DEFAULT_WITNESS_POINTS: usize = 16;

fn rest_cluster(wave: &PeriodicWave, n: usize, with_vectors: bool) -> Result<Cluster> {
    let m = assemble(wave, 0.0, C::new(0.0, 0.0), n)?;
    refine_cluster(&m.entries, with_vectors)?.ok_or_else(|| {
        Error::Degenerate("low modes do not separate from the rest of the spectrum".into())
    })
}

/// Splits the triplet (eigenvalues of `−ℬ`) into the double zero and the
/// index of the remaining member.
fn split_triplet(values: &[C]) -> Result<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].norm().total_cmp(&values[j].norm()));
    if values.len() != 3 || values[idx[1]].norm() > ZERO_TOL {
        return Err(Error::Degenerate(format!(
            "expected a double zero in the critical triplet, got {values:?}"
        )));
    }
    let third = values[idx[2]];
    if third.im.abs() > ZERO_TOL {
        return Err(Error::Degenerate(format!(
            "critical eigenvalue {third} is not real"
        )));
    }
    Ok(idx[2])
}

/// The critical eigenvalue `ν_{a,c}` of `ℬ_{a,c}` on modes `-n..=n`: the
/// member of the critical triplet other than the double zero.
pub fn critical_eigenvalue(wave: &PeriodicWave, n: usize) -> Result<f64> {
    let cl = rest_cluster(wave, n, false)?;
    let j = split_triplet(&cl.values)?;
    Ok(-cl.values[j].re)
}

/// Kernel structure of `ℬ` at `γ = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelReport {
    pub n: usize,
    /// Eigenvalues of `ℬ` in the critical triplet.
    pub triplet: Vec<f64>,
    /// Number of eigenvalues of `ℬ` (whole spectrum) of modulus `≤ 1e-8`.
    pub zero_count: usize,
    pub nu: f64,
    /// `‖ℬ ∂_z p‖ / ‖∂_z p‖` in the coefficient 2-norm.
    pub translation_residual: f64,
}

/// Counts zero eigenvalues of `ℬ` and checks that `∂_z p` lies in its kernel.
pub fn kernel_check(wave: &PeriodicWave, n: usize) -> Result<KernelReport> {
    let m = assemble(wave, 0.0, C::new(0.0, 0.0), n)?;
    let report = super::spectrum(&m)?;
    if !report.refined {
        return Err(Error::Degenerate(
            "low modes do not separate from the rest of the spectrum".into(),
        ));
    }
    let zero_count = report
        .eigenvalues
        .iter()
        .filter(|z| z.norm() <= ZERO_TOL)
        .count();
    let j = split_triplet(&report.critical)?;
    let dp = wave.profile.resized(n).differentiate(1, 0.0);
    let v = DVector::from_column_slice(dp.coeffs());
    let bv = -(&m.entries * &v);
    let denom = v.norm();
    Ok(KernelReport {
        n,
        triplet: report.critical.iter().map(|z| -z.re).collect(),
        zero_count,
        nu: -report.critical[j].re,
        translation_residual: if denom > 0.0 { bv.norm() / denom } else { 0.0 },
    })
}

/// First-order correction of the critical eigenfunction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Psi1Report {
    pub a: f64,
    pub c: f64,
    /// `cos 2z` amplitude of `(ψ(a) − ψ(−a)) / 2a`.
    pub measured: f64,
    /// `−c / (2X₂)`.
    pub target: f64,
    pub deviation: f64,
}

/// Critical eigenvector normalized to unit `cos z` amplitude.
fn critical_vector(wave: &PeriodicWave, n: usize) -> Result<DVector<C>> {
    let cl = rest_cluster(wave, n, true)?;
    let j = split_triplet(&cl.values)?;
    let v = &cl.vectors[j];
    let p1 = v[n + 1];
    let m1 = v[n - 1];
    let amp = p1 + m1;
    if amp.norm() <= 1e-12 * v.norm() {
        return Err(Error::Degenerate(
            "critical eigenvector has no cos z component".into(),
        ));
    }
    Ok(v / amp)
}

/// Compares the `cos 2z` amplitude of the symmetric difference quotient of
/// the critical eigenfunction with `−c/(2X₂)`.
pub fn psi1_check(a: f64, c: f64, n: usize) -> Result<Psi1Report> {
    if a <= 0.0 {
        return Err(Error::Domain(format!("amplitude a = {a} must be positive")));
    }
    let plus = critical_vector(&solve_periodic_wave(a, c, n, DEFAULT_TOL)?, n)?;
    let minus = critical_vector(&solve_periodic_wave(-a, c, n, DEFAULT_TOL)?, n)?;
    let cos2 = |v: &DVector<C>| (v[n + 2] + v[n - 2]).re;
    let measured = (cos2(&plus) - cos2(&minus)) / (2.0 * a);
    let target = -c / (2.0 * x_n(2, c)?);
    Ok(Psi1Report {
        a,
        c,
        measured,
        target,
        deviation: (measured - target).abs(),
    })
}

/// Outcome at one grid value of `Λ`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub lambda: f64,
    /// Real negative eigenvalue continued from `−ν`, if present.
    pub eigenvalue: Option<f64>,
    /// Critical eigenvalues of the pencil at this `Λ`.
    pub critical: [C; 3],
}

/// Scan of the pencil `Λ∂_z − ℬ` for a real negative eigenvalue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessScan {
    pub nu: f64,
    pub points: Vec<WitnessPoint>,
    /// Largest grid `Λ` up to which the witness persists without a gap.
    pub threshold: Option<f64>,
}

/// Default grid: log-spaced points in `[ν/100, 10ν]`.
pub fn default_lambda_grid(nu: f64) -> Vec<f64> {
    let (lo, hi) = ((nu / 100.0).ln(), (10.0 * nu).ln());
    let m = DEFAULT_WITNESS_POINTS;
    (0..m)
        .map(|i| (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp())
        .collect()
}

/// Imaginary-part tolerance for calling a critical eigenvalue real.
pub(crate) fn imag_tol(nu: f64) -> f64 {
    1e-9_f64.min(1e-4 * nu.abs())
}

/// Real negative eigenvalue of `Λ∂_z − ℬ` in the critical cluster.
pub(crate) fn witness_eigenvalue(
    wave: &PeriodicWave,
    lambda: f64,
    n: usize,
    nu: f64,
) -> Result<(Option<f64>, Cluster)> {
    let m = assemble(wave, 0.0, C::new(lambda, 0.0), n)?;
    let cl = refine_cluster(&m.entries, false)?.ok_or_else(|| {
        Error::Degenerate(format!("critical cluster not separated at Λ = {lambda}"))
    })?;
    let tol = imag_tol(nu);
    let w = cl
        .values
        .iter()
        .filter(|z| z.im.abs() <= tol && z.re < -tol)
        .map(|z| z.re)
        .min_by(f64::total_cmp);
    Ok((w, cl))
}

/// Scans `Λ` (default grid when `lambdas` is `None`) for a real negative
/// eigenvalue of the pencil continued from `−ν`.
pub fn witness_scan(wave: &PeriodicWave, lambdas: Option<&[f64]>, n: usize) -> Result<WitnessScan> {
    let nu = critical_eigenvalue(wave, n)?;
    if nu <= ZERO_TOL {
        return Err(Error::Degenerate(format!(
            "critical eigenvalue ν = {nu:.3e} is not positive"
        )));
    }
    let mut grid = match lambdas {
        Some(l) => l.to_vec(),
        None => default_lambda_grid(nu),
    };
    if grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::Domain("Λ grid must be positive and finite".into()));
    }
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    let mut threshold = None;
    let mut contiguous = true;
    for &lambda in &grid {
        let (eigenvalue, cl) = witness_eigenvalue(wave, lambda, n, nu)?;
        match eigenvalue {
            Some(_) if contiguous => threshold = Some(lambda),
            _ => contiguous = false,
        }
        points.push(WitnessPoint {
            lambda,
            eigenvalue,
            critical: [cl.values[0], cl.values[1], cl.values[2]],
        });
    }
    Ok(WitnessScan {
        nu,
        points,
        threshold,
    })
}
