//! Linearized transverse dynamics on the periodic background.
//!
//! For a transverse Fourier mode `ω` the rescaled perturbation solves
//! `∂_t∂_z u = (ℬ − ω̃²)u` with `ω̃ = ω/k` and `t` measured in units of `1/k`.
//! On zero-mean co-periodic functions this is `∂_t u = G u` with
//! `G = ∂_z⁻¹(ℬ − ω̃²)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::periodic::PeriodicWave;
use crate::spectra::{assemble, critical_eigenvalue, witness_scan};

type C = Complex64;

/// Eigenvector conditioning above which a warning is attached.
pub const CONDITIONING_WARNING: f64 = 1e8;

/// Mode number of row `i` of the reduced generator on `n` modes.
pub fn reduced_mode(i: usize, n: usize) -> i64 {
    if i < n {
        i as i64 - n as i64
    } else {
        i as i64 - n as i64 + 1
    }
}

/// `G = ∂_z⁻¹(ℬ − ω̃²)` on modes `q ∈ {−N..−1, 1..N}`.
pub fn reduced_generator(wave: &PeriodicWave, omega: f64, n: usize) -> Result<DMatrix<C>> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "transverse wavenumber ω̃ = {omega} must be finite and non-zero"
        )));
    }
    let m = assemble(wave, 0.0, C::new(0.0, 0.0), n)?;
    let dim = 2 * n;
    let w2 = omega * omega;
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let q = reduced_mode(i, n);
        let qp = reduced_mode(j, n);
        let mut b = -m.entries[(m.index(q), m.index(qp))];
        if i == j {
            b -= w2;
        }
        b / C::new(0.0, q as f64)
    }))
}

/// Largest real part in a spectrum.
pub fn spectral_abscissa(values: &[C]) -> f64 {
    values
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Norm history of `u(t) = e^{tG}u₀`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evolution {
    pub omega: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `log‖u‖` over the second half of the series.
    pub slope: f64,
    pub abscissa: f64,
    /// `‖V‖_F ‖V⁻¹‖_F` for the eigenvector matrix `V` of `G`.
    pub conditioning: f64,
    pub warning: Option<String>,
}

/// Evolves `u0` (coefficients on the reduced modes) under `e^{tG}` up to time
/// `t_end`, sampling `samples` equally spaced times including 0.
pub fn evolve_linear(
    wave: &PeriodicWave,
    omega: f64,
    t_end: f64,
    u0: &DVector<C>,
    samples: usize,
    n: usize,
) -> Result<Evolution> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!(
            "final time {t_end} must be positive and finite"
        )));
    }
    if samples < 4 {
        return Err(Error::Domain(format!(
            "need at least 4 samples, got {samples}"
        )));
    }
    if u0.len() != 2 * n {
        return Err(Error::Dimension(format!(
            "initial datum has {} modes, expected {}",
            u0.len(),
            2 * n
        )));
    }
    let g = reduced_generator(wave, omega, n)?;
    let eig = linalg::eig(&g, true)?;
    let v = eig.vectors.expect("vectors requested");
    let vinv = linalg::inverse(&v)
        .map_err(|_| Error::Conditioning("eigenvector matrix is singular".into()))?;
    let conditioning = v.norm() * vinv.norm();
    let warning = (conditioning > CONDITIONING_WARNING).then(|| {
        format!("eigenvector conditioning {conditioning:.3e}: eigenvalues may be defective")
    });
    let alpha = &vinv * u0;
    let times: Vec<f64> = (0..samples)
        .map(|i| t_end * i as f64 / (samples - 1) as f64)
        .collect();
    let norms: Vec<f64> = times
        .iter()
        .map(|&t| {
            let coeffs = DVector::from_fn(alpha.len(), |j, _| alpha[j] * (eig.values[j] * t).exp());
            (&v * coeffs).norm()
        })
        .collect();
    let half = samples / 2;
    let logs: Vec<f64> = norms[half..].iter().map(|x| x.ln()).collect();
    let slope = crate::spectra::ls_slope(&times[half..], &logs);
    Ok(Evolution {
        omega,
        times,
        norms,
        slope,
        abscissa: spectral_abscissa(&eig.values),
        conditioning,
        warning,
    })
}

/// Random real zero-mean datum on the reduced modes: `û_{−q} = conj(û_q)`.
pub fn random_datum(n: usize, seed: u64) -> DVector<C> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut u = DVector::zeros(2 * n);
    for q in 1..=n {
        let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        u[n - 1 + q] = z;
        u[n - q] = z.conj();
    }
    u
}

/// One row of a growth curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthRow {
    pub lambda: f64,
    /// Negative witness eigenvalue of `Λ∂_z − ℬ`.
    pub nu: f64,
    /// Physical transverse wavenumber `k√(−ν)`.
    pub omega: f64,
    /// Predicted physical growth rate `kΛ`.
    pub lambda_growth: f64,
    /// Physical growth rate measured from the time evolution.
    pub measured: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub a: f64,
    pub c: f64,
    pub k: f64,
    pub rows: Vec<GrowthRow>,
}

/// Time horizon, in units of `1/Λ`, of each evolution in [`growth_curve`].
pub const GROWTH_HORIZON: f64 = 20.0;

/// Measures growth rates for every `Λ` of the grid that carries a witness.
pub fn growth_curve(
    wave: &PeriodicWave,
    lambdas: &[f64],
    n: usize,
    seed: u64,
) -> Result<GrowthCurve> {
    let scan = witness_scan(wave, Some(lambdas), n)?;
    let u0 = random_datum(n, seed);
    let mut rows = Vec::new();
    for p in &scan.points {
        let Some(nu) = p.eigenvalue else { continue };
        let omega_t = (-nu).sqrt();
        let ev = evolve_linear(wave, omega_t, GROWTH_HORIZON / p.lambda, &u0, 201, n)?;
        rows.push(GrowthRow {
            lambda: p.lambda,
            nu,
            omega: wave.k * omega_t,
            lambda_growth: wave.k * p.lambda,
            measured: wave.k * ev.slope,
        });
    }
    Ok(GrowthCurve {
        a: wave.a,
        c: wave.c,
        k: wave.k,
        rows,
    })
}

/// Largest real part of `σ(G)` for each `ω̃`.
pub fn abscissa_sweep(wave: &PeriodicWave, omegas: &[f64], n: usize) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    omegas
        .par_iter()
        .map(|&w| {
            let g = reduced_generator(wave, w, n)?;
            Ok(spectral_abscissa(&linalg::eigenvalues(&g)?))
        })
        .collect()
}

/// Critical eigenvalue used to size `ω̃` sweeps.
pub fn instability_scale(wave: &PeriodicWave, n: usize) -> Result<f64> {
    critical_eigenvalue(wave, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{k0, solve_periodic_wave, stokes_expansion, DEFAULT_TOL};
    use approx::assert_relative_eq;

    #[test]
    fn flat_background_generator_is_diagonal() {
        let c = 0.1;
        let w = stokes_expansion(0.0, c, 2, 6).unwrap();
        let om = 0.3;
        let g = reduced_generator(&w, om, 6).unwrap();
        let k = k0(c).unwrap();
        for i in 0..12 {
            let q = reduced_mode(i, 6) as f64;
            let want =
                (-q * q * (k.powi(4) * q.powi(4) - k * k * q * q - c) - om * om) / C::new(0.0, q);
            assert_relative_eq!(g[(i, i)].im, want.im, max_relative = 1e-13);
            assert_eq!(g[(i, i)].re, 0.0);
            for j in 0..12 {
                if j != i {
                    assert_eq!(g[(i, j)], C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_wavenumber_rejected() {
        let w = stokes_expansion(0.0, 0.1, 2, 6).unwrap();
        assert!(matches!(
            reduced_generator(&w, 0.0, 6),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn modes_skip_zero() {
        let qs: Vec<i64> = (0..6).map(|i| reduced_mode(i, 3)).collect();
        assert_eq!(qs, vec![-3, -2, -1, 1, 2, 3]);
    }

    #[test]
    fn eigenvector_datum_grows_at_its_rate() {
        let w = solve_periodic_wave(0.2, 0.1, 16, DEFAULT_TOL).unwrap();
        let g = reduced_generator(&w, 1.5e-3, 16).unwrap();
        let e = linalg::eig(&g, true).unwrap();
        let j = (0..e.values.len())
            .max_by(|&a, &b| e.values[a].re.total_cmp(&e.values[b].re))
            .unwrap();
        let u0 = e.vectors.unwrap().column(j).into_owned();
        let ev = evolve_linear(&w, 1.5e-3, 1e6, &u0, 50, 16).unwrap();
        assert!((ev.slope - e.values[j].re).abs() <= 1e-6);
    }

    #[test]
    fn random_datum_is_real() {
        let u = random_datum(5, 7);
        for q in 1..=5 {
            assert_eq!(u[5 - 1 + q], u[5 - q].conj());
        }
        assert_eq!(random_datum(5, 7), u);
    }
}
