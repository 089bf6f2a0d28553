use num_complex::Complex64;
use rayon::prelude::*;

use super::{assemble, spectrum, SpectrumReport};
use crate::error::Result;
use crate::periodic::PeriodicWave;

/// Spectra of the pencil at every Floquet exponent in `gammas`, in input
/// order. Exponents are processed in parallel.
pub fn bloch_sweep(
    wave: &PeriodicWave,
    lambda: Complex64,
    gammas: &[f64],
    n: usize,
) -> Result<Vec<SpectrumReport>> {
    gammas
        .par_iter()
        .map(|&g| assemble(wave, g, lambda, n).and_then(|m| spectrum(&m)))
        .collect()
}

/// Hausdorff distance between two finite point sets in ℂ.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{solve_periodic_wave, DEFAULT_TOL};

    #[test]
    fn hausdorff_basics() {
        let a = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(0.0, 0.0)];
        assert_eq!(hausdorff_distance(&a, &b), 1.0);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let w = solve_periodic_wave(0.1, 0.1, 16, DEFAULT_TOL).unwrap();
        let gammas: Vec<f64> = (0..8).map(|i| -0.5 + (i + 1) as f64 / 8.0).collect();
        let lam = Complex64::new(0.0, 0.0);
        let r1 = bloch_sweep(&w, lam, &gammas, 16).unwrap();
        let r2 = bloch_sweep(&w, lam, &gammas, 16).unwrap();
        for (i, (x, y)) in r1.iter().zip(&r2).enumerate() {
            assert_eq!(x.gamma, gammas[i]);
            assert_eq!(x.eigenvalues, y.eigenvalues);
        }
    }
}
