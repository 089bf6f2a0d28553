//! Weyl-sequence check for the unscaled operator
//! `N_* = λ∂_x − 𝒜⁺ − k²ν_*` with `𝒜⁺ = ∂_x²(∂_x⁴ + ∂_x² − c + φ(x+τ))`.
//!
//! `v_n = v_* φ_n` where `v_*(x) = u_*(k(x+τ))` is the real critical
//! eigenfunction of the rescaled pencil and `φ_n` is a plateau of length `n`
//! with smooth ramps on `[0,1]` and `[n+1,n+2]`. For a genuine Weyl sequence
//! the ratio `‖N_* v_n‖ / ‖v_n‖` decays like `n^{-1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::critical::{critical_eigenvalue, witness_eigenvalue};
use super::{assemble, refine_cluster};
use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::periodic::PeriodicWave;

type C = Complex64;

/// Smooth step rising from 0 at `t ≤ 0` to 1 at `t ≥ 1`, flat to all orders
/// at both ends.
pub fn smooth_ramp(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |s: f64| (-1.0 / s).exp();
    let (u, v) = (f(t), f(1.0 - t));
    u / (u + v)
}

/// Plateau cutoff `φ_n`: ramps up on `[0,1]`, equals 1 on `[1,n+1]` and ramps
/// down on `[n+1,n+2]`.
fn cutoff(n: f64, x: f64) -> f64 {
    smooth_ramp(x) * smooth_ramp(n + 2.0 - x)
}

const PAD: usize = 5;

/// Parameters of a Weyl-ratio computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylConfig {
    /// Rescaled drift `Λ`; must carry a real negative witness eigenvalue.
    pub lambda: f64,
    pub tau: f64,
    pub ns: Vec<usize>,
    /// Grid spacing; defaults to `2π/(128k)`.
    pub spacing: Option<f64>,
    /// Fourier truncation of the pencil.
    pub modes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylReport {
    pub lambda: f64,
    pub tau: f64,
    /// Witness eigenvalue `ν_*` of the rescaled pencil.
    pub nu_star: f64,
    /// Physical drift `λ = kΛ`.
    pub lambda_physical: f64,
    pub spacing: f64,
    pub ns: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log ratio` against `log n`.
    pub slope: f64,
}

/// Grid samples of a function on `[lo, lo + m h]` padded by `PAD` points.
fn samples(lo: f64, h: f64, m: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..m + 1 + 2 * PAD)
        .map(|j| f(lo + (j as f64 - PAD as f64) * h))
        .collect()
}

struct Operator {
    lambda_phys: f64,
    shift: f64,
    c: f64,
    d1: Stencil,
    d2: Stencil,
    d4: Stencil,
    d6: Stencil,
}

impl Operator {
    /// `N_* f` at interior points, with `phi` the sampled `φ(x+τ)`.
    fn apply(&self, f: &[f64], phi: &[f64], h: f64) -> Vec<f64> {
        let pf: Vec<f64> = f.iter().zip(phi).map(|(a, b)| a * b).collect();
        let m = f.len() - 2 * PAD;
        (PAD..PAD + m)
            .map(|j| {
                self.lambda_phys * self.d1.apply(f, j, h)
                    - self.d6.apply(f, j, h.powi(6))
                    - self.d4.apply(f, j, h.powi(4))
                    + self.c * self.d2.apply(f, j, h * h)
                    - self.d2.apply(&pf, j, h * h)
                    - self.shift * f[j]
            })
            .collect()
    }
}

fn l2(f: &[f64], h: f64) -> f64 {
    (h * f.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Ratios `‖N_* v_n‖ / ‖v_n‖` for each `n` in the configuration.
pub fn weyl_ratio(wave: &PeriodicWave, cfg: &WeylConfig) -> Result<WeylReport> {
    let k = wave.k;
    let coarsest = 2.0 * PI / (16.0 * k);
    let h = cfg.spacing.unwrap_or(2.0 * PI / (128.0 * k));
    if !(h > 0.0) || h > coarsest {
        return Err(Error::Discretization(format!(
            "spacing {h:.3e} exceeds 2π/(16k) = {coarsest:.3e}"
        )));
    }
    if cfg.ns.is_empty() || cfg.ns.contains(&0) {
        return Err(Error::Domain("plateau lengths must be positive".into()));
    }
    let nu = critical_eigenvalue(wave, cfg.modes)?;
    let (nu_star, _) = witness_eigenvalue(wave, cfg.lambda, cfg.modes, nu)?;
    let nu_star = nu_star.ok_or_else(|| {
        Error::Degenerate(format!("no real negative eigenvalue at Λ = {}", cfg.lambda))
    })?;

    let m = assemble(wave, 0.0, C::new(cfg.lambda, 0.0), cfg.modes)?;
    let cluster = refine_cluster(&m.entries, true)?
        .ok_or_else(|| Error::Degenerate("critical cluster not separated".into()))?;
    let j = (0..3)
        .min_by(|&p, &q| {
            (cluster.values[p].re - nu_star)
                .abs()
                .total_cmp(&(cluster.values[q].re - nu_star).abs())
        })
        .expect("three values");
    let v = &cluster.vectors[j];
    let nm = cfg.modes;
    // real representative w_q = v_q + conj(v_{-q})
    let mut w: Vec<C> = (0..=2 * nm).map(|i| v[i] + v[2 * nm - i].conj()).collect();
    let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if wn < 1e-3 * v.norm() {
        w = (0..=2 * nm)
            .map(|i| C::i() * (v[i] - v[2 * nm - i].conj()))
            .collect();
    }
    let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let u_star = |x: f64| -> f64 {
        let z = k * (x + cfg.tau);
        w.iter()
            .enumerate()
            .map(|(i, wq)| (wq * C::from_polar(1.0, (i as f64 - nm as f64) * z)).re)
            .sum::<f64>()
            / scale
    };

    let op = Operator {
        lambda_phys: k * cfg.lambda,
        shift: k * k * nu_star,
        c: wave.c,
        d1: Stencil::central(1),
        d2: Stencil::central(2),
        d4: Stencil::central(4),
        d6: Stencil::central(6),
    };

    // consistency: the uncut eigenfunction must be annihilated on the grid
    let probe = samples(0.0, h, (wave.period() / h).ceil() as usize, u_star);
    let phi_probe = samples(0.0, h, probe.len() - 1 - 2 * PAD, |x| {
        wave.state_at(x + cfg.tau)[0]
    });
    let res = op.apply(&probe, &phi_probe, h);
    let d6: Vec<f64> = (PAD..probe.len() - PAD)
        .map(|j| op.d6.apply(&probe, j, h.powi(6)).abs())
        .collect();
    let rmax = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let dmax = d6.iter().copied().fold(0.0, f64::max);
    if rmax > 1e-4 * dmax {
        return Err(Error::Discretization(format!(
            "eigenfunction residual {rmax:.3e} against sixth derivative {dmax:.3e}"
        )));
    }

    let mut ratios = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let nf = n as f64;
        let lo = -1.0;
        let count = ((nf + 4.0) / h).ceil() as usize;
        let vn = samples(lo, h, count, |x| u_star(x) * cutoff(nf, x));
        let phi = samples(lo, h, count, |x| wave.state_at(x + cfg.tau)[0]);
        let nv = op.apply(&vn, &phi, h);
        let denom = l2(&vn[PAD..vn.len() - PAD], h);
        ratios.push(l2(&nv, h) / denom);
    }
    let lx: Vec<f64> = cfg.ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let slope = if cfg.ns.len() >= 2 {
        ls_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    Ok(WeylReport {
        lambda: cfg.lambda,
        tau: cfg.tau,
        nu_star,
        lambda_physical: k * cfg.lambda,
        spacing: h,
        ns: cfg.ns.clone(),
        ratios,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ramp_properties() {
        assert_eq!(smooth_ramp(-0.5), 0.0);
        assert_eq!(smooth_ramp(1.5), 1.0);
        assert_relative_eq!(smooth_ramp(0.5), 0.5, epsilon = 1e-15);
        for i in 1..10 {
            let t = i as f64 / 10.0;
            assert_relative_eq!(smooth_ramp(t) + smooth_ramp(1.0 - t), 1.0, epsilon = 1e-14);
        }
        assert_eq!(cutoff(4.0, 3.0), 1.0);
        assert_eq!(cutoff(4.0, 6.5), 0.0);
    }
}
