//! Small periodic traveling waves `φ(x) = p(kx)` of the Kawahara wave equation
//!
//! ```text
//! k⁴ p'''' + k² p'' − c p + ½ p² = 0,   p 2π-periodic and even,
//! ```
//!
//! normalized so that the `cos z` amplitude of `p` is exactly `a·c`.
//! Two constructions are provided: the second-order Stokes expansion and a
//! Fourier–Galerkin Newton solve on the cosine modes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::TruncatedFourierSeries;

/// Largest |a| accepted by the wave constructors.
pub const MAX_AMPLITUDE: f64 = 0.5;
/// Largest |c| accepted by the wave constructors.
pub const MAX_SPEED: f64 = 0.2;
pub const DEFAULT_ORDER: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-11;
const MAX_NEWTON_ITERATIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum WaveSource {
    Stokes { order: u8 },
    Newton { iterations: usize },
}

/// A periodic wave `φ_{a,c}(x) = p(kx)` with its Fourier profile `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicWave {
    pub a: f64,
    pub c: f64,
    pub k: f64,
    pub profile: TruncatedFourierSeries,
    pub source: WaveSource,
    pub residual_norm: f64,
    /// Residual sup-norms before each Newton update (empty for Stokes waves).
    #[serde(default)]
    pub newton_history: Vec<f64>,
}

impl PeriodicWave {
    /// Cosine amplitude of mode `q` of the profile.
    pub fn cos_coefficient(&self, q: usize) -> f64 {
        self.profile.cos_amplitude(q).re
    }

    pub fn truncation(&self) -> usize {
        self.profile.order()
    }

    /// Spatial period `2π/k`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k
    }

    /// `(φ, φ', φ'', φ''')` at physical position `x`.
    pub fn state_at(&self, x: f64) -> [f64; 4] {
        let z = self.k * x;
        let mut out = [0.0; 4];
        let n = self.profile.order();
        for q in 1..=n {
            let amp = self.cos_coefficient(q);
            if amp == 0.0 {
                continue;
            }
            let w = q as f64 * self.k;
            let (s, c) = (q as f64 * z).sin_cos();
            out[0] += amp * c;
            out[1] -= amp * w * s;
            out[2] -= amp * w * w * c;
            out[3] += amp * w * w * w * s;
        }
        out[0] += self.cos_coefficient(0);
        out
    }

    /// Same wave, profile zero-padded or truncated to order `n`.
    pub fn with_truncation(&self, n: usize) -> Self {
        let mut w = self.clone();
        w.profile = self.profile.resized(n);
        w
    }
}

fn check_speed(c: f64) -> Result<()> {
    if !(c > -0.25) || !c.is_finite() {
        return Err(Error::Domain(format!(
            "wave speed c = {c} must exceed -1/4"
        )));
    }
    Ok(())
}

fn check_box(a: f64, c: f64) -> Result<()> {
    check_speed(c)?;
    if a.abs() > MAX_AMPLITUDE || c.abs() > MAX_SPEED {
        return Err(Error::Range(format!(
            "(a, c) = ({a}, {c}) outside |a| ≤ {MAX_AMPLITUDE}, |c| ≤ {MAX_SPEED}"
        )));
    }
    Ok(())
}

/// Linear wavenumber `k₀(c) = ((1 + √(1+4c))/2)^{1/2}`, the positive root of
/// `k⁴ − k² − c = 0`.
pub fn k0(c: f64) -> Result<f64> {
    check_speed(c)?;
    Ok(((1.0 + (1.0 + 4.0 * c).sqrt()) / 2.0).sqrt())
}

/// `X_n = k₀⁴n⁴ − k₀²n² − c`, the linear symbol at mode `n` for `k = k₀(c)`.
pub fn x_n(n: u32, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("X_n is defined for n ≥ 2, got {n}")));
    }
    let k2 = k0(c)?.powi(2);
    let nf = n as f64;
    Ok(k2 * k2 * nf.powi(4) - k2 * nf * nf - c)
}

/// Coefficient `k₂` of `k = k₀ + k₂a² + O(a⁴)`.
pub fn k2_coefficient(c: f64) -> Result<f64> {
    let k = k0(c)?;
    let x2 = x_n(2, c)?;
    Ok((-c / 4.0 + c * c / (8.0 * x2)) / (4.0 * k.powi(3) - 2.0 * k))
}

/// `q(a) = 1 − √(1 − a²/2)`.
pub fn q_of_a(a: f64) -> f64 {
    1.0 - (1.0 - 0.5 * a * a).sqrt()
}

/// Stokes expansion `p = ac(cos z + a p₁ + a² p₂)` truncated at `order ∈ {1, 2}`.
pub fn stokes_expansion(a: f64, c: f64, order: u8, n: usize) -> Result<PeriodicWave> {
    check_box(a, c)?;
    if !(1..=2).contains(&order) {
        return Err(Error::Domain(format!(
            "Stokes order {order} not in {{1, 2}}"
        )));
    }
    if n < 3 {
        return Err(Error::Domain(format!(
            "truncation N = {n} cannot hold cos 3z"
        )));
    }
    let mut amps = scaled_stokes_amplitudes(a, c, order)?;
    amps.resize(n + 1, 0.0);
    amps.iter_mut().for_each(|v| *v *= a * c);
    let k = if order == 2 {
        k0(c)? + k2_coefficient(c)? * a * a
    } else {
        k0(c)?
    };
    let mut wave = PeriodicWave {
        a,
        c,
        k,
        profile: TruncatedFourierSeries::from_cosines(n, &amps),
        source: WaveSource::Stokes { order },
        residual_norm: 0.0,
        newton_history: vec![],
    };
    wave.residual_norm = residual_sup_norm(&wave)?;
    Ok(wave)
}

/// Cosine amplitudes of `cos z + a p₁ + a² p₂` (without the `ac` prefactor).
fn scaled_stokes_amplitudes(a: f64, c: f64, order: u8) -> Result<Vec<f64>> {
    let x2 = x_n(2, c)?;
    let mut amps = vec![0.25 * a, 1.0, -a * c / (4.0 * x2), 0.0];
    if order >= 2 {
        let x3 = x_n(3, c)?;
        amps[3] = a * a * c * c / (8.0 * x2 * x3);
    }
    Ok(amps)
}

/// Residual `k⁴p'''' + k²p'' − cp + ½ p*p` of the wave equation.
pub fn residual(w: &PeriodicWave) -> Result<TruncatedFourierSeries> {
    let p = &w.profile;
    let k2 = w.k * w.k;
    let lin = p
        .differentiate(4, 0.0)
        .scaled(k2 * k2)
        .add_scaled(k2, &p.differentiate(2, 0.0))?
        .add_scaled(-w.c, p)?;
    lin.add_scaled(0.5, &p.convolve(p)?)
}

fn residual_sup_norm(w: &PeriodicWave) -> Result<f64> {
    let r = residual(w)?;
    Ok(r.sup_norm_sampled(4 * r.order() + 4))
}

/// Cosine amplitudes of `f·g` for real even `f`, `g` given by their cosine
/// amplitudes, truncated to the input length.
fn cos_product(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len() - 1;
    // work with symmetric complex coefficients c_q, c_{-q} = c_q
    let cf = |v: &[f64], q: usize| if q == 0 { v[0] } else { 0.5 * v[q] };
    let mut out = vec![0.0; n + 1];
    for (q, o) in out.iter_mut().enumerate() {
        let qi = q as i64;
        let mut acc = 0.0;
        for r in -(n as i64)..=(n as i64) {
            let s = qi - r;
            if s.unsigned_abs() as usize > n {
                continue;
            }
            acc += cf(f, r.unsigned_abs() as usize) * cf(g, s.unsigned_abs() as usize);
        }
        *o = if q == 0 { acc } else { 2.0 * acc };
    }
    out
}

/// Galerkin–Newton solve on the cosine modes `0..=N` with the `cos z`
/// amplitude pinned to `ac`; the mode-1 equation determines `k`.
///
/// Internally the unknown is the scaled profile `w = p/(ac)`, which keeps the
/// system regular as `ac → 0`; the mean equation is divided by `c`.
pub fn solve_periodic_wave(a: f64, c: f64, n: usize, tol: f64) -> Result<PeriodicWave> {
    check_box(a, c)?;
    if n < 16 {
        return Err(Error::Domain(format!("truncation N = {n} below 16")));
    }
    let eps = a * c;
    let mut w = scaled_stokes_amplitudes(a, c, 2)?;
    w.resize(n + 1, 0.0);
    let mut k = k0(c)? + k2_coefficient(c)? * a * a;

    let symbol = |k: f64, q: usize| {
        let (k2, qf) = (k * k, q as f64);
        k2 * k2 * qf.powi(4) - k2 * qf * qf - c
    };
    let dsymbol = |k: f64, q: usize| {
        let qf = q as f64;
        4.0 * k.powi(3) * qf.powi(4) - 2.0 * k * qf * qf
    };
    let equations = |w: &[f64], k: f64| -> Vec<f64> {
        let sq = cos_product(w, w);
        let mut e: Vec<f64> = (0..=n)
            .map(|q| symbol(k, q) * w[q] + 0.5 * eps * sq[q])
            .collect();
        e[0] = -w[0] + 0.5 * a * sq[0];
        e
    };
    let build = |w: &[f64], k: f64| -> PeriodicWave {
        let amps: Vec<f64> = w.iter().map(|v| v * eps).collect();
        PeriodicWave {
            a,
            c,
            k,
            profile: TruncatedFourierSeries::from_cosines(n, &amps),
            source: WaveSource::Newton { iterations: 0 },
            residual_norm: 0.0,
            newton_history: vec![],
        }
    };

    let mut history = Vec::new();
    for iter in 0..=MAX_NEWTON_ITERATIONS {
        let mut wave = build(&w, k);
        let res = residual_sup_norm(&wave)?;
        history.push(res);
        let e = equations(&w, k);
        let emax = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        // converged once the Galerkin equations sit at rounding level
        let stalled = history.len() >= 2 && res >= 0.5 * history[history.len() - 2];
        if res <= tol && (emax <= 1e-15 || stalled || res == 0.0) {
            wave.source = WaveSource::Newton { iterations: iter };
            wave.residual_norm = res;
            wave.newton_history = history;
            return Ok(wave);
        }
        if iter == MAX_NEWTON_ITERATIONS {
            break;
        }
        // Jacobian: columns for w_0, w_2..w_N, then k
        let unknowns: Vec<usize> = std::iter::once(0).chain(2..=n).collect();
        let dim = n + 1;
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for (col, &j) in unknowns.iter().enumerate() {
            let mut basis = vec![0.0; n + 1];
            basis[j] = 1.0;
            let dsq = cos_product(w.as_slice(), &basis);
            for q in 0..=n {
                let lin = if q == j { symbol(k, q) } else { 0.0 };
                jac[(q, col)] = lin + eps * dsq[q];
            }
            jac[(0, col)] = if j == 0 { -1.0 } else { 0.0 } + a * dsq[0];
        }
        for q in 1..=n {
            jac[(q, dim - 1)] = dsymbol(k, q) * w[q];
        }
        let rhs = DVector::from_vec(e.iter().map(|v| -v).collect());
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("Newton Jacobian for the periodic wave".into()))?;
        for (col, &j) in unknowns.iter().enumerate() {
            w[j] += step[col];
        }
        k += step[dim - 1];
    }
    Err(Error::Convergence {
        iterations: MAX_NEWTON_ITERATIONS,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}

/// Finite-difference check of the `c`-derivatives at `c = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CDerivativeReport {
    pub a: f64,
    pub h: f64,
    /// Central difference of `k²`.
    pub dk2: f64,
    /// `1 − q(a)`.
    pub dk2_expected: f64,
    /// Mean of the central difference of `p`.
    pub dp_mean: f64,
    /// `q(a)`.
    pub dp_mean_expected: f64,
    /// `cos z` amplitude of the central difference of `p`.
    pub dp_cos: f64,
    pub dp_cos_expected: f64,
    /// Largest amplitude on modes `q ≥ 2` of the central difference of `p`.
    pub dp_higher_modes: f64,
    pub max_deviation: f64,
    pub passes: bool,
}

/// Constant in the pass criterion `max_deviation ≤ C h²`.
pub const C_DERIVATIVE_CONSTANT: f64 = 10.0;

pub fn c_derivative_check(a: f64, h: f64, n: usize) -> Result<CDerivativeReport> {
    if !(a != 0.0 && a.abs() <= 0.3) {
        return Err(Error::Range(format!(
            "amplitude a = {a} must satisfy 0 < |a| ≤ 0.3"
        )));
    }
    if !(1e-5..=1e-3).contains(&h) {
        return Err(Error::Range(format!("step h = {h} outside [1e-5, 1e-3]")));
    }
    let plus = solve_periodic_wave(a, h, n, DEFAULT_TOL)?;
    let minus = solve_periodic_wave(a, -h, n, DEFAULT_TOL)?;
    let dk2 = (plus.k * plus.k - minus.k * minus.k) / (2.0 * h);
    let dp = plus
        .profile
        .add_scaled(-1.0, &minus.profile)?
        .scaled(1.0 / (2.0 * h));
    let q = q_of_a(a);
    let dp_mean = dp.cos_amplitude(0).re;
    let dp_cos = dp.cos_amplitude(1).re;
    let dp_higher_modes = (2..=n)
        .map(|m| dp.cos_amplitude(m).norm())
        .fold(0.0, f64::max);
    let max_deviation = (dk2 - (1.0 - q))
        .abs()
        .max((dp_mean - q).abs())
        .max((dp_cos - a).abs())
        .max(dp_higher_modes);
    Ok(CDerivativeReport {
        a,
        h,
        dk2,
        dk2_expected: 1.0 - q,
        dp_mean,
        dp_mean_expected: q,
        dp_cos,
        dp_cos_expected: a,
        dp_higher_modes,
        max_deviation,
        passes: max_deviation <= C_DERIVATIVE_CONSTANT * h * h,
    })
}
