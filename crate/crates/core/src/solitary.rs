//! Generalized solitary waves: solutions of `u'''' + u'' − cu + ½u² = 0` made
//! of a localized core riding on a small periodic wave,
//!
//! ```text
//! u(x) = h(x) + φ_{a,c}(x + τ tanh(√c x/2)),
//! ```
//!
//! computed by reversible shooting in the first-order system
//! `U' = V(U, c)`, `V = (u₁, u₂, u₃, −u₂ + cu − ½u²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::ode::{dopri, dopri_fixed, Trajectory};
use crate::periodic::{solve_periodic_wave, PeriodicWave, DEFAULT_TOL, MAX_AMPLITUDE};

/// `(u, u₁, u₂, u₃)`.
pub type OdeState = [f64; 4];

/// Right-hand side `V(U, c)`.
pub fn ode_rhs(u: &OdeState, c: f64) -> OdeState {
    [u[1], u[2], u[3], -u[2] + c * u[0] - 0.5 * u[0] * u[0]]
}

/// Reflection `S = diag(1, −1, 1, −1)`.
pub fn reflect(u: &OdeState) -> OdeState {
    [u[0], -u[1], u[2], -u[3]]
}

/// First integral `E = u₃u₁ − ½u₂² + ½u₁² − ½cu² + u³/6`.
pub fn first_integral(u: &OdeState, c: f64) -> f64 {
    u[3] * u[1] - 0.5 * u[2] * u[2] + 0.5 * u[1] * u[1] - 0.5 * c * u[0] * u[0] + u[0].powi(3) / 6.0
}

/// Roots of `ν⁴ + ν² − c = 0`, ordered as `(+ν₊, −ν₊, +ν₋, −ν₋)` with
/// `ν±² = (−1 ± √(1+4c))/2`.
pub fn linear_eigenvalues(c: f64) -> [Complex64; 4] {
    let s = Complex64::new(1.0 + 4.0 * c, 0.0).sqrt();
    let plus = ((s - 1.0) * 0.5).sqrt();
    let minus = Complex64::i() * ((s + 1.0) * 0.5).sqrt();
    [plus, -plus, minus, -minus]
}

/// Variations of the resonance computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceOptions {
    /// Factor applied to the basis vectors `φ₀, φ₁`; duals get its inverse.
    pub basis_scale: f64,
    /// Keep the `−½u²` term of the vector field.
    pub quadratic: bool,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            basis_scale: 1.0,
            quadratic: true,
        }
    }
}

fn field(u: &OdeState, c: f64, quadratic: bool) -> OdeState {
    let q = if quadratic { 0.5 * u[0] * u[0] } else { 0.0 };
    [u[1], u[2], u[3], -u[2] + c * u[0] - q]
}

fn dot(a: &OdeState, b: &OdeState) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized kernel of `DV(0, 0)`: `φ₀`, `φ₁` with `Jφ₀ = 0`, `Jφ₁ = φ₀`,
/// and the dual `φ₁*` with `φ₁* J = 0`, `⟨φ₁, φ₁*⟩ = 1`.
pub fn resonance_basis(scale: f64) -> (OdeState, OdeState, OdeState) {
    (
        [scale, 0.0, 0.0, 0.0],
        [0.0, scale, 0.0, 0.0],
        [0.0, 1.0 / scale, 0.0, 1.0 / scale],
    )
}

/// `(d₁₀, d₂₀) = (⟨D²_{Uc}V φ₀, φ₁*⟩, ⟨D²_{UU}V[φ₀, φ₀], φ₁*⟩)` at `(U, c) = 0`.
pub fn resonance_coefficients() -> (f64, f64) {
    resonance_coefficients_with(ResonanceOptions::default())
}

pub fn resonance_coefficients_with(opts: ResonanceOptions) -> (f64, f64) {
    let (phi0, _, dual) = resonance_basis(opts.basis_scale);
    let v = |u: &OdeState, c: f64| field(u, c, opts.quadratic);
    let zero = [0.0; 4];
    // V is affine in c and quadratic in U, so these polarizations are exact
    let d2_uc: OdeState = {
        let (a, b, z1, z0) = (v(&phi0, 1.0), v(&phi0, 0.0), v(&zero, 1.0), v(&zero, 0.0));
        std::array::from_fn(|i| (a[i] - b[i]) - (z1[i] - z0[i]))
    };
    let d2_uu: OdeState = {
        let two: OdeState = std::array::from_fn(|i| 2.0 * phi0[i]);
        let (a, b, z) = (v(&two, 0.0), v(&phi0, 0.0), v(&zero, 0.0));
        std::array::from_fn(|i| a[i] - 2.0 * b[i] + z[i])
    };
    (dot(&d2_uc, &dual), dot(&d2_uu, &dual))
}

/// Leading-order core `h₀(x) = 3c sech²(√c x/2)`, the solitary wave of the
/// reduced equation `u'' − cu + ½u² = 0`.
pub fn leading_core(c: f64, x: f64) -> f64 {
    let s = 1.0 / (0.5 * c.sqrt() * x).cosh();
    3.0 * c * s * s
}

/// `sup |h₀'''' + h₀'' − ch₀ + ½h₀²|` by sixth-order finite differences on a
/// grid of spacing `0.02/√c` over `|x| ≤ 20/√c`.
pub fn leading_core_residual(c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 0.2) {
        return Err(Error::Domain(format!("speed c = {c} outside (0, 0.2]")));
    }
    let h = 0.02 / c.sqrt();
    let half = (20.0 / c.sqrt() / h).ceil() as usize;
    let d2 = Stencil::central(2);
    let d4 = Stencil::central(4);
    let pad = d4.radius;
    let xs: Vec<f64> = (0..2 * (half + pad) + 1)
        .map(|j| (j as f64 - (half + pad) as f64) * h)
        .collect();
    let u: Vec<f64> = xs.iter().map(|&x| leading_core(c, x)).collect();
    let res = (pad..xs.len() - pad)
        .map(|j| d4.apply(&u, j, h.powi(4)) + d2.apply(&u, j, h * h) - c * u[j] + 0.5 * u[j] * u[j])
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(res)
}

/// Trajectory of the first-order system with the drift of the first integral.
#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: Trajectory<4>,
    /// `max |E(U(x)) − E(U(x₀))|` over the accepted steps.
    pub energy_drift: f64,
}

/// Integrates the system from `u0` over `x_span` with tolerance `tol`.
pub fn integrate(u0: OdeState, c: f64, x_span: (f64, f64), tol: f64) -> Result<Integration> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!(
            "tolerance {tol:e} outside [1e-12, 1e-6]"
        )));
    }
    let trajectory = dopri(|_, u| ode_rhs(u, c), x_span.0, u0, x_span.1, tol)?;
    let e0 = first_integral(&u0, c);
    let energy_drift = trajectory
        .ys
        .iter()
        .map(|u| (first_integral(u, c) - e0).abs())
        .fold(0.0, f64::max);
    Ok(Integration {
        trajectory,
        energy_drift,
    })
}

/// Smallest tail amplitude accepted by [`shoot_solitary`].
pub const MIN_AMPLITUDE: f64 = 0.02;
/// Admissible speeds for [`shoot_solitary`].
pub const SPEED_RANGE: (f64, f64) = (0.02, 0.2);
/// Default matching point in units of `1/√c`.
pub const DEFAULT_MATCH: f64 = 16.0;
/// Default tolerance on the tail defect over the matching window.
pub const DEFAULT_MATCH_TOL: f64 = 1e-6;
/// Target step of the shooting integrator.
pub const SHOOT_STEP: f64 = 0.02;
/// Number of scan nodes for the initial bracket of `u(0)`.
pub const SCAN_NODES: usize = 96;

/// A generalized solitary wave on the symmetric grid `x_j = j h`,
/// `|x_j| ≤ x_match + 2π/k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolitaryProfile {
    pub c: f64,
    pub a: f64,
    pub k: f64,
    pub period: f64,
    pub x_match: f64,
    pub spacing: f64,
    pub grid: Vec<f64>,
    /// `(u, u₁, u₂, u₃)` at the grid points.
    pub states: Vec<OdeState>,
    /// Asymptotic phase shift, reduced to `(−π/k, π/k]`.
    pub tau: f64,
    /// Fundamental Fourier amplitude of `u` over the matching window.
    pub tail_amplitude: f64,
    /// Least-squares slope of `log|h|` on the core window.
    pub core_decay: f64,
    /// Fitted constants of `|h(x)| ≤ M c e^{−λ√c|x|}`.
    pub core_bound: (f64, f64),
    /// Sup-norm of the fourth-order equation along the grid.
    pub residual: f64,
    pub evenness_defect: f64,
    pub energy_drift: f64,
    /// `max |u − φ(x + τ tanh(√c x/2))|` over `[x_match, x_match + 2π/k]`.
    pub tail_defect: f64,
    /// Distance in the `(u, u₁)` plane to the periodic orbit at `x_match`.
    pub mismatch: f64,
    pub bisection_steps: usize,
    #[serde(skip)]
    pub wave: Option<PeriodicWave>,
}

impl SolitaryProfile {
    pub fn u(&self) -> Vec<f64> {
        self.states.iter().map(|s| s[0]).collect()
    }

    /// Index of the grid point `x = 0`.
    pub fn center(&self) -> usize {
        self.grid.len() / 2
    }

    /// Tail `φ(x + τ tanh(√c x/2))`.
    pub fn tail(&self, x: f64) -> f64 {
        let w = self
            .wave
            .as_ref()
            .expect("profile carries its periodic wave");
        w.state_at(x + self.tau * (0.5 * self.c.sqrt() * x).tanh())[0]
    }

    /// Core `h = u − tail` on the grid.
    pub fn core(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.states)
            .map(|(&x, s)| s[0] - self.tail(x))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Departure {
    Up,
    Down,
    None,
}

struct Shooter {
    c: f64,
    energy: f64,
    hi: f64,
    lo: f64,
    margin: f64,
    h: f64,
    far_steps: usize,
}

impl Shooter {
    /// `u₂(0)` placing the symmetric-section point on the orbit's energy level.
    fn u2_of(&self, u0: f64) -> Option<f64> {
        let c = self.c;
        let r = 2.0 * (u0.powi(3) / 6.0 - 0.5 * c * u0 * u0 - self.energy);
        (r >= 0.0).then(|| -r.sqrt())
    }

    fn initial(&self, u0: f64) -> Option<OdeState> {
        self.u2_of(u0).map(|u2| [u0, 0.0, u2, 0.0])
    }

    /// Direction in which the trajectory leaves the orbit's band.
    fn classify(&self, u0: f64) -> Departure {
        let Some(y0) = self.initial(u0) else {
            return Departure::Down;
        };
        let c = self.c;
        let mut dep = Departure::None;
        dopri_fixed(
            |_, u| ode_rhs(u, c),
            0.0,
            y0,
            self.h,
            self.far_steps,
            |x, u| {
                if u[0] > self.hi + self.margin + 2.0 * leading_core(c, x) || !u[0].is_finite() {
                    dep = Departure::Up;
                } else if u[0] < self.lo - self.margin {
                    dep = Departure::Down;
                }
                dep != Departure::None
            },
        );
        dep
    }

    fn march(&self, u0: f64, steps: usize, dir: f64) -> Trajectory<4> {
        let c = self.c;
        let y0 = self.initial(u0).expect("admissible start");
        dopri_fixed(
            |_, u| ode_rhs(u, c),
            0.0,
            y0,
            dir * self.h,
            steps,
            |_, _| false,
        )
    }
}

/// Nearest orbit phase to `(u, u₁)` and the distance in that plane.
fn nearest_phase(wave: &PeriodicWave, u: f64, u1: f64) -> (f64, f64) {
    let p = wave.period();
    let m = 256;
    let dist = |s: f64| {
        let st = wave.state_at(s);
        ((st[0] - u).powi(2) + (st[1] - u1).powi(2)).sqrt()
    };
    let mut s = (0..m)
        .map(|i| p * i as f64 / m as f64)
        .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .expect("non-empty");
    for _ in 0..20 {
        // Newton on the derivative of the squared distance
        let st = wave.state_at(s);
        let g = (st[0] - u) * st[1] + (st[1] - u1) * st[2];
        let dg = st[1] * st[1] + (st[0] - u) * st[2] + st[2] * st[2] + (st[1] - u1) * st[3];
        if dg <= 0.0 {
            break;
        }
        let step = g / dg;
        s -= step;
        if step.abs() < 1e-15 * p {
            break;
        }
    }
    (s.rem_euclid(p), dist(s))
}

/// Reduces a phase to `(−P/2, P/2]`.
fn centered(t: f64, p: f64) -> f64 {
    let r = t.rem_euclid(p);
    if r > 0.5 * p {
        r - p
    } else {
        r
    }
}

/// Shoots a generalized solitary wave of speed `c` whose tail is the
/// periodic wave of amplitude parameter `a`, matched at `x_match`.
///
/// The point `(u(0), 0, u₂(0), 0)` on the symmetric section is restricted to
/// the energy level of the periodic orbit, which fixes `u₂(0)` in terms of
/// `u(0)`. The remaining unknown is located by bisection on the direction in
/// which the trajectory leaves the orbit, which brackets the stable manifold
/// to the last bit. `tol` bounds the tail defect on the matching window.
pub fn shoot_solitary(c: f64, a: f64, x_match: f64, tol: f64) -> Result<SolitaryProfile> {
    if !(SPEED_RANGE.0..=SPEED_RANGE.1).contains(&c) {
        return Err(Error::Range(format!(
            "speed c = {c} outside [{}, {}]",
            SPEED_RANGE.0, SPEED_RANGE.1
        )));
    }
    if !(MIN_AMPLITUDE..=MAX_AMPLITUDE).contains(&a) {
        return Err(Error::Range(format!(
            "tail amplitude a = {a} outside [{MIN_AMPLITUDE}, {MAX_AMPLITUDE}]"
        )));
    }
    let sc = c.sqrt();
    if !(x_match >= 10.0 / sc) || !x_match.is_finite() {
        return Err(Error::Domain(format!(
            "matching point {x_match} below 10/√c = {}",
            10.0 / sc
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let wave = solve_periodic_wave(a, c, 32, DEFAULT_TOL)?;
    let period = wave.period();
    let x_end = x_match + period;
    let steps = (x_end / SHOOT_STEP).ceil() as usize;
    let h = x_end / steps as f64;
    let far = x_end + 40.0 / sc;
    let hi = wave.state_at(0.0)[0];
    let lo = wave.state_at(0.5 * period)[0];
    let shooter = Shooter {
        c,
        energy: first_integral(&wave.state_at(0.0), c),
        hi,
        lo,
        margin: 0.25 * (hi - lo),
        h,
        far_steps: (far / h).ceil() as usize,
    };

    // smallest admissible u(0) near the core amplitude, then a scan for a
    // change in the departure direction
    let seed = 3.0 * c + a * c;
    let (mut below, mut u_min) = (2.0 * c, seed);
    for _ in 0..80 {
        let mid = 0.5 * (below + u_min);
        if shooter.u2_of(mid).is_some() {
            u_min = mid;
        } else {
            below = mid;
        }
    }
    let u_max = seed + 0.5 * c;
    let m = SCAN_NODES;
    let nodes: Vec<f64> = (0..=m)
        .map(|i| u_min + (u_max - u_min) * i as f64 / m as f64)
        .collect();
    let labels: Vec<Departure> = nodes.iter().map(|&u| shooter.classify(u)).collect();
    let bracket = (0..m)
        .filter(|&i| {
            labels[i] != labels[i + 1]
                || labels[i] == Departure::None
                || labels[i + 1] == Departure::None
        })
        .min_by(|&i, &j| (nodes[i] - seed).abs().total_cmp(&(nodes[j] - seed).abs()))
        .ok_or_else(|| Error::NoOrbit {
            mismatch: f64::INFINITY,
            reason: format!(
                "no change of departure direction for u(0) in [{u_min:.6}, {u_max:.6}]"
            ),
        })?;
    let (mut a0, mut b0) = (nodes[bracket], nodes[bracket + 1]);
    let (la, _) = (labels[bracket], labels[bracket + 1]);
    let mut root = None;
    if la == Departure::None {
        root = Some(a0);
    }
    let mut bisection_steps = 0;
    while root.is_none() {
        let mid = 0.5 * (a0 + b0);
        if mid <= a0 || mid >= b0 {
            break;
        }
        bisection_steps += 1;
        match shooter.classify(mid) {
            Departure::None => root = Some(mid),
            d if d == la => a0 = mid,
            _ => b0 = mid,
        }
    }
    let u0 = root.unwrap_or(a0);

    let forward = shooter.march(u0, steps, 1.0);
    let backward = shooter.march(u0, steps, -1.0);
    let mut grid = Vec::with_capacity(2 * steps + 1);
    let mut states = Vec::with_capacity(2 * steps + 1);
    for i in (1..=steps).rev() {
        grid.push(backward.xs[i]);
        states.push(backward.ys[i]);
    }
    grid.extend_from_slice(&forward.xs);
    states.extend_from_slice(&forward.ys);
    let center = steps;

    let evenness_defect = (1..=steps)
        .map(|i| (states[center + i][0] - states[center - i][0]).abs())
        .fold(0.0, f64::max);
    let e0 = first_integral(&states[center], c);
    let energy_drift = states
        .iter()
        .map(|s| (first_integral(s, c) - e0).abs())
        .fold(0.0, f64::max);
    let d2 = Stencil::central(2);
    let u2: Vec<f64> = states.iter().map(|s| s[2]).collect();
    let residual = (d2.radius..states.len() - d2.radius)
        .map(|j| {
            let u = states[j][0];
            d2.apply(&u2, j, h * h) + u2[j] - c * u + 0.5 * u * u
        })
        .map(f64::abs)
        .fold(0.0, f64::max);

    // phase at the matching point, refined by Gauss–Newton over the window
    let at_match = forward.eval(x_match);
    let (s, mismatch) = nearest_phase(&wave, at_match[0], at_match[1]);
    let window: Vec<usize> = (center..states.len())
        .filter(|&j| grid[j] >= x_match)
        .collect();
    let mut tau = centered(s - x_match, period);
    for _ in 0..20 {
        let (mut num, mut den) = (0.0, 0.0);
        for &j in &window {
            let x = grid[j];
            let t = (0.5 * sc * x).tanh();
            let st = wave.state_at(x + tau * t);
            let r = states[j][0] - st[0];
            num += r * st[1] * t;
            den += (st[1] * t).powi(2);
        }
        let step = num / den;
        tau += step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    let tau = centered(tau, period);

    let mut profile = SolitaryProfile {
        c,
        a,
        k: wave.k,
        period,
        x_match,
        spacing: h,
        grid,
        states,
        tau,
        tail_amplitude: 0.0,
        core_decay: 0.0,
        core_bound: (0.0, 0.0),
        residual,
        evenness_defect,
        energy_drift,
        tail_defect: 0.0,
        mismatch,
        bisection_steps,
        wave: Some(wave.clone()),
    };
    profile.tail_defect = window
        .iter()
        .map(|&j| (profile.states[j][0] - profile.tail(profile.grid[j])).abs())
        .fold(0.0, f64::max);

    let samples = 256;
    let (mut ca, mut sa) = (0.0, 0.0);
    for i in 0..samples {
        let x = x_match + period * i as f64 / samples as f64;
        let u = forward.eval(x)[0];
        ca += u * (wave.k * x).cos();
        sa += u * (wave.k * x).sin();
    }
    profile.tail_amplitude = 2.0 * (ca * ca + sa * sa).sqrt() / samples as f64;

    let core = profile.core();
    let fit: Vec<(f64, f64)> = (center..profile.grid.len())
        .filter(|&j| {
            (2.0 / sc..=10.0 / sc).contains(&profile.grid[j]) && profile.grid[j] <= x_match
        })
        .map(|j| (profile.grid[j], core[j].abs().ln()))
        .collect();
    let xs: Vec<f64> = fit.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = fit.iter().map(|p| p.1).collect();
    profile.core_decay = crate::spectra::ls_slope(&xs, &ys);
    let lambda = -profile.core_decay / sc;
    let bound = (center..profile.grid.len())
        .filter(|&j| profile.grid[j] <= 10.0 / sc)
        .map(|j| core[j].abs() / (c * (-lambda * sc * profile.grid[j]).exp()))
        .fold(0.0, f64::max);
    profile.core_bound = (bound, lambda);

    if !(profile.tail_defect <= tol) {
        return Err(Error::NoOrbit {
            mismatch: profile.tail_defect,
            reason: format!(
                "tail defect {:.3e} on the matching window exceeds {tol:.1e}",
                profile.tail_defect
            ),
        });
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equilibria() {
        let c = 0.1;
        assert_eq!(ode_rhs(&[0.0; 4], c), [0.0; 4]);
        assert_eq!(ode_rhs(&[2.0 * c, 0.0, 0.0, 0.0], c), [0.0; 4]);
    }

    #[test]
    fn rhs_anticommutes_with_reflection() {
        let u = [0.3, -0.2, 0.7, 0.11];
        let lhs = ode_rhs(&reflect(&u), 0.1);
        let rhs = reflect(&ode_rhs(&u, 0.1));
        for i in 0..4 {
            assert_eq!(lhs[i], -rhs[i]);
        }
    }

    #[test]
    fn eigenvalues_at_zero_speed() {
        let e = linear_eigenvalues(0.0);
        assert_eq!(e[0].norm(), 0.0);
        assert_eq!(e[1].norm(), 0.0);
        assert_eq!(e[2], Complex64::new(0.0, 1.0));
        assert_eq!(e[3], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn eigenvalues_solve_the_quartic() {
        for c in [0.01, 0.04, 0.2] {
            for z in linear_eigenvalues(c) {
                let r = z.powi(4) + z * z - c;
                assert!(r.norm() < 1e-15);
            }
        }
        let e = linear_eigenvalues(0.04);
        assert_relative_eq!(e[0].re, 0.196_256, epsilon = 1e-6);
        assert_relative_eq!(e[2].im, 1.019_076, epsilon = 1e-6);
    }

    #[test]
    fn resonance_basis_is_a_jordan_chain() {
        let j = |v: &OdeState| [v[1], v[2], v[3], -v[2]];
        let (p0, p1, d1) = resonance_basis(1.0);
        assert_eq!(j(&p0), [0.0; 4]);
        assert_eq!(j(&p1), p0);
        assert_eq!(dot(&p1, &d1), 1.0);
        assert_eq!(dot(&p0, &d1), 0.0);
        // left null vector: d1ᵀ J = 0
        for e in 0..4 {
            let mut v = [0.0; 4];
            v[e] = 1.0;
            assert_eq!(dot(&d1, &j(&v)), 0.0);
        }
    }

    #[test]
    fn resonance_values() {
        assert_eq!(resonance_coefficients(), (1.0, -1.0));
        let no_quad = resonance_coefficients_with(ResonanceOptions {
            quadratic: false,
            ..Default::default()
        });
        assert_eq!(no_quad, (1.0, 0.0));
        // d₁₀ is invariant under the scaling, d₂₀ scales with the basis
        let scaled = resonance_coefficients_with(ResonanceOptions {
            basis_scale: 2.0,
            ..Default::default()
        });
        assert_eq!(scaled, (1.0, -2.0));
    }

    #[test]
    fn leading_core_solves_reduced_equation() {
        let c = 0.1;
        assert_relative_eq!(leading_core(c, 0.0), 3.0 * c, epsilon = 1e-15);
        let sc = c.sqrt();
        for i in 0..20 {
            let x = 0.7 * i as f64;
            let y = 0.5 * sc * x;
            let s = 1.0 / y.cosh().powi(2);
            // h₀'' = 3c (c/4)(4S − 6S²)
            let h2 = 0.75 * c * c * (4.0 * s - 6.0 * s * s);
            let h = leading_core(c, x);
            assert!((h2 - c * h + 0.5 * h * h).abs() < 1e-16);
        }
    }

    #[test]
    fn leading_core_residual_scales_as_c_cubed() {
        // h₀'''' = (3c³/16)(16S − 120S² + 120S³), maximal at S = 1
        for c in [0.02, 0.1] {
            let r = leading_core_residual(c).unwrap();
            let want = 3.0 * c.powi(3) / 16.0 * 16.0;
            assert_relative_eq!(r, want, max_relative = 1e-6);
        }
    }

    #[test]
    fn integrate_zero_stays_zero() {
        let r = integrate([0.0; 4], 0.1, (0.0, 10.0), 1e-10).unwrap();
        assert!(r.trajectory.ys.iter().all(|y| *y == [0.0; 4]));
        assert!(integrate([0.0; 4], 0.1, (0.0, 1.0), 1e-13).is_err());
    }

    #[test]
    fn periodic_orbit_returns_after_one_period() {
        let w = solve_periodic_wave(0.1, 0.1, 32, DEFAULT_TOL).unwrap();
        let p = w.period();
        let y0 = w.state_at(0.0);
        let r = integrate(y0, 0.1, (0.0, p), 1e-12).unwrap();
        let y1 = r.trajectory.last();
        for i in 0..4 {
            assert!(
                (y1[i] - y0[i]).abs() <= 1e-8,
                "component {i}: {} vs {}",
                y1[i],
                y0[i]
            );
        }
    }

    #[test]
    fn energy_is_conserved_along_integration() {
        // small c keeps the saddle growth e^{ν₊x} bounded over the span
        let w = solve_periodic_wave(0.2, 0.02, 32, DEFAULT_TOL).unwrap();
        let r = integrate(w.state_at(0.3), 0.02, (0.0, 200.0), 1e-10).unwrap();
        assert!(r.energy_drift <= 1e-8, "drift {}", r.energy_drift);
    }

    #[test]
    fn backward_integration_is_reflected_forward() {
        let y0 = [0.3, 0.0, -0.05, 0.0];
        let f = integrate(y0, 0.1, (0.0, 5.0), 1e-11).unwrap();
        let b = integrate(y0, 0.1, (0.0, -5.0), 1e-11).unwrap();
        let yf = f.trajectory.eval(3.0);
        let yb = reflect(&b.trajectory.eval(-3.0));
        for i in 0..4 {
            assert!((yf[i] - yb[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn shooting_finds_an_even_profile() {
        let c: f64 = 0.1;
        let xm = DEFAULT_MATCH / c.sqrt();
        let s = shoot_solitary(c, 0.2, xm, DEFAULT_MATCH_TOL).unwrap();
        assert_eq!(s.evenness_defect, 0.0);
        assert!(s.residual <= 1e-8);
        assert!(s.tail_defect <= DEFAULT_MATCH_TOL);
        assert!((s.tail_amplitude / (0.2 * c) - 1.0).abs() <= 0.2);
        assert!(s.tau.abs() <= 0.5 * s.period);
        let u = s.u();
        // peak is 3c to leading order in c
        assert!((u[s.center()] / (3.0 * c) - 1.0).abs() <= 0.15);
    }

    #[test]
    fn shooting_rejects_bad_parameters() {
        assert!(matches!(
            shoot_solitary(0.5, 0.1, 100.0, 1e-6),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            shoot_solitary(0.1, 0.01, 100.0, 1e-6),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            shoot_solitary(0.1, 0.1, 1.0, 1e-6),
            Err(Error::Domain(_))
        ));
    }
}
