//! Truncated Fourier series of 2π-periodic functions.
//!
//! A series of order `N` stores the `2N+1` complex amplitudes of the modes
//! `-N..=N` densely, lowest mode first. All products are Galerkin products:
//! modes with `|q| > N` are dropped.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FLAG_TOL: f64 = 1e-12;

/// Finite complex Fourier series on `[0, 2π)` with symmetry flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct TruncatedFourierSeries {
    n: usize,
    coeffs: Vec<Complex64>,
    is_real: bool,
    is_even: bool,
}

impl TruncatedFourierSeries {
    /// The zero series; real and even.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
            is_real: true,
            is_even: true,
        }
    }

    /// Builds a series from coefficients ordered `-N..=N`. Symmetry flags are
    /// detected from the data.
    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n + 1 {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for N = {n}, got {}",
                2 * n + 1,
                coeffs.len()
            )));
        }
        let mut s = Self {
            n,
            coeffs,
            is_real: false,
            is_even: false,
        };
        s.is_real = s.check_real(FLAG_TOL);
        s.is_even = s.check_even(FLAG_TOL);
        Ok(s)
    }

    /// Real even series `amps[0] + Σ_{q≥1} amps[q] cos(qz)`.
    pub fn from_cosines(n: usize, amps: &[f64]) -> Self {
        let mut s = Self::zeros(n);
        for (q, &amp) in amps.iter().enumerate().take(n + 1) {
            if q == 0 {
                s.coeffs[n] = Complex64::new(amp, 0.0);
            } else {
                s.coeffs[n + q] = Complex64::new(0.5 * amp, 0.0);
                s.coeffs[n - q] = Complex64::new(0.5 * amp, 0.0);
            }
        }
        s
    }

    /// Real odd series `Σ_{q≥1} amps[q] sin(qz)`; `amps[0]` is ignored.
    pub fn from_sines(n: usize, amps: &[f64]) -> Self {
        let mut s = Self::zeros(n);
        s.is_even = false;
        for (q, &amp) in amps.iter().enumerate().take(n + 1).skip(1) {
            // sin(qz) = (e^{iqz} - e^{-iqz}) / 2i
            s.coeffs[n + q] = Complex64::new(0.0, -0.5 * amp);
            s.coeffs[n - q] = Complex64::new(0.0, 0.5 * amp);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    /// Coefficient of `e^{iqz}`; zero outside the stored range.
    pub fn coeff(&self, q: i64) -> Complex64 {
        if q.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(q + self.n as i64) as usize]
        }
    }

    /// Amplitude of `cos(qz)` for `q ≥ 1`, i.e. `c_q + c_{-q}`; for `q = 0` the mean.
    pub fn cos_amplitude(&self, q: usize) -> Complex64 {
        if q == 0 {
            self.coeff(0)
        } else {
            self.coeff(q as i64) + self.coeff(-(q as i64))
        }
    }

    /// Amplitude of `sin(qz)`, i.e. `i (c_q - c_{-q})`.
    pub fn sin_amplitude(&self, q: usize) -> Complex64 {
        Complex64::i() * (self.coeff(q as i64) - self.coeff(-(q as i64)))
    }

    pub fn check_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (0..=self.n as i64).all(|q| (self.coeff(-q) - self.coeff(q).conj()).norm() <= tol * scale)
    }

    pub fn check_even(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (1..=self.n as i64).all(|q| (self.coeff(-q) - self.coeff(q)).norm() <= tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli; an upper bound for the sup-norm.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `Σ c_q e^{iqz}`.
    pub fn eval(&self, z: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let q = j as f64 - self.n as f64;
                c * Complex64::from_polar(1.0, q * z)
            })
            .sum()
    }

    /// Values on `m` equispaced points `z_j = 2πj/m`.
    pub fn sample(&self, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|j| self.eval(2.0 * PI * j as f64 / m as f64))
            .collect()
    }

    /// Sup-norm estimated on `m` equispaced points.
    pub fn sup_norm_sampled(&self, m: usize) -> f64 {
        self.sample(m).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete transform of `m ≥ 2N+1` equispaced samples back onto modes `-N..=N`.
    pub fn from_samples(n: usize, samples: &[Complex64]) -> Result<Self> {
        let m = samples.len();
        if m < 2 * n + 1 {
            return Err(Error::Dimension(format!(
                "{m} samples cannot resolve {} modes",
                2 * n + 1
            )));
        }
        let coeffs = (-(n as i64)..=n as i64)
            .map(|q| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * (q * j as i64) as f64 / m as f64)
                    })
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect();
        Self::from_coeffs(n, coeffs)
    }

    /// Cauchy product truncated to modes `-N..=N`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot convolve series of orders {} and {}",
                self.n, other.n
            )));
        }
        let n = self.n as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for q in -n..=n {
            let lo = (-n).max(q - n);
            let hi = n.min(q + n);
            let mut acc = Complex64::new(0.0, 0.0);
            for r in lo..=hi {
                acc += self.coeff(r) * other.coeff(q - r);
            }
            out[(q + n) as usize] = acc;
        }
        let s = Self {
            n: self.n,
            coeffs: out,
            is_real: self.is_real && other.is_real,
            is_even: self.is_even && other.is_even,
        };
        s.debug_validate();
        Ok(s)
    }

    /// Applies `(∂_z + iγ)^m` modewise: coefficient `q` is multiplied by `(i(q+γ))^m`.
    pub fn differentiate(&self, m: u32, gamma: f64) -> Self {
        assert!((1..=6).contains(&m), "derivative order {m} outside 1..=6");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let q = j as f64 - self.n as f64;
                c * Complex64::new(0.0, q + gamma).powu(m)
            })
            .collect();
        let s = Self {
            n: self.n,
            coeffs,
            is_real: self.is_real && gamma == 0.0,
            is_even: self.is_even && m.is_multiple_of(2),
        };
        s.debug_validate();
        s
    }

    /// Copy with a different truncation order: zero-padded or truncated.
    pub fn resized(&self, n: usize) -> Self {
        let mut s = Self::zeros(n);
        for q in -(n.min(self.n) as i64)..=(n.min(self.n) as i64) {
            s.coeffs[(q + n as i64) as usize] = self.coeff(q);
        }
        s.is_real = self.is_real;
        s.is_even = self.is_even;
        s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.coeffs.iter_mut().for_each(|c| *c *= factor);
        s
    }

    /// `self + factor * other`; orders must match.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot add series of orders {} and {}",
                self.n, other.n
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self {
            n: self.n,
            coeffs,
            is_real: self.is_real && other.is_real,
            is_even: self.is_even && other.is_even,
        })
    }

    fn debug_validate(&self) {
        debug_assert!(
            !self.is_real || self.check_real(1e-10),
            "realness flag violated"
        );
        debug_assert!(
            !self.is_even || self.check_even(1e-10),
            "evenness flag violated"
        );
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    #[serde(rename = "N")]
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<TruncatedFourierSeries> for SeriesJson {
    fn from(s: TruncatedFourierSeries) -> Self {
        Self {
            n: s.n,
            re: s.coeffs.iter().map(|c| c.re).collect(),
            im: s.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

impl TryFrom<SeriesJson> for TruncatedFourierSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::Dimension("re and im arrays differ in length".into()));
        }
        let coeffs =
            j.re.iter()
                .zip(&j.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect();
        Self::from_coeffs(j.n, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cos_q(n: usize, q: usize) -> TruncatedFourierSeries {
        let mut amps = vec![0.0; q + 1];
        amps[q] = 1.0;
        TruncatedFourierSeries::from_cosines(n, &amps)
    }

    #[test]
    fn convolve_identity() {
        let one = TruncatedFourierSeries::from_cosines(4, &[1.0]);
        let p = one.convolve(&one).unwrap();
        assert_eq!(p.coeff(0), Complex64::new(1.0, 0.0));
        assert!((1..=4).all(|q| p.coeff(q) == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn convolve_cos_squared() {
        let c = cos_q(4, 1);
        let p = c.convolve(&c).unwrap();
        assert_abs_diff_eq!(p.coeff(0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(2).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(-2).re, 0.25, epsilon = 1e-15);
        assert!(p.is_real() && p.is_even());
    }

    #[test]
    fn convolve_cos_cos2_against_sampling_oracle() {
        let n = 8;
        let f = cos_q(n, 1);
        let g = cos_q(n, 2);
        // oracle: pointwise product on 64 points, then discrete transform
        let fs = f.sample(64);
        let gs = g.sample(64);
        let prod: Vec<Complex64> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
        let oracle = TruncatedFourierSeries::from_samples(n, &prod).unwrap();
        let p = f.convolve(&g).unwrap();
        for q in -(n as i64)..=n as i64 {
            assert_abs_diff_eq!(p.coeff(q).re, oracle.coeff(q).re, epsilon = 1e-14);
            assert_abs_diff_eq!(p.coeff(q).im, oracle.coeff(q).im, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.coeff(1).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(-3).re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn convolve_truncates_high_modes() {
        let c = cos_q(3, 3);
        let p = c.convolve(&c).unwrap();
        // cos² 3z = ½ + ½ cos 6z; mode 6 lies outside N = 3
        assert_abs_diff_eq!(p.coeff(0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.abs_sum(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn convolve_mismatched_orders() {
        let err = cos_q(3, 1).convolve(&cos_q(4, 1)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn differentiate_cosines() {
        let c = cos_q(4, 1);
        let d2 = c.differentiate(2, 0.0);
        assert_abs_diff_eq!(d2.cos_amplitude(1).re, -1.0, epsilon = 1e-15);
        assert!(d2.is_even() && d2.is_real());
        let d4 = c.differentiate(4, 0.0);
        assert_abs_diff_eq!(d4.cos_amplitude(1).re, 1.0, epsilon = 1e-15);
        let d1 = c.differentiate(1, 0.0);
        assert!(!d1.is_even());
        assert_abs_diff_eq!(d1.sin_amplitude(1).re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn differentiate_shifted_constant() {
        let one = TruncatedFourierSeries::from_cosines(2, &[1.0]);
        let d = one.differentiate(1, 0.5);
        assert_abs_diff_eq!(d.coeff(0).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.coeff(0).im, 0.5, epsilon = 1e-15);
        assert!(!d.is_real());
    }

    #[test]
    fn eval_examples() {
        let c = cos_q(4, 1);
        assert_abs_diff_eq!(c.eval(0.0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.eval(PI).re, -1.0, epsilon = 1e-15);
        let f = TruncatedFourierSeries::from_cosines(4, &[0.5, 0.0, 0.5]);
        assert_abs_diff_eq!(f.eval(PI / 4.0).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn from_coeffs_rejects_wrong_length() {
        assert!(TruncatedFourierSeries::from_coeffs(2, vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn json_layout() {
        let s = TruncatedFourierSeries::from_cosines(1, &[1.0, 2.0]);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["N"], 1);
        assert_eq!(v["re"], serde_json::json!([1.0, 1.0, 1.0]));
        assert_eq!(v["im"], serde_json::json!([0.0, 0.0, 0.0]));
        let back: TruncatedFourierSeries = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
