//! Truncated Floquet–Fourier matrices of the pencil `Λ(∂_z+iγ) − ℬ_γ`,
//!
//! ```text
//! ℬ_γ = (∂_z+iγ)² (k⁴(∂_z+iγ)⁴ + k²(∂_z+iγ)² − c + p),
//! ```
//!
//! acting on modes `-N..=N`, and their spectra.
//!
//! Entries grow like `N⁶`, so a dense Schur decomposition only resolves
//! eigenvalues near zero to roughly `ε‖M‖`. The eigenvalues of interest sit in
//! a cluster of three near the origin, well separated from the rest; they are
//! recomputed from the exact Schur complement onto the three low modes,
//!
//! ```text
//! S(μ) = M_SS − M_SH (M_HH − μ)⁻¹ M_HS,      μ ∈ σ(M)  ⇔  μ ∈ σ(S(μ)),
//! ```
//!
//! by fixed-point iteration on `μ`, which resolves them to relative accuracy.

mod bloch;
mod critical;
mod weyl;

pub use bloch::{bloch_sweep, hausdorff_distance};
pub use critical::{
    critical_eigenvalue, default_lambda_grid, kernel_check, psi1_check, witness_scan, KernelReport,
    Psi1Report, WitnessPoint, WitnessScan, DEFAULT_WITNESS_POINTS,
};
pub(crate) use weyl::ls_slope;
pub use weyl::{smooth_ramp, weyl_ratio, WeylConfig, WeylReport};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::periodic::PeriodicWave;

type C = Complex64;

/// Largest matrix dimension accepted by [`spectrum`].
pub const MAX_DIMENSION: usize = 513;
/// Eigenvalues of modulus below this are identified with zero.
pub const ZERO_TOL: f64 = 1e-8;
/// Relative pairing tolerance for conjugate eigenvalues of real pencils.
pub const PAIRING_TOL: f64 = 1e-8;

/// Dense matrix of `Λ(∂_z+iγ) − ℬ_{a,c,γ}` on modes `-N..=N`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub n: usize,
    pub gamma: f64,
    pub lambda: C,
    pub entries: DMatrix<C>,
    pub wave: PeriodicWave,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Row/column index of mode `q`.
    pub fn index(&self, q: i64) -> usize {
        (q + self.n as i64) as usize
    }

    /// The pencil is real (commutes with conjugation composed with mode
    /// reflection) when `γ = 0` and `Λ` is real.
    pub fn is_real_pencil(&self) -> bool {
        self.gamma == 0.0 && self.lambda.im == 0.0
    }
}

/// Symbol of `k⁴∂⁴ + k²∂² − c` at wavenumber `s = q + γ`.
pub(crate) fn linear_symbol(wave: &PeriodicWave, s: f64) -> f64 {
    let k2 = wave.k * wave.k;
    k2 * k2 * s.powi(4) - k2 * s * s - wave.c
}

/// Assembles `M[q,q'] = iΛ(q+γ)δ + (q+γ)²(δ·s(q'+γ) + p̂_{q−q'})`.
pub fn assemble(wave: &PeriodicWave, gamma: f64, lambda: C, n: usize) -> Result<OperatorMatrix> {
    if n < wave.profile.order() {
        return Err(Error::Dimension(format!(
            "truncation N = {n} below the profile order {}",
            wave.profile.order()
        )));
    }
    if !(gamma > -0.5 && gamma <= 0.5) {
        return Err(Error::Domain(format!(
            "Floquet exponent γ = {gamma} outside (-1/2, 1/2]"
        )));
    }
    let dim = 2 * n + 1;
    let ni = n as i64;
    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        let q = i as i64 - ni;
        let qp = j as i64 - ni;
        let s = q as f64 + gamma;
        let mut v = wave.profile.coeff(q - qp);
        if q == qp {
            v += linear_symbol(wave, s);
        }
        v *= s * s;
        if q == qp {
            v += C::i() * lambda * s;
        }
        v
    });
    Ok(OperatorMatrix {
        n,
        gamma,
        lambda,
        entries,
        wave: wave.clone(),
    })
}

/// A `(Λ, eigenvalue)` pair with a real negative eigenvalue of the pencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lambda: f64,
    pub eigenvalue: f64,
}

/// Spectrum of a truncated pencil.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub gamma: f64,
    pub lambda: C,
    pub n: usize,
    pub eigenvalues: Vec<C>,
    /// Up to three eigenvalues nearest 0, refined when the cluster separates.
    pub critical: Vec<C>,
    /// Whether `critical` came from the Schur-complement refinement.
    pub refined: bool,
    /// Critical positive eigenvalue of `ℬ` (only for `γ = 0`, `Λ = 0`).
    pub nu: Option<f64>,
    pub witness: Option<Witness>,
    /// Set when `ν` is within 10× of the zero-identification tolerance.
    pub warning: Option<String>,
}

impl SpectrumReport {
    /// Largest distance between an eigenvalue and the conjugate of its
    /// nearest partner, relative to `max(1, |μ|)`.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| {
                let d = self
                    .eigenvalues
                    .iter()
                    .map(|w| (w - z.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                d / z.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    /// Real negative eigenvalue among the critical ones, if any.
    pub fn negative_real_critical(&self, imag_tol: f64) -> Option<f64> {
        self.critical
            .iter()
            .filter(|z| z.im.abs() <= imag_tol && z.re < -ZERO_TOL.min(imag_tol))
            .map(|z| z.re)
            .min_by(f64::total_cmp)
    }
}

/// Result of the Schur-complement refinement: eigenvalues and eigenvectors
/// (full mode vectors) of the critical cluster.
#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    pub values: Vec<C>,
    pub vectors: Vec<DVector<C>>,
}

/// Indices of the three smallest diagonal entries, if they separate from the
/// rest by at least a factor 10 relative to the cluster guesses.
fn cluster_split(m: &DMatrix<C>) -> (Vec<usize>, Vec<usize>) {
    let dim = m.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[(i, i)].norm().total_cmp(&m[(j, j)].norm()));
    let mut low: Vec<usize> = order[..3.min(dim)].to_vec();
    low.sort_unstable();
    let high = (0..dim).filter(|i| !low.contains(i)).collect();
    (low, high)
}

fn submatrix(m: &DMatrix<C>, rows: &[usize], cols: &[usize]) -> DMatrix<C> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

struct SchurComplement<'a> {
    m: &'a DMatrix<C>,
    low: Vec<usize>,
    high: Vec<usize>,
    m_ss: DMatrix<C>,
    m_sh: DMatrix<C>,
    m_hs: DMatrix<C>,
    m_hh: DMatrix<C>,
}

impl<'a> SchurComplement<'a> {
    fn new(m: &'a DMatrix<C>) -> Self {
        let (low, high) = cluster_split(m);
        Self {
            m,
            m_ss: submatrix(m, &low, &low),
            m_sh: submatrix(m, &low, &high),
            m_hs: submatrix(m, &high, &low),
            m_hh: submatrix(m, &high, &high),
            low,
            high,
        }
    }

    /// Smallest `|M_hh − μ|` over the high modes.
    fn gap(&self, mu: C) -> f64 {
        (0..self.high.len())
            .map(|i| (self.m_hh[(i, i)] - mu).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `(S(μ), (M_HH − μ)⁻¹ M_HS)`.
    fn eval(&self, mu: C) -> Result<(DMatrix<C>, DMatrix<C>)> {
        let mut shifted = self.m_hh.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] -= mu;
        }
        let y = linalg::solve_many(&shifted, &self.m_hs)?;
        let mut s = &self.m_ss - &self.m_sh * &y;
        for i in 0..s.nrows() {
            s[(i, i)] -= mu;
        }
        Ok((s, y))
    }

    /// Fixed point `μ = eig(S(μ))` started from `mu0`.
    fn solve_eigenvalue(&self, mu0: C) -> Result<C> {
        let mut mu = mu0;
        for _ in 0..60 {
            let (s, _) = self.eval(mu)?;
            // eigenvalues of S(μ) + μ I closest to μ
            let ev = linalg::eigenvalues(&s)?;
            let next = ev
                .iter()
                .map(|e| e + mu)
                .min_by(|x, y| (x - mu).norm().total_cmp(&(y - mu).norm()))
                .expect("cluster is non-empty");
            let delta = (next - mu).norm();
            mu = next;
            if delta <= 4.0 * f64::EPSILON * mu.norm().max(f64::MIN_POSITIVE) || delta == 0.0 {
                break;
            }
        }
        Ok(mu)
    }

    fn eigenvector(&self, mu: C) -> Result<DVector<C>> {
        let (s, y) = self.eval(mu)?;
        let low = null_vector(&s);
        let high = -(&y * &low);
        let mut full = DVector::zeros(self.m.nrows());
        for (i, &r) in self.low.iter().enumerate() {
            full[r] = low[i];
        }
        for (i, &r) in self.high.iter().enumerate() {
            full[r] = high[i];
        }
        let nrm = full.norm();
        Ok(full / C::new(nrm, 0.0))
    }
}

/// Unit vector spanning the (numerical) kernel of a small matrix: the
/// eigenvector of its smallest-modulus eigenvalue.
fn null_vector(s: &DMatrix<C>) -> DVector<C> {
    let e = linalg::eig(s, true).expect("small eigenproblem");
    let v = e.vectors.expect("vectors requested");
    let j = (0..e.values.len())
        .min_by(|&i, &j| e.values[i].norm().total_cmp(&e.values[j].norm()))
        .expect("non-empty");
    v.column(j).into_owned()
}

/// Refines the three eigenvalues of `M` closest to the origin. Returns `None`
/// when the low modes do not separate from the rest of the spectrum.
pub(crate) fn refine_cluster(m: &DMatrix<C>, with_vectors: bool) -> Result<Option<Cluster>> {
    if m.nrows() < 4 {
        return Ok(None);
    }
    let sc = SchurComplement::new(m);
    let (s0, _) = sc.eval(C::new(0.0, 0.0))?;
    let guesses = linalg::eigenvalues(&s0)?;
    let radius = guesses.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sc.gap(C::new(0.0, 0.0)) < 10.0 * radius.max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    let mut values = Vec::with_capacity(3);
    for g in guesses {
        values.push(sc.solve_eigenvalue(g)?);
    }
    let vectors = if with_vectors {
        values
            .iter()
            .map(|&mu| sc.eigenvector(mu))
            .collect::<Result<_>>()?
    } else {
        vec![]
    };
    Ok(Some(Cluster { values, vectors }))
}

/// Pairs eigenvalues of a real pencil with their conjugates and symmetrizes.
fn enforce_conjugation(values: &mut [C]) {
    let n = values.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let z = values[i];
        let tol = PAIRING_TOL * z.norm().max(1.0);
        if z.im.abs() <= tol {
            values[i].im = 0.0;
            done[i] = true;
            continue;
        }
        let partner = (0..n).filter(|&j| j != i && !done[j]).min_by(|&p, &q| {
            (values[p] - z.conj())
                .norm()
                .total_cmp(&(values[q] - z.conj()).norm())
        });
        if let Some(j) = partner {
            if (values[j] - z.conj()).norm() <= tol {
                let avg = 0.5 * (z + values[j].conj());
                values[i] = avg;
                values[j] = avg.conj();
                done[j] = true;
            }
        }
        done[i] = true;
    }
}

fn sort_by_modulus(v: &mut [C]) {
    v.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
}

/// All eigenvalues of the truncated pencil plus its refined critical triplet.
pub fn spectrum(m: &OperatorMatrix) -> Result<SpectrumReport> {
    let dim = m.dim();
    if dim > MAX_DIMENSION {
        return Err(Error::Dimension(format!(
            "matrix dimension {dim} exceeds {MAX_DIMENSION}"
        )));
    }
    let mut eigenvalues = linalg::eigenvalues(&m.entries)?;
    sort_by_modulus(&mut eigenvalues);
    let (critical, refined) = match refine_cluster(&m.entries, false)? {
        Some(cluster) => {
            // substitute each refined value for the nearest dense estimate
            let mut used = vec![false; eigenvalues.len()];
            for &mu in &cluster.values {
                if let Some(j) = (0..eigenvalues.len())
                    .filter(|&j| !used[j])
                    .min_by(|&p, &q| {
                        (eigenvalues[p] - mu)
                            .norm()
                            .total_cmp(&(eigenvalues[q] - mu).norm())
                    })
                {
                    eigenvalues[j] = mu;
                    used[j] = true;
                }
            }
            (cluster.values, true)
        }
        None => (eigenvalues.iter().take(3).copied().collect(), false),
    };
    let mut critical = critical;
    if m.is_real_pencil() {
        enforce_conjugation(&mut eigenvalues);
        enforce_conjugation(&mut critical);
    }
    sort_by_modulus(&mut eigenvalues);
    sort_by_modulus(&mut critical);
    let mut report = SpectrumReport {
        gamma: m.gamma,
        lambda: m.lambda,
        n: m.n,
        eigenvalues,
        critical,
        refined,
        nu: None,
        witness: None,
        warning: None,
    };
    if m.gamma == 0.0 && m.lambda.im == 0.0 && refined {
        let nu = critical::critical_eigenvalue(&m.wave, m.n)?;
        if m.lambda.re == 0.0 {
            report.nu = Some(nu);
            if nu.abs() <= 10.0 * ZERO_TOL {
                report.warning = Some(format!(
                    "critical eigenvalue {nu:.3e} is within 10× of the zero tolerance {ZERO_TOL:.0e}"
                ));
            }
        } else if nu > 0.0 {
            report.witness =
                report
                    .negative_real_critical(critical::imag_tol(nu))
                    .map(|eigenvalue| Witness {
                        lambda: m.lambda.re,
                        eigenvalue,
                    });
        }
    }
    Ok(report)
}
