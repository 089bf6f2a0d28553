//! Dense complex eigensolver: balancing, Householder reduction to Hessenberg
//! form and single-shift QR iteration to complex Schur form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Eigenvalues, and optionally right eigenvectors (unit 2-norm columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C>,
    pub vectors: Option<DMatrix<C>>,
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(a: &DMatrix<C>) -> Result<Vec<C>> {
    Ok(eig(a, false)?.values)
}

/// Full eigendecomposition of a square complex matrix.
pub fn eig(a: &DMatrix<C>, want_vectors: bool) -> Result<Eigen> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigensolver needs a square matrix");
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: want_vectors.then(|| DMatrix::zeros(0, 0)),
        });
    }
    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut z = want_vectors.then(|| DMatrix::identity(n, n));
    hessenberg(&mut h, z.as_mut());
    schur(&mut h, z.as_mut())?;
    let values: Vec<C> = (0..n).map(|i| h[(i, i)]).collect();
    let vectors = z.map(|z| {
        let mut v = &z * triangular_eigenvectors(&h);
        for j in 0..n {
            for i in 0..n {
                v[(i, j)] *= scale[i];
            }
            let nrm = v.column(j).norm();
            if nrm > 0.0 {
                v.column_mut(j).scale_mut(1.0 / nrm);
            }
        }
        v
    });
    Ok(Eigen { values, vectors })
}

/// Diagonal similarity scaling by powers of two; returns the scale factors `d`
/// with `a ← D⁻¹ a D`.
fn balance(a: &mut DMatrix<C>) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c >= g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    d
}

/// In-place Householder reduction to upper Hessenberg form, accumulating the
/// unitary factor into `z` when given.
fn hessenberg(a: &mut DMatrix<C>, mut z: Option<&mut DMatrix<C>>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<C> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= vnorm);
        // a ← (I - 2vv^H) a
        for j in k..n {
            let dot: C = v
                .iter()
                .enumerate()
                .map(|(r, vi)| vi.conj() * a[(k + 1 + r, j)])
                .sum();
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= 2.0 * vi * dot;
            }
        }
        // a ← a (I - 2vv^H)
        for i in 0..n {
            let dot: C = v
                .iter()
                .enumerate()
                .map(|(r, vi)| a[(i, k + 1 + r)] * vi)
                .sum();
            for (r, vi) in v.iter().enumerate() {
                a[(i, k + 1 + r)] -= 2.0 * dot * vi.conj();
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let dot: C = v
                    .iter()
                    .enumerate()
                    .map(|(r, vi)| z[(i, k + 1 + r)] * vi)
                    .sum();
                for (r, vi) in v.iter().enumerate() {
                    z[(i, k + 1 + r)] -= 2.0 * dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-s̄, c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C, y: C) -> (f64, C) {
    let ax = x.norm();
    if y.norm() == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let r = ax.hypot(y.norm());
    (ax / r, (x / ax) * y.conj() / r)
}

/// Single-shift QR iteration on a Hessenberg matrix, leaving the full upper
/// triangular Schur factor in `h`.
fn schur(h: &mut DMatrix<C>, mut z: Option<&mut DMatrix<C>>) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let hnorm = h.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if hnorm == 0.0 {
        return Ok(());
    }
    let max_total = 60 * n.max(10);
    let mut total = 0;
    let mut its = 0;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].l1_norm() + h[(l, l)].l1_norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(l, l - 1)].l1_norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_total {
            return Err(Error::Eigensolver {
                iterations: total,
                unconverged: hi + 1,
                subdiagonal: h[(hi, hi - 1)].norm(),
            });
        }
        let mu = if its % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let col0 = if k > l { k - 1 } else { l };
            for j in col0..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + c * b;
            }
            let row1 = (k + 2).min(hi);
            for i in 0..=row1 {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let a = z[(i, k)];
                    let b = z[(i, k + 1)];
                    z[(i, k)] = a * c + b * s.conj();
                    z[(i, k + 1)] = -a * s + b * c;
                }
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(a: C, b: C, c: C, d: C) -> C {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let e1 = 0.5 * (a + d) + disc;
    let e2 = 0.5 * (a + d) - disc;
    if (e1 - d).norm() < (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Eigenvectors of an upper triangular matrix by back substitution.
fn triangular_eigenvectors(t: &DMatrix<C>) -> DMatrix<C> {
    let n = t.nrows();
    let tnorm = t
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = t[(i, k)];
            for j in i + 1..k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C::new(small, 0.0);
            }
            y[(i, k)] = -acc / den;
        }
        let nrm = y.column(k).norm();
        y.column_mut(k).scale_mut(1.0 / nrm);
    }
    y
}

/// Solves `a x = b` by LU factorization with partial pivoting.
pub fn solve(a: &DMatrix<C>, b: &DVector<C>) -> Result<DVector<C>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}×{} system", a.nrows(), a.ncols())))
}

/// Solves `a X = B` for a block of right-hand sides.
pub fn solve_many(a: &DMatrix<C>, b: &DMatrix<C>) -> Result<DMatrix<C>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}×{} system", a.nrows(), a.ncols())))
}

/// Inverse of a square matrix.
pub fn inverse(a: &DMatrix<C>) -> Result<DMatrix<C>> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{}×{} inverse", a.nrows(), a.ncols())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(n: usize, seed: u64) -> DMatrix<C> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| {
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Characteristic polynomial coefficients (monic, highest degree first) by
    /// the Faddeev–LeVerrier recursion.
    fn char_poly(a: &DMatrix<C>) -> Vec<C> {
        let n = a.nrows();
        let mut coeffs = vec![ONE];
        let mut m = DMatrix::<C>::zeros(n, n);
        for k in 1..=n {
            let am = a * &m;
            m = am + DMatrix::identity(n, n) * coeffs[k - 1];
            let ck = -(a * &m).trace() / k as f64;
            coeffs.push(ck);
        }
        coeffs
    }

    /// Durand–Kerner simultaneous root iteration followed by Newton polishing.
    fn poly_roots(p: &[C]) -> Vec<C> {
        let n = p.len() - 1;
        let eval = |z: C| p.iter().fold(ZERO, |acc, &c| acc * z + c);
        let deval = |z: C| {
            p.iter()
                .take(n)
                .enumerate()
                .fold(ZERO, |acc, (i, &c)| acc * z + c * (n - i) as f64)
        };
        let mut roots: Vec<C> = (0..n).map(|k| C::new(0.4, 0.9).powu(k as u32)).collect();
        for _ in 0..2000 {
            for i in 0..n {
                let mut den = ONE;
                for j in 0..n {
                    if i != j {
                        den *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / den;
                roots[i] -= step;
            }
        }
        for r in roots.iter_mut() {
            for _ in 0..5 {
                let d = deval(*r);
                if d.norm() > 0.0 {
                    *r -= eval(*r) / d;
                }
            }
        }
        roots
    }

    fn matched_distance(a: &[C], b: &[C]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn diagonal_matrix_is_exact() {
        let d = [
            C::new(3.0, 1.0),
            C::new(-2.0, 0.0),
            C::new(0.5, -4.0),
            C::new(1e6, 0.0),
        ];
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&d));
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        let mut want = d.to_vec();
        want.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert_eq!(ev, want);
    }

    #[test]
    fn random_6x6_matches_characteristic_polynomial() {
        for seed in 0..5 {
            let a = random_matrix(6, seed);
            let ev = eigenvalues(&a).unwrap();
            let roots = poly_roots(&char_poly(&a));
            assert!(matched_distance(&ev, &roots) < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let a = random_matrix(30, 7);
        let e = eig(&a, true).unwrap();
        let v = e.vectors.unwrap();
        for (j, lam) in e.values.iter().enumerate() {
            let x = v.column(j);
            let r = &a * x - x * *lam;
            assert!(r.norm() < 1e-11, "residual {}", r.norm());
        }
    }

    #[test]
    fn handles_zero_rows_and_grading() {
        let n = 40;
        let mut a = random_matrix(n, 3);
        for j in 0..n {
            a[(0, j)] = ZERO;
        }
        for i in 0..n {
            let s = (i as f64 + 1.0).powi(4);
            for j in 0..n {
                a[(i, j)] *= if i == j { s } else { 1.0 };
            }
        }
        let ev = eigenvalues(&a).unwrap();
        assert!(ev.iter().any(|z| z.norm() < 1e-9));
        let trace: C = (0..n).map(|i| a[(i, i)]).sum();
        let sum: C = ev.iter().sum();
        assert!((trace - sum).norm() < 1e-9 * trace.norm());
    }

    #[test]
    fn solve_roundtrip() {
        let a = random_matrix(8, 11);
        let x = DVector::from_fn(8, |i, _| C::new(i as f64, 1.0));
        let b = &a * &x;
        let y = solve(&a, &b).unwrap();
        assert!((y - x).norm() < 1e-12);
    }
}
