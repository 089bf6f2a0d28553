//! Adaptive Dormand–Prince 5(4) integrator with continuous output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Accepted steps with the coefficients of the continuous extension.
#[derive(Debug, Clone)]
pub struct Trajectory<const D: usize> {
    pub xs: Vec<f64>,
    pub ys: Vec<[f64; D]>,
    dense: Vec<[[f64; D]; 4]>,
}

impl<const D: usize> Trajectory<D> {
    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        *self.xs.last().expect("non-empty trajectory")
    }

    pub fn last(&self) -> [f64; D] {
        *self.ys.last().expect("non-empty trajectory")
    }

    pub fn steps(&self) -> usize {
        self.xs.len() - 1
    }

    /// State at `x` from the fourth-order continuous extension. Panics when
    /// `x` lies outside the integrated span.
    pub fn eval(&self, x: f64) -> [f64; D] {
        let (x0, x1) = (self.start(), self.end());
        let forward = x1 >= x0;
        let inside = if forward {
            x >= x0 && x <= x1
        } else {
            x <= x0 && x >= x1
        };
        assert!(inside, "x = {x} outside [{x0}, {x1}]");
        if self.xs.len() == 1 {
            return self.ys[0];
        }
        // index of the step containing x
        let i = match self.xs.binary_search_by(|p| {
            if forward {
                p.total_cmp(&x)
            } else {
                x.total_cmp(p)
            }
        }) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let th = (x - self.xs[i]) / h;
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.dense[i];
        let y0 = &self.ys[i];
        std::array::from_fn(|j| y0[j] + th * (r2[j] + th1 * (r3[j] + th * (r4[j] + th1 * r5[j]))))
    }
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|j| y[j] + h * terms.iter().map(|(a, k)| a * k[j]).sum::<f64>())
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction) with
/// relative and absolute tolerance `tol`.
pub fn dopri<const D: usize, F>(
    f: F,
    x0: f64,
    y0: [f64; D],
    x1: f64,
    tol: f64,
) -> Result<Trajectory<D>>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut traj = Trajectory {
        xs: vec![x0],
        ys: vec![y0],
        dense: vec![],
    };
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = dir * initial_step(&y, &k1, tol).min(span.abs());
    let mut last_err: f64 = 1e-4;
    let mut rejected = false;
    loop {
        let hmin = 16.0 * f64::EPSILON * x.abs().max(1.0);
        if h.abs() < hmin {
            return Err(Error::StepUnderflow { x, h: h.abs() });
        }
        let remaining = x1 - x;
        if (h - remaining) * dir > 0.0 {
            h = remaining;
        }
        let st = dp_step(&f, x, &y, &k1, h, tol);
        let (y1, k7, err) = (st.y1, st.k7, st.err);
        if err <= 1.0 {
            let xn = if (x + h - x1) * dir >= 0.0 { x1 } else { x + h };
            traj.dense.push(st.dense);
            traj.xs.push(xn);
            traj.ys.push(y1);
            x = xn;
            y = y1;
            k1 = k7;
            if x == x1 {
                return Ok(traj);
            }
            // PI step-size control
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0);
            let fac = if rejected { fac.min(1.0) } else { fac };
            h *= fac.clamp(0.2, 10.0);
            last_err = err.max(1e-4);
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
        }
    }
}

struct Step<const D: usize> {
    y1: [f64; D],
    k7: [f64; D],
    err: f64,
    dense: [[f64; D]; 4],
}

/// One Dormand–Prince step of size `h` from `(x, y)` with `k1 = f(x, y)`.
fn dp_step<const D: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
    tol: f64,
) -> Step<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let y = *y;
    let k1 = *k1;
    let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
    let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(
        x + C4 * h,
        &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = f(
        x + C5 * h,
        &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + h,
        &axpy(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y1 = axpy(
        &y,
        h,
        &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(x + h, &y1);
    let mut err = 0.0;
    for j in 0..D {
        let e = h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
        let sc = tol + tol * y[j].abs().max(y1[j].abs());
        err += (e / sc).powi(2);
    }
    let r2: [f64; D] = std::array::from_fn(|j| y1[j] - y[j]);
    let r3: [f64; D] = std::array::from_fn(|j| h * k1[j] - r2[j]);
    let r4: [f64; D] = std::array::from_fn(|j| r2[j] - h * k7[j] - r3[j]);
    let r5: [f64; D] = std::array::from_fn(|j| {
        h * (D1 * k1[j] + D3 * k3[j] + D4 * k4[j] + D5 * k5[j] + D6 * k6[j] + D7 * k7[j])
    });
    Step {
        y1,
        k7,
        err: (err / D as f64).sqrt(),
        dense: [r2, r3, r4, r5],
    }
}

/// Fixed-step Dormand–Prince march of `steps` steps of size `h` from `x0`.
/// Stops early, after the offending step, when `stop(x, y)` returns true.
pub fn dopri_fixed<const D: usize, F, S>(
    f: F,
    x0: f64,
    y0: [f64; D],
    h: f64,
    steps: usize,
    mut stop: S,
) -> Trajectory<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    S: FnMut(f64, &[f64; D]) -> bool,
{
    let mut traj = Trajectory {
        xs: Vec::with_capacity(steps + 1),
        ys: Vec::with_capacity(steps + 1),
        dense: Vec::with_capacity(steps),
    };
    traj.xs.push(x0);
    traj.ys.push(y0);
    let mut y = y0;
    let mut k1 = f(x0, &y);
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let st = dp_step(&f, x, &y, &k1, h, 1.0);
        y = st.y1;
        k1 = st.k7;
        let xn = x0 + (i + 1) as f64 * h;
        traj.xs.push(xn);
        traj.ys.push(y);
        traj.dense.push(st.dense);
        if stop(xn, &y) {
            break;
        }
    }
    traj
}

fn initial_step<const D: usize>(y: &[f64; D], f: &[f64; D], tol: f64) -> f64 {
    let sc = |j: usize| tol + tol * y[j].abs();
    let d0 = (y
        .iter()
        .enumerate()
        .map(|(j, v)| (v / sc(j)).powi(2))
        .sum::<f64>()
        / D as f64)
        .sqrt();
    let d1 = (f
        .iter()
        .enumerate()
        .map(|(j, v)| (v / sc(j)).powi(2))
        .sum::<f64>()
        / D as f64)
        .sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(0.1)
}
