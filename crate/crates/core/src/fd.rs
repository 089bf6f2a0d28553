//! Finite-difference stencils.

/// Finite-difference weights for the `m`-th derivative at 0 on `offsets`
/// (Fornberg's recursion).
pub(crate) fn fd_weights(m: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Sixth-order central stencil for the `m`-th derivative.
pub(crate) struct Stencil {
    pub radius: usize,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn central(m: usize) -> Self {
        let radius = m.div_ceil(2) + 2;
        let offsets: Vec<f64> = (0..=2 * radius).map(|i| i as f64 - radius as f64).collect();
        Self {
            radius,
            weights: fd_weights(m, &offsets),
        }
    }

    /// Derivative at padded index `j` with spacing `h`.
    pub fn apply(&self, f: &[f64], j: usize, hm: f64) -> f64 {
        let base = j - self.radius;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * f[base + i])
            .sum::<f64>()
            / hm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fornberg_matches_known_stencils() {
        let w = fd_weights(2, &[-1.0, 0.0, 1.0]);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(w[1], -2.0, epsilon = 1e-14);
        let w = fd_weights(1, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let want = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn stencils_are_sixth_order() {
        // derivatives of sin at 0.3 with h = 0.4 and 0.2
        for m in [1usize, 2, 4, 6] {
            let st = Stencil::central(m);
            let exact = match m % 4 {
                1 => 0.3f64.cos(),
                2 => -0.3f64.sin(),
                3 => -0.3f64.cos(),
                _ => 0.3f64.sin(),
            };
            let err = |h: f64| {
                let f: Vec<f64> = (0..=2 * st.radius)
                    .map(|i| (0.3 + (i as f64 - st.radius as f64) * h).sin())
                    .collect();
                (st.apply(&f, st.radius, h.powi(m as i32)) - exact).abs()
            };
            let order = (err(0.4) / err(0.2)).log2();
            assert!(order > 5.5, "m = {m}: order {order}");
        }
    }
}
