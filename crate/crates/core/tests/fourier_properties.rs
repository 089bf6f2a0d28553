use num_complex::Complex64;
use proptest::prelude::*;

use kawahara::TruncatedFourierSeries;

type C = Complex64;

/// Series of order `n` with coefficients on `|q| ≤ band` only.
fn banded(n: usize, band: usize) -> impl Strategy<Value = TruncatedFourierSeries> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * band + 1).prop_map(move |v| {
        let mut coeffs = vec![C::new(0.0, 0.0); 2 * n + 1];
        for (i, (re, im)) in v.into_iter().enumerate() {
            coeffs[n - band + i] = C::new(re, im);
        }
        TruncatedFourierSeries::from_coeffs(n, coeffs).unwrap()
    })
}

fn close(a: &[C], b: &[C], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

proptest! {
    #[test]
    fn convolution_is_pointwise_product(f in banded(8, 4), g in banded(8, 4)) {
        let h = f.convolve(&g).unwrap();
        let m = 32;
        let want: Vec<C> = f.sample(m).iter().zip(g.sample(m)).map(|(a, b)| a * b).collect();
        prop_assert!(close(&h.sample(m), &want, 1e-12));
    }

    #[test]
    fn convolution_commutes(f in banded(6, 6), g in banded(6, 6)) {
        let fg = f.convolve(&g).unwrap();
        let gf = g.convolve(&f).unwrap();
        prop_assert!(close(fg.coeffs(), gf.coeffs(), 1e-14));
    }

    #[test]
    fn samples_round_trip(f in banded(7, 7), extra in 0usize..10) {
        let m = 15 + extra;
        let back = TruncatedFourierSeries::from_samples(7, &f.sample(m)).unwrap();
        prop_assert!(close(back.coeffs(), f.coeffs(), 1e-13));
    }

    #[test]
    fn derivative_orders_compose(f in banded(5, 5), gamma in -0.5..0.5f64) {
        let twice = f.differentiate(1, gamma).differentiate(1, gamma);
        let once = f.differentiate(2, gamma);
        prop_assert!(close(twice.coeffs(), once.coeffs(), 1e-12));
    }

    #[test]
    fn derivative_matches_difference_quotient(f in banded(4, 4), z in 0.0..std::f64::consts::TAU) {
        let h = 1e-5;
        let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        let d = f.differentiate(1, 0.0).eval(z);
        prop_assert!((fd - d).norm() <= 1e-6 * (1.0 + d.norm()));
    }

    #[test]
    fn cosine_series_stay_real_and_even(a in prop::collection::vec(-1.0..1.0f64, 5)) {
        let f = TruncatedFourierSeries::from_cosines(4, &a);
        let sq = f.convolve(&f).unwrap();
        prop_assert!(sq.check_real(1e-14) && sq.check_even(1e-14));
        prop_assert!(f.differentiate(2, 0.0).check_even(1e-14));
    }
}

#[test]
fn mismatched_orders_are_rejected() {
    let f = TruncatedFourierSeries::zeros(3);
    let g = TruncatedFourierSeries::zeros(4);
    assert!(f.convolve(&g).is_err());
    assert!(f.add_scaled(1.0, &g).is_err());
    assert!(TruncatedFourierSeries::from_samples(4, &[C::new(0.0, 0.0); 8]).is_err());
}
