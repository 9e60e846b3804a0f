//! Property-based tests for the series ring, the monomial norms, and the
//! kernel expansion.

use num_complex::Complex64;
use proptest::prelude::*;

use wco_core::bergman::{kernel_coeffs, kernel_eval, monomial_norm_sq, SpaceParams};
use wco_core::series::{PowerSeries, Truncation};

fn coeff() -> impl Strategy<Value = Complex64> {
    ((-100i16..=100i16), (-100i16..=100i16))
        .prop_map(|(re, im)| Complex64::new(f64::from(re) / 25.0, f64::from(im) / 25.0))
}

fn disk_point(max_abs: f64) -> impl Strategy<Value = Complex64> {
    ((0.0..1.0f64), (0.0..std::f64::consts::TAU))
        .prop_map(move |(r, t)| Complex64::from_polar(max_abs * r.sqrt(), t))
}

/// A random polynomial supported on the caps of `half`, embedded in the
/// doubled truncation so that products stay exact.
fn sparse_poly(half: &Truncation, full: &Truncation, picks: &[(usize, Complex64)]) -> PowerSeries {
    let support: Vec<_> = half.indices().collect();
    let mut s = PowerSeries::zero(full.clone());
    for &(slot, v) in picks {
        let alpha = &support[slot % support.len()];
        let at = full.offset(alpha);
        s.coeffs_mut()[at] += v;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncated_product_is_commutative_and_distributive(
        xs in proptest::collection::vec((any::<usize>(), coeff()), 1..6),
        ys in proptest::collection::vec((any::<usize>(), coeff()), 1..6),
        zs in proptest::collection::vec((any::<usize>(), coeff()), 1..6),
    ) {
        let half = Truncation::new(vec![2, 1]);
        let full = Truncation::new(vec![4, 2]);
        let f = sparse_poly(&half, &full, &xs);
        let g = sparse_poly(&half, &full, &ys);
        let h = sparse_poly(&half, &full, &zs);

        let fg = f.mul(&g).unwrap();
        let gf = g.mul(&f).unwrap();
        for alpha in full.indices() {
            prop_assert!((fg.coeff(&alpha) - gf.coeff(&alpha)).norm() < 1e-12);
        }

        let gs = g.add(&h).unwrap();
        let lhs = f.mul(&gs).unwrap();
        let rhs = f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap();
        for alpha in full.indices() {
            prop_assert!((lhs.coeff(&alpha) - rhs.coeff(&alpha)).norm() < 1e-11);
        }
    }

    #[test]
    fn exact_products_evaluate_pointwise(
        xs in proptest::collection::vec((any::<usize>(), coeff()), 1..6),
        ys in proptest::collection::vec((any::<usize>(), coeff()), 1..6),
        z0 in disk_point(0.8),
        z1 in disk_point(0.8),
    ) {
        let half = Truncation::new(vec![2, 1]);
        let full = Truncation::new(vec![4, 2]);
        let f = sparse_poly(&half, &full, &xs);
        let g = sparse_poly(&half, &full, &ys);
        let z = [z0, z1];
        let prod = f.mul(&g).unwrap().eval(&z);
        let sep = f.eval(&z) * g.eval(&z);
        let scale = 1.0 + prod.norm().max(sep.norm());
        prop_assert!((prod - sep).norm() / scale < 1e-12);
    }

    #[test]
    fn monomial_norms_follow_the_ratio_recurrence(
        ell in proptest::collection::vec(0usize..4, 1..4),
        alpha_seed in proptest::collection::vec(0usize..7, 1..4),
        j in any::<usize>(),
    ) {
        let d = ell.len();
        let sp = SpaceParams::new(ell.clone());
        let alpha: Vec<usize> = (0..d).map(|k| alpha_seed[k % alpha_seed.len()]).collect();
        let j = j % d;
        let mut alpha_up = alpha.clone();
        alpha_up[j] += 1;

        let base = monomial_norm_sq(&alpha, &sp);
        let up = monomial_norm_sq(&alpha_up, &sp);
        prop_assert!(base > 0.0 && up > 0.0);
        let expected_ratio =
            (alpha[j] as f64 + 1.0) / (alpha[j] as f64 + ell[j] as f64 + 2.0);
        prop_assert!((up / base - expected_ratio).abs() < 1e-12);
    }

    #[test]
    fn kernel_partial_sums_approach_the_closed_form(
        ell in proptest::collection::vec(0usize..3, 1..3),
        zr in 0.05..0.45f64,
        zt in 0.0..std::f64::consts::TAU,
        ur in 0.05..0.45f64,
        ut in 0.0..std::f64::consts::TAU,
    ) {
        let d = ell.len();
        let sp = SpaceParams::new(ell);
        let z: Vec<_> = (0..d)
            .map(|k| Complex64::from_polar(zr, zt + k as f64))
            .collect();
        let u: Vec<_> = (0..d)
            .map(|k| Complex64::from_polar(ur, ut + 0.5 * k as f64))
            .collect();

        let closed = kernel_eval(&z, &u, &sp).unwrap();
        let caps = Truncation::new(vec![24; d]);
        let coeffs = kernel_coeffs(&z, &caps, &sp).unwrap();
        let mut partial = Complex64::new(0.0, 0.0);
        for alpha in caps.indices() {
            let mono: Complex64 = alpha
                .iter()
                .enumerate()
                .map(|(k, &a)| u[k].powu(a as u32))
                .product();
            partial += coeffs.coeff(&alpha) * mono;
        }
        // |z_k·u_k| ≤ 0.45² per coordinate; the tail past degree 24 sits far
        // below the assertion threshold for these exponents.
        prop_assert!((closed - partial).norm() < 1e-9, "gap {}", (closed - partial).norm());
    }

    #[test]
    fn kernel_coefficients_are_conjugate_monomials_over_norms(
        zr in 0.1..0.6f64,
        zt in 0.0..std::f64::consts::TAU,
        a0 in 0usize..5,
        a1 in 0usize..5,
    ) {
        let sp = SpaceParams::new(vec![1, 2]);
        let z = vec![
            Complex64::from_polar(zr, zt),
            Complex64::from_polar(0.9 * zr, 1.3 * zt),
        ];
        let caps = Truncation::new(vec![6, 6]);
        let coeffs = kernel_coeffs(&z, &caps, &sp).unwrap();
        let alpha = vec![a0, a1];
        let expected = (z[0].conj().powu(a0 as u32) * z[1].conj().powu(a1 as u32))
            / monomial_norm_sq(&alpha, &sp);
        prop_assert!((coeffs.coeff(&alpha) - expected).norm() < 1e-12);
    }
}
