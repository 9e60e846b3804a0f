//! Property-based tests for the linear-fractional layer: the disk self-map
//! criterion against boundary sampling, the reflection identities, and
//! projective comparison.

use num_complex::Complex64;
use proptest::prelude::*;

use wco_core::moebius::{omega_p, DiskMap, Lft};

fn small_complex() -> impl Strategy<Value = Complex64> {
    ((-100i16..=100i16), (-100i16..=100i16))
        .prop_map(|(re, im)| Complex64::new(f64::from(re) / 50.0, f64::from(im) / 50.0))
}

fn punctured_disk_point() -> impl Strategy<Value = Complex64> {
    ((0.05..0.9f64), (0.0..std::f64::consts::TAU))
        .prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Largest |g| over `n` equally spaced boundary points, or `None` if a pole
/// lands on one of them.
fn boundary_sup(g: &Lft, n: usize) -> Option<f64> {
    let mut sup = 0.0f64;
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        let z = Complex64::from_polar(1.0, t);
        let denom = g.c * z + g.d;
        if denom.norm() < 1e-12 {
            return None;
        }
        sup = sup.max(((g.a * z + g.b) / denom).norm());
    }
    Some(sup)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn self_map_margin_agrees_with_boundary_search(
        a in small_complex(),
        b in small_complex(),
        c in small_complex(),
    ) {
        // d = 1 normalization; degenerate (rank-one) coefficient vectors are
        // excluded by requiring a nonzero determinant.
        let g = Lft { a, b, c, d: Complex64::new(1.0, 0.0) };
        prop_assume!(g.det().norm() > 1e-6);
        let check = g.self_map_check();
        let Some(sup) = boundary_sup(&g, 2048) else {
            return Ok(());
        };
        // Boundary modulus alone is not an oracle: with a pole inside the
        // disk the map is unbounded there no matter how small the boundary
        // values are. Self-map ⇔ pole outside the closed disk AND sup ≤ 1.
        let pole_outside = c.norm() == 0.0 || 1.0 / c.norm() > 1.0;
        // Only decide away from the boundary of the criterion, where the
        // finite boundary sample cannot be fooled.
        if check.margin > 1e-3 {
            prop_assert!(pole_outside, "margin {} but pole inside", check.margin);
            prop_assert!(sup <= 1.0 + 1e-9, "margin {} but sup {}", check.margin, sup);
        }
        if check.margin < -1e-3 {
            prop_assert!(
                !pole_outside || sup > 1.0 - 1e-3,
                "margin {} but pole at {} and sup {}",
                check.margin,
                1.0 / c.norm(),
                sup
            );
        }
    }

    #[test]
    fn reflection_exchanges_zero_and_base_point(p in punctured_disk_point()) {
        let om = omega_p(p).unwrap();
        let at_p = om.eval(p).unwrap();
        let at_zero = om.eval(Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!(at_p.norm() < 1e-13);
        prop_assert!((at_zero - p.conj()).norm() < 1e-13);
        // The antilinear square is the identity: conj(ω(conj(ω(z)))) = z.
        let z = Complex64::new(0.31, -0.17);
        let round = om.eval(om.eval(z).unwrap().conj()).unwrap().conj();
        prop_assert!((round - z).norm() < 1e-12);
        // ω_p maps the disk into itself with unit boundary modulus.
        let check = om.self_map_check();
        prop_assert!(check.margin.abs() <= 1e-10, "reflection margin {}", check.margin);
    }

    #[test]
    fn projective_gap_vanishes_only_under_common_rescaling(
        a in small_complex(),
        b in small_complex(),
        c in small_complex(),
        s in small_complex(),
        t in small_complex(),
    ) {
        let g = Lft { a, b, c, d: Complex64::new(1.0, 0.0) };
        prop_assume!(s.norm() > 0.05);
        let scaled = Lft { a: s * g.a, b: s * g.b, c: s * g.c, d: s * g.d };
        prop_assert!(g.projective_gap(&scaled) < 1e-13);
        prop_assert!(g.projectively_eq(&scaled, 1e-12));

        // Bumping a single coefficient is seen: with both d-entries at 1, the
        // (a, d) minor of the pair equals t exactly, and the scale factor is
        // bounded by the coefficient box.
        prop_assume!(t.norm() > 0.05);
        let bumped = Lft { a: g.a + t, ..g };
        let gap = g.projective_gap(&bumped);
        prop_assert!(gap > t.norm() / 40.0, "gap {gap}");
    }

    #[test]
    fn composition_preserves_the_self_map_property(
        r1 in 0.0..0.45f64,
        t1 in 0.0..std::f64::consts::TAU,
        r2 in 0.0..0.45f64,
        t2 in 0.0..std::f64::consts::TAU,
        lam in 0.3..1.0f64,
        w in small_complex(),
        rot in 0.0..std::f64::consts::TAU,
    ) {
        // g1 affine with |slope| + |offset| < 1; g2 a damped disk
        // automorphism λ·e^{iρ}(z − w)/(1 − w̄z). Both are self-maps by
        // construction; their composition must satisfy the criterion too.
        let g1 = Lft {
            a: Complex64::from_polar(r1, t1),
            b: Complex64::from_polar(r2, t2),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        };
        prop_assume!(w.norm() < 0.9 && w.norm() > 1e-3);
        let scale = Complex64::from_polar(lam, rot);
        let g2 = Lft { a: scale, b: -scale * w, c: -w.conj(), d: Complex64::new(1.0, 0.0) };
        prop_assert!(g1.self_map_check().holds, "affine margin {}", g1.self_map_check().margin);
        prop_assert!(g2.self_map_check().holds, "damped automorphism margin {}", g2.self_map_check().margin);
        let comp = g1.compose(&g2);
        prop_assume!(comp.det().norm() > 1e-9);
        let check = comp.self_map_check();
        prop_assert!(
            check.margin >= -1e-10,
            "composition of self-maps left the disk: margin {}",
            check.margin
        );
    }

    #[test]
    fn disk_map_eval_matches_underlying_lft(
        a in small_complex(),
        b in small_complex(),
        z in punctured_disk_point(),
    ) {
        let lft = Lft { a, b, c: Complex64::new(0.2, 0.1), d: Complex64::new(1.0, 0.0) };
        let map = DiskMap::Mobius(lft.clone());
        let direct = lft.eval(z).unwrap();
        prop_assert_eq!(map.eval(z).unwrap(), direct);
        let h = 1e-7;
        let bumped = lft.eval(z + Complex64::new(h, 0.0)).unwrap();
        let fd = (bumped - direct) / h;
        let an = map.derivative_at(z).unwrap();
        prop_assert!((fd - an).norm() < 1e-5 * (1.0 + an.norm()), "fd {} vs {}", fd, an);
    }
}
