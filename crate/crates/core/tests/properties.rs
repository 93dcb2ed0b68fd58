//! Randomized invariants, shrinkable via proptest.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use semiharm_core::covering::{BasePt, CoveringMap};
use semiharm_core::expr::Expr;
use semiharm_core::harmpoly;
use semiharm_core::quadrature;

fn small_c64() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| C64::new(re, im))
}

/// A random monic fiber polynomial with constant coefficients plus the
/// base variable in the constant term: w^k + c_{k-1} w^{k-1} + ... + (c_0 - z).
fn random_covering(k: usize, cs: &[C64]) -> CoveringMap {
    let mut coeffs: Vec<Expr> = Vec::with_capacity(k);
    for (i, c) in cs.iter().take(k).enumerate() {
        let e = Expr::Num(*c);
        if i == 0 {
            coeffs.push(Expr::sub(e, Expr::Z(0)));
        } else {
            coeffs.push(e);
        }
    }
    CoveringMap::new(
        1,
        coeffs,
        BasePt::new1(C64::new(0.0, 0.0)),
        3.0,
        "random",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The multiplicities over any base point always sum to the sheet count.
    #[test]
    fn fiber_sum_is_conserved(
        k in 1usize..=4,
        cs in prop::collection::vec(small_c64(), 4),
        z in small_c64(),
    ) {
        let cov = random_covering(k, &cs);
        let fiber = cov.fiber(&BasePt::new1(z)).unwrap();
        let total: u32 = fiber.iter().map(|(_, mu)| mu).sum();
        prop_assert_eq!(total as usize, k);
    }

    /// trace(w) and trace(w^2) agree with the power sums determined by the
    /// coefficients alone (no root-finding involved on the oracle side).
    #[test]
    fn trace_matches_power_sums(
        k in 2usize..=4,
        cs in prop::collection::vec(small_c64(), 4),
        z in small_c64(),
    ) {
        let cov = random_covering(k, &cs);
        let zb = BasePt::new1(z);
        let coeffs = cov.coeff_values(&zb).unwrap();
        let e1 = -coeffs[k - 1];
        let e2 = coeffs[k - 2];
        let p1 = e1;
        let p2 = e1 * p1 - e2 * 2.0;
        let t1 = cov.trace(|pt| Ok(pt.fiber), &zb).unwrap();
        let t2 = cov.trace(|pt| Ok(pt.fiber * pt.fiber), &zb).unwrap();
        prop_assert!((t1 - p1).norm() < 1e-7, "t1 {} vs {}", t1, p1);
        prop_assert!((t2 - p2).norm() < 1e-7, "t2 {} vs {}", t2, p2);
    }

    /// Exact decomposition: harmonic parts, exact reconstruction, and
    /// idempotence on the leading part.
    #[test]
    fn decomposition_is_exact_and_idempotent(seed in any::<u64>(), n in prop::sample::select(vec![2usize, 4]), l in 0usize..=7) {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = harmpoly::random_poly(n, l, &mut rng);
        let dec = harmpoly::harmonic_decompose(&p);
        prop_assert_eq!(dec.reconstruct(), p);
        for (j, h) in &dec.parts {
            prop_assert!(h.laplacian().is_zero());
            let again = harmpoly::harmonic_decompose(h);
            prop_assert_eq!(again.parts.len(), 1);
            prop_assert_eq!(&again.parts[0], &(*j, h.clone()));
        }
    }

    /// The surface rule integrates random even monomials to the exact
    /// Gamma-moment value.
    #[test]
    fn sphere_rule_matches_moments(
        e1 in 0u16..=3, e2 in 0u16..=3,
    ) {
        let alpha = vec![2 * e1, 2 * e2];
        let exact = harmpoly::sphere_moment(&alpha).to_f64();
        let rule = quadrature::sphere_rule(1, BasePt::new1(C64::new(0.0, 0.0)), 1.0, 64);
        let approx = quadrature::integrate(&rule, |z| {
            Ok(C64::new(
                z.z[0].re.powi(alpha[0] as i32) * z.z[0].im.powi(alpha[1] as i32),
                0.0,
            ))
        })
        .unwrap();
        // The rule carries raw surface-Lebesgue weights.
        prop_assert!((approx.re - exact).abs() < 1e-10, "{} vs {}", approx.re, exact);
    }

    /// The traced log potential stays harmonic away from its center
    /// (m = 1 smoke test of the degenerate complex Hessian).
    #[test]
    fn traced_log_potential_is_harmonic(
        ax in -0.5f64..0.5, ay in -0.5f64..0.5,
        zx in 1.0f64..1.4, zy in -0.3f64..0.3,
    ) {
        let ap = C64::new(ax, ay);
        let z0 = C64::new(zx, zy);
        prop_assume!((z0 - ap).norm() > 0.5);
        let g = |z: C64| (z - ap).norm_sqr().ln();
        let h = 1e-3;
        let lap = (g(z0 + h) + g(z0 - h) + g(z0 + C64::new(0.0, h)) + g(z0 - C64::new(0.0, h))
            - 4.0 * g(z0))
            / (h * h);
        prop_assert!(lap.abs() < 1e-5, "{}", lap);
    }
}
