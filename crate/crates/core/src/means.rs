//! Solid and spherical integral means over pseudo-balls, the Dirichlet
//! product, the spherical/solid mean-gap identity, and Green's first
//! identity, all reduced to base-space quadrature through the trace.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::covering::{BasePt, CoverPoint, CoveringMap};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{self, ScalarField};
use crate::quadrature::{self, QuadratureRule, RuleKind};

/// Node counts used to build sphere/ball rules at a given center and radius.
#[derive(Clone, Copy, Debug)]
pub struct Resolution {
    pub sphere_n: usize,
    pub radial_n: usize,
}

impl Resolution {
    pub fn default_for(m: usize) -> Resolution {
        match m {
            1 => Resolution {
                sphere_n: 256,
                radial_n: 64,
            },
            _ => Resolution {
                sphere_n: 24,
                radial_n: 32,
            },
        }
    }

    /// A cheaper resolution that still overshoots the m = 2 tolerances.
    pub fn coarse(m: usize) -> Resolution {
        match m {
            1 => Resolution {
                sphere_n: 128,
                radial_n: 32,
            },
            _ => Resolution {
                sphere_n: 12,
                radial_n: 16,
            },
        }
    }

    pub fn sphere(&self, m: usize, center: BasePt, r: f64) -> QuadratureRule {
        quadrature::sphere_rule(m, center, r, self.sphere_n)
    }

    pub fn ball(&self, m: usize, center: BasePt, r: f64) -> QuadratureRule {
        quadrature::ball_rule(m, center, r, self.radial_n, self.sphere_n)
    }
}

/// Per-(a, r) record of the mean-gap identity.
#[derive(Clone, Debug)]
pub struct MeanReport {
    pub a: CoverPoint,
    pub r: f64,
    pub nu: u32,
    pub solid: C64,
    pub spherical: C64,
    pub gap: C64,
    pub dirichlet_term: C64,
    pub identity_residual: f64,
}

/// The branch filter: pseudo-balls contain only the branches through `a`,
/// so when nu_p(a) < deg(p) the trace is restricted by radial continuation.
pub(crate) struct BranchContext<'a> {
    cov: &'a CoveringMap,
    a: &'a CoverPoint,
    filtered: bool,
}

impl<'a> BranchContext<'a> {
    pub(crate) fn new(cov: &'a CoveringMap, a: &'a CoverPoint) -> Result<BranchContext<'a>> {
        let nu = a.multiplicity(cov)? as usize;
        Ok(BranchContext {
            cov,
            a,
            filtered: nu < cov.degree(),
        })
    }

    /// Fiber-sum of `f` over the branches through `a` at base point `z`.
    pub(crate) fn trace<F>(&self, f: F, z: &BasePt) -> Result<C64>
    where
        F: Fn(&CoverPoint) -> Result<C64>,
    {
        if !self.filtered {
            return self.cov.trace(&f, z);
        }
        let mut acc = C64::new(0.0, 0.0);
        for w in self.cov.branch_roots(self.a, z)? {
            acc += f(&CoverPoint::unchecked(*z, w))?;
        }
        Ok(acc)
    }
}

pub(crate) fn check_region(cov: &CoveringMap, a: &CoverPoint, r: f64) -> Result<()> {
    if r <= 0.0 {
        return Err(Error::DegenerateRadius);
    }
    if a.base.dist(&cov.base_center()) + r >= cov.base_radius() {
        return Err(Error::RegionEscapesDomain);
    }
    Ok(())
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Normalization factor turning a Lebesgue ball integral into the solid
/// mean: m! / (pi^m r^{2m}).
fn solid_factor(m: usize, r: f64) -> f64 {
    factorial(m) / (PI.powi(m as i32) * r.powi(2 * m as i32))
}

/// Solid mean <phi|U>_{a,r} over the pseudo-ball of radius r.
pub fn solid_mean(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    rule: &QuadratureRule,
) -> Result<C64> {
    assert_eq!(rule.kind, RuleKind::Ball);
    check_region(cov, a, rule.radius)?;
    let ctx = BranchContext::new(cov, a)?;
    let v = quadrature::integrate(rule, |z| ctx.trace(|p| f.eval(p), z))?;
    Ok(v * solid_factor(cov.m(), rule.radius))
}

/// Spherical mean [phi|U]_{a,r} over the pseudo-sphere of radius r.
pub fn spherical_mean(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    rule: &QuadratureRule,
) -> Result<C64> {
    assert_eq!(rule.kind, RuleKind::Sphere);
    check_region(cov, a, rule.radius)?;
    let ctx = BranchContext::new(cov, a)?;
    let v = quadrature::integrate(rule, |z| ctx.trace(|p| f.eval(p), z))?;
    Ok(v / quadrature::sphere_area(cov.m(), rule.radius))
}

/// Outcome of the mean-value-property probe at one center.
#[derive(Clone, Debug)]
pub struct MeanValueOutcome {
    pub target: C64,
    pub nu: u32,
    /// (r, solid deviation, spherical deviation) per radius.
    pub deviations: Vec<(f64, f64, f64)>,
    pub passed: bool,
}

/// True iff |mean - nu_p(a) f(a)| < tol at every radius for both mean types.
pub fn mean_value_test(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    radii: &[f64],
    tol: f64,
    res: &Resolution,
) -> Result<MeanValueOutcome> {
    let nu = a.multiplicity(cov)?;
    let target = f.eval(a)? * (nu as f64);
    let mut deviations = Vec::with_capacity(radii.len());
    let mut passed = true;
    for &r in radii {
        let ball = res.ball(cov.m(), a.base, r);
        let sphere = res.sphere(cov.m(), a.base, r);
        let ds = (solid_mean(cov, f, a, &ball)? - target).norm();
        let dq = (spherical_mean(cov, f, a, &sphere)? - target).norm();
        if ds >= tol || dq >= tol {
            passed = false;
        }
        deviations.push((r, ds, dq));
    }
    Ok(MeanValueOutcome {
        target,
        nu,
        deviations,
        passed,
    })
}

/// The field ||p^[a]||^2 as an expression over the base.
pub fn radial_sq_field(cov: &CoveringMap, a: &CoverPoint) -> Result<ScalarField> {
    let mut e = Expr::zero();
    for j in 0..cov.m() {
        e = Expr::add(e, Expr::abs2(Expr::sub(Expr::Z(j), Expr::Num(a.base.z[j]))));
    }
    ScalarField::from_expr("||p^[a]||^2", &e, cov)
}

/// Dirichlet product [eta, phi]_{a,r} = int d eta ^ d^c phi-bar ^ v^{m-1}
/// over the pseudo-ball, via (1/4m) int trace(grad eta . conj grad phi) v^m.
pub fn dirichlet_product(
    cov: &CoveringMap,
    eta: &ScalarField,
    phi: &ScalarField,
    a: &CoverPoint,
    rule: &QuadratureRule,
) -> Result<C64> {
    assert_eq!(rule.kind, RuleKind::Ball);
    check_region(cov, a, rule.radius)?;
    let ctx = BranchContext::new(cov, a)?;
    let m = cov.m();
    let v = quadrature::integrate(rule, |z| {
        ctx.trace(
            |p| {
                let ge = fields::gradient(cov, eta, p)?;
                let gp = fields::gradient(cov, phi, p)?;
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..2 * m {
                    acc += ge[j] * gp[j].conj();
                }
                Ok(acc)
            },
            z,
        )
    })?;
    Ok(v * factorial(m) / PI.powi(m as i32) / (4.0 * m as f64))
}

/// Populate a MeanReport with the residual of the identity
/// [phi]_{a,r} = <phi>_{a,r} + r^{-2m} [phi, ||p^[a]||^2]_{a,r}.
pub fn mean_gap_identity(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    r: f64,
    res: &Resolution,
) -> Result<MeanReport> {
    let m = cov.m();
    let ball = res.ball(m, a.base, r);
    let sphere = res.sphere(m, a.base, r);
    let solid = solid_mean(cov, f, a, &ball)?;
    let spherical = spherical_mean(cov, f, a, &sphere)?;
    let rho2 = radial_sq_field(cov, a)?;
    let dirichlet = dirichlet_product(cov, f, &rho2, a, &ball)?;
    let dirichlet_term = dirichlet / r.powi(2 * m as i32);
    let gap = spherical - solid;
    Ok(MeanReport {
        a: a.clone(),
        r,
        nu: a.multiplicity(cov)?,
        solid,
        spherical,
        gap,
        dirichlet_term,
        identity_residual: (gap - dirichlet_term).norm(),
    })
}

/// Both sides of the generalized Green's first identity on the ball of
/// radius r: [eta, phi-bar]_G vs boundary flux minus volume term.
pub struct GreensReport {
    pub dirichlet: C64,
    pub boundary: C64,
    pub volume: C64,
    pub residual: f64,
}

pub fn greens_identity(
    cov: &CoveringMap,
    eta: &ScalarField,
    phi: &ScalarField,
    a: &CoverPoint,
    r: f64,
    res: &Resolution,
) -> Result<GreensReport> {
    let m = cov.m();
    check_region(cov, a, r)?;
    let ctx = BranchContext::new(cov, a)?;
    let ball = res.ball(m, a.base, r);
    let sphere = res.sphere(m, a.base, r);

    // [eta, phi-bar] = (1/4m) int trace(grad eta . grad phi) v^m.
    let dirichlet = quadrature::integrate(&ball, |z| {
        ctx.trace(
            |p| {
                let ge = fields::gradient(cov, eta, p)?;
                let gp = fields::gradient(cov, phi, p)?;
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..2 * m {
                    acc += ge[j] * gp[j];
                }
                Ok(acc)
            },
            z,
        )
    })? * (factorial(m) / PI.powi(m as i32) / (4.0 * m as f64));

    // Boundary term via the radial-derivative pullback:
    // int_{dG} eta d^c phi ^ v^{m-1} = (1/(2|S|)) int_S trace(eta R phi).
    let boundary = quadrature::integrate(&sphere, |z| {
        ctx.trace(
            |p| {
                let e = eta.eval(p)?;
                let rd = fields::radial_derivative(cov, phi, a, p)?;
                Ok(e * rd)
            },
            z,
        )
    })? / (2.0 * quadrature::sphere_area(m, 1.0));

    // Volume term via the pulled-back Laplacian:
    // int_G eta dd^c phi ^ v^{m-1} = (1/4m) int trace(eta Lap phi) v^m.
    let volume = quadrature::integrate(&ball, |z| {
        ctx.trace(
            |p| {
                let e = eta.eval(p)?;
                let lp = fields::laplacian(cov, phi, p)?;
                Ok(e * lp)
            },
            z,
        )
    })? * (factorial(m) / PI.powi(m as i32) / (4.0 * m as f64));

    Ok(GreensReport {
        dirichlet,
        boundary,
        volume,
        residual: (dirichlet - (boundary - volume)).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn identity_cov() -> CoveringMap {
        CoveringMap::new(
            1,
            vec![parse("-z1").unwrap()],
            BasePt::new1(C64::new(0.0, 0.0)),
            3.0,
            "id",
        )
        .unwrap()
    }

    fn sqrt_cov() -> CoveringMap {
        CoveringMap::new(
            1,
            vec![parse("-z1").unwrap(), Expr::zero()],
            BasePt::new1(C64::new(0.0, 0.0)),
            3.0,
            "w^2-z",
        )
        .unwrap()
    }

    fn origin(cov: &CoveringMap) -> CoverPoint {
        CoverPoint::new(cov, cov.base_center(), C64::new(0.0, 0.0)).unwrap()
    }

    fn field(cov: &CoveringMap, src: &str) -> ScalarField {
        ScalarField::from_expr(src, &parse(src).unwrap(), cov).unwrap()
    }

    #[test]
    fn solid_mean_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::default_for(1);
        let one = field(&id, "1");
        let v = solid_mean(&id, &one, &a, &res.ball(1, a.base, 1.0)).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-10, "{v}");

        let sq = sqrt_cov();
        let a2 = origin(&sq);
        let one2 = field(&sq, "1");
        let v = solid_mean(&sq, &one2, &a2, &res.ball(1, a2.base, 1.0)).unwrap();
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-10, "{v}");

        let abs2 = field(&id, "abs2(z1)");
        for r in [0.5, 1.0] {
            let v = solid_mean(&id, &abs2, &a, &res.ball(1, a.base, r)).unwrap();
            assert!((v.re - r * r / 2.0).abs() < 1e-10, "r={r}: {v}");
        }
    }

    #[test]
    fn spherical_mean_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::default_for(1);
        let one = field(&id, "1");
        let v = spherical_mean(&id, &one, &a, &res.sphere(1, a.base, 0.8)).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        let rez = field(&id, "re(z1)");
        let v = spherical_mean(&id, &rez, &a, &res.sphere(1, a.base, 0.8)).unwrap();
        assert!(v.norm() < 1e-12);
        let abs2 = field(&id, "abs2(z1)");
        let v = spherical_mean(&id, &abs2, &a, &res.sphere(1, a.base, 0.8)).unwrap();
        assert!((v.re - 0.64).abs() < 1e-12);
    }

    #[test]
    fn mean_value_test_examples() {
        let res = Resolution::coarse(1);
        let sq = sqrt_cov();
        let a = origin(&sq);
        let rew = field(&sq, "re(w)");
        let out = mean_value_test(&sq, &rew, &a, &[0.1, 0.2, 0.4], 1e-6, &res).unwrap();
        assert!(out.passed, "{:?}", out.deviations);
        assert_eq!(out.nu, 2);

        let id = identity_cov();
        let a0 = origin(&id);
        let abs2 = field(&id, "abs2(z1)");
        let out = mean_value_test(&id, &abs2, &a0, &[0.5], 1e-6, &res).unwrap();
        assert!(!out.passed);

        let c = C64::new(0.4, 0.3);
        let ac = CoverPoint::new(&id, BasePt::new1(c), c).unwrap();
        let rez = field(&id, "re(z1)");
        let out = mean_value_test(&id, &rez, &ac, &[0.2, 0.5], 1e-9, &res).unwrap();
        assert!(out.passed);
        assert!((out.target.re - 0.4).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_product_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::default_for(1);
        let rho2 = radial_sq_field(&id, &a).unwrap();
        let constf = field(&id, "4");
        let ball = res.ball(1, a.base, 1.0);
        let v = dirichlet_product(&id, &constf, &rho2, &a, &ball).unwrap();
        assert!(v.norm() < 1e-12);

        let abs2 = field(&id, "abs2(z1)");
        for r in [0.6, 1.0] {
            let ball = res.ball(1, a.base, r);
            let v = dirichlet_product(&id, &abs2, &rho2, &a, &ball).unwrap();
            assert!((v.re - r.powi(4) / 2.0).abs() < 1e-10, "r={r}: {v}");
        }

        let rez = field(&id, "re(z1)");
        let v = dirichlet_product(&id, &rez, &rho2, &a, &ball).unwrap();
        assert!(v.norm() < 1e-9, "{v}");
    }

    #[test]
    fn mean_gap_identity_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::default_for(1);
        let abs2 = field(&id, "abs2(z1)");
        let rep = mean_gap_identity(&id, &abs2, &a, 1.0, &res).unwrap();
        assert!((rep.gap.re - 0.5).abs() < 1e-10);
        assert!((rep.dirichlet_term.re - 0.5).abs() < 1e-10);
        assert!(rep.identity_residual < 1e-9);

        let h = field(&id, "re(z1^2)");
        let rep = mean_gap_identity(&id, &h, &a, 1.0, &res).unwrap();
        assert!(rep.gap.norm() < 1e-9);
        assert!(rep.identity_residual < 1e-9);
    }

    #[test]
    fn mean_gap_identity_m2() {
        let id2 = CoveringMap::new(
            2,
            vec![Expr::zero()],
            BasePt::new2(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            3.0,
            "id2",
        )
        .unwrap();
        let a = CoverPoint::new(&id2, id2.base_center(), C64::new(0.0, 0.0)).unwrap();
        let f = field(&id2, "re(z1^2)");
        let res = Resolution::coarse(2);
        let rep = mean_gap_identity(&id2, &f, &a, 1.0, &res).unwrap();
        assert!(rep.identity_residual < 1e-8, "{}", rep.identity_residual);
    }

    #[test]
    fn greens_identity_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::coarse(1);
        let one = field(&id, "1");
        let abs2 = field(&id, "abs2(z1)");
        let h = field(&id, "re(z1^2)");
        let rez = field(&id, "re(z1)");

        let rep = greens_identity(&id, &one, &h, &a, 1.0, &res).unwrap();
        assert!(rep.residual < 1e-7, "{}", rep.residual);

        let rep = greens_identity(&id, &one, &abs2, &a, 1.0, &res).unwrap();
        assert!(rep.residual < 1e-7, "{}", rep.residual);
        // Both routes give 1 here.
        assert!((rep.boundary.re - 1.0).abs() < 1e-8);
        assert!((rep.volume.re - 1.0).abs() < 1e-8);

        let rep = greens_identity(&id, &rez, &abs2, &a, 1.0, &res).unwrap();
        assert!(rep.residual < 1e-7, "{}", rep.residual);
    }

    #[test]
    fn branch_filter_restricts_to_sheet_through_a() {
        // Regular center on w^2 - z: the mean of Re(w) must follow the
        // single branch through a, not cancel across both sheets.
        let sq = sqrt_cov();
        let z = C64::new(1.0, 0.0);
        let a = CoverPoint::new(&sq, BasePt::new1(z), C64::new(1.0, 0.0)).unwrap();
        let res = Resolution::coarse(1);
        let rew = field(&sq, "re(w)");
        let out = mean_value_test(&sq, &rew, &a, &[0.15, 0.3], 1e-6, &res).unwrap();
        assert_eq!(out.nu, 1);
        assert!(out.passed, "{:?}", out.deviations);
        assert!((out.target.re - 1.0).abs() < 1e-12);
    }
}
