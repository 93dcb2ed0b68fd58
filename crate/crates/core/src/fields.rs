//! Evaluable scalar fields on a covering and their first-order derivative
//! operators: gradient, radial derivative, Euler fields, d-bar Neumann
//! derivative and normal derivative.
//!
//! Fields built from expressions carry exact Wirtinger partials (the fiber
//! coordinate is differentiated implicitly); closure fields fall back to
//! centered finite differences with branch continuation.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covering::{BasePt, CoverPoint, CoveringMap};
use crate::error::{Error, Result};
use crate::expr::Expr;

type EvalFn = dyn Fn(&CoverPoint) -> Result<C64> + Send + Sync;
type PartialsFn = dyn Fn(&CoverPoint) -> Result<Vec<C64>> + Send + Sync;

/// A complex-valued function on the covering, with optional analytic first
/// partials with respect to the 2m real base coordinates (branchwise).
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<EvalFn>,
    partials: Option<Arc<PartialsFn>>,
    pub fd_step: f64,
    pub label: String,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> ScalarField
    where
        F: Fn(&CoverPoint) -> Result<C64> + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(f),
            partials: None,
            fd_step: 1e-5,
            label: label.into(),
        }
    }

    /// Compile an expression over (z1, z2, w) into a field bound to `cov`,
    /// with symbolic partials in the 2m real base coordinates.
    pub fn from_expr(label: impl Into<String>, e: &Expr, cov: &CoveringMap) -> Result<ScalarField> {
        let m = cov.m();
        let fiber = cov.fiber_spec();
        let mut parts = Vec::with_capacity(2 * m);
        for j in 0..m {
            parts.push(e.diff_x(j, Some(&fiber))?);
            parts.push(e.diff_y(j, Some(&fiber))?);
        }
        let e_eval = e.clone();
        let eval = move |x: &CoverPoint| e_eval.eval(&x.base.z, x.fiber);
        let partials = move |x: &CoverPoint| {
            parts
                .iter()
                .map(|p| p.eval(&x.base.z, x.fiber))
                .collect::<Result<Vec<_>>>()
        };
        Ok(ScalarField {
            eval: Arc::new(eval),
            partials: Some(Arc::new(partials)),
            fd_step: 1e-5,
            label: label.into(),
        })
    }

    pub fn eval(&self, x: &CoverPoint) -> Result<C64> {
        (self.eval)(x)
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// Validate analytic partials against centered finite differences at
    /// random regular points (1e-4 relative).
    pub fn check_partials(&self, cov: &CoveringMap, samples: usize) -> Result<()> {
        if self.partials.is_none() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(crate::covering::DEFAULT_SEED + 7);
        let mut checked = 0;
        while checked < samples {
            let z = cov.random_base_point(&mut rng, 0.8);
            let fiber = match cov.fiber(&z) {
                Ok(f) => f,
                Err(_) => continue,
            };
            if fiber.iter().any(|(_, mu)| *mu > 1) {
                continue;
            }
            let x = CoverPoint::unchecked(z, fiber[0].0);
            let analytic = gradient(cov, self, &x)?;
            let fd = match gradient_fd(cov, self, &x) {
                Ok(g) => g,
                Err(_) => continue,
            };
            for (a, b) in analytic.iter().zip(fd.iter()) {
                let scale = 1.0 + a.norm();
                if (a - b).norm() > 1e-4 * scale {
                    return Err(Error::Eval(format!(
                        "partials of `{}` disagree with finite differences: {a} vs {b}",
                        self.label
                    )));
                }
            }
            checked += 1;
        }
        Ok(())
    }
}

/// A real-valued defining function; its zero set is the boundary under study.
#[derive(Clone, Debug)]
pub struct DefiningFunction {
    pub rho: ScalarField,
}

impl DefiningFunction {
    pub fn new(rho: ScalarField) -> DefiningFunction {
        DefiningFunction { rho }
    }

    /// The pulled-back sphere boundary ||p|| = r about the base center.
    pub fn sphere(cov: &CoveringMap, r: f64) -> Result<DefiningFunction> {
        let c = cov.base_center();
        let mut e = Expr::num(-r * r);
        for j in 0..cov.m() {
            e = Expr::add(e, Expr::abs2(Expr::sub(Expr::Z(j), Expr::Num(c.z[j]))));
        }
        Ok(DefiningFunction {
            rho: ScalarField::from_expr(format!("||p||^2-{r}^2"), &e, cov)?,
        })
    }
}

/// Gradient in the 2m real base coordinates, branchwise.
pub fn gradient(cov: &CoveringMap, f: &ScalarField, x: &CoverPoint) -> Result<Vec<C64>> {
    if let Some(p) = &f.partials {
        return p(x);
    }
    gradient_fd(cov, f, x)
}

fn gradient_fd(cov: &CoveringMap, f: &ScalarField, x: &CoverPoint) -> Result<Vec<C64>> {
    let h = f.fd_step * cov.base_radius();
    let n = 2 * cov.m();
    let mut g = Vec::with_capacity(n);
    for j in 0..n {
        let zp = x.base.shifted(j, h);
        let zm = x.base.shifted(j, -h);
        let wp = cov.continue_root(&x.base, x.fiber, &zp, 1)?;
        let wm = cov.continue_root(&x.base, x.fiber, &zm, 1)?;
        let fp = f.eval(&CoverPoint::unchecked(zp, wp))?;
        let fm = f.eval(&CoverPoint::unchecked(zm, wm))?;
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Wirtinger derivative d/dp_j from a real-coordinate gradient.
pub fn wirtinger_dp(grad: &[C64], j: usize) -> C64 {
    (grad[2 * j] - C64::new(0.0, 1.0) * grad[2 * j + 1]) * 0.5
}

/// Wirtinger derivative d/dp_bar_j from a real-coordinate gradient.
pub fn wirtinger_dpbar(grad: &[C64], j: usize) -> C64 {
    (grad[2 * j] + C64::new(0.0, 1.0) * grad[2 * j + 1]) * 0.5
}

/// ||p^[a](x)||: base displacement norm.
pub fn radial_norm(a: &CoverPoint, x: &CoverPoint) -> f64 {
    x.base.dist(&a.base)
}

/// a-radial derivative: sum over real coordinates of the displacement times
/// the partials, divided by ||p^[a]||.
pub fn radial_derivative(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    x: &CoverPoint,
) -> Result<C64> {
    let rho = radial_norm(a, x);
    if rho < 1e-12 {
        return Err(Error::DegenerateRadius);
    }
    let g = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..2 * cov.m() {
        let d = x.base.real_coord(j) - a.base.real_coord(j);
        acc += g[j] * d;
    }
    Ok(acc / rho)
}

/// Euler application E_{p,a}(f) = sum (p_j - p_j(a)) df/dp_j.
pub fn euler_apply(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    x: &CoverPoint,
) -> Result<C64> {
    let g = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..cov.m() {
        acc += (x.base.z[j] - a.base.z[j]) * wirtinger_dp(&g, j);
    }
    Ok(acc)
}

/// Conjugate-Euler application: sum (p_bar_j - p_bar_j(a)) df/dp_bar_j.
pub fn euler_dbar_apply(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    x: &CoverPoint,
) -> Result<C64> {
    let g = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..cov.m() {
        acc += (x.base.z[j] - a.base.z[j]).conj() * wirtinger_dpbar(&g, j);
    }
    Ok(acc)
}

/// Directional derivative along the gradient field of g:
/// sum over real coordinates of g_coord * f_coord.
pub fn grad_pairing(
    cov: &CoveringMap,
    g: &ScalarField,
    f: &ScalarField,
    x: &CoverPoint,
) -> Result<C64> {
    let gg = gradient(cov, g, x)?;
    let gf = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..2 * cov.m() {
        acc += gg[j] * gf[j];
    }
    Ok(acc)
}

/// Gradient of a real defining function and its Euclidean norm.
fn rho_gradient(
    cov: &CoveringMap,
    rho: &DefiningFunction,
    x: &CoverPoint,
) -> Result<(Vec<C64>, f64)> {
    let g = gradient(cov, &rho.rho, x)?;
    let norm: f64 = g.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    if norm < 1e-8 {
        return Err(Error::VanishingGradient);
    }
    Ok((g, norm))
}

fn require_boundary(rho: &DefiningFunction, x: &CoverPoint) -> Result<()> {
    let v = rho.rho.eval(x)?;
    if v.norm() > 1e-8 {
        return Err(Error::NotOnBoundary(v.norm()));
    }
    Ok(())
}

/// d-bar Neumann derivative 2 sum rho_j df/dp_bar_j with rho_j normalized by
/// the gradient norm; invariant under rescaling of the defining function.
pub fn dbar_neumann(
    cov: &CoveringMap,
    f: &ScalarField,
    rho: &DefiningFunction,
    x: &CoverPoint,
) -> Result<C64> {
    require_boundary(rho, x)?;
    let (grho, norm) = rho_gradient(cov, rho, x)?;
    let gf = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..cov.m() {
        let rho_j = wirtinger_dp(&grho, j) / norm;
        acc += rho_j * wirtinger_dpbar(&gf, j);
    }
    Ok(acc * 2.0)
}

/// Normal derivative d_nu f = (grad f . grad rho) / ||grad rho||,
/// real-Euclidean pairing.
pub fn normal_derivative(
    cov: &CoveringMap,
    f: &ScalarField,
    rho: &DefiningFunction,
    x: &CoverPoint,
) -> Result<C64> {
    require_boundary(rho, x)?;
    let (grho, norm) = rho_gradient(cov, rho, x)?;
    let gf = gradient(cov, f, x)?;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..2 * cov.m() {
        acc += gf[j] * grho[j].re;
    }
    Ok(acc / norm)
}

/// Pulled-back Laplacian by Richardson-extrapolated centered differences of
/// the (analytic or FD) gradient, branchwise.
pub fn laplacian(cov: &CoveringMap, f: &ScalarField, x: &CoverPoint) -> Result<C64> {
    let h = f.fd_step.max(1e-5) * cov.base_radius() * 10.0;
    let d1 = laplacian_step(cov, f, x, h)?;
    let d2 = laplacian_step(cov, f, x, h * 0.5)?;
    Ok((d2 * 4.0 - d1) / 3.0)
}

fn laplacian_step(cov: &CoveringMap, f: &ScalarField, x: &CoverPoint, h: f64) -> Result<C64> {
    let n = 2 * cov.m();
    let mut acc = C64::new(0.0, 0.0);
    if f.has_partials() {
        for j in 0..n {
            let zp = x.base.shifted(j, h);
            let zm = x.base.shifted(j, -h);
            let wp = cov.continue_root(&x.base, x.fiber, &zp, 2)?;
            let wm = cov.continue_root(&x.base, x.fiber, &zm, 2)?;
            let gp = gradient(cov, f, &CoverPoint::unchecked(zp, wp))?;
            let gm = gradient(cov, f, &CoverPoint::unchecked(zm, wm))?;
            acc += (gp[j] - gm[j]) / (2.0 * h);
        }
    } else {
        let f0 = f.eval(x)?;
        for j in 0..n {
            let zp = x.base.shifted(j, h);
            let zm = x.base.shifted(j, -h);
            let wp = cov.continue_root(&x.base, x.fiber, &zp, 2)?;
            let wm = cov.continue_root(&x.base, x.fiber, &zm, 2)?;
            let fp = f.eval(&CoverPoint::unchecked(zp, wp))?;
            let fm = f.eval(&CoverPoint::unchecked(zm, wm))?;
            acc += (fp - f0 * 2.0 + fm) / (h * h);
        }
    }
    Ok(acc)
}

/// Evaluate a field at a base point through every branch and report the
/// spread of the values (used to refuse discontinuous centers).
pub fn fiber_value_spread(cov: &CoveringMap, f: &ScalarField, z: &BasePt) -> Result<f64> {
    let fiber = cov.fiber(z)?;
    let mut vals = Vec::with_capacity(fiber.len());
    for (w, _) in fiber {
        vals.push(f.eval(&CoverPoint::unchecked(*z, w))?);
    }
    let mut spread = 0.0f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            spread = spread.max((vals[i] - vals[j]).norm());
        }
    }
    Ok(spread)
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

    fn pt(cov: &CoveringMap, z: C64, w: C64) -> CoverPoint {
        CoverPoint::new(cov, BasePt::new1(z), w).unwrap()
    }

    #[test]
    fn gradient_of_re_p1() {
        let cov = identity_cov();
        let f = ScalarField::from_expr("re(z1)", &parse("re(z1)").unwrap(), &cov).unwrap();
        let x = pt(&cov, C64::new(0.4, -0.2), C64::new(0.4, -0.2));
        let g = gradient(&cov, &f, &x).unwrap();
        assert!((g[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(g[1].norm() < 1e-12);
    }

    #[test]
    fn gradient_of_abs2() {
        // f = ||p^[0]||^2 at p(x) = 1: gradient (2, 0).
        let cov = identity_cov();
        let f = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
        let x = pt(&cov, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let g = gradient(&cov, &f, &x).unwrap();
        assert!((g[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(g[1].norm() < 1e-12);
    }

    #[test]
    fn gradient_of_re_w_on_sqrt_branch() {
        // w = sqrt(z), dw/dz = 1/(2w): at z=1 on the branch w=1 the
        // x-partial of Re(w) is 1/2.
        let cov = sqrt_cov();
        let f = ScalarField::from_expr("re(w)", &parse("re(w)").unwrap(), &cov).unwrap();
        let x = pt(&cov, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let g = gradient(&cov, &f, &x).unwrap();
        assert!((g[0] - C64::new(0.5, 0.0)).norm() < 1e-10, "{:?}", g);
    }

    #[test]
    fn fd_matches_analytic_on_sqrt_cover() {
        let cov = sqrt_cov();
        let f = ScalarField::from_expr("re(w)", &parse("re(w)").unwrap(), &cov).unwrap();
        f.check_partials(&cov, 20).unwrap();
    }

    #[test]
    fn radial_derivative_examples() {
        let cov = identity_cov();
        let a = pt(&cov, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let x = pt(&cov, C64::new(0.6, 0.8), C64::new(0.6, 0.8));
        // f = ||p^[a]||^2 -> 2 r with r = 1 here.
        let f = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
        let v = radial_derivative(&cov, &f, &a, &x).unwrap();
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-10);
        // constants -> 0.
        let c = ScalarField::from_expr("5", &parse("5").unwrap(), &cov).unwrap();
        assert!(radial_derivative(&cov, &c, &a, &x).unwrap().norm() < 1e-12);
        // log ||p^[a]||^2 -> 2/r.
        let lg = ScalarField::from_expr("log", &parse("log(abs2(z1))").unwrap(), &cov).unwrap();
        let x2 = pt(&cov, C64::new(0.5, 0.0), C64::new(0.5, 0.0));
        let v = radial_derivative(&cov, &lg, &a, &x2).unwrap();
        assert!((v - C64::new(4.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn euler_dbar_examples() {
        let cov = identity_cov();
        let a = pt(&cov, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let c = C64::new(0.3, 0.9);
        let x = pt(&cov, c, c);
        // Holomorphic in p: conjugate-Euler annihilates it.
        let h = ScalarField::from_expr("z1^3", &parse("z1^3").unwrap(), &cov).unwrap();
        assert!(euler_dbar_apply(&cov, &h, &a, &x).unwrap().norm() < 1e-12);
        // f = p_bar: value conj(c).
        let fb = ScalarField::from_expr("conj(z1)", &parse("conj(z1)").unwrap(), &cov).unwrap();
        let v = euler_dbar_apply(&cov, &fb, &a, &x).unwrap();
        assert!((v - c.conj()).norm() < 1e-12);
        // f = ||p^[a]||^2 -> ||p^[a]||^2.
        let f2 = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
        let v = euler_dbar_apply(&cov, &f2, &a, &x).unwrap();
        assert!((v - C64::new(c.norm_sqr(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn radial_euler_consistency() {
        let cov = sqrt_cov();
        let a = pt(&cov, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let z = BasePt::new1(C64::new(1.0, 0.5));
        let w = cov
            .fiber(&z)
            .unwrap()
            .into_iter()
            .map(|(w, _)| w)
            .find(|w| w.re > 0.0)
            .unwrap();
        let x = pt(&cov, z.z[0], w);
        let f = ScalarField::from_expr(
            "re(w)+abs2(z1)",
            &parse("re(w)+abs2(z1)").unwrap(),
            &cov,
        )
        .unwrap();
        let lhs = radial_derivative(&cov, &f, &a, &x).unwrap() * radial_norm(&a, &x);
        let rhs = euler_apply(&cov, &f, &a, &x).unwrap()
            + euler_dbar_apply(&cov, &f, &a, &x).unwrap();
        assert!((lhs - rhs).norm() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn grad_pairing_decomposition() {
        // partial_{grad g}(f) = E_g(f) + E-bar_g(f).
        let cov = identity_cov();
        let g = ScalarField::from_expr("re(z1^2)", &parse("re(z1^2)").unwrap(), &cov).unwrap();
        let f = ScalarField::from_expr(
            "abs2(z1)+im(z1)",
            &parse("abs2(z1)+im(z1)").unwrap(),
            &cov,
        )
        .unwrap();
        let x = pt(&cov, C64::new(0.7, -0.4), C64::new(0.7, -0.4));
        let lhs = grad_pairing(&cov, &g, &f, &x).unwrap();
        let gg = gradient(&cov, &g, &x).unwrap();
        let gf = gradient(&cov, &f, &x).unwrap();
        let e = (wirtinger_dpbar(&gg, 0) * wirtinger_dp(&gf, 0)) * 2.0;
        let eb = (wirtinger_dp(&gg, 0) * wirtinger_dpbar(&gf, 0)) * 2.0;
        assert!((lhs - (e + eb)).norm() < 1e-10);
    }

    #[test]
    fn dbar_neumann_examples() {
        let cov = identity_cov();
        let rho = DefiningFunction::sphere(&cov, 1.0).unwrap();
        let x = pt(&cov, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        // constants -> 0.
        let c = ScalarField::from_expr("3", &parse("3").unwrap(), &cov).unwrap();
        assert!(dbar_neumann(&cov, &c, &rho, &x).unwrap().norm() < 1e-12);
        // f = conj(z) at z = 1 -> 1.
        let f = ScalarField::from_expr("conj(z1)", &parse("conj(z1)").unwrap(), &cov).unwrap();
        let v = dbar_neumann(&cov, &f, &rho, &x).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-10, "{v}");
    }

    #[test]
    fn dbar_neumann_scaling_invariance() {
        let cov = identity_cov();
        let x = pt(&cov, C64::new(0.6, 0.8), C64::new(0.6, 0.8));
        let f = ScalarField::from_expr(
            "conj(z1)^2+im(z1)",
            &parse("conj(z1)^2+im(z1)").unwrap(),
            &cov,
        )
        .unwrap();
        let base = DefiningFunction::sphere(&cov, 1.0).unwrap();
        let v0 = dbar_neumann(&cov, &f, &base, &x).unwrap();
        for lambda in [0.5, 3.0, 10.0] {
            let e = parse(&format!("{lambda}*(abs2(z1)-1)")).unwrap();
            let scaled = DefiningFunction::new(
                ScalarField::from_expr("scaled", &e, &cov).unwrap(),
            );
            let v = dbar_neumann(&cov, &f, &scaled, &x).unwrap();
            assert!((v - v0).norm() < 1e-10, "lambda={lambda}: {v} vs {v0}");
        }
    }

    #[test]
    fn normal_derivative_examples() {
        let cov = identity_cov();
        let r = 1.0;
        let rho = DefiningFunction::sphere(&cov, r).unwrap();
        let x = pt(&cov, C64::new(0.6, 0.8), C64::new(0.6, 0.8));
        let f = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
        let v = normal_derivative(&cov, &f, &rho, &x).unwrap();
        assert!((v - C64::new(2.0 * r, 0.0)).norm() < 1e-10);
        let c = ScalarField::from_expr("7", &parse("7").unwrap(), &cov).unwrap();
        assert!(normal_derivative(&cov, &c, &rho, &x).unwrap().norm() < 1e-12);
    }

    #[test]
    fn not_on_boundary_rejected() {
        let cov = identity_cov();
        let rho = DefiningFunction::sphere(&cov, 1.0).unwrap();
        let f = ScalarField::from_expr("re(z1)", &parse("re(z1)").unwrap(), &cov).unwrap();
        let x = pt(&cov, C64::new(0.3, 0.0), C64::new(0.3, 0.0));
        assert!(matches!(
            normal_derivative(&cov, &f, &rho, &x),
            Err(Error::NotOnBoundary(_))
        ));
    }

    #[test]
    fn laplacian_of_harmonic_and_not() {
        let cov = identity_cov();
        let x = pt(&cov, C64::new(0.4, 0.1), C64::new(0.4, 0.1));
        let h = ScalarField::from_expr("re(z1^3)", &parse("re(z1^3)").unwrap(), &cov).unwrap();
        assert!(laplacian(&cov, &h, &x).unwrap().norm() < 1e-8);
        let q = ScalarField::from_expr("abs2(z1)", &parse("abs2(z1)").unwrap(), &cov).unwrap();
        let v = laplacian(&cov, &q, &x).unwrap();
        assert!((v - C64::new(4.0, 0.0)).norm() < 1e-7, "{v}");
    }
}
