//! The semi-harmonicity classifier (four equivalent mean-value tests), the
//! maximum-principle audit with its sub-mean-value hypothesis check, and
//! the Dirichlet-orthogonality test against compactly supported bumps.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::covering::{BasePt, CoverPoint, CoveringMap};
use crate::error::{Error, Result};
use crate::fields::{self, ScalarField};
use crate::means::{self, Resolution};
use crate::quadrature::QuadratureRule;
use crate::residue;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    SemiHarmonic,
    NotSemiHarmonic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::SemiHarmonic => "semi-harmonic",
            Verdict::NotSemiHarmonic => "not semi-harmonic",
            Verdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Worst deviations of the four tests at one center.
#[derive(Clone, Debug)]
pub struct CenterReport {
    pub center: CoverPoint,
    pub nu: u32,
    pub solid_dev: f64,
    pub spherical_dev: f64,
    pub near_harmonic_dev: f64,
    pub residue_max: f64,
    pub fd_laplacian_max: f64,
}

impl CenterReport {
    fn worst(&self) -> f64 {
        self.solid_dev
            .max(self.spherical_dev)
            .max(self.near_harmonic_dev)
            .max(self.residue_max)
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub label: String,
    pub tol: f64,
    pub centers: Vec<CenterReport>,
    pub verdict: Verdict,
}

/// Guard against fields that jump between the sheets merging at a branch
/// center: such centers are refused, since the mean-value tests assume a
/// continuous field.
fn check_branch_continuity(cov: &CoveringMap, f: &ScalarField, a: &CoverPoint) -> Result<()> {
    let nu = a.multiplicity(cov)?;
    if nu <= 1 {
        return Ok(());
    }
    // The sheets merge at a, so a continuous field's values across the
    // cluster collapse as the probe offset shrinks (O(delta^{1/nu})), while
    // a discontinuous one keeps an O(1) gap at every offset.
    let mut z = a.base;
    z.z[0] += C64::new(1e-9 * cov.base_radius(), 0.0);
    let roots = cov.branch_roots(a, &z)?;
    let mut vals = Vec::with_capacity(roots.len());
    for w in &roots {
        vals.push(f.eval(&CoverPoint::unchecked(z, *w))?);
    }
    let mut spread = 0.0f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            spread = spread.max((vals[i] - vals[j]).norm());
        }
    }
    if spread > 1e-2 {
        return Err(Error::BranchJump(format!(
            "field `{}` differs across sheets merging at the center (spread {spread:.3e})",
            f.label
        )));
    }
    Ok(())
}

fn center_report(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    radii: &[f64],
    res: &Resolution,
) -> Result<CenterReport> {
    check_branch_continuity(cov, f, a)?;
    let nu = a.multiplicity(cov)?;
    let target = f.eval(a)? * (nu as f64);
    let m = cov.m();
    let mut solid_dev = 0.0f64;
    let mut spherical_dev = 0.0f64;
    let mut near = 0.0f64;
    let mut residue_max = 0.0f64;
    for &r in radii {
        let ball = res.ball(m, a.base, r);
        let sphere = res.sphere(m, a.base, r);
        let s = means::solid_mean(cov, f, a, &ball)?;
        let q = means::spherical_mean(cov, f, a, &sphere)?;
        solid_dev = solid_dev.max((s - target).norm());
        spherical_dev = spherical_dev.max((q - target).norm());
        near = near.max((q - s).norm());
        residue_max = residue_max.max(residue::harmonic_residue(cov, f, a, r, res)?.norm());
    }
    // Strong-form check of the pulled-back Laplace equation near the center,
    // on the branches through it.
    let mut lap = 0.0f64;
    let probe_r = radii.iter().cloned().fold(f64::INFINITY, f64::min) * 0.5;
    for k in 0..4 {
        let mut z = a.base;
        z.z[0] += C64::from_polar(probe_r, 0.5 * PI * k as f64 + 0.3);
        for w in cov.branch_roots(a, &z)? {
            let x = CoverPoint::unchecked(z, w);
            lap = lap.max(fields::laplacian(cov, f, &x)?.norm());
        }
    }
    Ok(CenterReport {
        center: a.clone(),
        nu,
        solid_dev,
        spherical_dev,
        near_harmonic_dev: near,
        residue_max,
        fd_laplacian_max: lap,
    })
}

/// Run the four equivalent tests at each center; verdict is semi-harmonic
/// only when every test passes at tolerance everywhere, not semi-harmonic
/// only when some test fails by more than 10x tolerance, and inconclusive
/// in between.
pub fn classify(
    cov: &CoveringMap,
    f: &ScalarField,
    centers: &[CoverPoint],
    radii: &[f64],
    tol: f64,
    res: &Resolution,
) -> Result<ClassificationReport> {
    assert!(tol > 0.0 && !radii.is_empty());
    let reports: Vec<CenterReport> = centers
        .par_iter()
        .map(|a| center_report(cov, f, a, radii, res))
        .collect::<Result<Vec<_>>>()?;
    let worst = reports.iter().map(|c| c.worst()).fold(0.0f64, f64::max);
    let verdict = if worst < tol {
        Verdict::SemiHarmonic
    } else if worst > 10.0 * tol {
        Verdict::NotSemiHarmonic
    } else {
        Verdict::Inconclusive
    };
    Ok(ClassificationReport {
        label: f.label.clone(),
        tol,
        centers: reports,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditOutcome {
    Pass,
    /// The sub-mean-value hypothesis fails at the witness, so the maximum
    /// principle does not apply; this is not a counterexample.
    HypothesisViolated,
    PrincipleViolated,
}

#[derive(Clone, Debug)]
pub struct MaxPrincipleAudit {
    pub outcome: AuditOutcome,
    pub witness: Option<CoverPoint>,
    pub interior_max: f64,
    pub boundary_max: f64,
}

/// Audit the maximum principle for a real-valued field on the pseudo-ball
/// of radius r at `a`, over a polar sample grid of the branches through a.
pub fn max_principle_audit(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    r: f64,
    grid: usize,
    res: &Resolution,
) -> Result<MaxPrincipleAudit> {
    means::check_region(cov, a, r)?;
    assert!(grid >= 4);
    let tol = 1e-8;

    let sample = |z: &BasePt| -> Result<Vec<(CoverPoint, f64)>> {
        let mut out = Vec::new();
        for w in cov.branch_roots(a, z)? {
            let x = CoverPoint::unchecked(*z, w);
            out.push((x.clone(), f.eval(&x)?.re));
        }
        Ok(out)
    };

    let polar = |rad: f64, th: f64| -> BasePt {
        let mut z = a.base;
        match cov.m() {
            1 => z.z[0] += C64::from_polar(rad, th),
            _ => {
                // Sweep a fixed two-angle family; coarse but sufficient for
                // a max audit.
                z.z[0] += C64::from_polar(rad * th.cos().abs().max(0.2), th);
                z.z[1] += C64::from_polar(rad * th.sin().abs().max(0.2), 2.0 * th);
            }
        }
        z
    };

    let mut interior_max = f64::NEG_INFINITY;
    let mut witness: Option<CoverPoint> = None;
    let mut values = Vec::new();
    for i in 0..grid {
        let rad = r * i as f64 / grid as f64;
        for k in 0..grid {
            let th = 2.0 * PI * k as f64 / grid as f64;
            for (x, v) in sample(&polar(rad, th))? {
                values.push(v);
                if v > interior_max {
                    interior_max = v;
                    witness = Some(x);
                }
            }
        }
    }
    let mut boundary_max = f64::NEG_INFINITY;
    for k in 0..4 * grid {
        let th = 2.0 * PI * k as f64 / (4 * grid) as f64;
        for (_, v) in sample(&polar(r, th))? {
            boundary_max = boundary_max.max(v);
            values.push(v);
        }
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let constant = spread < tol;

    if constant || interior_max <= boundary_max + tol {
        return Ok(MaxPrincipleAudit {
            outcome: AuditOutcome::Pass,
            witness: None,
            interior_max,
            boundary_max,
        });
    }

    // Interior max exceeds the boundary: decide whether the sub-mean-value
    // hypothesis nu f(x) <= <f>_{x,r'} actually holds at the witness.
    let x = witness.clone().unwrap();
    let room = cov.base_radius() - x.base.dist(&cov.base_center());
    let small = (0.25 * r).min(0.5 * room);
    let ball = res.ball(cov.m(), x.base, small);
    let mean = means::solid_mean(cov, f, &x, &ball)?;
    let nu = x.multiplicity(cov)? as f64;
    let outcome = if nu * f.eval(&x)?.re > mean.re + tol {
        AuditOutcome::HypothesisViolated
    } else {
        AuditOutcome::PrincipleViolated
    };
    Ok(MaxPrincipleAudit {
        outcome,
        witness,
        interior_max,
        boundary_max,
    })
}

/// |[phi, eta_{a,r}]| for the Lipschitz bump eta = ||p^[a]||^2 - r^2 inside
/// the pseudo-ball and 0 outside: the gradient of the bump vanishes outside
/// the support, so the product reduces to the interior Dirichlet integral.
pub fn orthogonality_test(
    cov: &CoveringMap,
    phi: &ScalarField,
    a: &CoverPoint,
    r_support: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    assert!(
        (rule.radius - r_support).abs() < 1e-12,
        "rule must cover exactly the bump support"
    );
    let rho2 = means::radial_sq_field(cov, a)?;
    let v = means::dirichlet_product(cov, phi, &rho2, a, rule)?;
    Ok(v.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};

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

    fn field(cov: &CoveringMap, src: &str) -> ScalarField {
        ScalarField::from_expr(src, &parse(src).unwrap(), cov).unwrap()
    }

    fn origin(cov: &CoveringMap) -> CoverPoint {
        CoverPoint::new(cov, cov.base_center(), C64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn classify_sqrt_branch_field() {
        let cov = sqrt_cov();
        let f = field(&cov, "re(w)");
        let centers = vec![
            origin(&cov),
            CoverPoint::new(&cov, BasePt::new1(C64::new(1.0, 0.0)), C64::new(1.0, 0.0)).unwrap(),
            CoverPoint::new(&cov, BasePt::new1(C64::new(0.25, 0.5)), {
                let z = C64::new(0.25, 0.5);
                z.sqrt()
            })
            .unwrap(),
        ];
        let res = Resolution::coarse(1);
        let rep = classify(&cov, &f, &centers, &[0.1, 0.2], 1e-6, &res).unwrap();
        assert_eq!(rep.verdict, Verdict::SemiHarmonic, "{:#?}", rep.centers);
    }

    #[test]
    fn classify_abs2_not_semi_harmonic() {
        let cov = identity_cov();
        let f = field(&cov, "abs2(z1)");
        let rep = classify(
            &cov,
            &f,
            &[origin(&cov)],
            &[0.3],
            1e-6,
            &Resolution::coarse(1),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::NotSemiHarmonic);
        assert!((rep.centers[0].solid_dev - 0.045).abs() < 1e-6); // r^2/2
    }

    #[test]
    fn classify_pluriharmonic_m2() {
        let id2 = CoveringMap::new(
            2,
            vec![Expr::zero()],
            BasePt::new2(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            3.0,
            "id2",
        )
        .unwrap();
        let a = CoverPoint::new(&id2, id2.base_center(), C64::new(0.0, 0.0)).unwrap();
        let f = field(&id2, "re(z1*z2)");
        let rep = classify(&id2, &f, &[a], &[0.2, 0.4], 1e-6, &Resolution::coarse(2)).unwrap();
        assert_eq!(rep.verdict, Verdict::SemiHarmonic, "{:#?}", rep.centers);
    }

    #[test]
    fn classifier_refuses_discontinuous_branch_field() {
        let cov = sqrt_cov();
        let f = ScalarField::from_fn("w/|w|", |x: &CoverPoint| {
            Ok(x.fiber / C64::new(x.fiber.norm(), 0.0))
        });
        let err = classify(
            &cov,
            &f,
            &[origin(&cov)],
            &[0.2],
            1e-6,
            &Resolution::coarse(1),
        );
        assert!(matches!(err, Err(Error::BranchJump(_))), "{err:?}");
    }

    #[test]
    fn max_principle_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::coarse(1);

        let rez = field(&id, "re(z1)");
        let audit = max_principle_audit(&id, &rez, &a, 1.0, 8, &res).unwrap();
        assert_eq!(audit.outcome, AuditOutcome::Pass);

        let neg = field(&id, "0 - abs2(z1)");
        let audit = max_principle_audit(&id, &neg, &a, 1.0, 8, &res).unwrap();
        assert_eq!(audit.outcome, AuditOutcome::HypothesisViolated);
        assert!(audit.witness.is_some());

        let cov = sqrt_cov();
        let rew = field(&cov, "re(w)");
        let a2 = origin(&cov);
        let audit = max_principle_audit(&cov, &rew, &a2, 1.0, 8, &res).unwrap();
        assert_eq!(audit.outcome, AuditOutcome::Pass);
    }

    #[test]
    fn orthogonality_examples() {
        let id = identity_cov();
        let a = origin(&id);
        let res = Resolution::default_for(1);
        let ball = res.ball(1, a.base, 0.9);

        let rez = field(&id, "re(z1)");
        assert!(orthogonality_test(&id, &rez, &a, 0.9, &ball).unwrap() < 1e-8);

        let abs2 = field(&id, "abs2(z1)");
        let v = orthogonality_test(&id, &abs2, &a, 0.9, &ball).unwrap();
        assert!((v - 0.9f64.powi(4) / 2.0).abs() < 1e-9, "{v}");

        let c = field(&id, "7");
        assert!(orthogonality_test(&id, &c, &a, 0.9, &ball).unwrap() < 1e-13);
    }
}
