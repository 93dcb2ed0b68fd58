//! Standard coverings and field catalogs used by the verification suite,
//! the classifier coherence checks, and the CLI defaults.

use num_complex::Complex64 as C64;

use crate::covering::{BasePt, CoverPoint, CoveringMap};
use crate::error::Result;
use crate::expr::{parse, Expr};
use crate::fields::ScalarField;

fn origin1() -> BasePt {
    BasePt::new1(C64::new(0.0, 0.0))
}

fn origin2() -> BasePt {
    BasePt::new2(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

/// w - z1: the one-sheeted identity covering of a ball of radius 3.
pub fn identity1() -> CoveringMap {
    CoveringMap::new(1, vec![parse("-z1").unwrap()], origin1(), 3.0, "w-z").unwrap()
}

/// w^2 - z1: two sheets, branch point over 0.
pub fn sqrt2() -> CoveringMap {
    CoveringMap::new(
        1,
        vec![parse("-z1").unwrap(), Expr::zero()],
        origin1(),
        3.0,
        "w^2-z",
    )
    .unwrap()
}

/// w^3 - z1: three sheets, branch point of multiplicity 3 over 0.
pub fn cbrt3() -> CoveringMap {
    CoveringMap::new(
        1,
        vec![parse("-z1").unwrap(), Expr::zero(), Expr::zero()],
        origin1(),
        3.0,
        "w^3-z",
    )
    .unwrap()
}

/// w^3 - z1^2: cusp covering with nu = 3 over 0.
pub fn cusp32() -> CoveringMap {
    CoveringMap::new(
        1,
        vec![parse("-z1^2").unwrap(), Expr::zero(), Expr::zero()],
        origin1(),
        3.0,
        "w^3-z^2",
    )
    .unwrap()
}

/// w^3 - 3w - z1: three sheets with simple branch points over +-2.
pub fn tri3() -> CoveringMap {
    CoveringMap::new(
        1,
        vec![parse("-z1").unwrap(), parse("-3").unwrap(), Expr::zero()],
        origin1(),
        3.0,
        "w^3-3w-z",
    )
    .unwrap()
}

/// The trivial one-sheeted covering of a ball in C^2 (fiber w = 0).
pub fn identity2() -> CoveringMap {
    CoveringMap::new(2, vec![Expr::zero()], origin2(), 3.0, "id (m=2)").unwrap()
}

/// w^2 - z1 z2: two sheets over C^2, branched over the coordinate cross.
pub fn prod2() -> CoveringMap {
    CoveringMap::new(
        2,
        vec![parse("-z1*z2").unwrap(), Expr::zero()],
        origin2(),
        3.0,
        "w^2-z1z2",
    )
    .unwrap()
}

/// The three m = 1 coverings used by the mean-gap and classifier catalogs.
pub fn standard_coverings() -> Vec<CoveringMap> {
    vec![identity1(), sqrt2(), cbrt3()]
}

/// Look up a covering by its label (used by the CLI).
pub fn by_name(name: &str) -> Option<CoveringMap> {
    match name {
        "identity" | "w-z" => Some(identity1()),
        "w^2-z" | "sqrt" => Some(sqrt2()),
        "w^3-z" | "cbrt" => Some(cbrt3()),
        "w^3-z^2" | "cusp" => Some(cusp32()),
        "w^3-3w-z" | "tri" => Some(tri3()),
        "identity2" | "id2" => Some(identity2()),
        "w^2-z1z2" | "prod" => Some(prod2()),
        _ => None,
    }
}

fn f(cov: &CoveringMap, src: &str) -> Result<ScalarField> {
    ScalarField::from_expr(src, &parse(src)?, cov)
}

/// Ten C^2 fields for the mean-gap identity catalog (m = 1 coverings).
pub fn c2_fields(cov: &CoveringMap) -> Result<Vec<ScalarField>> {
    [
        "1",
        "re(z1)",
        "im(z1)",
        "re(z1^2)",
        "im(z1^2)",
        "abs2(z1)",
        "re(w)",
        "im(w)",
        "abs2(w)",
        "re(w^2)",
    ]
    .iter()
    .map(|s| f(cov, s))
    .collect()
}

/// The 12-field classifier catalog with expected semi-harmonicity
/// (m = 1 coverings; `w` restricts branchwise to a root of the fiber
/// polynomial, so polynomial functions of w are branchwise harmonic).
pub fn classifier_fields(cov: &CoveringMap) -> Result<Vec<(ScalarField, bool)>> {
    let table: [(&str, bool); 12] = [
        ("1", true),
        ("re(z1)", true),
        ("im(z1)", true),
        ("re(z1^2)", true),
        ("im(z1^2)", true),
        ("re(z1^3)", true),
        ("re(w)", true),
        ("im(w)", true),
        ("abs2(z1)", false),
        ("abs2(w)", false),
        ("re(z1)^2", false),
        ("re(z1)*abs2(z1)", false),
    ];
    table.iter().map(|(s, h)| Ok((f(cov, s)?, *h))).collect()
}

/// Eight semi-harmonic catalog fields (for the vanishing-residue check).
pub fn semi_harmonic_fields(cov: &CoveringMap) -> Result<Vec<ScalarField>> {
    Ok(classifier_fields(cov)?
        .into_iter()
        .filter(|(_, h)| *h)
        .map(|(g, _)| g)
        .collect())
}

/// Pullbacks of harmonic polynomials of degree <= 4 on the base.
pub fn harmonic_pullbacks(cov: &CoveringMap) -> Result<Vec<ScalarField>> {
    ["re(z1)", "re(z1^2)", "im(z1^3)", "re(z1^4)", "im(z1^4)"]
        .iter()
        .map(|s| f(cov, s))
        .collect()
}

/// A deterministic regular center for an m = 1 covering: base 1.2, fiber
/// chosen as the lexicographically largest root (stable across runs).
pub fn regular_center(cov: &CoveringMap) -> Result<CoverPoint> {
    let z = BasePt::new1(C64::new(1.2, 0.0));
    let fiber = cov.fiber(&z)?;
    let (w, _) = fiber.last().unwrap();
    Ok(CoverPoint::unchecked(z, *w))
}

/// The natural branch-or-regular center over the base origin.
pub fn center_over_origin(cov: &CoveringMap) -> Result<CoverPoint> {
    let fiber = cov.fiber(&cov.base_center())?;
    let (w, _) = fiber.last().unwrap();
    Ok(CoverPoint::unchecked(cov.base_center(), *w))
}
