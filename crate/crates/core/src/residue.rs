//! Harmonic residues at isolated singularities: the numerical boundary-flux
//! definition, the closed-form values of the log-radial family, and a
//! radius scan comparing the two.

use num_complex::Complex64 as C64;

use crate::covering::{CoverPoint, CoveringMap};
use crate::error::{Error, Result};
use crate::expr::{self, Expr, ParseContext};
use crate::fields::{self, ScalarField};
use crate::means::{check_region, BranchContext, Resolution};
use crate::quadrature::{self};

/// Res_a(phi, r) computed from its definition: the flux of -d^c phi
/// (wedged with upsilon^{m-1} for m > 1) through the pseudo-sphere,
/// reduced to (-c_m / (2|S|)) int_S trace(R_{p,a} phi) dLeb with
/// c_1 = 1 and c_m = 1/(m-1).
pub fn harmonic_residue(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    r: f64,
    res: &Resolution,
) -> Result<C64> {
    check_region(cov, a, r)?;
    let m = cov.m();
    let ctx = BranchContext::new(cov, a)?;
    let sphere = res.sphere(m, a.base, r);
    let flux = quadrature::integrate(&sphere, |z| {
        ctx.trace(|p| fields::radial_derivative(cov, f, a, p), z)
    })?;
    let c = if m == 1 { 1.0 } else { 1.0 / (m as f64 - 1.0) };
    Ok(-flux * c / (2.0 * quadrature::sphere_area(m, 1.0)))
}

/// Closed-form residue of phi = (log ||p^[a]||^2)^alpha h / ||p^[a]||^{2m-2+s}
/// at a center of multiplicity `nu` where the semi-harmonic factor takes the
/// value `h_at_a`.
pub fn residue_closed_form(
    m: usize,
    alpha: f64,
    s: f64,
    nu: u32,
    h_at_a: C64,
    r: f64,
) -> Result<C64> {
    if r <= 0.0 {
        return Err(Error::DegenerateRadius);
    }
    let l = (r * r).ln();
    // Fractional log powers are undefined when log r^2 <= 0; in particular
    // alpha in (0, 1) at r = 1 hits (log r^2)^{alpha - 1} = 0^{negative}.
    if alpha > 0.0 && alpha.fract() != 0.0 && l <= 0.0 {
        return Err(Error::LogSingularity);
    }
    let powl = |e: f64| -> f64 {
        if e == 0.0 {
            1.0
        } else if e.fract() == 0.0 && e.abs() < 64.0 {
            l.powi(e as i32)
        } else {
            l.powf(e)
        }
    };
    let rs = r.powf(s);
    let log_term = if alpha == 0.0 {
        0.0
    } else {
        -alpha * powl(alpha - 1.0) / rs
    };
    let scalar = if m == 1 {
        log_term + (s / 2.0) * powl(alpha) / rs
    } else {
        let mm = m as f64 - 1.0;
        log_term / mm + (mm + s / 2.0) * powl(alpha) / (mm * rs)
    };
    Ok(h_at_a * (nu as f64) * scalar)
}

/// One row of a residue radius scan.
#[derive(Clone, Debug)]
pub struct ResidueSample {
    pub r: f64,
    pub numeric: C64,
    pub closed_form: C64,
    pub abs_err: f64,
}

/// Evaluate the numerical residue of the log-radial family against its
/// closed form over a list of radii.  `h` is the semi-harmonic factor
/// (as an expression over the covering).
pub fn residue_family_scan(
    cov: &CoveringMap,
    a: &CoverPoint,
    alpha: u32,
    s: u32,
    h: &Expr,
    radii: &[f64],
    res: &Resolution,
) -> Result<Vec<ResidueSample>> {
    let m = cov.m();
    let ctx = ParseContext {
        m,
        center: [a.base.z[0], a.base.z[1]],
    };
    let phi_expr = expr::radial_singular(&ctx, alpha, s, h.clone())?;
    let phi = ScalarField::from_expr("log-radial family", &phi_expr, cov)?;
    let h_field = ScalarField::from_expr("h", h, cov)?;
    let h_at_a = h_field.eval(a)?;
    let nu = a.multiplicity(cov)?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let numeric = harmonic_residue(cov, &phi, a, r, res)?;
        let closed_form = residue_closed_form(m, alpha as f64, s as f64, nu, h_at_a, r)?;
        out.push(ResidueSample {
            r,
            numeric,
            closed_form,
            abs_err: (numeric - closed_form).norm(),
        });
    }
    Ok(out)
}

/// Residues of an arbitrary field over a list of radii, with the spread
/// that quantifies radius independence and the vanishing-residue verdict.
#[derive(Clone, Debug)]
pub struct ResidueScan {
    pub a: CoverPoint,
    pub radii: Vec<f64>,
    pub values: Vec<C64>,
    /// Max pairwise |difference| of the values across radii.
    pub spread: f64,
    /// True iff max |value| < tol across all radii.
    pub semi_harmonic_candidate: bool,
}

/// Scan Res_a(f, r) over `radii`; a semi-harmonic candidate has vanishing
/// residue at every radius, while an isolated singularity shows a constant
/// (radius-independent) nonzero value.
pub fn residue_scan(
    cov: &CoveringMap,
    f: &ScalarField,
    a: &CoverPoint,
    radii: &[f64],
    tol: f64,
    res: &Resolution,
) -> Result<ResidueScan> {
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(harmonic_residue(cov, f, a, r, res)?);
    }
    let mut spread = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            spread = spread.max((values[i] - values[j]).norm());
        }
    }
    let max = values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    Ok(ResidueScan {
        a: a.clone(),
        radii: radii.to_vec(),
        values,
        spread,
        semi_harmonic_candidate: max < tol,
    })
}
