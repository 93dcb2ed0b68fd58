//! Exact rational-arithmetic algebra of real homogeneous polynomials:
//! Laplacian, harmonic decomposition P = sum ||x||^{l-j} H_j, exact unit
//! sphere integrals (as rational multiples of pi^m), and verification of
//! the explicit polynomial Neumann solution psi = sum H_j / j.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::covering::{BasePt, CoverPoint, CoveringMap};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{self, DefiningFunction, ScalarField};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A homogeneous polynomial in n real variables with exact rational
/// coefficients, keyed by exponent multi-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomoPoly {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<u16>, BigRational>,
}

impl HomoPoly {
    pub fn zero(n: usize, degree: usize) -> HomoPoly {
        HomoPoly {
            n,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Build from (multi-index, coefficient) terms; indices must sum to
    /// `degree`.
    pub fn from_terms(
        n: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<u16>, BigRational)>,
    ) -> Result<HomoPoly> {
        let mut p = HomoPoly::zero(n, degree);
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::Parse(format!(
                    "multi-index length {} != n = {n}",
                    alpha.len()
                )));
            }
            let s: usize = alpha.iter().map(|&e| e as usize).sum();
            if s != degree {
                return Err(Error::Parse(format!(
                    "term of degree {s} in a homogeneous polynomial of degree {degree}"
                )));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, alpha: Vec<u16>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(alpha).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            let keys: Vec<_> = self
                .coeffs
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in keys {
                self.coeffs.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &HomoPoly) -> HomoPoly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = other.degree;
        }
        for (alpha, c) in &other.coeffs {
            out.add_term(alpha.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HomoPoly) -> HomoPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> HomoPoly {
        let mut out = HomoPoly::zero(self.n, self.degree);
        if c.is_zero() {
            return out;
        }
        for (alpha, v) in &self.coeffs {
            out.coeffs.insert(alpha.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &HomoPoly) -> HomoPoly {
        assert_eq!(self.n, other.n);
        let mut out = HomoPoly::zero(self.n, self.degree + other.degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let alpha: Vec<u16> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                out.add_term(alpha, ca * cb);
            }
        }
        out
    }

    /// Multiply by ||x||^{2k} exactly.
    pub fn mul_norm2k(&self, k: usize) -> HomoPoly {
        let mut norm2 = HomoPoly::zero(self.n, 2);
        for i in 0..self.n {
            let mut alpha = vec![0u16; self.n];
            alpha[i] = 2;
            norm2.add_term(alpha, BigRational::one());
        }
        let mut out = self.clone();
        for _ in 0..k {
            out = out.mul(&norm2);
        }
        out
    }

    /// Exact second-derivative Laplacian; zero polynomial when degree < 2.
    pub fn laplacian(&self) -> HomoPoly {
        let deg = self.degree.saturating_sub(2);
        let mut out = HomoPoly::zero(self.n, deg);
        if self.degree < 2 {
            return out;
        }
        for (alpha, c) in &self.coeffs {
            for i in 0..self.n {
                let e = alpha[i];
                if e >= 2 {
                    let mut beta = alpha.clone();
                    beta[i] -= 2;
                    out.add_term(beta, c * rat((e as i64) * (e as i64 - 1)));
                }
            }
        }
        out
    }

    pub fn partial(&self, i: usize) -> HomoPoly {
        let deg = self.degree.saturating_sub(1);
        let mut out = HomoPoly::zero(self.n, deg);
        for (alpha, c) in &self.coeffs {
            if alpha[i] >= 1 {
                let mut beta = alpha.clone();
                beta[i] -= 1;
                out.add_term(beta, c * rat(alpha[i] as i64));
            }
        }
        out
    }

    /// sum_i x_i dP/dx_i - l P, exactly zero by Euler's identity.
    pub fn euler_residual(&self) -> HomoPoly {
        let mut out = HomoPoly::zero(self.n, self.degree);
        for i in 0..self.n {
            let mut xi = HomoPoly::zero(self.n, 1);
            let mut alpha = vec![0u16; self.n];
            alpha[i] = 1;
            xi.add_term(alpha, BigRational::one());
            out = out.add(&xi.mul(&self.partial(i)));
        }
        out.sub(&self.scale(&rat(self.degree as i64)))
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for (alpha, c) in &self.coeffs {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (xi, &e) in x.iter().zip(alpha.iter()) {
                term *= xi.powi(e as i32);
            }
            acc += term;
        }
        acc
    }

    /// The constant value when degree = 0 (zero if the polynomial is zero).
    pub fn constant(&self) -> BigRational {
        self.coeffs
            .get(&vec![0u16; self.n])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Lower to the field expression grammar over the base coordinates:
    /// x_{2j+1} = Re z_{j+1}, x_{2j+2} = Im z_{j+1}.  Requires n = 2m.
    pub fn to_expr(&self) -> Result<Expr> {
        if self.n % 2 != 0 || self.n > 4 {
            return Err(Error::Parse(format!(
                "polynomial in {} variables has no base realization (need n = 2 or 4)",
                self.n
            )));
        }
        let vars: Vec<Expr> = (0..self.n)
            .map(|i| {
                let j = i / 2;
                if i % 2 == 0 {
                    Expr::re(Expr::Z(j))
                } else {
                    Expr::im(Expr::Z(j))
                }
            })
            .collect();
        let mut acc = Expr::zero();
        for (alpha, c) in &self.coeffs {
            let mut term = Expr::num(c.to_f64().unwrap_or(f64::NAN));
            for (i, &e) in alpha.iter().enumerate() {
                if e > 0 {
                    term = Expr::mul(term, Expr::pow(vars[i].clone(), e as i32));
                }
            }
            acc = Expr::add(acc, term);
        }
        Ok(acc)
    }
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in &self.coeffs {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let a = c.abs();
            let is_const = alpha.iter().all(|&e| e == 0);
            if !a.is_one() || is_const {
                write!(f, "{a}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut firstv = true;
            for (i, &e) in alpha.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !firstv {
                    write!(f, "*")?;
                }
                firstv = false;
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parse the polynomial grammar `x1^2*x2 - 3*x2^3` (rational coefficients
/// allowed as `a/b`) into a homogeneous polynomial in n variables.
pub fn parse_poly(src: &str, n: usize) -> Result<HomoPoly> {
    let mut toks = poly_lex(src)?;
    toks.reverse(); // pop from the back
    let mut terms: Vec<(Vec<u16>, BigRational)> = Vec::new();
    let mut sign = BigRational::one();
    let mut expect_term = true;
    let mut cur_coef = BigRational::one();
    let mut cur_alpha = vec![0u16; n];
    let mut has_cur = false;
    let flush = |terms: &mut Vec<(Vec<u16>, BigRational)>,
                 coef: &BigRational,
                 alpha: &[u16],
                 sign: &BigRational| {
        terms.push((alpha.to_vec(), coef * sign));
    };
    while let Some(t) = toks.pop() {
        match t {
            PTok::Plus | PTok::Minus => {
                if expect_term && matches!(t, PTok::Minus) {
                    sign = -sign;
                    continue;
                }
                if !has_cur {
                    return Err(Error::Parse("dangling operator in polynomial".into()));
                }
                flush(&mut terms, &cur_coef, &cur_alpha, &sign);
                sign = if matches!(t, PTok::Minus) {
                    -BigRational::one()
                } else {
                    BigRational::one()
                };
                cur_coef = BigRational::one();
                cur_alpha = vec![0u16; n];
                has_cur = false;
                expect_term = true;
            }
            PTok::Star => {
                if !has_cur {
                    return Err(Error::Parse("`*` without a preceding factor".into()));
                }
            }
            PTok::Num(v) => {
                cur_coef *= v;
                has_cur = true;
                expect_term = false;
            }
            PTok::Var(i) => {
                if i == 0 || i > n {
                    return Err(Error::Parse(format!(
                        "variable x{i} out of range for n = {n}"
                    )));
                }
                let e = if matches!(toks.last(), Some(PTok::Caret)) {
                    toks.pop();
                    match toks.pop() {
                        Some(PTok::Num(v)) if v.is_integer() && !v.is_negative() => {
                            v.to_integer().to_u16().ok_or_else(|| {
                                Error::Parse("exponent too large".into())
                            })?
                        }
                        _ => return Err(Error::Parse("exponent must be a small integer".into())),
                    }
                } else {
                    1
                };
                cur_alpha[i - 1] += e;
                has_cur = true;
                expect_term = false;
            }
            PTok::Caret => return Err(Error::Parse("`^` without a variable".into())),
        }
    }
    if has_cur {
        flush(&mut terms, &cur_coef, &cur_alpha, &sign);
    } else if terms.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    } else {
        return Err(Error::Parse("trailing operator in polynomial".into()));
    }
    let degree: usize = terms
        .first()
        .map(|(a, _)| a.iter().map(|&e| e as usize).sum())
        .unwrap_or(0);
    HomoPoly::from_terms(n, degree, terms)
}

#[derive(Debug, Clone, PartialEq)]
enum PTok {
    Num(BigRational),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
}

fn poly_lex(src: &str) -> Result<Vec<PTok>> {
    let b: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(PTok::Plus);
                i += 1;
            }
            '-' => {
                out.push(PTok::Minus);
                i += 1;
            }
            '*' => {
                out.push(PTok::Star);
                i += 1;
            }
            '^' => {
                out.push(PTok::Caret);
                i += 1;
            }
            '0'..='9' => {
                let mut j = i;
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                let num: BigInt = src[i..j].parse().map_err(|_| {
                    Error::Parse(format!("bad integer `{}`", &src[i..j]))
                })?;
                i = j;
                let mut v = BigRational::from_integer(num);
                if i < b.len() && b[i] == '/' {
                    let mut k = i + 1;
                    while k < b.len() && b[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == i + 1 {
                        return Err(Error::Parse("`/` without denominator".into()));
                    }
                    let den: BigInt = src[i + 1..k]
                        .parse()
                        .map_err(|_| Error::Parse("bad denominator".into()))?;
                    if den.is_zero() {
                        return Err(Error::Parse("zero denominator".into()));
                    }
                    v /= BigRational::from_integer(den);
                    i = k;
                }
                out.push(PTok::Num(v));
            }
            'x' => {
                let mut j = i + 1;
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(Error::Parse("`x` must be followed by an index".into()));
                }
                let idx: usize = src[i + 1..j]
                    .parse()
                    .map_err(|_| Error::Parse("bad variable index".into()))?;
                out.push(PTok::Var(idx));
                i = j;
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// P = sum_k ||x||^{2k} H_{l-2k} with every part exactly harmonic.
#[derive(Clone, Debug)]
pub struct HarmonicDecomposition {
    pub n: usize,
    pub degree: usize,
    /// (j, H_j), j descending from l in steps of 2, zero parts omitted.
    pub parts: Vec<(usize, HomoPoly)>,
}

impl HarmonicDecomposition {
    pub fn part(&self, j: usize) -> Option<&HomoPoly> {
        self.parts.iter().find(|(d, _)| *d == j).map(|(_, h)| h)
    }

    /// The constant part H_0 (zero when absent or l odd).
    pub fn h0(&self) -> BigRational {
        self.part(0).map(|h| h.constant()).unwrap_or_else(BigRational::zero)
    }

    pub fn reconstruct(&self) -> HomoPoly {
        let mut acc = HomoPoly::zero(self.n, self.degree);
        for (j, h) in &self.parts {
            acc = acc.add(&h.mul_norm2k((self.degree - j) / 2));
        }
        acc
    }
}

/// Coefficient of ||x||^{2(k-t)} H_{l-2k} in Delta^t P, from t applications
/// of Delta(||x||^{2k} H_q) = 2k (2q + n + 2k - 2) ||x||^{2k-2} H_q.
fn delta_coeff(n: usize, l: usize, t: usize, k: usize) -> BigRational {
    let q = (l - 2 * k) as i64;
    let mut acc = BigRational::one();
    for i in 0..t as i64 {
        let ki = k as i64 - i;
        acc *= rat(2 * ki) * rat(2 * q + n as i64 + 2 * ki - 2);
    }
    acc
}

/// Exact harmonic decomposition by triangular elimination on the repeated
/// Laplacians of P.
pub fn harmonic_decompose(p: &HomoPoly) -> HarmonicDecomposition {
    let n = p.n;
    let l = p.degree;
    let kmax = l / 2;
    let mut laps = Vec::with_capacity(kmax + 1);
    laps.push(p.clone());
    for t in 1..=kmax {
        let next = laps[t - 1].laplacian();
        laps.push(next);
    }
    let mut parts_by_k: Vec<Option<HomoPoly>> = vec![None; kmax + 1];
    for t in (0..=kmax).rev() {
        let mut rhs = laps[t].clone();
        for k in (t + 1)..=kmax {
            if let Some(h) = &parts_by_k[k] {
                let term = h.mul_norm2k(k - t).scale(&delta_coeff(n, l, t, k));
                rhs = rhs.sub(&term);
            }
        }
        let a = delta_coeff(n, l, t, t);
        parts_by_k[t] = Some(rhs.scale(&a.recip()));
    }
    let mut parts = Vec::new();
    for (k, h) in parts_by_k.into_iter().enumerate() {
        let h = h.unwrap();
        if !h.is_zero() {
            parts.push((l - 2 * k, h));
        }
    }
    HarmonicDecomposition {
        n,
        degree: l,
        parts,
    }
}

/// An exact rational multiple of pi^pi_pow.
#[derive(Clone, Debug, PartialEq)]
pub struct PiMultiple {
    pub coef: BigRational,
    pub pi_pow: u32,
}

impl PiMultiple {
    pub fn zero(pi_pow: u32) -> PiMultiple {
        PiMultiple {
            coef: BigRational::zero(),
            pi_pow,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.coef.to_f64().unwrap_or(f64::NAN) * PI.powi(self.pi_pow as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pi_pow == 0 || self.coef.is_zero() {
            write!(f, "{}", self.coef)
        } else if self.pi_pow == 1 {
            write!(f, "({})*pi", self.coef)
        } else {
            write!(f, "({})*pi^{}", self.coef, self.pi_pow)
        }
    }
}

fn factorial_big(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    acc
}

/// Exact Lebesgue integral of the monomial x^alpha over the unit sphere
/// S^{n-1} (n even), via the Gamma-function moment formula with
/// Gamma(b + 1/2) = (2b)! sqrt(pi) / (4^b b!).
pub fn sphere_moment(alpha: &[u16]) -> PiMultiple {
    let n = alpha.len();
    assert!(n % 2 == 0, "sphere_moment requires an even number of variables");
    let m = (n / 2) as u32;
    if alpha.iter().any(|&e| e % 2 == 1) {
        return PiMultiple::zero(m);
    }
    let l: usize = alpha.iter().map(|&e| e as usize).sum();
    let mut num = BigRational::from_integer(BigInt::from(2));
    for &e in alpha {
        let b = (e / 2) as usize;
        num *= BigRational::new(
            factorial_big(2 * b),
            BigInt::from(4u32).pow(b as u32) * factorial_big(b),
        );
    }
    // Gamma((l + n)/2) with (l + n)/2 a positive integer.
    let denom = factorial_big((l + n) / 2 - 1);
    PiMultiple {
        coef: num / BigRational::from_integer(denom),
        pi_pow: m,
    }
}

/// Exact Lebesgue integral of P over the unit sphere S^{n-1}: the
/// independent moment-formula oracle for the H_0 route.
pub fn exact_sphere_integral(p: &HomoPoly) -> PiMultiple {
    let m = (p.n / 2) as u32;
    let mut acc = PiMultiple::zero(m);
    for (alpha, c) in &p.coeffs {
        let mom = sphere_moment(alpha);
        acc.coef += c * mom.coef;
    }
    acc
}

/// The two exact values of the boundary integral of the pullback of P over
/// an s-sheeted covering of the unit ball: the printed closed form
/// s H_0 |B^{2m}(1)| and the measured value s H_0 |S^{2m-1}(1)|.
#[derive(Clone, Debug)]
pub struct SphereIntegral {
    pub printed: PiMultiple,
    pub measured: PiMultiple,
}

pub fn sphere_integral_homogeneous(p: &HomoPoly, sheets: usize) -> SphereIntegral {
    assert!(p.n % 2 == 0 && sheets >= 1);
    let m = p.n / 2;
    let h0 = harmonic_decompose(p).h0();
    let s = rat(sheets as i64);
    // |B^{2m}(1)| = pi^m / m!, |S^{2m-1}(1)| = 2 pi^m / (m-1)!.
    let ball = BigRational::new(BigInt::one(), factorial_big(m));
    let sphere = BigRational::new(BigInt::from(2), factorial_big(m - 1));
    SphereIntegral {
        printed: PiMultiple {
            coef: &s * &h0 * ball,
            pi_pow: m as u32,
        },
        measured: PiMultiple {
            coef: s * h0 * sphere,
            pi_pow: m as u32,
        },
    }
}

/// Residuals of the explicit Neumann solution psi = sum_{j >= 1} H_j / j
/// for the boundary data P~ - H_0 on the unit pseudo-sphere.
#[derive(Clone, Debug)]
pub struct NeumannReport {
    pub boundary_residual_max: f64,
    pub laplacian_residual_max: f64,
    pub constancy_residual: f64,
    pub samples: usize,
}

pub fn neumann_example_check(
    p: &HomoPoly,
    cov: &CoveringMap,
    samples: usize,
    seed: u64,
) -> Result<NeumannReport> {
    if cov.base_radius() <= 1.0 {
        return Err(Error::RegionEscapesDomain);
    }
    let dec = harmonic_decompose(p);
    let h0 = dec.h0().to_f64().unwrap_or(f64::NAN);
    let mut psi_expr = Expr::zero();
    for (j, h) in &dec.parts {
        if *j == 0 {
            continue;
        }
        psi_expr = Expr::add(
            psi_expr,
            Expr::div(h.to_expr()?, Expr::num(*j as f64)),
        );
    }
    let psi = ScalarField::from_expr("psi", &psi_expr, cov)?;
    let psi_shift = ScalarField::from_expr(
        "psi+c",
        &Expr::add(psi_expr.clone(), Expr::num(5.0)),
        cov,
    )?;
    let p_expr = p.to_expr()?;
    let p_field = ScalarField::from_expr("P~", &p_expr, cov)?;
    let rho = DefiningFunction::sphere(cov, 1.0)?;

    let m = cov.m();
    let c = cov.base_center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boundary_residual_max = 0.0f64;
    let mut constancy_residual = 0.0f64;
    let mut used = 0usize;
    while used < samples {
        let z = random_sphere_point(m, &c, 1.0, &mut rng);
        for (w, mu) in cov.fiber(&z)? {
            if mu != 1 {
                continue; // boundary check applies on the regular part only
            }
            let x = CoverPoint::unchecked(z, w);
            let nd = fields::normal_derivative(cov, &psi, &rho, &x)?;
            let target = p_field.eval(&x)? - C64::new(h0, 0.0);
            boundary_residual_max = boundary_residual_max.max((nd - target).norm());
            if used == 0 {
                let nd2 = fields::normal_derivative(cov, &psi_shift, &rho, &x)?;
                constancy_residual = constancy_residual.max((nd - nd2).norm());
            }
            used += 1;
            if used >= samples {
                break;
            }
        }
    }

    // Semi-harmonicity of psi branch by branch at interior samples.
    let mut laplacian_residual_max = 0.0f64;
    for _ in 0..24 {
        let z = random_sphere_point(m, &c, rng.gen_range(0.3..0.9), &mut rng);
        for (w, mu) in cov.fiber(&z)? {
            if mu != 1 {
                continue;
            }
            let x = CoverPoint::unchecked(z, w);
            let lv = fields::laplacian(cov, &psi, &x)?;
            laplacian_residual_max = laplacian_residual_max.max(lv.norm());
        }
    }

    Ok(NeumannReport {
        boundary_residual_max,
        laplacian_residual_max,
        constancy_residual,
        samples: used,
    })
}

fn random_sphere_point(m: usize, c: &BasePt, r: f64, rng: &mut ChaCha8Rng) -> BasePt {
    let mut z = *c;
    match m {
        1 => {
            let th = rng.gen_range(0.0..2.0 * PI);
            z.z[0] += C64::from_polar(r, th);
        }
        _ => {
            let th = rng.gen_range(0.0..0.5 * PI);
            let p1 = rng.gen_range(0.0..2.0 * PI);
            let p2 = rng.gen_range(0.0..2.0 * PI);
            z.z[0] += C64::from_polar(r * th.cos(), p1);
            z.z[1] += C64::from_polar(r * th.sin(), p2);
        }
    }
    z
}

/// Deterministic corpus of random homogeneous polynomials for property
/// checks: coefficients are small rationals, seeded for reproducibility.
pub fn random_poly(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> HomoPoly {
    let mut alphas = Vec::new();
    fill_alphas(n, degree, &mut vec![0u16; n], 0, &mut alphas);
    let mut p = HomoPoly::zero(n, degree);
    for alpha in alphas {
        let num = rng.gen_range(-6i64..=6);
        if num == 0 {
            continue;
        }
        let den = rng.gen_range(1i64..=4);
        p.add_term(alpha, BigRational::new(BigInt::from(num), BigInt::from(den)));
    }
    p
}

fn fill_alphas(n: usize, rem: usize, cur: &mut Vec<u16>, i: usize, out: &mut Vec<Vec<u16>>) {
    if i == n - 1 {
        cur[i] = rem as u16;
        out.push(cur.clone());
        return;
    }
    for e in 0..=rem {
        cur[i] = e as u16;
        fill_alphas(n, rem - e, cur, i + 1, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(src: &str, n: usize) -> HomoPoly {
        parse_poly(src, n).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let q = p("x1^2*x2 - 3*x2^3", 2);
        assert_eq!(q.degree(), 3);
        assert_eq!(q.n(), 2);
        assert!((q.eval_f64(&[2.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(parse_poly("x1^2 + x2", 2).is_err()); // not homogeneous
        let half = p("1/2*x1^2", 2);
        assert!((half.eval_f64(&[2.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(p("x1^2", 2).laplacian(), p("2", 2).scale(&BigRational::one()));
        assert!(p("x1^2 - x2^2", 2).laplacian().is_zero());
        assert_eq!(p("x1^4", 2).laplacian(), p("12*x1^2", 2));
    }

    #[test]
    fn decompose_x_squared() {
        let dec = harmonic_decompose(&p("x1^2", 2));
        assert_eq!(dec.h0(), BigRational::new(BigInt::one(), BigInt::from(2)));
        assert_eq!(dec.part(2).unwrap(), &p("1/2*x1^2 - 1/2*x2^2", 2));
        assert_eq!(dec.reconstruct(), p("x1^2", 2));
    }

    #[test]
    fn decompose_harmonic_is_identity() {
        let h = p("x1^3 - 3*x1*x2^2", 2);
        let dec = harmonic_decompose(&h);
        assert_eq!(dec.parts.len(), 1);
        assert_eq!(dec.parts[0], (3, h));
    }

    #[test]
    fn decompose_norm_squared_n4() {
        let dec = harmonic_decompose(&p("x1^2 + x2^2 + x3^2 + x4^2", 4));
        assert_eq!(dec.h0(), BigRational::one());
        assert!(dec.part(2).is_none());
    }

    #[test]
    fn random_corpus_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::covering::DEFAULT_SEED);
        for _ in 0..20 {
            let n = if rng.gen_bool(0.5) { 2 } else { 4 };
            let l = rng.gen_range(0..=6);
            let q = random_poly(n, l, &mut rng);
            let dec = harmonic_decompose(&q);
            for (j, h) in &dec.parts {
                assert!(h.laplacian().is_zero(), "H_{j} not harmonic for {q}");
                assert!(h.euler_residual().is_zero());
            }
            assert_eq!(dec.reconstruct(), q, "reconstruction failed for {q}");
            // Idempotence: decomposing a harmonic part returns it unchanged.
            if let Some((j, h)) = dec.parts.first() {
                let again = harmonic_decompose(h);
                assert_eq!(again.parts, vec![(*j, h.clone())]);
            }
        }
    }

    #[test]
    fn sphere_integrals() {
        let si = sphere_integral_homogeneous(&p("x1^2", 2), 1);
        assert_eq!(si.printed.coef, BigRational::new(BigInt::one(), BigInt::from(2)));
        assert_eq!(si.measured.coef, BigRational::one()); // pi itself
        // Independent moment oracle agrees with the H_0 route.
        let oracle = exact_sphere_integral(&p("x1^2", 2));
        assert_eq!(oracle.coef, si.measured.coef);
        assert_eq!(oracle.pi_pow, 1);

        assert!(sphere_integral_homogeneous(&p("x1^3", 2), 1).measured.is_zero());

        let si = sphere_integral_homogeneous(&p("1", 2), 3);
        assert_eq!(si.printed.coef, rat(3));
        assert_eq!(si.measured.coef, rat(6));

        // n = 4: int_{S^3} x1^2 = pi^2 / 2.
        let mom = sphere_moment(&[2, 0, 0, 0]);
        assert_eq!(mom.coef, BigRational::new(BigInt::one(), BigInt::from(2)));
        assert_eq!(mom.pi_pow, 2);
    }

    #[test]
    fn moment_oracle_matches_quadrature() {
        use crate::quadrature::{integrate, sphere_rule};
        let q = p("x1^2*x2^2 + 2*x1^4", 4);
        let exact = exact_sphere_integral(&q).to_f64();
        let rule = sphere_rule(2, BasePt::new2(C64::new(0.0, 0.0), C64::new(0.0, 0.0)), 1.0, 16);
        let num = integrate(&rule, |z| {
            Ok(C64::new(
                q.eval_f64(&[z.z[0].re, z.z[0].im, z.z[1].re, z.z[1].im]),
                0.0,
            ))
        })
        .unwrap();
        assert!((num.re - exact).abs() < 1e-9, "{} vs {exact}", num.re);
    }

    #[test]
    fn neumann_identity_covering() {
        let cov = CoveringMap::new(
            1,
            vec![parse("-z1").unwrap()],
            BasePt::new1(C64::new(0.0, 0.0)),
            3.0,
            "id",
        )
        .unwrap();
        let rep = neumann_example_check(&p("x1^2", 2), &cov, 50, 20070703).unwrap();
        assert!(rep.boundary_residual_max < 1e-8, "{}", rep.boundary_residual_max);
        assert!(rep.laplacian_residual_max < 1e-7, "{}", rep.laplacian_residual_max);
        assert!(rep.constancy_residual < 1e-10);

        let rep = neumann_example_check(&p("x1^3 - 3*x1*x2^2", 2), &cov, 50, 1).unwrap();
        assert!(rep.boundary_residual_max < 1e-8, "{}", rep.boundary_residual_max);
    }

    #[test]
    fn neumann_two_sheeted_covering() {
        let cov = CoveringMap::new(
            1,
            vec![parse("-z1").unwrap(), Expr::zero()],
            BasePt::new1(C64::new(0.0, 0.0)),
            3.0,
            "w^2-z",
        )
        .unwrap();
        let rep = neumann_example_check(&p("x1^2", 2), &cov, 60, 20070703).unwrap();
        assert!(rep.boundary_residual_max < 1e-6, "{}", rep.boundary_residual_max);
    }
}
