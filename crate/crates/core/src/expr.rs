//! The small expression grammar used for covering coefficients and scalar
//! fields: `z1, z2, w, conj(..), re(..), im(..), log(..), abs2(..), + - * / ^`,
//! complex literals (`i` is the imaginary unit), and the built-in
//! `radial_singular(alpha, s, h)` family.
//!
//! Expressions carry exact Wirtinger differentiation: `d/dz_j` and `d/dz_bar_j`
//! are produced symbolically, with the fiber coordinate `w` differentiated
//! implicitly through the defining polynomial (`dw/dz_j = -F_{z_j}/F_w`).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(C64),
    /// Base coordinate z_{j+1}, j in {0, 1}.
    Z(usize),
    /// The fiber coordinate.
    W,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Conj(Box<Expr>),
    Log(Box<Expr>),
}

/// Monic fiber polynomial data needed for implicit differentiation of `w`.
pub struct FiberSpec<'a> {
    pub degree: usize,
    /// Coefficient of w^i for i in 0..degree; each depends on z only.
    pub coeffs: &'a [Expr],
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(C64::new(v, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(c) if c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(c) if c.re == 1.0 && c.im == 0.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            b
        } else if b.is_zero() {
            a
        } else {
            Expr::Add(Box::new(a), Box::new(b))
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            a
        } else if a.is_zero() {
            Expr::Neg(Box::new(b))
        } else {
            Expr::Sub(Box::new(a), Box::new(b))
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            Expr::zero()
        } else if a.is_one() {
            b
        } else if b.is_one() {
            a
        } else {
            Expr::Mul(Box::new(a), Box::new(b))
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            Expr::zero()
        } else if b.is_one() {
            a
        } else {
            Expr::Div(Box::new(a), Box::new(b))
        }
    }

    pub fn neg(a: Expr) -> Expr {
        if a.is_zero() {
            a
        } else {
            Expr::Neg(Box::new(a))
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::num(1.0),
            1 => a,
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn conj(a: Expr) -> Expr {
        match a {
            Expr::Num(c) => Expr::Num(c.conj()),
            Expr::Conj(inner) => *inner,
            other => Expr::Conj(Box::new(other)),
        }
    }

    /// re(e) = (e + conj e)/2
    pub fn re(a: Expr) -> Expr {
        Expr::mul(Expr::num(0.5), Expr::add(a.clone(), Expr::conj(a)))
    }

    /// im(e) = (e - conj e)/(2i)
    pub fn im(a: Expr) -> Expr {
        Expr::mul(
            Expr::Num(C64::new(0.0, -0.5)),
            Expr::sub(a.clone(), Expr::conj(a)),
        )
    }

    /// abs2(e) = e * conj(e)
    pub fn abs2(a: Expr) -> Expr {
        Expr::mul(a.clone(), Expr::conj(a))
    }

    pub fn eval(&self, z: &[C64; 2], w: C64) -> Result<C64> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Z(j) => z[*j],
            Expr::W => w,
            Expr::Add(a, b) => a.eval(z, w)? + b.eval(z, w)?,
            Expr::Sub(a, b) => a.eval(z, w)? - b.eval(z, w)?,
            Expr::Mul(a, b) => a.eval(z, w)? * b.eval(z, w)?,
            Expr::Div(a, b) => {
                let d = b.eval(z, w)?;
                if d.norm() == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                a.eval(z, w)? / d
            }
            Expr::Neg(a) => -a.eval(z, w)?,
            Expr::Pow(a, n) => a.eval(z, w)?.powi(*n),
            Expr::Conj(a) => a.eval(z, w)?.conj(),
            Expr::Log(a) => {
                let v = a.eval(z, w)?;
                if v.norm() == 0.0 {
                    return Err(Error::Eval("log of zero".into()));
                }
                v.ln()
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval("non-finite value".into()))
        }
    }

    /// True if the expression never references the fiber coordinate.
    pub fn is_base_only(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Z(_) => true,
            Expr::W => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_base_only() && b.is_base_only()
            }
            Expr::Neg(a) | Expr::Conj(a) | Expr::Log(a) => a.is_base_only(),
            Expr::Pow(a, _) => a.is_base_only(),
        }
    }

    /// Wirtinger derivative d/dz_j (holomorphic direction).
    pub fn diff_z(&self, j: usize, fiber: Option<&FiberSpec>) -> Result<Expr> {
        let d = match self {
            Expr::Num(_) => Expr::zero(),
            Expr::Z(k) => {
                if *k == j {
                    Expr::num(1.0)
                } else {
                    Expr::zero()
                }
            }
            Expr::W => {
                let f = fiber.ok_or_else(|| {
                    Error::Eval("w differentiated without a covering context".into())
                })?;
                dw_dz(j, f)?
            }
            Expr::Add(a, b) => Expr::add(a.diff_z(j, fiber)?, b.diff_z(j, fiber)?),
            Expr::Sub(a, b) => Expr::sub(a.diff_z(j, fiber)?, b.diff_z(j, fiber)?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff_z(j, fiber)?, (**b).clone()),
                Expr::mul((**a).clone(), b.diff_z(j, fiber)?),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff_z(j, fiber)?, (**b).clone()),
                    Expr::mul((**a).clone(), b.diff_z(j, fiber)?),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Neg(a) => Expr::neg(a.diff_z(j, fiber)?),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::num(*n as f64), Expr::pow((**a).clone(), *n - 1)),
                a.diff_z(j, fiber)?,
            ),
            Expr::Conj(a) => Expr::conj(a.diff_zbar(j, fiber)?),
            Expr::Log(a) => Expr::div(a.diff_z(j, fiber)?, (**a).clone()),
        };
        Ok(d)
    }

    /// Wirtinger derivative d/dz_bar_j (anti-holomorphic direction).
    pub fn diff_zbar(&self, j: usize, fiber: Option<&FiberSpec>) -> Result<Expr> {
        let d = match self {
            Expr::Num(_) | Expr::Z(_) => Expr::zero(),
            // w is an algebraic (holomorphic) function of z on each sheet.
            Expr::W => Expr::zero(),
            Expr::Add(a, b) => Expr::add(a.diff_zbar(j, fiber)?, b.diff_zbar(j, fiber)?),
            Expr::Sub(a, b) => Expr::sub(a.diff_zbar(j, fiber)?, b.diff_zbar(j, fiber)?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff_zbar(j, fiber)?, (**b).clone()),
                Expr::mul((**a).clone(), b.diff_zbar(j, fiber)?),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff_zbar(j, fiber)?, (**b).clone()),
                    Expr::mul((**a).clone(), b.diff_zbar(j, fiber)?),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Neg(a) => Expr::neg(a.diff_zbar(j, fiber)?),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::num(*n as f64), Expr::pow((**a).clone(), *n - 1)),
                a.diff_zbar(j, fiber)?,
            ),
            Expr::Conj(a) => Expr::conj(a.diff_z(j, fiber)?),
            Expr::Log(a) => Expr::div(a.diff_zbar(j, fiber)?, (**a).clone()),
        };
        Ok(d)
    }

    /// Partial derivative with respect to the real coordinate x~_{j+1}:
    /// d/dx = d/dz + d/dz_bar.
    pub fn diff_x(&self, j: usize, fiber: Option<&FiberSpec>) -> Result<Expr> {
        Ok(Expr::add(self.diff_z(j, fiber)?, self.diff_zbar(j, fiber)?))
    }

    /// Partial derivative with respect to the real coordinate y~_{j+1}:
    /// d/dy = i (d/dz - d/dz_bar).
    pub fn diff_y(&self, j: usize, fiber: Option<&FiberSpec>) -> Result<Expr> {
        Ok(Expr::mul(
            Expr::Num(C64::new(0.0, 1.0)),
            Expr::sub(self.diff_z(j, fiber)?, self.diff_zbar(j, fiber)?),
        ))
    }
}

/// dw/dz_j = -F_{z_j}(z, w) / F_w(z, w) on a sheet of the graph covering.
fn dw_dz(j: usize, fiber: &FiberSpec) -> Result<Expr> {
    let k = fiber.degree;
    // F_{z_j} = sum_i (dc_i/dz_j) w^i
    let mut fz = Expr::zero();
    for (i, c) in fiber.coeffs.iter().enumerate() {
        let dc = c.diff_z(j, None)?;
        fz = Expr::add(fz, Expr::mul(dc, Expr::pow(Expr::W, i as i32)));
    }
    // F_w = k w^{k-1} + sum_i i c_i w^{i-1}
    let mut fw = Expr::mul(Expr::num(k as f64), Expr::pow(Expr::W, k as i32 - 1));
    for (i, c) in fiber.coeffs.iter().enumerate().skip(1) {
        fw = Expr::add(
            fw,
            Expr::mul(
                Expr::mul(Expr::num(i as f64), c.clone()),
                Expr::pow(Expr::W, i as i32 - 1),
            ),
        );
    }
    Ok(Expr::neg(Expr::div(fz, fw)))
}

/// Context the parser needs for the `radial_singular` built-in.
#[derive(Clone, Copy, Debug)]
pub struct ParseContext {
    pub m: usize,
    /// Base coordinate of the singular center a' = p(a).
    pub center: [C64; 2],
}

impl Default for ParseContext {
    fn default() -> Self {
        ParseContext {
            m: 1,
            center: [C64::new(0.0, 0.0); 2],
        }
    }
}

/// Build the Example-5.5 field (log ||p^[a]||^2)^alpha h / ||p^[a]||^{2m-2+s}.
///
/// Requires 2m-2+s even so the denominator is a power of ||p^[a]||^2.
pub fn radial_singular(ctx: &ParseContext, alpha: u32, s: u32, h: Expr) -> Result<Expr> {
    let pow2 = 2 * ctx.m as u32 - 2 + s;
    if pow2 % 2 != 0 {
        return Err(Error::Parse(
            "radial_singular: 2m-2+s must be even (s must be even)".into(),
        ));
    }
    let mut rho2 = Expr::zero();
    for j in 0..ctx.m {
        rho2 = Expr::add(
            rho2,
            Expr::abs2(Expr::sub(Expr::Z(j), Expr::Num(ctx.center[j]))),
        );
    }
    let mut e = h;
    if alpha > 0 {
        e = Expr::mul(Expr::pow(Expr::Log(Box::new(rho2.clone())), alpha as i32), e);
    }
    if pow2 > 0 {
        e = Expr::div(e, Expr::pow(rho2, (pow2 / 2) as i32));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' | '−' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let save = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == '+' || bytes[i] == '-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        i = save;
                    }
                }
                let s: String = bytes[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number literal `{s}`")))?;
                toks.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_')
                {
                    i += 1;
                }
                toks.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Parse(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.next();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    lhs = Expr::mul(lhs, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.next();
                    lhs = Expr::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            return Ok(Expr::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.next();
            let neg = if matches!(self.peek(), Some(Tok::Minus)) {
                self.next();
                true
            } else {
                false
            };
            let n = match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 => v as i32,
                got => {
                    return Err(Error::Parse(format!(
                        "exponent must be an integer, got {got:?}"
                    )))
                }
            };
            return Ok(Expr::pow(base, if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "i" => Ok(Expr::Num(C64::new(0.0, 1.0))),
                "z1" => Ok(Expr::Z(0)),
                "z2" => Ok(Expr::Z(1)),
                "w" => Ok(Expr::W),
                "conj" | "re" | "im" | "log" | "abs2" => {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(match name.as_str() {
                        "conj" => Expr::conj(arg),
                        "re" => Expr::re(arg),
                        "im" => Expr::im(arg),
                        "log" => Expr::Log(Box::new(arg)),
                        _ => Expr::abs2(arg),
                    })
                }
                "radial_singular" => {
                    self.expect(Tok::LParen)?;
                    let alpha = self.nonneg_int_arg("alpha")?;
                    self.expect(Tok::Comma)?;
                    let s = self.nonneg_int_arg("s")?;
                    let h = if matches!(self.peek(), Some(Tok::Comma)) {
                        self.next();
                        self.expr()?
                    } else {
                        Expr::num(1.0)
                    };
                    self.expect(Tok::RParen)?;
                    radial_singular(self.ctx, alpha, s, h)
                }
                other => Err(Error::Parse(format!("unknown identifier `{other}`"))),
            },
            got => Err(Error::Parse(format!("unexpected token {got:?}"))),
        }
    }

    fn nonneg_int_arg(&mut self, what: &str) -> Result<u32> {
        match self.next() {
            Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 => Ok(v as u32),
            got => Err(Error::Parse(format!(
                "{what} must be a non-negative integer, got {got:?}"
            ))),
        }
    }
}

/// Parse an expression of the field/coefficient grammar.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with(src, &ParseContext::default())
}

/// Parse with an explicit context (dimension and singular center).
pub fn parse_with(src: &str, ctx: &ParseContext) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing tokens at position {}",
            p.pos
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, z1: C64, w: C64) -> C64 {
        parse(src).unwrap().eval(&[z1, C64::new(0.0, 0.0)], w).unwrap()
    }

    #[test]
    fn parses_arithmetic() {
        let v = ev("2*z1^2 - 3*z1 + 1", C64::new(2.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(v, C64::new(3.0, 0.0));
    }

    #[test]
    fn imaginary_unit_and_helpers() {
        let z = C64::new(1.0, 2.0);
        assert_eq!(ev("re(z1)", z, C64::new(0.0, 0.0)), C64::new(1.0, 0.0));
        assert_eq!(ev("im(z1)", z, C64::new(0.0, 0.0)), C64::new(2.0, 0.0));
        assert_eq!(ev("abs2(z1)", z, C64::new(0.0, 0.0)), C64::new(5.0, 0.0));
        assert_eq!(ev("i*i", z, C64::new(0.0, 0.0)), C64::new(-1.0, 0.0));
    }

    #[test]
    fn rejects_unknown_identifier() {
        assert!(parse("foo(z1)").is_err());
    }

    #[test]
    fn wirtinger_of_abs2_matches_hand_result() {
        // d/dz |z|^2 = conj(z), d/dzbar |z|^2 = z.
        let e = parse("abs2(z1)").unwrap();
        let z = [C64::new(0.7, -0.3), C64::new(0.0, 0.0)];
        let w = C64::new(0.0, 0.0);
        let dz = e.diff_z(0, None).unwrap().eval(&z, w).unwrap();
        let dzb = e.diff_zbar(0, None).unwrap().eval(&z, w).unwrap();
        assert!((dz - z[0].conj()).norm() < 1e-15);
        assert!((dzb - z[0]).norm() < 1e-15);
    }

    #[test]
    fn implicit_w_derivative_on_sqrt_covering() {
        // F = w^2 - z: dw/dz = 1/(2w).
        let coeffs = vec![Expr::neg(Expr::Z(0)), Expr::zero()];
        let fiber = FiberSpec {
            degree: 2,
            coeffs: &coeffs,
        };
        let e = Expr::W;
        let d = e.diff_z(0, Some(&fiber)).unwrap();
        let z = [C64::new(4.0, 0.0), C64::new(0.0, 0.0)];
        let w = C64::new(2.0, 0.0);
        let v = d.eval(&z, w).unwrap();
        assert!((v - C64::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn radial_singular_log_field() {
        // alpha=1, s=0, m=1: log|z|^2.
        let ctx = ParseContext::default();
        let e = parse_with("radial_singular(1, 0)", &ctx).unwrap();
        let z = [C64::new(0.5, 0.0), C64::new(0.0, 0.0)];
        let v = e.eval(&z, C64::new(0.0, 0.0)).unwrap();
        assert!((v.re - (0.25f64).ln()).abs() < 1e-15);
    }
}
