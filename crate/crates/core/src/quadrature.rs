//! Deterministic product quadrature for Lebesgue surface measure on
//! S^{2m-1}(r) and Lebesgue volume on balls in R^{2m}, m in {1, 2}.
//!
//! Conversion to the normalized forms of the covering calculus:
//! `upsilon_p^m = (m!/pi^m) * Lebesgue volume` and
//! `sigma_a = Lebesgue surface / (|S| r^{2m-1})`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::covering::BasePt;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Sphere,
    Ball,
}

/// Nodes and positive Lebesgue weights on a sphere or ball in R^{2m}.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub m: usize,
    pub center: BasePt,
    pub radius: f64,
    pub nodes: Vec<BasePt>,
    pub weights: Vec<f64>,
}

/// |S^{2m-1}(r)| = 2 pi^m r^{2m-1} / (m-1)!
pub fn sphere_area(m: usize, r: f64) -> f64 {
    let fact: f64 = (1..m).map(|i| i as f64).product();
    2.0 * PI.powi(m as i32) * r.powi(2 * m as i32 - 1) / fact
}

/// |B^{2m}(r)| = pi^m r^{2m} / m!
pub fn ball_volume(m: usize, r: f64) -> f64 {
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    PI.powi(m as i32) * r.powi(2 * m as i32) / fact
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Initial guess (Chebyshev-like), then Newton on P_n.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Surface rule on S^{2m-1}(r) about `center`.
///
/// m = 1: n-point trapezoid on the circle. m = 2: Gauss-Legendre in the Hopf
/// angle (Jacobian cos t sin t) tensored with two n*2-point circle rules.
pub fn sphere_rule(m: usize, center: BasePt, r: f64, n: usize) -> QuadratureRule {
    assert!(n >= 8, "sphere_rule requires n >= 8");
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match m {
        1 => {
            let w = 2.0 * PI * r / n as f64;
            for k in 0..n {
                let th = 2.0 * PI * k as f64 / n as f64;
                let mut z = center;
                z.z[0] += C64::from_polar(r, th);
                nodes.push(z);
                weights.push(w);
            }
        }
        2 => {
            let (tx, tw) = gauss_legendre(n);
            let np = 2 * n;
            let dphi = 2.0 * PI / np as f64;
            for (t, wt) in tx.iter().zip(tw.iter()) {
                // Map [-1,1] -> [0, pi/2].
                let th = (t + 1.0) * 0.25 * PI;
                let jac = th.cos() * th.sin() * 0.25 * PI * wt;
                for k1 in 0..np {
                    let p1 = dphi * k1 as f64;
                    for k2 in 0..np {
                        let p2 = dphi * k2 as f64;
                        let mut z = center;
                        z.z[0] += C64::from_polar(r * th.cos(), p1);
                        z.z[1] += C64::from_polar(r * th.sin(), p2);
                        nodes.push(z);
                        weights.push(r.powi(3) * jac * dphi * dphi);
                    }
                }
            }
        }
        _ => panic!("m must be 1 or 2"),
    }
    QuadratureRule {
        kind: RuleKind::Sphere,
        m,
        center,
        radius: r,
        nodes,
        weights,
    }
}

/// Volume rule on B^{2m}(r): Gauss-Legendre in radius (Jacobian t^{2m-1})
/// tensored with the sphere rule.
pub fn ball_rule(m: usize, center: BasePt, r: f64, n_r: usize, n_s: usize) -> QuadratureRule {
    assert!(n_r >= 4, "ball_rule requires n_r >= 4");
    let unit = sphere_rule(m, BasePt { m, z: [C64::new(0.0, 0.0); 2] }, 1.0, n_s);
    let (rx, rw) = gauss_legendre(n_r);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (t, wt) in rx.iter().zip(rw.iter()) {
        let rad = (t + 1.0) * 0.5 * r;
        let jw = rad.powi(2 * m as i32 - 1) * 0.5 * r * wt;
        for (u, wu) in unit.nodes.iter().zip(unit.weights.iter()) {
            let mut z = center;
            for j in 0..m {
                z.z[j] += u.z[j] * rad;
            }
            nodes.push(z);
            weights.push(jw * wu);
        }
    }
    QuadratureRule {
        kind: RuleKind::Ball,
        m,
        center,
        radius: r,
        nodes,
        weights,
    }
}

/// Integrate with deterministic pairwise reduction so results are bit-stable
/// for a fixed node count.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<C64>
where
    F: Fn(&BasePt) -> Result<C64>,
{
    let mut terms = Vec::with_capacity(rule.nodes.len());
    for (node, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        terms.push(f(node)? * *w);
    }
    Ok(pairwise_sum(&terms))
}

fn pairwise_sum(terms: &[C64]) -> C64 {
    match terms.len() {
        0 => C64::new(0.0, 0.0),
        1 => terms[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

/// Residual of the co-area identity: ball integral vs radial Gauss-Legendre
/// of sphere integrals.
pub fn coarea_check<F>(m: usize, center: BasePt, r: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(&BasePt) -> Result<C64>,
{
    let ball = ball_rule(m, center, r, n.max(16), n);
    let lhs = integrate(&ball, &f)?;
    let (rx, rw) = gauss_legendre(n.max(16));
    let mut terms = Vec::new();
    for (t, wt) in rx.iter().zip(rw.iter()) {
        let rad = (t + 1.0) * 0.5 * r;
        let sph = sphere_rule(m, center, rad, n);
        terms.push(integrate(&sph, &f)? * (0.5 * r * wt));
    }
    let rhs = pairwise_sum(&terms);
    Ok((lhs - rhs).norm())
}
