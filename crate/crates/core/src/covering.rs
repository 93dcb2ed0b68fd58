//! Riemann domains presented as graph coverings: a monic fiber polynomial
//! F(z, w) over a base ball in C^m (m = 1, 2). Supplies fibers, local
//! multiplicity, sheet degree, the pushforward (trace), and branch
//! continuation of fiber roots along base paths.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr, FiberSpec};

/// Seed used for all deterministic validation sampling.
pub const DEFAULT_SEED: u64 = 20070703;

/// A point of the base C^m, m in {1, 2}. The unused slot is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePt {
    pub m: usize,
    pub z: [C64; 2],
}

impl BasePt {
    pub fn new1(z: C64) -> BasePt {
        BasePt {
            m: 1,
            z: [z, C64::new(0.0, 0.0)],
        }
    }

    pub fn new2(z1: C64, z2: C64) -> BasePt {
        BasePt { m: 2, z: [z1, z2] }
    }

    /// Build from 2m real coordinates (x1, y1, x2, y2).
    pub fn from_reals(m: usize, x: &[f64]) -> BasePt {
        let mut z = [C64::new(0.0, 0.0); 2];
        for j in 0..m {
            z[j] = C64::new(x[2 * j], x[2 * j + 1]);
        }
        BasePt { m, z }
    }

    /// The j-th real coordinate, j in 0..2m.
    pub fn real_coord(&self, j: usize) -> f64 {
        if j % 2 == 0 {
            self.z[j / 2].re
        } else {
            self.z[j / 2].im
        }
    }

    /// Copy with the j-th real coordinate shifted by h.
    pub fn shifted(&self, j: usize, h: f64) -> BasePt {
        let mut out = *self;
        if j % 2 == 0 {
            out.z[j / 2].re += h;
        } else {
            out.z[j / 2].im += h;
        }
        out
    }

    /// Euclidean distance in R^{2m}.
    pub fn dist(&self, other: &BasePt) -> f64 {
        let mut s = 0.0;
        for j in 0..self.m {
            s += (self.z[j] - other.z[j]).norm_sqr();
        }
        s.sqrt()
    }

    /// Linear interpolation (1-t) self + t other.
    pub fn lerp(&self, other: &BasePt, t: f64) -> BasePt {
        let mut z = [C64::new(0.0, 0.0); 2];
        for j in 0..self.m {
            z[j] = self.z[j] * (1.0 - t) + other.z[j] * t;
        }
        BasePt { m: self.m, z }
    }
}

/// A point of the covering space X as a (base, fiber) pair.
#[derive(Debug)]
pub struct CoverPoint {
    pub base: BasePt,
    pub fiber: C64,
    mult: OnceLock<u32>,
}

impl Clone for CoverPoint {
    fn clone(&self) -> Self {
        let mult = OnceLock::new();
        if let Some(v) = self.mult.get() {
            let _ = mult.set(*v);
        }
        CoverPoint {
            base: self.base,
            fiber: self.fiber,
            mult,
        }
    }
}

impl CoverPoint {
    /// Build a cover point, checking |F(base, fiber)| against the solver
    /// tolerance scaled by the coefficient magnitudes.
    pub fn new(cov: &CoveringMap, base: BasePt, fiber: C64) -> Result<CoverPoint> {
        let coeffs = cov.coeff_values(&base)?;
        let scale = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let v = eval_monic(&coeffs, fiber);
        if v.norm() > 1e-9 * scale {
            return Err(Error::InvalidCovering(format!(
                "point not on the covering: |F| = {:.3e}",
                v.norm()
            )));
        }
        Ok(CoverPoint {
            base,
            fiber,
            mult: OnceLock::new(),
        })
    }

    /// Build without the on-covering residual check (for solver-produced
    /// fiber roots, which already satisfy it).
    pub fn unchecked(base: BasePt, fiber: C64) -> CoverPoint {
        CoverPoint {
            base,
            fiber,
            mult: OnceLock::new(),
        }
    }

    /// Multiplicity nu_p at this point (computed once, then cached).
    pub fn multiplicity(&self, cov: &CoveringMap) -> Result<u32> {
        if let Some(v) = self.mult.get() {
            return Ok(*v);
        }
        let v = cov.local_multiplicity_at(&self.base, self.fiber)?;
        let _ = self.mult.set(v);
        Ok(v)
    }
}

/// JSON wire format for covering specifications.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringSpec {
    pub m: usize,
    pub fiber_degree: usize,
    /// Keys "w^0" .. "w^{k-1}" mapped to coefficient expressions over z1, z2.
    pub coeffs: BTreeMap<String, String>,
    /// 2m real coordinates of the base center.
    pub base_center: Vec<f64>,
    pub base_radius: f64,
}

/// A Riemann domain p : X -> Omega given by a monic fiber polynomial.
#[derive(Debug, Clone)]
pub struct CoveringMap {
    m: usize,
    degree: usize,
    /// Coefficient of w^i for i in 0..degree, expressions over z only.
    coeffs: Vec<Expr>,
    base_center: BasePt,
    base_radius: f64,
    identity: bool,
    label: String,
}

impl CoveringMap {
    pub fn new(
        m: usize,
        coeffs: Vec<Expr>,
        base_center: BasePt,
        base_radius: f64,
        label: impl Into<String>,
    ) -> Result<CoveringMap> {
        if m != 1 && m != 2 {
            return Err(Error::InvalidCovering(format!("m must be 1 or 2, got {m}")));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidCovering("fiber degree must be >= 1".into()));
        }
        if !(base_radius > 0.0) {
            return Err(Error::InvalidCovering("base radius must be positive".into()));
        }
        for c in &coeffs {
            if !c.is_base_only() {
                return Err(Error::InvalidCovering(
                    "fiber coefficients must not reference w".into(),
                ));
            }
        }
        let degree = coeffs.len();
        let cov = CoveringMap {
            m,
            degree,
            coeffs,
            base_center,
            base_radius,
            identity: degree == 1,
            label: label.into(),
        };
        cov.validate()?;
        Ok(cov)
    }

    pub fn from_spec(spec: &CoveringSpec) -> Result<CoveringMap> {
        let k = spec.fiber_degree;
        if k == 0 {
            return Err(Error::InvalidCovering("fiber_degree must be >= 1".into()));
        }
        if spec.base_center.len() != 2 * spec.m {
            return Err(Error::InvalidCovering(format!(
                "base_center must have {} real coordinates",
                2 * spec.m
            )));
        }
        let mut coeffs = vec![Expr::zero(); k];
        for (key, src) in &spec.coeffs {
            let i: usize = key
                .strip_prefix("w^")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    Error::InvalidCovering(format!("bad coefficient key `{key}`"))
                })?;
            let e = expr::parse(src)?;
            if i == k {
                // The leading coefficient may be spelled out but must be 1.
                if !e.is_one() {
                    return Err(Error::InvalidCovering(
                        "fiber polynomial must be monic (leading coefficient 1)".into(),
                    ));
                }
                continue;
            }
            if i > k {
                return Err(Error::InvalidCovering(format!(
                    "coefficient key `{key}` exceeds fiber_degree {k}"
                )));
            }
            coeffs[i] = e;
        }
        CoveringMap::new(
            spec.m,
            coeffs,
            BasePt::from_reals(spec.m, &spec.base_center),
            spec.base_radius,
            "json",
        )
    }

    /// Discriminant sampling check: at 8 random base points F(z, .) must have
    /// k distinct roots and fiber multiplicities must sum to k.
    fn validate(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        for _ in 0..8 {
            let z = self.random_base_point(&mut rng, 0.9);
            let roots = self.fiber(&z)?;
            let total: u32 = roots.iter().map(|(_, mu)| *mu).sum();
            if total as usize != self.degree {
                return Err(Error::InvalidCovering(format!(
                    "fiber multiplicities sum to {total}, expected {}",
                    self.degree
                )));
            }
            if roots.len() != self.degree {
                return Err(Error::InvalidCovering(
                    "discriminant vanishes at a random base point; \
                     covering spec rejected"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    pub fn random_base_point(&self, rng: &mut ChaCha8Rng, frac: f64) -> BasePt {
        let n = 2 * self.m;
        loop {
            let mut x = [0.0f64; 4];
            for xi in x.iter_mut().take(n) {
                *xi = rng.gen_range(-1.0..1.0);
            }
            let norm2: f64 = x.iter().take(n).map(|v| v * v).sum();
            if norm2 <= 1.0 && norm2 > 1e-4 {
                let mut z = self.base_center;
                for j in 0..self.m {
                    z.z[j] += C64::new(x[2 * j], x[2 * j + 1]) * self.base_radius * frac;
                }
                return z;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sheet number: the fiber-polynomial degree.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base_center(&self) -> BasePt {
        self.base_center
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn fiber_spec(&self) -> FiberSpec<'_> {
        FiberSpec {
            degree: self.degree,
            coeffs: &self.coeffs,
        }
    }

    pub fn contains_base(&self, z: &BasePt) -> bool {
        z.dist(&self.base_center) < self.base_radius
    }

    /// Coefficient values of F(z, .) at a base point (below the leading 1).
    pub fn coeff_values(&self, z: &BasePt) -> Result<Vec<C64>> {
        self.coeffs
            .iter()
            .map(|c| c.eval(&z.z, C64::new(0.0, 0.0)))
            .collect()
    }

    /// Roots of F(z, .) clustered by relative distance, with multiplicities
    /// summing to the degree, in lexicographic (Re, Im) order.
    pub fn fiber(&self, z: &BasePt) -> Result<Vec<(C64, u32)>> {
        if !self.contains_base(z) {
            return Err(Error::RegionEscapesDomain);
        }
        let coeffs = self.coeff_values(z)?;
        let roots = solve_monic(&coeffs)?;
        Ok(cluster_roots(&roots))
    }

    /// Raw (unclustered) fiber roots; nodes falling on the branch locus are
    /// jittered off it by 1e-8 * base_radius.
    pub fn fiber_raw(&self, z: &BasePt) -> Result<Vec<C64>> {
        let coeffs = self.coeff_values(z)?;
        let roots = solve_monic(&coeffs)?;
        let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let min_sep = min_separation(&roots);
        if roots.len() > 1 && min_sep < 1e-10 * scale {
            let jit = self.base_radius * 1e-8;
            let zj = z.shifted(0, jit).shifted(1, jit * 0.5);
            let coeffs = self.coeff_values(&zj)?;
            return solve_monic(&coeffs);
        }
        Ok(roots)
    }

    /// Local multiplicity of (z, w): fiber points of a perturbed base point
    /// counted within the Rouche radius delta = 10 eps^{1/k}.
    pub fn local_multiplicity_at(&self, z: &BasePt, w: C64) -> Result<u32> {
        let eps = 1e-4 * self.base_radius;
        // Generic perturbation direction, kept off the real axis.
        let dir = C64::from_polar(1.0, 0.628318);
        let mut zp = *z;
        zp.z[0] += dir * eps;
        let delta = 10.0 * eps.powf(1.0 / self.degree as f64);
        let roots = {
            let coeffs = self.coeff_values(&zp)?;
            solve_monic(&coeffs)?
        };
        let mut count = 0u32;
        let mut nearest_outside = f64::INFINITY;
        let mut farthest_inside: f64 = 0.0;
        for r in &roots {
            let d = (r - w).norm();
            if d <= delta {
                count += 1;
                farthest_inside = farthest_inside.max(d);
            } else {
                nearest_outside = nearest_outside.min(d);
            }
        }
        if count == 0 {
            return Err(Error::AmbiguousCluster);
        }
        // A root sitting right on the cluster radius signals a
        // near-degenerate discriminant at the working perturbation.
        if nearest_outside < 2.0 * farthest_inside && nearest_outside < 2.0 * delta {
            return Err(Error::AmbiguousCluster);
        }
        Ok(count)
    }

    pub fn local_multiplicity(&self, x: &CoverPoint) -> Result<u32> {
        x.multiplicity(self)
    }

    /// Fiber-sum pushforward: sum_{(w, mu)} mu f(z, w).
    pub fn trace<F>(&self, f: F, z: &BasePt) -> Result<C64>
    where
        F: Fn(&CoverPoint) -> Result<C64>,
    {
        let mut acc = C64::new(0.0, 0.0);
        for (w, mu) in self.fiber(z)? {
            let pt = CoverPoint {
                base: *z,
                fiber: w,
                mult: OnceLock::new(),
            };
            acc += f(&pt)? * (mu as f64);
        }
        Ok(acc)
    }

    /// Continue the fiber root nearest to `w_from` along the straight base
    /// path from `z_from` to `z_to`.
    pub fn continue_root(
        &self,
        z_from: &BasePt,
        w_from: C64,
        z_to: &BasePt,
        steps: usize,
    ) -> Result<C64> {
        let mut w = w_from;
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let z = z_from.lerp(z_to, t);
            let roots = self.fiber_raw(&z)?;
            w = nearest_root(&roots, w)?;
        }
        Ok(w)
    }

    /// Fiber roots at `z` lying on branches through `a`, obtained by radial
    /// continuation from p(a). When nu_p(a) equals the degree all sheets pass
    /// through `a` and the full fiber is returned.
    pub fn branch_roots(&self, a: &CoverPoint, z: &BasePt) -> Result<Vec<C64>> {
        let nu = a.multiplicity(self)? as usize;
        if nu == self.degree {
            let mut out = Vec::with_capacity(self.degree);
            for (w, mu) in self.fiber(z)? {
                for _ in 0..mu {
                    out.push(w);
                }
            }
            return Ok(out);
        }
        // Identify the nu roots converging to a.fiber just off the center.
        let t1 = 0.02;
        let z1 = a.base.lerp(z, t1);
        let mut roots1 = self.fiber_raw(&z1)?;
        roots1.sort_by(|p, q| {
            (p - a.fiber)
                .norm()
                .partial_cmp(&(q - a.fiber).norm())
                .unwrap()
        });
        if roots1.len() < nu {
            return Err(Error::AmbiguousCluster);
        }
        let mut out = Vec::with_capacity(nu);
        for w1 in roots1.into_iter().take(nu) {
            let mut w = w1;
            let steps = 12;
            for s in 1..=steps {
                let t = t1 + (1.0 - t1) * s as f64 / steps as f64;
                let zt = a.base.lerp(z, t);
                let roots = self.fiber_raw(&zt)?;
                w = nearest_root(&roots, w)?;
            }
            out.push(w);
        }
        Ok(out)
    }
}

fn eval_monic(coeffs: &[C64], w: C64) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for c in coeffs.iter().rev() {
        v = v * w + c;
    }
    v
}

fn min_separation(roots: &[C64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            sep = sep.min((roots[i] - roots[j]).norm());
        }
    }
    sep
}

fn nearest_root(roots: &[C64], w: C64) -> Result<C64> {
    let scale = 1.0 + w.norm();
    let mut best = C64::new(f64::NAN, f64::NAN);
    let mut d1 = f64::INFINITY;
    let mut d2 = f64::INFINITY;
    for r in roots {
        let d = (r - w).norm();
        if d < d1 {
            d2 = d1;
            d1 = d;
            best = *r;
        } else if d < d2 {
            d2 = d;
        }
    }
    if roots.len() > 1 && d2 - d1 < 1e-7 * scale {
        return Err(Error::BranchJump(format!(
            "two candidate roots within {:.1e} of each other",
            d2 - d1
        )));
    }
    Ok(best)
}

/// Roots of the monic polynomial w^k + sum coeffs[i] w^i.
///
/// Durand-Kerner simultaneous iteration (cap 200, tol 1e-12) seeded on a
/// perturbed circle, with Hessenberg-QR companion eigenvalues as fallback.
pub fn solve_monic(coeffs: &[C64]) -> Result<Vec<C64>> {
    let k = coeffs.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![-coeffs[0]]);
    }
    for rot in [0.7f64, 1.9, 3.1] {
        if let Some(roots) = durand_kerner(coeffs, rot) {
            return Ok(roots);
        }
    }
    companion_eigenvalues(coeffs)
}

fn durand_kerner(coeffs: &[C64], rot: f64) -> Option<Vec<C64>> {
    let k = coeffs.len();
    let bound = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut w: Vec<C64> = (0..k)
        .map(|j| C64::from_polar(bound, rot + 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let tol = 1e-12;
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..k {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..k {
                if j != i {
                    denom *= w[i] - w[j];
                }
            }
            if denom.norm() == 0.0 {
                return None;
            }
            let step = eval_monic(coeffs, w[i]) / denom;
            w[i] -= step;
            max_step = max_step.max(step.norm());
        }
        let scale = 1.0 + w.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if max_step < tol * scale {
            return Some(w);
        }
    }
    None
}

/// Eigenvalues of the companion matrix via shifted Hessenberg QR.
pub fn companion_eigenvalues(coeffs: &[C64]) -> Result<Vec<C64>> {
    let k = coeffs.len();
    let mut h = vec![vec![C64::new(0.0, 0.0); k]; k];
    for i in 1..k {
        h[i][i - 1] = C64::new(1.0, 0.0);
    }
    for i in 0..k {
        h[i][k - 1] = -coeffs[i];
    }
    let mut eigs = Vec::with_capacity(k);
    let mut n = k;
    let mut iter = 0usize;
    while n > 0 {
        if n == 1 {
            eigs.push(h[0][0]);
            break;
        }
        // Deflate when a subdiagonal entry is negligible.
        let mut deflated = false;
        for i in (1..n).rev() {
            let s = h[i - 1][i - 1].norm() + h[i][i].norm();
            if h[i][i - 1].norm() < 1e-14 * (1.0 + s) {
                if i == n - 1 {
                    eigs.push(h[n - 1][n - 1]);
                    n -= 1;
                } else {
                    // Split: solve the trailing block separately. Rare for
                    // companion matrices; fall through with a shift instead.
                }
                deflated = i == n;
                break;
            }
        }
        if deflated {
            continue;
        }
        iter += 1;
        if iter > 200 * k {
            return Err(Error::SolverDivergence);
        }
        // Wilkinson shift from the trailing 2x2 block.
        let a = h[n - 2][n - 2];
        let b = h[n - 2][n - 1];
        let c = h[n - 1][n - 2];
        let d = h[n - 1][n - 1];
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - det * 4.0).sqrt();
        let mu1 = (tr + disc) * 0.5;
        let mu2 = (tr - disc) * 0.5;
        let mu = if (mu1 - d).norm() < (mu2 - d).norm() {
            mu1
        } else {
            mu2
        };
        // Implicit single-shift QR sweep with Givens rotations.
        for i in 0..n {
            h[i][i] -= mu;
        }
        let mut rots = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let x = h[i][i];
            let y = h[i + 1][i];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else {
                (x.conj() / r, y.conj() / r)
            };
            for col in i..n {
                let hi = h[i][col];
                let hj = h[i + 1][col];
                h[i][col] = cs * hi + sn * hj;
                h[i + 1][col] = -sn.conj() * hi + cs.conj() * hj;
            }
            rots.push((cs, sn));
        }
        for (i, (cs, sn)) in rots.iter().enumerate() {
            let hi_max = (i + 2).min(n - 1);
            for row in 0..=hi_max {
                let hi = h[row][i];
                let hj = h[row][i + 1];
                h[row][i] = hi * cs.conj() + hj * sn.conj();
                h[row][i + 1] = -hi * *sn + hj * *cs;
            }
        }
        for i in 0..n {
            h[i][i] += mu;
        }
    }
    Ok(eigs)
}

/// Cluster roots by relative distance 1e-6 and return (centroid, count)
/// pairs in deterministic lexicographic (Re, Im) order.
pub fn cluster_roots(roots: &[C64]) -> Vec<(C64, u32)> {
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let thr = 1e-6 * scale;
    let mut used = vec![false; roots.len()];
    let mut clusters: Vec<(C64, u32)> = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        // Chain-grow the cluster.
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                if members.iter().any(|&mi| (roots[mi] - roots[j]).norm() < thr) {
                    members.push(j);
                    used[j] = true;
                    grew = true;
                }
            }
        }
        let mut centroid = C64::new(0.0, 0.0);
        for &mi in &members {
            centroid += roots[mi];
        }
        centroid /= members.len() as f64;
        clusters.push((centroid, members.len() as u32));
    }
    clusters.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    clusters
}
