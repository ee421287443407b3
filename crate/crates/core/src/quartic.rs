//! Real-root machinery for polynomials of degree at most four.
//!
//! Roots come from the eigenvalues of a scaled companion matrix. Nearby
//! eigenvalues are then grouped into clusters whose admissible spread grows
//! with the multiplicity (a root of multiplicity `m` is only determined to
//! about `eps^(1/m)` by its coefficients), each cluster is checked against
//! the vanishing of the lower derivatives, and the surviving root is polished
//! by Newton's method on the `(m-1)`-th derivative, where it is simple.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leading coefficient below this fraction of the others is treated as zero.
pub const DEGENERACY_REL: f64 = 1e-12;

/// Relative rounding level assumed for coefficients handed to the solver.
const COEFF_NOISE: f64 = 64.0 * f64::EPSILON;

/// Lower derivatives of a multiple root must vanish to this relative level.
const MULTIPLICITY_CHECK: f64 = 1e-9;

/// `a·t⁴ + b·t³ + c·t² + d·t + e`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl Quartic {
    pub const fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        Quartic { a, b, c, d, e }
    }

    pub fn from_coeffs(c: [f64; 5]) -> Self {
        Quartic::new(c[0], c[1], c[2], c[3], c[4])
    }

    /// Coefficients, leading first.
    pub fn coeffs(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, k: f64) -> Quartic {
        let c = self.coeffs();
        Quartic::from_coeffs([c[0] * k, c[1] * k, c[2] * k, c[3] * k, c[4] * k])
    }

    /// `t⁴·P(1/t)`: roots are inverted, multiplicities kept.
    pub fn reversed(&self) -> Quartic {
        Quartic::new(self.e, self.d, self.c, self.b, self.a)
    }

    pub fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs(), t)
    }

    /// `[P, P', P'', P''']` at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        let Quartic { a, b, c, d, e } = *self;
        [
            (((a * t + b) * t + c) * t + d) * t + e,
            ((4.0 * a * t + 3.0 * b) * t + 2.0 * c) * t + d,
            (12.0 * a * t + 6.0 * b) * t + 2.0 * c,
            24.0 * a * t + 6.0 * b,
        ]
    }
}

/// Exact Horner evaluation of `P, P', P'', P'''` at `t`.
pub fn derivative_values(p: &Quartic, t: f64) -> (f64, f64, f64, f64) {
    let [v0, v1, v2, v3] = p.derivatives(t);
    (v0, v1, v2, v3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Sorted ascending.
    pub roots: Vec<RealRoot>,
    /// Roots pushed to infinity by a vanishing leading coefficient.
    pub degree_at_infinity: usize,
}

impl RootSet {
    pub fn distinct(&self) -> usize {
        self.roots.len()
    }

    /// Real roots counted with multiplicity, including those at infinity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum::<usize>() + self.degree_at_infinity
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().map(|r| r.value)
    }
}

/// All real roots of `p`, with multiplicities.
///
/// Roots closer than `cluster_tol·(1 + |t|)` are reported as one root. A
/// leading coefficient below [`DEGENERACY_REL`] relative to the rest is
/// dropped and counted in `degree_at_infinity`.
pub fn real_roots(p: &Quartic, cluster_tol: f64) -> Result<RootSet> {
    if !p.is_finite() {
        return Err(Error::NonFinite);
    }
    let coeffs = p.coeffs();
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::DegenerateQuartic);
    }

    let mut start = 0;
    let mut degree_at_infinity = 0;
    while start < 4 {
        let rest = coeffs[start + 1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if rest > 0.0 && coeffs[start].abs() < DEGENERACY_REL * rest {
            degree_at_infinity += 1;
            start += 1;
        } else {
            break;
        }
    }
    let poly = &coeffs[start..];

    let mut roots = Vec::new();
    if poly.len() > 1 {
        let eig = complex_roots(poly)?;
        for cluster in cluster_roots(poly, &eig, cluster_tol) {
            if let Some(root) = cluster.into_real(poly, cluster_tol) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    // Polishing may pull two clusters onto the same value.
    let mut merged: Vec<RealRoot> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.value - last.value).abs() <= cluster_tol * (1.0 + r.value.abs()) => {
                last.multiplicity += r.multiplicity;
            }
            _ => merged.push(r),
        }
    }
    Ok(RootSet { roots: merged, degree_at_infinity })
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().fold(0.0, |acc, &k| acc * t + k)
}

fn horner_c(c: &[f64], t: Complex<f64>) -> Complex<f64> {
    c.iter().fold(Complex::new(0.0, 0.0), |acc, &k| acc * t + k)
}

/// Coefficients of the `k`-th derivative (leading first).
fn derivative_coeffs(c: &[f64], k: usize) -> Vec<f64> {
    let n = c.len() - 1;
    if k > n {
        return vec![0.0];
    }
    (0..=n - k)
        .map(|i| {
            let power = n - i;
            let falling: f64 = (0..k).map(|j| (power - j) as f64).product();
            c[i] * falling
        })
        .collect()
}

/// Magnitude scale of the terms summed when evaluating the `k`-th derivative.
fn term_scale(c: &[f64], k: usize, t: f64) -> f64 {
    let d = derivative_coeffs(c, k);
    horner(&d.iter().map(|x| x.abs()).collect::<Vec<_>>(), t.abs())
}

/// Root magnitude bound `max |c_i / c_0|^(1/i)` used to balance the companion matrix.
fn balance_scale(c: &[f64]) -> f64 {
    c[1..].iter().enumerate().map(|(i, q)| (q / c[0]).abs().powf(1.0 / (i + 1) as f64)).fold(0.0f64, f64::max)
}

fn complex_roots(c: &[f64]) -> Result<Vec<Complex<f64>>> {
    let n = c.len() - 1;
    let lead = c[0];
    let monic: Vec<f64> = c[1..].iter().map(|x| x / lead).collect();
    if n == 1 {
        return Ok(vec![Complex::new(-monic[0], 0.0)]);
    }
    // t = sigma·s balances the companion matrix for roots far from unit size.
    let sigma = balance_scale(c);
    if sigma == 0.0 {
        return Ok(vec![Complex::new(0.0, 0.0); n]);
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, q) in monic.iter().enumerate() {
        m[(0, i)] = -q / sigma.powi(i as i32 + 1);
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 2000).ok_or(Error::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z * sigma).collect())
}

#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<Complex<f64>>,
}

impl Cluster {
    fn center(&self) -> Complex<f64> {
        self.members.iter().sum::<Complex<f64>>() / self.members.len() as f64
    }

    fn spread(&self) -> f64 {
        let c = self.center();
        self.members.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
    }

    fn into_real(self, poly: &[f64], cluster_tol: f64) -> Option<RealRoot> {
        let m = self.members.len();
        let c = self.center();
        let allowed = merge_radius(poly, c, m, cluster_tol).max(self.spread());
        if c.im.abs() > allowed {
            return None;
        }
        Some(RealRoot { value: polish(poly, c.re, m, allowed), multiplicity: m })
    }
}

/// Largest spread a cluster of `m` eigenvalues around `center` may have and
/// still be one root of multiplicity `m`.
fn merge_radius(poly: &[f64], center: Complex<f64>, m: usize, cluster_tol: f64) -> f64 {
    let r = center.norm();
    let floor = cluster_tol * (1.0 + r);
    if m < 2 {
        return floor;
    }
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    let dm = horner_c(&derivative_coeffs(poly, m), center).norm() / factorial;
    // Eigenvalue noise follows the coefficient sizes at the balancing scale,
    // which dominate near the origin.
    let n = poly.len() - 1;
    let s0 = term_scale(poly, 0, r).max(poly[0].abs() * balance_scale(poly).powi(n as i32));
    let ceiling = 1e-2 * (1.0 + r);
    if dm == 0.0 {
        return ceiling;
    }
    let spread = 4.0 * (COEFF_NOISE * s0 / dm).powf(1.0 / m as f64);
    spread.max(floor).min(ceiling.max(floor))
}

fn multiplicity_holds(poly: &[f64], t: f64, m: usize) -> bool {
    (0..m).all(|k| {
        let v = horner(&derivative_coeffs(poly, k), t).abs();
        v <= MULTIPLICITY_CHECK * term_scale(poly, k, t).max(f64::MIN_POSITIVE)
    })
}

fn cluster_roots(poly: &[f64], eig: &[Complex<f64>], cluster_tol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = eig.iter().map(|&z| Cluster { members: vec![z] }).collect();
    loop {
        let mut pairs = Vec::new();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                pairs.push(((clusters[i].center() - clusters[j].center()).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged = false;
        for (_, i, j) in pairs {
            let mut members = clusters[i].members.clone();
            members.extend_from_slice(&clusters[j].members);
            let candidate = Cluster { members };
            let c = candidate.center();
            let m = candidate.members.len();
            if candidate.spread() > merge_radius(poly, c, m, cluster_tol) {
                continue;
            }
            // A merged cluster must behave like a genuine multiple root.
            let real_like = c.im.abs() <= merge_radius(poly, c, m, cluster_tol);
            if real_like {
                let t = polish(poly, c.re, m, candidate.spread().max(cluster_tol));
                if !multiplicity_holds(poly, t, m) {
                    continue;
                }
            }
            clusters[i] = candidate;
            clusters.remove(j);
            merged = true;
            break;
        }
        if !merged {
            return clusters;
        }
    }
}

/// Newton on the `(m-1)`-th derivative, in `1/t` when `|t| > 1`. Falls back
/// to the starting value if the iteration wanders beyond `radius`.
fn polish(poly: &[f64], t0: f64, m: usize, radius: f64) -> f64 {
    let target = derivative_coeffs(poly, m - 1);
    if target.len() < 2 {
        return t0;
    }
    let invert = t0.abs() > 1.0;
    let f: Vec<f64> = if invert {
        // u^deg · f(1/u)
        target.iter().rev().copied().collect()
    } else {
        target
    };
    let df = derivative_coeffs(&f, 1);
    let mut x = if invert { 1.0 / t0 } else { t0 };
    let x0 = x;
    let mut best = (horner(&f, x).abs(), x);
    for _ in 0..12 {
        let slope = horner(&df, x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - horner(&f, x) / slope;
        if !next.is_finite() {
            break;
        }
        x = next;
        let r = horner(&f, x).abs();
        if r < best.0 {
            best = (r, x);
        }
        if r == 0.0 {
            break;
        }
    }
    let x = best.1;
    let t = if invert { 1.0 / x } else { x };
    let allowed = 10.0 * radius.max(1e-12) * (1.0 + t0.abs());
    if (t - t0).abs() <= allowed && t.is_finite() {
        t
    } else if invert {
        1.0 / x0
    } else {
        x0
    }
}

/// A one-parameter (or multi-parameter) family of quartics `P_s(t)`.
pub trait QuarticFamily {
    fn quartic(&self, params: &[f64]) -> Quartic;
}

impl<F> QuarticFamily for F
where
    F: Fn(&[f64]) -> Quartic,
{
    fn quartic(&self, params: &[f64]) -> Quartic {
        self(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleRootSeed {
    pub t: f64,
    pub params: Vec<f64>,
    /// Accepted solutions stay within this distance of `params`.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleRootOptions {
    pub eps_triple: f64,
    pub eps_nondeg: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Divide the family by its largest coefficient at the seed. Disable when
    /// the family is already expressed in a fixed scale.
    pub normalize: bool,
}

impl Default for TripleRootOptions {
    fn default() -> Self {
        TripleRootOptions { eps_triple: 1e-10, eps_nondeg: 1e-6, max_iter: 100, fd_step: 1e-7, normalize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRoot {
    /// Infinite when the triple root sits at `t = ∞`.
    pub t: f64,
    pub params: Vec<f64>,
    /// `|P|, |P'|, |P''|` in the scale the refinement worked in.
    pub residuals: [f64; 3],
    pub third_derivative: f64,
    pub iterations: usize,
}

/// Solves `P = P' = P'' = 0` for `(t, params)` near `seed` by damped
/// Gauss-Newton and certifies the result with `|P'''| > eps_nondeg`.
pub fn triple_root_refine<F: QuarticFamily + ?Sized>(
    family: &F,
    seed: &TripleRootSeed,
    opts: &TripleRootOptions,
) -> Option<TripleRoot> {
    let invert = seed.t.abs() > 1.0;
    let scale = if opts.normalize {
        let s = family.quartic(&seed.params).max_abs();
        if s > 0.0 && s.is_finite() {
            1.0 / s
        } else {
            return None;
        }
    } else {
        1.0
    };
    let eval = |params: &[f64]| -> Quartic {
        let q = family.quartic(params).scaled(scale);
        if invert {
            q.reversed()
        } else {
            q
        }
    };
    let residual = |x: &DVector<f64>| -> [f64; 4] { eval(&x.as_slice()[1..]).derivatives(x[0]) };

    let n = seed.params.len() + 1;
    let mut x = DVector::zeros(n);
    x[0] = if invert { 1.0 / seed.t } else { seed.t };
    for (i, p) in seed.params.iter().enumerate() {
        x[i + 1] = *p;
    }
    let norm2 = |r: &[f64; 4]| r[0] * r[0] + r[1] * r[1] + r[2] * r[2];

    let mut r = residual(&x);
    let mut cost = norm2(&r);
    let mut mu = 1e-6;
    let max_step = 0.1 * seed.radius.max(1e-6);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        if r[..3].iter().all(|v| v.abs() < 1e-3 * opts.eps_triple) {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(3, n);
        jac[(0, 0)] = r[1];
        jac[(1, 0)] = r[2];
        jac[(2, 0)] = r[3];
        for k in 1..n {
            let h = opts.fd_step * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let rp = residual(&xp);
            let rm = residual(&xm);
            for row in 0..3 {
                jac[(row, k)] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let rv = DVector::from_column_slice(&r[..3]);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            let diag_max = (0..n).fold(1e-300f64, |a, d| a.max(jtj[(d, d)]));
            for d in 0..n {
                lhs[(d, d)] += mu * diag_max;
            }
            let Some(mut step) = lhs.lu().solve(&(-&jtr)) else {
                mu *= 10.0;
                continue;
            };
            let len = step.norm();
            if len > max_step {
                step *= max_step / len;
            }
            let cand = &x + &step;
            let rc = residual(&cand);
            let cc = norm2(&rc);
            if cc.is_finite() && cc < cost {
                let small = step.norm() <= 1e-15 * (1.0 + x.norm());
                x = cand;
                r = rc;
                cost = cc;
                mu = (mu * 0.3).max(1e-12);
                improved = !small;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }

    let params: Vec<f64> = x.as_slice()[1..].to_vec();
    let drift = params.iter().zip(&seed.params).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if drift > seed.radius {
        return None;
    }
    let residuals = [r[0].abs(), r[1].abs(), r[2].abs()];
    let small = residuals.iter().all(|v| *v < opts.eps_triple);
    // NaN fails both comparisons and is rejected.
    if !small || r[3].abs().partial_cmp(&opts.eps_nondeg) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let t = if invert {
        if x[0] == 0.0 {
            f64::INFINITY
        } else {
            1.0 / x[0]
        }
    } else {
        x[0]
    };
    Some(TripleRoot { t, params, residuals, third_derivative: r[3].abs(), iterations })
}
