//! Gauss–Legendre quadrature with node doubling.
//!
//! Half-line integrals are mapped onto `[0, 1)` first, either by the
//! algebraic map `u = r²/(ℓ² + r²)` or by `r = ℓ·tan(πu/2)`. Every sum is a
//! fixed-order pairwise reduction, so a given scheme produces bit-identical
//! results from run to run.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `[0, ∞)` is folded onto `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compactification {
    /// `u = r²/(ℓ² + r²)`; turns the algebraic tails `r⁻ᵏ` met here into
    /// polynomials in `u`. Suited to dimension ≥ 2, where the `r^{n-1}`
    /// measure removes the `u^{-1/2}` endpoint factor.
    AlgebraicMap,
    /// `r = ℓ·tan(πu/2)`; smooth at both ends for rapidly decaying tails.
    TangentMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub radial_nodes: usize,
    /// Nodes per angular coordinate for the non-reduced product rule.
    pub angular_nodes: usize,
    pub rel_tol: f64,
    /// Absolute floor used by the convergence test when the integral is 0.
    pub abs_tol: f64,
    pub max_doublings: u32,
    pub compactification: Compactification,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            angular_nodes: 12,
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_doublings: 9,
            compactification: Compactification::AlgebraicMap,
        }
    }
}

impl QuadratureScheme {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_radial_nodes(mut self, n: usize) -> Self {
        self.radial_nodes = n;
        self
    }

    pub fn with_angular_nodes(mut self, n: usize) -> Self {
        self.angular_nodes = n;
        self
    }

    pub fn with_compactification(mut self, c: Compactification) -> Self {
        self.compactification = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes == 0 || self.angular_nodes == 0 {
            return Err(Error::InvalidArgument("node counts must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidArgument("abs_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Outcome of an adaptive scalar integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Change under the last node doubling.
    pub err: f64,
    pub converged: bool,
    pub nodes: usize,
}

impl Estimate {
    /// Turns an unconverged estimate into [`Error::NonConvergence`].
    pub fn require_converged(self, rel_tol: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                rel_tol,
                nodes: self.nodes,
                change: self.err,
            })
        }
    }
}

/// Outcome of an adaptive vector-valued integral.
#[derive(Debug, Clone, PartialEq)]
pub struct VecEstimate {
    pub values: Vec<f64>,
    pub errs: Vec<f64>,
    pub converged: bool,
    pub nodes: usize,
}

impl VecEstimate {
    pub fn component(&self, k: usize) -> Estimate {
        Estimate {
            value: self.values[k],
            err: self.errs[k],
            converged: self.converged,
            nodes: self.nodes,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let k = i as f64 + 1.0;
            let theta = PI * (k - 0.25) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1e-300) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached `n`-point rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(GaussLegendre::compute(n));
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Fixed-tree pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// A map from the reference interval `[-1, 1]` to the integration variable,
/// returning the point and the Jacobian.
trait NodeMap: Fn(f64) -> (f64, f64) {}
impl<T: Fn(f64) -> (f64, f64)> NodeMap for T {}

fn apply_rule<M, F>(n: usize, map: &M, f: &F, dim: usize) -> Result<Vec<f64>>
where
    M: NodeMap,
    F: Fn(f64, &mut [f64]),
{
    let rule = gauss_legendre(n);
    let mut terms = vec![vec![0.0; n]; dim];
    let mut buf = vec![0.0; dim];
    for (k, (&xi, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let (x, jac) = map(xi);
        if jac == 0.0 {
            continue;
        }
        buf.iter_mut().for_each(|b| *b = 0.0);
        f(x, &mut buf);
        for (c, &v) in buf.iter().enumerate() {
            let term = w * jac * v;
            if !term.is_finite() {
                return Err(Error::NonFiniteIntegrand {
                    location: format!("x = {x:e}"),
                });
            }
            terms[c][k] = term;
        }
    }
    Ok(terms.iter().map(|t| pairwise_sum(t)).collect())
}

fn doubling<M, F>(scheme: &QuadratureScheme, map: M, f: F, dim: usize) -> Result<VecEstimate>
where
    M: NodeMap,
    F: Fn(f64, &mut [f64]),
{
    scheme.validate()?;
    let mut n = scheme.radial_nodes;
    let mut prev = apply_rule(n, &map, &f, dim)?;
    let mut errs = vec![f64::INFINITY; dim];
    for _ in 0..scheme.max_doublings {
        n *= 2;
        let cur = apply_rule(n, &map, &f, dim)?;
        let scale = cur.iter().fold(scheme.abs_tol, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        for c in 0..dim {
            let change = (cur[c] - prev[c]).abs();
            errs[c] = change + 4.0 * f64::EPSILON * cur[c].abs();
            worst = worst.max(change);
        }
        prev = cur;
        if worst <= scheme.rel_tol * scale {
            return Ok(VecEstimate {
                values: prev,
                errs,
                converged: true,
                nodes: n,
            });
        }
    }
    Ok(VecEstimate {
        values: prev,
        errs,
        converged: false,
        nodes: n,
    })
}

/// `∫_a^b f` for a vector of integrands sharing node evaluations.
pub fn integrate_interval_vec<F>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    scheme: &QuadratureScheme,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("interval endpoints must be finite".into()));
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    doubling(scheme, move |xi: f64| (mid + half * xi, half), f, dim)
}

pub fn integrate_interval<F>(f: F, a: f64, b: f64, scheme: &QuadratureScheme) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_interval_vec(|x, out| out[0] = f(x), a, b, 1, scheme).map(|e| e.component(0))
}

/// `∫_0^∞ f(r) dr` for a vector of integrands, compactified with length
/// scale `scale`.
pub fn integrate_half_line_vec<F>(
    f: F,
    scale: f64,
    dim: usize,
    scheme: &QuadratureScheme,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]),
{
    integrate_half_line_upto_vec(f, scale, 1.0, dim, scheme)
}

pub fn integrate_half_line<F>(f: F, scale: f64, scheme: &QuadratureScheme) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_half_line_vec(|r, out| out[0] = f(r), scale, 1, scheme).map(|e| e.component(0))
}

/// Compactified radius and Jacobian `dr/du` at `u ∈ [0, 1)`.
pub fn compactify(c: Compactification, scale: f64, u: f64) -> (f64, f64) {
    match c {
        Compactification::AlgebraicMap => {
            let q = 1.0 - u;
            let r = scale * (u / q).sqrt();
            let jac = if u > 0.0 {
                scale / (2.0 * u.sqrt() * q * q.sqrt())
            } else {
                0.0
            };
            (r, jac)
        }
        Compactification::TangentMap => {
            let a = 0.5 * PI * u;
            let c = a.cos();
            (scale * a.tan(), scale * 0.5 * PI / (c * c))
        }
    }
}

/// Inverse of [`compactify`]: the `u` at which the map reaches radius `r`.
pub fn decompactify(c: Compactification, scale: f64, r: f64) -> f64 {
    match c {
        Compactification::AlgebraicMap => {
            let q = (r / scale).powi(2);
            q / (1.0 + q)
        }
        Compactification::TangentMap => (r / scale).atan() * 2.0 / PI,
    }
}

/// `∫_0^R f(r) dr` through the compactified variable, where `R` is the
/// radius reached at `u = u_max`. With `u_max = 1` this is the full half
/// line.
pub fn integrate_half_line_upto_vec<F>(
    f: F,
    scale: f64,
    u_max: f64,
    dim: usize,
    scheme: &QuadratureScheme,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]),
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "compactification scale must be positive, got {scale}"
        )));
    }
    let c = scheme.compactification;
    let half = 0.5 * u_max;
    doubling(
        scheme,
        move |xi: f64| {
            let u = half * (xi + 1.0);
            let (r, jac) = compactify(c, scale, u);
            (r, jac * half)
        },
        f,
        dim,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        // degree 9 is the limit for 5 points
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert_relative_eq!(s, 2.0 / 9.0, max_relative = 1e-14);
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn large_rules_are_accurate() {
        let rule = gauss_legendre(1024);
        let s = pairwise_sum(
            &rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * (3.0 * x).cos())
                .collect::<Vec<_>>(),
        );
        assert_relative_eq!(s, 2.0 * 3f64.sin() / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn half_line_algebraic_tail() {
        let scheme = QuadratureScheme::default();
        // ∫ r³/(1+r²)⁴ dr = 1/12
        let e = integrate_half_line(|r| r.powi(3) / (1.0 + r * r).powi(4), 1.0, &scheme).unwrap();
        assert!(e.converged);
        assert_relative_eq!(e.value, 1.0 / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn half_line_tangent_gaussian() {
        let scheme = QuadratureScheme::default().with_compactification(Compactification::TangentMap);
        let e = integrate_half_line(|r| (-r * r).exp(), 1.0, &scheme).unwrap();
        assert_relative_eq!(e.value, PI.sqrt() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn unconverged_is_flagged() {
        let scheme = QuadratureScheme {
            radial_nodes: 8,
            max_doublings: 1,
            rel_tol: 1e-14,
            ..QuadratureScheme::default()
        };
        let e = integrate_interval(|x: f64| x.abs().sqrt(), -1.0, 1.0, &scheme).unwrap();
        assert!(!e.converged);
        assert!(matches!(
            e.require_converged(1e-14),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn non_finite_values_are_errors() {
        let scheme = QuadratureScheme::default();
        let r = integrate_interval(|_| f64::NAN, 0.0, 1.0, &scheme);
        assert!(matches!(r, Err(Error::NonFiniteIntegrand { .. })));
    }

    #[test]
    fn compactify_round_trip() {
        for c in [Compactification::AlgebraicMap, Compactification::TangentMap] {
            let (r, _) = compactify(c, 2.0, 0.3);
            assert_relative_eq!(decompactify(c, 2.0, r), 0.3, max_relative = 1e-14);
        }
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs));
        assert_relative_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), max_relative = 1e-14);
    }
}
