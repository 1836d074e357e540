//! Pullback information metric of a parametrized family of positive
//! densities.
//!
//! For a family `θ ↦ e(θ, ·)` on a measured domain the metric is
//!
//! ```text
//! g_ij(θ) = ∫ (∂_i e / e)(∂_j e / e) e · w(x) dx
//! ```
//!
//! Integrals are taken in polar coordinates about a family-supplied center.
//! When the domain is flagged `radial_reducible` the integrand restricted to
//! each sphere is a polynomial of degree ≤ 3 in the direction, and the
//! `2n` cross-polytope points `±e_k` integrate it exactly; the remaining
//! radial integral goes through [`crate::quadrature`]. A full angular
//! product rule is available as a cross-check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_half_line_vec, pairwise_sum, QuadratureScheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Open(f64),
    Closed(f64),
    Unbounded,
}

impl Bound {
    fn admits_above(self, x: f64) -> bool {
        match self {
            Bound::Open(b) => x > b,
            Bound::Closed(b) => x >= b,
            Bound::Unbounded => true,
        }
    }

    fn admits_below(self, x: f64) -> bool {
        match self {
            Bound::Open(b) => x < b,
            Bound::Closed(b) => x <= b,
            Bound::Unbounded => true,
        }
    }
}

/// Axis-aligned box of admissible parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

impl ParamBox {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![Bound::Unbounded; dim],
            upper: vec![Bound::Unbounded; dim],
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.lower.len()
            && theta.iter().all(|x| x.is_finite())
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| lo.admits_above(x) && hi.admits_below(x))
    }

    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!("theta = {theta:?} outside {self:?}")))
        }
    }
}

/// Volume weight multiplying the flat measure `dⁿx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Unit,
    /// `D⁻³` with `D = 1 + |x|²`: the Fubini–Study volume in an affine chart
    /// of ℂP², with ℂ² ≅ ℝ⁴.
    FubiniStudyChart,
}

impl Weight {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::FubiniStudyChart => {
                let d = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                d.powi(-3)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub dim: usize,
    pub weight: Weight,
    pub radial_reducible: bool,
}

impl Domain {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(dim, Weight::Unit, false)
    }

    pub fn new(dim: usize, weight: Weight, radial_reducible: bool) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "domain dimension must be 1..=4, got {dim}"
            )));
        }
        if weight == Weight::FubiniStudyChart && dim != 4 {
            return Err(Error::InvalidArgument(
                "the Fubini–Study chart weight needs a 4-dimensional domain".into(),
            ));
        }
        Ok(Self {
            dim,
            weight,
            radial_reducible,
        })
    }

    pub fn reducible(mut self) -> Self {
        self.radial_reducible = true;
        self
    }
}

/// A parametrized family of strictly positive densities.
///
/// Implementors provide the density and, where available, the score
/// `∂_i log e` or the derivative `∂_i e`. Missing derivatives fall back to
/// [`score_fd`].
pub trait DensityFamily {
    fn param_dim(&self) -> usize;

    fn domain(&self) -> Domain;

    fn param_box(&self) -> ParamBox;

    fn density(&self, theta: &[f64], x: &[f64]) -> f64;

    fn score(&self, _theta: &[f64], _x: &[f64], _i: usize) -> Option<f64> {
        None
    }

    fn deriv(&self, _theta: &[f64], _x: &[f64], _i: usize) -> Option<f64> {
        None
    }

    /// Origin of the polar coordinates used for integration.
    fn center(&self, _theta: &[f64]) -> Vec<f64> {
        vec![0.0; self.domain().dim]
    }

    /// Length scale handed to the half-line compactification.
    fn length_scale(&self, _theta: &[f64]) -> f64 {
        1.0
    }
}

/// Symmetric matrix of information inner products with per-entry errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub err: DMatrix<f64>,
    pub theta: Vec<f64>,
    pub converged: bool,
    pub nodes: usize,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().fold(0.0_f64, |m, &e| m.max(e))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Positive semidefinite up to the quadrature error.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -self.max_err()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn err_rows(&self) -> Vec<Vec<f64>> {
        self.err.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Fails with [`Error::NonConvergence`] if the doubling limit was hit.
    pub fn require_converged(self, rel_tol: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                rel_tol,
                nodes: self.nodes,
                change: self.max_err(),
            })
        }
    }
}

/// Angular integration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularMode {
    /// Cross-polytope rule, exact for integrands of degree ≤ 3 in the
    /// direction.
    Reduced,
    /// Hyperspherical product rule with `angular_nodes` per coordinate.
    Product,
}

/// Area of the unit sphere `S^{n-1} ⊂ ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => unreachable!("dimension checked by Domain"),
    }
}

/// Directions and weights on `S^{n-1}`, weights summing to the sphere area.
#[derive(Debug, Clone)]
pub struct AngularRule {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl AngularRule {
    pub fn cross_polytope(n: usize) -> Self {
        let w = sphere_area(n) / (2 * n) as f64;
        let mut directions = Vec::with_capacity(2 * n);
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[k] = sign;
                directions.push(e);
            }
        }
        Self {
            weights: vec![w; 2 * n],
            directions,
        }
    }

    pub fn product(n: usize, m: usize) -> Self {
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        let azimuth = |count: usize| {
            (0..count)
                .map(move |k| {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                    (phi.cos(), phi.sin(), 2.0 * PI / count as f64)
                })
                .collect::<Vec<_>>()
        };
        match n {
            1 => return Self::cross_polytope(1),
            2 => {
                for (c, s, w) in azimuth(2 * m) {
                    directions.push(vec![c, s]);
                    weights.push(w);
                }
            }
            3 => {
                let gl = gauss_legendre(m);
                for (&ct, &wt) in gl.nodes.iter().zip(&gl.weights) {
                    let st = (1.0 - ct * ct).sqrt();
                    for (c, s, w) in azimuth(2 * m) {
                        directions.push(vec![ct, st * c, st * s]);
                        weights.push(wt * w);
                    }
                }
            }
            4 => {
                let gl = gauss_legendre(m);
                // cos χ at Chebyshev points of the second kind, which
                // integrate sin²χ dχ exactly against polynomials in cos χ
                for k in 1..=m {
                    let a = k as f64 * PI / (m + 1) as f64;
                    let (sx, cx) = a.sin_cos();
                    let wchi = PI / (m + 1) as f64 * sx * sx;
                    for (&ct, &wt) in gl.nodes.iter().zip(&gl.weights) {
                        let st = (1.0 - ct * ct).sqrt();
                        for (c, s, w) in azimuth(2 * m) {
                            directions.push(vec![cx, sx * ct, sx * st * c, sx * st * s]);
                            weights.push(wchi * wt * w);
                        }
                    }
                }
            }
            _ => unreachable!("dimension checked by Domain"),
        }
        Self { directions, weights }
    }
}

/// `∫ f(x) w(x) dⁿx` for a vector of integrands, in polar coordinates about
/// `center`. `f` writes its values into the output slice and may fail.
pub fn integrate_polar<F>(
    domain: &Domain,
    center: &[f64],
    scale: f64,
    dim_out: usize,
    mode: AngularMode,
    scheme: &QuadratureScheme,
    f: F,
) -> Result<crate::quadrature::VecEstimate>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    let n = domain.dim;
    let rule = match mode {
        AngularMode::Reduced => AngularRule::cross_polytope(n),
        AngularMode::Product => AngularRule::product(n, scheme.angular_nodes),
    };
    let failure = std::cell::RefCell::new(None);
    let est = integrate_half_line_vec(
        |rho, out| {
            if failure.borrow().is_some() {
                return;
            }
            let radial = rho.powi(n as i32 - 1);
            let mut terms = vec![Vec::with_capacity(rule.weights.len()); dim_out];
            let mut x = vec![0.0; n];
            let mut vals = vec![0.0; dim_out];
            for (omega, &w) in rule.directions.iter().zip(&rule.weights) {
                for k in 0..n {
                    x[k] = center[k] + rho * omega[k];
                }
                vals.iter_mut().for_each(|v| *v = 0.0);
                if let Err(e) = f(&x, &mut vals) {
                    *failure.borrow_mut() = Some(e);
                    return;
                }
                let ww = w * domain.weight.eval(&x) * radial;
                for (t, v) in terms.iter_mut().zip(&vals) {
                    t.push(ww * v);
                }
            }
            for (o, t) in out.iter_mut().zip(&terms) {
                *o = pairwise_sum(t);
            }
        },
        scale,
        dim_out,
        scheme,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    est
}

/// Density at `x`; zero is allowed (far tails underflow) and contributes
/// nothing.
fn checked_density<D: DensityFamily + ?Sized>(family: &D, theta: &[f64], x: &[f64]) -> Result<f64> {
    let e = family.density(theta, x);
    if e >= 0.0 && e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFiniteIntegrand {
            location: format!("x = {x:?}, density = {e}"),
        })
    }
}

/// Default finite-difference step for direction `i`.
pub fn default_fd_step(theta: &[f64], i: usize) -> f64 {
    1e-5 * theta[i].abs().max(1.0)
}

/// Score `∂_i log e` by the best route the family offers.
fn resolved_score<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    x: &[f64],
    i: usize,
    density: f64,
) -> Result<f64> {
    if let Some(s) = family.score(theta, x, i) {
        return Ok(s);
    }
    if let Some(d) = family.deriv(theta, x, i) {
        return Ok(d / density);
    }
    score_fd(family, theta, x, i, default_fd_step(theta, i))
}

/// Central-difference score with one Richardson step:
/// `(4·D(h/2) − D(h))/3` where `D(h)` is the symmetric quotient of
/// `log e`.
pub fn score_fd<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    x: &[f64],
    i: usize,
    step: f64,
) -> Result<f64> {
    let floor = 1e-12 * theta[i].abs().max(1.0);
    if !(step >= floor) {
        return Err(Error::StepUnderflow { step, floor });
    }
    let bx = family.param_box();
    let log_at = |offset: f64| -> Result<f64> {
        let mut th = theta.to_vec();
        th[i] += offset;
        bx.check(&th)?;
        checked_density(family, &th, x).and_then(|e| {
            if e > 0.0 {
                Ok(e.ln())
            } else {
                Err(Error::NonFiniteIntegrand {
                    location: format!("x = {x:?}, log of zero density"),
                })
            }
        })
    };
    let quotient = |h: f64| -> Result<f64> { Ok((log_at(h)? - log_at(-h)?) / (2.0 * h)) };
    let coarse = quotient(step)?;
    let fine = quotient(0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn upper_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect()
}

/// Information Gram matrix at `theta`, using the reduced angular rule when
/// the domain allows it.
pub fn info_gram<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    scheme: &QuadratureScheme,
) -> Result<GramMatrix> {
    let mode = if family.domain().radial_reducible {
        AngularMode::Reduced
    } else {
        AngularMode::Product
    };
    info_gram_with(family, theta, scheme, mode)
}

pub fn info_gram_with<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    scheme: &QuadratureScheme,
    mode: AngularMode,
) -> Result<GramMatrix> {
    gram_impl(family, theta, scheme, mode, |th, x, i, e| {
        resolved_score(family, th, x, i, e)
    })
}

/// Gram matrix with every score taken from [`score_fd`] at the default step,
/// ignoring analytic scores. Used to cross-check analytic families.
pub fn info_gram_fd<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    scheme: &QuadratureScheme,
) -> Result<GramMatrix> {
    let mode = if family.domain().radial_reducible {
        AngularMode::Reduced
    } else {
        AngularMode::Product
    };
    gram_impl(family, theta, scheme, mode, |th, x, i, _| {
        score_fd(family, th, x, i, default_fd_step(th, i))
    })
}

fn gram_impl<D, S>(
    family: &D,
    theta: &[f64],
    scheme: &QuadratureScheme,
    mode: AngularMode,
    score: S,
) -> Result<GramMatrix>
where
    D: DensityFamily + ?Sized,
    S: Fn(&[f64], &[f64], usize, f64) -> Result<f64>,
{
    let p = family.param_dim();
    if theta.len() != p {
        return Err(Error::InvalidArgument(format!(
            "expected {p} parameters, got {}",
            theta.len()
        )));
    }
    family.param_box().check(theta)?;
    let domain = family.domain();
    let pairs = upper_pairs(p);
    let center = family.center(theta);
    let est = integrate_polar(
        &domain,
        &center,
        family.length_scale(theta),
        pairs.len(),
        mode,
        scheme,
        |x, out| {
            let e = checked_density(family, theta, x)?;
            if e == 0.0 {
                return Ok(());
            }
            let s = (0..p)
                .map(|i| score(theta, x, i, e))
                .collect::<Result<Vec<f64>>>()?;
            for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
                *o = s[i] * s[j] * e;
            }
            Ok(())
        },
    )?;
    let mut entries = DMatrix::zeros(p, p);
    let mut err = DMatrix::zeros(p, p);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        entries[(i, j)] = est.values[k];
        entries[(j, i)] = est.values[k];
        err[(i, j)] = est.errs[k];
        err[(j, i)] = est.errs[k];
    }
    Ok(GramMatrix {
        entries,
        err,
        theta: theta.to_vec(),
        converged: est.converged,
        nodes: est.nodes,
    })
}

/// `∫ e(θ, x) w(x) dx`.
pub fn total_mass<D: DensityFamily + ?Sized>(
    family: &D,
    theta: &[f64],
    scheme: &QuadratureScheme,
) -> Result<crate::quadrature::Estimate> {
    family.param_box().check(theta)?;
    let domain = family.domain();
    let mode = if domain.radial_reducible {
        AngularMode::Reduced
    } else {
        AngularMode::Product
    };
    integrate_polar(
        &domain,
        &family.center(theta),
        family.length_scale(theta),
        1,
        mode,
        scheme,
        |x, out| {
            out[0] = checked_density(family, theta, x)?;
            Ok(())
        },
    )
    .map(|e| e.component(0))
}

/// Normal location–scale family on ℝ, `θ = (m, σ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianLocationScale;

impl DensityFamily for GaussianLocationScale {
    fn param_dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Domain {
        Domain {
            dim: 1,
            weight: Weight::Unit,
            radial_reducible: true,
        }
    }

    fn param_box(&self) -> ParamBox {
        ParamBox {
            lower: vec![Bound::Unbounded, Bound::Open(0.0)],
            upper: vec![Bound::Unbounded, Bound::Unbounded],
        }
    }

    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (m, s) = (theta[0], theta[1]);
        let z = (x[0] - m) / s;
        (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())
    }

    fn score(&self, theta: &[f64], x: &[f64], i: usize) -> Option<f64> {
        let (m, s) = (theta[0], theta[1]);
        let d = x[0] - m;
        Some(match i {
            0 => d / (s * s),
            _ => -1.0 / s + d * d / (s * s * s),
        })
    }

    fn center(&self, theta: &[f64]) -> Vec<f64> {
        vec![theta[0]]
    }

    fn length_scale(&self, theta: &[f64]) -> f64 {
        theta[1]
    }
}
