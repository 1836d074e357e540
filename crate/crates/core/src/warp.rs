//! Cohomogeneity-one metrics `F(λ) dλ² + H(λ) g_FS` on `(0, 1) × ℂP²`.
//!
//! Curvatures are computed through the warping function `φ = √H` and the
//! arc length `dr = √F dλ`:
//!
//! ```text
//! σ_TN = −φ''/φ,   σ_TT = (k − φ'²)/φ²
//! ```
//!
//! where primes are `r`-derivatives and `k` is a sectional curvature of the
//! fiber, `1` (totally real planes) or `4` (complex lines) for `g_FS`.
//! Sign convention: the unit round sphere has curvature `+1`.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::closed_form::{f_jet, h_jet};
use crate::error::{Error, Result};
use crate::extrapolate::{extrapolate_to_zero, linear_fit};
use crate::instanton::HYPERBOLIC_CONSTANT;
use crate::jet::Jet;
use crate::quadrature::{integrate_interval, QuadratureScheme};

/// Arc lengths beyond this are reported as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// Largest relative change of the curvatures under step halving accepted
/// for finite-difference metrics.
pub const FD_STABILITY_TOL: f64 = 1e-6;

/// Accepted error estimate of an extrapolated limit, relative to
/// `max(|limit|, 1)`.
pub const EXTRAPOLATION_TOL: f64 = 1e-3;

/// Sectional curvatures of the fiber: `[k_TT1, k_TT4]`.
pub type FiberCurvatures = [f64; 2];

/// Fubini–Study metric with holomorphic curvature 4.
pub const FUBINI_STUDY: FiberCurvatures = [1.0, 4.0];

/// Flat fiber.
pub const FLAT: FiberCurvatures = [0.0, 0.0];

type JetFn = Arc<dyn Fn(f64) -> Result<Jet> + Send + Sync>;
type ValueFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A coefficient function of `λ`.
#[derive(Clone)]
pub enum Coefficient {
    /// Value with exact first and second derivatives.
    Analytic(JetFn),
    /// Values only; derivatives by central differences.
    Sampled(ValueFn),
}

impl Coefficient {
    pub fn analytic(f: impl Fn(f64) -> Result<Jet> + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn sampled(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Sampled(Arc::new(f))
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        match self {
            Self::Analytic(f) => f(lambda).map(|j| j.v),
            Self::Sampled(f) => Ok(f(lambda)),
        }
    }

    /// Value and derivatives; `step` is used only by sampled coefficients.
    fn jet(&self, lambda: f64, step: f64) -> Result<Jet> {
        match self {
            Self::Analytic(f) => f(lambda),
            Self::Sampled(f) => {
                let h = step;
                let (p1, p2) = (f(lambda + h), f(lambda + 2.0 * h));
                let (m1, m2) = (f(lambda - h), f(lambda - 2.0 * h));
                let v = f(lambda);
                let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
                let d2 = (16.0 * (p1 + m1) - 30.0 * v - (p2 + m2)) / (12.0 * h * h);
                Ok(Jet::new(v, d1, d2))
            }
        }
    }

    fn is_sampled(&self) -> bool {
        matches!(self, Self::Sampled(_))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic(_) => "Analytic",
            Self::Sampled(_) => "Sampled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// The information metric on the ℂP² moduli space.
    InfoCp2,
    /// `c (dλ² + g_flat)/λ²`, constant curvature `−1/c`.
    HyperbolicModel,
    /// `c (dλ² + g_FS)/λ²`: hyperbolic up to `O(λ²)` at `λ → 0`.
    CollarModel,
    /// `dr² + 3r² g_FS` with `r = 1 − λ`.
    VertexModel,
    Custom,
}

#[derive(Debug, Clone)]
pub struct WarpedMetric {
    pub preset: Preset,
    pub radial: Coefficient,
    pub fiber: Coefficient,
    pub fiber_curvatures: FiberCurvatures,
    /// Constant factor of the metric; `σ · scale` are the curvatures of
    /// `g / scale`.
    pub scale: f64,
    /// Working interval `(lower, upper)`. Arc length `r` is measured to
    /// `upper`.
    pub lower: f64,
    pub upper: f64,
}

fn inverse_square(c: f64) -> Coefficient {
    Coefficient::analytic(move |l| Ok(Jet::variable(l).powi(-2) * c))
}

impl WarpedMetric {
    pub fn info_cp2() -> Self {
        let c = HYPERBOLIC_CONSTANT;
        let over_l2 = move |j: Jet, l: f64| j * Jet::variable(l).powi(-2) * c;
        Self {
            preset: Preset::InfoCp2,
            radial: Coefficient::analytic(move |l| Ok(over_l2(f_jet(l)?, l))),
            fiber: Coefficient::analytic(move |l| Ok(over_l2(h_jet(l)?, l))),
            fiber_curvatures: FUBINI_STUDY,
            scale: c,
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn hyperbolic_model(c: f64) -> Result<Self> {
        check_scale(c)?;
        Ok(Self {
            preset: Preset::HyperbolicModel,
            radial: inverse_square(c),
            fiber: inverse_square(c),
            fiber_curvatures: FLAT,
            scale: c,
            lower: 0.0,
            upper: 1.0,
        })
    }

    pub fn collar_model(c: f64) -> Result<Self> {
        check_scale(c)?;
        Ok(Self {
            preset: Preset::CollarModel,
            fiber_curvatures: FUBINI_STUDY,
            ..Self::hyperbolic_model(c)?
        })
    }

    pub fn vertex_model() -> Self {
        Self {
            preset: Preset::VertexModel,
            radial: Coefficient::analytic(|_| Ok(Jet::constant(1.0))),
            fiber: Coefficient::analytic(|l| Ok((1.0 - Jet::variable(l)).powi(2) * 3.0)),
            fiber_curvatures: FUBINI_STUDY,
            scale: 1.0,
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn custom(
        radial: Coefficient,
        fiber: Coefficient,
        fiber_curvatures: FiberCurvatures,
        interval: (f64, f64),
    ) -> Result<Self> {
        let (lower, upper) = interval;
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidArgument(format!(
                "working interval ({lower}, {upper}) is empty"
            )));
        }
        Ok(Self {
            preset: Preset::Custom,
            radial,
            fiber,
            fiber_curvatures,
            scale: 1.0,
            lower,
            upper,
        })
    }

    pub fn uses_finite_differences(&self) -> bool {
        self.radial.is_sampled() || self.fiber.is_sampled()
    }

    fn check_interior(&self, lambda: f64) -> Result<()> {
        if lambda > self.lower && lambda < self.upper {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "lambda = {lambda} outside the working interval ({}, {})",
                self.lower, self.upper
            )))
        }
    }

    /// Central-difference step at `λ`, kept inside the working interval.
    fn fd_step(&self, lambda: f64) -> f64 {
        let room = (lambda - self.lower).min(self.upper - lambda) / 4.0;
        (2e-3 * lambda.abs().max(1e-3)).min(room)
    }

    /// `F` and `H` with derivatives at `λ`; `step_factor` scales the
    /// finite-difference step.
    pub fn coefficients(&self, lambda: f64, step_factor: f64) -> Result<(Jet, Jet)> {
        self.check_interior(lambda)?;
        let h = self.fd_step(lambda) * step_factor;
        let f = self.radial.jet(lambda, h)?;
        let g = self.fiber.jet(lambda, h)?;
        if !(f.v > 0.0 && g.v > 0.0 && f.is_finite() && g.is_finite()) {
            return Err(Error::Domain(format!(
                "metric degenerate at lambda = {lambda}: F = {}, H = {}",
                f.v, g.v
            )));
        }
        Ok((f, g))
    }
}

fn check_scale(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("metric scale must be positive, got {c}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CurvatureSample {
    pub lambda: f64,
    /// Distance to the end `λ = upper` of the working interval.
    pub r: f64,
    pub sigma_TN: f64,
    pub sigma_TT1: f64,
    pub sigma_TT4: f64,
}

impl CurvatureSample {
    pub fn sigmas(&self) -> [f64; 3] {
        [self.sigma_TN, self.sigma_TT1, self.sigma_TT4]
    }
}

fn sigmas_from(m: &WarpedMetric, f: Jet, h: Jet) -> [f64; 3] {
    let phi = h.sqrt();
    let dphi2 = phi.d1 * phi.d1 / f.v;
    let ddphi = phi.d2 / f.v - phi.d1 * f.d1 / (2.0 * f.v * f.v);
    let phi2 = phi.v * phi.v;
    let [k1, k4] = m.fiber_curvatures;
    [-ddphi / phi.v, (k1 - dphi2) / phi2, (k4 - dphi2) / phi2]
}

/// The three curvatures at `λ` without the arc length.
fn sigmas_at(m: &WarpedMetric, lambda: f64) -> Result<[f64; 3]> {
    let (f, h) = m.coefficients(lambda, 1.0)?;
    let s = sigmas_from(m, f, h);
    if !m.uses_finite_differences() {
        return Ok(s);
    }
    let (f2, h2) = m.coefficients(lambda, 0.5)?;
    let s2 = sigmas_from(m, f2, h2);
    let size = s.iter().chain(&s2).fold(0.0_f64, |a, v| a.max(v.abs()));
    let change = s
        .iter()
        .zip(&s2)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
        / size.max(f64::MIN_POSITIVE);
    if !(change < FD_STABILITY_TOL) {
        return Err(Error::DerivativeInstability { lambda, change });
    }
    Ok(s2)
}

fn arclength_scheme() -> QuadratureScheme {
    QuadratureScheme::default()
        .with_radial_nodes(32)
        .with_rel_tol(1e-13)
}

/// `∫ √F dλ` between `λ1` and `λ2`, in either order.
pub fn arclength(m: &WarpedMetric, lambda1: f64, lambda2: f64) -> Result<f64> {
    let (a, b) = (lambda1.min(lambda2), lambda1.max(lambda2));
    if !(a > m.lower && b <= m.upper) || a.is_nan() || b.is_nan() {
        return Err(Error::Domain(format!(
            "arc length endpoints ({lambda1}, {lambda2}) outside ({}, {}]",
            m.lower, m.upper
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let failure = RefCell::new(None);
    // λ = e^u keeps the 1/λ growth of collar metrics polynomial-free
    let integrand = |u: f64| {
        let l = u.exp();
        match m.radial.value(l) {
            Ok(f) if f > 0.0 => f.sqrt() * l,
            Ok(f) => {
                failure.borrow_mut().get_or_insert(Error::Domain(format!(
                    "F = {f} not positive at lambda = {l}"
                )));
                0.0
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let est = if a > 0.0 {
        integrate_interval(integrand, a.ln(), b.ln(), &arclength_scheme())?
    } else {
        integrate_interval(
            |l| m.radial.value(l).map(f64::sqrt).unwrap_or(f64::NAN),
            a,
            b,
            &arclength_scheme(),
        )?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if est.value > DIVERGENCE_LIMIT {
        return Err(Error::Divergent {
            limit: DIVERGENCE_LIMIT,
        });
    }
    if !est.converged {
        return Err(Error::NonConvergence {
            rel_tol: arclength_scheme().rel_tol,
            nodes: est.nodes,
            change: est.err,
        });
    }
    Ok(est.value)
}

/// Curvatures at `λ` together with the distance `r` to `λ = upper`.
pub fn primary_curvatures(m: &WarpedMetric, lambda: f64) -> Result<CurvatureSample> {
    let [tn, tt1, tt4] = sigmas_at(m, lambda)?;
    Ok(CurvatureSample {
        lambda,
        r: arclength(m, lambda, m.upper)?,
        sigma_TN: tn,
        sigma_TT1: tt1,
        sigma_TT4: tt4,
    })
}

/// The `λ` at distance `r` from `λ = upper`.
pub fn lambda_at_distance(m: &WarpedMetric, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("distance must be positive, got {r}")));
    }
    // bracket [lo, hi] with dist(lo) > r > dist(hi)
    let mut hi = m.upper;
    let mut lo = m.upper - (m.upper - m.lower) / 2.0;
    while arclength(m, lo, m.upper)? < r {
        hi = lo;
        lo = m.lower + (lo - m.lower) / 16.0;
        if lo - m.lower < 1e-300 {
            return Err(Error::Domain(format!("distance {r} exceeds the working interval")));
        }
    }
    // safeguarded Newton on d(λ) = r, d' = −√F
    let mut l = 0.5 * (lo + hi);
    for _ in 0..100 {
        let g = arclength(m, l, m.upper)? - r;
        if g.abs() <= 1e-14 * r {
            return Ok(l);
        }
        if g > 0.0 {
            lo = l;
        } else {
            hi = l;
        }
        let step = g / m.radial.value(l)?.sqrt();
        let next = l + step;
        l = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(l);
        }
    }
    Ok(l)
}

/// Limits at the vertex `λ = upper`. Curvatures refer to `g / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct VertexAsymptotics {
    pub sigma_TN_limit: f64,
    pub sigma_TN_err: f64,
    pub r2_sigma_TT1_limit: f64,
    pub r2_sigma_TT1_err: f64,
    pub r2_sigma_TT4_limit: f64,
    pub r2_sigma_TT4_err: f64,
    /// Limit of `H / r²`, the coefficient of `r² g_FS`.
    pub fs_coefficient: f64,
    pub fs_coefficient_err: f64,
    pub samples: Vec<CurvatureSample>,
}

fn check_toward_zero(seq: &[f64], what: &str) -> Result<()> {
    if seq.len() < 5 {
        return Err(Error::InvalidArgument(format!("{what} needs at least 5 points")));
    }
    if seq.iter().any(|v| !(*v > 0.0 && v.is_finite())) || seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "{what} must be positive and strictly decreasing"
        )));
    }
    Ok(())
}

fn stable_limit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let (v, e) = extrapolate_to_zero(xs, ys)?;
    if e > EXTRAPOLATION_TOL * v.abs().max(1.0) {
        return Err(Error::ExtrapolationUnstable { value: v, error: e });
    }
    Ok((v, e))
}

pub fn vertex_asymptotics(m: &WarpedMetric, r_sequence: &[f64]) -> Result<VertexAsymptotics> {
    check_toward_zero(r_sequence, "r sequence")?;
    let mut samples = Vec::with_capacity(r_sequence.len());
    let mut fs = Vec::with_capacity(r_sequence.len());
    for &r in r_sequence {
        let lambda = lambda_at_distance(m, r)?;
        let [tn, tt1, tt4] = sigmas_at(m, lambda)?;
        fs.push(m.fiber.value(lambda)? / (r * r));
        samples.push(CurvatureSample {
            lambda,
            r,
            sigma_TN: tn,
            sigma_TT1: tt1,
            sigma_TT4: tt4,
        });
    }
    let rs: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let col = |f: &dyn Fn(&CurvatureSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let (tn, tn_e) = stable_limit(&rs, &col(&|s| s.sigma_TN * m.scale))?;
    let (t1, t1_e) = stable_limit(&rs, &col(&|s| s.r * s.r * s.sigma_TT1))?;
    let (t4, t4_e) = stable_limit(&rs, &col(&|s| s.r * s.r * s.sigma_TT4))?;
    let (fc, fc_e) = stable_limit(&rs, &fs)?;
    Ok(VertexAsymptotics {
        sigma_TN_limit: tn,
        sigma_TN_err: tn_e,
        r2_sigma_TT1_limit: t1,
        r2_sigma_TT1_err: t1_e,
        r2_sigma_TT4_limit: t4,
        r2_sigma_TT4_err: t4_e,
        fs_coefficient: fc,
        fs_coefficient_err: fc_e,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarRow {
    pub lambda: f64,
    /// Largest `|σ · scale + 1|` over the three curvatures.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarReport {
    pub rows: Vec<CollarRow>,
    /// Deviations do not increase along the sequence.
    pub monotone: bool,
}

/// Deviation of the rescaled curvatures from `−1` along `λ → 0`.
pub fn collar_limits(m: &WarpedMetric, lambda_sequence: &[f64]) -> Result<CollarReport> {
    if lambda_sequence.is_empty() {
        return Err(Error::InvalidArgument("lambda sequence is empty".into()));
    }
    let mut rows = Vec::with_capacity(lambda_sequence.len());
    for &lambda in lambda_sequence {
        if !(lambda > 0.0 && lambda <= 0.2) {
            return Err(Error::Domain(format!("collar lambda must lie in (0, 0.2], got {lambda}")));
        }
        let s = sigmas_at(m, lambda)?;
        let deviation = s.iter().fold(0.0_f64, |a, v| a.max((v * m.scale + 1.0).abs()));
        rows.push(CollarRow { lambda, deviation });
    }
    let monotone = rows.windows(2).all(|w| w[1].deviation <= w[0].deviation);
    Ok(CollarReport { rows, monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub arclength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lambda0: f64,
    pub rows: Vec<ProbeRow>,
    /// Least-squares slope of arc length against `log(λ0/ε)`.
    pub log_slope: f64,
}

/// Arc length from `ε` to `λ0` as `ε → 0`.
pub fn completeness_probe(m: &WarpedMetric, lambda0: f64, eps_sequence: &[f64]) -> Result<ProbeReport> {
    if eps_sequence.len() < 2 {
        return Err(Error::InvalidArgument("eps sequence needs at least 2 points".into()));
    }
    if eps_sequence.windows(2).any(|w| w[1] >= w[0]) || eps_sequence[0] >= lambda0 {
        return Err(Error::InvalidArgument(
            "eps sequence must decrease from below lambda0".into(),
        ));
    }
    let rows = eps_sequence
        .iter()
        .map(|&eps| arclength(m, eps, lambda0).map(|arclength| ProbeRow { eps, arclength }))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (lambda0 / r.eps).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.arclength).collect();
    let (log_slope, _) = linear_fit(&xs, &ys)?;
    Ok(ProbeReport {
        lambda0,
        rows,
        log_slope,
    })
}
