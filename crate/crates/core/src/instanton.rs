//! Charge-one instanton energy densities.
//!
//! Two families are provided: the standard instanton on ℝ⁴ with scale `λ`
//! and center `b`, and the one-parameter family `A_t` on ℂP² written in the
//! affine chart ℂ² ≅ ℝ⁴ with `D = 1 + |z₁|² + |z₂|²`. Only densities and the
//! pointwise pairings `(F, d_A η)` are represented; no connections.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    integrate_polar, AngularMode, Bound, DensityFamily, Domain, ParamBox, Weight,
};
use crate::quadrature::{
    decompactify, integrate_half_line_upto_vec, integrate_half_line_vec, Compactification,
    Estimate, QuadratureScheme,
};

/// `128π²/5`, the information norm of a unit scale or translation vector at
/// `λ = 1`.
pub const HYPERBOLIC_CONSTANT: f64 = 128.0 * PI * PI / 5.0;

/// Total energy `‖F‖²` of a charge-one instanton.
pub const CHARGE_ONE_ENERGY: f64 = 8.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpstParams {
    pub lambda: f64,
    pub center: [f64; 4],
}

impl BpstParams {
    pub fn new(lambda: f64, center: [f64; 4]) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "instanton scale must be positive and center finite (lambda = {lambda})"
            )));
        }
        Ok(Self { lambda, center })
    }

    /// Parameter vector `(λ, b₀, b₁, b₂, b₃)`.
    pub fn theta(&self) -> [f64; 5] {
        let b = self.center;
        [self.lambda, b[0], b[1], b[2], b[3]]
    }

    fn from_theta(theta: &[f64]) -> Self {
        Self {
            lambda: theta[0],
            center: [theta[1], theta[2], theta[3], theta[4]],
        }
    }

    fn offset(&self, x: &[f64]) -> ([f64; 4], f64) {
        let mut d = [0.0; 4];
        for k in 0..4 {
            d[k] = x[k] - self.center[k];
        }
        let r2 = d.iter().map(|v| v * v).sum();
        (d, r2)
    }
}

/// `|F|² = 48λ⁴/(λ² + |x − b|²)⁴`.
pub fn bpst_density(p: &BpstParams, x: &[f64]) -> f64 {
    let (_, r2) = p.offset(x);
    let l2 = p.lambda * p.lambda;
    48.0 * l2 * l2 / (l2 + r2).powi(4)
}

/// Spatial gradient `∂_x |F|²`.
pub fn bpst_density_gradient(p: &BpstParams, x: &[f64]) -> [f64; 4] {
    let (d, r2) = p.offset(x);
    let q = p.lambda * p.lambda + r2;
    let e = bpst_density(p, x);
    d.map(|dk| -8.0 * e * dk / q)
}

/// The standard instanton family; `θ = (λ, b₀, b₁, b₂, b₃)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BpstFamily;

pub fn bpst_family() -> BpstFamily {
    BpstFamily
}

impl DensityFamily for BpstFamily {
    fn param_dim(&self) -> usize {
        5
    }

    fn domain(&self) -> Domain {
        Domain {
            dim: 4,
            weight: Weight::Unit,
            radial_reducible: true,
        }
    }

    fn param_box(&self) -> ParamBox {
        let mut b = ParamBox::unbounded(5);
        b.lower[0] = Bound::Open(0.0);
        b
    }

    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        bpst_density(&BpstParams::from_theta(theta), x)
    }

    fn score(&self, theta: &[f64], x: &[f64], i: usize) -> Option<f64> {
        let p = BpstParams::from_theta(theta);
        let (d, r2) = p.offset(x);
        let q = p.lambda * p.lambda + r2;
        Some(match i {
            0 => 4.0 / p.lambda - 8.0 * p.lambda / q,
            k => 8.0 * d[k - 1] / q,
        })
    }

    fn center(&self, theta: &[f64]) -> Vec<f64> {
        theta[1..5].to_vec()
    }

    fn length_scale(&self, theta: &[f64]) -> f64 {
        theta[0]
    }
}

/// Vector fields on ℝ⁴ generating the moduli directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorField {
    /// `X = (x − b)·∇`, with `div X = 4`.
    Dilation,
    /// `X = ∂_{x_i}`.
    Translation(usize),
}

/// Residual of the flow identity at `x`: moving the instanton in moduli
/// equals transporting its density by `X`.
///
/// Dilation: `λ ∂_λ e + div(X) e + X(e)`. Translation: `∂_{b_i} e + ∂_{x_i} e`.
/// The parameter side uses the family score, the flow side the spatial
/// gradient.
pub fn flow_identity_residual(p: &BpstParams, field: VectorField, x: &[f64; 4]) -> Result<f64> {
    let theta = p.theta();
    let e = bpst_density(p, x);
    let grad = bpst_density_gradient(p, x);
    let score = |i| BpstFamily.score(&theta, x, i).expect("analytic score");
    match field {
        VectorField::Dilation => {
            let (d, _) = p.offset(x);
            let flow: f64 = d.iter().zip(&grad).map(|(a, g)| a * g).sum();
            Ok(p.lambda * score(0) * e + 4.0 * e + flow)
        }
        VectorField::Translation(i) if i < 4 => Ok(score(i + 1) * e + grad[i]),
        VectorField::Translation(i) => Err(Error::InvalidArgument(format!(
            "translation index {i} out of range"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelIntegrals {
    pub i1: Estimate,
    pub i2: Estimate,
}

/// `I1(N) = ∫₀^N ρ³(1−ρ²)²/(1+ρ²)⁶ dρ` and `I2(N) = ∫₀^N ρ⁵/(1+ρ²)⁶ dρ`.
/// `N = ∞` is allowed. Under `u = ρ²/(1+ρ²)` both integrands are
/// polynomials in `u`.
pub fn model_integrals(n: f64, scheme: &QuadratureScheme) -> Result<ModelIntegrals> {
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("upper limit must be positive, got {n}")));
    }
    let c = Compactification::AlgebraicMap;
    let u_max = if n.is_infinite() {
        1.0
    } else {
        decompactify(c, 1.0, n)
    };
    let scheme = scheme.with_compactification(c);
    let est = integrate_half_line_upto_vec(
        |r, out| {
            let r2 = r * r;
            let q = (1.0 + r2).powi(6);
            out[0] = r * r2 * (1.0 - r2).powi(2) / q;
            out[1] = r * r2 * r2 / q;
        },
        1.0,
        u_max,
        2,
        &scheme,
    )?;
    Ok(ModelIntegrals {
        i1: est.component(0),
        i2: est.component(1),
    })
}

/// Point `t` on the ℂP² family; the scale is `λ = √(1 − t²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cp2Params {
    pub t: f64,
}

impl Cp2Params {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("t must lie in [0, 1), got {t}")));
        }
        Ok(Self { t })
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Domain(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        Self::new((1.0 - lambda * lambda).sqrt())
    }

    pub fn lambda(&self) -> f64 {
        (1.0 - self.t * self.t).sqrt()
    }

    fn require_interior(&self) -> Result<()> {
        if self.t > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain("t must be positive".into()))
        }
    }
}

/// Pointwise data of `A_t` at a chart point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cp2Pointwise {
    pub d: f64,
    /// `(F, d_A η_rad)` for `η_rad = dA_t/dt`.
    pub pair_rad: f64,
    /// `(F, d_A η_μ) / Re(μ(z))`.
    pub pair_tan_coeff: f64,
    /// `|F|²`.
    pub f_norm_sq: f64,
    /// Fubini–Study volume relative to `d⁴x`: `D⁻³`.
    pub vol_ratio: f64,
}

impl Cp2Pointwise {
    /// The data depend on the point only through `D ≥ 1`.
    pub fn at(p: &Cp2Params, d: f64) -> Self {
        let t = p.t;
        let t2 = t * t;
        let s = 1.0 - t2;
        let dm = d - t2;
        let d3 = d * d * d;
        let dm4 = dm.powi(4);
        let dm5 = dm4 * dm;
        let pair_rad =
            32.0 * t * s * d3 * (-d * d + d * (3.0 - 4.0 * t2) + 3.0 * t2 - t2 * t2) / dm5;
        let pair_tan_coeff = -96.0 * t2 * s * s * d3 * (d + t2) / dm5;
        let f_norm_sq = 16.0 * d3 * s * s * (d + 2.0 * t2) / dm4;
        Self {
            d,
            pair_rad,
            pair_tan_coeff,
            f_norm_sq,
            vol_ratio: 1.0 / d3,
        }
    }
}

pub fn cp2_pointwise(p: &Cp2Params, z: &[Complex64; 2]) -> Cp2Pointwise {
    Cp2Pointwise::at(p, 1.0 + z[0].norm_sqr() + z[1].norm_sqr())
}

/// Chart point `z ∈ ℂ²` as `(Re z₁, Im z₁, Re z₂, Im z₂)`.
pub fn chart_point(x: &[f64]) -> [Complex64; 2] {
    [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])]
}

/// `Re(μ(z)) = Re(μ₁z₁ + μ₂z₂)`.
pub fn covector_pairing(mu: &[Complex64; 2], z: &[Complex64; 2]) -> f64 {
    (mu[0] * z[0] + mu[1] * z[1]).re
}

/// Real inner product `Re⟨μ, ν⟩` of covectors under the standard hermitian
/// metric.
pub fn covector_inner(mu: &[Complex64; 2], nu: &[Complex64; 2]) -> f64 {
    (mu[0] * nu[0].conj() + mu[1] * nu[1].conj()).re
}

/// The ℂP² family as a one-parameter density family on the chart, weighted
/// by the Fubini–Study volume. The score is `2 (F, d_A η_rad)/|F|²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cp2Family;

impl DensityFamily for Cp2Family {
    fn param_dim(&self) -> usize {
        1
    }

    fn domain(&self) -> Domain {
        Domain {
            dim: 4,
            weight: Weight::FubiniStudyChart,
            radial_reducible: true,
        }
    }

    fn param_box(&self) -> ParamBox {
        ParamBox {
            lower: vec![Bound::Closed(0.0)],
            upper: vec![Bound::Open(1.0)],
        }
    }

    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        let d = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        Cp2Pointwise::at(&Cp2Params { t: theta[0] }, d).f_norm_sq
    }

    fn score(&self, theta: &[f64], x: &[f64], _i: usize) -> Option<f64> {
        let d = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let pw = Cp2Pointwise::at(&Cp2Params { t: theta[0] }, d);
        Some(2.0 * pw.pair_rad / pw.f_norm_sq)
    }
}

/// Radial integrals over the chart of functions of `D`, with the `D⁻³`
/// volume factor and the `S³` area folded in: `∫ g(D) ρ^{2k} D⁻³ d⁴x`.
fn chart_radial<G>(p: &Cp2Params, scheme: &QuadratureScheme, g: G) -> Result<Estimate>
where
    G: Fn(&Cp2Pointwise, f64) -> f64,
{
    let scale = p.lambda().max(1e-3);
    integrate_half_line_vec(
        |rho, out| {
            let r2 = rho * rho;
            let pw = Cp2Pointwise::at(p, 1.0 + r2);
            out[0] = 2.0 * PI * PI * rho * r2 * pw.vol_ratio * g(&pw, r2);
        },
        scale,
        1,
        scheme,
    )
    .map(|e| e.component(0))
}

/// `g_tt = 4 ∫ (F, d_A η_rad)² / |F|² vol`, the squared information norm of
/// `dA_t/dt`.
pub fn cp2_radial_gram(p: &Cp2Params, scheme: &QuadratureScheme) -> Result<Estimate> {
    p.require_interior()?;
    chart_radial(p, scheme, |pw, _| 4.0 * pw.pair_rad * pw.pair_rad / pw.f_norm_sq)
}

/// Sphere-averaged tangential integral for unit covectors:
/// `4 ∫ c(D)² (ρ²/4) / |F|² vol`, using `⟨Re(μz)Re(νz)⟩_{S³} = ρ² Re⟨μ,ν⟩/4`.
fn cp2_tangential_unit(p: &Cp2Params, scheme: &QuadratureScheme) -> Result<Estimate> {
    chart_radial(p, scheme, |pw, r2| {
        pw.pair_tan_coeff * pw.pair_tan_coeff * r2 / pw.f_norm_sq
    })
}

/// `4 ∫ (F, d_A η_μ)(F, d_A η_ν) / |F|² vol`; bilinear in `(μ, ν)` and
/// proportional to `Re⟨μ, ν⟩`.
pub fn cp2_tangential_gram(
    p: &Cp2Params,
    mu: &[Complex64; 2],
    nu: &[Complex64; 2],
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    p.require_interior()?;
    let unit = cp2_tangential_unit(p, scheme)?;
    let c = covector_inner(mu, nu);
    Ok(Estimate {
        value: c * unit.value,
        err: c.abs() * unit.err,
        ..unit
    })
}

/// Tangential Gram matrix over a list of covectors (as real tangent
/// directions).
pub fn cp2_tangential_matrix(
    p: &Cp2Params,
    dirs: &[[Complex64; 2]],
    scheme: &QuadratureScheme,
) -> Result<(DMatrix<f64>, Estimate)> {
    p.require_interior()?;
    let unit = cp2_tangential_unit(p, scheme)?;
    let n = dirs.len();
    let m = DMatrix::from_fn(n, n, |a, b| covector_inner(&dirs[a], &dirs[b]) * unit.value);
    Ok((m, unit))
}

/// Tangential inner product by the full angular product rule, without the
/// sphere-moment identity. Convergence is judged against the diagonal
/// scale `√(g_μμ · g_νν)`, since off-diagonal entries may vanish.
pub fn cp2_tangential_gram_product(
    p: &Cp2Params,
    mu: &[Complex64; 2],
    nu: &[Complex64; 2],
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    p.require_interior()?;
    let domain = Domain::new(4, Weight::FubiniStudyChart, false)?;
    let unit = cp2_tangential_unit(p, scheme)?.value;
    let diag = unit * (covector_inner(mu, mu) * covector_inner(nu, nu)).sqrt();
    let scheme = QuadratureScheme {
        abs_tol: scheme.abs_tol.max(diag),
        ..*scheme
    };
    integrate_polar(
        &domain,
        &[0.0; 4],
        p.lambda().max(1e-3),
        1,
        AngularMode::Product,
        &scheme,
        |x, out| {
            let z = chart_point(x);
            let pw = cp2_pointwise(p, &z);
            let a = pw.pair_tan_coeff * covector_pairing(mu, &z);
            let b = pw.pair_tan_coeff * covector_pairing(nu, &z);
            out[0] = 4.0 * a * b / pw.f_norm_sq;
            Ok(())
        },
    )
    .map(|e| e.component(0))
}

/// Radial–tangential cross term `4 ∫ (F, d_A η_rad)(F, d_A η_μ)/|F|² vol`,
/// by the full angular product rule.
///
/// The term vanishes, so convergence is judged against the diagonal scale
/// `√(g_tt · g_μμ)` rather than its own size.
pub fn cp2_cross_term(p: &Cp2Params, mu: &[Complex64; 2], scheme: &QuadratureScheme) -> Result<Estimate> {
    p.require_interior()?;
    let domain = Domain::new(4, Weight::FubiniStudyChart, false)?;
    let diag = cp2_radial_gram(p, scheme)?.value * cp2_tangential_gram(p, mu, mu, scheme)?.value;
    let scheme = QuadratureScheme {
        abs_tol: scheme.abs_tol.max(diag.sqrt()),
        ..*scheme
    };
    integrate_polar(
        &domain,
        &[0.0; 4],
        p.lambda().max(1e-3),
        1,
        AngularMode::Product,
        &scheme,
        |x, out| {
            let z = chart_point(x);
            let pw = cp2_pointwise(p, &z);
            out[0] = 4.0 * pw.pair_rad * pw.pair_tan_coeff * covector_pairing(mu, &z) / pw.f_norm_sq;
            Ok(())
        },
    )
    .map(|e| e.component(0))
}
