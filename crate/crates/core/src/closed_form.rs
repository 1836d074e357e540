//! Closed-form coefficients of the information metric on the charge-one
//! ℂP² moduli space,
//!
//! ```text
//! g = (128π²/5) · (f(λ) dλ² + h(λ) g_FS) / λ²,   0 < λ < 1.
//! ```
//!
//! With `x = λ²` and `L = log(x/(3 − 2x))`:
//!
//! ```text
//! f = [ (1 − 7x/3 + 14x²/9 − 2x³/3 + 2x⁴/27)/(1−x) − (30x⁴/81 − 20x⁵/81) L/(1−x)² ] / (1−x)²
//! h =   (1 − 7x/3 + 23x²/18 + 93x³/108 − 77x⁴/108)/(1−x) + (5x³/18 − 10x⁴/27 + 10x⁵/81) L/(1−x)²
//! ```
//!
//! These are exactly the quadrature integrals of the pointwise pairings in
//! [`crate::instanton`]. An older closed form of the coefficients
//! ([`f_legacy`], [`h_legacy`]) omits the outer `(1−x)⁻²` in `f` and carries
//! `x⁵/81` in place of `10x⁵/81` in `h`; it is kept for comparison in
//! [`crosscheck`].
//!
//! Near the cone vertex `λ → 1` both expressions are differences of terms
//! of size `(1−x)⁻⁴`, so above `λ = 1 − DELTA_SWITCH` a Taylor series in
//! `s = 1 − x` is used instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instanton::{
    cp2_radial_gram, cp2_tangential_gram, Cp2Params, HYPERBOLIC_CONSTANT,
};
use crate::jet::Jet;
use num_complex::Complex64;
use crate::quadrature::QuadratureScheme;

/// Width of the series window below the vertex `λ = 1`.
pub const DELTA_SWITCH: f64 = 0.05;

/// Largest `t` accepted by [`crosscheck`].
pub const T_MAX: f64 = 1.0 - 1e-3;

/// Agreement threshold between closed form and quadrature.
pub const CROSSCHECK_TOL: f64 = 1e-3;

// Taylor coefficients of f and h in s = 1 − λ², computed in exact rational
// arithmetic. The radius of convergence is 1/2; at the switch point
// s ≈ 0.0975 the truncation error is below 1e-25.
const RADIAL_SERIES: [f64; 44] = [
    2.5,
    -3.0,
    3.0,
    -3.4285714285714284,
    4.607142857142857,
    -6.642857142857143,
    10.071428571428571,
    -15.818181818181818,
    25.52922077922078,
    -42.09440559440559,
    70.63036963036963,
    -120.23976023976024,
    207.2139110889111,
    -360.8615061409179,
    634.170814479638,
    -1123.373286156568,
    2003.9640092879256,
    -3597.2219150818223,
    6493.410196614531,
    -11780.562869624655,
    21470.417434396266,
    -39293.24466403162,
    72184.364170612,
    -133070.0734569778,
    246099.1223363593,
    -456484.7207654415,
    849052.8657067071,
    -1583256.7193340587,
    2959378.5944799776,
    -5543885.503566372,
    10407130.491962995,
    -19574693.88315385,
    36885478.950292945,
    -69625130.62433413,
    131638941.82282089,
    -249270923.91974923,
    472706951.0253974,
    -897661335.8441375,
    1706879143.16847,
    -3249634848.376525,
    6194150562.9866,
    -11820070541.644434,
    22580153464.570503,
    -43179851268.74338,
];
const FIBER_SERIES: [f64; 44] = [
    0.0,
    0.0,
    1.875,
    -1.125,
    0.375,
    -0.26785714285714285,
    0.29464285714285715,
    -0.3482142857142857,
    0.45535714285714285,
    -0.6258116883116883,
    0.900974025974026,
    -1.340034965034965,
    2.0495754245754245,
    -3.2056693306693305,
    5.110733016983017,
    -8.280845992243052,
    13.6072034583064,
    -22.634882242370633,
    38.06075851393189,
    -64.61576735957541,
    110.64264102770295,
    -190.9217398733989,
    331.7553363398615,
    -580.142214850367,
    1020.389074512444,
    -1804.2746465491032,
    3205.981497849976,
    -5722.399478969307,
    10256.74447707465,
    -18455.508542764244,
    33328.202504270615,
    -60389.71884412515,
    109770.4099483123,
    -200121.36524472325,
    365855.838758964,
    -670600.9803039767,
    1232228.8761578666,
    -2269511.055315271,
    4189213.148209987,
    -7748928.403454339,
    14361953.726496968,
    -26668905.7636067,
    49610877.678005844,
    -92446768.40418579,
];

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda must lie in (0, 1), got {lambda}")))
    }
}

fn rational_parts(x: Jet) -> (Jet, Jet, Jet) {
    let s = 1.0 - x;
    let log = (x / (3.0 - x * 2.0)).ln();
    (s, log, x)
}

fn f_direct(lambda: Jet) -> Jet {
    let (s, log, x) = rational_parts(lambda * lambda);
    let num = x.poly(&[1.0, -7.0 / 3.0, 14.0 / 9.0, -2.0 / 3.0, 2.0 / 27.0]);
    let lcoef = x.poly(&[0.0, 0.0, 0.0, 0.0, 30.0 / 81.0, -20.0 / 81.0]);
    let s2 = s * s;
    (num / s - lcoef * log / s2) / s2
}

fn h_direct(lambda: Jet) -> Jet {
    let (s, log, x) = rational_parts(lambda * lambda);
    let num = x.poly(&[1.0, -7.0 / 3.0, 23.0 / 18.0, 93.0 / 108.0, -77.0 / 108.0]);
    let lcoef = x.poly(&[0.0, 0.0, 0.0, 5.0 / 18.0, -10.0 / 27.0, 10.0 / 81.0]);
    num / s + lcoef * log / (s * s)
}

fn near_vertex(lambda: f64) -> bool {
    lambda > 1.0 - DELTA_SWITCH
}

fn series(lambda: Jet, coeffs: &[f64]) -> Jet {
    (1.0 - lambda * lambda).poly(coeffs)
}

/// Radial coefficient `f` with its first two `λ`-derivatives.
pub fn f_jet(lambda: f64) -> Result<Jet> {
    check_lambda(lambda)?;
    let l = Jet::variable(lambda);
    Ok(if near_vertex(lambda) {
        series(l, &RADIAL_SERIES)
    } else {
        f_direct(l)
    })
}

/// Fiber coefficient `h` with its first two `λ`-derivatives.
pub fn h_jet(lambda: f64) -> Result<Jet> {
    check_lambda(lambda)?;
    let l = Jet::variable(lambda);
    Ok(if near_vertex(lambda) {
        series(l, &FIBER_SERIES)
    } else {
        h_direct(l)
    })
}

pub fn f_coeff(lambda: f64) -> Result<f64> {
    f_jet(lambda).map(|j| j.v)
}

pub fn h_coeff(lambda: f64) -> Result<f64> {
    h_jet(lambda).map(|j| j.v)
}

/// The older closed form of `f`; differs from [`f_coeff`] by the factor
/// `(1 − λ²)²`.
pub fn f_legacy(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let x = lambda * lambda;
    let s = 1.0 - x;
    let log = (x / (3.0 - 2.0 * x)).ln();
    let num = 1.0 - 7.0 / 3.0 * x + 14.0 / 9.0 * x * x - 2.0 / 3.0 * x.powi(3) + 2.0 / 27.0 * x.powi(4);
    let lcoef = 30.0 / 81.0 * x.powi(4) - 20.0 / 81.0 * x.powi(5);
    Ok(num / s - lcoef * log / (s * s))
}

/// The older closed form of `h`, with `x⁵/81` in the logarithmic term. It
/// grows like `(1 − λ)⁻¹` at the vertex.
pub fn h_legacy(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let x = lambda * lambda;
    let s = 1.0 - x;
    let log = (x / (3.0 - 2.0 * x)).ln();
    let num = 1.0 - 7.0 / 3.0 * x + 23.0 / 18.0 * x * x + 93.0 / 108.0 * x.powi(3)
        - 77.0 / 108.0 * x.powi(4);
    let lcoef = 5.0 / 18.0 * x.powi(3) - 10.0 / 27.0 * x.powi(4) + 1.0 / 81.0 * x.powi(5);
    Ok(num / s + lcoef * log / (s * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cp2MetricCoeffs {
    pub lambda: f64,
    pub f: f64,
    pub h: f64,
    /// `(128π²/5) f/λ²`, the `dλ²` coefficient.
    pub g_rr_coeff: f64,
    /// `(128π²/5) h/λ²`, the `g_FS` coefficient.
    pub g_fs_coeff: f64,
}

pub fn cp2_metric(lambda: f64) -> Result<Cp2MetricCoeffs> {
    let f = f_coeff(lambda)?;
    let h = h_coeff(lambda)?;
    let l2 = lambda * lambda;
    Ok(Cp2MetricCoeffs {
        lambda,
        f,
        h,
        g_rr_coeff: HYPERBOLIC_CONSTANT * f / l2,
        g_fs_coeff: HYPERBOLIC_CONSTANT * h / l2,
    })
}

/// Closed form against quadrature at one point of the family.
///
/// The radial comparison is for `dA_t/dt`, so the closed side is
/// `g_rr_coeff · (dλ/dt)² = g_rr_coeff · t²/λ²`. The tangential comparison
/// is for a unit covector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub t: f64,
    pub lambda: f64,
    pub closed_radial: f64,
    pub quad_radial: f64,
    pub quad_radial_err: f64,
    pub rel_err_radial: f64,
    pub closed_tangential: f64,
    pub quad_tangential: f64,
    pub quad_tangential_err: f64,
    pub rel_err_tangential: f64,
    /// Radial value from [`f_legacy`].
    pub legacy_radial: f64,
    /// `quad_radial / legacy_radial`.
    pub legacy_radial_ratio: f64,
    /// The ratio explained by the missing factor: `(1 − λ²)⁻² = t⁻⁴`.
    pub legacy_radial_ratio_predicted: f64,
    /// Tangential value from [`h_legacy`].
    pub legacy_tangential: f64,
    /// `quad_tangential − legacy_tangential`.
    pub legacy_tangential_offset: f64,
    /// The offset explained by the `x⁵` coefficient:
    /// `(128π²/5) (9/81) x⁵ L / ((1−x)² λ²)`.
    pub legacy_tangential_offset_predicted: f64,
    pub converged: bool,
    /// Set when either relative error exceeds [`CROSSCHECK_TOL`].
    pub diverged: bool,
}

impl CrossCheck {
    /// Relative mismatch between the observed legacy discrepancy and its
    /// predicted form, worst of radial and tangential.
    pub fn legacy_discrepancy_mismatch(&self) -> f64 {
        let r = (self.legacy_radial_ratio / self.legacy_radial_ratio_predicted - 1.0).abs();
        let scale = self.quad_tangential.abs().max(self.legacy_tangential.abs());
        let t = (self.legacy_tangential_offset - self.legacy_tangential_offset_predicted).abs() / scale;
        r.max(t)
    }
}

pub fn crosscheck(t: f64, scheme: &QuadratureScheme) -> Result<CrossCheck> {
    if !(t > 0.0 && t <= T_MAX) {
        return Err(Error::Domain(format!(
            "t = {t} outside the validated window (0, {T_MAX}]"
        )));
    }
    let p = Cp2Params::new(t)?;
    let lambda = p.lambda();
    let l2 = lambda * lambda;
    let x = l2;
    let jac = t * t / l2;
    let m = cp2_metric(lambda)?;
    let quad_r = cp2_radial_gram(&p, scheme)?;
    let mu = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let quad_t = cp2_tangential_gram(&p, &mu, &mu, scheme)?;

    let closed_radial = m.g_rr_coeff * jac;
    let closed_tangential = m.g_fs_coeff;
    let rel = |q: f64, c: f64| (q - c).abs() / c.abs();
    let rel_err_radial = rel(quad_r.value, closed_radial);
    let rel_err_tangential = rel(quad_t.value, closed_tangential);

    let legacy_radial = HYPERBOLIC_CONSTANT * f_legacy(lambda)? / l2 * jac;
    let legacy_tangential = HYPERBOLIC_CONSTANT * h_legacy(lambda)? / l2;
    let s = 1.0 - x;
    let log = (x / (3.0 - 2.0 * x)).ln();
    Ok(CrossCheck {
        t,
        lambda,
        closed_radial,
        quad_radial: quad_r.value,
        quad_radial_err: quad_r.err,
        rel_err_radial,
        closed_tangential,
        quad_tangential: quad_t.value,
        quad_tangential_err: quad_t.err,
        rel_err_tangential,
        legacy_radial,
        legacy_radial_ratio: quad_r.value / legacy_radial,
        legacy_radial_ratio_predicted: 1.0 / (s * s),
        legacy_tangential,
        legacy_tangential_offset: quad_t.value - legacy_tangential,
        legacy_tangential_offset_predicted: HYPERBOLIC_CONSTANT * (9.0 / 81.0) * x.powi(5) * log
            / (s * s * l2),
        converged: quad_r.converged && quad_t.converged,
        diverged: !(rel_err_radial < CROSSCHECK_TOL && rel_err_tangential < CROSSCHECK_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from 60-digit evaluation of the closed forms.
    const REF: &[(f64, f64, f64, f64, f64)] = &[
        // (λ, f, h, f_legacy, h_legacy)
        (0.5, 1.2028752670819770069, 0.66392540566596983408, 0.67661733773361206637, 0.66436957717310603117),
        (0.6, 1.3175035512086840403, 0.51908036358946144375, 0.5396494545750769829, 0.52210798081855133079),
        (0.9, 2.0195081398845308223, 0.060404868360256927004, 0.072904243849831562686, 0.63220373745118053397),
        (0.97, 2.3325224960205861009, 0.0063211840557079241296, 0.008147057899325663339, 4.0561618725330150705),
        (0.999, 2.4940149606889064283, 7.4835213477288569247e-6, 9.9660862769278307766e-6, 164.9256831082293831),
    ];

    #[test]
    fn coefficients_match_multiprecision_reference() {
        for &(l, f, h, fl, hl) in REF {
            assert_relative_eq!(f_coeff(l).unwrap(), f, max_relative = 1e-12);
            assert_relative_eq!(h_coeff(l).unwrap(), h, max_relative = 1e-11);
            if l < 0.95 {
                assert_relative_eq!(f_legacy(l).unwrap(), fl, max_relative = 1e-11);
                assert_relative_eq!(h_legacy(l).unwrap(), hl, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn derivatives_match_multiprecision_reference() {
        // (λ, f', h', h'')
        let refs = [
            (0.5, 0.96570548408326120781, -1.3372080326313275013, -2.4148880182742128111),
            (0.6, 1.3462325261016009721, -1.5478668187279818722, -1.6998644148241885577),
            (0.9, 3.8467694440728159344, -1.0791970404627992158, 7.2313813945603604152),
            (0.97, 5.1951023651237782285, -0.4076546135882155606, 12.247206210886643236),
            (0.999, 5.9701178161808629857, -0.014950585363694445254, 14.901255955078495768),
        ];
        for (l, df, dh, d2h) in refs {
            assert_relative_eq!(f_jet(l).unwrap().d1, df, max_relative = 1e-9);
            assert_relative_eq!(h_jet(l).unwrap().d1, dh, max_relative = 1e-9);
            assert_relative_eq!(h_jet(l).unwrap().d2, d2h, max_relative = 1e-8);
        }
    }

    #[test]
    fn series_and_direct_agree_at_switch() {
        let l = 1.0 - DELTA_SWITCH;
        let lj = Jet::variable(l);
        for (d, s) in [
            (f_direct(lj), series(lj, &RADIAL_SERIES)),
            (h_direct(lj), series(lj, &FIBER_SERIES)),
        ] {
            assert_relative_eq!(d.v, s.v, max_relative = 1e-11);
            assert_relative_eq!(d.d1, s.d1, max_relative = 1e-9);
            assert_relative_eq!(d.d2, s.d2, max_relative = 1e-7);
        }
    }

    #[test]
    fn collar_limit() {
        for &l in &[1e-4, 1e-3, 0.01, 0.05, 0.1] {
            let f = f_coeff(l).unwrap();
            let h = h_coeff(l).unwrap();
            assert!((f - 1.0).abs() <= 3.0 * l * l, "f({l}) = {f}");
            assert!((h - 1.0).abs() <= 3.0 * l * l, "h({l}) = {h}");
        }
        assert!((f_coeff(1e-4).unwrap() - 1.0).abs() < 1e-7);
        assert!((h_coeff(1e-4).unwrap() - 1.0).abs() < 1e-7);
        // leading corrections +2λ²/3 and −4λ²/3
        let l = 1e-3;
        assert_relative_eq!((f_coeff(l).unwrap() - 1.0) / (l * l), 2.0 / 3.0, max_relative = 1e-5);
        assert_relative_eq!((h_coeff(l).unwrap() - 1.0) / (l * l), -4.0 / 3.0, max_relative = 1e-5);
    }

    #[test]
    fn metric_collar_constant() {
        let m = cp2_metric(1e-4).unwrap();
        assert_relative_eq!(m.g_rr_coeff * 1e-8, HYPERBOLIC_CONSTANT, max_relative = 1e-6);
        assert_relative_eq!(m.g_fs_coeff / m.g_rr_coeff, 1.0, max_relative = 1e-6);
        let m = cp2_metric(0.6).unwrap();
        assert_relative_eq!(m.g_rr_coeff, 924.67476248605064327, max_relative = 1e-12);
        assert_relative_eq!(m.g_fs_coeff, 364.3106020267813779, max_relative = 1e-12);
    }

    #[test]
    fn positive_and_continuous_on_grid() {
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..2000 {
            let l = k as f64 / 2000.0;
            let f = f_coeff(l).unwrap();
            let h = h_coeff(l).unwrap();
            assert!(f > 0.0 && h > 0.0, "λ = {l}");
            if let Some((pf, ph)) = prev {
                assert!((f - pf).abs() < 0.01 && (h - ph).abs() < 0.01, "jump at λ = {l}");
            }
            prev = Some((f, h));
        }
    }

    #[test]
    fn domain_errors() {
        for l in [0.0, 1.0, -0.3, f64::NAN] {
            assert!(matches!(f_coeff(l), Err(Error::Domain(_))));
            assert!(matches!(h_legacy(l), Err(Error::Domain(_))));
        }
        assert!(crosscheck(0.99999, &QuadratureScheme::default()).is_err());
        assert!(crosscheck(0.0, &QuadratureScheme::default()).is_err());
    }

    #[test]
    fn crosscheck_at_point_eight() {
        let c = crosscheck(0.8, &QuadratureScheme::default()).unwrap();
        assert!(c.rel_err_radial < 1e-3 && c.rel_err_tangential < 1e-3, "{c:?}");
        assert!(!c.diverged && c.converged);
        assert!(c.legacy_discrepancy_mismatch() < 1e-8, "{c:?}");
    }

    #[test]
    fn crosscheck_near_reducible_point() {
        let c = crosscheck(0.05, &QuadratureScheme::default()).unwrap();
        // leading behaviour 64π² t²
        let lead = 64.0 * std::f64::consts::PI.powi(2) * 0.05 * 0.05;
        assert_relative_eq!(c.quad_radial, lead, max_relative = 1e-2);
        assert_relative_eq!(c.quad_radial / c.closed_radial, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn crosscheck_reports_near_boundary() {
        let c = crosscheck(0.99, &QuadratureScheme::default()).unwrap();
        assert!(c.quad_radial.is_finite() && c.closed_radial.is_finite());
    }
}
