use approx::assert_relative_eq;
use infometric::closed_form::crosscheck;
use infometric::geodesic::geodesic_trace;
use infometric::instanton::{bpst_family, BpstParams, HYPERBOLIC_CONSTANT};
use infometric::measure::{info_gram, info_gram_fd, GaussianLocationScale};
use infometric::warp::arclength;
use infometric::{
    Compactification, DensityFamily, Domain, ParamBox, QuadratureScheme, WarpedMetric,
};
use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;

fn gaussian_scheme() -> QuadratureScheme {
    QuadratureScheme::default()
        .with_rel_tol(1e-12)
        .with_compactification(Compactification::TangentMap)
}

/// The Gaussian family in coordinates `φ = A θ`, with finite-difference
/// scores only.
struct Reparametrized {
    inverse: Matrix2<f64>,
}

impl Reparametrized {
    fn theta(&self, phi: &[f64]) -> [f64; 2] {
        let t = self.inverse * nalgebra::Vector2::new(phi[0], phi[1]);
        [t[0], t[1]]
    }
}

impl DensityFamily for Reparametrized {
    fn param_dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Domain {
        GaussianLocationScale.domain()
    }
    fn param_box(&self) -> ParamBox {
        ParamBox::unbounded(2)
    }
    fn density(&self, phi: &[f64], x: &[f64]) -> f64 {
        GaussianLocationScale.density(&self.theta(phi), x)
    }
    fn center(&self, phi: &[f64]) -> Vec<f64> {
        vec![self.theta(phi)[0]]
    }
    fn length_scale(&self, phi: &[f64]) -> f64 {
        self.theta(phi)[1]
    }
}

#[test]
fn reparametrization_covariance() {
    let theta = [0.4, 1.3];
    let g = info_gram(&GaussianLocationScale, &theta, &gaussian_scheme()).unwrap();
    let g = Matrix2::new(g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    for a in [Matrix2::new(2.0, 0.0, 0.0, 2.0), Matrix2::new(1.0, 0.5, 0.0, 1.0)] {
        let inverse = a.try_inverse().unwrap();
        let fam = Reparametrized { inverse };
        let phi = a * nalgebra::Vector2::new(theta[0], theta[1]);
        let gp = info_gram(&fam, &[phi[0], phi[1]], &gaussian_scheme()).unwrap();
        let expected = inverse.transpose() * g * inverse;
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (gp.get(i, j) - expected[(i, j)]).abs() < 1e-7 * expected.norm(),
                    "A = {a}: {} vs {}",
                    gp.get(i, j),
                    expected[(i, j)]
                );
            }
        }
    }
}

#[test]
fn analytic_and_finite_difference_grams_agree() {
    let theta = BpstParams::new(0.8, [0.2, 0.0, -0.5, 1.0]).unwrap().theta();
    let scheme = QuadratureScheme::default();
    let a = info_gram(&bpst_family(), &theta, &scheme).unwrap();
    let f = info_gram_fd(&bpst_family(), &theta, &scheme).unwrap();
    let diff: DMatrix<f64> = &a.entries - &f.entries;
    assert!(diff.abs().max() < 1e-6 * a.get(0, 0), "{diff}");
}

#[test]
fn hyperbolic_geodesic_distance() {
    // unit-speed geodesic from (0.1, 0) to (0.1, 0.3): a semicircle centred
    // at s = 0.15 on the boundary
    let m = WarpedMetric::hyperbolic_model(1.0).unwrap();
    let dir = (0.15f64, 0.1f64);
    let norm = dir.0.hypot(dir.1);
    let vel = (0.1 * dir.0 / norm, 0.1 * dir.1 / norm);
    let dt = 1e-3;
    let tr = geodesic_trace(&m, (0.1, 0.0), vel, 4000, dt).unwrap();
    let k = tr.points.iter().position(|p| p.s >= 0.3).unwrap();
    let (p0, p1) = (&tr.points[k - 1], &tr.points[k]);
    // cubic Hermite inverse for the crossing time
    let mut tau = p0.tau + dt * (0.3 - p0.s) / (p1.s - p0.s);
    for _ in 0..20 {
        let u = (tau - p0.tau) / dt;
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let s = h00 * p0.s + h10 * dt * p0.ds + h01 * p1.s + h11 * dt * p1.ds;
        let ds = ((6.0 * u * u - 6.0 * u) * p0.s
            + (3.0 * u * u - 4.0 * u + 1.0) * dt * p0.ds
            + (-6.0 * u * u + 6.0 * u) * p1.s
            + (3.0 * u * u - 2.0 * u) * dt * p1.ds)
            / dt;
        tau -= (s - 0.3) / ds;
    }
    let expected = (1.0f64 + 0.3 * 0.3 / (2.0 * 0.1 * 0.1)).acosh();
    assert_relative_eq!(tau, expected, max_relative = 1e-9);
}

#[test]
fn info_geodesics_conserve_energy_and_momentum() {
    let m = WarpedMetric::info_cp2();
    let tr = geodesic_trace(&m, (0.4, 0.0), (0.01, 0.02), 2000, 1e-3).unwrap();
    assert!(tr.energy_drift < 1e-8 && tr.momentum_drift < 1e-8, "{tr:?}");
}

#[test]
fn info_arclength_matches_collar_growth() {
    let m = WarpedMetric::info_cp2();
    let near = arclength(&m, 1e-6, 1e-5).unwrap();
    assert_relative_eq!(near, HYPERBOLIC_CONSTANT.sqrt() * 10f64.ln(), max_relative = 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bpst_scaling_equivariance(l in 0.2f64..5.0, c in 0.3f64..3.0, b0 in -2.0f64..2.0) {
        let scheme = QuadratureScheme::default();
        let theta = BpstParams::new(l, [b0, 0.5, 0.0, -1.0]).unwrap().theta();
        let scaled: Vec<f64> = theta.iter().map(|v| c * v).collect();
        let g = info_gram(&bpst_family(), &theta, &scheme).unwrap();
        let gs = info_gram(&bpst_family(), &scaled, &scheme).unwrap();
        let diff = (&gs.entries * (c * c) - &g.entries).abs().max();
        prop_assert!(diff <= 2.0 * scheme.rel_tol * g.get(0, 0));
    }

    #[test]
    fn bpst_center_independence(b in prop::array::uniform4(-10.0f64..10.0)) {
        let scheme = QuadratureScheme::default();
        let g0 = info_gram(&bpst_family(), &BpstParams::new(1.3, [0.0; 4]).unwrap().theta(), &scheme).unwrap();
        let g = info_gram(&bpst_family(), &BpstParams::new(1.3, b).unwrap().theta(), &scheme).unwrap();
        prop_assert!((&g.entries - &g0.entries).abs().max() <= 2.0 * scheme.rel_tol * g0.get(0, 0));
        prop_assert!(g.is_psd());
    }

    #[test]
    fn gaussian_fisher(m in -5.0f64..5.0, s in 0.05f64..20.0) {
        let g = info_gram(&GaussianLocationScale, &[m, s], &gaussian_scheme()).unwrap();
        prop_assert!((g.get(0, 0) * s * s - 1.0).abs() < 1e-8);
        prop_assert!((g.get(1, 1) * s * s - 2.0).abs() < 1e-8);
        prop_assert!((g.get(0, 1) * s * s).abs() < 1e-8);
    }

    #[test]
    fn arclength_additivity(a in 1e-4f64..0.3, db in 0.01f64..0.3, dc in 0.01f64..0.3) {
        let (b, c) = (a + db, (a + db + dc).min(1.0));
        for m in [WarpedMetric::info_cp2(), WarpedMetric::vertex_model(), WarpedMetric::hyperbolic_model(2.0).unwrap()] {
            let whole = arclength(&m, a, c).unwrap();
            let parts = arclength(&m, a, b).unwrap() + arclength(&m, b, c).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-10 * whole.max(1.0));
        }
    }

    #[test]
    fn closed_form_matches_quadrature(t in 0.05f64..0.95) {
        let c = crosscheck(t, &QuadratureScheme::default()).unwrap();
        prop_assert!(!c.diverged, "{c:?}");
        prop_assert!(c.legacy_discrepancy_mismatch() < 1e-6);
    }
}
