//! Shared inputs for the pipeline benchmarks in `benches/`.

use infometric::instanton::BpstParams;

/// BPST parameter points used across benchmarks.
pub fn bpst_points() -> Vec<(&'static str, BpstParams)> {
    vec![
        ("unit", BpstParams::new(1.0, [0.0; 4]).expect("valid")),
        ("offset", BpstParams::new(2.0, [1.0, 1.0, 0.0, 0.0]).expect("valid")),
    ]
}

/// Vertex distances `√C · 0.02 / 2^k`, as used for the vertex limits.
pub fn vertex_radii() -> Vec<f64> {
    let unit = infometric::instanton::HYPERBOLIC_CONSTANT.sqrt();
    (0..7).map(|k| unit * 0.02 / 2f64.powi(k)).collect()
}
