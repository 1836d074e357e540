//! Information metric on parametrized families of energy densities.
//!
//! The metric `g_ij = ∫ ∂_i log e · ∂_j log e · e dμ` is computed by
//! quadrature for general families ([`measure`]), for the charge-one
//! instanton families on ℝ⁴ and ℂP² ([`instanton`]) and in closed form on
//! the ℂP² moduli space ([`closed_form`]). [`warp`] and [`geodesic`]
//! study the geometry of the resulting cohomogeneity-one metrics.

pub mod closed_form;
pub mod error;
pub mod extrapolate;
pub mod geodesic;
pub mod instanton;
pub mod jet;
pub mod measure;
pub mod quadrature;
pub mod warp;

pub use error::{Error, Result};
pub use jet::Jet;
pub use measure::{DensityFamily, Domain, GramMatrix, ParamBox, Weight};
pub use quadrature::{Compactification, Estimate, QuadratureScheme};
pub use warp::{CurvatureSample, Preset, WarpedMetric};
