//! Geodesics of `F(λ) dλ² + H(λ) ds²`, the 2-strip over a unit-speed
//! fiber geodesic with arc parameter `s`.
//!
//! ```text
//! λ'' = (H' s'² − F' λ'²) / (2F),   s'' = −H' λ' s' / H
//! ```
//!
//! Energy `E = F λ'² + H s'²` and momentum `J = H s'` are conserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warp::WarpedMetric;

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Maximum number of halvings of a step before it is rejected.
const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPoint {
    pub tau: f64,
    pub lambda: f64,
    pub s: f64,
    pub dlambda: f64,
    pub ds: f64,
    pub energy: f64,
    pub momentum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTrace {
    pub points: Vec<GeodesicPoint>,
    /// Largest `|E − E₀| / E₀` along the trace.
    pub energy_drift: f64,
    /// Largest `|J − J₀| / |J₀|`, or `|J − J₀|` when `J₀ = 0`.
    pub momentum_drift: f64,
}

type State = [f64; 4];

fn rhs(m: &WarpedMetric, y: &State) -> Result<State> {
    let [l, _, dl, ds] = *y;
    let (f, h) = m.coefficients(l, 1.0)?;
    Ok([
        dl,
        ds,
        (h.d1 * ds * ds - f.d1 * dl * dl) / (2.0 * f.v),
        -h.d1 * dl * ds / h.v,
    ])
}

fn axpy(y: &State, a: f64, k: &State) -> State {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]]
}

fn rk4(m: &WarpedMetric, y: &State, dt: f64) -> Result<State> {
    let k1 = rhs(m, y)?;
    let k2 = rhs(m, &axpy(y, 0.5 * dt, &k1))?;
    let k3 = rhs(m, &axpy(y, 0.5 * dt, &k2))?;
    let k4 = rhs(m, &axpy(y, dt, &k3))?;
    let mut out = *y;
    for i in 0..4 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Domain("non-finite geodesic state".into()))
    }
}

/// One step of size `dt`, subdivided when a stage leaves the domain.
fn advance(m: &WarpedMetric, y: &State, dt: f64, step: usize) -> Result<State> {
    for halvings in 0..=MAX_HALVINGS {
        let parts = 1usize << halvings;
        let sub = dt / parts as f64;
        let mut cur = *y;
        let mut ok = true;
        for _ in 0..parts {
            match rk4(m, &cur, sub) {
                Ok(next) if next[0] > m.lower && next[0] < m.upper => cur = next,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(cur);
        }
    }
    Err(Error::StepRejected { step })
}

fn conserved(m: &WarpedMetric, y: &State) -> Result<(f64, f64)> {
    let (f, h) = m.coefficients(y[0], 1.0)?;
    Ok((f.v * y[2] * y[2] + h.v * y[3] * y[3], h.v * y[3]))
}

/// Integrates `steps` fixed steps of size `dt` from `start = (λ, s)` with
/// initial velocity `(λ', s')`.
pub fn geodesic_trace(
    m: &WarpedMetric,
    start: (f64, f64),
    velocity: (f64, f64),
    steps: usize,
    dt: f64,
) -> Result<GeodesicTrace> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if velocity.0 == 0.0 && velocity.1 == 0.0 || !(velocity.0.is_finite() && velocity.1.is_finite()) {
        return Err(Error::InvalidArgument("initial velocity must be nonzero and finite".into()));
    }
    if !start.1.is_finite() {
        return Err(Error::InvalidArgument("start s must be finite".into()));
    }
    let mut y: State = [start.0, start.1, velocity.0, velocity.1];
    let (e0, j0) = conserved(m, &y)?;
    let mut points = Vec::with_capacity(steps + 1);
    let mut energy_drift: f64 = 0.0;
    let mut momentum_drift: f64 = 0.0;
    let mut push = |y: &State, tau: f64, points: &mut Vec<GeodesicPoint>| -> Result<()> {
        let (e, j) = conserved(m, y)?;
        energy_drift = energy_drift.max((e - e0).abs() / e0);
        let dj = (j - j0).abs();
        momentum_drift = momentum_drift.max(if j0 != 0.0 { dj / j0.abs() } else { dj });
        points.push(GeodesicPoint {
            tau,
            lambda: y[0],
            s: y[1],
            dlambda: y[2],
            ds: y[3],
            energy: e,
            momentum: j,
        });
        Ok(())
    };
    push(&y, 0.0, &mut points)?;
    for k in 1..=steps {
        y = advance(m, &y, dt, k)?;
        push(&y, k as f64 * dt, &mut points)?;
    }
    Ok(GeodesicTrace {
        points,
        energy_drift,
        momentum_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hyp() -> WarpedMetric {
        WarpedMetric::hyperbolic_model(1.0).unwrap()
    }

    #[test]
    fn semicircle_conserves_energy() {
        let t = geodesic_trace(&hyp(), (0.5, 0.0), (0.0, 1.0), 10_000, DEFAULT_STEP).unwrap();
        assert!(t.energy_drift < 1e-8, "{}", t.energy_drift);
        assert!(t.momentum_drift < 1e-8, "{}", t.momentum_drift);
        // stays on λ² + s² = 1/4
        for p in t.points.iter().step_by(500) {
            assert_relative_eq!(p.lambda.hypot(p.s), 0.5, max_relative = 1e-8);
        }
    }

    #[test]
    fn radial_geodesic_keeps_s() {
        let t = geodesic_trace(&hyp(), (0.5, 0.2), (1.0, 0.0), 100, 1e-3).unwrap();
        assert!(t.points.iter().all(|p| p.s == 0.2 && p.momentum == 0.0));
        // λ'/λ is constant along radial geodesics
        let last = t.points.last().unwrap();
        assert_relative_eq!(last.lambda, 0.5 * (0.1f64 / 0.5).exp(), max_relative = 1e-10);
    }

    #[test]
    fn leaving_the_domain_is_rejected() {
        let r = geodesic_trace(&hyp(), (0.9, 0.0), (1.0, 0.0), 1000, 1e-2);
        assert!(matches!(r, Err(Error::StepRejected { .. })));
        assert!(geodesic_trace(&hyp(), (0.5, 0.0), (0.0, 0.0), 10, 1e-3).is_err());
        assert!(geodesic_trace(&hyp(), (1.5, 0.0), (0.0, 1.0), 10, 1e-3).is_err());
    }
}
