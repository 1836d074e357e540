use infometric::closed_form::crosscheck;
use infometric::geodesic::geodesic_trace;
use infometric::instanton::{
    bpst_family, model_integrals, BpstParams, CHARGE_ONE_ENERGY, HYPERBOLIC_CONSTANT,
};
use infometric::measure::{info_gram, total_mass};
use infometric::warp::{completeness_probe, primary_curvatures};
use infometric::{Preset, QuadratureScheme, WarpedMetric};
use serde_json::{json, Value};

use crate::args::{Command, PresetArg};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Cell, Check, Report};

pub const BPST_COLUMNS: &[&str] = &["i", "j", "value", "err", "expected"];
pub const CP2_COLUMNS: &[&str] = &[
    "t",
    "lambda",
    "closed_radial",
    "quad_radial",
    "quad_radial_err",
    "rel_err_radial",
    "closed_tangential",
    "quad_tangential",
    "quad_tangential_err",
    "rel_err_tangential",
    "legacy_radial_ratio",
    "legacy_radial_ratio_predicted",
    "legacy_tangential_offset",
    "legacy_tangential_offset_predicted",
    "converged",
];
pub const CURV_COLUMNS: &[&str] = &["lambda", "r", "sigma_TN", "sigma_TT1", "sigma_TT4"];
pub const CURV_JSON_COLUMNS: &[&str] = &["derivatives"];
pub const GEOD_COLUMNS: &[&str] = &["tau", "lambda", "s", "energy", "momentum"];
pub const PROBE_COLUMNS: &[&str] = &["eps", "arclength", "log_ratio", "converged"];
pub const FIXTURE_COLUMNS: &[&str] = &["name", "value", "expected", "error", "converged"];

/// Tolerances of the built-in checks.
const GRAM_DIAG_TOL: f64 = 1e-7;
const GRAM_OFFDIAG_TOL: f64 = 1e-9;
const CROSSCHECK_TOL: f64 = infometric::closed_form::CROSSCHECK_TOL;
const CURVATURE_TOL: f64 = 1e-9;
const DRIFT_TOL: f64 = 1e-8;
const SLOPE_TOL: f64 = 0.02;
const MODEL_INTEGRAL_TOL: f64 = 1e-10;
const MASS_TOL: f64 = 1e-9;

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let scheme = cfg.scheme();
    match cmd {
        Command::Bpst { lambda, center } => bpst(*lambda, center, &scheme),
        Command::Cp2 { t, t_grid } => {
            let ts = match (t, t_grid) {
                (_, Some(g)) => linear_grid(g)?,
                (Some(t), None) => vec![*t],
                (None, None) => vec![0.5],
            };
            cp2(&ts, &scheme)
        }
        Command::Curv {
            preset,
            lambda_grid,
        } => curv(*preset, &linear_grid(lambda_grid)?),
        Command::Geod {
            preset,
            start,
            vel,
            steps,
            dt,
        } => geod(*preset, pair(start, "start")?, pair(vel, "vel")?, *steps, *dt),
        Command::Probe {
            preset,
            lambda0,
            eps_grid,
        } => probe(*preset, *lambda0, &eps_list(eps_grid)?),
        Command::Fixtures => fixtures(&scheme),
        Command::Schema => Err(CliError::Usage("schema has no report".into())),
    }
}

fn pair(v: &[f64], what: &str) -> Result<(f64, f64), CliError> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("--{what} expects two comma-separated values"))),
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{s}` is not a number")))
}

fn grid_parts(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(CliError::Usage(format!("grid `{spec}` is not of the form a:b:n")));
    };
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("grid `{spec}`: count must be a positive integer")))?;
    if n == 0 {
        return Err(CliError::Usage(format!("grid `{spec}`: count must be positive")));
    }
    Ok((parse_f64(a)?, parse_f64(b)?, n))
}

/// `a:b:n`: `n` equally spaced points from `a` to `b` inclusive.
pub fn linear_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let (a, b, n) = grid_parts(spec)?;
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Comma list, or `a:b:n` geometric from `a` to `b` inclusive.
pub fn eps_list(spec: &str) -> Result<Vec<f64>, CliError> {
    if !spec.contains(':') {
        return spec.split(',').map(parse_f64).collect();
    }
    let (a, b, n) = grid_parts(spec)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(CliError::Usage(format!("geometric grid `{spec}` needs positive ends")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let ratio = (b / a).ln() / (n - 1) as f64;
    Ok((0..n).map(|k| a * (ratio * k as f64).exp()).collect())
}

fn metric(preset: PresetArg) -> Result<WarpedMetric, CliError> {
    Ok(match preset {
        PresetArg::Info => WarpedMetric::info_cp2(),
        PresetArg::Hyp => WarpedMetric::hyperbolic_model(1.0)?,
        PresetArg::Vertex => WarpedMetric::vertex_model(),
    })
}

fn preset_name(p: PresetArg) -> &'static str {
    match p {
        PresetArg::Info => "info",
        PresetArg::Hyp => "hyp",
        PresetArg::Vertex => "vertex",
    }
}

fn bpst(lambda: f64, center: &[f64], scheme: &QuadratureScheme) -> Result<Report, CliError> {
    let center: [f64; 4] = center
        .try_into()
        .map_err(|_| CliError::Usage("--center expects four comma-separated values".into()))?;
    let p = BpstParams::new(lambda, center)?;
    let g = info_gram(&bpst_family(), &p.theta(), scheme)?;
    let expected = HYPERBOLIC_CONSTANT / (lambda * lambda);
    let mut r = Report::new("bpst", BPST_COLUMNS);
    r.param("lambda", lambda);
    r.param("center", Cell::List(center.to_vec()));
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let e = if i == j { expected } else { 0.0 };
            if i == j {
                diag = diag.max((g.get(i, j) - e).abs() / expected);
            } else {
                off = off.max(g.get(i, j).abs() / expected);
            }
            r.rows
                .push(vec![i.into(), j.into(), g.get(i, j).into(), g.err[(i, j)].into(), e.into()]);
        }
    }
    r.summary("gram_diagonal", Cell::List((0..5).map(|i| g.get(i, i)).collect()));
    r.summary("hyperbolic_constant", HYPERBOLIC_CONSTANT);
    r.summary("min_eigenvalue", g.min_eigenvalue());
    r.summary("nodes", g.nodes);
    r.checks.push(Check::below("diagonal_rel_err", diag, GRAM_DIAG_TOL));
    r.checks.push(Check::below("offdiagonal_rel", off, GRAM_OFFDIAG_TOL));
    r.checks.push(Check::flag("converged", g.converged));
    Ok(r)
}

fn cp2(ts: &[f64], scheme: &QuadratureScheme) -> Result<Report, CliError> {
    let mut r = Report::new("cp2", CP2_COLUMNS);
    r.param("t", Cell::List(ts.to_vec()));
    for &t in ts {
        let c = crosscheck(t, scheme)?;
        r.rows.push(vec![
            c.t.into(),
            c.lambda.into(),
            c.closed_radial.into(),
            c.quad_radial.into(),
            c.quad_radial_err.into(),
            c.rel_err_radial.into(),
            c.closed_tangential.into(),
            c.quad_tangential.into(),
            c.quad_tangential_err.into(),
            c.rel_err_tangential.into(),
            c.legacy_radial_ratio.into(),
            c.legacy_radial_ratio_predicted.into(),
            c.legacy_tangential_offset.into(),
            c.legacy_tangential_offset_predicted.into(),
            c.converged.into(),
        ]);
        r.checks.push(Check::below(format!("rel_err_radial[t={t}]"), c.rel_err_radial, CROSSCHECK_TOL));
        r.checks.push(Check::below(
            format!("rel_err_tangential[t={t}]"),
            c.rel_err_tangential,
            CROSSCHECK_TOL,
        ));
        r.checks.push(Check::flag(format!("converged[t={t}]"), c.converged));
    }
    Ok(r)
}

fn curv(preset: PresetArg, lambdas: &[f64]) -> Result<Report, CliError> {
    let m = metric(preset)?;
    let mut r = Report::new("curv", CURV_COLUMNS);
    r.json_columns = CURV_JSON_COLUMNS.to_vec();
    r.param("preset", preset_name(preset));
    let derivs = if m.uses_finite_differences() {
        "finite_difference"
    } else {
        "analytic"
    };
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        let s = primary_curvatures(&m, l)?;
        r.rows.push(vec![
            s.lambda.into(),
            s.r.into(),
            s.sigma_TN.into(),
            s.sigma_TT1.into(),
            s.sigma_TT4.into(),
            derivs.into(),
        ]);
        let expected = match m.preset {
            Preset::HyperbolicModel => Some([-1.0 / m.scale; 3]),
            Preset::VertexModel => {
                let rr = s.r * s.r;
                Some([0.0, -2.0 / (3.0 * rr), 1.0 / (3.0 * rr)])
            }
            _ => None,
        };
        if let Some(e) = expected {
            let size = e.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            for (got, want) in s.sigmas().iter().zip(e) {
                worst = worst.max((got - want).abs() / size);
            }
        }
    }
    if matches!(m.preset, Preset::HyperbolicModel | Preset::VertexModel) {
        r.checks.push(Check::below("closed_form_rel_err", worst, CURVATURE_TOL));
    }
    Ok(r)
}

fn geod(
    preset: PresetArg,
    start: (f64, f64),
    vel: (f64, f64),
    steps: usize,
    dt: f64,
) -> Result<Report, CliError> {
    let m = metric(preset)?;
    let tr = geodesic_trace(&m, start, vel, steps, dt)?;
    let mut r = Report::new("geod", GEOD_COLUMNS);
    r.param("preset", preset_name(preset));
    r.param("start", Cell::List(vec![start.0, start.1]));
    r.param("vel", Cell::List(vec![vel.0, vel.1]));
    r.param("steps", steps);
    r.param("dt", dt);
    for p in &tr.points {
        r.rows
            .push(vec![p.tau.into(), p.lambda.into(), p.s.into(), p.energy.into(), p.momentum.into()]);
    }
    r.summary("energy_drift", tr.energy_drift);
    r.summary("momentum_drift", tr.momentum_drift);
    r.checks.push(Check::below("energy_drift", tr.energy_drift, DRIFT_TOL));
    r.checks.push(Check::below("momentum_drift", tr.momentum_drift, DRIFT_TOL));
    Ok(r)
}

fn probe(preset: PresetArg, lambda0: f64, eps: &[f64]) -> Result<Report, CliError> {
    let m = metric(preset)?;
    let p = completeness_probe(&m, lambda0, eps)?;
    let mut r = Report::new("probe", PROBE_COLUMNS);
    r.param("preset", preset_name(preset));
    r.param("lambda0", lambda0);
    for row in &p.rows {
        r.rows.push(vec![
            row.eps.into(),
            row.arclength.into(),
            (lambda0 / row.eps).ln().into(),
            true.into(),
        ]);
    }
    r.summary("log_slope", p.log_slope);
    if matches!(m.preset, Preset::InfoCp2 | Preset::HyperbolicModel) {
        let expected = m.scale.sqrt();
        r.summary("expected_slope", expected);
        r.checks.push(Check::below(
            "log_slope_rel_err",
            (p.log_slope - expected).abs() / expected,
            SLOPE_TOL,
        ));
    }
    Ok(r)
}

fn fixtures(scheme: &QuadratureScheme) -> Result<Report, CliError> {
    let mut r = Report::new("fixtures", FIXTURE_COLUMNS);
    let mi = model_integrals(f64::INFINITY, scheme)?;
    for (name, e) in [("I1", mi.i1), ("I2", mi.i2)] {
        let err = (e.value - 1.0 / 60.0).abs();
        r.rows
            .push(vec![name.into(), e.value.into(), (1.0 / 60.0).into(), err.into(), e.converged.into()]);
        r.checks.push(Check::below(format!("{name}_abs_err"), err, MODEL_INTEGRAL_TOL));
    }
    let p = BpstParams::new(1.0, [0.0; 4])?;
    let mass = total_mass(&bpst_family(), &p.theta(), scheme)?;
    let rel = (mass.value - CHARGE_ONE_ENERGY).abs() / CHARGE_ONE_ENERGY;
    r.rows.push(vec![
        "bpst_mass".into(),
        mass.value.into(),
        CHARGE_ONE_ENERGY.into(),
        rel.into(),
        mass.converged.into(),
    ]);
    r.checks.push(Check::below("bpst_mass_rel_err", rel, MASS_TOL));
    Ok(r)
}

/// Field names and types of every report, for downstream tooling.
pub fn schema() -> Value {
    let cols = |names: &[&str], ty: &dyn Fn(&str) -> &'static str| -> Value {
        Value::Array(names.iter().map(|n| json!({"name": n, "type": ty(n)})).collect())
    };
    let number = |_: &str| "number";
    let envelope = json!({
        "version": "string",
        "command": "string",
        "timestamp": "integer (unix seconds), absent with --no-timestamp",
        "params": "object",
        "columns": "array of string",
        "rows": "array of object keyed by column",
        "summary": "object",
        "checks": "array of {name, value, tol, passed}",
        "passed": "boolean",
    });
    json!({
        "version": crate::report::VERSION,
        "csv": "metadata lines starting with '#', then a header row and data rows; numbers carry 17 significant digits",
        "envelope": envelope,
        "commands": {
            "bpst": cols(BPST_COLUMNS, &|n| if n == "i" || n == "j" { "integer" } else { "number" }),
            "cp2": cols(CP2_COLUMNS, &|n| if n == "converged" { "boolean" } else { "number" }),
            "curv": {
                "csv": cols(CURV_COLUMNS, &number),
                "json_only": cols(CURV_JSON_COLUMNS, &|_| "string"),
            },
            "geod": cols(GEOD_COLUMNS, &number),
            "probe": cols(PROBE_COLUMNS, &|n| if n == "converged" { "boolean" } else { "number" }),
            "fixtures": cols(FIXTURE_COLUMNS, &|n| match n {
                "name" => "string",
                "converged" => "boolean",
                _ => "number",
            }),
        },
        "exit_codes": {"0": "all checks passed", "1": "usage, configuration or domain error", "2": "a tolerance check failed"},
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = linear_grid("0.1:0.3:3").unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.iter().zip([0.1, 0.2, 0.3]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(linear_grid("0.5:0.9:1").unwrap(), vec![0.5]);
        let g = eps_list("1e-3:1e-6:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] / 1e-6 - 1.0).abs() < 1e-12 && (g[1] / 1e-4 - 1.0).abs() < 1e-12);
        assert_eq!(eps_list("0.01,0.001").unwrap(), vec![0.01, 0.001]);
        for bad in ["1:2", "a:b:3", "0.1:0.2:0", "1:2:3:4"] {
            assert!(linear_grid(bad).is_err(), "{bad}");
        }
        assert!(eps_list("0:1e-3:3").is_err());
    }
}
