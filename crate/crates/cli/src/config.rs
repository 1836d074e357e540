//! Run configuration: flags over config file over defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use infometric::QuadratureScheme;

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_NODES: usize = 128;
const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);
const NODES_RANGE: (usize, usize) = (8, 1_000_000);

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rel_tol: f64,
    pub nodes: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

impl RunConfig {
    pub fn resolve(flags: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str| file.get(key).map(String::as_str);

        let rel_tol = match flags.tol {
            Some(t) => t,
            None => get("tol").map(|v| parse_value(v, "tol")).transpose()?.unwrap_or(DEFAULT_TOL),
        };
        let nodes = match flags.nodes {
            Some(n) => n,
            None => get("nodes")
                .map(|v| parse_value(v, "nodes"))
                .transpose()?
                .unwrap_or(DEFAULT_NODES),
        };
        let format = match flags.format {
            Some(f) => f,
            None => match get("format") {
                None | Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => return Err(CliError::Usage(format!("unknown format `{other}`"))),
            },
        };
        let out = flags.out.clone().or_else(|| get("out").map(PathBuf::from));
        let no_timestamp = flags.no_timestamp
            || get("no_timestamp")
                .map(|v| parse_value::<bool>(v, "no_timestamp"))
                .transpose()?
                .unwrap_or(false);

        if !(rel_tol >= TOL_RANGE.0 && rel_tol <= TOL_RANGE.1) {
            return Err(CliError::Usage(format!(
                "tol = {rel_tol} outside [{:e}, {:e}]",
                TOL_RANGE.0, TOL_RANGE.1
            )));
        }
        if !(NODES_RANGE.0..=NODES_RANGE.1).contains(&nodes) {
            return Err(CliError::Usage(format!(
                "nodes = {nodes} outside [{}, {}]",
                NODES_RANGE.0, NODES_RANGE.1
            )));
        }
        Ok(Self {
            rel_tol,
            nodes,
            format,
            out,
            timestamp: !no_timestamp,
        })
    }

    pub fn scheme(&self) -> QuadratureScheme {
        QuadratureScheme::default()
            .with_rel_tol(self.rel_tol)
            .with_radial_nodes(self.nodes)
    }
}

fn parse_value<T: std::str::FromStr>(v: &str, key: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}` has invalid value `{v}`")))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    const KEYS: [&str; 5] = ["tol", "nodes", "format", "out", "no_timestamp"];
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", n + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("infometric-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "# sweep\ntol = 1e-6\nnodes = 32\nformat = json\n").unwrap();
        let flags = GlobalArgs {
            config: Some(path.clone()),
            nodes: Some(64),
            ..GlobalArgs::default()
        };
        let c = RunConfig::resolve(&flags).unwrap();
        assert_eq!((c.rel_tol, c.nodes, c.format), (1e-6, 64, Format::Json));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn ranges_are_enforced() {
        for (tol, nodes) in [(Some(1e-15), None), (Some(0.1), None), (None, Some(4)), (None, Some(2_000_000))] {
            let flags = GlobalArgs {
                tol,
                nodes,
                ..GlobalArgs::default()
            };
            assert!(matches!(RunConfig::resolve(&flags), Err(CliError::Usage(_))));
        }
    }

    #[test]
    fn malformed_config() {
        assert!(parse_config("tol 1e-6").is_err());
        assert!(parse_config("seed = 3").is_err());
        assert_eq!(parse_config("  out = a.csv  # here").unwrap()["out"], "a.csv");
    }
}
