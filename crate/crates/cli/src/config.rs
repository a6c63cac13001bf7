//! Run configuration: defaults, JSON config files and command-line overrides.
//!
//! Precedence is defaults, then the `--config` file, then explicit flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use theta_bundle::bundles::{BundleSpec, BundleType, IntMat2};
use theta_bundle::theta_core::{Tau, TruncationPolicy};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(UsageError(format!("unknown format {other:?} (expected json or csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bundle: BundleSpec,
    pub k: u32,
    /// Overrides for named check tolerances.
    pub tolerances: BTreeMap<String, f64>,
    pub truncation: TruncationPolicy<f64>,
    /// Points per axis for `[0,1)^4` grids.
    pub grid: usize,
    /// Grid offset in cell units; `0.5` keeps the grid off the cube faces.
    pub grid_offset: f64,
    /// Random points for the rank check.
    pub rank_points: usize,
    /// Random samples per randomized check.
    pub samples: usize,
    pub fd_step: f64,
    /// Outer step of the exterior derivative in the closedness check.
    pub closedness_step: f64,
    /// Quadrature nodes per axis for period integrals.
    pub resolution: usize,
    pub seed: u64,
    pub format: Format,
    /// `[re, im]`; restricts the theta suite to one modular parameter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bundle: BundleSpec::Row { tag: "C".into(), k: Some(1) },
            k: 3,
            tolerances: BTreeMap::new(),
            truncation: TruncationPolicy::default(),
            grid: 5,
            grid_offset: 0.0,
            rank_points: 100,
            samples: 20,
            fd_step: 1e-5,
            closedness_step: 1e-3,
            resolution: 100,
            seed: 0,
            format: Format::Json,
            tau: None,
            inject_fault: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
    }

    /// Checks every field that does not depend on the command.
    pub fn validate(&self) -> Result<(), UsageError> {
        for (name, &v) in &self.tolerances {
            if !(v > 0.0) || !v.is_finite() {
                return Err(UsageError(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        TruncationPolicy::new(self.truncation.target_abs_error, self.truncation.max_terms).map_err(usage)?;
        if self.k == 0 {
            return Err(UsageError("k must be at least 1".into()));
        }
        if self.grid == 0 || self.rank_points == 0 || self.samples == 0 || self.resolution == 0 {
            return Err(UsageError("grid, rank_points, samples and resolution must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.grid_offset) {
            return Err(UsageError(format!("grid_offset must lie in [0, 1), got {}", self.grid_offset)));
        }
        for (name, h) in [("fd_step", self.fd_step), ("closedness_step", self.closedness_step)] {
            if !(h > 0.0) || !h.is_finite() {
                return Err(UsageError(format!("{name} must be positive, got {h}")));
            }
        }
        self.tau()?;
        self.resolve_bundle()?;
        Ok(())
    }

    pub fn resolve_bundle(&self) -> Result<BundleType<f64>, UsageError> {
        self.bundle.resolve().map_err(usage)
    }

    pub fn tau(&self) -> Result<Option<Tau<f64>>, UsageError> {
        self.tau.map(|[re, im]| Tau::new(Complex::new(re, im)).map_err(usage)).transpose()
    }

    /// The configured tolerance for `name`, else `default`.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

pub(crate) fn usage(e: theta_bundle::Error) -> UsageError {
    UsageError(e.to_string())
}

/// `TYPE[:k]`, or a path to a bundle JSON file when no table row matches.
pub fn parse_bundle_arg(arg: &str) -> Result<BundleSpec, UsageError> {
    let (tag, param) = match arg.split_once(':') {
        Some((t, p)) => (t, Some(p)),
        None => (arg, None),
    };
    if tag.parse::<theta_bundle::bundles::BundleTag>().is_ok() {
        let k = param
            .map(|p| p.parse::<i64>().map_err(|_| UsageError(format!("bad bundle parameter {p:?}"))))
            .transpose()?;
        return Ok(BundleSpec::Row { tag: tag.to_ascii_uppercase(), k });
    }
    let path = Path::new(arg);
    if path.exists() {
        return BundleSpec::load(path).map_err(usage);
    }
    Err(UsageError(format!("{arg:?} is neither a bundle type nor a readable file")))
}

/// Four comma-separated integers, row-major.
pub fn parse_matrix(arg: &str) -> Result<IntMat2, UsageError> {
    let entries: Vec<i64> = arg
        .split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|_| UsageError(format!("bad matrix entry {s:?} in {arg:?}"))))
        .collect::<Result<_, _>>()?;
    match entries[..] {
        [a, b, c, d] => Ok(IntMat2::new(a, b, c, d)),
        _ => Err(UsageError(format!("matrix needs 4 entries, got {}", entries.len()))),
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`; a bare `i` means `1i`.
pub fn parse_complex(arg: &str) -> Result<Complex<f64>, UsageError> {
    let bad = || UsageError(format!("cannot parse complex number {arg:?}"));
    let s: String = arg.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| Complex::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex::new(re.parse::<f64>().map_err(|_| bad())?, im))
}

/// Pulls `--tol.NAME=VALUE` and `--tol.NAME VALUE` out of `args`.
pub fn extract_tolerances(args: Vec<String>) -> Result<(Vec<String>, BTreeMap<String, f64>), UsageError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = BTreeMap::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = iter.next().ok_or_else(|| UsageError(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        if name.is_empty() {
            return Err(UsageError("--tol. needs a check name".into()));
        }
        let v: f64 = value.parse().map_err(|_| UsageError(format!("bad tolerance {value:?} for {name}")))?;
        tols.insert(name, v);
    }
    Ok((rest, tols))
}
