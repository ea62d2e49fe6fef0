//! Flat `key = value` run configuration, merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(
                f,
                "config line {l}, field `{}`: {}",
                self.field, self.message
            ),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const KEYS: &[&str] = &[
    "gamma",
    "R",
    "mu",
    "kappa",
    "v_minus",
    "u_minus",
    "theta_minus",
    "v_plus",
    "u_plus",
    "theta_plus",
    "tol_member",
    "tol_a",
    "tol_m",
    "out",
    "format",
    "mach_min",
    "mach_max",
    "points",
    "grid",
    "span",
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let k = raw.trim().replace('-', "_");
    KEYS.iter()
        .copied()
        .find(|&c| c == k || (c == "R" && k == "r"))
}

/// Every setting is optional until a command asks for it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub v_minus: Option<f64>,
    pub u_minus: Option<f64>,
    pub theta_minus: Option<f64>,
    pub v_plus: Option<f64>,
    pub u_plus: Option<f64>,
    pub theta_plus: Option<f64>,
    pub tol_member: Option<f64>,
    pub tol_a: Option<f64>,
    pub tol_m: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub mach_min: Option<f64>,
    pub mach_max: Option<f64>,
    pub points: Option<usize>,
    pub grid: Option<usize>,
    pub span: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected csv or json, got `{other}`")),
        }
    }
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_no),
                    field: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = canonical_key(k).ok_or_else(|| ConfigError {
                line: Some(line_no),
                field: k.trim().to_string(),
                message: "unknown key".into(),
            })?;
            if let Some(prev) = seen.insert(key, line_no) {
                return Err(ConfigError {
                    line: Some(line_no),
                    field: key.to_string(),
                    message: format!("duplicate key (first set on line {prev})"),
                });
            }
            cfg.set(key, v.trim()).map_err(|message| ConfigError {
                line: Some(line_no),
                field: key.to_string(),
                message,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            field: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse_str(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(v: &str) -> Result<f64, String> {
            let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("`{v}` is not finite"))
            }
        }
        fn count(v: &str) -> Result<usize, String> {
            v.parse()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))
        }
        match key {
            "gamma" => self.gamma = Some(num(value)?),
            "R" => self.r = Some(num(value)?),
            "mu" => self.mu = Some(num(value)?),
            "kappa" => self.kappa = Some(num(value)?),
            "v_minus" => self.v_minus = Some(num(value)?),
            "u_minus" => self.u_minus = Some(num(value)?),
            "theta_minus" => self.theta_minus = Some(num(value)?),
            "v_plus" => self.v_plus = Some(num(value)?),
            "u_plus" => self.u_plus = Some(num(value)?),
            "theta_plus" => self.theta_plus = Some(num(value)?),
            "tol_member" => self.tol_member = Some(num(value)?),
            "tol_a" => self.tol_a = Some(num(value)?),
            "tol_m" => self.tol_m = Some(num(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse()?),
            "mach_min" => self.mach_min = Some(num(value)?),
            "mach_max" => self.mach_max = Some(num(value)?),
            "points" => self.points = Some(count(value)?),
            "grid" => self.grid = Some(count(value)?),
            "span" => self.span = Some(num(value)?),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Values set in `over` win.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        RunConfig {
            gamma: over.gamma.or(self.gamma),
            r: over.r.or(self.r),
            mu: over.mu.or(self.mu),
            kappa: over.kappa.or(self.kappa),
            v_minus: over.v_minus.or(self.v_minus),
            u_minus: over.u_minus.or(self.u_minus),
            theta_minus: over.theta_minus.or(self.theta_minus),
            v_plus: over.v_plus.or(self.v_plus),
            u_plus: over.u_plus.or(self.u_plus),
            theta_plus: over.theta_plus.or(self.theta_plus),
            tol_member: over.tol_member.or(self.tol_member),
            tol_a: over.tol_a.or(self.tol_a),
            tol_m: over.tol_m.or(self.tol_m),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            mach_min: over.mach_min.or(self.mach_min),
            mach_max: over.mach_max.or(self.mach_max),
            points: over.points.or(self.points),
            grid: over.grid.or(self.grid),
            span: over.span.or(self.span),
        }
    }

    pub fn require(&self, field: &str, v: Option<f64>) -> Result<f64, ConfigError> {
        v.ok_or_else(|| ConfigError {
            line: None,
            field: field.into(),
            message: "required but not set (config file or flag)".into(),
        })
    }
}
