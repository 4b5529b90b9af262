//! Experiment configuration: a flat `key = value` file plus flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use reglab_core::{OperatorExpr, PeriodicSeq, C64};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectra,
    Radius,
    Resolvent,
    Gadget,
    Extend,
    Apostol,
    Ransford,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Spectra,
        Suite::Radius,
        Suite::Resolvent,
        Suite::Gadget,
        Suite::Extend,
        Suite::Apostol,
        Suite::Ransford,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Spectra => "spectra",
            Suite::Radius => "radius",
            Suite::Resolvent => "resolvent",
            Suite::Gadget => "gadget",
            Suite::Extend => "extend",
            Suite::Apostol => "apostol",
            Suite::Ransford => "ransford",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::EACH
            .iter()
            .copied()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| field_err("suite", format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(field_err("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Shift,
    WeightedShift,
    Diagonal,
}

impl FromStr for Family {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shift" => Ok(Family::Shift),
            "weighted-shift" => Ok(Family::WeightedShift),
            "diagonal" => Ok(Family::Diagonal),
            _ => Err(field_err(
                "op",
                format!("unknown family `{s}` (shift, weighted-shift, diagonal)"),
            )),
        }
    }
}

/// Operator descriptor: `scale * family(weights)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub family: Family,
    pub weights: Vec<f64>,
    pub scale: f64,
}

impl OperatorSpec {
    pub fn build(&self) -> Result<OperatorExpr, ConfigError> {
        let bad = |e: reglab_core::Error| field_err("weights", e.to_string());
        let base = match self.family {
            Family::Shift => OperatorExpr::shift(),
            Family::WeightedShift => OperatorExpr::weighted_shift(&self.weights).map_err(bad)?,
            Family::Diagonal => OperatorExpr::diagonal(PeriodicSeq::periodic_real(&self.weights).map_err(bad)?),
        };
        Ok(if self.scale == 1.0 {
            base
        } else {
            base.scaled(C64::new(self.scale, 0.0))
        })
    }

    /// Short label used in check names.
    pub fn label(&self) -> String {
        let body = match self.family {
            Family::Shift => "shift".to_string(),
            Family::WeightedShift => format!("weighted-shift({})", join(&self.weights)),
            Family::Diagonal => format!("diagonal({})", join(&self.weights)),
        };
        if self.scale == 1.0 {
            body
        } else {
            format!("{}*{body}", self.scale)
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub op: OperatorSpec,
    pub lambdas: Vec<C64>,
    /// Window size for Moore-Penrose and kernel windows.
    pub n: usize,
    pub kmax: usize,
    pub ransford_n: usize,
    /// Residual tolerance for the identity checks.
    pub tol: f64,
    pub seed: u64,
    pub budget: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
}

/// Eight points in `|lambda| <= 0.9`.
pub fn default_lambda_grid() -> Vec<C64> {
    vec![
        C64::new(0.0, 0.0),
        C64::new(0.3, 0.0),
        C64::new(0.0, 0.5),
        C64::new(-0.6, 0.0),
        C64::new(0.9, 0.0),
        C64::new(0.45, 0.45),
        C64::new(0.0, -0.7),
        C64::new(-0.5, -0.5),
    ]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            op: OperatorSpec {
                family: Family::WeightedShift,
                weights: vec![1.0, 4.0],
                scale: 1.0,
            },
            lambdas: default_lambda_grid(),
            n: 64,
            kmax: 16,
            ransford_n: 1024,
            tol: 1e-9,
            seed: 42,
            budget: 800,
            out: None,
            format: Format::Csv,
            timing: false,
        }
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` and `i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(num(&t)?, 0.0));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(x),
    };
    match split {
        Some(i) => Ok(C64::new(num(&body[..i])?, imag(&body[i..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Compact form for check names: `0.3`, `0.5i`, `-0.5-0.5i`.
pub fn format_complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{}", z.re),
        (true, false) => format!("{}i", z.im),
        _ => format!("{}{:+}i", z.re, z.im),
    }
}

fn parse_list<T>(field: &str, v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(|p| f(p.trim()).map_err(|m| field_err(field, m)))
        .collect()
}

fn parse_num<T: FromStr>(field: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| field_err(field, format!("cannot parse `{v}`")))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "suite" => self.suite = value.parse()?,
            "op" => self.op.family = value.parse()?,
            "weights" => {
                self.op.weights = parse_list("weights", value, |p| p.parse().map_err(|_| format!("bad weight `{p}`")))?
            }
            "scale" => self.op.scale = parse_num("scale", value)?,
            "lambda" => self.lambdas = parse_list("lambda", value, parse_complex)?,
            "n" => self.n = parse_num("n", value)?,
            "kmax" => self.kmax = parse_num("kmax", value)?,
            "ransford_n" => self.ransford_n = parse_num("ransford_n", value)?,
            "tol" => self.tol = parse_num("tol", value)?,
            "seed" => self.seed = parse_num("seed", value)?,
            "budget" => self.budget = parse_num("budget", value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "timing" => self.timing = parse_num("timing", value)?,
            _ => return Err(field_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| field_err(&format!("line {}", lineno + 1), "expected key = value"))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(field_err("tol", "must be positive"));
        }
        if self.budget == 0 {
            return Err(field_err("budget", "must be at least 1"));
        }
        if self.kmax < 4 {
            return Err(field_err("kmax", "must be at least 4"));
        }
        if self.n < 8 {
            return Err(field_err("n", "must be at least 8"));
        }
        if self.ransford_n == 0 || !self.ransford_n.is_multiple_of(2) {
            return Err(field_err("ransford_n", "must be even and positive"));
        }
        if self.lambdas.is_empty() {
            return Err(field_err("lambda", "grid is empty"));
        }
        if let Some(z) = self.lambdas.iter().find(|z| z.norm() >= 1.0) {
            return Err(field_err(
                "lambda",
                format!("{} lies outside the unit disk", format_complex(*z)),
            ));
        }
        if !(self.op.scale.is_finite() && self.op.scale != 0.0) {
            return Err(field_err("scale", "must be finite and nonzero"));
        }
        if self.op.family != Family::Shift && self.op.weights.is_empty() {
            return Err(field_err("weights", "family needs at least one weight"));
        }
        self.op.build()?;
        Ok(())
    }

    /// `--out` if given, else `$OUTPUT_DIR/reglab-<suite>.<ext>` (default `.`).
    pub fn output_path(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        let dir = std::env::var_os("OUTPUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        dir.join(format!("reglab-{}.{}", self.suite, self.format.extension()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.3").unwrap(), C64::new(0.3, 0.0));
        assert_eq!(parse_complex("0.5i").unwrap(), C64::new(0.0, 0.5));
        assert_eq!(parse_complex("-0.5-0.5i").unwrap(), C64::new(-0.5, -0.5));
        assert_eq!(parse_complex("1e-3+2i").unwrap(), C64::new(1e-3, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert!(parse_complex("abc").is_err());
        for z in default_lambda_grid() {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn file_and_overrides() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# radius run\nop = shift\nlambda = 0, 0.3 # two points\nseed=7\n")
            .unwrap();
        assert_eq!(c.op.family, Family::Shift);
        assert_eq!(c.lambdas.len(), 2);
        assert_eq!(c.seed, 7);
        c.validate().unwrap();
    }

    #[test]
    fn diagnostics_name_the_field() {
        let mut c = ExperimentConfig::default();
        let e = c.apply_text("tol = -1").and_then(|_| c.validate()).unwrap_err();
        assert!(e.to_string().starts_with("tol:"));
        let e = c.apply_text("colour = red").unwrap_err();
        assert!(e.to_string().starts_with("colour:"));
        let mut c = ExperimentConfig::default();
        c.set("lambda", "0.3, 1.2").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("1.2"));
    }
}
