use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    Identical,
    Heterogeneous,
}

/// Which sphere the run lives on. Real runs use real skew-symmetric
/// `Ω`, `W0` and real initial data, and report angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Complex,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub seed: u64,
    pub omega_mode: OmegaMode,
    pub field: Field,
    pub omega_range: f64,
    pub w0_range: f64,
    pub w1_range: f64,
    pub init_margin: f64,
    pub renormalize: bool,
    pub record_stride: usize,
    pub tail_fraction: f64,
    pub quadruples: usize,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub kappa0_values: Vec<f64>,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

pub const DEFAULT_REPLICATES: usize = 5;

/// On-disk schema shared by run and sweep files.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    d: usize,
    #[serde(rename = "N", alias = "n")]
    n: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    t_final: f64,
    kappa0: Option<f64>,
    #[serde(default)]
    kappa1: f64,
    seed: u64,
    #[serde(default = "default_omega_mode")]
    omega_mode: OmegaMode,
    #[serde(default = "default_field")]
    field: Field,
    #[serde(default = "default_omega_range")]
    omega_range: f64,
    #[serde(default = "default_w0_range")]
    w0_range: f64,
    #[serde(default)]
    w1_range: f64,
    #[serde(default = "default_init_margin")]
    init_margin: f64,
    #[serde(default)]
    renormalize: bool,
    #[serde(default = "default_stride")]
    record_stride: usize,
    #[serde(default = "default_tail_fraction")]
    tail_fraction: f64,
    #[serde(default = "default_quadruples")]
    quadruples: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    kappa0_values: Option<Vec<f64>>,
    replicates: Option<usize>,
}

fn default_dt() -> f64 {
    0.02
}
fn default_omega_mode() -> OmegaMode {
    OmegaMode::Identical
}
fn default_field() -> Field {
    Field::Complex
}
fn default_omega_range() -> f64 {
    1.0
}
fn default_w0_range() -> f64 {
    0.1
}
fn default_init_margin() -> f64 {
    0.9
}
fn default_stride() -> usize {
    1
}
fn default_tail_fraction() -> f64 {
    0.2
}
fn default_quadruples() -> usize {
    20
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Read and validate a run or sweep file. A file with `kappa0_values` is a sweep.
pub fn parse_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text).map_err(|message| Error::Config {
        path: path.to_path_buf(),
        message,
    })
}

/// As [`parse_config`] on in-memory text; errors are bare messages.
pub fn parse_config_str(text: &str) -> std::result::Result<Config, String> {
    let raw: Raw = toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())?;
    let base = RunConfig {
        d: raw.d,
        n: raw.n,
        dt: raw.dt,
        t_final: raw.t_final,
        kappa0: match (raw.kappa0, &raw.kappa0_values) {
            (Some(k), _) => k,
            (None, Some(v)) if !v.is_empty() => v[0],
            _ => return Err("missing field `kappa0`".into()),
        },
        kappa1: raw.kappa1,
        seed: raw.seed,
        omega_mode: raw.omega_mode,
        field: raw.field,
        omega_range: raw.omega_range,
        w0_range: raw.w0_range,
        w1_range: raw.w1_range,
        init_margin: raw.init_margin,
        renormalize: raw.renormalize,
        record_stride: raw.record_stride,
        tail_fraction: raw.tail_fraction,
        quadruples: raw.quadruples,
        output_dir: raw.output_dir,
    };
    base.validate()?;
    match raw.kappa0_values {
        None => {
            if raw.replicates.is_some() {
                return Err("`replicates` is only valid alongside `kappa0_values`".into());
            }
            Ok(Config::Run(base))
        }
        Some(values) => {
            let sweep = SweepConfig {
                base,
                kappa0_values: values,
                replicates: raw.replicates.unwrap_or(DEFAULT_REPLICATES),
            };
            sweep.validate()?;
            Ok(Config::Sweep(sweep))
        }
    }
}

impl RunConfig {
    /// The `minimal` config of the documentation with every default filled in.
    pub fn minimal(d: usize, n: usize, kappa0: f64, t_final: f64, seed: u64) -> Self {
        Self {
            d,
            n,
            dt: default_dt(),
            t_final,
            kappa0,
            kappa1: 0.0,
            seed,
            omega_mode: default_omega_mode(),
            field: default_field(),
            omega_range: default_omega_range(),
            w0_range: default_w0_range(),
            w1_range: 0.0,
            init_margin: default_init_margin(),
            renormalize: false,
            record_stride: default_stride(),
            tail_fraction: default_tail_fraction(),
            quadruples: default_quadruples(),
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.n == 0 {
            return Err("`N` must be at least 1".into());
        }
        if self.field == Field::Real && self.d == 0 {
            return Err("real runs need d >= 1".into());
        }
        for (name, v) in [
            ("dt", self.dt),
            ("t_final", self.t_final),
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
            ("omega_range", self.omega_range),
            ("w0_range", self.w0_range),
            ("w1_range", self.w1_range),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("`{name}` must be finite and nonnegative, got {v}"));
            }
        }
        if !(self.dt > 0.0) {
            return Err("`dt` must be positive".into());
        }
        if !(self.init_margin > 0.0 && self.init_margin < 1.0) {
            return Err(format!("`init_margin` must lie in (0, 1), got {}", self.init_margin));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(format!("`tail_fraction` must lie in (0, 1], got {}", self.tail_fraction));
        }
        if self.record_stride == 0 {
            return Err("`record_stride` must be at least 1".into());
        }
        if self.field == Field::Real && (self.kappa1 != 0.0 || self.w1_range != 0.0) {
            return Err("real runs have a single coupling: `kappa1` and `w1_range` must be 0".into());
        }
        crate::integrator::IntegrationPlan::new(self.dt, self.t_final)
            .map(|_| ())
            .map_err(|e| e.to_string())
    }

    /// `key=value` lines echoing every field.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mode = match self.omega_mode {
            OmegaMode::Identical => "identical",
            OmegaMode::Heterogeneous => "heterogeneous",
        };
        let field = match self.field {
            Field::Complex => "complex",
            Field::Real => "real",
        };
        let _ = writeln!(s, "config.d={}", self.d);
        let _ = writeln!(s, "config.N={}", self.n);
        let _ = writeln!(s, "config.dt={}", self.dt);
        let _ = writeln!(s, "config.t_final={}", self.t_final);
        let _ = writeln!(s, "config.kappa0={}", self.kappa0);
        let _ = writeln!(s, "config.kappa1={}", self.kappa1);
        let _ = writeln!(s, "config.seed={}", self.seed);
        let _ = writeln!(s, "config.omega_mode={mode}");
        let _ = writeln!(s, "config.field={field}");
        let _ = writeln!(s, "config.omega_range={}", self.omega_range);
        let _ = writeln!(s, "config.w0_range={}", self.w0_range);
        let _ = writeln!(s, "config.w1_range={}", self.w1_range);
        let _ = writeln!(s, "config.init_margin={}", self.init_margin);
        let _ = writeln!(s, "config.renormalize={}", self.renormalize);
        let _ = writeln!(s, "config.record_stride={}", self.record_stride);
        let _ = writeln!(s, "config.tail_fraction={}", self.tail_fraction);
        let _ = writeln!(s, "config.quadruples={}", self.quadruples);
        let _ = writeln!(s, "config.output_dir={}", self.output_dir.display());
        s
    }
}

impl SweepConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let v = &self.kappa0_values;
        if v.is_empty() {
            return Err("`kappa0_values` must be nonempty".into());
        }
        if v.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err("`kappa0_values` must be positive".into());
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err("`kappa0_values` must be strictly ascending".into());
        }
        if self.replicates == 0 {
            return Err("`replicates` must be at least 1".into());
        }
        self.base.validate()
    }
}
