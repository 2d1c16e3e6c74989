//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key must appear in
//! [`SCHEMA`] and apply to the selected experiment; anything else is a
//! configuration error, as is a repeated key. Numbers accept the `a/b`
//! fraction form, lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Regime;
use crate::solver::{SolveConfig, StepRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Deblur,
    DenoiseBoundary,
    Radon,
    ConvergenceSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::Deblur,
        Experiment::DenoiseBoundary,
        Experiment::Radon,
        Experiment::ConvergenceSweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Deblur => "deblur",
            Experiment::DenoiseBoundary => "denoise-boundary",
            Experiment::Radon => "radon",
            Experiment::ConvergenceSweep => "convergence-sweep",
        }
    }

    fn bit(&self) -> u8 {
        1 << (*self as u8)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

const DB: u8 = 1;
const BD: u8 = 2;
const RD: u8 = 4;
const SW: u8 = 8;
const ALL: u8 = DB | BD | RD | SW;

/// One documented configuration key.
#[derive(Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub doc: &'static str,
    experiments: u8,
    /// Per-experiment defaults in `Experiment::ALL` order; `None` where the
    /// key does not apply.
    defaults: [Option<&'static str>; 4],
}

impl KeySpec {
    pub fn applies_to(&self, e: Experiment) -> bool {
        self.experiments & e.bit() != 0
    }

    pub fn default_for(&self, e: Experiment) -> Option<&'static str> {
        self.defaults[e as usize]
    }
}

macro_rules! key {
    ($name:expr, $mask:expr, [$d0:expr, $d1:expr, $d2:expr, $d3:expr], $doc:expr) => {
        KeySpec {
            name: $name,
            doc: $doc,
            experiments: $mask,
            defaults: [$d0, $d1, $d2, $d3],
        }
    };
}

const N: Option<&str> = None;

/// The documented configuration schema. Default columns are deblur,
/// denoise-boundary, radon, convergence-sweep.
pub static SCHEMA: &[KeySpec] = &[
    key!("experiment", ALL, [Some("deblur"), Some("denoise-boundary"), Some("radon"), Some("convergence-sweep")],
        "experiment tag; must match the subcommand when given"),
    key!("output_dir", ALL, [Some("out/deblur"), Some("out/denoise-boundary"), Some("out/radon"), Some("out/convergence-sweep")],
        "directory receiving every output file and manifest.txt"),
    key!("seed", ALL, [Some("0"), Some("0"), Some("0"), Some("0")],
        "master noise seed; per-run seeds are drawn from it up front"),
    key!("emit_plots", ALL, [Some("false"), Some("false"), Some("false"), Some("false")],
        "also write gnuplot-ready CSVs under plots/"),
    key!("max_iter", ALL, [Some("3000"), Some("100000"), Some("2000"), Some("3000")],
        "iteration cap per solve"),
    key!("tol_mode", ALL, [Some("figure"), Some("certified"), Some("figure"), Some("figure")],
        "stopping tolerance: certified = 1e-8 (1 + |f|), figure = 1e-6 (1 + |f|), or a number"),
    key!("check_every", ALL, [Some("50"), Some("100"), Some("50"), Some("100")],
        "iterations between diagnostic records"),
    key!("step_ratio", ALL, [Some("1/3"), Some("1/3"), Some("1/3"), Some("3")],
        "primal/dual step ratio tau / (0.99 / L)"),
    key!("solver_seed", ALL, [Some("0"), Some("0"), Some("0"), Some("0")],
        "seed of the operator-norm power iteration"),
    key!("n", DB | RD, [Some("256"), N, Some("128"), N],
        "pixels per side of the reconstruction grid (before the one-pixel frame for radon)"),
    key!("h", DB | BD | SW, [Some("1"), Some("1/32"), N, Some("1/256")],
        "grid spacing"),
    key!("half_width", BD | SW, [N, Some("2.8"), N, Some("1.6")],
        "the grid covers [-half_width, half_width]^2 plus a one-pixel frame"),
    key!("alphas", DB, [Some("1, 0.25, 0.0625, 0.0156"), N, N, N],
        "regularization schedule"),
    key!("alpha", BD, [N, Some("0.3"), N, N],
        "regularization parameter"),
    key!("noise_variance_factor", DB, [Some("0.1"), N, N, N],
        "per-pixel noise variance as a multiple of alpha"),
    key!("disk_radius", DB | SW, [Some("64"), N, N, Some("1")],
        "radius of the disk phantom centered at the origin"),
    key!("blur_sigma", DB, [Some("3"), N, N, N],
        "Gaussian blur standard deviation"),
    key!("blur_truncation", DB, [Some("4"), N, N, N],
        "kernel truncation in units of blur_sigma"),
    key!("thresholds", DB | RD | SW, [Some("0.5"), N, Some("0.25, 0.5, 0.75"), Some("0.25, 0.5, 0.75")],
        "level-set thresholds for masks and convergence reports"),
    key!("c_outer", BD, [N, Some("2.4"), N, N], "outer radius of the C"),
    key!("c_inner", BD, [N, Some("1.35"), N, N], "inner radius of the C"),
    key!("c_opening_deg", BD, [N, Some("70"), N, N], "opening angle of the C in degrees"),
    key!("convex_radius", BD, [N, Some("2.6"), N, N], "radius of the convex Dirichlet disk"),
    key!("hug_outer", BD, [N, Some("2.55"), N, N], "outer radius of the nonconvex domain"),
    key!("hug_inner", BD, [N, Some("1.2"), N, N], "inner radius of the nonconvex domain"),
    key!("hug_opening_deg", BD, [N, Some("50"), N, N], "opening angle of the nonconvex domain"),
    key!("n_angles", RD, [N, N, Some("180"), N], "circle centers on the unit circle"),
    key!("n_radii", RD, [N, N, Some("100"), N], "radii sampled in (0, 2)"),
    key!("radon_epsilon", RD, [N, N, Some("0.05"), N], "support margin inside the unit disk"),
    key!("phantom_center", RD, [N, N, Some("0.2, 0"), N], "center of the mollified disk"),
    key!("phantom_radius", RD, [N, N, Some("0.1"), N], "plateau radius a of the mollified disk"),
    key!("phantom_mu", RD, [N, N, Some("0.3"), N], "mollifier width"),
    key!("deltas", RD, [N, N, Some("0.2, 0.1, 0.05, 0.025, 0"), N],
        "noise norms; alpha follows from the parameter rule, the floor applies at 0"),
    key!("eta", RD | SW, [N, N, Some("sqrt_pi"), Some("sqrt_pi")],
        "parameter-rule constant (sqrt_pi is accepted)"),
    key!("regime", SW, [N, N, N, Some("full-space")], "full-space, dirichlet or neumann"),
    key!("c_omega", SW, [N, N, N, Some("")], "Sobolev-Poincare constant, required for neumann"),
    key!("alpha0", SW, [N, N, N, Some("0.4")], "first parameter of the geometric ladder"),
    key!("alpha_factor", SW, [N, N, N, Some("0.5")], "ladder ratio alpha_{n+1} / alpha_n"),
    key!("levels", SW, [N, N, N, Some("5")], "number of ladder rungs"),
    key!("level_t", SW, [N, N, N, Some("0.5")], "threshold of the density profiles and curvature checks"),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| k.name == name)
}

/// Schema listing, one key per line.
pub fn schema_text() -> String {
    let mut out = String::new();
    for k in SCHEMA {
        let tags: Vec<&str> = Experiment::ALL
            .iter()
            .filter(|e| k.applies_to(**e))
            .map(|e| e.as_str())
            .collect();
        out.push_str(&format!("{:<22} [{}]\n    {}\n", k.name, tags.join(", "), k.doc));
        for e in Experiment::ALL {
            if let Some(d) = k.default_for(e).filter(|_| k.name != "experiment") {
                out.push_str(&format!("    default ({e}): {}\n", if d.is_empty() { "<unset>" } else { d }));
            }
        }
    }
    out
}

/// `(key, value, line number)` triples of a key-value text. Line numbers
/// are 1-based. A `#` starts a comment only as the first non-blank
/// character, so values may contain it.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if s == "sqrt_pi" {
        std::f64::consts::PI.sqrt()
    } else if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad_number(s))?;
        let b: f64 = b.trim().parse().map_err(|_| bad_number(s))?;
        a / b
    } else {
        s.parse().map_err(|_| bad_number(s))?
    };
    if !v.is_finite() {
        return Err(bad_number(s));
    }
    Ok(v)
}

fn bad_number(s: &str) -> Error {
    Error::Config(format!("`{s}` is not a finite number"))
}

/// Effective configuration of one experiment: every applicable key with its
/// value after defaults, file entries and overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// All defaults of an experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let values = SCHEMA
            .iter()
            .filter_map(|k| k.default_for(experiment).map(|d| (k.name.to_string(), d.to_string())))
            .collect();
        Self { experiment, values }
    }

    /// Defaults, then the entries of `text`, then `overrides`, validated.
    pub fn load(experiment: Experiment, text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        let mut seen = BTreeMap::new();
        for (k, v, line) in parse_kv(text)? {
            if let Some(prev) = seen.insert(k.clone(), line) {
                return Err(Error::Config(format!("line {line}: `{k}` already set on line {prev}")));
            }
            cfg.set(&k, &v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    /// Sets a key; hyphens in the name are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let spec = key_spec(&key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        if !spec.applies_to(self.experiment) {
            return Err(Error::Config(format!(
                "key `{key}` does not apply to the {} experiment",
                self.experiment
            )));
        }
        if key == "experiment" && value.parse::<Experiment>()? != self.experiment {
            return Err(Error::Config(format!(
                "config is for `{value}` but the {} experiment was requested",
                self.experiment
            )));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("key `{key}` is not set for the {} experiment", self.experiment)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_number(self.raw(key)?).map_err(|e| in_key(key, e))
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Config(format!("`{key}` must be positive, got {v}")))
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        let raw = self.raw(key)?;
        if raw.is_empty() {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.raw(key)?
            .parse()
            .map_err(|_| Error::Config(format!("`{key}` must be a nonnegative integer, got `{}`", self.raw(key).unwrap_or(""))))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.raw(key)?
            .parse()
            .map_err(|_| Error::Config(format!("`{key}` must be an unsigned integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::Config(format!("`{key}` must be true or false, got `{other}`"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key)?;
        let out: Vec<f64> = raw
            .split(',')
            .map(parse_number)
            .collect::<Result<_>>()
            .map_err(|e| in_key(key, e))?;
        if out.is_empty() {
            return Err(Error::Config(format!("`{key}` must not be empty")));
        }
        Ok(out)
    }

    pub fn point(&self, key: &str) -> Result<[f64; 2]> {
        match self.list(key)?.as_slice() {
            [x, y] => Ok([*x, *y]),
            _ => Err(Error::Config(format!("`{key}` must be a pair `x, y`"))),
        }
    }

    pub fn regime(&self) -> Result<Regime> {
        self.raw("regime")?
            .parse()
            .map_err(|_| Error::Config(format!("unknown regime `{}`", self.raw("regime").unwrap_or(""))))
    }

    pub fn output_dir(&self) -> Result<PathBuf> {
        let raw = self.raw("output_dir")?;
        if raw.is_empty() {
            return Err(Error::Config("`output_dir` must not be empty".into()));
        }
        Ok(PathBuf::from(raw))
    }

    pub fn emit_plots(&self) -> Result<bool> {
        self.bool("emit_plots")
    }

    /// Solver settings for data `f`.
    pub fn solve_config(&self, f: &crate::field::ScalarField) -> Result<SolveConfig> {
        let tol = match self.raw("tol_mode")? {
            "certified" => SolveConfig::certified(f).tol_residual,
            "figure" => SolveConfig::figure(f).tol_residual,
            other => {
                let v = parse_number(other).map_err(|e| in_key("tol_mode", e))?;
                if v < 0.0 {
                    return Err(Error::Config(format!("`tol_mode` must be nonnegative, got {v}")));
                }
                v
            }
        };
        let every = self.usize("check_every")?;
        if every == 0 {
            return Err(Error::Config("`check_every` must be positive".into()));
        }
        Ok(SolveConfig {
            max_iter: self.usize("max_iter")?,
            steps: StepRule::Ratio(self.positive("step_ratio")?),
            tol_residual: tol,
            check_every: every,
            seed: self.u64("solver_seed")?,
        })
    }

    /// `key = value` lines of every effective key, sorted by key.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Checks every typed value the experiment will read.
    pub fn validate(&self) -> Result<()> {
        self.output_dir()?;
        self.u64("seed")?;
        self.u64("solver_seed")?;
        self.emit_plots()?;
        self.solve_config(&crate::field::ScalarField::zeros(crate::field::Grid2D::new(1, 1, 1.0, [0.0, 0.0])?))?;
        super::validate_experiment(self)
    }
}

fn in_key(key: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("`{key}`: {m}")),
        other => other,
    }
}
