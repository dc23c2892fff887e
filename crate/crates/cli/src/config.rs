//! Flat `key=value` run configuration.
//!
//! Resolution order is built-in preset, then config file, then command-line
//! flags. Figure presets pin the parameters stated in their captions and
//! reject overrides that contradict them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use giant_core::model::{RateConstraint, WaveguideConfig};
use thiserror::Error;

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Preset,
    File { line: usize },
    Flag { index: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Preset => f.write_str("preset"),
            Origin::File { line } => write!(f, "line {line}"),
            Origin::Flag { index } => write!(f, "argument {index}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("experiment required")]
    MissingExperiment,
    #[error("{origin}: malformed entry '{text}' (expected key=value)")]
    Malformed { origin: Origin, text: String },
    #[error("{origin}: unknown key '{key}'")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: malformed value '{value}' for key '{key}': {reason}")]
    BadValue {
        origin: Origin,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{origin}: value {value} for key '{key}' out of range ({expected})")]
    OutOfRange {
        origin: Origin,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{origin}: '{key}={value}' contradicts the {preset} preset value {pinned}")]
    PresetConflict {
        origin: Origin,
        key: String,
        value: String,
        preset: ExperimentKind,
        pinned: String,
    },
    #[error("{origin}: experiment '{found}' conflicts with requested '{requested}'")]
    ExperimentConflict {
        origin: Origin,
        found: ExperimentKind,
        requested: ExperimentKind,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Rates,
    Decay,
    Entangle,
    Nonreciprocal,
    Search,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3,
    Fig4,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Rates,
        ExperimentKind::Decay,
        ExperimentKind::Entangle,
        ExperimentKind::Nonreciprocal,
        ExperimentKind::Search,
        ExperimentKind::Fig2a,
        ExperimentKind::Fig2b,
        ExperimentKind::Fig2c,
        ExperimentKind::Fig3,
        ExperimentKind::Fig4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Rates => "rates",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Entangle => "entangle",
            ExperimentKind::Nonreciprocal => "nonreciprocal",
            ExperimentKind::Search => "search",
            ExperimentKind::Fig2a => "fig2a",
            ExperimentKind::Fig2b => "fig2b",
            ExperimentKind::Fig2c => "fig2c",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
        }
    }

    /// Keys whose values the preset pins.
    fn pinned_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Fig2a => &["g", "n_sites", "kappa", "separations", "gamma1"],
            ExperimentKind::Fig2b | ExperimentKind::Fig2c => {
                &["g", "n_sites", "kappa", "separations", "gamma1"]
            }
            ExperimentKind::Fig4 => &["sites1", "sites2", "gamma11_j", "gamma22_j"],
            _ => &[],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Lattice placement of the connection sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Translate the geometry to the middle of the chain.
    Centered,
    /// Use the site indices as given.
    Explicit,
}

/// Inclusive uniform grid `start:step:count` or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let start: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
            let step: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
            let count: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
            if count == 0 {
                return Err("grid needs at least one point".into());
            }
            return Ok(Grid((0..count).map(|k| start + step * k as f64).collect()));
        }
        parse_list(s).map(Grid)
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let v: Result<Vec<T>, String> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("'{t}': {e}")))
        .collect();
    let v = v?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<[i64; 2], String> {
    let v: Vec<i64> = parse_list(s)?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err("expected two site indices 'a,b'".into()),
    }
}

/// A raw `key=value` entry and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Splits config text into settings; `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<Vec<Setting>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(split_entry(line, Origin::File { line: i + 1 })?);
    }
    Ok(out)
}

/// Parses `key=value` command-line overrides.
pub fn parse_flag_settings<S: AsRef<str>>(args: &[S]) -> Result<Vec<Setting>, ConfigError> {
    args.iter()
        .enumerate()
        .map(|(i, a)| split_entry(a.as_ref().trim(), Origin::Flag { index: i + 1 }))
        .collect()
}

fn split_entry(text: &str, origin: Origin) -> Result<Setting, ConfigError> {
    let Some((k, v)) = text.split_once('=') else {
        return Err(ConfigError::Malformed {
            origin,
            text: text.to_string(),
        });
    };
    let key = k.trim();
    if key.is_empty() {
        return Err(ConfigError::Malformed {
            origin,
            text: text.to_string(),
        });
    }
    Ok(Setting {
        key: key.to_string(),
        value: v.trim().to_string(),
        origin,
    })
}

/// Fully resolved run parameters. Frequencies are in units of `ξ`; keys
/// ending in `_j` are in units of the exchange coupling `j_eff`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub waveguide: WaveguideConfig,
    /// Atom transition frequency; defaults to `omega_c`.
    pub omega: Option<f64>,
    pub g: f64,
    pub sites1: [i64; 2],
    pub sites2: Option<[i64; 2]>,
    pub placement: Placement,
    /// Intrinsic decay in units of `ξ`.
    pub gamma1: f64,
    /// Pure dephasing in units of `ξ`.
    pub gamma2: f64,
    /// Single-atom sizes for decay runs.
    pub separations: Vec<u64>,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub t_step: f64,
    /// Window over which the lattice integrator is re-run at `dt/2`.
    pub lattice_check_tmax: f64,
    pub constraint: RateConstraint,
    pub constraint_label: String,
    pub max_span: u32,
    pub gamma1_grid_j: Grid,
    pub gamma2_grid_j: Grid,
    pub gamma11_j: Option<f64>,
    pub gamma22_j: Option<f64>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

/// Known keys and a one-line description, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "experiment name"),
    ("omega_c", "resonator frequency"),
    ("xi", "hopping strength (sets the unit)"),
    ("kappa", "per-resonator loss"),
    ("n_sites", "chain length"),
    ("omega", "atom transition frequency (default omega_c)"),
    ("g", "atom-site coupling"),
    ("sites1", "first atom connection sites 'a,b'"),
    ("sites2", "second atom connection sites 'a,b'"),
    ("place", "centered | explicit"),
    ("gamma1", "intrinsic decay rate"),
    ("gamma2", "pure dephasing rate"),
    ("separations", "single-atom sizes, comma separated"),
    ("tmax", "final time"),
    ("dt", "integrator step"),
    ("t_step", "output spacing"),
    ("lattice_check_tmax", "window of the lattice dt/2 self-check"),
    ("constraint", "named constraint or predicates like 'g11=0,u12!=0'"),
    ("max_span", "largest max-site minus min-site in a search"),
    ("gamma1_grid_j", "fidelity sweep of gamma1/j_eff: start:step:count or list"),
    ("gamma2_grid_j", "fidelity sweep of gamma2/j_eff: start:step:count or list"),
    ("gamma11_j", "override of Gamma11 in units of j_eff"),
    ("gamma22_j", "override of Gamma22 in units of j_eff"),
    ("out", "output directory"),
    ("threads", "worker threads for sweeps"),
];

fn num<T: FromStr>(s: &Setting) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    s.value.parse::<T>().map_err(|e| ConfigError::BadValue {
        origin: s.origin,
        key: s.key.clone(),
        value: s.value.clone(),
        reason: e.to_string(),
    })
}

fn wrap<T>(s: &Setting, r: Result<T, String>) -> Result<T, ConfigError> {
    r.map_err(|reason| ConfigError::BadValue {
        origin: s.origin,
        key: s.key.clone(),
        value: s.value.clone(),
        reason,
    })
}

impl RunConfig {
    /// Built-in defaults for `kind`, including figure presets.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut c = Self {
            experiment: kind,
            waveguide: WaveguideConfig {
                omega_c: 10.0,
                xi: 1.0,
                kappa: 6e-3,
                n_sites: 4000,
            },
            omega: None,
            g: 0.05,
            sites1: [0, 2],
            sites2: Some([1, 3]),
            placement: Placement::Centered,
            gamma1: 0.0,
            gamma2: 0.0,
            separations: vec![3, 4],
            tmax: None,
            dt: None,
            t_step: 1.0,
            lattice_check_tmax: 20.0,
            constraint: RateConstraint::named("dissipation-free-coupling").expect("builtin"),
            constraint_label: "dissipation-free-coupling".into(),
            max_span: 8,
            gamma1_grid_j: Grid(vec![0.0]),
            gamma2_grid_j: Grid(vec![0.0]),
            gamma11_j: None,
            gamma22_j: None,
            out: PathBuf::from("out"),
            threads: None,
        };
        match kind {
            ExperimentKind::Decay | ExperimentKind::Fig2a => {
                c.sites1 = [0, 3];
                c.sites2 = None;
                c.tmax = Some(150.0);
                c.dt = Some(0.005);
            }
            ExperimentKind::Fig2b | ExperimentKind::Fig2c => {
                c.sites1 = [0, 2];
                c.sites2 = None;
                c.g = if kind == ExperimentKind::Fig2b { 0.05 } else { 0.15 };
                c.gamma1 = 3e-4;
                c.separations = vec![2, 6, 10];
                c.tmax = Some(4000.0);
                c.t_step = 10.0;
                c.dt = Some(0.02);
            }
            ExperimentKind::Fig3 => {
                c.gamma1_grid_j = Grid((0..=10).map(|k| 0.01 * k as f64).collect());
                c.gamma2_grid_j = Grid((0..=10).map(|k| 0.02 * k as f64).collect());
            }
            ExperimentKind::Fig4 | ExperimentKind::Nonreciprocal => {
                // nested pair with Gamma11 = 0, Gamma22 = 2 j_eff exactly
                c.sites1 = [0, 6];
                c.sites2 = Some([1, 5]);
                if kind == ExperimentKind::Fig4 {
                    c.t_step = 10.0;
                }
            }
            ExperimentKind::Search => {
                c.max_span = 8;
            }
            _ => {}
        }
        c
    }

    fn apply(&mut self, s: &Setting) -> Result<(), ConfigError> {
        let w = &mut self.waveguide;
        match s.key.as_str() {
            "experiment" => {}
            "omega_c" => w.omega_c = num(s)?,
            "xi" => w.xi = num(s)?,
            "kappa" => w.kappa = num(s)?,
            "n_sites" => w.n_sites = num(s)?,
            "omega" => self.omega = Some(num(s)?),
            "g" => self.g = num(s)?,
            "sites1" => self.sites1 = wrap(s, parse_pair(&s.value))?,
            "sites2" => {
                self.sites2 = if s.value == "none" {
                    None
                } else {
                    Some(wrap(s, parse_pair(&s.value))?)
                }
            }
            "place" => {
                self.placement = match s.value.as_str() {
                    "centered" => Placement::Centered,
                    "explicit" => Placement::Explicit,
                    _ => return wrap(s, Err("expected 'centered' or 'explicit'".into())),
                }
            }
            "gamma1" => self.gamma1 = num(s)?,
            "gamma2" => self.gamma2 = num(s)?,
            "separations" => self.separations = wrap(s, parse_list(&s.value))?,
            "tmax" => self.tmax = Some(num(s)?),
            "dt" => self.dt = Some(num(s)?),
            "t_step" => self.t_step = num(s)?,
            "lattice_check_tmax" => self.lattice_check_tmax = num(s)?,
            "constraint" => {
                self.constraint =
                    wrap(s, RateConstraint::parse_any(&s.value).map_err(|e| e.to_string()))?;
                self.constraint_label = s.value.clone();
            }
            "max_span" => self.max_span = num(s)?,
            "gamma1_grid_j" => self.gamma1_grid_j = num(s)?,
            "gamma2_grid_j" => self.gamma2_grid_j = num(s)?,
            "gamma11_j" => self.gamma11_j = Some(num(s)?),
            "gamma22_j" => self.gamma22_j = Some(num(s)?),
            "out" => self.out = PathBuf::from(&s.value),
            "threads" => self.threads = Some(num(s)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: s.origin,
                    key: s.key.clone(),
                })
            }
        }
        Ok(())
    }

    /// String form of a pinned field, for conflict detection.
    fn pinned_repr(&self, key: &str) -> String {
        match key {
            "g" => self.g.to_string(),
            "n_sites" => self.waveguide.n_sites.to_string(),
            "kappa" => self.waveguide.kappa.to_string(),
            "separations" => format!("{:?}", self.separations),
            "gamma1" => self.gamma1.to_string(),
            "sites1" => format!("{:?}", self.sites1),
            "sites2" => format!("{:?}", self.sites2),
            "gamma11_j" => format!("{:?}", self.gamma11_j),
            "gamma22_j" => format!("{:?}", self.gamma22_j),
            _ => String::new(),
        }
    }

    /// Resolved parameters as ordered `(key, value)` pairs for metadata.
    pub fn describe(&self) -> Vec<(String, String)> {
        let w = &self.waveguide;
        let mut v: Vec<(&str, String)> = vec![
            ("experiment", self.experiment.to_string()),
            ("omega_c", w.omega_c.to_string()),
            ("xi", w.xi.to_string()),
            ("kappa", w.kappa.to_string()),
            ("n_sites", w.n_sites.to_string()),
            ("omega", self.atom_omega().to_string()),
            ("g", self.g.to_string()),
            ("sites1", format!("{},{}", self.sites1[0], self.sites1[1])),
            (
                "sites2",
                self.sites2
                    .map(|s| format!("{},{}", s[0], s[1]))
                    .unwrap_or_else(|| "none".into()),
            ),
            (
                "place",
                match self.placement {
                    Placement::Centered => "centered",
                    Placement::Explicit => "explicit",
                }
                .into(),
            ),
            ("gamma1", self.gamma1.to_string()),
            ("gamma2", self.gamma2.to_string()),
            (
                "separations",
                self.separations
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "tmax",
                self.tmax.map(|t| t.to_string()).unwrap_or_else(|| "auto".into()),
            ),
            ("dt", self.dt.map(|t| t.to_string()).unwrap_or_else(|| "auto".into())),
            ("t_step", self.t_step.to_string()),
            ("lattice_check_tmax", self.lattice_check_tmax.to_string()),
            ("constraint", self.constraint.to_string()),
            ("max_span", self.max_span.to_string()),
            ("gamma1_grid_j", join(&self.gamma1_grid_j.0)),
            ("gamma2_grid_j", join(&self.gamma2_grid_j.0)),
            (
                "gamma11_j",
                self.gamma11_j.map(|v| v.to_string()).unwrap_or_else(|| "geometry".into()),
            ),
            (
                "gamma22_j",
                self.gamma22_j.map(|v| v.to_string()).unwrap_or_else(|| "geometry".into()),
            ),
        ];
        if let Some(t) = self.threads {
            v.push(("threads", t.to_string()));
        }
        v.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn atom_omega(&self) -> f64 {
        self.omega.unwrap_or(self.waveguide.omega_c)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Resolves preset → `settings` (file entries first, then flags).
///
/// `requested` is the experiment named on the command line, if any; it must
/// agree with an `experiment` key in the settings.
pub fn resolve(
    requested: Option<ExperimentKind>,
    settings: &[Setting],
) -> Result<RunConfig, ConfigError> {
    let mut kind = requested;
    for s in settings.iter().filter(|s| s.key == "experiment") {
        let found: ExperimentKind = wrap(s, s.value.parse())?;
        match kind {
            Some(k) if requested.is_some() && k != found => {
                return Err(ConfigError::ExperimentConflict {
                    origin: s.origin,
                    found,
                    requested: k,
                })
            }
            _ => kind = Some(found),
        }
    }
    let kind = kind.ok_or(ConfigError::MissingExperiment)?;
    let mut cfg = RunConfig::preset(kind);
    let mut origins: BTreeMap<String, Origin> = BTreeMap::new();
    for s in settings {
        if kind.pinned_keys().contains(&s.key.as_str()) {
            let mut probe = cfg.clone();
            probe.apply(s)?;
            let (pinned, got) = (cfg.pinned_repr(&s.key), probe.pinned_repr(&s.key));
            if pinned != got {
                return Err(ConfigError::PresetConflict {
                    origin: s.origin,
                    key: s.key.clone(),
                    value: s.value.clone(),
                    preset: kind,
                    pinned,
                });
            }
        }
        cfg.apply(s)?;
        origins.insert(s.key.clone(), s.origin);
    }
    validate(&cfg, &origins)?;
    Ok(cfg)
}

/// Parses a complete config text (which must name its experiment).
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(None, &parse_settings(text)?)
}

fn validate(c: &RunConfig, origins: &BTreeMap<String, Origin>) -> Result<(), ConfigError> {
    let range = |key: &str, value: String, expected: &'static str| ConfigError::OutOfRange {
        origin: origins.get(key).copied().unwrap_or(Origin::Preset),
        key: key.to_string(),
        value,
        expected,
    };
    let w = &c.waveguide;
    if !(w.xi > 0.0) {
        return Err(range("xi", w.xi.to_string(), "> 0"));
    }
    if !(w.kappa >= 0.0) {
        return Err(range("kappa", w.kappa.to_string(), ">= 0"));
    }
    if w.n_sites < 3 {
        return Err(range("n_sites", w.n_sites.to_string(), ">= 3"));
    }
    if !w.omega_c.is_finite() {
        return Err(range("omega_c", w.omega_c.to_string(), "finite"));
    }
    if !(c.g > 0.0) {
        return Err(range("g", c.g.to_string(), "> 0"));
    }
    if !(c.gamma1 >= 0.0) {
        return Err(range("gamma1", c.gamma1.to_string(), ">= 0"));
    }
    if !(c.gamma2 >= 0.0) {
        return Err(range("gamma2", c.gamma2.to_string(), ">= 0"));
    }
    if let Some(t) = c.tmax {
        if !(t > 0.0) {
            return Err(range("tmax", t.to_string(), "> 0"));
        }
    }
    if let Some(dt) = c.dt {
        if !(dt > 0.0) {
            return Err(range("dt", dt.to_string(), "> 0"));
        }
    }
    if !(c.t_step > 0.0) {
        return Err(range("t_step", c.t_step.to_string(), "> 0"));
    }
    if !(c.lattice_check_tmax >= 0.0) {
        return Err(range("lattice_check_tmax", c.lattice_check_tmax.to_string(), ">= 0"));
    }
    if c.max_span == 0 {
        return Err(range("max_span", "0".into(), ">= 1"));
    }
    if c.separations.contains(&0) {
        return Err(range("separations", "0".into(), ">= 1"));
    }
    if c.threads == Some(0) {
        return Err(range("threads", "0".into(), ">= 1"));
    }
    for (key, v) in [("gamma11_j", c.gamma11_j), ("gamma22_j", c.gamma22_j)] {
        if let Some(v) = v {
            if !(v >= 0.0) {
                return Err(range(key, v.to_string(), ">= 0"));
            }
        }
    }
    for (key, grid) in [("gamma1_grid_j", &c.gamma1_grid_j), ("gamma2_grid_j", &c.gamma2_grid_j)] {
        if grid.0.iter().any(|v| !(*v >= 0.0)) {
            return Err(range(key, join(&grid.0), "all >= 0"));
        }
    }
    Ok(())
}
