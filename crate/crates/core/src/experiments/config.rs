//! Line-oriented scenario configuration.
//!
//! ```text
//! # comment
//! scenario = fig3a-scaled
//! model = schwinger
//! n = 12
//! theta = pi
//! metrics = ea, trace_distance
//!
//! [state q1]
//! pattern = 1,-1
//! mpemba_q = 1
//! mpemba_qmax = 3
//! ```
//!
//! A state section holds either `sectors` (`;`-separated charge patterns on
//! sites `1..=ell`) with optional `coefficients` or `mixing_angle`, or a
//! Mpemba recipe (`pattern`, `mpemba_q`, `mpemba_qmax`).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::dynamics::InitialStateSpec;
use crate::error::{Error, Result};
use crate::lattice::{ModelKind, MAX_SITES};
use crate::spectral::{PLOT_BIN, RANDOM_PROBE_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    EntanglementAsymmetry,
    Renyi2,
    TraceDistance,
    OrderParameter,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::EntanglementAsymmetry,
        Metric::Renyi2,
        Metric::TraceDistance,
        Metric::OrderParameter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::EntanglementAsymmetry => "ea",
            Metric::Renyi2 => "renyi2",
            Metric::TraceDistance => "trace_distance",
            Metric::OrderParameter => "order_parameter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    Ones,
    Random,
}

impl ProbeKind {
    fn name(self) -> &'static str {
        match self {
            ProbeKind::Ones => "ones",
            ProbeKind::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateRecipe {
    /// Equal weights unless `coefficients` is given.
    Sectors {
        sectors: Vec<Vec<i32>>,
        coefficients: Option<Vec<f64>>,
    },
    /// `cos(angle) |first> + sin(angle) |second>`.
    Mixed {
        first: Vec<i32>,
        second: Vec<i32>,
        angle: f64,
    },
    /// `cos(theta_q) |0> + sin(theta_q) |q * pattern>`.
    Mpemba { pattern: Vec<i32>, q: u32, q_max: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateConfig {
    pub name: String,
    pub recipe: StateRecipe,
}

impl StateConfig {
    pub fn to_spec(&self, model: ModelKind, sites: usize, ell: usize) -> InitialStateSpec {
        match &self.recipe {
            StateRecipe::Sectors { sectors, coefficients } => match coefficients {
                None => InitialStateSpec::equal(model, sites, ell, sectors),
                Some(c) => InitialStateSpec::new(
                    model,
                    sites,
                    ell,
                    sectors
                        .iter()
                        .cloned()
                        .zip(c.iter().map(|&a| Complex64::new(a, 0.0)))
                        .collect(),
                ),
            },
            StateRecipe::Mixed { first, second, angle } => {
                InitialStateSpec::mixed(model, sites, ell, first.clone(), second.clone(), *angle)
            }
            StateRecipe::Mpemba { pattern, q, q_max } => {
                let mut spec = InitialStateSpec::mpemba(model, sites, pattern, *q, *q_max);
                spec.ell = ell;
                spec
            }
        }
    }
}

/// Every field has a default; see `Default`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub model: ModelKind,
    pub n: usize,
    pub w: f64,
    pub m: f64,
    pub j: f64,
    pub theta: f64,
    pub ell: usize,
    pub t_max: f64,
    pub dt: f64,
    pub avg_t_min: f64,
    pub avg_t_max: f64,
    pub avg_samples: usize,
    pub metrics: Vec<Metric>,
    pub crossing_window: usize,
    pub output: Option<String>,
    pub seed: u64,
    pub probe: ProbeKind,
    pub cap_dim: usize,
    pub boundary_left: i32,
    pub boundary_right: i32,
    pub plots: bool,
    pub spectrum: bool,
    pub spectrum_bin: f64,
    pub peak_bin: f64,
    pub j_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub states: Vec<StateConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            model: ModelKind::Schwinger,
            n: 8,
            w: 1.0,
            m: 0.0,
            j: 0.15,
            theta: 0.0,
            ell: 2,
            t_max: 200.0,
            dt: 0.25,
            avg_t_min: 1e3,
            avg_t_max: 1e4,
            avg_samples: 512,
            metrics: vec![Metric::EntanglementAsymmetry],
            crossing_window: crate::metrics::DEFAULT_SMOOTHING,
            output: None,
            seed: RANDOM_PROBE_SEED,
            probe: ProbeKind::Ones,
            cap_dim: 5000,
            boundary_left: 0,
            boundary_right: 0,
            plots: false,
            spectrum: false,
            spectrum_bin: PLOT_BIN,
            peak_bin: 0.1,
            j_list: Vec::new(),
            n_list: Vec::new(),
            states: Vec::new(),
        }
    }
}

/// Reals accept plain numbers and multiples of `pi`: `pi`, `-pi/4`, `3pi/16`, `3*pi/16`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let factor = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let factor = match factor {
        "" | "+" => 1.0,
        "-" => -1.0,
        f => f.parse::<f64>().ok()?,
    };
    let v = factor * PI / den;
    v.is_finite().then_some(v)
}

fn parse_int_list(s: &str) -> Option<Vec<i32>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_patterns(s: &str) -> Option<Vec<Vec<i32>>> {
    s.split(';').map(parse_int_list).collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Default)]
struct Section {
    name: String,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut lines: BTreeMap<&'static str, usize> = BTreeMap::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, "section", "missing closing ']'"))?;
                let name = inner
                    .trim()
                    .strip_prefix("state")
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && !n.contains(char::is_whitespace))
                    .ok_or_else(|| Error::config(line, "section", "expected [state <name>]"))?;
                if sections.iter().any(|s| s.name == name) {
                    return Err(Error::config(line, "section", format!("state '{name}' defined twice")));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    keys: BTreeMap::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, content, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(section) = sections.last_mut() {
                if section.keys.insert(key.to_string(), (line, value.to_string())).is_some() {
                    return Err(Error::config(line, key, "duplicate key"));
                }
                continue;
            }
            if seen.insert(key.to_string(), line).is_some() {
                return Err(Error::config(line, key, "duplicate key"));
            }
            let bad = |msg: &str| Error::config(line, key, format!("{msg}, got '{value}'"));
            let real_v = || parse_real(value).ok_or_else(|| bad("expected a real number"));
            let uint = || value.parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
            let int = || value.parse::<i32>().map_err(|_| bad("expected an integer"));
            let known: &'static str = match key {
                "scenario" => {
                    if value.is_empty() || value.contains(char::is_whitespace) {
                        return Err(bad("expected a single word"));
                    }
                    cfg.scenario = value.to_string();
                    "scenario"
                }
                "model" => {
                    cfg.model = ModelKind::parse(value).ok_or_else(|| bad("expected schwinger or qlm"))?;
                    "model"
                }
                "n" => {
                    cfg.n = uint()?;
                    "n"
                }
                "w" => {
                    cfg.w = real_v()?;
                    "w"
                }
                "m" => {
                    cfg.m = real_v()?;
                    "m"
                }
                "j" => {
                    cfg.j = real_v()?;
                    "j"
                }
                "theta" => {
                    cfg.theta = real_v()?;
                    "theta"
                }
                "ell" => {
                    cfg.ell = uint()?;
                    "ell"
                }
                "t_max" => {
                    cfg.t_max = real_v()?;
                    "t_max"
                }
                "dt" => {
                    cfg.dt = real_v()?;
                    "dt"
                }
                "avg_t_min" => {
                    cfg.avg_t_min = real_v()?;
                    "avg_t_min"
                }
                "avg_t_max" => {
                    cfg.avg_t_max = real_v()?;
                    "avg_t_max"
                }
                "avg_samples" => {
                    cfg.avg_samples = uint()?;
                    "avg_samples"
                }
                "metrics" => {
                    cfg.metrics = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|m| Metric::parse(m.trim()))
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| bad("expected metrics among ea, renyi2, trace_distance, order_parameter"))?
                    };
                    "metrics"
                }
                "crossing_window" => {
                    cfg.crossing_window = uint()?;
                    "crossing_window"
                }
                "output" => {
                    cfg.output = Some(value.to_string());
                    "output"
                }
                "seed" => {
                    cfg.seed = match value.strip_prefix("0x") {
                        Some(hex) => u64::from_str_radix(hex, 16),
                        None => value.parse(),
                    }
                    .map_err(|_| bad("expected an unsigned integer"))?;
                    "seed"
                }
                "probe" => {
                    cfg.probe = match value {
                        "ones" => ProbeKind::Ones,
                        "random" => ProbeKind::Random,
                        _ => return Err(bad("expected ones or random")),
                    };
                    "probe"
                }
                "cap_dim" => {
                    cfg.cap_dim = uint()?;
                    "cap_dim"
                }
                "boundary_left" => {
                    cfg.boundary_left = int()?;
                    "boundary_left"
                }
                "boundary_right" => {
                    cfg.boundary_right = int()?;
                    "boundary_right"
                }
                "plots" => {
                    cfg.plots = parse_bool(value).ok_or_else(|| bad("expected true or false"))?;
                    "plots"
                }
                "spectrum" => {
                    cfg.spectrum = parse_bool(value).ok_or_else(|| bad("expected true or false"))?;
                    "spectrum"
                }
                "spectrum_bin" => {
                    cfg.spectrum_bin = real_v()?;
                    "spectrum_bin"
                }
                "peak_bin" => {
                    cfg.peak_bin = real_v()?;
                    "peak_bin"
                }
                "j_list" => {
                    cfg.j_list = value
                        .split(',')
                        .map(parse_real)
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("expected a comma-separated list of reals"))?;
                    "j_list"
                }
                "n_list" => {
                    cfg.n_list = value
                        .split(',')
                        .map(|x| x.trim().parse().ok())
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("expected a comma-separated list of integers"))?;
                    "n_list"
                }
                _ => return Err(Error::config(line, key, "unknown key")),
            };
            lines.insert(known, line);
        }
        for section in sections {
            cfg.states.push(parse_state(section)?);
        }
        cfg.validate_with(&lines)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(&BTreeMap::new())
    }

    fn validate_with(&self, lines: &BTreeMap<&'static str, usize>) -> Result<()> {
        let err = |field: &'static str, msg: String| Error::config(lines.get(field).copied().unwrap_or(0), field, msg);
        let check_n = |n: usize, field: &'static str| {
            if n < 4 || n % 2 != 0 || n > MAX_SITES {
                Err(err(field, format!("N must be even with 4 <= N <= {MAX_SITES}, got {n}")))
            } else if self.ell < 1 || self.ell + 2 > n {
                Err(err("ell", format!("need 1 <= ell <= N - 2, got ell = {} for N = {n}", self.ell)))
            } else {
                Ok(())
            }
        };
        check_n(self.n, "n")?;
        for &n in &self.n_list {
            check_n(n, "n_list")?;
        }
        if !(self.w > 0.0) {
            return Err(err("w", format!("w must be positive, got {}", self.w)));
        }
        for &j in std::iter::once(&self.j).chain(&self.j_list) {
            if !(j >= 0.0) {
                return Err(err(if j == self.j { "j" } else { "j_list" }, format!("J must be >= 0, got {j}")));
            }
        }
        if !(0.0..=2.0 * PI).contains(&self.theta) {
            return Err(err("theta", format!("theta must lie in [0, 2pi], got {}", self.theta)));
        }
        if !(self.dt > 0.0) || !(self.t_max >= 0.0) {
            return Err(err("dt", format!("need dt > 0 and t_max >= 0, got dt = {}, t_max = {}", self.dt, self.t_max)));
        }
        if self.avg_samples > 0 && !(self.avg_t_max > self.avg_t_min) {
            return Err(err("avg_t_max", "averaging window is empty".into()));
        }
        if self.avg_samples > 0 && self.avg_samples < crate::dynamics::MIN_AVERAGE_SAMPLES {
            return Err(err(
                "avg_samples",
                format!("need 0 or at least {} samples", crate::dynamics::MIN_AVERAGE_SAMPLES),
            ));
        }
        if !(self.spectrum_bin > 0.0) || !(self.peak_bin > 0.0) {
            return Err(err("spectrum_bin", "bin widths must be positive".into()));
        }
        if self.metrics.contains(&Metric::OrderParameter) && self.model != ModelKind::QuantumLink {
            return Err(err("metrics", "order_parameter is defined for the quantum link model only".into()));
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if self.metrics[..i].contains(m) {
                return Err(err("metrics", format!("metric '{}' listed twice", m.name())));
            }
        }
        for s in &self.states {
            let fail = |msg: String| Error::config(0, format!("state {}", s.name), msg);
            let patterns: Vec<&Vec<i32>> = match &s.recipe {
                StateRecipe::Sectors { sectors, .. } => sectors.iter().collect(),
                StateRecipe::Mixed { first, second, .. } => vec![first, second],
                StateRecipe::Mpemba { pattern, .. } => vec![pattern],
            };
            if let Some(p) = patterns.iter().find(|p| p.len() > self.ell) {
                return Err(fail(format!("pattern {p:?} is longer than ell = {}", self.ell)));
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.clone());
        kv("model", self.model.name().into());
        kv("n", self.n.to_string());
        kv("w", real(self.w));
        kv("m", real(self.m));
        kv("j", real(self.j));
        kv("theta", real(self.theta));
        kv("ell", self.ell.to_string());
        kv("t_max", real(self.t_max));
        kv("dt", real(self.dt));
        kv("avg_t_min", real(self.avg_t_min));
        kv("avg_t_max", real(self.avg_t_max));
        kv("avg_samples", self.avg_samples.to_string());
        kv("metrics", self.metrics.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "));
        kv("crossing_window", self.crossing_window.to_string());
        if let Some(o) = &self.output {
            kv("output", o.clone());
        }
        kv("seed", format!("0x{:x}", self.seed));
        kv("probe", self.probe.name().into());
        kv("cap_dim", self.cap_dim.to_string());
        kv("boundary_left", self.boundary_left.to_string());
        kv("boundary_right", self.boundary_right.to_string());
        kv("plots", self.plots.to_string());
        kv("spectrum", self.spectrum.to_string());
        kv("spectrum_bin", real(self.spectrum_bin));
        kv("peak_bin", real(self.peak_bin));
        if !self.j_list.is_empty() {
            kv("j_list", self.j_list.iter().map(|&j| real(j)).collect::<Vec<_>>().join(", "));
        }
        if !self.n_list.is_empty() {
            kv("n_list", join(&self.n_list, ", "));
        }
        for state in &self.states {
            let _ = write!(s, "\n[state {}]\n", state.name);
            match &state.recipe {
                StateRecipe::Sectors { sectors, coefficients } => {
                    let _ = writeln!(s, "sectors = {}", sectors.iter().map(|g| join(g, ",")).collect::<Vec<_>>().join(" ; "));
                    if let Some(c) = coefficients {
                        let _ = writeln!(s, "coefficients = {}", c.iter().map(|&a| real(a)).collect::<Vec<_>>().join(", "));
                    }
                }
                StateRecipe::Mixed { first, second, angle } => {
                    let _ = writeln!(s, "sectors = {} ; {}", join(first, ","), join(second, ","));
                    let _ = writeln!(s, "mixing_angle = {}", real(*angle));
                }
                StateRecipe::Mpemba { pattern, q, q_max } => {
                    let _ = writeln!(s, "pattern = {}", join(pattern, ","));
                    let _ = writeln!(s, "mpemba_q = {q}");
                    let _ = writeln!(s, "mpemba_qmax = {q_max}");
                }
            }
        }
        s
    }
}

fn parse_state(mut section: Section) -> Result<StateConfig> {
    let field = |k: &str| format!("state {}.{k}", section.name);
    let mut take = |k: &str| section.keys.remove(k);
    let sectors = take("sectors");
    let coefficients = take("coefficients");
    let angle = take("mixing_angle");
    let pattern = take("pattern");
    let q = take("mpemba_q");
    let q_max = take("mpemba_qmax");
    if let Some((key, (line, _))) = section.keys.iter().next() {
        return Err(Error::config(*line, field(key), "unknown key"));
    }
    let patterns = |(line, v): &(usize, String), k: &str| {
        parse_patterns(v).ok_or_else(|| Error::config(*line, field(k), format!("expected patterns like '0,0 ; 1,-1', got '{v}'")))
    };
    let recipe = match (sectors, pattern) {
        (Some(_), Some((line, _))) => {
            return Err(Error::config(line, field("pattern"), "use either sectors or a Mpemba pattern"));
        }
        (None, None) => {
            return Err(Error::config(section.line, field("sectors"), "state needs sectors or pattern"));
        }
        (Some(sec), None) => {
            if let Some((line, _)) = q.as_ref().or(q_max.as_ref()) {
                return Err(Error::config(*line, field("mpemba_q"), "Mpemba keys need a pattern, not sectors"));
            }
            let list = patterns(&sec, "sectors")?;
            match (coefficients, angle) {
                (Some((line, _)), Some(_)) => {
                    return Err(Error::config(line, field("coefficients"), "use either coefficients or mixing_angle"));
                }
                (None, Some((line, v))) => {
                    if list.len() != 2 {
                        return Err(Error::config(line, field("mixing_angle"), "mixing_angle needs exactly two sectors"));
                    }
                    let angle = parse_real(&v)
                        .ok_or_else(|| Error::config(line, field("mixing_angle"), format!("expected a real, got '{v}'")))?;
                    let mut it = list.into_iter();
                    StateRecipe::Mixed {
                        first: it.next().unwrap(),
                        second: it.next().unwrap(),
                        angle,
                    }
                }
                (Some((line, v)), None) => {
                    let c: Vec<f64> = v
                        .split(',')
                        .map(parse_real)
                        .collect::<Option<_>>()
                        .ok_or_else(|| Error::config(line, field("coefficients"), format!("expected reals, got '{v}'")))?;
                    if c.len() != list.len() {
                        return Err(Error::config(line, field("coefficients"), "one coefficient per sector"));
                    }
                    StateRecipe::Sectors {
                        sectors: list,
                        coefficients: Some(c),
                    }
                }
                (None, None) => StateRecipe::Sectors {
                    sectors: list,
                    coefficients: None,
                },
            }
        }
        (None, Some((pline, pv))) => {
            if let Some((line, _)) = coefficients.as_ref().or(angle.as_ref()) {
                return Err(Error::config(*line, field("coefficients"), "Mpemba states fix their own coefficients"));
            }
            let pattern = parse_int_list(&pv)
                .ok_or_else(|| Error::config(pline, field("pattern"), format!("expected integers, got '{pv}'")))?;
            let num = |x: Option<(usize, String)>, k: &str| -> Result<u32> {
                let (line, v) = x.ok_or_else(|| Error::config(pline, field(k), "missing"))?;
                v.parse::<u32>()
                    .ok()
                    .filter(|&q| q > 0)
                    .ok_or_else(|| Error::config(line, field(k), format!("expected a positive integer, got '{v}'")))
            };
            let q = num(q, "mpemba_q")?;
            let q_max = num(q_max, "mpemba_qmax")?;
            StateRecipe::Mpemba { pattern, q, q_max }
        }
    };
    Ok(StateConfig {
        name: section.name,
        recipe,
    })
}
