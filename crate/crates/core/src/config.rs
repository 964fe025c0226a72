//! Flat `key = value` run configuration.
//!
//! One entry per line; `#` starts a comment. Keys that do not apply to the
//! selected model are rejected like unknown keys. Frequencies are given as
//! `f / 2pi` in kHz and times in microseconds.
//!
//! | key | models | default |
//! |-----|--------|---------|
//! | `model` | both | required: `yukawa` or `schwinger` |
//! | `b`, `n_sites`, `cutoff`, `g`, `dt`, `t_total` | both | `b = 1`, others required |
//! | `m_psi`, `m_phi`, `frame_policy` | yukawa | masses required, `interleaved` |
//! | `m`, `occupation`, `boson_report` | schwinger | `m`, `occupation` required, `absolute` |
//! | `solver` | both | `both` (`exact`, `trotter`) |
//! | `boundary` | both | `plain` (`jordan_wigner`) |
//! | `exact_method` | both | `auto` (`dense`, `krylov`) |
//! | `stride` | both | `1`: Trotter steps between samples |
//! | `threads` | both | `0`: one per core |
//! | `output_dir` | both | `out` |
//! | `trap_ions`, `omega_x_khz`, `omega_z_khz`, `eta`, `tau_gate_us` | yukawa hardware | all required once any is set |
//! | `omega_x_khz`, `eta`, `eta_sw`, `tau_gate_us`, `tau_phonon_us` | schwinger hardware | required once any is set |
//! | `trap_ions`, `omega_z_khz` | schwinger hardware | `n_sites`, unset |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::circuits::{FramePolicy, ModelKind};
use crate::error::{Error, Result};
use crate::evolve::{BosonReport, ExactMethod};
use crate::hardware::{khz, LocalTrap, ModeAxis, TrapConfig};
use crate::models::{step_count, Boundary, SchwingerParams, YukawaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    Exact,
    Trotter,
    #[default]
    Both,
}

impl Solver {
    pub fn exact(&self) -> bool {
        matches!(self, Solver::Exact | Solver::Both)
    }

    pub fn trotter(&self) -> bool {
        matches!(self, Solver::Trotter | Solver::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Yukawa(YukawaParams),
    Schwinger(SchwingerParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Yukawa(_) => ModelKind::Yukawa,
            ModelParams::Schwinger(_) => ModelKind::Schwinger,
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            ModelParams::Yukawa(p) => p.n_sites,
            ModelParams::Schwinger(p) => p.n_sites,
        }
    }

    pub fn cutoff(&self) -> usize {
        match self {
            ModelParams::Yukawa(p) => p.cutoff,
            ModelParams::Schwinger(p) => p.cutoff,
        }
    }

    /// Parameter choices that are valid but outside the approximation's comfort zone.
    pub fn warnings(&self) -> Vec<String> {
        match self {
            ModelParams::Yukawa(_) => Vec::new(),
            ModelParams::Schwinger(p) => p.warnings(),
        }
    }
}

/// Trap and laser settings in configuration units (kHz, microseconds).
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareSpec {
    pub trap_ions: Option<usize>,
    pub omega_x_khz: f64,
    pub omega_z_khz: Option<f64>,
    pub eta: f64,
    pub eta_sw: Option<f64>,
    pub tau_gate_us: f64,
    pub tau_phonon_us: Option<f64>,
}

impl HardwareSpec {
    /// Collective-mode trap; `None` unless the ion count and axial frequency are set.
    pub fn trap(&self) -> Option<TrapConfig> {
        Some(TrapConfig {
            n_ions: self.trap_ions?,
            omega_x: khz(self.omega_x_khz),
            omega_z: khz(self.omega_z_khz?),
            eta_base: self.eta,
            mode_axis: ModeAxis::X,
        })
    }

    /// Local-mode trap with one ion per site unless `trap_ions` says otherwise.
    pub fn local_trap(&self, n_sites: usize) -> Option<LocalTrap> {
        Some(LocalTrap {
            n_ions: self.trap_ions.unwrap_or(n_sites),
            omega_x: khz(self.omega_x_khz),
            eta: self.eta,
            eta_sw: self.eta_sw?,
            omega_z: self.omega_z_khz.map(khz),
        })
    }

    pub fn tau_gate(&self) -> f64 {
        self.tau_gate_us * 1e-6
    }

    pub fn tau_phonon(&self) -> Option<f64> {
        self.tau_phonon_us.map(|t| t * 1e-6)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: Solver,
    pub frame_policy: FramePolicy,
    pub boundary: Boundary,
    pub boson_report: BosonReport,
    pub exact_method: ExactMethod,
    pub stride: usize,
    pub threads: usize,
    pub output_dir: PathBuf,
    pub hardware: Option<HardwareSpec>,
}

const COMMON: &[&str] = &[
    "model",
    "b",
    "n_sites",
    "cutoff",
    "g",
    "dt",
    "t_total",
    "solver",
    "boundary",
    "exact_method",
    "stride",
    "threads",
    "output_dir",
];
const YUKAWA: &[&str] = &["m_psi", "m_phi", "frame_policy"];
const SCHWINGER: &[&str] = &["m", "occupation", "boson_report"];
const YUKAWA_TRAP: &[&str] = &[
    "trap_ions",
    "omega_x_khz",
    "omega_z_khz",
    "eta",
    "tau_gate_us",
];
const SCHWINGER_TRAP: &[&str] = &[
    "trap_ions",
    "omega_x_khz",
    "omega_z_khz",
    "eta",
    "eta_sw",
    "tau_gate_us",
    "tau_phonon_us",
];

/// Raw entries with their 1-based line numbers.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.map.get(key).map(|e| e.0).unwrap_or(0)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &'static str, what: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| config_err(*line, format!("`{key}` expects {what}, got `{raw}`"))),
        }
    }

    fn required<T: FromStr>(&self, key: &'static str, what: &str) -> Result<T> {
        self.get(key, what)?.ok_or(Error::ConfigMissing(key))
    }

    fn float(&self, key: &'static str) -> Result<f64> {
        let v: f64 = self.required(key, "a number")?;
        if !v.is_finite() {
            return Err(config_err(
                self.line(key),
                format!("`{key}` must be finite"),
            ));
        }
        Ok(v)
    }

    fn positive(&self, key: &'static str) -> Result<f64> {
        let v = self.float(key)?;
        if v <= 0.0 {
            return Err(config_err(
                self.line(key),
                format!("`{key}` must be positive, got {v}"),
            ));
        }
        Ok(v)
    }

    fn choice<T: Copy>(&self, key: &'static str, options: &[(&str, T)], default: T) -> Result<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some((line, raw)) => options
                .iter()
                .find(|(name, _)| name == raw)
                .map(|o| o.1)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                    config_err(
                        *line,
                        format!("`{key}` must be one of {}, got `{raw}`", names.join(", ")),
                    )
                }),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(config_err(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        }
        if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
            return Err(config_err(
                line,
                format!("`{key}` already set on line {first}"),
            ));
        }
    }
    Ok(Entries { map })
}

const MODELS: &[(&str, ModelKind)] = &[
    ("yukawa", ModelKind::Yukawa),
    ("schwinger", ModelKind::Schwinger),
];
const SOLVERS: &[(&str, Solver)] = &[
    ("exact", Solver::Exact),
    ("trotter", Solver::Trotter),
    ("both", Solver::Both),
];
const BOUNDARIES: &[(&str, Boundary)] = &[
    ("plain", Boundary::Plain),
    ("jordan_wigner", Boundary::JordanWigner),
];
const METHODS: &[(&str, ExactMethod)] = &[
    ("auto", ExactMethod::Auto),
    ("dense", ExactMethod::Dense),
    ("krylov", ExactMethod::Krylov),
];
const POLICIES: &[(&str, FramePolicy)] = &[
    ("interleaved", FramePolicy::Interleaved),
    ("lumped", FramePolicy::Lumped),
];
const REPORTS: &[(&str, BosonReport)] = &[
    ("absolute", BosonReport::Absolute),
    ("relative", BosonReport::RelativeToBackground),
];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], v: &T) -> &'static str {
    options.iter().find(|o| &o.1 == v).map(|o| o.0).unwrap()
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        parse_config(text)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;
    if !e.has("model") {
        return Err(Error::ConfigMissing("model"));
    }
    let model = e.choice("model", MODELS, ModelKind::Yukawa)?;
    let (model_keys, trap_keys) = match model {
        ModelKind::Yukawa => (YUKAWA, YUKAWA_TRAP),
        ModelKind::Schwinger => (SCHWINGER, SCHWINGER_TRAP),
    };
    for (key, (line, _)) in &e.map {
        let k = key.as_str();
        if !(COMMON.contains(&k) || model_keys.contains(&k) || trap_keys.contains(&k)) {
            let other = [YUKAWA, SCHWINGER, YUKAWA_TRAP, SCHWINGER_TRAP]
                .iter()
                .any(|set| set.contains(&k));
            return Err(config_err(
                *line,
                if other {
                    format!("key `{key}` does not apply to model {}", model.name())
                } else {
                    format!("unknown key `{key}`")
                },
            ));
        }
    }

    let b = if e.has("b") { e.positive("b")? } else { 1.0 };
    let n_sites: usize = e.required("n_sites", "an integer")?;
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(config_err(
            e.line("n_sites"),
            format!("`n_sites` must be even and at least 2, got {n_sites}"),
        ));
    }
    let cutoff: usize = e.required("cutoff", "an integer")?;
    if cutoff < 1 {
        return Err(config_err(e.line("cutoff"), "`cutoff` must be at least 1"));
    }
    let g = e.float("g")?;
    let dt = e.positive("dt")?;
    let t_total = e.float("t_total")?;
    if t_total < 0.0 {
        return Err(config_err(
            e.line("t_total"),
            "`t_total` must be non-negative",
        ));
    }
    step_count(dt, t_total).map_err(|err| config_err(e.line("t_total"), err.to_string()))?;

    let params = match model {
        ModelKind::Yukawa => {
            let m_phi = e.positive("m_phi")?;
            ModelParams::Yukawa(YukawaParams {
                b,
                n_sites,
                cutoff,
                g,
                m_psi: e.float("m_psi")?,
                m_phi,
                dt,
                t_total,
            })
        }
        ModelKind::Schwinger => {
            let occupation: usize = e.required("occupation", "an integer")?;
            if occupation < 1 {
                return Err(config_err(
                    e.line("occupation"),
                    "`occupation` must be positive",
                ));
            }
            if cutoff > occupation {
                return Err(config_err(
                    e.line("cutoff"),
                    format!("`cutoff` {cutoff} exceeds `occupation` {occupation}"),
                ));
            }
            ModelParams::Schwinger(SchwingerParams {
                b,
                n_sites,
                cutoff,
                g,
                m: e.float("m")?,
                occupation,
                dt,
                t_total,
            })
        }
    };
    match &params {
        ModelParams::Yukawa(p) => p.validate(),
        ModelParams::Schwinger(p) => p.validate(),
    }
    .map_err(|err| config_err(e.line("model"), err.to_string()))?;

    let stride: usize = e.get("stride", "an integer")?.unwrap_or(1);
    if stride == 0 {
        return Err(config_err(e.line("stride"), "`stride` must be positive"));
    }

    let hardware = if trap_keys.iter().any(|k| e.has(k)) {
        let optional = |key: &'static str| -> Result<Option<f64>> {
            if e.has(key) {
                e.positive(key).map(Some)
            } else {
                Ok(None)
            }
        };
        let spec = HardwareSpec {
            trap_ions: e.get("trap_ions", "an integer")?,
            omega_x_khz: e.positive("omega_x_khz")?,
            omega_z_khz: optional("omega_z_khz")?,
            eta: e.positive("eta")?,
            eta_sw: optional("eta_sw")?,
            tau_gate_us: e.positive("tau_gate_us")?,
            tau_phonon_us: optional("tau_phonon_us")?,
        };
        match model {
            ModelKind::Yukawa => {
                if spec.trap_ions.is_none() {
                    return Err(Error::ConfigMissing("trap_ions"));
                }
                if spec.omega_z_khz.is_none() {
                    return Err(Error::ConfigMissing("omega_z_khz"));
                }
            }
            ModelKind::Schwinger => {
                if spec.eta_sw.is_none() {
                    return Err(Error::ConfigMissing("eta_sw"));
                }
                if spec.tau_phonon_us.is_none() {
                    return Err(Error::ConfigMissing("tau_phonon_us"));
                }
            }
        }
        Some(spec)
    } else {
        None
    };

    Ok(RunConfig {
        params,
        solver: e.choice("solver", SOLVERS, Solver::Both)?,
        frame_policy: e.choice("frame_policy", POLICIES, FramePolicy::Interleaved)?,
        boundary: e.choice("boundary", BOUNDARIES, Boundary::Plain)?,
        boson_report: e.choice("boson_report", REPORTS, BosonReport::Absolute)?,
        exact_method: e.choice("exact_method", METHODS, ExactMethod::Auto)?,
        stride,
        threads: e.get("threads", "an integer")?.unwrap_or(0),
        output_dir: e
            .get::<PathBuf>("output_dir", "a path")?
            .unwrap_or_else(|| "out".into()),
        hardware,
    })
}

impl RunConfig {
    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("model", self.params.kind().name().into());
        match &self.params {
            ModelParams::Yukawa(p) => {
                kv("b", p.b.to_string());
                kv("n_sites", p.n_sites.to_string());
                kv("cutoff", p.cutoff.to_string());
                kv("g", p.g.to_string());
                kv("m_psi", p.m_psi.to_string());
                kv("m_phi", p.m_phi.to_string());
                kv("dt", p.dt.to_string());
                kv("t_total", p.t_total.to_string());
                kv("frame_policy", name_of(POLICIES, &self.frame_policy).into());
            }
            ModelParams::Schwinger(p) => {
                kv("b", p.b.to_string());
                kv("n_sites", p.n_sites.to_string());
                kv("cutoff", p.cutoff.to_string());
                kv("g", p.g.to_string());
                kv("m", p.m.to_string());
                kv("occupation", p.occupation.to_string());
                kv("dt", p.dt.to_string());
                kv("t_total", p.t_total.to_string());
                kv("boson_report", name_of(REPORTS, &self.boson_report).into());
            }
        }
        kv("solver", name_of(SOLVERS, &self.solver).into());
        kv("boundary", name_of(BOUNDARIES, &self.boundary).into());
        kv("exact_method", name_of(METHODS, &self.exact_method).into());
        kv("stride", self.stride.to_string());
        kv("threads", self.threads.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        if let Some(h) = &self.hardware {
            if let Some(n) = h.trap_ions {
                kv("trap_ions", n.to_string());
            }
            kv("omega_x_khz", h.omega_x_khz.to_string());
            if let Some(w) = h.omega_z_khz {
                kv("omega_z_khz", w.to_string());
            }
            kv("eta", h.eta.to_string());
            if let Some(e) = h.eta_sw {
                kv("eta_sw", e.to_string());
            }
            kv("tau_gate_us", h.tau_gate_us.to_string());
            if let Some(t) = h.tau_phonon_us {
                kv("tau_phonon_us", t.to_string());
            }
        }
        out
    }
}
