//! Scenario files.
//!
//! A scenario is a TOML document with the sections below. Every key is
//! optional unless marked otherwise; times are in units of `τ = mω₀²/2ħ`
//! unless `time_unit = "natural"`.
//!
//! ```toml
//! name = "free-hg11"
//!
//! [params]                # natural units by default
//! mass = 1.0
//! hbar = 1.0
//! charge = 1.0
//! beam_waist = 1.0
//! alpha = 1.0
//! k0 = 10.0
//!
//! [state]                 # required
//! kind = "hermite-gauss"  # or "laguerre-gauss"
//! n = 1                   # hermite-gauss: n, m (required)
//! m = 1
//! # laguerre-gauss: l, p (required), w0, z_r, longitudinal_phase
//!
//! [force]
//! kind = "constant"       # zero | constant | sinusoidal | tabulated
//! mu0 = 16.0
//! # sinusoidal: period_scale (μ = μ0 sin(2t/period_scale), default τ)
//! # tabulated: samples = [[t, mu], ...]
//!
//! [field]                 # uniform B along z
//! larmor = 2.0            # or b = ...
//!
//! [grid]                  # [min, max, count]
//! x = [-6.0, 6.0, 64]
//! y = [-6.0, 6.0, 64]
//! z = [-4.0, 4.0, 64]
//!
//! [run]
//! times = [0.25, 0.5, 1.0]  # required
//! time_unit = "tau"
//! method = "convolution"    # or "split-step"
//! steps = 256
//!
//! [[output]]              # at least one
//! kind = "density-slice"  # density-slice | observables | validation-report
//! normal = "z"
//! offset = "centroid"     # or a coordinate
//! ```

use std::collections::HashMap;
use std::fmt;

use matterwave_core::evolution::{Method, SliceAxis, MIN_SPLIT_STEPS};
use matterwave_core::forces::{ForceProfile, ForceTable};
use matterwave_core::kernels::{KernelKind, KernelSpec};
use matterwave_core::states::{Axis, Grid3, HermiteGaussSpec, InitialState, LaguerreGaussSpec, PhysicalParams};
use toml::{Table, Value};

pub const DEFAULT_TRANSVERSE: [f64; 3] = [-6.0, 6.0, 64.0];
pub const DEFAULT_LONGITUDINAL: [f64; 3] = [-4.0, 4.0, 64.0];
pub const DEFAULT_STEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceOffset {
    /// Plane through the grid centroid along the normal.
    Centroid,
    At(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputSpec {
    DensitySlice { normal: SliceAxis, offset: SliceOffset },
    Observables,
    ValidationReport,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: PhysicalParams,
    pub state: InitialState,
    pub force: ForceProfile,
    pub magnetic: bool,
    /// Evaluation times in natural units.
    pub times: Vec<f64>,
    pub grid: Grid3,
    pub method: Method,
    pub outputs: Vec<OutputSpec>,
}

impl ScenarioConfig {
    /// Kernel implied by the field and force settings.
    pub fn kernel(&self) -> matterwave_core::Result<KernelSpec> {
        let kind = match (self.magnetic, &self.force) {
            (false, ForceProfile::Zero) => KernelKind::FreeTransverse2D,
            (false, f) => KernelKind::LinearLongitudinal1D(f.clone()),
            (true, ForceProfile::Zero) => KernelKind::Magnetic3D,
            (true, ForceProfile::Constant { mu0 }) => KernelKind::MagneticWithForce3D { mu0: *mu0 },
            (true, _) => {
                return Err(matterwave_core::Error::Unsupported(
                    "a magnetic field combines only with a zero or constant force".into(),
                ))
            }
        };
        KernelSpec::new(kind, self.params)
    }

    pub fn is_hg11(&self) -> bool {
        matches!(self.state, InitialState::HermiteGauss(s) if s.n == 1 && s.m_index == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// All problems found in one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Line numbers of section headers and keys. Array-of-table sections are
/// named `output.0`, `output.1`, ...
#[derive(Debug, Default)]
struct LineIndex {
    sections: HashMap<String, usize>,
    keys: HashMap<(String, String), usize>,
}

impl LineIndex {
    fn scan(text: &str) -> Self {
        let mut idx = LineIndex::default();
        let mut section = String::new();
        let mut arrays: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if let Some(name) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
                let name = name.trim().to_string();
                let n = arrays.entry(name.clone()).or_insert(0);
                section = format!("{name}.{n}");
                *n += 1;
                idx.sections.insert(section.clone(), i + 1);
            } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                idx.sections.insert(section.clone(), i + 1);
            } else if let Some((k, _)) = line.split_once('=') {
                let k = k.trim().trim_matches('"').to_string();
                idx.keys.entry((section.clone(), k)).or_insert(i + 1);
            }
        }
        idx
    }

    fn key(&self, section: &str, key: &str) -> Option<usize> {
        self.keys.get(&(section.to_string(), key.to_string())).copied()
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' | '\'' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Reader {
    lines: LineIndex,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let line = if key.is_empty() {
            self.lines.sections.get(section).copied()
        } else {
            self.lines.key(section, key).or_else(|| self.lines.sections.get(section).copied())
        };
        let key = match (section.is_empty(), key.is_empty()) {
            (true, _) => key.to_string(),
            (false, true) => format!("[{section}]"),
            (false, false) => format!("{section}.{key}"),
        };
        self.errors.push(ConfigError {
            line,
            key,
            message: message.into(),
        });
    }

    fn known_keys(&mut self, section: &str, table: &Table, allowed: &[&str]) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                self.error(section, k, format!("unknown key (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn float(&mut self, section: &str, table: &Table, key: &str) -> Option<f64> {
        match table.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.error(section, key, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn positive(&mut self, section: &str, table: &Table, key: &str) -> Option<f64> {
        let v = self.float(section, table, key)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.error(section, key, format!("must be positive, got {v}"));
            None
        }
    }

    fn finite(&mut self, section: &str, table: &Table, key: &str) -> Option<f64> {
        let v = self.float(section, table, key)?;
        if v.is_finite() {
            Some(v)
        } else {
            self.error(section, key, "must be finite");
            None
        }
    }

    fn integer(&mut self, section: &str, table: &Table, key: &str) -> Option<i64> {
        match table.get(key)? {
            Value::Integer(v) => Some(*v),
            other => {
                self.error(section, key, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn unsigned(&mut self, section: &str, table: &Table, key: &str) -> Option<u32> {
        let v = self.integer(section, table, key)?;
        match u32::try_from(v) {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(section, key, format!("must be a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn string<'t>(&mut self, section: &str, table: &'t Table, key: &str) -> Option<&'t str> {
        match table.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.error(section, key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, section: &str, table: &Table, key: &str) -> Option<bool> {
        match table.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.error(section, key, format!("expected true or false, found {}", other.type_str()));
                None
            }
        }
    }

    fn numbers(&mut self, section: &str, table: &Table, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = table.get(key)? else {
            self.error(section, key, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for v in items {
            match v {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.error(section, key, "expected an array of numbers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn required<T>(&mut self, section: &str, table: &Table, key: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && !table.contains_key(key) {
            self.error(section, key, "missing required key");
        }
        v
    }

    fn section<'t>(&mut self, doc: &'t Table, name: &str) -> Option<&'t Table> {
        match doc.get(name)? {
            Value::Table(t) => Some(t),
            _ => {
                self.error("", name, "expected a section");
                None
            }
        }
    }
}

const TOP_LEVEL: &[&str] = &["name", "params", "state", "force", "field", "grid", "run", "output"];

/// Parse and validate a scenario, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let doc: Table = match text.parse() {
        Ok(d) => d,
        Err(e) => {
            let e: toml::de::Error = e;
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            return Err(ConfigErrors(vec![ConfigError {
                line,
                key: "syntax".into(),
                message: e.message().to_string(),
            }]));
        }
    };
    let mut r = Reader {
        lines: LineIndex::scan(text),
        errors: Vec::new(),
    };
    r.known_keys("", &doc, TOP_LEVEL);
    let empty = Table::new();

    let params_sec = r.section(&doc, "params");
    let force_sec = r.section(&doc, "force");
    let field_sec = r.section(&doc, "field");
    let grid_sec = r.section(&doc, "grid");
    let name = r.string("", &doc, "name").unwrap_or("scenario").to_string();
    let params = read_params(&mut r, params_sec.unwrap_or(&empty));
    let tau = params.tau();

    let run = r.section(&doc, "run");
    if run.is_none() && !doc.contains_key("run") {
        r.error("", "run", "missing required section");
    }
    let run = run.unwrap_or(&empty);
    r.known_keys("run", run, &["times", "time_unit", "method", "steps"]);
    let unit = match r.string("run", run, "time_unit").unwrap_or("tau") {
        "tau" => tau,
        "natural" => 1.0,
        other => {
            r.error("run", "time_unit", format!("expected \"tau\" or \"natural\", got \"{other}\""));
            tau
        }
    };

    let state = match r.section(&doc, "state") {
        Some(s) => read_state(&mut r, s, &params),
        None => {
            if !doc.contains_key("state") {
                r.error("", "state", "missing required section");
            }
            None
        }
    };
    let force = read_force(&mut r, force_sec, unit);
    let magnetic = read_field(&mut r, field_sec, &params);
    let params = magnetic.unwrap_or(params);
    let magnetic = params.has_field();
    if magnetic && matches!(force, Some(ForceProfile::Sinusoidal { .. } | ForceProfile::Tabulated(_))) {
        r.error("force", "kind", "a magnetic field combines only with a zero or constant force");
    }

    let grid = read_grid(&mut r, grid_sec.unwrap_or(&empty));

    let times = r.numbers("run", run, "times");
    let times = r.required("run", run, "times", times).and_then(|ts| {
        if ts.is_empty() {
            r.error("run", "times", "needs at least one time");
            None
        } else if let Some(bad) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            r.error("run", "times", format!("times must be positive, got {bad}"));
            None
        } else {
            Some(ts.iter().map(|t| t * unit).collect::<Vec<_>>())
        }
    });
    let steps = r.integer("run", run, "steps").map(|s| s.max(0) as usize).unwrap_or(DEFAULT_STEPS);
    let method = match r.string("run", run, "method").unwrap_or("convolution") {
        "convolution" => Some(Method::KernelConvolution),
        "split-step" if steps >= MIN_SPLIT_STEPS => Some(Method::SplitStepOracle { steps }),
        "split-step" => {
            r.error("run", "steps", format!("split-step needs at least {MIN_SPLIT_STEPS} steps, got {steps}"));
            None
        }
        other => {
            r.error("run", "method", format!("expected \"convolution\" or \"split-step\", got \"{other}\""));
            None
        }
    };

    let outputs = read_outputs(&mut r, &doc);

    if !r.errors.is_empty() {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(r.errors));
    }
    Ok(ScenarioConfig {
        name,
        params,
        state: state.expect("errors reported above"),
        force: force.expect("errors reported above"),
        magnetic,
        times: times.expect("errors reported above"),
        grid: grid.expect("errors reported above"),
        method: method.expect("errors reported above"),
        outputs: outputs.expect("errors reported above"),
    })
}

fn read_params(r: &mut Reader, t: &Table) -> PhysicalParams {
    r.known_keys("params", t, &["mass", "hbar", "charge", "beam_waist", "alpha", "k0"]);
    let mut p = PhysicalParams::natural();
    if let Some(v) = r.positive("params", t, "mass") {
        p.mass = v;
    }
    if let Some(v) = r.positive("params", t, "hbar") {
        p.hbar = v;
    }
    if let Some(v) = r.positive("params", t, "beam_waist") {
        p.beam_waist = v;
    }
    if let Some(v) = r.positive("params", t, "alpha") {
        p.alpha = v;
    }
    if let Some(v) = r.finite("params", t, "charge") {
        p.charge = v;
    }
    if let Some(v) = r.finite("params", t, "k0") {
        p.k0 = v;
    }
    p
}

fn read_state(r: &mut Reader, t: &Table, params: &PhysicalParams) -> Option<InitialState> {
    let kind = r.string("state", t, "kind");
    match r.required("state", t, "kind", kind)? {
        "hermite-gauss" => {
            r.known_keys("state", t, &["kind", "n", "m"]);
            let n = r.unsigned("state", t, "n");
            let n = r.required("state", t, "n", n);
            let m = r.unsigned("state", t, "m");
            let m = r.required("state", t, "m", m);
            match HermiteGaussSpec::new(n?, m?) {
                Ok(s) => Some(InitialState::HermiteGauss(s)),
                Err(e) => {
                    r.error("state", "n", e.to_string());
                    None
                }
            }
        }
        "laguerre-gauss" => {
            r.known_keys("state", t, &["kind", "l", "p", "w0", "z_r", "longitudinal_phase"]);
            let l = r.integer("state", t, "l");
            let l = r.required("state", t, "l", l);
            let p = r.unsigned("state", t, "p");
            let p = r.required("state", t, "p", p);
            let w0 = r.positive("state", t, "w0").unwrap_or(params.beam_waist);
            let z_r = r.positive("state", t, "z_r").unwrap_or(params.k0.abs().max(1.0) * w0 * w0 / 2.0);
            let phase = r.boolean("state", t, "longitudinal_phase").unwrap_or(false);
            let l = match i32::try_from(l?) {
                Ok(l) => l,
                Err(_) => {
                    r.error("state", "l", "out of range");
                    return None;
                }
            };
            match LaguerreGaussSpec::new(l, p?, w0, z_r) {
                Ok(s) => Some(InitialState::LaguerreGauss(s.with_longitudinal_phase(phase))),
                Err(e) => {
                    r.error("state", "l", e.to_string());
                    None
                }
            }
        }
        other => {
            r.error("state", "kind", format!("expected \"hermite-gauss\" or \"laguerre-gauss\", got \"{other}\""));
            None
        }
    }
}

fn read_force(r: &mut Reader, t: Option<&Table>, unit: f64) -> Option<ForceProfile> {
    let Some(t) = t else {
        return Some(ForceProfile::Zero);
    };
    let kind = r.string("force", t, "kind").unwrap_or("zero");
    match kind {
        "zero" => {
            r.known_keys("force", t, &["kind"]);
            Some(ForceProfile::Zero)
        }
        "constant" => {
            let mu0 = force_mu0(r, t);
            r.known_keys("force", t, &["kind", "mu0"]);
            Some(ForceProfile::Constant { mu0: mu0? })
        }
        "sinusoidal" => {
            let mu0 = force_mu0(r, t);
            r.known_keys("force", t, &["kind", "mu0", "period_scale"]);
            let period_scale = r.positive("force", t, "period_scale").unwrap_or(1.0) * unit;
            Some(ForceProfile::Sinusoidal { mu0: mu0?, period_scale })
        }
        "tabulated" => {
            r.known_keys("force", t, &["kind", "samples"]);
            let Some(Value::Array(rows)) = t.get("samples") else {
                let msg = if t.contains_key("samples") { "expected [[t, mu], ...]" } else { "missing required key" };
                r.error("force", "samples", msg);
                return None;
            };
            let mut samples = Vec::with_capacity(rows.len());
            for row in rows {
                let pair = row.as_array().filter(|a| a.len() == 2).and_then(|a| {
                    let num = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
                    Some((num(&a[0])? * unit, num(&a[1])?))
                });
                match pair {
                    Some(p) => samples.push(p),
                    None => {
                        r.error("force", "samples", "expected [[t, mu], ...]");
                        return None;
                    }
                }
            }
            match ForceTable::new(samples) {
                Ok(table) => Some(ForceProfile::Tabulated(table)),
                Err(e) => {
                    r.error("force", "samples", e.to_string());
                    None
                }
            }
        }
        other => {
            r.error(
                "force",
                "kind",
                format!("expected one of zero, constant, sinusoidal, tabulated; got \"{other}\""),
            );
            None
        }
    }
}

fn force_mu0(r: &mut Reader, t: &Table) -> Option<f64> {
    let v = r.finite("force", t, "mu0");
    r.required("force", t, "mu0", v)
}

/// Parameters with the field applied, or `None` on error.
fn read_field(r: &mut Reader, t: Option<&Table>, params: &PhysicalParams) -> Option<PhysicalParams> {
    let t = t?;
    r.known_keys("field", t, &["enabled", "b", "larmor"]);
    let enabled = r.boolean("field", t, "enabled").unwrap_or(true);
    let b = r.finite("field", t, "b");
    let larmor = r.finite("field", t, "larmor");
    if !enabled {
        return Some(*params);
    }
    let out = match (b, larmor) {
        (Some(_), Some(_)) => {
            r.error("field", "larmor", "give either b or larmor, not both");
            return None;
        }
        (Some(b), None) => params.with_field(params.charge, b),
        (None, Some(w)) => params.with_larmor(w),
        (None, None) => {
            r.error("field", "", "needs b or larmor");
            return None;
        }
    };
    if out.larmor() == 0.0 {
        r.error("field", if larmor.is_some() { "larmor" } else { "b" }, "the field must be nonzero (or set enabled = false)");
    }
    Some(out)
}

fn read_axis(r: &mut Reader, t: &Table, key: &str, default: [f64; 3]) -> Option<Axis> {
    let [lo, hi, n] = match r.numbers("grid", t, key) {
        Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
        Some(_) => {
            r.error("grid", key, "expected [min, max, count]");
            return None;
        }
        None if t.contains_key(key) => return None,
        None => default,
    };
    if n.fract() != 0.0 || n < 2.0 {
        r.error("grid", key, format!("count must be an integer of at least 2, got {n}"));
        return None;
    }
    match Axis::new(lo, hi, n as usize) {
        Ok(a) => Some(a),
        Err(e) => {
            r.error("grid", key, e.to_string());
            None
        }
    }
}

fn read_grid(r: &mut Reader, t: &Table) -> Option<Grid3> {
    r.known_keys("grid", t, &["x", "y", "z"]);
    let x = read_axis(r, t, "x", DEFAULT_TRANSVERSE);
    let y = read_axis(r, t, "y", DEFAULT_TRANSVERSE);
    let z = read_axis(r, t, "z", DEFAULT_LONGITUDINAL);
    Some(Grid3::new(x?, y?, z?))
}

fn read_outputs(r: &mut Reader, doc: &Table) -> Option<Vec<OutputSpec>> {
    let items = match doc.get("output") {
        None => {
            r.error("", "output", "at least one [[output]] section is required");
            return None;
        }
        Some(Value::Array(items)) if !items.is_empty() => items,
        Some(_) => {
            r.error("", "output", "expected one or more [[output]] sections");
            return None;
        }
    };
    let mut out = Vec::new();
    let mut ok = true;
    for (i, item) in items.iter().enumerate() {
        let sec = format!("output.{i}");
        let Value::Table(t) = item else {
            r.error(&sec, "", "expected a table");
            ok = false;
            continue;
        };
        let kind = r.string(&sec, t, "kind");
        let spec = match r.required(&sec, t, "kind", kind) {
            Some("density-slice") => {
                r.known_keys(&sec, t, &["kind", "normal", "offset"]);
                let normal = match r.string(&sec, t, "normal").unwrap_or("z") {
                    "x" => Some(SliceAxis::X),
                    "y" => Some(SliceAxis::Y),
                    "z" => Some(SliceAxis::Z),
                    other => {
                        r.error(&sec, "normal", format!("expected x, y or z, got \"{other}\""));
                        None
                    }
                };
                let offset = match t.get("offset") {
                    None => Some(SliceOffset::Centroid),
                    Some(Value::String(s)) if s == "centroid" => Some(SliceOffset::Centroid),
                    Some(_) => r.finite(&sec, t, "offset").map(SliceOffset::At),
                };
                match (normal, offset) {
                    (Some(normal), Some(offset)) => Some(OutputSpec::DensitySlice { normal, offset }),
                    _ => None,
                }
            }
            Some("observables") => {
                r.known_keys(&sec, t, &["kind"]);
                Some(OutputSpec::Observables)
            }
            Some("validation-report") => {
                r.known_keys(&sec, t, &["kind"]);
                Some(OutputSpec::ValidationReport)
            }
            Some(other) => {
                r.error(
                    &sec,
                    "kind",
                    format!("expected density-slice, observables or validation-report, got \"{other}\""),
                );
                None
            }
            None => None,
        };
        match spec {
            Some(s) => out.push(s),
            None => ok = false,
        }
    }
    ok.then_some(out)
}
