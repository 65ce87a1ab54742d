//! Job configuration: a JSON object, dotted-path overrides, sweep expansion and
//! resolution into a typed [`JobConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rbsol::identities::validate_params;
use rbsol::SolitonParams;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Initial data when the config names none.
pub const DEFAULT_FIXTURE: &str = "cylinder";

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "RBSOL_OUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Fixture,
    Verify,
    Shoot,
    Flow,
    SelfsimCompare,
    Growth,
    Report,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Validate,
        Command::Fixture,
        Command::Verify,
        Command::Shoot,
        Command::Flow,
        Command::SelfsimCompare,
        Command::Growth,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Fixture => "fixture",
            Command::Verify => "verify",
            Command::Shoot => "shoot",
            Command::Flow => "flow",
            Command::SelfsimCompare => "selfsim-compare",
            Command::Growth => "growth",
            Command::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command '{s}'")))
    }

    fn needs_params(self) -> bool {
        self != Command::Report
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed-form or shot initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Gaussian,
    Cylinder,
    Sphere,
    Shot,
}

impl FixtureKind {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "cylinder" => Ok(Self::Cylinder),
            "sphere" => Ok(Self::Sphere),
            "shot" => Ok(Self::Shot),
            _ => Err(CliError::Config(format!("fixture: unknown kind '{s}' (gaussian, cylinder, sphere, shot)"))),
        }
    }

    pub fn is_closed_form(self) -> bool {
        self != Self::Shot
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndBc {
    Frozen,
    Extrapolate,
    ParityPole,
    Oracle,
}

impl EndBc {
    fn parse(key: &str, s: &str) -> Result<Self, CliError> {
        match s {
            "frozen" => Ok(Self::Frozen),
            "extrapolate" => Ok(Self::Extrapolate),
            "parity_pole" => Ok(Self::ParityPole),
            "oracle" => Ok(Self::Oracle),
            _ => Err(CliError::Config(format!("{key}: unknown boundary treatment '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

/// Thresholds; `None` selects a data-dependent default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: Option<f64>,
    pub defect: Option<f64>,
    pub order: f64,
    pub gaussian: f64,
    pub ode: f64,
    pub oracle_ode: f64,
    pub scal_tau: f64,
    pub growth: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: None,
            defect: None,
            order: 1.7,
            gaussian: 1e-8,
            ode: 1e-10,
            oracle_ode: 1e-12,
            scal_tau: 1e-6,
            growth: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: Command,
    pub params: Option<SolitonParams>,
    pub grid: Option<GridSpec>,
    pub fixture: Option<FixtureKind>,
    pub alpha: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_every: Option<f64>,
    pub resolutions: Option<Vec<usize>>,
    pub curvature_bound: Option<f64>,
    pub bc: (Option<EndBc>, Option<EndBc>),
    pub tolerances: Tolerances,
    pub input_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Worker threads for sweeps.
    pub workers: Option<usize>,
    /// Resolved configuration as written into the report.
    pub echo: Value,
    /// Non-fatal findings surfaced on stderr.
    pub warnings: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    n: Option<usize>,
    rho: Option<f64>,
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    r_min: Option<f64>,
    r_max: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBc {
    left: Option<String>,
    right: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    residual: Option<f64>,
    defect: Option<f64>,
    order: Option<f64>,
    gaussian: Option<f64>,
    ode: Option<f64>,
    oracle_ode: Option<f64>,
    scal_tau: Option<f64>,
    growth: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    params: Option<RawParams>,
    grid: Option<RawGrid>,
    fixture: Option<String>,
    alpha: Option<f64>,
    t_end: Option<f64>,
    snapshot_every: Option<f64>,
    resolutions: Option<Vec<usize>>,
    curvature_bound: Option<f64>,
    bc: Option<RawBc>,
    tolerances: Option<RawTolerances>,
    input_dir: Option<String>,
    output_dir: Option<String>,
    sweep: Option<BTreeMap<String, Vec<Value>>>,
    workers: Option<usize>,
}

/// Reads a config file; it must hold a JSON object.
pub fn load_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !v.is_object() {
        return Err(CliError::Config(format!("config {} must be a JSON object", path.display())));
    }
    Ok(v)
}

/// Flag values are JSON when they parse as JSON, plain strings otherwise.
pub fn flag_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets `a.b.c` inside `root`, creating intermediate objects.
pub fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key '{key}'")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("cannot set '{key}': '{part}' is inside a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("cannot set '{key}': parent is not an object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// One sweep point: the dotted assignments that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub assignments: Vec<(String, Value)>,
}

/// Removes the `sweep` key and returns the cartesian product of its axes in
/// key order, last key fastest. No sweep gives a single empty point.
pub fn expand_sweep(root: &mut Value) -> Result<Vec<SweepPoint>, CliError> {
    let Some(sweep) = root.as_object_mut().and_then(|o| o.remove("sweep")) else {
        return Ok(vec![SweepPoint { assignments: Vec::new() }]);
    };
    let axes: BTreeMap<String, Vec<Value>> =
        serde_json::from_value(sweep).map_err(|e| CliError::Config(format!("sweep: {e}")))?;
    if let Some((k, _)) = axes.iter().find(|(_, v)| v.is_empty()) {
        return Err(CliError::Config(format!("sweep.{k}: empty axis")));
    }
    let mut points = vec![SweepPoint { assignments: Vec::new() }];
    for (key, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.assignments.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required field {name}")))
}

fn positive(v: f64, name: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Resolves a fully assembled JSON object. `default_out` applies when the
/// object has no `output_dir`.
pub fn resolve(root: &Value, default_out: Option<&Path>) -> Result<JobConfig, CliError> {
    let raw: RawConfig = serde_json::from_value(root.clone()).map_err(|e| CliError::Config(format!("config: {e}")))?;
    if raw.sweep.is_some() {
        return Err(CliError::Config("sweep must be expanded before resolution".into()));
    }
    let command = Command::parse(raw.command.as_deref().ok_or_else(|| CliError::Config("missing required field command".into()))?)?;
    let mut warnings = Vec::new();

    let params = if command.needs_params() {
        let rp = raw.params.unwrap_or_default();
        let p = SolitonParams {
            n: require(rp.n, "params.n")?,
            rho: require(rp.rho, "params.rho")?,
            lambda: require(rp.lambda, "params.lambda")?,
        };
        let class = validate_params(&p).map_err(|e| CliError::Config(format!("params: {e}")))?;
        if class.excluded_analyticity || class.excluded_soliton {
            let what = if class.schouten {
                "the Schouten value 1/(2(n-1))"
            } else if class.excluded_soliton {
                "rho = 0, which has no rho-Einstein structure"
            } else {
                "the analyticity-excluded value 1/n"
            };
            let msg = format!("params.rho = {} is {what} for n = {}", p.rho, p.n);
            if command != Command::Flow {
                return Err(CliError::Config(format!("{msg}; only flow commands accept it")));
            }
            warnings.push(msg);
        }
        Some(p)
    } else {
        None
    };

    let grid = match raw.grid {
        Some(g) => Some(GridSpec {
            r_min: g.r_min.unwrap_or(0.0),
            r_max: require(g.r_max, "grid.r_max")?,
            count: match command {
                // the ladder supplies the counts
                Command::SelfsimCompare => g.count.unwrap_or(0),
                _ => require(g.count, "grid.count")?,
            },
        }),
        None => None,
    };
    let fixture = Some(FixtureKind::parse(raw.fixture.as_deref().unwrap_or(DEFAULT_FIXTURE))?);
    let bc_raw = raw.bc.unwrap_or_default();
    let bc = (
        bc_raw.left.as_deref().map(|s| EndBc::parse("bc.left", s)).transpose()?,
        bc_raw.right.as_deref().map(|s| EndBc::parse("bc.right", s)).transpose()?,
    );
    let tr = raw.tolerances.unwrap_or_default();
    let d = Tolerances::default();
    let tolerances = Tolerances {
        residual: tr.residual,
        defect: tr.defect,
        order: tr.order.unwrap_or(d.order),
        gaussian: tr.gaussian.unwrap_or(d.gaussian),
        ode: tr.ode.unwrap_or(d.ode),
        oracle_ode: tr.oracle_ode.unwrap_or(d.oracle_ode),
        scal_tau: tr.scal_tau.unwrap_or(d.scal_tau),
        growth: tr.growth,
    };

    let output_dir = match (raw.output_dir, default_out) {
        (Some(dir), _) => PathBuf::from(dir),
        (None, Some(root)) => root.to_path_buf(),
        (None, None) => match std::env::var_os(OUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(command.name()),
            None => return Err(CliError::Config(format!("missing required field output_dir (pass --out or set {OUT_ROOT_ENV})"))),
        },
    };

    let cfg = JobConfig {
        command,
        params,
        grid,
        fixture,
        alpha: raw.alpha,
        t_end: raw.t_end,
        snapshot_every: raw.snapshot_every,
        resolutions: raw.resolutions,
        curvature_bound: raw.curvature_bound,
        bc,
        tolerances,
        input_dir: raw.input_dir.map(PathBuf::from),
        output_dir,
        workers: raw.workers,
        echo: root.clone(),
        warnings,
    };
    check_command_fields(&cfg)?;
    Ok(cfg)
}

/// Per-command required fields, checked up front so that sweeps fail before any work starts.
fn check_command_fields(cfg: &JobConfig) -> Result<(), CliError> {
    let grid = || cfg.grid.ok_or_else(|| CliError::Config("missing required field grid".into()));
    let fixture = || require(cfg.fixture, "fixture");
    match cfg.command {
        Command::Validate => {}
        Command::Fixture | Command::Verify | Command::Growth => {
            grid()?;
            if fixture()? == FixtureKind::Shot {
                require(cfg.alpha, "alpha")?;
            }
        }
        Command::Shoot => {
            let g = grid()?;
            require(cfg.alpha, "alpha")?;
            if g.r_min != 0.0 {
                return Err(CliError::Config(format!("grid.r_min must be 0 for shooting, got {}", g.r_min)));
            }
        }
        Command::Flow => {
            grid()?;
            if fixture()? == FixtureKind::Shot {
                require(cfg.alpha, "alpha")?;
            }
            positive(require(cfg.t_end, "t_end")?, "t_end")?;
            if let Some(dt) = cfg.snapshot_every {
                positive(dt, "snapshot_every")?;
            }
        }
        Command::SelfsimCompare => {
            grid()?;
            if fixture()? == FixtureKind::Shot {
                return Err(CliError::Config("fixture: selfsim-compare needs a closed-form fixture".into()));
            }
            positive(require(cfg.t_end, "t_end")?, "t_end")?;
            let res = cfg.resolutions.as_ref().ok_or_else(|| CliError::Config("missing required field resolutions".into()))?;
            if res.is_empty() {
                return Err(CliError::Config("resolutions must not be empty".into()));
            }
        }
        Command::Report => {
            if cfg.input_dir.is_none() {
                return Err(CliError::Config("missing required field input_dir".into()));
            }
        }
    }
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
    }
    Ok(())
}
