//! Dispatch from a resolved [`JobConfig`] to the numerical modules.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rbsol::flow::{compare_to_oracle, run_flow, CompareOptions, FlowBc, FlowConfig, FlowState, FlowTermination, RK4_STABILITY};
use rbsol::geometry::EndKind;
use rbsol::grid::fmt17;
use rbsol::growth::{default_tol, fit_gradient_bounds_with, fit_quadratic_growth, rigidity_diagnostics};
use rbsol::identities::{identity_defects, radial_cross_defects, soliton_residual, validate_params, SolitonData};
use rbsol::par::Exec;
use rbsol::selfsim::{self_similar_state_with, tau};
use rbsol::solver::{cylinder_fixture, gaussian_fixture, shoot_from_pole_with, sphere_fixture, ShootOptions};
use rbsol::{make_grid, SolitonParams};
use serde_json::{json, Value};

use crate::config::{Command, EndBc, FixtureKind, JobConfig};
use crate::error::{CliError, InModule};
use crate::report::{Artifact, Check, JobReport};

const GEOMETRY: &str = "geometry_core";
const IDENTITIES: &str = "soliton_identities";
const SELFSIM: &str = "self_similar_flow";
const FLOW: &str = "rb_flow_integrator";
const SOLVER: &str = "soliton_solver";
const GROWTH: &str = "growth_analysis";
const RUNNER: &str = "cli_runner";

/// Threshold for closed-form data, whose derivatives are analytic.
const EXACT_TOL: f64 = 1e-10;

/// What a command produced before it is wrapped into a report.
#[derive(Default)]
struct Outcome {
    checks: Vec<Check>,
    results: Value,
    artifacts: Vec<Artifact>,
}

/// Runs the job and records wall time. Errors inside the numerical modules
/// are kept in the report; the exit code comes from [`job_exit_code`].
pub fn run_job(cfg: &JobConfig) -> (JobReport, Option<CliError>) {
    let start = Instant::now();
    let outcome = dispatch(cfg);
    let wall_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(o) => (
            JobReport { config: cfg.echo.clone(), checks: o.checks, results: o.results, artifacts: o.artifacts, wall_seconds, error: None },
            None,
        ),
        Err(e) => (
            JobReport {
                config: cfg.echo.clone(),
                checks: Vec::new(),
                results: Value::Null,
                artifacts: Vec::new(),
                wall_seconds,
                error: Some(e.to_string()),
            },
            Some(e),
        ),
    }
}

/// 0 when every check passes, 1 on a failed check or numerical error, 2 on bad input.
pub fn job_exit_code(rep: &JobReport, err: Option<&CliError>) -> i32 {
    match err {
        Some(e) => e.exit_code(),
        None if rep.all_pass() => 0,
        None => 1,
    }
}

fn dispatch(cfg: &JobConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Fixture => fixture(cfg),
        Command::Verify => verify(cfg),
        Command::Shoot => shoot(cfg),
        Command::Flow => flow(cfg),
        Command::SelfsimCompare => selfsim_compare(cfg),
        Command::Growth => growth(cfg),
        Command::Report => report(cfg),
    }
}

fn params(cfg: &JobConfig) -> SolitonParams {
    cfg.params.expect("resolved configs carry params")
}

fn shoot_options(cfg: &JobConfig) -> ShootOptions {
    ShootOptions { ode_tol: cfg.tolerances.ode, ..ShootOptions::default() }
}

fn build_data(cfg: &JobConfig, count: usize) -> Result<SolitonData, CliError> {
    let p = params(cfg);
    let g = cfg.grid.expect("resolved configs carry a grid");
    let grid = make_grid(g.r_min, g.r_max, count).in_module(GEOMETRY)?;
    match cfg.fixture.expect("resolved configs carry a fixture") {
        FixtureKind::Gaussian => gaussian_fixture(&p, &grid).in_module(SOLVER),
        FixtureKind::Cylinder => cylinder_fixture(&p, &grid).in_module(SOLVER),
        FixtureKind::Sphere => sphere_fixture(&p, &grid).in_module(SOLVER),
        FixtureKind::Shot => {
            if g.r_min != 0.0 {
                return Err(CliError::Config(format!("grid.r_min must be 0 for a shot fixture, got {}", g.r_min)));
            }
            let alpha = cfg.alpha.expect("shot fixtures carry alpha");
            let shot = shoot_from_pole_with(&p, alpha, g.r_max, count, &shoot_options(cfg)).in_module(SOLVER)?;
            shot.data.ok_or_else(|| CliError::Job {
                module: SOLVER,
                source: rbsol::Error::Precondition(format!("shot with alpha = {alpha} stopped at r = {} before five nodes", shot.stop_r)),
            })
        }
    }
}

fn base_data(cfg: &JobConfig) -> Result<SolitonData, CliError> {
    build_data(cfg, cfg.grid.expect("resolved configs carry a grid").count)
}

/// Residual-level threshold: fixed for analytic data, `10 h^2 max(sup|f|, 1)` for shots.
fn residual_threshold(cfg: &JobConfig, explicit: Option<f64>, s: &SolitonData) -> f64 {
    explicit.unwrap_or_else(|| match cfg.fixture {
        Some(k) if k.is_closed_form() => EXACT_TOL,
        _ => default_tol(s.grid(), s.f()),
    })
}

fn csv_columns(header: &str, grid: &[f64], cols: &[&[f64]]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (i, r) in grid.iter().enumerate() {
        out.push_str(&fmt17(*r));
        for c in cols {
            out.push(',');
            out.push_str(&fmt17(c[i]));
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn validate(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let p = params(cfg);
    let class = validate_params(&p).in_module(IDENTITIES)?;
    let n = p.nf();
    let distance = [p.rho.abs(), (p.rho - 1.0 / n).abs(), (p.rho - p.schouten_rho()).abs()]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        checks: vec![
            Check::at_least("dimension", n, 3.0, IDENTITIES),
            Check::above("rho_exclusion_distance", distance, 0.0, IDENTITIES),
        ],
        results: json!({
            "class": class,
            "shrinking_window": [0.0, p.schouten_rho()],
            "schouten_factor": p.schouten_factor(),
        }),
        artifacts: Vec::new(),
    })
}

fn profile_csv(s: &SolitonData) -> Result<Vec<u8>, CliError> {
    let scal = s.curvature().in_module(GEOMETRY)?.scal;
    Ok(csv_columns("r,w,f,R", s.grid().nodes(), &[s.geom().w().values(), s.f().values(), scal.values()]))
}

fn fixture(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let s = base_data(cfg)?;
    let res = soliton_residual(&s).in_module(IDENTITIES)?;
    let tol = residual_threshold(cfg, cfg.tolerances.residual, &s);
    Ok(Outcome {
        checks: vec![Check::at_most("residual_sup", res.sup_norm, tol, IDENTITIES)],
        results: json!({
            "residual": {"sup": res.sup_norm, "l2": res.l2_norm, "boundary_sup": res.boundary_sup, "relative_sup": res.relative_sup},
        }),
        artifacts: vec![Artifact::new("fixture.csv", profile_csv(&s)?)],
    })
}

fn verify(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let s = base_data(cfg)?;
    let res = soliton_residual(&s).in_module(IDENTITIES)?;
    let def = identity_defects(&s).in_module(IDENTITIES)?;
    let cross = radial_cross_defects(&s).in_module(IDENTITIES)?;
    let res_tol = residual_threshold(cfg, cfg.tolerances.residual, &s);
    let def_tol = residual_threshold(cfg, cfg.tolerances.defect, &s);
    let checks = vec![
        Check::at_most("residual_sup", res.sup_norm, res_tol, IDENTITIES),
        Check::at_most("defect_trace", def.sup[0], def_tol, IDENTITIES),
        Check::at_most("defect_gradient", def.sup[1], def_tol, IDENTITIES),
        Check::at_most("defect_laplacian", def.sup[2], def_tol, IDENTITIES),
        Check::at_most("cross_defect", cross.sup_abs(), def_tol, IDENTITIES),
    ];
    let csv = csv_columns(
        "r,res_rad,res_sph,d_trace,d_gradient,d_laplacian",
        s.grid().nodes(),
        &[res.res_rad.values(), res.res_sph.values(), def.d1.values(), def.d2.values(), def.d3.values()],
    );
    Ok(Outcome {
        checks,
        results: json!({
            "residual": {"sup": res.sup_norm, "l2": res.l2_norm, "boundary_sup": res.boundary_sup, "relative_sup": res.relative_sup},
            "defects": {"sup": def.sup, "boundary_sup": def.boundary_sup, "relative_sup": def.relative_sup},
        }),
        artifacts: vec![Artifact::new("residual.csv", csv)],
    })
}

fn shoot(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let p = params(cfg);
    let g = cfg.grid.expect("resolved configs carry a grid");
    let alpha = cfg.alpha.expect("shoot carries alpha");
    let shot = shoot_from_pole_with(&p, alpha, g.r_max, g.count, &shoot_options(cfg)).in_module(SOLVER)?;
    let mut checks = vec![Check::at_least("stop_r", shot.stop_r, g.r_max, SOLVER)];
    if let Some(data) = &shot.data {
        let res = shot.residual_sup.unwrap_or(f64::NAN);
        let tol = cfg.tolerances.residual.unwrap_or_else(|| default_tol(data.grid(), data.f()));
        checks.push(Check::at_most("residual_sup", res, tol, IDENTITIES));
        if alpha == p.lambda {
            let grid = data.grid();
            let dev = (0..grid.count()).map(|i| (data.geom().w()[i] - grid.node(i)).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most("gaussian_match", dev, cfg.tolerances.gaussian, SOLVER));
        }
    }
    let mut csv = Vec::new();
    shot.write_csv(&mut csv).in_module(SOLVER)?;
    let header = shot.header(&p);
    Ok(Outcome {
        checks,
        results: json!({ "shot": header, "last_w_prime": shot.last_w_prime }),
        artifacts: vec![Artifact::new("shot.csv", csv), Artifact::json("shot_header.json", &header)],
    })
}

fn flow_bc(b: EndBc, key: &str, allow_oracle: bool) -> Result<FlowBc, CliError> {
    match b {
        EndBc::Frozen => Ok(FlowBc::Frozen),
        EndBc::Extrapolate => Ok(FlowBc::Extrapolate),
        EndBc::ParityPole => Ok(FlowBc::ParityPole),
        EndBc::Oracle if allow_oracle => Ok(FlowBc::Oracle),
        EndBc::Oracle => Err(CliError::Config(format!("{key}: oracle boundary data exist only for selfsim-compare"))),
    }
}

/// Explicit choice, else a parity pole at geometric poles and extrapolation elsewhere.
fn flow_config(cfg: &JobConfig, ends: (EndKind, EndKind), allow_oracle: bool) -> Result<FlowConfig, CliError> {
    let pick = |explicit: Option<EndBc>, end: EndKind, key: &str| match explicit {
        Some(b) => flow_bc(b, key, allow_oracle),
        None if end == EndKind::Pole => Ok(FlowBc::ParityPole),
        None => Ok(FlowBc::Extrapolate),
    };
    Ok(FlowConfig::with_ends(pick(cfg.bc.0, ends.0, "bc.left")?, pick(cfg.bc.1, ends.1, "bc.right")?))
}

fn flow(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let p = params(cfg);
    let s = base_data(cfg)?;
    let fcfg = flow_config(cfg, s.geom().ends(), false)?;
    let t_end = cfg.t_end.expect("flow carries t_end");
    let every = cfg.snapshot_every.unwrap_or(t_end / 4.0);
    let initial = FlowState::from_geometry(0.0, s.geom()).in_module(FLOW)?;
    let run = run_flow(&initial, t_end, every, &fcfg).in_module(FLOW)?;

    let last = run.snapshots.last().expect("runs keep the initial snapshot");
    let m = last.w_sq.len();
    let lo = usize::from(matches!(fcfg.left, FlowBc::ParityPole));
    let hi = m - usize::from(matches!(fcfg.right, FlowBc::ParityPole));
    let min_w_sq = last.w_sq.values()[lo..hi].iter().copied().fold(f64::INFINITY, f64::min);
    let mut checks = vec![
        Check::above("min_w_sq", min_w_sq, 0.0, FLOW),
        Check::at_most("max_cfl", run.max_cfl, RK4_STABILITY, FLOW),
    ];
    match run.termination {
        FlowTermination::Completed => checks.push(Check::at_least("t_reached", run.final_state.t, t_end, FLOW)),
        FlowTermination::BlowUp { t, .. } if p.lambda > 0.0 => {
            checks.push(Check::below("blowup_time", t, 0.5 / p.lambda, FLOW));
        }
        FlowTermination::BlowUp { sup_scal, .. } => {
            checks.push(Check::at_most("sup_scal", sup_scal, fcfg.blowup_ceiling, FLOW));
        }
    }
    if matches!(fcfg.left, FlowBc::Frozen) || matches!(fcfg.right, FlowBc::Frozen) {
        let trusted = run.trusted_region.map_or(0.0, |(a, b)| (b - a + 1) as f64);
        checks.push(Check::at_least("trusted_nodes", trusted, 1.0, FLOW));
    }
    if cfg.fixture == Some(FixtureKind::Cylinder) {
        // R tau(t) is conserved along the shrinking cylinder
        let r0 = run.snapshots[0].sup_scal;
        let drift = run
            .snapshots
            .iter()
            .filter(|sn| tau(sn.t, p.lambda) > 0.0)
            .map(|sn| (sn.sup_scal * tau(sn.t, p.lambda) / r0 - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("scal_tau_drift", drift, cfg.tolerances.scal_tau, SELFSIM));
    }

    let grid = &run.final_state.grid;
    let mut artifacts = Vec::with_capacity(run.snapshots.len() + 1);
    for (i, sn) in run.snapshots.iter().enumerate() {
        let mut csv = Vec::new();
        sn.write_csv(grid, &mut csv).map_err(|e| CliError::io("snapshot", e))?;
        artifacts.push(Artifact::new(format!("snap_{i}.csv"), csv));
    }
    let manifest = run.manifest();
    artifacts.push(Artifact::json("snapshots.json", &manifest));
    Ok(Outcome {
        checks,
        results: json!({
            "steps": run.steps,
            "max_cfl": run.max_cfl,
            "termination": run.termination,
            "snapshot_times": manifest.times,
            "trusted_region": manifest.trusted_region,
        }),
        artifacts,
    })
}

fn selfsim_compare(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let resolutions = cfg.resolutions.clone().expect("selfsim-compare carries resolutions");
    let t_end = cfg.t_end.expect("selfsim-compare carries t_end");
    let probe = build_data(cfg, resolutions[0])?;
    let opts = CompareOptions {
        flow: flow_config(cfg, probe.geom().ends(), true)?,
        ode_tol: cfg.tolerances.oracle_ode,
        ..CompareOptions::default()
    };
    let family = |count: usize| {
        build_data(cfg, count).map_err(|e| match e {
            CliError::Job { source, .. } => source,
            other => rbsol::Error::Precondition(other.to_string()),
        })
    };
    let table = compare_to_oracle(family, t_end, &resolutions, &opts).in_module(FLOW)?;

    let orders: Vec<f64> = table.orders.iter().flatten().copied().collect();
    let check = if orders.is_empty() {
        // both sides agree to roundoff at every resolution, so no order is observable
        let worst = table.rows.iter().map(|r| r.error).fold(0.0, f64::max);
        Check::at_most("max_oracle_error", worst, table.noise_floor, FLOW)
    } else {
        let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
        Check::at_least("min_observed_order", min, cfg.tolerances.order, FLOW)
    };

    let mut csv = String::from("count,h,error,err_w_sq_arclength,err_length,rel_err_a,rel_err_w_sq,steps,order\n");
    for (i, r) in table.rows.iter().enumerate() {
        let order = match i.checked_sub(1).and_then(|j| table.orders[j]) {
            Some(o) => fmt17(o),
            None => String::new(),
        };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.count,
            fmt17(r.h),
            fmt17(r.error),
            fmt17(r.err_w_sq_arclength),
            fmt17(r.err_length),
            fmt17(r.rel_err_a),
            fmt17(r.rel_err_w_sq),
            r.steps,
            order
        )
        .expect("writing to a String");
    }

    let finest = build_data(cfg, *resolutions.iter().max().expect("non-empty ladder"))?;
    let sol = self_similar_state_with(&finest, t_end, cfg.tolerances.oracle_ode, Exec::default()).in_module(SELFSIM)?;
    let mut ss_csv = Vec::new();
    sol.write_csv(&mut ss_csv).map_err(|e| CliError::io("selfsim profile", e))?;

    Ok(Outcome {
        checks: vec![check],
        results: json!({ "orders": table.orders, "noise_floor": table.noise_floor, "errors": table.rows.iter().map(|r| r.error).collect::<Vec<_>>() }),
        artifacts: vec![
            Artifact::new("convergence.csv", csv.into_bytes()),
            Artifact::json("convergence.json", &table),
            Artifact::new("selfsim.csv", ss_csv),
            Artifact::json("selfsim_header.json", &sol.header()),
        ],
    })
}

fn growth(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let s = base_data(cfg)?.normalized_min(1.0);
    let scal = s.curvature().in_module(GEOMETRY)?.scal;
    let interior_sup = (1..scal.len() - 1).map(|i| scal[i].abs()).fold(0.0, f64::max);
    let k_bound = cfg.curvature_bound.unwrap_or(interior_sup);
    let bounds = fit_gradient_bounds_with(&s, k_bound, cfg.tolerances.growth).in_module(GROWTH)?;
    let quad = fit_quadratic_growth(&s).in_module(GROWTH)?;
    let rig = rigidity_diagnostics(&s, cfg.tolerances.growth).in_module(GROWTH)?;
    let riccati_tol = default_tol(s.grid(), &rig.riccati_defect);
    let checks = vec![
        Check::at_most("gradient_bound_violations", bounds.violation_count as f64, 0.0, GROWTH),
        Check::at_most("quadratic_growth_violations", quad.violation_count as f64, 0.0, GROWTH),
        Check::at_most("riccati_defect_sup", rig.riccati_defect_sup, riccati_tol, GROWTH),
    ];
    let csv = csv_columns(
        "r,f,phi,psi,riccati",
        s.grid().nodes(),
        &[s.f().values(), bounds.phi_profile.values(), bounds.psi_profile.values(), rig.riccati_defect.values()],
    );
    let certificates = json!({ "gradient_bounds": bounds, "quadratic_growth": quad, "rigidity": rig });
    Ok(Outcome {
        checks,
        results: json!({
            "gradient_bounds": {"a": bounds.a_up, "b": bounds.b_up, "c": bounds.c_low, "d": bounds.d_low, "curvature_bound": k_bound, "degenerate": bounds.degenerate},
            "quadratic_growth": {"a": quad.a, "b": quad.b, "c": quad.c, "d": quad.d, "c_unshifted": quad.c_unshifted},
            "rigidity": {
                "convexity_radius": rig.convexity_radius,
                "f_subharmonic_region": rig.f_subharmonic_region,
                "scal_variation": rig.scal_variation,
                "residual_sup": rig.residual_sup,
            },
        }),
        artifacts: vec![Artifact::new("growth.csv", csv), Artifact::json("certificates.json", &certificates)],
    })
}

/// Job directories under `root`: `root` itself and its immediate subdirectories
/// holding a `report.json`, in name order.
fn report_dirs(root: &Path, skip: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs = Vec::new();
    if root.join("report.json").is_file() {
        dirs.push(root.to_path_buf());
    }
    let entries = std::fs::read_dir(root).map_err(|e| CliError::io(root.display(), e))?;
    let mut subs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("report.json").is_file() && !same_path(p, skip))
        .collect();
    subs.sort();
    dirs.extend(subs);
    Ok(dirs)
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn report(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let input = cfg.input_dir.clone().expect("report carries input_dir");
    if same_path(&input, &cfg.output_dir) {
        return Err(CliError::Config("output_dir must differ from input_dir".into()));
    }
    let dirs = report_dirs(&input, &cfg.output_dir)?;
    let mut mismatches = 0usize;
    let mut failed = 0usize;
    let mut csv = String::from("job,name,value,threshold,pass,module\n");
    for dir in &dirs {
        let label = dir.strip_prefix(&input).ok().filter(|p| !p.as_os_str().is_empty()).map_or(".".into(), |p| p.display().to_string());
        let text = std::fs::read_to_string(dir.join("report.json")).map_err(|e| CliError::io(dir.display(), e))?;
        let rep: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
        if rep.get("error").is_some_and(|e| !e.is_null()) {
            failed += 1;
        }
        for c in rep["checks"].as_array().into_iter().flatten() {
            let pass = c["pass"].as_bool().unwrap_or(false);
            failed += usize::from(!pass);
            let num = |k: &str| c[k].as_f64().map_or_else(String::new, fmt17);
            writeln!(
                csv,
                "{label},{},{},{},{pass},{}",
                c["name"].as_str().unwrap_or(""),
                num("value"),
                num("threshold"),
                c["module"].as_str().unwrap_or("")
            )
            .expect("writing to a String");
        }
        let manifest = dir.join("manifest.json");
        if manifest.is_file() {
            let text = std::fs::read_to_string(&manifest).map_err(|e| CliError::io(manifest.display(), e))?;
            let m: crate::report::Manifest =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest.display())))?;
            for entry in &m.artifacts {
                let ok = std::fs::read(dir.join(&entry.file)).is_ok_and(|b| crate::report::sha256_hex(&b) == entry.sha256);
                mismatches += usize::from(!ok);
            }
        }
    }
    Ok(Outcome {
        checks: vec![
            Check::at_least("reports_found", dirs.len() as f64, 1.0, RUNNER),
            Check::at_most("hash_mismatches", mismatches as f64, 0.0, RUNNER),
            Check::at_most("failed_checks", failed as f64, 0.0, RUNNER),
        ],
        results: json!({ "reports": dirs.len() }),
        artifacts: vec![Artifact::new("checks.csv", csv.into_bytes())],
    })
}

/// Pass counts of a finished job.
pub struct JobSummary {
    pub passed: usize,
    pub total: usize,
    pub error: Option<String>,
}

impl JobSummary {
    pub fn of(rep: &JobReport) -> Self {
        Self { passed: rep.checks.iter().filter(|c| c.pass).count(), total: rep.checks.len(), error: rep.error.clone() }
    }
}
