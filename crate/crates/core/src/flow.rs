//! Method-of-lines integration of `dg/dt = -2 (Ric - rho R g)` for
//! `g = a dx^2 + w^2 g_S` on a fixed coordinate grid.

use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature, CurvatureData, EndKind, WarpedGeometry};
use crate::grid::{cumulative_trapezoid, fmt17, RadialGrid, RadialProfile};
use crate::identities::{soliton_residual, SolitonData};
use crate::interp::Pchip;
use crate::ode::{Dopri5, OdeOptions};
use crate::par::{self, Exec};
use crate::params::SolitonParams;
use crate::selfsim::{self_similar_state_with, tau};

/// Boundary values `(a, w_sq)` prescribed as a function of time.
#[derive(Clone)]
pub struct BoundaryData(Arc<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync>);

impl BoundaryData {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        (self.0)(t)
    }
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BoundaryData(..)")
    }
}

/// Treatment of one end of the window.
#[derive(Debug, Clone, Default)]
pub enum FlowBc {
    /// Hold the initial values. The trusted region shrinks by one node per step.
    #[default]
    Frozen,
    /// Linear extrapolation of the time derivative from the two inner neighbours.
    Extrapolate,
    /// Smooth pole: `w_sq = 0` at the node, reflection parity for the stencils.
    ParityPole,
    /// Values prescribed in time.
    Dirichlet(BoundaryData),
    /// Dirichlet data taken from the self-similar solution of the source soliton.
    /// Only meaningful inside [`compare_to_oracle`].
    Oracle,
}

impl FlowBc {
    fn end_kind(&self) -> EndKind {
        match self {
            FlowBc::ParityPole => EndKind::Pole,
            _ => EndKind::Open,
        }
    }

}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub left: FlowBc,
    pub right: FlowBc,
    /// Diffusive stability factor in `dt = sigma h^2 min(a) / (2(n-1))`.
    pub sigma: f64,
    /// Reaction limit `dt <= reaction / sup|R|`.
    pub reaction: f64,
    /// Abort once `sup|R|` exceeds this.
    pub blowup_ceiling: f64,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            left: FlowBc::Frozen,
            right: FlowBc::Frozen,
            sigma: 0.25,
            reaction: 0.1,
            blowup_ceiling: 1e6,
            max_steps: 50_000_000,
        }
    }
}

impl FlowConfig {
    pub fn with_ends(left: FlowBc, right: FlowBc) -> Self {
        Self { left, right, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub grid: RadialGrid,
    pub a: RadialProfile,
    pub w_sq: RadialProfile,
    pub params: SolitonParams,
}

impl FlowState {
    pub fn new(t: f64, grid: RadialGrid, a: RadialProfile, w_sq: RadialProfile, params: SolitonParams) -> Result<Self> {
        grid.check_profile(&a)?;
        grid.check_profile(&w_sq)?;
        params.check()?;
        Ok(Self { t, grid, a, w_sq, params })
    }

    pub fn from_geometry(t: f64, geom: &WarpedGeometry) -> Result<Self> {
        Self::new(
            t,
            geom.grid().clone(),
            geom.a().clone(),
            geom.w().map(|w| w * w),
            *geom.params(),
        )
    }

    pub fn geometry(&self, left: EndKind, right: EndKind) -> Result<WarpedGeometry> {
        WarpedGeometry::build(
            self.params,
            self.grid.clone(),
            self.w_sq.map(f64::sqrt),
            self.a.clone(),
            left,
            right,
        )
    }

    pub fn curvature(&self, left: EndKind, right: EndKind) -> Result<CurvatureData> {
        curvature(&self.geometry(left, right)?)
    }

    fn check_positive(&self, cfg: &FlowConfig) -> Result<()> {
        let m = self.grid.count();
        for i in 0..m {
            if !(self.a[i] > 0.0) {
                return Err(Error::PositivityLoss { t: self.t, field: "a", index: i, value: self.a[i] });
            }
            let pole = (i == 0 && matches!(cfg.left, FlowBc::ParityPole))
                || (i + 1 == m && matches!(cfg.right, FlowBc::ParityPole));
            if !pole && !(self.w_sq[i] > 0.0) {
                return Err(Error::PositivityLoss { t: self.t, field: "w_sq", index: i, value: self.w_sq[i] });
            }
        }
        Ok(())
    }

    fn min_w_sq(&self) -> f64 {
        self.w_sq.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min)
    }
}

/// Right-hand side with one-sided stencils at both ends and no boundary treatment.
pub fn flow_rhs(st: &FlowState) -> Result<(RadialProfile, RadialProfile)> {
    let k = st.curvature(EndKind::Open, EndKind::Open)?;
    Ok(rhs_from_curvature(st, &k))
}

fn rhs_from_curvature(st: &FlowState, k: &CurvatureData) -> (RadialProfile, RadialProfile) {
    let rho = st.params.rho;
    let m = st.grid.count();
    let mut da = Vec::with_capacity(m);
    let mut dw = Vec::with_capacity(m);
    for i in 0..m {
        let r = k.scal[i];
        da.push(-2.0 * st.a[i] * (k.ric_rad[i] - rho * r));
        dw.push(-2.0 * st.w_sq[i] * (k.ric_sph[i] - rho * r));
    }
    (RadialProfile(da), RadialProfile(dw))
}

/// Right-hand side with the configured boundary treatment applied.
pub fn flow_rhs_with(st: &FlowState, cfg: &FlowConfig) -> Result<(RadialProfile, RadialProfile)> {
    let k = st.curvature(cfg.left.end_kind(), cfg.right.end_kind())?;
    let (mut da, mut dw) = rhs_from_curvature(st, &k);
    let m = st.grid.count();
    for (bc, i, i1, i2) in [(&cfg.left, 0, 1, 2), (&cfg.right, m - 1, m - 2, m - 3)] {
        match bc {
            FlowBc::Frozen | FlowBc::Dirichlet(_) | FlowBc::Oracle => {
                da.0[i] = 0.0;
                dw.0[i] = 0.0;
            }
            FlowBc::Extrapolate => {
                da.0[i] = 2.0 * da[i1] - da[i2];
                dw.0[i] = 2.0 * dw[i1] - dw[i2];
            }
            FlowBc::ParityPole => dw.0[i] = 0.0,
        }
    }
    Ok((da, dw))
}

fn apply_dirichlet(st: &mut FlowState, cfg: &FlowConfig) -> Result<()> {
    let m = st.grid.count();
    for (bc, i) in [(&cfg.left, 0), (&cfg.right, m - 1)] {
        match bc {
            FlowBc::Dirichlet(d) => {
                let (a, w_sq) = d.at(st.t)?;
                st.a.0[i] = a;
                st.w_sq.0[i] = w_sq;
            }
            FlowBc::Oracle => {
                return Err(Error::Precondition("oracle boundary data needs a source soliton".into()));
            }
            _ => {}
        }
    }
    Ok(())
}

fn axpy(st: &FlowState, c: f64, k: &(RadialProfile, RadialProfile)) -> FlowState {
    FlowState {
        t: st.t + c,
        grid: st.grid.clone(),
        a: st.a.zip_map(&k.0, |x, d| x + c * d),
        w_sq: st.w_sq.zip_map(&k.1, |x, d| x + c * d),
        params: st.params,
    }
}

/// One classical Runge-Kutta step.
pub fn step(st: &FlowState, dt: f64, cfg: &FlowConfig) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidStep { dt, reason: "must be positive and finite".into() });
    }
    let bound = stability_bound(st, RK4_STABILITY);
    if dt > bound {
        return Err(Error::InvalidStep { dt, reason: format!("exceeds stability bound {bound:e}") });
    }
    let stage = |s: FlowState| -> Result<(FlowState, (RadialProfile, RadialProfile))> {
        let mut s = s;
        apply_dirichlet(&mut s, cfg)?;
        let k = flow_rhs_with(&s, cfg)?;
        Ok((s, k))
    };
    let (s0, k1) = stage(st.clone())?;
    let (_, k2) = stage(axpy(&s0, 0.5 * dt, &k1))?;
    let (_, k3) = stage(axpy(&s0, 0.5 * dt, &k2))?;
    let (_, k4) = stage(axpy(&s0, dt, &k3))?;
    let comb = |x: &RadialProfile, a: &RadialProfile, b: &RadialProfile, c: &RadialProfile, d: &RadialProfile| {
        RadialProfile(
            (0..x.len())
                .map(|i| x[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect(),
        )
    };
    let mut next = FlowState {
        t: st.t + dt,
        grid: st.grid.clone(),
        a: comb(&s0.a, &k1.0, &k2.0, &k3.0, &k4.0),
        w_sq: comb(&s0.w_sq, &k1.1, &k2.1, &k3.1, &k4.1),
        params: st.params,
    };
    apply_dirichlet(&mut next, cfg)?;
    next.check_positive(cfg)?;
    Ok(next)
}

/// Length of the RK4 stability interval on the negative real axis; `step`
/// rejects anything beyond this multiple of the unit diffusive bound.
pub const RK4_STABILITY: f64 = 2.78;

/// Diffusive bound `sigma h^2 min(a) / (2(n-1))`.
pub fn stability_bound(st: &FlowState, sigma: f64) -> f64 {
    let h = st.grid.spacing();
    sigma * h * h * st.a.min() / (2.0 * (st.params.nf() - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub a: RadialProfile,
    pub w_sq: RadialProfile,
    pub scal: RadialProfile,
    pub min_w_sq: f64,
    pub sup_scal: f64,
}

impl Snapshot {
    /// Rows `x,a,w_sq,R`.
    pub fn write_csv<W: Write>(&self, grid: &RadialGrid, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,a,w_sq,R")?;
        for i in 0..grid.count() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt17(grid.node(i)),
                fmt17(self.a[i]),
                fmt17(self.w_sq[i]),
                fmt17(self.scal[i])
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowTermination {
    Completed,
    /// `sup|R|` crossed the ceiling at time `t`.
    BlowUp { t: f64, sup_scal: f64 },
}

#[derive(Debug, Clone)]
pub struct FlowRunReport {
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    /// Largest `dt` used, relative to the unit-sigma diffusive bound.
    pub max_cfl: f64,
    pub termination: FlowTermination,
    /// Nodes not reached by frozen-boundary influence, if any remain.
    pub trusted_region: Option<(usize, usize)>,
    pub final_state: FlowState,
    pub gauge: String,
}

/// JSON manifest accompanying the snapshot files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub times: Vec<f64>,
    pub files: Vec<String>,
    pub params: SolitonParams,
    pub gauge: String,
    pub trusted_region: Option<(f64, f64)>,
    pub termination: FlowTermination,
    pub steps: usize,
    pub max_cfl: f64,
}

impl FlowRunReport {
    pub fn manifest(&self) -> SnapshotManifest {
        let g = &self.final_state.grid;
        SnapshotManifest {
            times: self.snapshots.iter().map(|s| s.t).collect(),
            files: (0..self.snapshots.len()).map(|i| format!("snap_{i}.csv")).collect(),
            params: self.final_state.params,
            gauge: self.gauge.clone(),
            trusted_region: self.trusted_region.map(|(lo, hi)| (g.node(lo), g.node(hi))),
            termination: self.termination,
            steps: self.steps,
            max_cfl: self.max_cfl,
        }
    }
}

fn snapshot(st: &FlowState, k: &CurvatureData) -> Snapshot {
    Snapshot {
        t: st.t,
        a: st.a.clone(),
        w_sq: st.w_sq.clone(),
        scal: k.scal.clone(),
        min_w_sq: st.min_w_sq(),
        sup_scal: k.scal.sup_abs(),
    }
}

pub fn run_flow(initial: &FlowState, t_end: f64, snapshot_every: f64, cfg: &FlowConfig) -> Result<FlowRunReport> {
    if !(t_end > initial.t) {
        return Err(Error::Precondition(format!("t_end = {t_end} must exceed t = {}", initial.t)));
    }
    if !(snapshot_every > 0.0) {
        return Err(Error::Precondition("snapshot interval must be positive".into()));
    }
    let (lk, rk) = (cfg.left.end_kind(), cfg.right.end_kind());
    let m = initial.grid.count();
    let mut st = initial.clone();
    apply_dirichlet(&mut st, cfg)?;
    st.check_positive(cfg)?;
    let t0 = st.t;
    let mut k = st.curvature(lk, rk)?;
    let mut snapshots = vec![snapshot(&st, &k)];
    let mut next_snap = 1usize;
    let mut lo_shrink = 0usize;
    let mut hi_shrink = 0usize;
    let frozen_l = matches!(cfg.left, FlowBc::Frozen);
    let frozen_r = matches!(cfg.right, FlowBc::Frozen);
    let mut steps = 0usize;
    let mut max_cfl = 0.0f64;
    let mut termination = FlowTermination::Completed;
    let snap_time = |j: usize| (t0 + j as f64 * snapshot_every).min(t_end);

    while st.t < t_end {
        let sup_r = k.scal.sup_abs();
        if sup_r > cfg.blowup_ceiling || !sup_r.is_finite() {
            termination = FlowTermination::BlowUp { t: st.t, sup_scal: sup_r };
            if snapshots.last().is_none_or(|s| s.t < st.t) {
                snapshots.push(snapshot(&st, &k));
            }
            break;
        }
        if steps >= cfg.max_steps {
            return Err(Error::Integration { t: st.t, reason: format!("step budget {} exhausted", cfg.max_steps) });
        }
        let unit = stability_bound(&st, 1.0);
        let mut dt = cfg.sigma * unit;
        if sup_r > 0.0 {
            dt = dt.min(cfg.reaction / sup_r);
        }
        let target = snap_time(next_snap);
        let mut hit = false;
        if st.t + dt >= target * (1.0 - 4.0 * f64::EPSILON) {
            dt = target - st.t;
            hit = true;
        }
        st = step(&st, dt, cfg)?;
        if hit {
            st.t = target;
        }
        steps += 1;
        max_cfl = max_cfl.max(dt / unit);
        if frozen_l {
            lo_shrink += 1;
        }
        if frozen_r {
            hi_shrink += 1;
        }
        k = st.curvature(lk, rk)?;
        if hit {
            snapshots.push(snapshot(&st, &k));
            next_snap += 1;
        }
    }
    let trusted_region = (lo_shrink + hi_shrink < m).then(|| (lo_shrink, m - 1 - hi_shrink));
    Ok(FlowRunReport {
        snapshots,
        steps,
        max_cfl,
        termination,
        trusted_region,
        final_state: st,
        gauge: "fixed coordinate grid, lapse evolved".into(),
    })
}

/// Boundary data from the self-similar solution: the trajectory `phi` of the
/// boundary node and its variation `dphi/dr` are integrated alongside the run.
fn oracle_boundary(s: &SolitonData, index: usize, ode_tol: f64) -> Result<BoundaryData> {
    let grid = s.grid();
    let jet = s.potential_jet()?;
    let (lo, hi) = (grid.r_min(), grid.r_max());
    let f1 = Pchip::new(grid.nodes(), jet.d1.values())?;
    let f2 = Pchip::new(grid.nodes(), jet.d2.values())?;
    let w0 = Pchip::new(grid.nodes(), s.geom().w().values())?;
    let lambda = s.params().lambda;
    let r0 = grid.node(index);
    let start = Dopri5::new(0.0, [r0, 1.0], OdeOptions::with_tol(ode_tol));
    let state = Mutex::new(start.clone());
    Ok(BoundaryData::new(move |t| {
        let mut ode = state.lock().expect("boundary integrator poisoned");
        if t < ode.t {
            *ode = start.clone();
        }
        let rhs = |time: f64, y: &[f64; 2]| {
            let x = y[0].clamp(lo, hi);
            let tau_t = tau(time, lambda);
            [f1.eval(x).unwrap_or(0.0) / tau_t, f2.eval(x).unwrap_or(0.0) * y[1] / tau_t]
        };
        ode.advance_to(rhs, t, |_, _| None::<()>)
            .map_err(|_| Error::Integration { t, reason: format!("boundary trajectory from r = {r0} failed") })?;
        let [phi, dphi] = ode.y;
        let w = w0
            .eval(phi)
            .ok_or_else(|| Error::EmptyRegion(format!("boundary trajectory from r = {r0} left the window at t = {t}")))?;
        let tau_t = tau(t, lambda);
        Ok((tau_t * dphi * dphi, tau_t * w * w))
    }))
}

/// One resolution of an oracle comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub count: usize,
    pub h: f64,
    /// Soliton residual of the source at this resolution.
    pub source_residual: f64,
    /// Node range (coordinates) where both sides are defined.
    pub region: (f64, f64),
    /// `sup |w_sq_flow(s) - w_sq_oracle(s)|` with `s` the arclength.
    pub err_w_sq_arclength: f64,
    /// Difference of total arclength across the region.
    pub err_length: f64,
    /// Invariant-pair error, the max of the two above.
    pub error: f64,
    /// Relative sup error of the lapse at common nodes.
    pub rel_err_a: f64,
    /// Relative sup error of `w_sq` at common nodes.
    pub rel_err_w_sq: f64,
    /// Range of the evolved lapse over the common region.
    pub a_range: (f64, f64),
    /// Range of the evolved `w_sq` over the common region.
    pub w_sq_range: (f64, f64),
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub t_end: f64,
    pub rows: Vec<ComparisonRow>,
    /// Observed order between successive rows; `None` when both errors sit
    /// below the noise floor.
    pub orders: Vec<Option<f64>>,
    pub noise_floor: f64,
}

/// `log2(e_coarse / e_fine)` for a halving ladder, `None` below `floor`.
pub fn observed_order(coarse: f64, fine: f64, h_ratio: f64, floor: f64) -> Option<f64> {
    if coarse <= floor && fine <= floor {
        return None;
    }
    Some((coarse / fine.max(f64::MIN_POSITIVE)).ln() / h_ratio.ln())
}

/// Options for [`compare_to_oracle`].
#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub flow: FlowConfig,
    pub ode_tol: f64,
    pub noise_floor: f64,
    /// Scheduling across resolutions.
    pub exec: Exec,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { flow: FlowConfig::with_ends(FlowBc::Extrapolate, FlowBc::Extrapolate), ode_tol: 1e-12, noise_floor: 1e-9, exec: Exec::default() }
    }
}

/// Run the flow from `family(count)` for each resolution and compare with the
/// self-similar construction.
pub fn compare_to_oracle<F>(family: F, t_end: f64, resolutions: &[usize], opts: &CompareOptions) -> Result<ConvergenceTable>
where
    F: Fn(usize) -> Result<SolitonData> + Sync + Send,
{
    if resolutions.is_empty() {
        return Err(Error::Precondition("no resolutions given".into()));
    }
    let rows: Vec<Result<ComparisonRow>> =
        par::map_slice(opts.exec, resolutions, |&count| compare_one(&family(count)?, t_end, opts));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let orders = rows
        .windows(2)
        .map(|w| observed_order(w[0].error, w[1].error, w[0].h / w[1].h, opts.noise_floor))
        .collect();
    Ok(ConvergenceTable { t_end, rows, orders, noise_floor: opts.noise_floor })
}

fn compare_one(s: &SolitonData, t_end: f64, opts: &CompareOptions) -> Result<ComparisonRow> {
    let grid = s.grid().clone();
    let m = grid.count();
    let source_residual = soliton_residual(s)?.sup_norm;
    let oracle = self_similar_state_with(s, t_end, opts.ode_tol, Exec::Sequential)?;
    let mut cfg = opts.flow.clone();
    if matches!(cfg.left, FlowBc::Oracle) {
        cfg.left = FlowBc::Dirichlet(oracle_boundary(s, 0, opts.ode_tol)?);
    }
    if matches!(cfg.right, FlowBc::Oracle) {
        cfg.right = FlowBc::Dirichlet(oracle_boundary(s, m - 1, opts.ode_tol)?);
    }
    let initial = FlowState::from_geometry(0.0, s.geom())?;
    let (st, steps, trusted) = if t_end > 0.0 {
        let run = run_flow(&initial, t_end, t_end, &cfg)?;
        if let FlowTermination::BlowUp { t, .. } = run.termination {
            return Err(Error::Integration { t, reason: "blow-up guard triggered before t_end".into() });
        }
        (run.final_state, run.steps, run.trusted_region)
    } else {
        (initial, 0, Some((0, m - 1)))
    };
    let (tlo, thi) = trusted.ok_or_else(|| Error::EmptyRegion("frozen-boundary influence covers the window".into()))?;
    let (olo, ohi) = oracle.valid_range;
    let (lo, hi) = (tlo.max(olo), thi.min(ohi));
    if hi < lo + 1 {
        return Err(Error::EmptyRegion(format!("no common nodes at t = {t_end}")));
    }
    let mut rel_a = 0.0f64;
    let mut rel_w = 0.0f64;
    for i in lo..=hi {
        let j = i - olo;
        rel_a = rel_a.max(((st.a[i] - oracle.raw_a[j]) / oracle.raw_a[j]).abs());
        if oracle.raw_w_sq[j] > 0.0 {
            rel_w = rel_w.max(((st.w_sq[i] - oracle.raw_w_sq[j]) / oracle.raw_w_sq[j]).abs());
        }
    }
    // invariant pair: arclength from the first common node
    let xs = &grid.nodes()[lo..=hi];
    let speed: Vec<f64> = (lo..=hi).map(|i| st.a[i].sqrt()).collect();
    let s_flow = cumulative_trapezoid(xs, &speed);
    let o_arc: Vec<f64> = oracle.raw_arclength[lo - olo..=hi - olo].iter().map(|v| v - oracle.raw_arclength[lo - olo]).collect();
    let o_wsq = &oracle.raw_w_sq.values()[lo - olo..=hi - olo];
    let curve = Pchip::new(&o_arc, o_wsq)?;
    let o_len = o_arc[o_arc.len() - 1];
    let mut err_w = 0.0f64;
    for (k, &sv) in s_flow.iter().enumerate() {
        if let Some(v) = curve.eval(sv.min(o_len)) {
            err_w = err_w.max((st.w_sq[lo + k] - v).abs());
        }
    }
    let err_len = (s_flow[s_flow.len() - 1] - o_len).abs();
    Ok(ComparisonRow {
        count: m,
        h: grid.spacing(),
        source_residual,
        region: (grid.node(lo), grid.node(hi)),
        err_w_sq_arclength: err_w,
        err_length: err_len,
        error: err_w.max(err_len),
        rel_err_a: rel_a,
        rel_err_w_sq: rel_w,
        a_range: range(&st.a.values()[lo..=hi]),
        w_sq_range: range(&st.w_sq.values()[lo..=hi]),
        steps,
    })
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
