//! Self-similar flow generated by a soliton: `g(t) = tau(t) phi_t^* g0`,
//! `f(t) = f0 o phi_t`, with `d phi / dt = grad f0 (phi) / tau(t)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature, EndKind, WarpedGeometry};
use crate::grid::{cumulative_trapezoid, derivative, fmt17, make_grid, RadialGrid, RadialProfile, MIN_NODES};
use crate::identities::SolitonData;
use crate::interp::Pchip;
use crate::ode::{Dopri5, Halt, OdeOptions};
use crate::par::{self, Exec};

/// `tau(t) = 1 - 2 lambda t`; the flow exists while it stays positive.
pub fn tau(t: f64, lambda: f64) -> f64 {
    -2.0 * lambda * t + 1.0
}

/// Time at which `tau` vanishes, `1 / (2 lambda)` (infinite for `lambda <= 0`).
pub fn blowup_time(lambda: f64) -> f64 {
    if lambda > 0.0 {
        1.0 / (2.0 * lambda)
    } else {
        f64::INFINITY
    }
}

fn check_tau(t: f64, lambda: f64) -> Result<f64> {
    let tau_t = tau(t, lambda);
    if !(tau_t > 0.0) {
        return Err(Error::NonPositiveTau { t, tau: tau_t });
    }
    Ok(tau_t)
}

/// Trajectories `phi(r, t)` of every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo {
    pub t: f64,
    /// Position at time `t`; for escaped nodes, the boundary crossing point.
    pub phi: RadialProfile,
    /// Time at which the trajectory left `[r_min, r_max]`, if it did.
    pub escape_time: Vec<Option<f64>>,
}

impl Diffeo {
    /// Longest run of consecutive nodes that stayed inside the window.
    pub fn valid_range(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut start = None;
        for i in 0..=self.escape_time.len() {
            let ok = i < self.escape_time.len() && self.escape_time[i].is_none();
            match (ok, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    if best.is_none_or(|(a, b)| i - s > b - a + 1) {
                        best = Some((s, i - 1));
                    }
                    start = None;
                }
                _ => {}
            }
        }
        best
    }
}

pub fn flow_diffeo(s: &SolitonData, t: f64, ode_tol: f64) -> Result<Diffeo> {
    flow_diffeo_with(s, t, ode_tol, Exec::default())
}

pub fn flow_diffeo_with(s: &SolitonData, t: f64, ode_tol: f64, exec: Exec) -> Result<Diffeo> {
    let lambda = s.params().lambda;
    check_tau(t, lambda)?;
    let grid = s.grid();
    let m = grid.count();
    if t == 0.0 {
        return Ok(Diffeo { t, phi: RadialProfile(grid.nodes().to_vec()), escape_time: vec![None; m] });
    }
    let f1 = s.potential_jet()?.d1;
    let field = Pchip::new(grid.nodes(), f1.values())?;
    let (lo, hi) = (grid.r_min(), grid.r_max());
    // constant extension keeps trial stages defined just outside the window
    let grad = |x: f64| field.eval(x.clamp(lo, hi)).unwrap_or(0.0);

    let results: Vec<Result<(f64, Option<f64>)>> = par::map_range(exec, m, |i| {
        let r0 = grid.node(i);
        let mut ode = Dopri5::new(0.0, [r0], OdeOptions::with_tol(ode_tol));
        let mut prev = (0.0, r0);
        let outcome = ode.advance_to(
            |time, y| [grad(y[0]) / tau(time, lambda)],
            t,
            |time, y| {
                let x = y[0];
                if x < lo || x > hi {
                    let edge = if x < lo { lo } else { hi };
                    let frac = (edge - prev.1) / (x - prev.1);
                    return Some((prev.0 + frac * (time - prev.0), edge));
                }
                prev = (time, x);
                None
            },
        );
        match outcome {
            Ok(()) => Ok((ode.y[0], None)),
            Err(Halt::Guard { reason: (te, edge), .. }) => Ok((edge, Some(te))),
            Err(Halt::StepUnderflow { t }) | Err(Halt::MaxSteps { t }) => {
                Err(Error::Integration { t, reason: format!("trajectory from r = {r0} stalled") })
            }
        }
    });
    let mut phi = Vec::with_capacity(m);
    let mut escape_time = Vec::with_capacity(m);
    for r in results {
        let (x, esc) = r?;
        phi.push(x);
        escape_time.push(esc);
    }
    Ok(Diffeo { t, phi: RadialProfile(phi), escape_time })
}

/// The metric `tau phi^* g0` in the original coordinate and regauged to arclength.
#[derive(Debug, Clone)]
pub struct SelfSimilarSolution {
    pub source: SolitonData,
    pub t: f64,
    pub tau: f64,
    pub diffeo: Diffeo,
    /// Node range of the source grid on which the construction is valid.
    pub valid_range: (usize, usize),
    /// Source sub-grid over `valid_range`.
    pub raw_grid: RadialGrid,
    /// Pulled-back lapse `tau (d phi / dr)^2`.
    pub raw_a: RadialProfile,
    /// Pulled-back squared warp `tau w0(phi)^2`.
    pub raw_w_sq: RadialProfile,
    pub raw_f: RadialProfile,
    /// Arclength of each raw node, anchored so that the fixed point of the flow keeps its coordinate.
    pub raw_arclength: Vec<f64>,
    /// Arclength-gauge geometry on a uniform grid.
    pub geom_t: WarpedGeometry,
    pub f_t: RadialProfile,
}

/// Header written next to the CSV form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfSimilarHeader {
    pub t: f64,
    pub tau: f64,
    pub valid_range: (f64, f64),
}

impl SelfSimilarSolution {
    pub fn header(&self) -> SelfSimilarHeader {
        SelfSimilarHeader {
            t: self.t,
            tau: self.tau,
            valid_range: (self.raw_grid.r_min(), self.raw_grid.r_max()),
        }
    }

    /// Rows `s,w,f` of the arclength-gauge solution.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "s,w,f")?;
        let g = self.geom_t.grid();
        for i in 0..g.count() {
            writeln!(out, "{},{},{}", fmt17(g.node(i)), fmt17(self.geom_t.w()[i]), fmt17(self.f_t[i]))?;
        }
        Ok(())
    }
}

pub fn self_similar_state(s: &SolitonData, t: f64) -> Result<SelfSimilarSolution> {
    self_similar_state_with(s, t, 1e-10, Exec::default())
}

pub fn self_similar_state_with(s: &SolitonData, t: f64, ode_tol: f64, exec: Exec) -> Result<SelfSimilarSolution> {
    let tau_t = check_tau(t, s.params().lambda)?;
    let diffeo = flow_diffeo_with(s, t, ode_tol, exec)?;
    let (lo, hi) = diffeo
        .valid_range()
        .filter(|(a, b)| b - a + 1 >= MIN_NODES)
        .ok_or_else(|| Error::EmptyRegion(format!("fewer than {MIN_NODES} trajectories stay in the window at t = {t}")))?;
    let grid = s.grid();
    let raw_grid = grid.sub_grid(lo, hi)?;
    let phi = RadialProfile(diffeo.phi.values()[lo..=hi].to_vec());
    if let Some(k) = phi.values().windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotone { index: lo + k });
    }
    let dphi = if t == 0.0 { RadialProfile::constant(1.0, phi.len()) } else { derivative(&phi, &raw_grid, 1)? };
    let w0 = Pchip::new(grid.nodes(), s.geom().w().values())?;
    let f0 = Pchip::new(grid.nodes(), s.f().values())?;
    let at = |p: &Pchip, x: f64| p.eval(x).ok_or(Error::EmptyRegion(format!("phi = {x} left the window")));
    let mut raw_a = Vec::with_capacity(phi.len());
    let mut raw_w_sq = Vec::with_capacity(phi.len());
    let mut raw_f = Vec::with_capacity(phi.len());
    for (i, &x) in phi.iter().enumerate() {
        let w = if t == 0.0 { s.geom().w()[lo + i] } else { at(&w0, x)? };
        raw_a.push(tau_t * dphi[i] * dphi[i]);
        raw_w_sq.push(tau_t * w * w);
        raw_f.push(if t == 0.0 { s.f()[lo + i] } else { at(&f0, x)? });
    }
    let speed: Vec<f64> = raw_a.iter().map(|a| a.sqrt()).collect();
    let mut arc = cumulative_trapezoid(raw_grid.nodes(), &speed);
    // anchor at the node closest to the minimum of f0, i.e. the fixed point of the flow
    let anchor = (0..phi.len())
        .min_by(|&i, &j| raw_f[i].total_cmp(&raw_f[j]))
        .unwrap_or(0);
    let shift = raw_grid.node(anchor) - arc[anchor];
    arc.iter_mut().for_each(|v| *v += shift);

    let (src_left, src_right) = s.geom().ends();
    let left = if lo == 0 && src_left == EndKind::Pole { EndKind::Pole } else { EndKind::Open };
    let right = if hi + 1 == grid.count() && src_right == EndKind::Pole { EndKind::Pole } else { EndKind::Open };
    let count = phi.len();
    let s_grid = if t == 0.0 { raw_grid.clone() } else { make_grid(arc[0], arc[count - 1], count)? };
    let w_hat: Vec<f64> = raw_w_sq.iter().map(|v| v.sqrt()).collect();
    let w_interp = Pchip::new(&arc, &w_hat)?;
    let f_interp = Pchip::new(&arc, &raw_f)?;
    let mut w_t = Vec::with_capacity(count);
    let mut f_t = Vec::with_capacity(count);
    for (i, &x) in s_grid.nodes().iter().enumerate() {
        let x = x.clamp(arc[0], arc[count - 1]);
        w_t.push(if t == 0.0 { w_hat[i] } else { w_interp.eval(x).unwrap_or(w_hat[i]) });
        f_t.push(if t == 0.0 { raw_f[i] } else { f_interp.eval(x).unwrap_or(raw_f[i]) });
    }
    if left == EndKind::Pole {
        w_t[0] = 0.0;
    }
    if right == EndKind::Pole {
        w_t[count - 1] = 0.0;
    }
    let geom_t = WarpedGeometry::build(
        *s.params(),
        s_grid,
        RadialProfile(w_t),
        RadialProfile::constant(1.0, count),
        left,
        right,
    )?;
    Ok(SelfSimilarSolution {
        source: s.clone(),
        t,
        tau: tau_t,
        diffeo,
        valid_range: (lo, hi),
        raw_grid,
        raw_a: RadialProfile(raw_a),
        raw_w_sq: RadialProfile(raw_w_sq),
        raw_f: RadialProfile(raw_f),
        raw_arclength: arc,
        geom_t,
        f_t: RadialProfile(f_t),
    })
}

/// `sup |R(c g) - R(g) / c|` over interior nodes.
pub fn scaling_check(geom: &WarpedGeometry, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("scale factor {c} must be positive")));
    }
    let base = curvature(geom)?.scal;
    let scaled = curvature(&geom.scaled(c)?)?.scal;
    let m = base.len();
    Ok((1..m - 1).fold(0.0f64, |acc, i| acc.max((scaled[i] - base[i] / c).abs())))
}
