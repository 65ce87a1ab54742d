//! Gradient and quadratic growth certificates for the potential, plus the
//! convexity and rigidity diagnostics on discretized soliton data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{f_laplacian_with, radial_hessian_with, WarpedGeometry};
use crate::grid::{derivative, RadialGrid, RadialProfile};
use crate::identities::{soliton_residual, SolitonData};

/// `10 h^2 max(sup|p|, 1)`, the default discretization-level tolerance.
pub fn default_tol(grid: &RadialGrid, p: &RadialProfile) -> f64 {
    let h = grid.spacing();
    10.0 * h * h * p.sup_abs().max(1.0)
}

/// Constants in `c f - d <= |grad f|^2 <= a f + b` with the monotone quantities
/// `Phi = a f - |grad f|^2 - S R` and `Psi = |grad f|^2 - c f + S R`, `S = 1 - 2(n-1) rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub a_up: f64,
    pub b_up: f64,
    pub c_low: f64,
    pub d_low: f64,
    /// Margin added to `2 lambda + 2 rho K` in `a_up`.
    pub margin: f64,
    pub curvature_bound: f64,
    pub phi_profile: RadialProfile,
    pub psi_profile: RadialProfile,
    pub inequality_violations: usize,
    pub phi_monotone_violations: usize,
    pub psi_monotone_violations: usize,
    pub violation_count: usize,
    /// `f` is constant: `|grad f| = 0` and only the trivial branch applies.
    pub degenerate: bool,
    pub tol: f64,
}

pub fn fit_gradient_bounds(s: &SolitonData, k_bound: f64) -> Result<BoundCertificate> {
    fit_gradient_bounds_with(s, k_bound, None)
}

pub fn fit_gradient_bounds_with(s: &SolitonData, k_bound: f64, tol: Option<f64>) -> Result<BoundCertificate> {
    let p = s.params();
    if !(p.rho > 0.0) {
        return Err(Error::Precondition(format!("gradient bounds need rho > 0, got {}", p.rho)));
    }
    let grid = s.grid();
    let m = grid.count();
    let scal = s.curvature()?.scal;
    let f1 = s.potential_jet()?.d1;
    let grad_sq = f1.map(|v| v * v);
    let tol = tol.unwrap_or_else(|| default_tol(grid, &grad_sq).max(default_tol(grid, s.f())));
    let interior = |i: usize| !s.is_boundary(i, 1);
    for i in (0..m).filter(|&i| interior(i)) {
        if scal[i].abs() > k_bound + tol {
            return Err(Error::Precondition(format!("|R| = {} exceeds K = {k_bound} at r = {}", scal[i].abs(), grid.node(i))));
        }
        if scal[i] < -tol {
            return Err(Error::Precondition(format!("negative scalar curvature {} at r = {}", scal[i], grid.node(i))));
        }
    }
    let schouten = p.schouten_factor();
    let margin = p.lambda.max(1.0);
    let a_up = 2.0 * p.lambda + 2.0 * p.rho * k_bound + margin;
    let c_low = 2.0 * p.lambda;
    let phi = RadialProfile((0..m).map(|i| a_up * s.f()[i] - grad_sq[i] - schouten * scal[i]).collect());
    let psi = RadialProfile((0..m).map(|i| grad_sq[i] - c_low * s.f()[i] + schouten * scal[i]).collect());
    let origin = origin_node(grid);
    let b_up = (schouten * k_bound).abs() + phi[origin].abs();
    let d_low = (schouten * k_bound).abs() + psi[origin].abs();

    let inequality_violations = (0..m)
        .filter(|&i| interior(i))
        .filter(|&i| {
            let fi = s.f()[i];
            grad_sq[i] > a_up * fi + b_up + tol || grad_sq[i] < c_low * fi - d_low - tol
        })
        .count();
    let mono_tol = |q: &RadialProfile| tol.max(default_tol(grid, q));
    let phi_monotone_violations = monotone_violations(&phi, origin, mono_tol(&phi), &interior);
    let psi_monotone_violations = monotone_violations(&psi, origin, mono_tol(&psi), &interior);
    Ok(BoundCertificate {
        a_up,
        b_up,
        c_low,
        d_low,
        margin,
        curvature_bound: k_bound,
        phi_profile: phi,
        psi_profile: psi,
        inequality_violations,
        phi_monotone_violations,
        psi_monotone_violations,
        violation_count: inequality_violations + phi_monotone_violations + psi_monotone_violations,
        degenerate: f1.sup_abs() <= tol,
        tol,
    })
}

/// Node playing the role of `r = 0`: the nearest node to zero.
fn origin_node(grid: &RadialGrid) -> usize {
    grid.nearest(0.0)
}

/// Decreases of `q` along increasing `|r|`, walking outward from `origin` on each side.
fn monotone_violations(q: &RadialProfile, origin: usize, tol: f64, keep: &dyn Fn(usize) -> bool) -> usize {
    let m = q.len();
    let right = (origin..m - 1).filter(|&i| keep(i) && keep(i + 1) && q[i + 1] - q[i] < -tol).count();
    let left = (1..=origin).filter(|&i| keep(i) && keep(i - 1) && q[i - 1] - q[i] < -tol).count();
    right + left
}

/// `C (|r| - D)^2 <= f <= A (|r| + B)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub a: f64,
    pub b: f64,
    /// Lower pair, absent when no positive `C` exists (constant `f`).
    pub c: Option<f64>,
    pub d: Option<f64>,
    /// Best lower constant with `D = 0`, for comparison with the quadratic coefficient.
    pub c_unshifted: Option<f64>,
    pub violation_count: usize,
    pub degenerate: bool,
}

pub fn fit_quadratic_growth(s: &SolitonData) -> Result<GrowthCertificate> {
    let grid = s.grid();
    let f = s.f();
    if !(f.min() > 0.0) {
        return Err(Error::Precondition(format!("quadratic growth needs min f > 0, got {}", f.min())));
    }
    let f1 = s.potential_jet()?.d1;
    let m = grid.count();
    // |grad sqrt f| = |f'| / (2 sqrt f)
    let lip_sq = (0..m).map(|i| f1[i] * f1[i] / (4.0 * f[i])).fold(0.0f64, f64::max);
    let origin = origin_node(grid);
    let r_ref = grid.node(origin);
    let degenerate = f1.sup_abs() <= default_tol(grid, f);
    let (a, b) = if degenerate || lip_sq == 0.0 {
        (f.max(), 1.0 + r_ref.abs())
    } else {
        (lip_sq, f[origin].sqrt() / lip_sq.sqrt() + r_ref.abs())
    };
    let best_c = |d: f64| -> Option<f64> {
        let c = (0..m)
            .filter_map(|i| {
                let gap = grid.node(i).abs() - d;
                (gap != 0.0).then(|| f[i] / (gap * gap))
            })
            .fold(f64::INFINITY, f64::min);
        (c.is_finite() && c > 0.0).then_some(c.min(1.0))
    };
    let mut shifts: Vec<f64> = std::iter::once(0.0).chain(grid.nodes().iter().map(|r| r.abs())).collect();
    shifts.sort_by(f64::total_cmp);
    shifts.dedup();
    let mut lower: Option<(f64, f64)> = None;
    if !degenerate {
        for &d in &shifts {
            if let Some(c) = best_c(d) {
                if lower.is_none_or(|(cb, _)| c > cb) {
                    lower = Some((c, d));
                }
            }
        }
    }
    let tol = default_tol(grid, f);
    let violation_count = (0..m)
        .filter(|&i| {
            let r = grid.node(i).abs();
            let upper = f[i] > a * (r + b).powi(2) + tol;
            let low = lower.is_some_and(|(c, d)| f[i] < c * (r - d).powi(2) - tol);
            upper || low
        })
        .count();
    Ok(GrowthCertificate {
        a,
        b,
        c: lower.map(|x| x.0),
        d: lower.map(|x| x.1),
        c_unshifted: if degenerate { None } else { best_c(0.0) },
        violation_count,
        degenerate,
    })
}

/// Smallest `r0` such that both Hessian eigenvalues `f''` and `f' w'/w` are
/// `>= -tol` at every node with `|r| >= r0`.
pub fn convexity_radius(s: &SolitonData, tol: f64) -> Result<Option<f64>> {
    let (rad, sph) = radial_hessian_with(&s.potential_jet()?, s.geom())?;
    let grid = s.grid();
    let mut order: Vec<usize> = (0..grid.count()).collect();
    order.sort_by(|&i, &j| grid.node(i).abs().total_cmp(&grid.node(j).abs()));
    // walk inward from the largest |r| until an eigenvalue drops below -tol
    let mut r0 = None;
    for &i in order.iter().rev() {
        if rad[i] < -tol || sph[i] < -tol {
            break;
        }
        r0 = Some(grid.node(i).abs());
    }
    Ok(r0)
}

/// Defect `max(0, mu' + mu^2)` with `mu = w_s / w`, the mean-curvature-type
/// eigenvalue of `Hess r`. Pole nodes, their neighbours and one-sided ends are set to zero.
pub fn riccati_check(geom: &WarpedGeometry) -> Result<RadialProfile> {
    let (ws, _) = geom.warp_arclength_derivatives()?;
    let grid = geom.grid();
    let m = grid.count();
    let mu: Vec<f64> = (0..m).map(|i| if geom.is_pole(i) { 0.0 } else { ws[i] / geom.w()[i] }).collect();
    let mu_p = derivative(&RadialProfile(mu.clone()), grid, 1)?;
    let near_pole = |i: usize| geom.is_pole(i) || (i > 0 && geom.is_pole(i - 1)) || (i + 1 < m && geom.is_pole(i + 1));
    Ok(RadialProfile(
        (0..m)
            .map(|i| {
                if near_pole(i) || i == 0 || i + 1 == m {
                    0.0
                } else {
                    // d/dr to arclength
                    let d = mu_p[i] / geom.a()[i].sqrt();
                    (d + mu[i] * mu[i]).max(0.0)
                }
            })
            .collect(),
    ))
}

/// Largest tail `[r0, r_max]` on which `Delta_f R >= -tol`.
pub fn f_subharmonicity_region(s: &SolitonData, tol: f64) -> Result<Option<(f64, f64)>> {
    let scal = s.curvature()?.scal;
    let lap = f_laplacian_with(&s.scalar_curvature_jet(&scal)?, &s.potential_jet()?, s.geom())?;
    let grid = s.grid();
    let m = grid.count();
    let skip = if s.has_scalar_curvature_jet() { 0 } else { 2 };
    let mut r0 = None;
    for i in (0..m).rev() {
        if s.is_boundary(i, skip) {
            if i + skip >= m {
                continue;
            }
            r0 = Some(grid.node(i));
            continue;
        }
        if lap[i] < -tol {
            break;
        }
        r0 = Some(grid.node(i));
    }
    Ok(r0.map(|r| (r, grid.r_max())))
}

/// `sup R - inf R` over interior nodes.
pub fn scalar_constancy_report(s: &SolitonData) -> Result<f64> {
    let scal = s.curvature()?.scal;
    let vals: Vec<f64> = (0..scal.len()).filter(|&i| !s.is_boundary(i, 1)).map(|i| scal[i]).collect();
    if vals.is_empty() {
        return Ok(0.0);
    }
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityDiagnostics {
    pub convexity_radius: Option<f64>,
    pub riccati_defect: RadialProfile,
    /// Largest riccati defect over nodes with nonnegative radial curvature.
    pub riccati_defect_sup: f64,
    pub f_subharmonic_region: Option<(f64, f64)>,
    pub scal_variation: f64,
    /// Reported next to `scal_variation`: only exact solitons are expected to have constant R.
    pub residual_sup: f64,
    pub tol: f64,
}

pub fn rigidity_diagnostics(s: &SolitonData, tol: Option<f64>) -> Result<RigidityDiagnostics> {
    let grid = s.grid();
    let tol = tol.unwrap_or_else(|| default_tol(grid, s.f()));
    let riccati = riccati_check(s.geom())?;
    let (_, wss) = s.geom().warp_arclength_derivatives()?;
    let riccati_defect_sup = (0..grid.count()).filter(|&i| wss[i] <= 0.0).map(|i| riccati[i]).fold(0.0, f64::max);
    Ok(RigidityDiagnostics {
        convexity_radius: convexity_radius(s, tol)?,
        riccati_defect: riccati,
        riccati_defect_sup,
        f_subharmonic_region: f_subharmonicity_region(s, tol)?,
        scal_variation: scalar_constancy_report(s)?,
        residual_sup: soliton_residual(s)?.sup_norm,
        tol,
    })
}
