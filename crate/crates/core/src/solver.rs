//! Soliton profiles: closed-form fixtures and shooting from a smooth pole.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EndKind, Parity, ScalarJet, WarpJet, WarpedGeometry};
use crate::grid::{fmt17, make_grid, RadialGrid, RadialProfile};
use crate::identities::{soliton_residual, validate_params, SolitonData};
use crate::ode::{Dopri5, Halt, OdeOptions};
use crate::par::{self, Exec};
use crate::params::SolitonParams;

/// `(w, w', f, f')` at a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonOdeState {
    pub w: f64,
    pub w_prime: f64,
    pub f: f64,
    pub f_prime: f64,
}

/// `(w', w'', f', f'')` for the radial soliton system.
pub fn soliton_ode_rhs(state: &SolitonOdeState, _r: f64, p: &SolitonParams) -> Result<SolitonOdeState> {
    let den = p.schouten_factor();
    if den == 0.0 {
        return Err(Error::ExcludedParameter(format!(
            "1 - 2 rho (n-1) = 0 at rho = {} (Schouten value)",
            p.rho
        )));
    }
    if !(state.w > 0.0) {
        return Err(Error::NonPositiveWarp { index: 0, r: _r, value: state.w });
    }
    let (w2, f2) = second_derivatives(state, p, den);
    Ok(SolitonOdeState { w: state.w_prime, w_prime: w2, f: state.f_prime, f_prime: f2 })
}

fn second_derivatives(s: &SolitonOdeState, p: &SolitonParams, den: f64) -> (f64, f64) {
    let n = p.nf();
    let q = (1.0 - s.w_prime * s.w_prime) / (s.w * s.w);
    let drift = s.f_prime * s.w_prime / s.w;
    let w2 = s.w * ((n - 2.0) * q + drift - p.rho * (n - 1.0) * (n - 2.0) * q - p.lambda) / den;
    let scal = -2.0 * (n - 1.0) * w2 / s.w + (n - 1.0) * (n - 2.0) * q;
    let f2 = p.rho * scal + p.lambda + (n - 1.0) * w2 / s.w;
    (w2, f2)
}

/// Coefficient of `r^3/6` in the pole expansion of `w` for `f''(0) = alpha`.
pub fn pole_warp_cubic(p: &SolitonParams, alpha: f64) -> f64 {
    let n = p.nf();
    (alpha - p.lambda) / ((n - 1.0) * (1.0 - n * p.rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedRMax,
    WarpVanished,
    CurvatureBlowup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub ode_tol: f64,
    /// Taylor start radius as a fraction of `r_max`.
    pub eps_frac: f64,
    /// Abort when `|w''/w|` or `|(1 - w'^2)/w^2|` exceeds this.
    pub curvature_ceiling: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { ode_tol: 1e-10, eps_frac: 1e-4, curvature_ceiling: 1e8 }
    }
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    /// Profiles on the nodes reached (at least five), potential normalized to `min f = 1`.
    pub data: Option<SolitonData>,
    pub shoot_param: f64,
    pub termination: Termination,
    /// Radius where the integration stopped.
    pub stop_r: f64,
    pub residual_sup: Option<f64>,
    /// `w'` at the last node reached.
    pub last_w_prime: f64,
}

/// JSON header accompanying the CSV form of a shot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootHeader {
    pub alpha: f64,
    pub termination: Termination,
    pub residual_sup: Option<f64>,
    pub stop_r: f64,
    pub params: SolitonParams,
}

impl ShootResult {
    pub fn header(&self, params: &SolitonParams) -> ShootHeader {
        ShootHeader {
            alpha: self.shoot_param,
            termination: self.termination,
            residual_sup: self.residual_sup,
            stop_r: self.stop_r,
            params: *params,
        }
    }

    /// Rows `r,w,f,R` over the nodes reached.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |e: std::io::Error| Error::Precondition(format!("write failed: {e}"));
        writeln!(out, "r,w,f,R").map_err(io)?;
        let Some(data) = &self.data else { return Ok(()) };
        let scal = data.curvature()?.scal;
        for i in 0..data.grid().count() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt17(data.grid().node(i)),
                fmt17(data.geom().w()[i]),
                fmt17(data.f()[i]),
                fmt17(scal[i])
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Independent shots for each `alpha`, in input order.
pub fn shoot_sweep(
    p: &SolitonParams,
    alphas: &[f64],
    r_max: f64,
    grid_count: usize,
    opts: &ShootOptions,
    exec: Exec,
) -> Vec<Result<ShootResult>> {
    par::map_slice(exec, alphas, |&alpha| shoot_from_pole_with(p, alpha, r_max, grid_count, opts))
}

pub fn shoot_from_pole(p: &SolitonParams, alpha: f64, r_max: f64, grid_count: usize) -> Result<ShootResult> {
    shoot_from_pole_with(p, alpha, r_max, grid_count, &ShootOptions::default())
}

pub fn shoot_from_pole_with(
    p: &SolitonParams,
    alpha: f64,
    r_max: f64,
    grid_count: usize,
    opts: &ShootOptions,
) -> Result<ShootResult> {
    let class = validate_params(p)?;
    if class.excluded_soliton || class.excluded_analyticity {
        return Err(Error::ExcludedParameter(format!("rho = {} is excluded for n = {}", p.rho, p.n)));
    }
    if !alpha.is_finite() {
        return Err(Error::Precondition("alpha must be finite".into()));
    }
    let grid = make_grid(0.0, r_max, grid_count)?;
    let eps = opts.eps_frac * r_max;
    if eps >= grid.node(1) {
        return Err(Error::Precondition(format!("start radius {eps} must lie below the first node")));
    }
    let den = p.schouten_factor();
    let w3 = pole_warp_cubic(p, alpha);
    let y0 = [eps + w3 * eps.powi(3) / 6.0, 1.0 + 0.5 * w3 * eps * eps, 0.5 * alpha * eps * eps, alpha * eps];
    let ceiling = opts.curvature_ceiling;
    let field = |_: f64, y: &[f64; 4]| {
        let s = SolitonOdeState { w: y[0], w_prime: y[1], f: y[2], f_prime: y[3] };
        if !(s.w > 0.0) {
            return [f64::NAN; 4];
        }
        let (w2, f2) = second_derivatives(&s, p, den);
        [y[1], w2, y[3], f2]
    };
    let mut w_peak = eps;
    let mut guard = |_: f64, y: &[f64; 4]| {
        if !(y[0] > 0.0) {
            return Some(Termination::WarpVanished);
        }
        w_peak = w_peak.max(y[0]);
        let q = (1.0 - y[1] * y[1]) / (y[0] * y[0]);
        let s = SolitonOdeState { w: y[0], w_prime: y[1], f: y[2], f_prime: y[3] };
        let (w2, _) = second_derivatives(&s, p, den);
        if !(q.abs() < ceiling && (w2 / y[0]).abs() < ceiling) {
            // collapse of the warp towards a second zero
            if y[0] < 1e-3 * w_peak {
                return Some(Termination::WarpVanished);
            }
            return Some(Termination::CurvatureBlowup);
        }
        None
    };

    let mut ode = Dopri5::new(eps, y0, OdeOptions::with_tol(opts.ode_tol));
    let mut rows: Vec<[f64; 4]> = vec![[0.0, 1.0, 0.0, 0.0]];
    let mut termination = Termination::ReachedRMax;
    let mut stop_r = r_max;
    for &r in &grid.nodes()[1..] {
        match ode.advance_to(field, r, &mut guard) {
            Ok(()) => rows.push(ode.y),
            Err(halt) => {
                let (t, why) = match halt {
                    Halt::Guard { t, reason } => (t, reason),
                    Halt::StepUnderflow { t } | Halt::MaxSteps { t } => {
                        // an underflow right after w crossed zero is a vanishing warp
                        let why = if ode.y[0] < 1e-3 * rows.iter().fold(eps, |m, y| m.max(y[0])) {
                            Termination::WarpVanished
                        } else {
                            Termination::CurvatureBlowup
                        };
                        (t, why)
                    }
                };
                termination = why;
                stop_r = t;
                break;
            }
        }
    }
    let last_w_prime = rows.last().map(|y| y[1]).unwrap_or(1.0);
    if rows.len() < crate::grid::MIN_NODES {
        return Ok(ShootResult { data: None, shoot_param: alpha, termination, stop_r, residual_sup: None, last_w_prime });
    }
    let sub = grid.sub_grid(0, rows.len() - 1)?;
    let data = assemble(p, sub, &rows)?.normalized_min(1.0);
    let residual_sup = Some(soliton_residual(&data)?.sup_norm);
    Ok(ShootResult { data: Some(data), shoot_param: alpha, termination, stop_r, residual_sup, last_w_prime })
}

// First derivatives come from the integrated state, second derivatives from finite differences.
fn assemble(p: &SolitonParams, grid: RadialGrid, rows: &[[f64; 4]]) -> Result<SolitonData> {
    let col = |k: usize| RadialProfile(rows.iter().map(|y| y[k]).collect());
    let (w, w1, f, f1) = (col(0), col(1), col(2), col(3));
    let a = RadialProfile::constant(1.0, grid.count());
    let geom = WarpedGeometry::build(*p, grid, w, a, EndKind::Pole, EndKind::Open)?;
    let w2 = geom.fd(geom.w(), 2, Parity::Odd)?;
    let geom = geom.with_jet(WarpJet { w1, w2, w3: None })?;
    let f2 = geom.fd(&f, 2, Parity::Even)?;
    SolitonData::new(geom, f)?.with_potential_jet(ScalarJet { d1: f1, d2: f2 })
}

/// Bisection on `alpha` in `[lo, hi]` for a cylindrical end, `w'(r_max) = 0`.
/// Shots whose warp vanishes count as `w' < 0`; curvature blow-ups as `w' > 0`.
pub fn bisect_alpha(
    p: &SolitonParams,
    lo: f64,
    hi: f64,
    r_max: f64,
    grid_count: usize,
    tol: f64,
) -> Result<ShootResult> {
    let score = |alpha: f64| -> Result<(f64, ShootResult)> {
        let shot = shoot_from_pole(p, alpha, r_max, grid_count)?;
        let s = match shot.termination {
            Termination::ReachedRMax => shot.last_w_prime,
            Termination::WarpVanished => -1.0,
            Termination::CurvatureBlowup => 1.0,
        };
        Ok((s, shot))
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (sa, shot_a) = score(a)?;
    let (sb, shot_b) = score(b)?;
    if sa == 0.0 {
        return Ok(shot_a);
    }
    if sb == 0.0 {
        return Ok(shot_b);
    }
    if sa.signum() == sb.signum() {
        return Err(Error::Precondition(format!("no sign change of w'(r_max) on [{a}, {b}]")));
    }
    let mut sa = sa;
    let mut best = if sa.abs() < sb.abs() { shot_a } else { shot_b };
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let (sm, shot) = score(mid)?;
        let keep = shot.termination == Termination::ReachedRMax;
        if keep {
            best = shot;
        }
        if sm == 0.0 {
            break;
        }
        if sm.signum() == sa.signum() {
            a = mid;
            sa = sm;
        } else {
            b = mid;
        }
    }
    Ok(best)
}

fn grid_nonnegative(grid: &RadialGrid, what: &str) -> Result<()> {
    if grid.r_min() < 0.0 {
        return Err(Error::Precondition(format!("{what} needs r_min >= 0")));
    }
    Ok(())
}

/// Flat space with the Gaussian potential `f = lambda r^2 / 2`. A grid starting
/// at `r = 0` gets a smooth pole there.
pub fn gaussian_fixture(p: &SolitonParams, grid: &RadialGrid) -> Result<SolitonData> {
    grid_nonnegative(grid, "the Gaussian fixture")?;
    let m = grid.count();
    let left = if grid.r_min() == 0.0 { EndKind::Pole } else { EndKind::Open };
    let a = RadialProfile::constant(1.0, m);
    let zero = RadialProfile::constant(0.0, m);
    let geom = WarpedGeometry::build(*p, grid.clone(), grid.map(|r| r), a, left, EndKind::Open)?.with_jet(WarpJet {
        w1: RadialProfile::constant(1.0, m),
        w2: zero.clone(),
        w3: Some(zero.clone()),
    })?;
    let lambda = p.lambda;
    SolitonData::new(geom, grid.map(|r| 0.5 * lambda * r * r))?
        .with_potential_jet(ScalarJet { d1: grid.map(|r| lambda * r), d2: RadialProfile::constant(lambda, m) })?
        .with_scalar_curvature_jet(ScalarJet { d1: zero.clone(), d2: zero })
}

/// Closed-form data of the shrinking cylinder `S^{n-1}(w0) x R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderConstants {
    pub w0_sq: f64,
    /// `f'' = lambda / (1 - (n-1) rho)`.
    pub potential_coeff: f64,
    pub scal: f64,
}

pub fn cylinder_constants(p: &SolitonParams) -> Result<CylinderConstants> {
    p.check()?;
    let n = p.nf();
    let gap = 1.0 - (n - 1.0) * p.rho;
    if !(p.lambda > 0.0) {
        return Err(Error::InvalidParams(format!("cylinder needs lambda > 0, got {}", p.lambda)));
    }
    if !(gap > 0.0) {
        return Err(Error::InvalidParams(format!("cylinder needs 1 - (n-1) rho > 0, got {gap}")));
    }
    let w0_sq = (n - 2.0) * gap / p.lambda;
    Ok(CylinderConstants { w0_sq, potential_coeff: p.lambda / gap, scal: (n - 1.0) * (n - 2.0) / w0_sq })
}

/// Exact soliton on `S^{n-1}(w0) x R` with `f = c r^2 / 2`.
pub fn cylinder_fixture(p: &SolitonParams, grid: &RadialGrid) -> Result<SolitonData> {
    let c = cylinder_constants(p)?;
    let m = grid.count();
    let zero = RadialProfile::constant(0.0, m);
    let geom = WarpedGeometry::new(*p, grid.clone(), RadialProfile::constant(c.w0_sq.sqrt(), m))?
        .with_jet(WarpJet { w1: zero.clone(), w2: zero.clone(), w3: None })?;
    let k = c.potential_coeff;
    SolitonData::new(geom, grid.map(|r| 0.5 * k * r * r))?
        .with_potential_jet(ScalarJet { d1: grid.map(|r| k * r), d2: RadialProfile::constant(k, m) })?
        .with_scalar_curvature_jet(ScalarJet { d1: zero.clone(), d2: zero })
}

/// Radius of the Einstein sphere that solves the equation with constant potential.
pub fn sphere_radius(p: &SolitonParams) -> Result<f64> {
    let n = p.nf();
    let r_sq = (n - 1.0) * (1.0 - n * p.rho) / p.lambda;
    if !(r_sq > 0.0) {
        return Err(Error::InvalidParams("sphere needs (1 - n rho) / lambda > 0".into()));
    }
    Ok(r_sq.sqrt())
}

/// Round sphere `w = R sin(r / R)` with `f = 1`, a (compact, trivial) soliton.
/// Ends at `r = 0` or `r = pi R` become poles.
pub fn sphere_fixture(p: &SolitonParams, grid: &RadialGrid) -> Result<SolitonData> {
    grid_nonnegative(grid, "the sphere fixture")?;
    let big_r = sphere_radius(p)?;
    let antipode = std::f64::consts::PI * big_r;
    if grid.r_max() > antipode * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("window exceeds the antipode at {antipode}")));
    }
    let m = grid.count();
    let left = if grid.r_min() == 0.0 { EndKind::Pole } else { EndKind::Open };
    let right = if (grid.r_max() - antipode).abs() <= 1e-12 * antipode { EndKind::Pole } else { EndKind::Open };
    let mut w = grid.map(|r| big_r * (r / big_r).sin());
    if left == EndKind::Pole {
        w.0[0] = 0.0;
    }
    if right == EndKind::Pole {
        w.0[m - 1] = 0.0;
    }
    let a = RadialProfile::constant(1.0, m);
    let zero = RadialProfile::constant(0.0, m);
    let geom = WarpedGeometry::build(*p, grid.clone(), w, a, left, right)?.with_jet(WarpJet {
        w1: grid.map(|r| (r / big_r).cos()),
        w2: grid.map(|r| -(r / big_r).sin() / big_r),
        w3: Some(grid.map(|r| -(r / big_r).cos() / (big_r * big_r))),
    })?;
    SolitonData::new(geom, RadialProfile::constant(1.0, m))?
        .with_potential_jet(ScalarJet { d1: zero.clone(), d2: zero.clone() })?
        .with_scalar_curvature_jet(ScalarJet { d1: zero.clone(), d2: zero })
}

/// Constants of the rigid soliton `N^k x R^{n-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidProduct {
    /// `Ric_N = mu g_N`; absent for `k = 0`.
    pub einstein_constant: Option<f64>,
    /// `f = coeff |x|^2 / 2` on the flat factor.
    pub potential_coeff: f64,
}

pub fn rigid_product_fixture(k: usize, p: &SolitonParams) -> Result<RigidProduct> {
    p.check()?;
    if k >= p.n {
        return Err(Error::InvalidParams(format!("Einstein factor dimension k = {k} must be < n = {}", p.n)));
    }
    if k == 0 {
        return Ok(RigidProduct { einstein_constant: None, potential_coeff: p.lambda });
    }
    let gap = 1.0 - k as f64 * p.rho;
    if gap == 0.0 {
        return Err(Error::ExcludedParameter(format!("k rho = 1 (k = {k}, rho = {})", p.rho)));
    }
    let mu = p.lambda / gap;
    Ok(RigidProduct { einstein_constant: Some(mu), potential_coeff: mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p3() -> SolitonParams {
        SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
    }

    #[test]
    fn rhs_gaussian_point() {
        for rho in [0.05, 0.1, 0.2, -0.3] {
            let p = SolitonParams { n: 3, rho, lambda: 1.0 };
            let r = 1.7;
            let d = soliton_ode_rhs(&SolitonOdeState { w: r, w_prime: 1.0, f: 0.0, f_prime: r }, r, &p).unwrap();
            assert_abs_diff_eq!(d.w_prime, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.f_prime, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rhs_cylinder_point() {
        let r = 0.9;
        let s = SolitonOdeState { w: 0.8f64.sqrt(), w_prime: 0.0, f: 0.0, f_prime: 1.25 * r };
        let d = soliton_ode_rhs(&s, r, &p3()).unwrap();
        assert_abs_diff_eq!(d.w_prime, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.f_prime, 1.25, epsilon = 1e-14);
    }

    #[test]
    fn rhs_rejects_schouten() {
        let p = SolitonParams { n: 3, rho: 0.25, lambda: 1.0 };
        let s = SolitonOdeState { w: 1.0, w_prime: 1.0, f: 0.0, f_prime: 1.0 };
        assert!(matches!(soliton_ode_rhs(&s, 1.0, &p), Err(Error::ExcludedParameter(_))));
        assert!(soliton_ode_rhs(&SolitonOdeState { w: 0.0, ..s }, 1.0, &p3()).is_err());
    }

    #[test]
    fn cylinder_constants_examples() {
        let c = cylinder_constants(&p3()).unwrap();
        assert_abs_diff_eq!(c.w0_sq, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(c.potential_coeff, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(c.scal, 2.5, epsilon = 1e-14);
        let c = cylinder_constants(&SolitonParams { n: 3, rho: 0.0, lambda: 1.0 }).unwrap();
        assert_eq!((c.w0_sq, c.potential_coeff), (1.0, 1.0));
        let c = cylinder_constants(&SolitonParams { n: 4, rho: 0.1, lambda: 1.0 }).unwrap();
        assert_abs_diff_eq!(c.w0_sq, 1.4, epsilon = 1e-15);
        assert_abs_diff_eq!(c.potential_coeff, 1.0 / 0.7, epsilon = 1e-14);
        assert!(cylinder_constants(&SolitonParams { n: 3, rho: 0.5, lambda: 1.0 }).is_err());
        assert!(cylinder_constants(&SolitonParams { n: 3, rho: 0.1, lambda: -1.0 }).is_err());
    }

    #[test]
    fn cylinder_fixture_rejects_rho_zero() {
        let g = make_grid(0.0, 5.0, 11).unwrap();
        assert!(matches!(
            cylinder_fixture(&SolitonParams { n: 3, rho: 0.0, lambda: 1.0 }, &g),
            Err(Error::ExcludedParameter(_))
        ));
    }

    #[test]
    fn rigid_products() {
        let r = rigid_product_fixture(2, &p3()).unwrap();
        assert_abs_diff_eq!(r.einstein_constant.unwrap(), 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.einstein_constant.unwrap(), 1.0 / cylinder_constants(&p3()).unwrap().w0_sq, epsilon = 1e-14);
        let r = rigid_product_fixture(0, &p3()).unwrap();
        assert_eq!(r.einstein_constant, None);
        assert_eq!(r.potential_coeff, 1.0);
        let r = rigid_product_fixture(2, &SolitonParams { n: 3, rho: 0.0, lambda: 2.0 }).unwrap();
        assert_eq!(r.einstein_constant, Some(2.0));
        assert_eq!(r.potential_coeff, 2.0);
        assert!(rigid_product_fixture(2, &SolitonParams { n: 4, rho: 0.5, lambda: 1.0 }).is_err());
        assert!(rigid_product_fixture(3, &p3()).is_err());
    }

    #[test]
    fn pole_expansion_coefficient_matches_sphere() {
        // alpha = 0 gives the Einstein sphere, whose warp is R sin(r/R)
        let big_r = sphere_radius(&p3()).unwrap();
        assert_abs_diff_eq!(pole_warp_cubic(&p3(), 0.0), -1.0 / (big_r * big_r), epsilon = 1e-14);
        assert_eq!(pole_warp_cubic(&p3(), 1.0), 0.0);
    }
}
