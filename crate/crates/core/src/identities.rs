//! Residual of the soliton equation and the structural identities it implies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature, laplacian_with, CurvatureData, ScalarJet, WarpedGeometry};
use crate::grid::{RadialGrid, RadialProfile};
use crate::params::SolitonParams;

/// Parameter classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamClass {
    /// `0 < rho < 1/(2(n-1))` and `lambda > 0`.
    pub is_shrinking_window: bool,
    /// `rho` is `1/n` or `1/(2(n-1))`.
    pub excluded_analyticity: bool,
    /// `rho = 0`: not a rho-Einstein structure.
    pub excluded_soliton: bool,
    /// `rho = 1/(2(n-1))`.
    pub schouten: bool,
}

fn same_value(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * y.abs().max(1e-300)
}

pub fn validate_params(p: &SolitonParams) -> Result<ParamClass> {
    p.check()?;
    let n = p.nf();
    let schouten = same_value(p.rho, p.schouten_rho());
    let excluded_analyticity = schouten || same_value(p.rho, 1.0 / n);
    Ok(ParamClass {
        is_shrinking_window: p.rho > 0.0 && p.rho < p.schouten_rho() && !schouten && p.lambda > 0.0,
        excluded_analyticity,
        excluded_soliton: p.rho == 0.0,
        schouten,
    })
}

/// Warp and potential profiles in arclength gauge, optionally carrying
/// analytic derivatives of `f` and of the scalar curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonData {
    geom: WarpedGeometry,
    f: RadialProfile,
    f_jet: Option<ScalarJet>,
    scal_jet: Option<ScalarJet>,
}

impl SolitonData {
    pub fn new(geom: WarpedGeometry, f: RadialProfile) -> Result<Self> {
        geom.grid().check_profile(&f)?;
        if !geom.is_arclength() {
            return Err(Error::Precondition("soliton data must be in arclength gauge (a = 1)".into()));
        }
        if geom.params().rho == 0.0 {
            return Err(Error::ExcludedParameter("rho = 0 does not define a rho-Einstein soliton".into()));
        }
        if let Some(index) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { geom, f, f_jet: None, scal_jet: None })
    }

    pub fn with_potential_jet(mut self, jet: ScalarJet) -> Result<Self> {
        self.geom.grid().check_profile(&jet.d1)?;
        self.geom.grid().check_profile(&jet.d2)?;
        self.f_jet = Some(jet);
        Ok(self)
    }

    pub fn with_scalar_curvature_jet(mut self, jet: ScalarJet) -> Result<Self> {
        self.geom.grid().check_profile(&jet.d1)?;
        self.geom.grid().check_profile(&jet.d2)?;
        self.scal_jet = Some(jet);
        Ok(self)
    }

    /// Drops every analytic derivative so that all derivatives come from finite differences.
    pub fn finite_difference_only(&self) -> Self {
        Self { geom: self.geom.clone().without_jet(), f: self.f.clone(), f_jet: None, scal_jet: None }
    }

    /// Replaces the parameters (e.g. to test the residual against a perturbed lambda).
    pub fn with_params(&self, params: SolitonParams) -> Result<Self> {
        let geom = WarpedGeometry::build(
            params,
            self.geom.grid().clone(),
            self.geom.w().clone(),
            self.geom.a().clone(),
            self.geom.ends().0,
            self.geom.ends().1,
        )?;
        let geom = match self.geom.jet() {
            Some(j) => geom.with_jet(j.clone())?,
            None => geom,
        };
        let mut s = Self::new(geom, self.f.clone())?;
        s.f_jet = self.f_jet.clone();
        s.scal_jet = self.scal_jet.clone();
        Ok(s)
    }

    /// Shifts the potential by a constant so that its minimum equals `target`.
    pub fn normalized_min(&self, target: f64) -> Self {
        let shift = target - self.f.min();
        let mut s = self.clone();
        s.f = self.f.map(|v| v + shift);
        s
    }

    pub fn geom(&self) -> &WarpedGeometry {
        &self.geom
    }

    pub fn grid(&self) -> &RadialGrid {
        self.geom.grid()
    }

    pub fn params(&self) -> &SolitonParams {
        self.geom.params()
    }

    pub fn f(&self) -> &RadialProfile {
        &self.f
    }

    pub fn potential_jet(&self) -> Result<ScalarJet> {
        match &self.f_jet {
            Some(j) => Ok(j.clone()),
            None => ScalarJet::finite_difference(&self.f, &self.geom),
        }
    }

    pub fn scalar_curvature_jet(&self, scal: &RadialProfile) -> Result<ScalarJet> {
        match &self.scal_jet {
            Some(j) => Ok(j.clone()),
            None => ScalarJet::finite_difference(scal, &self.geom),
        }
    }

    pub fn has_scalar_curvature_jet(&self) -> bool {
        self.scal_jet.is_some()
    }

    pub fn curvature(&self) -> Result<CurvatureData> {
        curvature(&self.geom)
    }

    /// Nodes excluded from headline norms: the `depth` nodes nearest each end,
    /// whose stencils (nested `depth` times) reach a one-sided or pole-limit value.
    pub fn is_boundary(&self, i: usize, depth: usize) -> bool {
        i < depth || i + depth >= self.grid().count()
    }
}

/// Pointwise residual of `Ric + Hess f - rho R g - lambda g` in the radial frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub res_rad: RadialProfile,
    pub res_sph: RadialProfile,
    /// Interior sup over both components.
    pub sup_norm: f64,
    /// Interior discrete L2 norm, `sqrt(h sum (rad^2 + sph^2))`.
    pub l2_norm: f64,
    /// Sup over the end nodes.
    pub boundary_sup: f64,
    /// `sup_norm / max(1, sup|R|, sup|f'|)`.
    pub relative_sup: f64,
}

fn defect_scale(scal: &RadialProfile, f1: &RadialProfile) -> f64 {
    1f64.max(scal.sup_abs()).max(f1.sup_abs())
}

pub fn soliton_residual(s: &SolitonData) -> Result<ResidualReport> {
    let p = s.params();
    let curv = s.curvature()?;
    let fj = s.potential_jet()?;
    let (hess_rad, hess_sph) = crate::geometry::radial_hessian_with(&fj, s.geom())?;
    let m = s.grid().count();
    let mut res_rad = Vec::with_capacity(m);
    let mut res_sph = Vec::with_capacity(m);
    for i in 0..m {
        let shift = p.rho * curv.scal[i] + p.lambda;
        res_rad.push(curv.ric_rad[i] + hess_rad[i] - shift);
        res_sph.push(curv.ric_sph[i] + hess_sph[i] - shift);
    }
    let h = s.grid().spacing();
    let (mut sup, mut bsup, mut sq) = (0.0f64, 0.0f64, 0.0);
    for i in 0..m {
        let local = res_rad[i].abs().max(res_sph[i].abs());
        if s.is_boundary(i, 1) {
            bsup = bsup.max(local);
        } else {
            sup = sup.max(local);
            sq += res_rad[i] * res_rad[i] + res_sph[i] * res_sph[i];
        }
    }
    Ok(ResidualReport {
        res_rad: RadialProfile(res_rad),
        res_sph: RadialProfile(res_sph),
        sup_norm: sup,
        l2_norm: (h * sq).sqrt(),
        boundary_sup: bsup,
        relative_sup: sup / defect_scale(&curv.scal, &fj.d1),
    })
}

/// Defects of the trace, gradient and Laplacian identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityDefects {
    pub d1: RadialProfile,
    pub d2: RadialProfile,
    pub d3: RadialProfile,
    /// Interior sup norms of `d1`, `d2`, `d3`. The interior of `d2` and `d3`
    /// excludes two nodes at each end.
    pub sup: [f64; 3],
    pub boundary_sup: [f64; 3],
    pub relative_sup: [f64; 3],
}

impl IdentityDefects {
    pub fn max_sup(&self) -> f64 {
        self.sup.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates
/// `d1 = Delta f - (n rho - 1) R - n lambda`,
/// `d2 = (1 - 2(n-1) rho) R' - 2 Ric(dr, dr) f'`,
/// `d3 = (1 - 2(n-1) rho) Delta R - R' f' - 2 (rho R^2 - |Ric|^2 + lambda R)`.
pub fn identity_defects(s: &SolitonData) -> Result<IdentityDefects> {
    let p = s.params();
    let n = p.nf();
    let sf = p.schouten_factor();
    let curv = s.curvature()?;
    let fj = s.potential_jet()?;
    let rj = s.scalar_curvature_jet(&curv.scal)?;
    let lap_f = laplacian_with(&fj, s.geom())?;
    let lap_r = laplacian_with(&rj, s.geom())?;
    let m = s.grid().count();
    let mut d1 = Vec::with_capacity(m);
    let mut d2 = Vec::with_capacity(m);
    let mut d3 = Vec::with_capacity(m);
    for i in 0..m {
        let r = curv.scal[i];
        let (rs, fs) = (rj.d1[i], fj.d1[i]);
        d1.push(lap_f[i] - (n * p.rho - 1.0) * r - n * p.lambda);
        d2.push(sf * rs - 2.0 * curv.ric_rad[i] * fs);
        d3.push(sf * lap_r[i] - rs * fs - 2.0 * (p.rho * r * r - curv.ric_norm_sq[i] + p.lambda * r));
    }
    let profiles = [RadialProfile(d1), RadialProfile(d2), RadialProfile(d3)];
    let scale = defect_scale(&curv.scal, &fj.d1);
    let mut sup = [0.0f64; 3];
    let mut bsup = [0.0f64; 3];
    // d2 and d3 differentiate the already differentiated scalar curvature
    let depth = [1, 2, 2];
    for (k, prof) in profiles.iter().enumerate() {
        for (i, v) in prof.iter().enumerate() {
            if s.is_boundary(i, depth[k]) {
                bsup[k] = bsup[k].max(v.abs());
            } else {
                sup[k] = sup[k].max(v.abs());
            }
        }
    }
    let [d1, d2, d3] = profiles;
    Ok(IdentityDefects { d1, d2, d3, sup, boundary_sup: bsup, relative_sup: sup.map(|v| v / scale) })
}

/// Norm of `dR ^ df`, i.e. `sqrt(|a|^2 |b|^2 - <a,b>^2)`, evaluated through the
/// 2x2 minors to avoid cancellation. Zero iff `dR (x) df = df (x) dR`.
pub fn cross_derivative_defect(grad_r: &[f64], grad_f: &[f64]) -> Result<f64> {
    if grad_r.len() != grad_f.len() {
        return Err(Error::DimensionMismatch(grad_r.len(), grad_f.len()));
    }
    if grad_r.len() < 2 {
        return Err(Error::Precondition("gradients need dimension >= 2".into()));
    }
    let mut acc = 0.0;
    for i in 0..grad_r.len() {
        for j in i + 1..grad_r.len() {
            let minor = grad_r[i] * grad_f[j] - grad_r[j] * grad_f[i];
            acc += minor * minor;
        }
    }
    Ok(acc.sqrt())
}

/// Cross-derivative defect at every node, with both gradients expressed in an
/// orthonormal frame whose first vector is `d/ds`.
pub fn radial_cross_defects(s: &SolitonData) -> Result<RadialProfile> {
    let n = s.params().n;
    let curv = s.curvature()?;
    let fj = s.potential_jet()?;
    let rj = s.scalar_curvature_jet(&curv.scal)?;
    let mut out = Vec::with_capacity(s.grid().count());
    let mut gr = vec![0.0; n];
    let mut gf = vec![0.0; n];
    for i in 0..s.grid().count() {
        gr[0] = rj.d1[i];
        gf[0] = fj.d1[i];
        out.push(cross_derivative_defect(&gr, &gf)?);
    }
    Ok(RadialProfile(out))
}
