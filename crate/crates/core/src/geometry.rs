//! Warped-product metrics `g = a(x) dx^2 + w(x)^2 g_{S^{n-1}}` and their curvature.
//!
//! Sign convention: the round sphere has positive sectional curvature.
//! Arclength derivatives are `D_s = a^{-1/2} d/dx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{derivative_with_ends, odd_end_third_derivative, EndStencil, RadialGrid, RadialProfile};
use crate::params::SolitonParams;

/// Treatment of a grid end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EndKind {
    /// Ordinary boundary, one-sided stencils.
    #[default]
    Open,
    /// Smooth pole: `w = 0` there, with `w` odd and `a`, `f` even under reflection.
    Pole,
}

/// Parity of a profile under reflection through a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Analytic derivatives of the warp, used instead of finite differences.
/// `w3` is only consulted at pole nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpJet {
    pub w1: RadialProfile,
    pub w2: RadialProfile,
    pub w3: Option<RadialProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedGeometry {
    params: SolitonParams,
    grid: RadialGrid,
    w: RadialProfile,
    a: RadialProfile,
    left: EndKind,
    right: EndKind,
    jet: Option<WarpJet>,
}

impl WarpedGeometry {
    /// Geometry in arclength gauge (`a = 1`) with open ends.
    pub fn new(params: SolitonParams, grid: RadialGrid, w: RadialProfile) -> Result<Self> {
        let a = RadialProfile::constant(1.0, grid.count());
        Self::with_lapse(params, grid, w, a)
    }

    pub fn with_lapse(params: SolitonParams, grid: RadialGrid, w: RadialProfile, a: RadialProfile) -> Result<Self> {
        Self::build(params, grid, w, a, EndKind::Open, EndKind::Open)
    }

    pub fn build(
        params: SolitonParams,
        grid: RadialGrid,
        w: RadialProfile,
        a: RadialProfile,
        left: EndKind,
        right: EndKind,
    ) -> Result<Self> {
        let g = Self { params, grid, w, a, left, right, jet: None };
        g.validate()?;
        Ok(g)
    }

    pub fn with_ends(mut self, left: EndKind, right: EndKind) -> Result<Self> {
        self.left = left;
        self.right = right;
        self.validate()?;
        Ok(self)
    }

    pub fn with_jet(mut self, jet: WarpJet) -> Result<Self> {
        for p in [&jet.w1, &jet.w2].into_iter().chain(jet.w3.as_ref()) {
            self.grid.check_profile(p)?;
        }
        self.jet = Some(jet);
        Ok(self)
    }

    pub fn without_jet(mut self) -> Self {
        self.jet = None;
        self
    }

    fn validate(&self) -> Result<()> {
        self.params.check()?;
        self.grid.check_profile(&self.w)?;
        self.grid.check_profile(&self.a)?;
        let m = self.grid.count();
        for (i, (&a, &w)) in self.a.iter().zip(self.w.iter()).enumerate() {
            let r = self.grid.node(i);
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if a <= 0.0 {
                return Err(Error::NonPositiveLapse { index: i, r, value: a });
            }
            let pole = (i == 0 && self.left == EndKind::Pole) || (i == m - 1 && self.right == EndKind::Pole);
            if pole {
                if w != 0.0 {
                    return Err(Error::Precondition(format!("pole node {i} must carry w = 0, got {w:e}")));
                }
            } else if w <= 0.0 {
                return Err(Error::NonPositiveWarp { index: i, r, value: w });
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn w(&self) -> &RadialProfile {
        &self.w
    }

    pub fn a(&self) -> &RadialProfile {
        &self.a
    }

    pub fn ends(&self) -> (EndKind, EndKind) {
        (self.left, self.right)
    }

    pub fn jet(&self) -> Option<&WarpJet> {
        self.jet.as_ref()
    }

    pub fn is_pole(&self, i: usize) -> bool {
        (i == 0 && self.left == EndKind::Pole) || (i + 1 == self.grid.count() && self.right == EndKind::Pole)
    }

    pub fn is_arclength(&self) -> bool {
        self.a.iter().all(|&a| a == 1.0)
    }

    /// The homothetic metric `c g`: `a -> c a`, `w -> sqrt(c) w`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Precondition(format!("scale factor {c} must be positive")));
        }
        let s = c.sqrt();
        let mut g = self.clone();
        g.a = self.a.map(|v| v * c);
        g.w = self.w.map(|v| v * s);
        g.jet = self.jet.as_ref().map(|j| WarpJet {
            w1: j.w1.map(|v| v * s),
            w2: j.w2.map(|v| v * s),
            w3: j.w3.as_ref().map(|p| p.map(|v| v * s)),
        });
        Ok(g)
    }

    /// Finite-difference derivative honouring the end conditions.
    pub fn fd(&self, p: &RadialProfile, order: u8, parity: Parity) -> Result<RadialProfile> {
        let stencil = |k: EndKind| match (k, parity) {
            (EndKind::Open, _) => EndStencil::OneSided,
            (EndKind::Pole, Parity::Even) => EndStencil::Even,
            (EndKind::Pole, Parity::Odd) => EndStencil::Odd,
        };
        derivative_with_ends(p, &self.grid, order, stencil(self.left), stencil(self.right))
    }

    fn warp_derivatives(&self) -> Result<(RadialProfile, RadialProfile)> {
        match &self.jet {
            Some(j) => Ok((j.w1.clone(), j.w2.clone())),
            None => Ok((self.fd(&self.w, 1, Parity::Odd)?, self.fd(&self.w, 2, Parity::Odd)?)),
        }
    }

    fn warp_third_at_pole(&self, i: usize) -> f64 {
        if let Some(w3) = self.jet.as_ref().and_then(|j| j.w3.as_ref()) {
            return w3[i];
        }
        odd_end_third_derivative(&self.w, self.grid.spacing(), i == 0)
    }

    /// Arclength derivatives `(w_s, w_ss)` of the warp, from the jet when present.
    pub fn warp_arclength_derivatives(&self) -> Result<(RadialProfile, RadialProfile)> {
        let (w1, w2) = self.warp_derivatives()?;
        let a1 = self.fd(&self.a, 1, Parity::Even)?;
        let m = self.grid.count();
        let mut ws = Vec::with_capacity(m);
        let mut wss = Vec::with_capacity(m);
        for i in 0..m {
            let (d1, d2) = self.arclength_pair(i, a1[i], w1[i], w2[i]);
            ws.push(d1);
            wss.push(d2);
        }
        Ok((RadialProfile(ws), RadialProfile(wss)))
    }

    /// Arclength derivatives `(u_s, u_ss)` of an even profile given its
    /// coordinate derivatives.
    pub(crate) fn arclength_pair(&self, i: usize, a1: f64, u1: f64, u2: f64) -> (f64, f64) {
        let a = self.a[i];
        (u1 / a.sqrt(), u2 / a - a1 * u1 / (2.0 * a * a))
    }
}

/// Sectional, Ricci and scalar curvature in the orthonormal radial frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub k_rad: RadialProfile,
    pub k_sph: RadialProfile,
    pub ric_rad: RadialProfile,
    pub ric_sph: RadialProfile,
    pub scal: RadialProfile,
    pub ric_norm_sq: RadialProfile,
}

impl CurvatureData {
    pub fn from_sectional(n: usize, k_rad: Vec<f64>, k_sph: Vec<f64>) -> Self {
        let nf = n as f64;
        let ric_rad: Vec<f64> = k_rad.iter().map(|k| (nf - 1.0) * k).collect();
        let ric_sph: Vec<f64> = k_rad.iter().zip(&k_sph).map(|(kr, ks)| kr + (nf - 2.0) * ks).collect();
        let scal: Vec<f64> = k_rad
            .iter()
            .zip(&k_sph)
            .map(|(kr, ks)| 2.0 * (nf - 1.0) * kr + (nf - 1.0) * (nf - 2.0) * ks)
            .collect();
        let ric_norm_sq = ric_rad.iter().zip(&ric_sph).map(|(rr, rs)| rr * rr + (nf - 1.0) * rs * rs).collect();
        Self {
            k_rad: RadialProfile(k_rad),
            k_sph: RadialProfile(k_sph),
            ric_rad: RadialProfile(ric_rad),
            ric_sph: RadialProfile(ric_sph),
            scal: RadialProfile(scal),
            ric_norm_sq: RadialProfile(ric_norm_sq),
        }
    }
}

pub fn curvature(geom: &WarpedGeometry) -> Result<CurvatureData> {
    geom.validate()?;
    let (w1, w2) = geom.warp_derivatives()?;
    let a1 = geom.fd(&geom.a, 1, Parity::Even)?;
    let a2 = geom.fd(&geom.a, 2, Parity::Even)?;
    let m = geom.grid.count();
    let mut k_rad = vec![0.0; m];
    let mut k_sph = vec![0.0; m];
    for i in 0..m {
        let a = geom.a[i];
        if geom.is_pole(i) {
            // both sectional curvatures tend to -w_sss / w_s at a smooth pole
            let w3 = geom.warp_third_at_pole(i);
            let k = -w3 / (a * w1[i]) + a2[i] / (2.0 * a * a);
            k_rad[i] = k;
            k_sph[i] = k;
        } else {
            let w = geom.w[i];
            let ws = w1[i] / a.sqrt();
            let wss = w2[i] / a - a1[i] * w1[i] / (2.0 * a * a);
            k_rad[i] = -wss / w;
            k_sph[i] = (1.0 - ws * ws) / (w * w);
        }
    }
    Ok(CurvatureData::from_sectional(geom.params.n, k_rad, k_sph))
}

/// First and second coordinate derivatives of an even scalar on the geometry,
/// either supplied analytically or by finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet {
    pub d1: RadialProfile,
    pub d2: RadialProfile,
}

impl ScalarJet {
    pub fn finite_difference(u: &RadialProfile, geom: &WarpedGeometry) -> Result<Self> {
        Ok(Self { d1: geom.fd(u, 1, Parity::Even)?, d2: geom.fd(u, 2, Parity::Even)? })
    }
}

/// `u_s w_s / w`, with the pole limit `u_ss`.
fn radial_quotient(geom: &WarpedGeometry, i: usize, us: f64, uss: f64, ws: f64) -> f64 {
    if geom.is_pole(i) {
        uss
    } else {
        us * ws / geom.w[i]
    }
}

/// Hessian eigenvalues of a radial function: `(f_ss, f_s w_s / w)`.
pub fn radial_hessian(f: &RadialProfile, geom: &WarpedGeometry) -> Result<(RadialProfile, RadialProfile)> {
    let jet = ScalarJet::finite_difference(f, geom)?;
    radial_hessian_with(&jet, geom)
}

pub fn radial_hessian_with(f: &ScalarJet, geom: &WarpedGeometry) -> Result<(RadialProfile, RadialProfile)> {
    geom.validate()?;
    let (w1, _) = geom.warp_derivatives()?;
    let a1 = geom.fd(&geom.a, 1, Parity::Even)?;
    let m = geom.grid.count();
    let mut rad = vec![0.0; m];
    let mut sph = vec![0.0; m];
    for i in 0..m {
        let (fs, fss) = geom.arclength_pair(i, a1[i], f.d1[i], f.d2[i]);
        let ws = w1[i] / geom.a[i].sqrt();
        rad[i] = fss;
        sph[i] = radial_quotient(geom, i, fs, fss, ws);
    }
    Ok((RadialProfile(rad), RadialProfile(sph)))
}

/// Drift Laplacian `u'' + (n-1) u' w'/w - u' f'` in arclength.
pub fn f_laplacian(u: &RadialProfile, f: &RadialProfile, geom: &WarpedGeometry) -> Result<RadialProfile> {
    let uj = ScalarJet::finite_difference(u, geom)?;
    let fj = ScalarJet::finite_difference(f, geom)?;
    f_laplacian_with(&uj, &fj, geom)
}

pub fn f_laplacian_with(u: &ScalarJet, f: &ScalarJet, geom: &WarpedGeometry) -> Result<RadialProfile> {
    let lap = laplacian_with(u, geom)?;
    let a1 = geom.fd(&geom.a, 1, Parity::Even)?;
    Ok(RadialProfile(
        (0..geom.grid.count())
            .map(|i| {
                let (us, _) = geom.arclength_pair(i, a1[i], u.d1[i], u.d2[i]);
                let (fs, _) = geom.arclength_pair(i, a1[i], f.d1[i], f.d2[i]);
                lap[i] - us * fs
            })
            .collect(),
    ))
}

/// Laplace–Beltrami operator on radial functions, `u_ss + (n-1) u_s w_s / w`.
pub fn laplacian_with(u: &ScalarJet, geom: &WarpedGeometry) -> Result<RadialProfile> {
    geom.validate()?;
    let (w1, _) = geom.warp_derivatives()?;
    let a1 = geom.fd(&geom.a, 1, Parity::Even)?;
    let nm1 = geom.params.nf() - 1.0;
    Ok(RadialProfile(
        (0..geom.grid.count())
            .map(|i| {
                let (us, uss) = geom.arclength_pair(i, a1[i], u.d1[i], u.d2[i]);
                let ws = w1[i] / geom.a[i].sqrt();
                uss + nm1 * radial_quotient(geom, i, us, uss, ws)
            })
            .collect(),
    ))
}

/// `Delta r = (n-1) w_s / w` (undefined at a pole; reported as infinity there).
pub fn laplacian_of_distance(geom: &WarpedGeometry) -> Result<RadialProfile> {
    let (w1, _) = geom.warp_derivatives()?;
    let nm1 = geom.params.nf() - 1.0;
    Ok(RadialProfile(
        (0..geom.grid.count())
            .map(|i| {
                if geom.is_pole(i) {
                    f64::INFINITY
                } else {
                    nm1 * w1[i] / geom.a[i].sqrt() / geom.w[i]
                }
            })
            .collect(),
    ))
}
