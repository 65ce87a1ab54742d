//! Uniform radial grids, nodal profiles and finite-difference derivatives.

use std::io::Write;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 5;

/// Uniform grid on `[r_min, r_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    nodes: Vec<f64>,
}

/// Builds a uniform grid. When the window straddles the origin, `r = 0` must
/// fall on a node and is stored as an exact zero.
pub fn make_grid(r_min: f64, r_max: f64, count: usize) -> Result<RadialGrid> {
    if !(r_min.is_finite() && r_max.is_finite()) {
        return Err(Error::InvalidGrid("bounds must be finite".into()));
    }
    if r_min >= r_max {
        return Err(Error::InvalidGrid(format!("r_min = {r_min} must be < r_max = {r_max}")));
    }
    if count < MIN_NODES {
        return Err(Error::InvalidGrid(format!("count = {count} is below {MIN_NODES}")));
    }
    let span = r_max - r_min;
    let last = (count - 1) as f64;
    let mut nodes: Vec<f64> = (0..count).map(|i| r_min + span * (i as f64) / last).collect();
    nodes[count - 1] = r_max;
    if r_min < 0.0 && r_max > 0.0 {
        let h = span / last;
        let k = (-r_min / h).round() as usize;
        if (nodes[k] / h).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "r = 0 does not fall on a node of [{r_min}, {r_max}] with {count} nodes"
            )));
        }
        nodes[k] = 0.0;
    }
    Ok(RadialGrid { r_min, r_max, nodes })
}

impl RadialGrid {
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.count() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index of the node closest to `r`, clamped to the window.
    pub fn nearest(&self, r: f64) -> usize {
        let x = ((r - self.r_min) / self.spacing()).round();
        x.clamp(0.0, (self.count() - 1) as f64) as usize
    }

    /// Same spacing, restricted to nodes `lo..=hi`.
    pub fn sub_grid(&self, lo: usize, hi: usize) -> Result<RadialGrid> {
        if hi >= self.count() || hi < lo || hi - lo + 1 < MIN_NODES {
            return Err(Error::InvalidGrid(format!("sub-range {lo}..={hi} too small")));
        }
        Ok(RadialGrid {
            r_min: self.nodes[lo],
            r_max: self.nodes[hi],
            nodes: self.nodes[lo..=hi].to_vec(),
        })
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> RadialProfile {
        RadialProfile(self.nodes.iter().map(|&r| f(r)).collect())
    }

    pub fn check_profile(&self, p: &RadialProfile) -> Result<()> {
        if p.len() != self.count() {
            return Err(Error::LengthMismatch { expected: self.count(), actual: p.len() });
        }
        Ok(())
    }
}

/// One value per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile(pub Vec<f64>);

impl RadialProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn constant(value: f64, len: usize) -> Self {
        Self(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn sup_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `r,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, grid: &RadialGrid, header: &str, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "r,{header}")?;
        for (r, v) in grid.nodes().iter().zip(&self.0) {
            writeln!(out, "{},{}", fmt17(*r), fmt17(*v))?;
        }
        Ok(())
    }
}

impl Index<usize> for RadialProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Symmetry used to fill ghost nodes beyond an end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndStencil {
    /// Second-order one-sided stencil.
    OneSided,
    /// Reflection `p(-x) = p(x)` about the end node.
    Even,
    /// Reflection `p(-x) = -p(x)` about the end node.
    Odd,
}

/// Derivative of order 1 or 2 with one-sided second-order stencils at both ends.
pub fn derivative(p: &RadialProfile, grid: &RadialGrid, order: u8) -> Result<RadialProfile> {
    derivative_with_ends(p, grid, order, EndStencil::OneSided, EndStencil::OneSided)
}

pub fn derivative_with_ends(
    p: &RadialProfile,
    grid: &RadialGrid,
    order: u8,
    left: EndStencil,
    right: EndStencil,
) -> Result<RadialProfile> {
    grid.check_profile(p)?;
    let h = grid.spacing();
    let v = p.values();
    let m = v.len();
    let mut out = vec![0.0; m];
    match order {
        1 => {
            for i in 1..m - 1 {
                out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            }
            out[0] = match left {
                EndStencil::OneSided => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
                EndStencil::Even => 0.0,
                EndStencil::Odd => v[1] / h,
            };
            out[m - 1] = match right {
                EndStencil::OneSided => (3.0 * v[m - 1] - 4.0 * v[m - 2] + v[m - 3]) / (2.0 * h),
                EndStencil::Even => 0.0,
                EndStencil::Odd => -v[m - 2] / h,
            };
        }
        2 => {
            let h2 = h * h;
            for i in 1..m - 1 {
                out[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2;
            }
            out[0] = match left {
                EndStencil::OneSided => (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2,
                EndStencil::Even => 2.0 * (v[1] - v[0]) / h2,
                EndStencil::Odd => 0.0,
            };
            out[m - 1] = match right {
                EndStencil::OneSided => {
                    (2.0 * v[m - 1] - 5.0 * v[m - 2] + 4.0 * v[m - 3] - v[m - 4]) / h2
                }
                EndStencil::Even => 2.0 * (v[m - 2] - v[m - 1]) / h2,
                EndStencil::Odd => 0.0,
            };
        }
        _ => return Err(Error::Precondition(format!("derivative order {order} not supported"))),
    }
    Ok(RadialProfile(out))
}

/// Third derivative at an end node of an odd profile (the end is a smooth
/// pole with `p = 0`). `at_left` selects the end.
pub fn odd_end_third_derivative(p: &RadialProfile, h: f64, at_left: bool) -> f64 {
    let v = p.values();
    let m = v.len();
    if at_left {
        (v[2] - 2.0 * v[1]) / (h * h * h)
    } else {
        // mirror image: q(k) = p(m-1-k), and d/dr = -d/dq
        -(v[m - 3] - 2.0 * v[m - 2]) / (h * h * h)
    }
}

/// Cumulative trapezoidal integral of `p` over the nodes `xs`, starting at 0.
pub fn cumulative_trapezoid(xs: &[f64], p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (p[i] + p[i - 1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_basic() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        assert_abs_diff_eq!(g.spacing(), 0.1, epsilon = 1e-15);
        assert_eq!(g.node(3), 0.3);
        let g = make_grid(-1.0, 1.0, 21).unwrap();
        assert_eq!(g.node(10), 0.0);
        assert!(matches!(make_grid(0.0, 5.0, 4), Err(Error::InvalidGrid(_))));
        assert!(make_grid(1.0, 0.0, 11).is_err());
        assert!(make_grid(-1.0, 1.0, 20).is_err());
    }

    #[test]
    fn straddling_grid_has_exact_zero() {
        let g = make_grid(-0.7, 2.1, 29).unwrap();
        assert_eq!(g.node(7), 0.0);
    }

    #[test]
    fn quadratic_first_derivative_is_exact() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        let p = g.map(|r| r * r);
        let d = derivative(&p, &g, 1).unwrap();
        for (i, r) in g.nodes().iter().enumerate() {
            assert_abs_diff_eq!(d[i], 2.0 * r, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_second_derivative_is_zero() {
        let g = make_grid(-2.0, 3.0, 11).unwrap();
        let d = derivative(&RadialProfile::constant(4.2, 11), &g, 2).unwrap();
        assert!(d.sup_abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        let g = make_grid(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            derivative(&RadialProfile::constant(1.0, 10), &g, 1),
            Err(Error::LengthMismatch { expected: 11, actual: 10 })
        ));
    }

    #[test]
    fn parity_ends_match_analytic() {
        let g = make_grid(0.0, 1.0, 201).unwrap();
        let s = g.map(f64::sin);
        let c = g.map(f64::cos);
        let d1 = derivative_with_ends(&s, &g, 1, EndStencil::Odd, EndStencil::OneSided).unwrap();
        assert_abs_diff_eq!(d1[0], 1.0, epsilon = 1e-4);
        let d2 = derivative_with_ends(&c, &g, 2, EndStencil::Even, EndStencil::OneSided).unwrap();
        assert_abs_diff_eq!(d2[0], -1.0, epsilon = 1e-4);
        let w3 = odd_end_third_derivative(&s, g.spacing(), true);
        assert_abs_diff_eq!(w3, -1.0, epsilon = 1e-3);
    }

    #[test]
    fn trapezoid_of_linear() {
        let xs = [0.0, 0.5, 1.0, 2.0];
        let s = cumulative_trapezoid(&xs, &xs);
        assert_abs_diff_eq!(s[3], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn fmt17_roundtrips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.189207115002721] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
