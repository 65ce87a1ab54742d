use proptest::prelude::*;
use rbsol::flow::{flow_rhs, FlowState};
use rbsol::geometry::CurvatureData;
use rbsol::identities::{cross_derivative_defect, soliton_residual};
use rbsol::selfsim::scaling_check;
use rbsol::solver::sphere_fixture;
use rbsol::{curvature, make_grid, RadialProfile, SolitonParams, WarpedGeometry};

fn warp(g: &rbsol::RadialGrid, amp: f64, freq: f64) -> RadialProfile {
    g.map(|r| 1.0 + 0.5 * r + amp * (freq * r).sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_curvature_scales_inversely(c in 0.05f64..20.0, amp in 0.0f64..0.3, freq in 0.5f64..3.0) {
        let p = SolitonParams { n: 4, rho: 0.05, lambda: 1.0 };
        let g = make_grid(0.5, 3.0, 61).unwrap();
        let geom = WarpedGeometry::new(p, g.clone(), warp(&g, amp, freq)).unwrap();
        let scale = curvature(&geom).unwrap().scal.sup_abs().max(1.0);
        prop_assert!(scaling_check(&geom, c).unwrap() <= 1e-11 * scale / c.min(1.0));
    }

    #[test]
    fn curvature_traces_are_consistent(n in 3usize..9, kr in prop::collection::vec(-5.0f64..5.0, 8), ks in prop::collection::vec(-5.0f64..5.0, 8)) {
        let c = CurvatureData::from_sectional(n, kr.clone(), ks.clone());
        let nf = n as f64;
        for i in 0..8 {
            let trace = c.ric_rad[i] + (nf - 1.0) * c.ric_sph[i];
            prop_assert!((trace - c.scal[i]).abs() <= 1e-12 * (1.0 + c.scal[i].abs()));
            prop_assert!(c.ric_norm_sq[i] >= 0.0);
            // Cauchy-Schwarz: R^2 <= n |Ric|^2
            prop_assert!(c.scal[i] * c.scal[i] <= nf * c.ric_norm_sq[i] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn cross_defect_is_antisymmetric_and_rotation_invariant(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        b in prop::collection::vec(-3.0f64..3.0, 3),
        theta in 0.0f64..6.3,
    ) {
        let ab = cross_derivative_defect(&a, &b).unwrap();
        let ba = cross_derivative_defect(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        let rot = |v: &[f64]| vec![theta.cos() * v[0] - theta.sin() * v[1], theta.sin() * v[0] + theta.cos() * v[1], v[2]];
        let rotated = cross_derivative_defect(&rot(&a), &rot(&b)).unwrap();
        prop_assert!((rotated - ab).abs() <= 1e-10 * (1.0 + ab));
        prop_assert_eq!(cross_derivative_defect(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn flow_rhs_is_scale_invariant(c in 0.1f64..10.0, amp in 0.0f64..0.3) {
        let p = SolitonParams { n: 3, rho: 0.1, lambda: 1.0 };
        let g = make_grid(0.5, 3.0, 41).unwrap();
        let w = warp(&g, amp, 1.3);
        let st = FlowState::new(0.0, g.clone(), RadialProfile::constant(1.0, 41), w.map(|v| v * v), p).unwrap();
        let scaled = FlowState::new(0.0, g, RadialProfile::constant(c, 41), w.map(|v| c * v * v), p).unwrap();
        let (da, dw) = flow_rhs(&st).unwrap();
        let (da_c, dw_c) = flow_rhs(&scaled).unwrap();
        for i in 0..41 {
            prop_assert!((da_c[i] - da[i]).abs() <= 1e-9 * (1.0 + da[i].abs()));
            prop_assert!((dw_c[i] - dw[i]).abs() <= 1e-9 * (1.0 + dw[i].abs()));
        }
    }

    #[test]
    fn residual_ignores_potential_shift(shift in -5.0f64..5.0) {
        let p = SolitonParams { n: 3, rho: 0.1, lambda: 1.0 };
        let s = sphere_fixture(&p, &make_grid(0.3, 3.0, 51).unwrap()).unwrap().finite_difference_only();
        let base = soliton_residual(&s).unwrap().sup_norm;
        let moved = soliton_residual(&s.normalized_min(1.0 + shift)).unwrap().sup_norm;
        prop_assert!((moved - base).abs() <= 1e-9);
    }
}
