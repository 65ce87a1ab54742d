use std::f64::consts::PI;

use approx::assert_relative_eq;
use rbsol::flow::{
    compare_to_oracle, run_flow, BoundaryData, CompareOptions, FlowBc, FlowConfig, FlowState, FlowTermination,
};
use rbsol::par::Exec;
use rbsol::selfsim::self_similar_state;
use rbsol::solver::{cylinder_fixture, gaussian_fixture, sphere_fixture, sphere_radius};
use rbsol::{make_grid, RadialProfile, SolitonParams};

fn p3() -> SolitonParams {
    SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
}

#[test]
fn gaussian_stays_flat_against_the_oracle() {
    let fam = |c| gaussian_fixture(&p3(), &make_grid(0.0, 5.0, c)?);
    let opts = CompareOptions {
        flow: FlowConfig::with_ends(FlowBc::ParityPole, FlowBc::Extrapolate),
        ..CompareOptions::default()
    };
    let table = compare_to_oracle(fam, 0.25, &[51, 101], &opts).unwrap();
    for row in &table.rows {
        assert!(row.error <= 1e-9, "{row:?}");
        assert!(row.rel_err_a <= 1e-9 && row.rel_err_w_sq <= 1e-9);
    }
}

#[test]
fn sphere_ladder_converges_at_second_order() {
    let p = p3();
    let big_r = sphere_radius(&p).unwrap();
    let fam = |c| sphere_fixture(&p, &make_grid(0.6, PI * big_r - 0.6, c)?);
    let opts = CompareOptions { flow: FlowConfig::with_ends(FlowBc::Oracle, FlowBc::Oracle), ..CompareOptions::default() };
    let table = compare_to_oracle(fam, 0.05, &[51, 101, 201], &opts).unwrap();
    for w in table.rows.windows(2) {
        let ratio = w[0].error / w[1].error;
        assert!((3.0..=5.0).contains(&ratio), "{:?}", table.rows);
    }
    assert!(table.orders.iter().all(|o| o.unwrap() >= 1.6));
}

#[test]
fn ladder_strategies_agree() {
    let fam = |c| cylinder_fixture(&p3(), &make_grid(0.0, 5.0, c)?);
    let seq = CompareOptions { exec: Exec::Sequential, ..CompareOptions::default() };
    let par = CompareOptions { exec: Exec::Parallel, ..CompareOptions::default() };
    let a = compare_to_oracle(fam, 0.05, &[21, 41], &seq).unwrap();
    let b = compare_to_oracle(fam, 0.05, &[21, 41], &par).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.error, y.error);
        assert_eq!(x.a_range, y.a_range);
    }
}

#[test]
fn frozen_ends_empty_the_trusted_region() {
    let fam = |c| cylinder_fixture(&p3(), &make_grid(0.0, 5.0, c)?);
    let opts = CompareOptions { flow: FlowConfig::default(), ..CompareOptions::default() };
    assert!(compare_to_oracle(fam, 0.25, &[41], &opts).is_err());
}

#[test]
fn homothetic_sphere_stays_homothetic() {
    let p = p3();
    let big_r = sphere_radius(&p).unwrap();
    let g = make_grid(0.3, PI * big_r - 0.3, 121).unwrap();
    let w_sq = g.map(|r| (big_r * (r / big_r).sin()).powi(2));
    let st = FlowState::new(0.0, g.clone(), RadialProfile::constant(1.0, 121), w_sq.clone(), p).unwrap();
    let end = |r: f64| {
        let w0_sq = (big_r * (r / big_r).sin()).powi(2);
        BoundaryData::new(move |t| {
            let c = 1.0 - 2.0 * t;
            Ok((c, c * w0_sq))
        })
    };
    let cfg = FlowConfig::with_ends(FlowBc::Dirichlet(end(g.r_min())), FlowBc::Dirichlet(end(g.r_max())));
    let run = run_flow(&st, 0.1, 0.05, &cfg).unwrap();
    assert_eq!(run.termination, FlowTermination::Completed);
    let h = g.spacing();
    for snap in &run.snapshots {
        let c = 1.0 - 2.0 * snap.t;
        for i in 0..121 {
            let ratio = snap.w_sq[i] / w_sq[i];
            assert!((ratio - c).abs() <= 10.0 * h * h, "t = {}, node {i}: {ratio} vs {c}", snap.t);
        }
    }
}

#[test]
fn cylinder_matches_pullback_in_fixed_coordinates() {
    let s = cylinder_fixture(&p3(), &make_grid(0.0, 5.0, 51).unwrap()).unwrap();
    let sol = self_similar_state(&s, 0.25).unwrap();
    let cfg = FlowConfig::with_ends(FlowBc::Extrapolate, FlowBc::Extrapolate);
    let run = run_flow(&FlowState::from_geometry(0.0, s.geom()).unwrap(), 0.25, 0.25, &cfg).unwrap();
    let (lo, hi) = sol.valid_range;
    for i in lo..=hi {
        assert_relative_eq!(run.final_state.a[i], sol.raw_a[i - lo], max_relative = 1e-9);
        assert_relative_eq!(run.final_state.w_sq[i], sol.raw_w_sq[i - lo], max_relative = 1e-12);
    }
}

#[test]
fn manifest_lists_snapshots() {
    let s = cylinder_fixture(&p3(), &make_grid(0.0, 5.0, 21).unwrap()).unwrap();
    let cfg = FlowConfig::with_ends(FlowBc::Extrapolate, FlowBc::Extrapolate);
    let run = run_flow(&FlowState::from_geometry(0.0, s.geom()).unwrap(), 0.1, 0.025, &cfg).unwrap();
    let m = run.manifest();
    assert_eq!(m.times.len(), 5);
    assert_eq!(m.files[4], "snap_4.csv");
    let mut buf = Vec::new();
    run.snapshots[1].write_csv(&run.final_state.grid, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,a,w_sq,R\n"));
    assert_eq!(text.lines().count(), 22);
}
