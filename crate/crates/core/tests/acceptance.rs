//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion
//! so that `cargo test` reports the overall outcome.

use std::f64::consts::PI;

use rbsol::flow::{
    compare_to_oracle, run_flow, step, stability_bound, CompareOptions, FlowBc, FlowConfig, FlowState,
    FlowTermination,
};
use rbsol::growth::{fit_gradient_bounds, fit_quadratic_growth, riccati_check, scalar_constancy_report, default_tol};
use rbsol::identities::{identity_defects, soliton_residual, validate_params, SolitonData};
use rbsol::selfsim::{scaling_check, tau};
use rbsol::solver::{cylinder_fixture, gaussian_fixture, shoot_from_pole, sphere_fixture, sphere_radius};
use rbsol::{curvature, make_grid, RadialProfile, SolitonParams, WarpedGeometry};

const LADDER: [usize; 3] = [101, 201, 401];

fn p3() -> SolitonParams {
    SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
}

fn gaussian(count: usize) -> SolitonData {
    gaussian_fixture(&p3(), &make_grid(0.0, 5.0, count).unwrap()).unwrap()
}

fn cylinder(count: usize) -> SolitonData {
    cylinder_fixture(&p3(), &make_grid(0.0, 5.0, count).unwrap()).unwrap()
}

/// Einstein sphere away from its poles: the only fixture with genuine truncation error.
fn sphere(count: usize) -> SolitonData {
    let big_r = sphere_radius(&p3()).unwrap();
    sphere_fixture(&p3(), &make_grid(0.6, PI * big_r - 0.6, count).unwrap()).unwrap()
}

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn h(count: usize) -> f64 {
    5.0 / (count - 1) as f64
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut analytic = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for count in LADDER {
        for s in [gaussian(count), cylinder(count)] {
            analytic = analytic.max(soliton_residual(&s).unwrap().sup_norm);
            let fd = soliton_residual(&s.finite_difference_only()).unwrap().sup_norm;
            worst_ratio = worst_ratio.max(fd / (h(count) * h(count)));
        }
    }
    pass &= analytic <= 1e-12 && worst_ratio <= 1.0;
    let sph: Vec<f64> = LADDER.iter().map(|&c| soliton_residual(&sphere(c).finite_difference_only()).unwrap().sup_norm).collect();
    let ord = orders(&sph);
    pass &= ord.iter().all(|o| (o - 2.0).abs() <= 0.3);
    Outcome {
        pass,
        detail: format!(
            "analytic sup {analytic:.1e}; finite differences <= {worst_ratio:.1e} h^2 (fixtures are stencil-exact, order not observable); \
             sphere ladder orders {:.2}, {:.2}",
            ord[0], ord[1]
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut analytic = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for count in LADDER {
        for s in [gaussian(count), cylinder(count)] {
            analytic = analytic.max(identity_defects(&s).unwrap().max_sup());
            let fd = identity_defects(&s.finite_difference_only()).unwrap().max_sup();
            worst_ratio = worst_ratio.max(fd / (h(count) * h(count)));
        }
    }
    pass &= analytic <= 1e-10 && worst_ratio <= 1.0;
    let sph: Vec<[f64; 3]> = LADDER.iter().map(|&c| identity_defects(&sphere(c).finite_difference_only()).unwrap().sup).collect();
    let mut min_order = f64::INFINITY;
    for k in 0..3 {
        let col: Vec<f64> = sph.iter().map(|d| d[k]).collect();
        min_order = orders(&col).into_iter().fold(min_order, f64::min);
    }
    pass &= min_order >= 1.7;
    // cylinder arithmetic at one node, kept in its hand-written form
    let d = identity_defects(&cylinder(101)).unwrap();
    #[allow(clippy::eq_op)]
    let d1_hand: f64 = 1.25 - ((3.0 * 0.1 - 1.0) * 2.5 + 3.0);
    let d3_hand: f64 = 2.0 * (0.1 * 6.25 - 3.125 + 2.5);
    let exact = d.d1[50].abs() <= 1e-15 && d.d3[50].abs() <= 1e-15 && d1_hand.abs() <= 1e-15 && d3_hand.abs() <= 1e-15;
    pass &= exact;
    Outcome {
        pass,
        detail: format!(
            "analytic sup {analytic:.1e}; finite differences <= {worst_ratio:.1e} h^2; sphere ladder min order {min_order:.2}; \
             cylinder d1 = {:.1e}, d3 = {:.1e}",
            d.d1[50], d.d3[50]
        ),
    }
}

fn criterion_3() -> Outcome {
    let table = compare_to_oracle(|c| Ok(cylinder(c)), 0.25, &LADDER, &CompareOptions::default()).unwrap();
    let a_exact = 0.5f64.powf(-0.25);
    let mut pass = true;
    let mut worst_rel = 0.0f64;
    for row in &table.rows {
        let closed = [
            (row.a_range.0 - a_exact).abs() / a_exact,
            (row.a_range.1 - a_exact).abs() / a_exact,
            (row.w_sq_range.0 - 0.4).abs() / 0.4,
            (row.w_sq_range.1 - 0.4).abs() / 0.4,
            row.rel_err_a,
            row.rel_err_w_sq,
        ];
        worst_rel = closed.into_iter().fold(worst_rel, f64::max);
    }
    // the cylinder is spatially homogeneous, so both sides are exact up to roundoff
    pass &= worst_rel <= 1e-9;
    let opts = CompareOptions { flow: FlowConfig::with_ends(FlowBc::Oracle, FlowBc::Oracle), ..CompareOptions::default() };
    let sph = compare_to_oracle(|c| Ok(sphere(c)), 0.1, &LADDER, &opts).unwrap();
    let ord: Vec<f64> = sph.orders.iter().map(|o| o.unwrap_or(f64::NAN)).collect();
    pass &= ord.iter().all(|&o| o >= 1.7);
    Outcome {
        pass,
        detail: format!(
            "cylinder w^2 = 0.4, a = {a_exact:.7}: worst relative error {worst_rel:.1e} at every resolution (roundoff floor, order undefined); \
             sphere ladder orders {:.2}, {:.2}",
            ord[0], ord[1]
        ),
    }
}

fn criterion_4() -> Outcome {
    let g = make_grid(0.0, 1.0, 101).unwrap();
    let mut st = FlowState::new(0.0, g.clone(), RadialProfile::constant(1.0, 101), g.map(|x| x * x), p3()).unwrap();
    let cfg = FlowConfig::with_ends(FlowBc::ParityPole, FlowBc::Extrapolate);
    let dt = stability_bound(&st, cfg.sigma);
    for _ in 0..1000 {
        st = step(&st, dt, &cfg).unwrap();
    }
    let dev = (0..101)
        .map(|i| (st.a[i] - 1.0).abs().max((st.w_sq[i] - g.node(i).powi(2)).abs()))
        .fold(0.0, f64::max);
    Outcome { pass: dev <= 1e-10, detail: format!("sup deviation after 1000 steps {dev:.1e}") }
}

fn criterion_5() -> Outcome {
    let s = cylinder(51);
    let st = FlowState::from_geometry(0.0, s.geom()).unwrap();
    let cfg = FlowConfig::with_ends(FlowBc::Extrapolate, FlowBc::Extrapolate);
    let run = run_flow(&st, 0.6, 0.01, &cfg).unwrap();
    let r0 = run.snapshots[0].sup_scal;
    let drift = run.snapshots.iter().map(|s| (s.sup_scal * tau(s.t, 1.0) / r0 - 1.0).abs()).fold(0.0, f64::max);
    match run.termination {
        FlowTermination::BlowUp { t, sup_scal } => Outcome {
            pass: t < 0.5 && drift <= 1e-6,
            detail: format!("guard at t = {t:.6} (sup|R| = {sup_scal:.2e}); max |R tau / R0 - 1| = {drift:.1e}"),
        },
        FlowTermination::Completed => Outcome { pass: false, detail: "guard never triggered".into() },
    }
}

fn criterion_6() -> Outcome {
    let shot = shoot_from_pole(&p3(), 1.0, 5.0, 501).unwrap();
    let dev = shot
        .data
        .as_ref()
        .map(|d| (0..d.grid().count()).map(|i| (d.geom().w()[i] - d.grid().node(i)).abs()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    Outcome {
        pass: dev <= 1e-8 && shot.stop_r == 5.0,
        detail: format!("sup|w - r| = {dev:.1e} on [0, {}], termination {:?}", shot.stop_r, shot.termination),
    }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, s, k) in [("gaussian", gaussian(201), 0.0), ("cylinder", cylinder(201), 2.5)] {
        let s = s.normalized_min(1.0);
        let b = fit_gradient_bounds(&s, k).unwrap();
        let q = fit_quadratic_growth(&s).unwrap();
        pass &= b.violation_count == 0 && q.violation_count == 0;
        notes.push(format!(
            "{name}: bound violations {} (Phi {}, Psi {} non-monotone), growth violations {}",
            b.inequality_violations, b.phi_monotone_violations, b.psi_monotone_violations, q.violation_count
        ));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let big_r = sphere_radius(&p3()).unwrap();
    let round = sphere_fixture(&p3(), &make_grid(0.0, PI * big_r, 201).unwrap()).unwrap();
    for s in [gaussian(201), cylinder(201), round] {
        let d = riccati_check(s.geom()).unwrap();
        let (_, wss) = s.geom().warp_arclength_derivatives().unwrap();
        let tol = default_tol(s.grid(), &d);
        for i in 0..d.len() {
            if wss[i] <= 0.0 {
                worst = worst.max(d[i]);
                pass &= d[i] <= tol;
            }
        }
    }
    let fixtures = [gaussian(201), cylinder(201)].map(|s| scalar_constancy_report(&s).unwrap());
    pass &= fixtures.iter().all(|&v| v == 0.0);
    let base = cylinder(201);
    let w0 = base.geom().w()[0];
    let g = base.grid().clone();
    let geom = WarpedGeometry::new(p3(), g.clone(), g.map(|r| w0 * (1.0 + 0.01 * r.sin()))).unwrap();
    let bent = SolitonData::new(geom, base.f().clone()).unwrap();
    let variation = scalar_constancy_report(&bent).unwrap();
    let residual = soliton_residual(&bent).unwrap().sup_norm;
    pass &= variation > 0.0 && residual > 0.0;
    Outcome {
        pass,
        detail: format!(
            "riccati defect {worst:.1e} where w'' <= 0; R variation on fixtures {:?}; perturbed cylinder variation {variation:.2e} with residual {residual:.2e}",
            fixtures
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    for n in 3..=10usize {
        let nf = n as f64;
        let special = [0.0, 1.0 / nf, 1.0 / (2.0 * (nf - 1.0))];
        let mut probes: Vec<f64> = special.to_vec();
        probes.extend((-20..=60).map(|k| k as f64 * 0.01 + 0.003));
        for rho in probes {
            let c = validate_params(&SolitonParams { n, rho, lambda: 1.0 }).unwrap();
            let flagged = c.excluded_soliton || c.excluded_analyticity;
            pass &= flagged == special.contains(&rho);
        }
        let edge = 1.0 / (2.0 * (nf - 1.0));
        let inside = |rho: f64| validate_params(&SolitonParams { n, rho, lambda: 1.0 }).unwrap().is_shrinking_window;
        pass &= !inside(0.0) && inside(1e-9) && inside(edge * (1.0 - 1e-9)) && !inside(edge);
    }
    Outcome { pass, detail: "n = 3..10 probed; window for n = 3 is (0, 0.25)".into() }
}

fn criterion_10() -> Outcome {
    let p = p3();
    let big_r = sphere_radius(&p).unwrap();
    let flat = gaussian_fixture(&p, &make_grid(0.2, 3.0, 281).unwrap()).unwrap().geom().clone();
    let round = sphere_fixture(&p, &make_grid(0.2, PI * big_r - 0.2, 281).unwrap()).unwrap().geom().clone();
    let cyl = cylinder(101).geom().clone();
    let sup = |geom: &WarpedGeometry| {
        assert!(curvature(geom).is_ok());
        [0.1, 0.5, 2.0, 10.0].iter().map(|&c| scaling_check(geom, c).unwrap()).fold(0.0, f64::max)
    };
    let worst = [&flat, &round, &cyl].into_iter().map(sup).fold(0.0, f64::max);
    // same geometries through finite differences only: roundoff amplified by 1/h^2
    let fd = [&flat, &round].into_iter().map(|g| sup(&g.clone().without_jet())).fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("sup |R(cg) - R(g)/c| = {worst:.1e} with analytic jets ({fd:.1e} through finite differences only)"),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

/// Runs without the libtest harness so the criterion lines are never captured.
fn main() {
    let criteria: [Criterion; 10] = [
        ("fixture exactness", criterion_1),
        ("identity suite", criterion_2),
        ("self-similar oracle agreement", criterion_3),
        ("flat fixed point", criterion_4),
        ("blow-up horizon", criterion_5),
        ("shooting oracle", criterion_6),
        ("growth certificates", criterion_7),
        ("rigidity diagnostics", criterion_8),
        ("parameter gate", criterion_9),
        ("scaling law", criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", k + 1, out.detail);
        if !out.pass {
            failed.push(k + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
