use approx::assert_relative_eq;
use rbsol::selfsim::{self_similar_state, SelfSimilarHeader};
use rbsol::solver::{cylinder_fixture, gaussian_fixture};
use rbsol::{curvature, make_grid, EndKind, SolitonParams};

fn p3() -> SolitonParams {
    SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
}

#[test]
fn gaussian_is_its_own_pullback() {
    let s = gaussian_fixture(&p3(), &make_grid(0.0, 5.0, 101).unwrap()).unwrap();
    let sol = self_similar_state(&s, 0.3).unwrap();
    assert_eq!(sol.geom_t.ends().0, EndKind::Pole);
    let g = sol.geom_t.grid();
    for i in 0..g.count() {
        assert_relative_eq!(sol.geom_t.w()[i], g.node(i), epsilon = 1e-8);
    }
    assert!(curvature(&sol.geom_t).unwrap().scal.sup_abs() < 1e-6);
}

#[test]
fn cylinder_pullback_values() {
    let s = cylinder_fixture(&p3(), &make_grid(0.0, 5.0, 101).unwrap()).unwrap();
    let sol = self_similar_state(&s, 0.25).unwrap();
    for v in sol.raw_w_sq.iter().chain(sol.geom_t.w().map(|w| w * w).iter()) {
        assert_relative_eq!(*v, 0.4, max_relative = 1e-12);
    }
    for a in sol.raw_a.iter() {
        assert_relative_eq!(*a, 0.5f64.powf(-0.25), max_relative = 1e-9);
    }
    // f_t = f0(phi) = 0.625 r^2 tau^{-5/4}; PCHIP is not exact on quadratics
    let r = sol.raw_grid.node(10);
    assert_relative_eq!(sol.raw_f[10], 0.625 * r * r * 0.5f64.powf(-1.25), max_relative = 1e-4);
}

#[test]
fn time_zero_reproduces_the_source() {
    let s = cylinder_fixture(&p3(), &make_grid(0.0, 5.0, 41).unwrap()).unwrap();
    let sol = self_similar_state(&s, 0.0).unwrap();
    assert_eq!(sol.geom_t.w(), s.geom().w());
    assert_eq!(&sol.f_t, s.f());
    assert_eq!(sol.geom_t.grid().nodes(), s.grid().nodes());
}

#[test]
fn serializes_with_header() {
    let s = cylinder_fixture(&p3(), &make_grid(0.0, 5.0, 41).unwrap()).unwrap();
    let sol = self_similar_state(&s, 0.25).unwrap();
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s,w,f\n"));
    let header: SelfSimilarHeader = serde_json::from_str(&serde_json::to_string(&sol.header()).unwrap()).unwrap();
    assert_eq!(header.tau, 0.5);
    assert_eq!(header.valid_range.0, 0.0);
}
