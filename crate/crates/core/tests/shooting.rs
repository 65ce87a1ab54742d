use rbsol::identities::soliton_residual;
use rbsol::par::Exec;
use rbsol::solver::{
    bisect_alpha, pole_warp_cubic, shoot_from_pole, shoot_from_pole_with, shoot_sweep, sphere_radius, ShootOptions,
    Termination,
};
use rbsol::{Error, SolitonParams};

fn p3() -> SolitonParams {
    SolitonParams { n: 3, rho: 0.1, lambda: 1.0 }
}

fn gaussian_gap(tol: f64) -> f64 {
    let opts = ShootOptions { ode_tol: tol, ..ShootOptions::default() };
    let shot = shoot_from_pole_with(&p3(), 1.0, 5.0, 201, &opts).unwrap();
    let d = shot.data.unwrap();
    (0..201).map(|i| (d.geom().w()[i] - d.grid().node(i)).abs()).fold(0.0, f64::max)
}

#[test]
fn gaussian_shot_is_exact() {
    let shot = shoot_from_pole(&p3(), 1.0, 5.0, 201).unwrap();
    assert_eq!(shot.termination, Termination::ReachedRMax);
    assert!(shot.residual_sup.unwrap() <= 1e-8);
    let d = shot.data.unwrap();
    assert_eq!(d.f().min(), 1.0);
    assert!(gaussian_gap(1e-10) <= 1e-8);
    // tightening the tolerance never hurts
    assert!(gaussian_gap(1e-12) <= gaussian_gap(1e-8) + 1e-15);
}

#[test]
fn sphere_shot_closes_at_the_antipode() {
    let p = p3();
    let shot = shoot_from_pole(&p, 0.0, 5.0, 501).unwrap();
    assert_eq!(shot.termination, Termination::WarpVanished);
    let antipode = std::f64::consts::PI * sphere_radius(&p).unwrap();
    assert!((shot.stop_r - antipode).abs() < 0.02, "{} vs {antipode}", shot.stop_r);
    assert_eq!(pole_warp_cubic(&p, 0.0), -1.0 / 1.4);
}

#[test]
fn far_shot_leaves_the_smooth_regime() {
    let shot = shoot_from_pole(&p3(), 10.0, 5.0, 501).unwrap();
    assert_ne!(shot.termination, Termination::ReachedRMax);
    assert!(shot.stop_r < 5.0);
}

#[test]
fn nearby_shot_converges_with_the_grid() {
    let res: Vec<f64> = [101, 201, 401]
        .iter()
        .map(|&c| soliton_residual(&shoot_from_pole(&p3(), 0.9, 3.0, c).unwrap().data.unwrap()).unwrap().sup_norm)
        .collect();
    assert!(res[1] < res[0] / 2.5 && res[2] < res[1] / 2.5, "{res:?}");
}

#[test]
fn excluded_parameters_are_rejected() {
    for rho in [0.0, 0.25, 1.0 / 3.0] {
        let p = SolitonParams { rho, ..p3() };
        assert!(matches!(shoot_from_pole(&p, 1.0, 5.0, 101), Err(Error::ExcludedParameter(_))), "rho = {rho}");
    }
    assert!(shoot_from_pole(&p3(), f64::NAN, 5.0, 101).is_err());
}

#[test]
fn bisection_finds_a_cylindrical_end() {
    let shot = bisect_alpha(&p3(), 0.0, 1.0, 3.0, 151, 1e-10).unwrap();
    assert_eq!(shot.termination, Termination::ReachedRMax);
    assert!(shot.last_w_prime.abs() < 1e-5, "{}", shot.last_w_prime);
    assert!(bisect_alpha(&p3(), 1.0, 1.5, 3.0, 151, 1e-6).is_err());
}

#[test]
fn sweep_strategies_agree() {
    let alphas = [0.5, 0.9, 1.0, 1.1, 10.0];
    let opts = ShootOptions::default();
    let a = shoot_sweep(&p3(), &alphas, 3.0, 101, &opts, Exec::Sequential);
    let b = shoot_sweep(&p3(), &alphas, 3.0, 101, &opts, Exec::Parallel);
    for (x, y) in a.iter().zip(&b) {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        assert_eq!(x.termination, y.termination);
        assert_eq!(x.residual_sup, y.residual_sup);
    }
}

#[test]
fn shot_serializes() {
    let shot = shoot_from_pole(&p3(), 1.0, 2.0, 21).unwrap();
    let mut buf = Vec::new();
    shot.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("r,w,f,R\n"));
    assert_eq!(text.lines().count(), 22);
    assert_eq!(shot.header(&p3()).termination, Termination::ReachedRMax);
}
