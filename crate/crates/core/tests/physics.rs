use jcdyn::linalg::{self, c, CMat};
use jcdyn::liouville::{full_liouvillian_in_frame, no_gain_liouvillian_in_frame};
use jcdyn::spectrum::{
    default_grid, dominant_peaks, find_peaks, resolvent_spectrum, spectral_modes, time_domain_spectrum, uniform_grid,
    TimeDomainOptions,
};
use jcdyn::sweep::params_at;
use jcdyn::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn reference() -> SystemParams {
    SystemParams { g: 0.3, kappa: 0.1, gamma_x: 0.001, p_x: 0.06, p_theta: 0.0, gamma_theta: 0.0, omega_x: 0.0, omega_c: 0.0 }
}

fn at(t: f64) -> SystemParams {
    params_at(&reference(), &ThermalModel::default(), t)
}

fn random_state(space: HilbertSpace, rng: &mut StdRng) -> DensityMatrix {
    let d = space.dim();
    let m = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &m * m.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(space, rho / tr).unwrap()
}

#[test]
fn reference_steady_state_at_20k() {
    let space = HilbertSpace::new(10).unwrap();
    let p = at(20.0);
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let rho = steady_state(&l).unwrap();
    let n = rho.expect(&bare_operators(space).n_phot);
    assert!((n.re - 0.396074702294).abs() < 1e-9, "{n}");

    // relaxation from arbitrary states lands on the same point
    let t = 50.0 / p.kappa.min(p.gamma_x + p.p_x);
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..2 {
        let rho0 = random_state(space, &mut rng);
        let late = evolve(&l, &rho0, t).unwrap();
        assert!(late.trace_distance(&rho) < 1e-6);
    }
}

#[test]
fn evolution_is_a_trace_and_hermiticity_preserving_semigroup() {
    let space = HilbertSpace::new(5).unwrap();
    let p = at(33.0);
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let mut rng = StdRng::seed_from_u64(3);
    let rho0 = random_state(space, &mut rng);
    let (t1, t2) = (3.7, 11.2);
    let direct = evolve(&l, &rho0, t1 + t2).unwrap();
    let stepped = evolve(&l, &evolve(&l, &rho0, t1).unwrap(), t2).unwrap();
    assert!(linalg::max_abs(&(direct.matrix() - stepped.matrix())) < 1e-8);
    for t in [1.0, 100.0, 1e3 / p.kappa] {
        let r = evolve(&l, &rho0, t).unwrap();
        assert!((r.trace() - c(1.0, 0.0)).norm() < 1e-10, "t = {t}");
        assert!(linalg::max_abs(&(r.matrix() - r.matrix().adjoint())) < 1e-10);
    }
}

#[test]
fn no_gain_generator_only_decays() {
    let space = HilbertSpace::new(6).unwrap();
    for t in [10.0, 30.0, 37.43, 45.0] {
        let p = at(t);
        let l = no_gain_liouvillian_in_frame(space, &p, p.omega_c);
        assert!(l.eigenvalues().unwrap().iter().all(|z| z.re <= 1e-12), "T = {t}");
    }
}

#[test]
fn reverse_phonon_channel_is_a_small_perturbation() {
    let space = HilbertSpace::new(5).unwrap();
    let p = at(35.0);
    let q = SystemParams { gamma_theta: 0.01 * p.g, ..p };
    let a = full_liouvillian_in_frame(space, &p, p.omega_c).eigenvalues().unwrap();
    let b = full_liouvillian_in_frame(space, &q, q.omega_c).eigenvalues().unwrap();
    let worst = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    assert!(worst < 0.05 * p.g, "{worst}");
}

#[test]
fn resonant_vacuum_rabi_doublet() {
    let space = HilbertSpace::new(8).unwrap();
    // the doublet formula is the linear-response limit, so the pump is kept weak
    let p = SystemParams { omega_x: 1000.0, omega_c: 1000.0, p_x: 1e-3, ..reference() };
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let rho = steady_state(&l).unwrap();
    let grid = uniform_grid(1000.0, 1.2, 4001);
    let s = resolvent_spectrum(&l, &rho, &grid).unwrap();
    let peaks = dominant_peaks(&s, 1e-3, 2).unwrap();
    assert_eq!(peaks.len(), 2);
    let split = peaks[1].center - peaks[0].center;
    let want = 2.0 * (p.g.powi(2) - ((p.kappa - p.gamma_x) / 4.0).powi(2)).sqrt();
    assert!((split / want - 1.0).abs() < 0.05, "{split} vs {want}");
}

#[test]
fn emission_concentrates_at_the_crossover() {
    let m = ThermalModel::default();
    let r = resonance_temperature(&m).unwrap();
    let space = HilbertSpace::new(10).unwrap();
    let p = at(r.t0);
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let rho = steady_state(&l).unwrap();
    let grid = default_grid(r.omega0, p.g);
    let s = emission_spectrum(&l, &rho, &grid).unwrap().spectrum;
    let top = dominant_peaks(&s, 1e-3, 1).unwrap()[0];
    assert!((top.center - r.omega0).abs() < 0.01, "{} vs {}", top.center, r.omega0);
}

#[test]
fn peaks_sit_on_dominant_modes() {
    let m = ThermalModel::default();
    let r = resonance_temperature(&m).unwrap();
    let space = HilbertSpace::new(8).unwrap();
    let p = at(20.0);
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let rho = steady_state(&l).unwrap();
    let grid = default_grid(r.omega0, p.g);
    let step = grid[1] - grid[0];
    let s = resolvent_spectrum(&l, &rho, &grid).unwrap();
    let mut modes = spectral_modes(&l, &rho).unwrap();
    modes.sort_by(|a, b| b.strength().total_cmp(&a.strength()));
    for peak in dominant_peaks(&s, 1e-3, 2).unwrap() {
        let nearest = modes[..4].iter().map(|md| (md.lambda.im - peak.center).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest <= step, "peak at {} is {nearest} from a dominant mode", peak.center);
    }
}

#[test]
fn spectrum_converged_in_cutoff() {
    let m = ThermalModel::default();
    let r = resonance_temperature(&m).unwrap();
    let p = at(20.0);
    let grid = default_grid(r.omega0, p.g);
    let spec = |n_max| {
        let space = HilbertSpace::new(n_max).unwrap();
        let l = full_liouvillian_in_frame(space, &p, p.omega_c);
        let rho = steady_state(&l).unwrap();
        resolvent_spectrum(&l, &rho, &grid).unwrap()
    };
    let dev = spec(8).max_relative_deviation(&spec(10));
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn spectral_routes_agree_at_20k() {
    let m = ThermalModel::default();
    let r = resonance_temperature(&m).unwrap();
    let space = HilbertSpace::new(8).unwrap();
    let p = at(20.0);
    let l = full_liouvillian_in_frame(space, &p, p.omega_c);
    let rho = steady_state(&l).unwrap();
    let grid = default_grid(r.omega0, p.g);
    let a = resolvent_spectrum(&l, &rho, &grid).unwrap();
    let b = time_domain_spectrum(&l, &rho, &grid, &TimeDomainOptions::default()).unwrap();
    let dev = a.max_relative_deviation(&b);
    assert!(dev < 1e-3, "{dev}");
    assert!(find_peaks(&a, 1e-3).unwrap().len() >= 2);
}
