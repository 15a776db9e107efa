use gauge_tomo::fields::{gauge_transform_potentials, GaugeFunction, GaugeSpec, Potentials, TimeProfile};
use gauge_tomo::numerics::{Axis, Grid};
use gauge_tomo::states::{
    density_from_wavefunction, gauge_phase_transform, gaussian_packet, oscillator_state, sample_ensemble_from_wigner,
    DensityMatrix,
};
use gauge_tomo::wigner::{gauge_independent_wigner, inverse_wigner, wigner_transform, MomentumKind};
use gauge_tomo::UnitsContext;
use num_complex::Complex64;

fn grid128() -> Grid {
    Grid::uniform(1, 12.0, 128).unwrap()
}

fn units() -> UnitsContext {
    UnitsContext::default()
}

#[test]
fn gaussian_packet_moments() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.7], &[-0.4], 1.1, &u).unwrap();
    assert!((psi.norm_sq() - 1.0).abs() < 1e-10);
    assert!((psi.mean_position()[0] - 0.7).abs() < 1e-9);
    assert!((psi.mean_momentum(&u)[0] + 0.4).abs() < 1e-8);
    // finite-difference expectation as an independent oracle
    let h = psi.grid().axis(0).spacing();
    let v = psi.values();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 1..v.len() - 1 {
        acc += v[i].conj() * (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    let p_fd = (acc * Complex64::new(0.0, -u.hbar) * h).re;
    assert!((p_fd + 0.4).abs() < 1e-2);
    assert!(gaussian_packet(&grid128(), &[10.0], &[0.0], 1.0, &u).is_err());
}

#[test]
fn gauge_phase_properties() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.0], &[0.3], 1.0, &u).unwrap();
    let chi = GaugeFunction::quadratic(1, 0.2);
    let pc = gauge_phase_transform(&psi, &chi, 0.0, &u).unwrap();
    for (a, b) in psi.values().iter().zip(pc.values()) {
        assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-15);
    }
    let rho = density_from_wavefunction(&psi);
    let rc = gauge_phase_transform(&rho, &GaugeFunction::from_spec(1, &GaugeSpec::Constant { value: 1.3 }).unwrap(), 0.0, &u).unwrap();
    assert!((&rc.rho - &rho.rho).iter().all(|v| v.norm() < 1e-15));
    // linear chi shifts the canonical momentum by e a / c
    let lin = gauge_phase_transform(&psi, &GaugeFunction::linear(&[0.6]), 0.0, &u).unwrap();
    assert!((lin.mean_momentum(&u)[0] - psi.mean_momentum(&u)[0] - 0.6).abs() < 1e-7);
    // density commutes with the gauge action, and the group property holds
    let a = density_from_wavefunction(&pc);
    let b = gauge_phase_transform(&rho, &chi, 0.0, &u).unwrap();
    assert!((&a.rho - &b.rho).iter().all(|v| v.norm() < 1e-14));
    let chi2 = GaugeFunction::linear(&[0.4]);
    let two = gauge_phase_transform(&pc, &chi2, 0.0, &u).unwrap();
    let one = gauge_phase_transform(&psi, &chi.sum(&chi2).unwrap(), 0.0, &u).unwrap();
    for (x, y) in two.values().iter().zip(one.values()) {
        assert!((x - y).norm() < 1e-14);
    }
}

#[test]
fn density_matrix_invariants_and_spectrum_under_gauge() {
    let u = units();
    let g = Grid::uniform(1, 8.0, 48).unwrap();
    let a = gaussian_packet(&g, &[-1.0], &[0.5], 0.9, &u).unwrap();
    let b = gaussian_packet(&g, &[1.5], &[-0.2], 0.8, &u).unwrap();
    let rho = DensityMatrix::mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
    let checked = DensityMatrix::new(rho.grid.clone(), rho.rho.clone(), 0.0).unwrap();
    assert!((checked.trace().re - 1.0).abs() < 1e-10);
    let pure = density_from_wavefunction(&a);
    assert!((pure.purity() - 1.0).abs() < 1e-8);
    for (d, v) in pure.diagonal().iter().zip(a.values()) {
        assert!((d - v.norm_sqr()).abs() < 1e-12);
    }
    let rc = gauge_phase_transform(&rho, &GaugeFunction::quadratic(1, 0.3), 0.0, &u).unwrap();
    let (e0, e1) = (rho.eigenvalues(), rc.eigenvalues());
    for (x, y) in e0.iter().zip(&e1) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!(rc.hermiticity_error() < 1e-12);
    assert!((rc.trace().re - 1.0).abs() < 1e-10);
}

#[test]
fn wigner_normalization_marginal_and_ground_state_peak() {
    let u = units();
    let psi = oscillator_state(&grid128(), 0, &u).unwrap();
    let w = wigner_transform(&psi, &u).unwrap();
    assert_eq!(w.momentum_kind, MomentumKind::Generalized);
    assert!((w.integral() - 1.0).abs() < 1e-6);
    assert!(w.max_imag < 1e-10);
    let marg = w.position_marginal();
    for (i, v) in psi.values().iter().enumerate() {
        assert!((marg[2 * i] - v.norm_sqr()).abs() < 1e-8);
    }
    // oracle: direct trapezoid of the defining chord integral at (0, 0)
    let f = |x: f64| (-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25);
    let n = 4001;
    let du = 40.0 / (n - 1) as f64;
    let oracle: f64 = (0..n).map(|k| -20.0 + k as f64 * du).map(|uu| f(-uu / 2.0) * f(uu / 2.0) * du).sum::<f64>()
        / (2.0 * std::f64::consts::PI);
    let iq = w.q_grid.axis(0).fractional_index(0.0).round() as usize;
    let ip = w.p_grid.axis(0).fractional_index(0.0).round() as usize;
    let w00 = w.at(iq, ip);
    assert!((w00 - oracle).abs() / oracle < 1e-4);
    assert!((w00 * std::f64::consts::PI - 1.0).abs() < 1e-4);
}

#[test]
fn first_excited_state_is_negative_at_origin() {
    let u = units();
    let psi = oscillator_state(&grid128(), 1, &u).unwrap();
    let w = wigner_transform(&psi, &u).unwrap();
    let iq = w.q_grid.axis(0).fractional_index(0.0).round() as usize;
    let ip = w.p_grid.axis(0).fractional_index(0.0).round() as usize;
    assert!((w.at(iq, ip) * std::f64::consts::PI + 1.0).abs() < 1e-3);
}

fn a1d() -> Potentials {
    Potentials::from_fns(1, |q, _| [0.3 * q[0] * q[0] + 0.2, 0.0, 0.0], |_, _| 0.0).unwrap()
}

#[test]
fn gauge_independent_wigner_is_gauge_invariant() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.3], &[0.5], 1.0, &u).unwrap();
    let a = a1d();
    let w0 = gauge_independent_wigner(&psi, &a, 0.0, &u).unwrap();
    assert_eq!(w0.momentum_kind, MomentumKind::Kinetic);
    let prof = TimeProfile { amplitude: 0.5, frequency: 1.0, rate: 0.0 };
    for (spec, tol) in [
        (GaugeSpec::Linear { a: vec![1.0] }, 1e-8),
        (GaugeSpec::Quadratic { b: 0.1 }, 1e-6),
        (GaugeSpec::TimeOnly { profile: prof }, 1e-8),
    ] {
        let chi = GaugeFunction::from_spec(1, &spec).unwrap();
        let pc = gauge_phase_transform(&psi, &chi, 0.0, &u).unwrap();
        let ac = gauge_transform_potentials(&a, &chi, &u).unwrap();
        let w1 = gauge_independent_wigner(&pc, &ac, 0.0, &u).unwrap();
        let d = w0.max_abs_difference(&w1).unwrap();
        assert!(d <= tol, "{spec:?}: {d:e}");
    }
    let marg = w0.position_marginal();
    for (i, v) in psi.values().iter().enumerate() {
        assert!((marg[2 * i] - v.norm_sqr()).abs() < 1e-8);
    }
}

#[test]
fn zero_potential_reduces_to_standard_wigner() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.3], &[0.5], 1.0, &u).unwrap();
    let w = wigner_transform(&psi, &u).unwrap();
    let wg = gauge_independent_wigner(&psi, &Potentials::free(1).unwrap(), 0.0, &u).unwrap();
    let d = w.values.iter().zip(&wg.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-12);
    assert!(w.check_compatible(&wg).is_err());
}

#[test]
fn standard_wigner_is_not_gauge_invariant() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.3], &[0.5], 1.0, &u).unwrap();
    let pc = gauge_phase_transform(&psi, &GaugeFunction::quadratic(1, 3.0), 0.0, &u).unwrap();
    let (w0, w1) = (wigner_transform(&psi, &u).unwrap(), wigner_transform(&pc, &u).unwrap());
    assert!(w0.max_abs_difference(&w1).unwrap() > 0.1);
}

#[test]
fn inverse_round_trips() {
    let u = units();
    let psi = gaussian_packet(&grid128(), &[0.3], &[0.5], 1.0, &u).unwrap();
    let rho = density_from_wavefunction(&psi);
    let back = inverse_wigner(&wigner_transform(&psi, &u).unwrap(), None, 0.0).unwrap();
    assert!((back.trace().re - 1.0).abs() < 1e-8);
    assert!(rho.overlap(&back).unwrap() >= 1.0 - 1e-8);
    let a = a1d();
    let back = inverse_wigner(&gauge_independent_wigner(&rho, &a, 0.0, &u).unwrap(), Some(&a), 0.0).unwrap();
    let d = (&back.rho - &rho.rho).iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(d < 1e-7, "{d:e}");
}

#[test]
fn ensemble_sampling_is_seeded_and_centred() {
    let u = units();
    let g = Grid::line(Axis::new(-8.0, 8.0, 64).unwrap());
    let psi = gaussian_packet(&g, &[0.5], &[-0.3], 1.0, &u).unwrap();
    let w = wigner_transform(&psi, &u).unwrap();
    let n = 20000;
    let e1 = sample_ensemble_from_wigner(&w, n, 7).unwrap();
    let e2 = sample_ensemble_from_wigner(&w, n, 7).unwrap();
    assert_eq!(e1, e2);
    assert!((e1.total_weight() - 1.0).abs() < 1e-12);
    let (q, p) = e1.mean();
    assert!((q[0] - 0.5).abs() < 3.0 * 1.0 / (n as f64).sqrt());
    assert!((p[0] + 0.3).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    let excited = oscillator_state(&g, 1, &u).unwrap();
    assert!(sample_ensemble_from_wigner(&wigner_transform(&excited, &u).unwrap(), 10, 1).is_err());
}
