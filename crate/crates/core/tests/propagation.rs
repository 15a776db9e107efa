use gauge_tomo::evolution::{energy, schrodinger_propagate, schrodinger_trajectory, PropagatorConfig};
use gauge_tomo::fields::{gauge_transform_potentials, GaugeFunction, GaugeSpec, MagneticGauge, Potentials, TimeProfile};
use gauge_tomo::numerics::{Axis, Grid};
use gauge_tomo::states::{gauge_phase_transform, gaussian_packet};
use gauge_tomo::tomography::{compute_tomogram, GaugeKind, TomogramOptions, TomographyParams};
use gauge_tomo::{Error, UnitsContext};

fn line(half: f64, n: usize) -> Grid {
    Grid::line(Axis::symmetric(half, n).unwrap())
}

#[test]
fn norm_is_conserved_over_a_hundred_steps() {
    let u = UnitsContext::default();
    let g = line(8.0, 128);
    let psi = gaussian_packet(&g, &[0.5], &[1.0], 1.0, &u).unwrap();
    let pot = Potentials::harmonic(1, 1.0, &u).unwrap();
    let out = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(1e-3, 100), &u).unwrap();
    assert!((out.norm_sq() - 1.0).abs() <= 1e-8, "norm {}", out.norm_sq());
    assert!((out.time - 0.1).abs() < 1e-12);
}

#[test]
fn dense_and_sparse_solves_agree() {
    let u = UnitsContext::default();
    let g = line(8.0, 96);
    let psi = gaussian_packet(&g, &[0.5], &[1.0], 1.0, &u).unwrap();
    let pot = Potentials::harmonic(1, 1.0, &u).unwrap();
    let cfg = PropagatorConfig::new(2e-3, 50);
    let a = schrodinger_propagate(&psi, &pot, &cfg, &u).unwrap();
    let b = schrodinger_propagate(&psi, &pot, &PropagatorConfig { sparse: false, ..cfg }, &u).unwrap();
    assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-12);
}

#[test]
fn free_gaussian_spreads_by_the_dispersion_law() {
    let u = UnitsContext::default();
    let g = line(12.0, 128);
    let sigma = 1.0;
    let psi = gaussian_packet(&g, &[0.0], &[0.5], sigma, &u).unwrap();
    let pot = Potentials::free(1).unwrap();
    let out = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(2.5e-3, 400), &u).unwrap();
    let t = out.time;
    let expect = sigma * sigma + (u.hbar * t / (2.0 * u.m * sigma)).powi(2);
    let got = out.position_variance()[0];
    assert!((got / expect - 1.0).abs() <= 1e-3, "width^2 {got} vs {expect}");
    assert!((out.mean_position()[0] - 0.5 * t).abs() < 1e-4);
}

#[test]
fn cyclotron_orbit_has_the_right_period() {
    let u = UnitsContext::default();
    let g = Grid::uniform(2, 8.0, 64).unwrap();
    let b0 = 1.0;
    let pot = Potentials::constant_b(2, b0, MagneticGauge::Symmetric).unwrap();
    // kinetic momentum (0, -2) at (2, 0): a clockwise circle of radius 2 about the
    // origin; unit width keeps the packet coherent
    let psi = gaussian_packet(&g, &[2.0, 0.0], &[0.0, -1.0], 1.0, &u).unwrap();
    let dt = 1.8e-3;
    let traj = schrodinger_trajectory(&psi, &pot, &PropagatorConfig::new(dt, 1750), 50, &u).unwrap();
    let mut unwrapped = Vec::new();
    let mut prev = 0.0f64;
    for s in &traj {
        let q = s.mean_position();
        let mut a = q[1].atan2(q[0]);
        while a - prev > std::f64::consts::PI {
            a -= 2.0 * std::f64::consts::PI;
        }
        while a - prev < -std::f64::consts::PI {
            a += 2.0 * std::f64::consts::PI;
        }
        prev = a;
        unwrapped.push((s.time, a));
        let r = (q[0] * q[0] + q[1] * q[1]).sqrt();
        assert!((r - 2.0).abs() < 1e-2, "radius {r} at t = {}", s.time);
    }
    let n = unwrapped.len() as f64;
    let (mt, ma) = unwrapped.iter().fold((0.0, 0.0), |(a, b), (t, x)| (a + t / n, b + x / n));
    let sxy: f64 = unwrapped.iter().map(|(t, a)| (t - mt) * (a - ma)).sum();
    let sxx: f64 = unwrapped.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    let omega = -sxy / sxx;
    let period = 2.0 * std::f64::consts::PI / omega;
    let expect = 2.0 * std::f64::consts::PI * u.m * u.c / (u.e * b0);
    assert!((period / expect - 1.0).abs() <= 1e-2, "period {period} vs {expect}");
}

#[test]
fn propagation_commutes_with_gauge_transformations() {
    let u = UnitsContext::default();
    let g = line(8.0, 128);
    let psi = gaussian_packet(&g, &[0.5], &[0.3], 1.0, &u).unwrap();
    let pot = Potentials::harmonic(1, 1.0, &u).unwrap();
    let chis = [
        GaugeFunction::quadratic(1, 0.1),
        GaugeFunction::from_spec(
            1,
            &GaugeSpec::Separable { a: vec![0.7], profile: TimeProfile { amplitude: 1.0, frequency: 3.0, rate: 0.2 } },
        )
        .unwrap(),
    ];
    let cfg = PropagatorConfig::new(1e-3, 300);
    let direct = schrodinger_propagate(&psi, &pot, &cfg, &u).unwrap();
    for chi in &chis {
        let a = gauge_phase_transform(&direct, chi, direct.time, &u).unwrap();
        let pot_c = gauge_transform_potentials(&pot, chi, &u).unwrap();
        let psi_c = gauge_phase_transform(&psi, chi, psi.time, &u).unwrap();
        let b = schrodinger_propagate(&psi_c, &pot_c, &cfg, &u).unwrap();
        let f = a.fidelity(&b).unwrap();
        assert!(f >= 1.0 - 1e-6, "fidelity {f}");
    }
}

#[test]
fn probability_tomograms_agree_in_two_gauges_along_a_trajectory() {
    let u = UnitsContext::default();
    let g = line(8.0, 128);
    let psi = gaussian_packet(&g, &[0.5], &[0.3], 1.0, &u).unwrap();
    let pot = Potentials::harmonic(1, 1.0, &u).unwrap();
    let chi = GaugeFunction::from_spec(
        1,
        &GaugeSpec::Separable { a: vec![0.5], profile: TimeProfile { amplitude: 0.0, frequency: 0.0, rate: 1.0 } },
    )
    .unwrap();
    let pot_c = gauge_transform_potentials(&pot, &chi, &u).unwrap();
    let psi_c = gauge_phase_transform(&psi, &chi, 0.0, &u).unwrap();
    let cfg = PropagatorConfig::new(1e-3, 200);
    let ta = schrodinger_trajectory(&psi, &pot, &cfg, 100, &u).unwrap();
    let tb = schrodinger_trajectory(&psi_c, &pot_c, &cfg, 100, &u).unwrap();
    let params = TomographyParams::Probability { mu: vec![1.0], nu: vec![1.0] };
    let opts = TomogramOptions::default();
    for (a, b) in ta.iter().zip(&tb) {
        let ma = compute_tomogram(a, &params, GaugeKind::GaugeIndependent, Some(&pot), None, &u, &opts).unwrap();
        let mb = compute_tomogram(b, &params, GaugeKind::GaugeIndependent, Some(&pot_c), None, &u, &opts).unwrap();
        let d = ma.l1_distance(&mb).unwrap();
        assert!(d <= 1e-6, "L1 {d} at t = {}", a.time);
    }
}

#[test]
fn energy_is_conserved_for_static_fields() {
    let u = UnitsContext::default();
    let g = line(8.0, 128);
    let psi = gaussian_packet(&g, &[1.0], &[-0.5], 0.8, &u).unwrap();
    let pot = Potentials::anharmonic(1, 1.0, 0.05, &u).unwrap();
    let e0 = energy(&psi, &pot, &u).unwrap();
    let out = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(8e-4, 1000), &u).unwrap();
    let e1 = energy(&out, &pot, &u).unwrap();
    assert!((e1 - e0).abs() <= 1e-6 * e0.abs().max(1.0), "{e0} -> {e1}");
}

#[test]
fn configurations_outside_the_budget_are_rejected() {
    let u = UnitsContext::default();
    let g = line(8.0, 128);
    let psi = gaussian_packet(&g, &[0.0], &[0.0], 1.0, &u).unwrap();
    let pot = Potentials::free(1).unwrap();
    let r = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(0.1, 10), &u);
    assert!(matches!(r, Err(Error::InvalidArgument(_))), "{r:?}");
    let r = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(1e-3, 0), &u);
    assert!(r.is_err());
}

#[test]
fn leakage_to_the_boundary_aborts() {
    let u = UnitsContext::default();
    let g = line(6.0, 96);
    let psi = gaussian_packet(&g, &[0.0], &[3.0], 0.5, &u).unwrap();
    let pot = Potentials::free(1).unwrap();
    let r = schrodinger_propagate(&psi, &pot, &PropagatorConfig::new(1.5e-3, 3000), &u);
    match r {
        Err(Error::BoundaryLeakage { edge_probability, time }) => {
            assert!(edge_probability > 1e-6 && time > 0.5 && time < 4.0, "{edge_probability} at {time}");
        }
        other => panic!("expected leakage, got {other:?}"),
    }
}
