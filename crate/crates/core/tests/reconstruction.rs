use gauge_tomo::fields::Potentials;
use gauge_tomo::numerics::{Axis, Grid};
use gauge_tomo::states::{density_from_wavefunction, gaussian_packet, WaveFunction};
use gauge_tomo::tomography::{
    compute_tomogram, reconstruct_density, reconstruct_wigner_from_probability, reconstruct_wigner_unit_sphere,
    sample_family, sample_unit_sphere_family, GaugeKind, ParameterGrid, TomogramOptions, TomographyParams,
    UnitSphereGrid,
};
use gauge_tomo::wigner::gauge_independent_wigner;
use gauge_tomo::{Error, UnitsContext};

// Density reconstruction: omega = 1 makes a nu step of 0.25 one grid shift at h = 0.25,
// and the mu step repeats the result every 8 pi in q, beyond the 15.75 grid width.
fn units() -> UnitsContext {
    UnitsContext::default()
}

// Wigner reconstruction: omega = 4 stretches the characteristic-function window to |a|, |b| <= 8.
fn wide_units() -> UnitsContext {
    UnitsContext::default().with_omega(4.0)
}

fn state() -> WaveFunction {
    let g = Grid::line(Axis::centered_with_spacing(0.25, 64).unwrap());
    gaussian_packet(&g, &[0.4], &[-0.3], std::f64::consts::FRAC_1_SQRT_2, &units()).unwrap()
}

fn a1d() -> Potentials {
    Potentials::from_fns(1, |q, _| [0.2 * q[0] + 0.05 * q[0] * q[0], 0.0, 0.0], |_, _| 0.0).unwrap()
}

#[test]
fn density_round_trip() {
    let u = units();
    let psi = state();
    let rho = density_from_wavefunction(&psi);
    let opts = TomogramOptions::default();
    let fam = sample_family(&psi, false, None, ParameterGrid::default(), &u, &opts).unwrap();
    assert_eq!(fam.tomograms.len(), 33 * 33);
    let rec = reconstruct_density(&fam, None, psi.grid(), Some(&rho)).unwrap();
    assert!(rec.fidelity.unwrap() >= 0.999, "{:?}", rec.fidelity);
    assert!((rec.trace_before - 1.0).abs() <= 1e-2, "{}", rec.trace_before);
    assert!((rec.density.trace().re - 1.0).abs() < 1e-12);

    // zero potential gives the ordinary reconstruction
    let free = Potentials::free(1).unwrap();
    let fam_g = sample_family(&psi, false, Some(&free), ParameterGrid::default(), &u, &opts).unwrap();
    let rec_g = reconstruct_density(&fam_g, Some(&free), psi.grid(), None).unwrap();
    assert!(rec.density.trace_distance(&rec_g.density).unwrap() <= 1e-6);
}

#[test]
fn gauge_independent_probability_round_trip() {
    let u = units();
    let psi = state();
    let rho = density_from_wavefunction(&psi);
    let a = a1d();
    let fam = sample_family(&psi, true, Some(&a), ParameterGrid::default(), &u, &TomogramOptions::default()).unwrap();
    let rec = reconstruct_density(&fam, Some(&a), psi.grid(), Some(&rho)).unwrap();
    assert!(rec.fidelity.unwrap() >= 0.999, "{:?}", rec.fidelity);
    assert!(reconstruct_density(&fam, None, psi.grid(), None).is_err());
}

#[test]
fn coarse_parameter_grid_is_reported() {
    let u = units();
    let psi = state();
    let rho = density_from_wavefunction(&psi);
    let coarse = ParameterGrid { lambda: 0.5, points: 5 };
    let fam = sample_family(&psi, false, None, coarse, &u, &TomogramOptions::default()).unwrap();
    assert!(matches!(reconstruct_density(&fam, None, psi.grid(), Some(&rho)), Err(Error::LowFidelity { .. })));
}

fn target_window(w: &gauge_tomo::wigner::PhaseSpaceFunction) -> (Grid, Grid, usize, usize) {
    // sub-grids of the forward transform's own nodes, |q|, |p| <= about 4
    let qa = w.q_grid.axis(0);
    let pa = w.p_grid.axis(0);
    let pick = |ax: &Axis, half: f64| {
        let i0 = ax.fractional_index(-half).ceil() as usize;
        let i1 = ax.fractional_index(half).floor() as usize;
        (i0, Axis::new(ax.point(i0), ax.point(i1), i1 - i0 + 1).unwrap())
    };
    let (iq, qax) = pick(qa, 4.0);
    let (ip, pax) = pick(pa, 4.0);
    (Grid::line(qax), Grid::line(pax), iq, ip)
}

#[test]
fn wigner_from_probability_tomograms() {
    let u = wide_units();
    let psi = state();
    let a = a1d();
    let opts = TomogramOptions::default();
    let fam = sample_family(&psi, true, Some(&a), ParameterGrid::default(), &u, &opts).unwrap();
    let w = gauge_independent_wigner(&psi, &a, 0.0, &u).unwrap();
    let (qg, pg, iq, ip) = target_window(&w);
    let rec = reconstruct_wigner_from_probability(&fam, &qg, &pg).unwrap();
    let np = pg.len();
    let mut l1 = 0.0;
    for i in 0..qg.len() {
        for j in 0..np {
            l1 += (rec.values[i * np + j] - w.at(iq + i, ip + j)).abs();
        }
    }
    l1 *= rec.cell_volume();
    assert!(l1 <= 1e-3, "{l1:e}");
    assert!((rec.integral() - 1.0).abs() <= 1e-4, "{}", rec.integral());
    assert!(rec.max_imag < 1e-10);

    let sph = sample_unit_sphere_family(&psi, Some(&a), UnitSphereGrid::default(), &u, &opts).unwrap();
    let rs = reconstruct_wigner_unit_sphere(&sph, &qg, &pg).unwrap();
    let d = rec.l1_distance(&rs).unwrap();
    assert!(d <= 1e-3, "{d:e}");
}

#[test]
fn unit_sphere_section_is_an_optical_section() {
    let u = units();
    let psi = state();
    let a = a1d();
    let x = Grid::line(Axis::symmetric(6.0, 241).unwrap());
    let opts = TomogramOptions::default();
    for xi in [0.3, 1.2, 2.5] {
        let w = compute_tomogram(&psi, &TomographyParams::UnitSphere { xi: vec![xi] }, GaugeKind::GaugeIndependent, Some(&a), Some(&x), &u, &opts)
            .unwrap();
        let theta = std::f64::consts::FRAC_PI_2 - xi;
        let o = compute_tomogram(&psi, &TomographyParams::Optical { theta: vec![theta] }, GaugeKind::GaugeIndependent, Some(&a), Some(&x), &u, &opts)
            .unwrap();
        let d = w.values.iter().zip(&o.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(d <= 1e-12, "{d:e}");
    }
}
