use gauge_tomo::fields::{
    field_strengths, gauge_transform_potentials, FieldSpec, GaugeFunction, GaugeSpec, MagneticGauge, PolyTerm,
    Potentials, TimeProfile,
};
use gauge_tomo::numerics::Grid;
use gauge_tomo::{Error, UnitsContext};

fn units() -> UnitsContext {
    UnitsContext::default()
}

fn test_gauges(dim: usize) -> Vec<GaugeFunction> {
    let a: Vec<f64> = (0..dim).map(|s| 0.5 + s as f64).collect();
    let prof = TimeProfile { amplitude: 0.8, frequency: 1.7, rate: 0.1 };
    [
        GaugeSpec::Constant { value: 2.0 },
        GaugeSpec::Linear { a: a.clone() },
        GaugeSpec::Quadratic { b: 0.3 },
        GaugeSpec::TimeOnly { profile: prof },
        GaugeSpec::Separable { a, profile: prof },
    ]
    .iter()
    .map(|s| GaugeFunction::from_spec(dim, s).unwrap())
    .collect()
}

#[test]
fn identity_and_simple_gauges_act_as_expected() {
    let u = units();
    let p = Potentials::constant_b(2, 1.0, MagneticGauge::Symmetric).unwrap();
    let q = [0.3, -0.7];
    let same = gauge_transform_potentials(&p, &GaugeFunction::zero(2), &u).unwrap();
    assert_eq!(same.vector_potential(&q, 0.4), p.vector_potential(&q, 0.4));
    assert_eq!(same.scalar_potential(&q, 0.4), p.scalar_potential(&q, 0.4));
    let lin = gauge_transform_potentials(&p, &GaugeFunction::linear(&[0.5, 2.0]), &u).unwrap();
    let (a0, a1) = (p.vector_potential(&q, 0.0), lin.vector_potential(&q, 0.0));
    assert!((a1[0] - a0[0] - 0.5).abs() < 1e-15 && (a1[1] - a0[1] - 2.0).abs() < 1e-15);
    assert_eq!(lin.scalar_potential(&q, 0.0), p.scalar_potential(&q, 0.0));
    let prof = TimeProfile { amplitude: 1.0, frequency: 2.0, rate: 0.0 };
    let f = GaugeFunction::from_spec(2, &GaugeSpec::TimeOnly { profile: prof }).unwrap();
    let c = UnitsContext::new(1.0, 1.0, 1.0, 1.0, 3.0).unwrap();
    let tp = gauge_transform_potentials(&p, &f, &c).unwrap();
    let t = 0.3;
    assert_eq!(tp.vector_potential(&q, t), p.vector_potential(&q, t));
    assert!((tp.scalar_potential(&q, t) - (p.scalar_potential(&q, t) - 2.0 * (2.0 * t).cos() / 3.0)).abs() < 1e-15);
}

#[test]
fn uniform_field_and_symmetric_gauge_strengths() {
    let u = units();
    let p = Potentials::uniform_e(&[0.7]).unwrap();
    let f = field_strengths(&p, &[1.2], 0.0, &u).unwrap();
    assert!((f.e[0] - 0.7).abs() < 1e-12 && f.b.is_empty());
    let b0 = 1.7;
    let p = Potentials::constant_b(2, b0, MagneticGauge::Symmetric).unwrap();
    let f = field_strengths(&p, &[0.4, -2.0], 0.0, &u).unwrap();
    assert!((f.b[0] - b0).abs() < 1e-8);
    let p = Potentials::constant_b(2, b0, MagneticGauge::Landau).unwrap();
    assert!((field_strengths(&p, &[3.0, 1.0], 0.0, &u).unwrap().b[0] - b0).abs() < 1e-8);
}

#[test]
fn analytic_library_matches_hand_coded_strengths() {
    let u = UnitsContext::new(1.0, 2.0, 1.0, 0.5, 1.0).unwrap();
    let p = Potentials::harmonic(2, 1.5, &u).unwrap();
    let q = [0.8, -0.4];
    let f = field_strengths(&p, &q, 0.0, &u).unwrap();
    // e phi = m w^2 q^2 / 2  =>  E = -m w^2 q / e
    for s in 0..2 {
        assert!((f.e[s] + 2.0 * 2.25 * q[s] / 0.5).abs() < 1e-8);
    }
    assert!(f.b[0].abs() < 1e-8);
    let aff = p.affine.unwrap();
    let e = aff.electric(&q);
    assert!((e[0] - f.e[0]).abs() < 1e-8);
}

#[test]
fn strengths_are_gauge_invariant_on_grid() {
    let u = units();
    let grid = Grid::uniform(2, 5.0, 16).unwrap();
    let base = Potentials::polynomial(
        2,
        &[
            vec![PolyTerm { coeff: -0.5, powers: vec![0, 1] }, PolyTerm { coeff: 0.1, powers: vec![2, 1] }],
            vec![PolyTerm { coeff: 0.5, powers: vec![1, 0] }],
        ],
        &[PolyTerm { coeff: 0.3, powers: vec![2, 0] }, PolyTerm { coeff: 0.2, powers: vec![1, 1] }],
    )
    .unwrap();
    for chi in test_gauges(2) {
        chi.check_consistency(&grid, 0.7).unwrap();
        let pc = gauge_transform_potentials(&base, &chi, &u).unwrap();
        for t in [0.0, 0.7] {
            for q in grid.points() {
                let (f0, f1) = (field_strengths(&base, &q, t, &u).unwrap(), field_strengths(&pc, &q, t, &u).unwrap());
                for s in 0..2 {
                    assert!((f0.e[s] - f1.e[s]).abs() <= 1e-6, "{:?}", chi.spec);
                }
                assert!((f0.b[0] - f1.b[0]).abs() <= 1e-6, "{:?}", chi.spec);
            }
        }
    }
}

#[test]
fn quadratic_gauge_leaves_strengths_unchanged() {
    let u = units();
    let p = Potentials::constant_b(2, 0.9, MagneticGauge::Symmetric).unwrap();
    let pc = gauge_transform_potentials(&p, &GaugeFunction::quadratic(2, 0.5), &u).unwrap();
    let q = [1.1, 2.3];
    let (a, b) = (field_strengths(&p, &q, 0.0, &u).unwrap(), field_strengths(&pc, &q, 0.0, &u).unwrap());
    assert!((a.b[0] - b.b[0]).abs() <= 1e-7);
    assert!((a.e[0] - b.e[0]).abs() <= 1e-7);
}

#[test]
fn outside_domain_rejected() {
    let u = units();
    let grid = Grid::uniform(1, 2.0, 16).unwrap();
    let p = Potentials::uniform_e(&[1.0]).unwrap().with_grid_domain(&grid).unwrap();
    assert!(matches!(field_strengths(&p, &[3.0], 0.0, &u), Err(Error::OutsideDomain(_))));
    assert!(matches!(field_strengths(&p, &[2.0], 0.0, &u), Err(Error::OutsideDomain(_))));
}

#[test]
fn inconsistent_gauge_function_detected() {
    let grid = Grid::uniform(1, 2.0, 16).unwrap();
    let bad = GaugeFunction::from_fns(1, |q, _| q[0] * q[0], |_, _| [1.0, 0.0, 0.0], |_, _| 0.0).unwrap();
    assert!(bad.check_consistency(&grid, 0.0).is_err());
    let cubic = GaugeFunction::from_spec(1, &GaugeSpec::Cubic { k: 0.2 }).unwrap();
    cubic.check_consistency(&grid, 0.0).unwrap();
}

#[test]
fn field_specs_round_trip_through_json() {
    let s = r#"{"type":"constant_B","B0":1.5,"gauge":"landau"}"#;
    let spec: FieldSpec = serde_json::from_str(s).unwrap();
    let p = spec.build(2, &units()).unwrap();
    assert!((field_strengths(&p, &[0.0, 0.0], 0.0, &units()).unwrap().b[0] - 1.5).abs() < 1e-8);
    let back = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<FieldSpec>(&back).unwrap(), spec);
}
