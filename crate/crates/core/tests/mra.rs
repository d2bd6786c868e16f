use paraproduct_kit::mra::{scaling_pyramid, Space};
use paraproduct_kit::*;

fn idx(j: i32, k: &[i64], l: u32) -> TensorIndex {
    TensorIndex::new(DyadicCube::new(j, k), Lambda(l))
}

#[test]
fn single_wavelet_analysis_is_a_delta() {
    for sys in [haar_system(), daubechies_system(2).unwrap(), daubechies_system(4).unwrap()] {
        let mut c = CoeffField::new(2, 0, 3);
        c.add_wavelet(idx(2, &[1, -1], 2), 1.0).unwrap();
        let f = synthesize(&c, &sys, 5).unwrap();
        let back = analyze(&f, &sys, 0, 3).unwrap();
        assert!(back.max_abs_diff(&c) < 1e-10, "{} {}", sys.name(), back.max_abs_diff(&c));
    }
}

#[test]
fn scaling_entry_round_trip() {
    let sys = daubechies_system(3).unwrap();
    let mut c = CoeffField::new(1, 1, 4);
    c.add_scaling(DyadicCube::new(1, &[2]), 1.0).unwrap();
    let f = synthesize(&c, &sys, 6).unwrap();
    let back = analyze(&f, &sys, 1, 4).unwrap();
    assert!(back.max_abs_diff(&c) < 1e-10);
}

#[test]
fn analyze_synthesize_identity_on_random_fields() {
    for (name, n) in [("haar", 2), ("db2", 1), ("db3", 2), ("db5", 1)] {
        let sys = wavelet::system_by_name(name).unwrap();
        let f = random_field(3, &FieldSpec::unit(n, -1, 4, 60).with_scaling(4));
        let g = synthesize(&f, &sys, 6).unwrap();
        let back = analyze(&g, &sys, -1, 4).unwrap();
        let err = back.max_abs_diff(&f);
        assert!(err < 1e-10, "{name}: {err}");
    }
}

#[test]
fn synthesize_analyze_identity_on_band_limited_grids() {
    let sys = daubechies_system(2).unwrap();
    let f = random_field(11, &FieldSpec::unit(1, 0, 5, 40).with_scaling(2));
    let g = synthesize(&f, &sys, 8).unwrap();
    let again = synthesize(&analyze(&g, &sys, 0, 5).unwrap(), &sys, 8).unwrap();
    assert!(g.max_abs_diff(&again).unwrap() < 1e-10);
}

#[test]
fn haar_parseval_against_samples() {
    let sys = haar_system();
    let f = random_field(5, &FieldSpec::unit(2, 0, 6, 300).with_scaling(1));
    let g = synthesize(&f, &sys, 8).unwrap();
    let c = analyze(&g, &sys, 0, 6).unwrap();
    let direct = g.l2_norm().powi(2);
    assert!((c.energy() - direct).abs() <= 1e-12 * direct);
}

#[test]
fn telescoping_projection() {
    let sys = daubechies_system(2).unwrap();
    let f = random_field(2, &FieldSpec::unit(1, 0, 4, 30).with_scaling(2));
    for j in 0..4 {
        let pj = project(&f, &sys, j, Space::V).unwrap();
        let qj = project(&f, &sys, j, Space::W).unwrap();
        let sum = CoeffField::new(1, j, j + 1).add(&pj).unwrap().add(&qj).unwrap();
        let lhs = project(&sum, &sys, j + 1, Space::V).unwrap();
        let rhs = project(&f, &sys, j + 1, Space::V).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }
    let pyr = scaling_pyramid(&f, &sys, 4).unwrap();
    assert_eq!(pyr.len(), 5);
}

#[test]
fn projections_of_single_wavelet() {
    let sys = daubechies_system(2).unwrap();
    let mut c = CoeffField::new(1, 0, 3);
    c.add_wavelet(idx(1, &[3], 1), 1.0).unwrap();
    assert_eq!(project(&c, &sys, 1, Space::W).unwrap().max_abs_diff(&c), 0.0);
    assert!(project(&c, &sys, 1, Space::V).unwrap().max_abs() == 0.0);
    assert!(project(&c, &sys, 4, Space::V).is_err());
}

#[test]
fn empty_field_synthesizes_to_zero() {
    let g = synthesize(&CoeffField::new(1, 0, 2), &haar_system(), 4).unwrap();
    assert_eq!(g.max_abs(), 0.0);
}

#[test]
fn geometry_errors() {
    let sys = haar_system();
    let g = GridFunction::zeros(GridBox::unit(1, 4));
    assert!(matches!(analyze(&g, &sys, 3, 2), Err(Error::Geometry(_))));
    assert!(matches!(analyze(&g, &sys, 0, 5), Err(Error::Geometry(_))));
}

#[test]
fn haar_tensor_sample_2d() {
    let sys = haar_system();
    let f = tensor_sample(&sys, &DyadicCube::new(1, &[0, 0]), Lambda(1), 3).unwrap();
    assert!((f.l2_norm() - 1.0).abs() < 1e-14);
    assert_eq!(f.grid().shape(), &[4, 4]);
    assert!((f.at(&[0, 0]) - 2.0).abs() < 1e-14);
    assert!((f.at(&[2, 0]) + 2.0).abs() < 1e-14);
}
