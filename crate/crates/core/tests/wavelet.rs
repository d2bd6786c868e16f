use paraproduct_kit::wavelet::{
    cascade_sample, daubechies_lowpass, daubechies_system, haar_system, moment_integral, phi_psi_inner, Cascade,
    FilterBank,
};
use proptest::prelude::*;

fn bank_invariants(b: &FilterBank) -> f64 {
    let h = b.lowpass();
    let g = b.highpass();
    let l = h.len();
    let mut worst = (h.iter().sum::<f64>() - 2f64.sqrt()).abs();
    for m in 0..l / 2 {
        let s: f64 = (0..l - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
        worst = worst.max((s - if m == 0 { 1.0 } else { 0.0 }).abs());
    }
    for k in 0..l {
        let want = if k % 2 == 0 { 1.0 } else { -1.0 } * h[l - 1 - k];
        worst = worst.max((g[k] - want).abs());
    }
    worst
}

#[test]
fn haar_closed_forms() {
    let sys = haar_system();
    assert_eq!(sys.bank().lowpass(), &[std::f64::consts::FRAC_1_SQRT_2; 2]);
    let (phi, psi) = cascade_sample(sys.bank(), 2).unwrap();
    assert!(phi.values().iter().all(|&v| v == 1.0));
    assert_eq!(moment_integral(&psi, 0), 0.0);
    assert!((moment_integral(&psi, 1) + 0.25).abs() <= 1e-12);
}

#[test]
fn db2_matches_closed_form() {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    let want = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
    let h = daubechies_lowpass(2).unwrap();
    for (a, b) in h.iter().zip(want) {
        assert!((a - b).abs() <= 1e-14, "{h:?}");
    }
}

#[test]
fn db_filters_satisfy_bank_invariants() {
    for p in 1..=10 {
        let sys = daubechies_system(p).unwrap();
        assert!(bank_invariants(sys.bank()) <= 1e-12, "db{p}");
        assert_eq!(sys.bank().len(), 2 * p as usize);
        assert_eq!(sys.support_len(), 2 * p as i64 - 1);
    }
}

#[test]
fn vanishing_moments_db1_to_db5() {
    for p in 1..=5 {
        let psi = daubechies_system(p).unwrap().with_cascade_resolution(12).psi_samples().unwrap();
        for l in 0..p {
            let m = moment_integral(&psi, l);
            assert!(m.abs() <= 1e-6, "db{p} l={l}: {m}");
        }
        // the first non-vanishing moment is visibly nonzero
        assert!(moment_integral(&psi, p).abs() > 1e-4, "db{p}");
    }
}

#[test]
fn db2_phi_integral_and_orthogonality() {
    let sys = daubechies_system(2).unwrap();
    let (phi, _) = cascade_sample(sys.bank(), 10).unwrap();
    assert!((phi.integral() - 1.0).abs() <= 1e-8);
    // cell-sum quadrature reaches the 1e-6 band at K = 12
    assert!(phi_psi_inner(&sys, 12).unwrap().abs() <= 1e-6);
}

#[test]
fn samples_stay_in_support() {
    for p in 1..=6 {
        let sys = daubechies_system(p).unwrap();
        let m = sys.support_len() as f64;
        for s in [sys.phi_samples().unwrap(), sys.psi_samples().unwrap()] {
            for (x, v) in s.points() {
                if v != 0.0 {
                    assert!((x[0] - 0.5).abs() < m / 2.0 + 1e-12, "db{p} at {x:?}");
                }
            }
        }
    }
}

#[test]
fn cascade_two_scale_relation() {
    for p in [2, 3, 5] {
        let sys = daubechies_system(p).unwrap();
        let c = Cascade::compute(sys.bank(), 8).unwrap();
        assert!(c.two_scale_residual(sys.bank()) <= 1e-10, "db{p}");
    }
}

#[test]
fn taps_text_round_trip() {
    let b = daubechies_system(4).unwrap().bank().clone();
    let back = FilterBank::from_taps_text(&b.to_taps_text()).unwrap();
    assert_eq!(b, back);
    assert!(FilterBank::from_taps_text("0\n0.5\n0.5\n").is_err());
}

proptest! {
    #[test]
    fn moment_integral_is_linear(p in 1u32..5, l in 0u32..4, c in -5.0f64..5.0) {
        let psi = daubechies_system(p).unwrap().psi_samples().unwrap();
        let a = moment_integral(&psi.scaled(c), l);
        let b = c * moment_integral(&psi, l);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}
