use std::f64::consts::PI;

use paraproduct_kit::divcurl::*;
use paraproduct_kit::rng::Lcg64;
use paraproduct_kit::*;
use proptest::prelude::*;

fn torus(n: usize, k: i32, f: impl Fn(&[f64]) -> f64) -> GridFunction {
    GridFunction::from_fn(GridBox::unit(n, k), f)
}

#[test]
fn hilbert_of_cosine() {
    let c = torus(1, 8, |x| (2.0 * PI * x[0]).cos());
    let s = torus(1, 8, |x| (2.0 * PI * x[0]).sin());
    assert!(riesz_apply(0, &c).unwrap().max_abs_diff(&s).unwrap() < 1e-10);
}

#[test]
fn single_mode_multiplier() {
    // cos(2 pi (3x + 4y)) -> (k_i/|k|) sin(2 pi (3x + 4y))
    let f = torus(2, 5, |x| (2.0 * PI * (3.0 * x[0] + 4.0 * x[1])).cos());
    for (i, ki) in [(0, 3.0), (1, 4.0)] {
        let want = torus(2, 5, |x| ki / 5.0 * (2.0 * PI * (3.0 * x[0] + 4.0 * x[1])).sin());
        assert!(riesz_apply(i, &f).unwrap().max_abs_diff(&want).unwrap() < 1e-10);
    }
}

#[test]
fn riesz_squares_sum_to_minus_identity() {
    for n in [1, 2, 3] {
        let k = if n == 3 { 4 } else { 6 };
        let f = band_limited(n as u64, n, k, 3);
        let mut acc = GridFunction::zeros(f.grid().clone());
        for i in 0..n {
            acc.add_scaled(&riesz_apply(i, &riesz_apply(i, &f).unwrap()).unwrap(), 1.0).unwrap();
        }
        acc.add_scaled(&f, 1.0).unwrap();
        assert!(acc.max_abs() < 1e-10 * f.max_abs(), "n = {n}: {}", acc.max_abs());
    }
}

#[test]
fn riesz_pairs_commute() {
    let f = band_limited(11, 2, 6, 4);
    let a = riesz_apply(0, &riesz_apply(1, &f).unwrap()).unwrap();
    let b = riesz_apply(1, &riesz_apply(0, &f).unwrap()).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn non_torus_inputs_are_rejected() {
    let g = GridFunction::zeros(GridBox::new(4, vec![-3], vec![16]));
    assert!(matches!(riesz_apply(0, &g), Err(Error::Domain(_))));
    let offset = torus(1, 4, |x| 1.0 + x[0]);
    assert!(matches!(curl_free_field(&offset), Err(Error::Domain(_))));
    assert!(riesz_apply(2, &torus(2, 3, |_| 0.0)).is_err());
}

#[test]
fn curl_free_single_mode() {
    let f = torus(2, 6, |x| (2.0 * PI * (2.0 * x[0] - x[1])).sin());
    let field = curl_free_field(&f).unwrap();
    assert_eq!(field.kind, FieldKind::CurlFree);
    assert!(curl_residual(&field).unwrap() < 1e-14);
    let d12 = spectral_derivative(0, &field.components[1]).unwrap();
    let d21 = spectral_derivative(1, &field.components[0]).unwrap();
    assert!(d12.max_abs_diff(&d21).unwrap() < 1e-10);
    assert!(riesz_roundtrip_residual(&field).unwrap() < 1e-10);
}

#[test]
fn curl_free_random_band_limited() {
    for seed in 0..5 {
        let f = band_limited(seed, 2, 6, 6);
        let field = curl_free_field(&f).unwrap();
        let back = riesz_divergence(&field).unwrap().scaled(-1.0);
        assert!(back.max_abs_diff(&f).unwrap() < 1e-10 * f.max_abs());
        assert!(curl_residual(&field).unwrap() < 1e-10);
    }
}

#[test]
fn div_free_fields() {
    let u = torus(2, 6, |x| (2.0 * PI * (x[0] + 3.0 * x[1])).cos());
    let g = div_free_field(&u).unwrap();
    assert_eq!(g.kind, FieldKind::DivFree);
    assert!(div_residual(&g).unwrap() < 1e-14);
    assert!(riesz_divergence_residual(&g).unwrap() < 1e-10);
    let z = div_free_field(&torus(2, 5, |_| 0.0)).unwrap();
    assert_eq!(z.l2_norm(), 0.0);
    assert!(matches!(div_free_field(&torus(3, 3, |_| 0.0)), Err(Error::Capability(_))));
    // analytic derivative of the stream function
    let want = torus(2, 6, |x| -6.0 * PI * (2.0 * PI * (x[0] + 3.0 * x[1])).sin());
    assert!(g.components[0].max_abs_diff(&want).unwrap() < 1e-9);
}

#[test]
fn helmholtz_parts() {
    let n = 2;
    let comps: Vec<GridFunction> = (0..n).map(|i| band_limited(40 + i as u64, n, 6, 5)).collect();
    let v = VectorField::new(comps, FieldKind::General).unwrap();
    let (cf, df) = helmholtz_project(&v).unwrap();
    let mut inner = 0.0;
    for i in 0..n {
        let sum = cf.components[i].add(&df.components[i]).unwrap();
        assert!(sum.max_abs_diff(&v.components[i]).unwrap() < 1e-13);
        inner += cf.components[i].mul(&df.components[i]).unwrap().integral();
    }
    assert!(inner.abs() <= 1e-10 * v.l2_norm().powi(2));
    assert!(curl_residual(&cf).unwrap() < 1e-10);
    assert!(div_residual(&df).unwrap() < 1e-10);

    // idempotence on pure parts
    let (c2, d2) = helmholtz_project(&cf).unwrap();
    assert!(d2.l2_norm() < 1e-12 * cf.l2_norm());
    assert!(c2.components[0].max_abs_diff(&cf.components[0]).unwrap() < 1e-12);
    let (c3, _) = helmholtz_project(&df).unwrap();
    assert!(c3.l2_norm() < 1e-12 * df.l2_norm());
}

#[test]
fn helmholtz_three_dimensions() {
    let comps: Vec<GridFunction> = (0..3).map(|i| band_limited(70 + i, 3, 4, 2)).collect();
    let v = VectorField::new(comps, FieldKind::General).unwrap();
    let (_, df) = helmholtz_project(&v).unwrap();
    assert!(div_residual(&df).unwrap() < 1e-10);
    assert!(riesz_divergence_residual(&df).unwrap() < 1e-10);
}

fn p_delta_direct(j: i32, k: &[i64], j2: i32, k2: &[i64], delta: f64) -> f64 {
    let n = k.len() as f64;
    let l = 0.5f64.powi(j);
    let l2 = 0.5f64.powi(j2);
    let mut d2 = 0.0;
    for a in 0..k.len() {
        let c = (k[a] as f64 + 0.5) * l - (k2[a] as f64 + 0.5) * l2;
        d2 += c * c;
    }
    let ratio = (l + l2) / (l + l2 + d2.sqrt());
    2f64.powf(-((j - j2).abs() as f64) * (delta + n / 2.0)) * ratio.powf(n + delta)
}

#[test]
fn almost_diagonal_weight_values() {
    let i = DyadicCube::new(3, &[2, -1]);
    assert_eq!(almost_diag_weight(&i, &i, 0.3).unwrap(), 1.0);
    // child sharing the corner, n = 1, delta = 1/2
    let a = DyadicCube::new(2, &[1]);
    let b = DyadicCube::new(3, &[2]);
    let dist: f64 = 0.375 - 0.3125;
    let want = 0.5 * ((0.25 + 0.125) / (0.25 + 0.125 + dist)).powf(1.5);
    assert!((almost_diag_weight(&a, &b, 0.5).unwrap() - want).abs() < 1e-15);
    // far apart at one scale
    let c = DyadicCube::new(4, &[0]);
    let d = DyadicCube::new(4, &[4000]);
    let v = almost_diag_weight(&c, &d, 0.25).unwrap();
    let approx = (2.0 * 0.0625f64 / 250.0).powf(1.25);
    assert!((v / approx - 1.0).abs() < 1e-3);
    assert!(almost_diag_weight(&c, &d, 0.0).is_err());
    assert!(almost_diag_weight(&c, &d, 0.6).is_err());
}

#[test]
fn almost_diagonal_weight_matches_direct_formula() {
    let mut r = Lcg64::new(2024);
    for _ in 0..1000 {
        let n = 1 + r.below(3) as usize;
        let j = r.range_i64(-3, 8) as i32;
        let j2 = r.range_i64(-3, 8) as i32;
        let k: Vec<i64> = (0..n).map(|_| r.range_i64(-20, 20)).collect();
        let k2: Vec<i64> = (0..n).map(|_| r.range_i64(-20, 20)).collect();
        let delta = 0.5 * (1.0 - r.uniform());
        let got = almost_diag_weight(&DyadicCube::new(j, &k), &DyadicCube::new(j2, &k2), delta).unwrap();
        let want = p_delta_direct(j, &k, j2, &k2, delta);
        assert!(got > 0.0 && got <= 1.0);
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{got} {want}");
    }
}

/// Max over coarse `I` (scale <= 3) of `sum_I' p_delta(I, I') (|I'|/|I|)^{1/2}`
/// over all cubes of `[0,1)` at scales `0..depth`.
fn schur_row_max(depth: i32, delta: f64) -> f64 {
    let cubes: Vec<DyadicCube> = (0..depth)
        .flat_map(|j| (0..(1i64 << j)).map(move |k| DyadicCube::new(j, &[k])))
        .collect();
    let mut worst = 0.0f64;
    for a in cubes.iter().filter(|c| c.j <= 3) {
        let s: f64 = cubes
            .iter()
            .map(|b| almost_diag_weight(a, b, delta).unwrap() * (b.volume() / a.volume()).sqrt())
            .sum();
        worst = worst.max(s);
    }
    worst
}

#[test]
fn almost_diagonal_rows_are_summable() {
    for delta in [0.25, 0.5] {
        let s: Vec<f64> = (7..12).map(|d| schur_row_max(d, delta)).collect();
        // increments shrink at least like 2^-delta, so the sums converge
        for w in s.windows(3) {
            let q = (w[2] - w[1]) / (w[1] - w[0]);
            assert!(q > 0.0 && q < (-delta).exp2() + 0.02, "delta {delta}: {s:?}");
        }
    }
}

#[test]
fn experiment_report_fields() {
    let sys = haar_system();
    let (f, g) = random_divcurl_pair(3, 6, 0.95, &sys).unwrap();
    let r = divcurl_experiment(&f, &g, 0.95, &sys).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["p", "alpha", "K", "norms", "ratio", "residuals"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["FG_weighted_Hp", "A_H1", "B_Hp_w"] {
        assert!(v["norms"][key].as_f64().unwrap() > 0.0);
    }
    assert!((r.f_norm - 1.0).abs() < 1e-12 && (r.g_norm - 1.0).abs() < 1e-12);
    assert!(r.residuals.curl < 1e-8 && r.residuals.div < 1e-8 && r.residuals.riesz_divergence < 1e-8);
    assert!(r.a_integral.abs() < 1e-6, "{}", r.a_integral);
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
}

#[test]
fn experiment_with_zero_f() {
    let sys = haar_system();
    let (f, g) = random_divcurl_pair(5, 5, 0.95, &sys).unwrap();
    let r = divcurl_experiment(&f.scaled(0.0), &g, 0.95, &sys).unwrap();
    assert_eq!(r.norms.fg_weighted_hp, 0.0);
    assert_eq!(r.norms.a_h1, 0.0);
    assert_eq!(r.norms.b_hp_w, 0.0);
    assert_eq!(r.ratio, 0.0);
}

#[test]
fn experiment_with_constant_g_uses_augmented_norm() {
    let sys = haar_system();
    let (f, _) = random_divcurl_pair(6, 5, 0.95, &sys).unwrap();
    let g = VectorField::new(vec![torus(2, 5, |_| 1.0), torus(2, 5, |_| -2.0)], FieldKind::DivFree).unwrap();
    let r = divcurl_experiment(&f, &g, 0.95, &sys).unwrap();
    assert!(r.g_norm_augmented);
    assert!((r.g_norm - 5f64.sqrt()).abs() < 1e-12);
    assert!(r.ratio.is_finite());
}

#[test]
fn experiment_preconditions() {
    let sys = haar_system();
    let (f, g) = random_divcurl_pair(7, 5, 0.95, &sys).unwrap();
    assert!(matches!(divcurl_experiment(&g, &f, 0.95, &sys), Err(Error::Precondition(_))));
    assert!(matches!(divcurl_experiment(&f, &g, 0.5, &sys), Err(Error::Range { .. })));
    let mut bent = f.clone();
    bent.components[0] = band_limited(9, 2, 5, 2);
    assert!(matches!(divcurl_experiment(&bent, &g, 0.95, &sys), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn riesz_is_linear(seed in 0u64..500, a in -3.0f64..3.0) {
        let f = band_limited(seed, 2, 5, 3);
        let g = band_limited(seed + 1, 2, 5, 3);
        let lhs = riesz_apply(1, &f.scaled(a).add(&g).unwrap()).unwrap();
        let rhs = riesz_apply(1, &f).unwrap().scaled(a).add(&riesz_apply(1, &g).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-11);
    }

    #[test]
    fn weight_is_symmetric(j in -2i32..6, j2 in -2i32..6, k in -9i64..9, k2 in -9i64..9, delta in 0.01f64..0.5) {
        let a = DyadicCube::new(j, &[k, k2]);
        let b = DyadicCube::new(j2, &[k2, k]);
        let x = almost_diag_weight(&a, &b, delta).unwrap();
        prop_assert!((x - almost_diag_weight(&b, &a, delta).unwrap()).abs() < 1e-15);
        prop_assert!(x > 0.0 && x <= 1.0);
    }
}
