use paraproduct_kit::cube::Lambda;
use paraproduct_kit::numeric::loglog_fit;
use paraproduct_kit::rng::Lcg64;
use paraproduct_kit::spaces::*;
use paraproduct_kit::*;
use proptest::prelude::*;

fn single(n: usize, j: i32, k: &[i64], lambda: u32, v: f64) -> CoeffField {
    let mut c = CoeffField::new(n, j.min(0), j + 1);
    c.add_wavelet(TensorIndex::new(DyadicCube::new(j, k), Lambda(lambda)), v)
        .unwrap();
    c
}

fn indicator(n: usize, k: i32) -> GridFunction {
    GridFunction::from_fn(GridBox::unit(n, k), |_| 1.0)
}

#[test]
fn lp_norm_of_indicator() {
    assert!((lp_norm(&indicator(1, 8), 1.0, None).unwrap() - 1.0).abs() < 1e-14);
    let w = Weight::new(1, 0.95);
    let got = lp_norm(&indicator(1, 12), 0.95, Some(&w)).unwrap();
    let exact = ((2f64.powf(0.95) - 1.0) / 0.95).powf(1.0 / 0.95);
    assert!(got > 0.0 && got < 1.0);
    assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
}

#[test]
fn lp_norm_rejects_nonpositive_p() {
    assert!(lp_norm(&indicator(1, 4), 0.0, None).is_err());
}

#[test]
fn hardy_norm_single_entry() {
    for (j, p) in [(0, 0.95), (3, 0.9), (-2, 0.6)] {
        let c = single(1, j, &[1], 1, 1.0);
        let want = pow(2f64, -j).powf(1.0 / p - 0.5);
        let got = sequence_hardy_norm(&c, p, None).unwrap();
        assert!((got - want).abs() < 1e-10 * want, "{got} {want}");
    }
    let c = single(2, 2, &[1, 3], 3, -0.5);
    let want = 0.5 * pow(2f64, -4).powf(1.0 / 0.8 - 0.5);
    assert!((sequence_hardy_norm(&c, 0.8, None).unwrap() - want).abs() < 1e-12);
}

fn pow(b: f64, e: i32) -> f64 {
    b.powi(e)
}

#[test]
fn hardy_norm_disjoint_entries() {
    let (a, b, p) = (0.7, -1.3, 0.9);
    let mut c = CoeffField::new(1, 0, 4);
    c.add_wavelet(TensorIndex::new(DyadicCube::new(3, &[1]), Lambda(1)), a).unwrap();
    c.add_wavelet(TensorIndex::new(DyadicCube::new(3, &[5]), Lambda(1)), b).unwrap();
    let vol: f64 = 0.125;
    let want = ((a.abs().powf(p) + b.abs().powf(p)) * vol.powf(1.0 - p / 2.0)).powf(1.0 / p);
    assert!((sequence_hardy_norm(&c, p, None).unwrap() - want).abs() < 1e-12);
}

#[test]
fn hardy_norm_matches_grid_square_function() {
    for seed in 0..20 {
        let n = 1 + (seed % 2) as usize;
        let f = random_field(seed, &FieldSpec::unit(n, 0, 5, 60));
        let tree = sequence_hardy_norm(&f, 0.9, None).unwrap();
        let s = square_function_on(&f, &GridBox::unit(n, 5)).unwrap();
        let brute = lp_norm(&s, 0.9, None).unwrap();
        assert!((tree - brute).abs() < 1e-10 * brute, "seed {seed}: {tree} {brute}");
    }
}

#[test]
fn weighted_hardy_norm_matches_fine_grid() {
    let w = Weight::new(1, 0.9);
    let mut spec = FieldSpec::unit(1, 0, 4, 40);
    spec.box_lo = vec![-3.0];
    spec.box_hi = vec![5.0];
    let f = random_field(3, &spec);
    let tree = sequence_hardy_norm(&f, 0.9, Some(&w)).unwrap();
    let grid = GridBox::from_bounds(12, &[-3.0], &[5.0]).unwrap();
    let brute = lp_norm(&square_function_on(&f, &grid).unwrap(), 0.9, Some(&w)).unwrap();
    assert!((tree - brute).abs() < 1e-6 * brute, "{tree} {brute}");
    assert!(tree < sequence_hardy_norm(&f, 0.9, None).unwrap());
}

/// Sup over every ancestor-or-self of an active cube, summing directly.
fn carleson_brute(c: &CoeffField, alpha: f64) -> f64 {
    let n = c.dim() as f64;
    let top = c.wavelets().map(|(i, _)| i.cube.j).min().unwrap_or(0);
    let mut best = 0.0f64;
    for (idx, _) in c.wavelets() {
        for j in top..=idx.cube.j {
            let q = idx.cube.ancestor(j);
            let e: f64 = c
                .wavelets()
                .filter(|(i, _)| q.contains(&i.cube))
                .map(|(_, v)| v * v)
                .sum();
            best = best.max((q.volume().powf(-(2.0 * alpha / n + 1.0)) * e).sqrt());
        }
    }
    best
}

#[test]
fn carleson_closed_forms() {
    assert_eq!(carleson_norm(&CoeffField::new(1, 0, 3), 0.3), 0.0);
    let c = single(2, 3, &[2, 5], 2, -0.4);
    let want = 0.4 * pow(2f64, -6).powf(-0.3 / 2.0 - 0.5);
    assert!((carleson_norm(&c, 0.3) - want).abs() < 1e-10 * want);
}

#[test]
fn carleson_matches_brute_force() {
    for seed in 0..20 {
        let n = 1 + (seed % 2) as usize;
        let f = random_field(100 + seed, &FieldSpec::unit(n, 0, 5, 50));
        for alpha in [0.0, 0.05, 0.5] {
            let a = carleson_norm(&f, alpha);
            let b = carleson_brute(&f, alpha);
            assert!((a - b).abs() < 1e-12 * b, "seed {seed} alpha {alpha}: {a} {b}");
        }
    }
}

#[test]
fn lipschitz_closed_forms() {
    let id = GridFunction::from_fn(GridBox::unit(1, 8), |x| x[0]);
    assert!((lipschitz_norm(&id, 1.0, true).unwrap() - 1.0).abs() < 1e-12);
    let c = GridFunction::from_fn(GridBox::unit(2, 4), |_| -2.5);
    assert_eq!(lipschitz_norm(&c, 0.5, true).unwrap(), 0.0);
    assert_eq!(lipschitz_norm(&c, 0.5, false).unwrap(), 2.5);
    for alpha in [0.3, 0.7] {
        let f = GridFunction::from_fn(GridBox::unit(1, 10), |x| (x[0] - 0.5).abs().powf(alpha));
        assert!((lipschitz_norm(&f, alpha, true).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bmo_closed_forms() {
    let c = GridFunction::from_fn(GridBox::unit(1, 6), |_| 3.0);
    assert_eq!(bmo_alpha_norm(&c, 0.4, 1.0).unwrap(), 0.0);
    let id = GridFunction::from_fn(GridBox::unit(1, 8), |x| x[0]);
    assert!((bmo_alpha_norm(&id, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-12);
}

/// Compactly supported Holder-`alpha` function with grid-aligned cusps.
fn cusp_family(seed: u64, k: i32, alpha: f64) -> GridFunction {
    let mut r = Lcg64::new(seed);
    let terms: Vec<(f64, f64)> = (0..3)
        .map(|_| (r.uniform_in(-1.0, 1.0), (64 + r.below(128)) as f64 / 256.0))
        .collect();
    GridFunction::from_fn(GridBox::unit(1, k), |x| {
        let t = (x[0] - 0.5) / 0.4;
        let bump = if t.abs() < 1.0 { (1.0 - t * t).powi(2) } else { 0.0 };
        bump * terms.iter().map(|(a, c)| a * (x[0] - c).abs().powf(alpha)).sum::<f64>()
    })
}

#[test]
fn lipschitz_equivalences_small_family() {
    let sys = daubechies_system(2).unwrap();
    let alpha = 0.25;
    let mut carl = Vec::new();
    let mut bmo = Vec::new();
    for seed in 0..20 {
        let f = cusp_family(seed, 10, alpha);
        let lip = lipschitz_norm(&f, alpha, true).unwrap();
        carl.push(carleson_norm(&analyze(&f, &sys, 0, 10).unwrap(), alpha) / lip);
        bmo.push(bmo_alpha_norm(&f, alpha, 1.0).unwrap() / lip);
    }
    for r in [carl, bmo] {
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 10.0, "{lo} {hi}");
    }
}

#[test]
fn maximal_of_zero_is_zero() {
    let z = GridFunction::zeros(GridBox::unit(1, 5));
    assert_eq!(grand_maximal_norm(&z, 0.9, None, 8).unwrap(), 0.0);
    let e = CoeffField::new(2, 0, 3);
    assert_eq!(grand_maximal_norm_coeff(&e, &haar_system(), 5, 0.9, None, 4).unwrap(), 0.0);
}

#[test]
fn maximal_far_field_decay_of_atom() {
    let f = synthesize(&single(1, 0, &[0], 1, 1.0), &haar_system(), 6).unwrap();
    let fs = grand_maximal_function(&f, 0.95, &MaximalOptions::new(8).with_pad(2048)).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (x, v) in fs.points() {
        let r = (x[0] - 0.5).abs();
        if (4.0..16.0).contains(&r) {
            xs.push(r);
            ys.push(v);
        }
    }
    let (slope, _) = loglog_fit(&xs, &ys).unwrap();
    assert!(slope <= -2.0 + 0.3, "slope {slope}");
}

#[test]
fn maximal_dominates_pointwise_average() {
    // the widest-unit Gaussian profile at the finest t already sees f
    let f = GridFunction::from_fn(GridBox::unit(1, 6), |x| (6.0 * x[0]).sin());
    let fs = grand_maximal_function(&f, 0.9, &MaximalOptions::new(1)).unwrap();
    assert!(fs.max_abs() > 0.0);
    assert!(grand_maximal_norm(&f, 0.9, None, 1).unwrap() > 0.0);
}

fn haar_atom(seed: u64) -> (Atom, CoeffField) {
    let mut r = Lcg64::new(seed);
    let j = r.below(3) as i32;
    let k = r.below(1 << j) as i64;
    let cube = DyadicCube::new(j, &[k]);
    let mut c = CoeffField::new(1, 0, 6);
    for _ in 0..5 {
        let jj = j + r.below(3) as i32;
        let kk = (k << (jj - j)) + r.below(1 << (jj - j)) as i64;
        c.add_wavelet(TensorIndex::new(DyadicCube::new(jj, &[kk]), Lambda(1)), r.uniform_in(-1.0, 1.0))
            .unwrap();
    }
    (Atom::new(c.clone(), cube, 0.95), c)
}

#[test]
fn atom_verify_haar_wavelet() {
    let sys = haar_system();
    let atom = Atom::new(single(1, 0, &[0], 1, 1.0), DyadicCube::new(0, &[0]), 0.95);
    assert_eq!(atom.moment_order, 0);
    let rep = atom_verify(&atom, &sys, &VerifyOptions::default()).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!((rep.l2 - 1.0).abs() < 1e-12);
    let twice = Atom::new(atom.coeffs.scaled(2.0), atom.cube.clone(), 0.95);
    let rep = atom_verify(&twice, &sys, &VerifyOptions::default()).unwrap();
    assert!(!rep.l2_ok && rep.support_ok && rep.moments_ok);
}

#[test]
fn atom_verify_db2_support() {
    let sys = daubechies_system(2).unwrap();
    let atom = Atom::new(single(1, 2, &[1], 1, 0.125), DyadicCube::new(2, &[1]), 0.95);
    let tight = atom_verify(&atom, &sys, &VerifyOptions::default().with_tol(1e-3)).unwrap();
    assert!(!tight.support_ok);
    let m = sys.support_len() as f64;
    let wide = atom_verify(&atom, &sys, &VerifyOptions::default().with_tol(1e-3).dilated(m)).unwrap();
    assert!(wide.support_ok && wide.moments_ok, "{wide:?}");
}

#[test]
fn atom_verify_general_haar_atoms() {
    let sys = haar_system();
    for seed in 0..10 {
        let (a, c) = haar_atom(seed);
        let scale = a.l2_bound() / c.l2_norm();
        let atom = Atom::new(c.scaled(scale), a.cube.clone(), 0.95);
        let rep = atom_verify(&atom, &sys, &VerifyOptions::default()).unwrap();
        assert!(rep.passed(), "seed {seed}: {rep:?}");
    }
}

#[test]
fn decomposition_of_single_entry() {
    let f = single(1, 3, &[5], 1, -0.6);
    let d = finite_atomic_decompose(&f, 0.9).unwrap();
    assert_eq!(d.terms.len(), 1);
    let (mu, atom) = &d.terms[0];
    let want = 0.125f64.powf(1.0 / 0.9 - 0.5) * 0.6;
    assert!((mu - want).abs() < 1e-12);
    assert_eq!(atom.cube, DyadicCube::new(3, &[5]));
    assert!((d.ratio - 1.0).abs() < 1e-12);
}

#[test]
fn decomposition_rejects_scaling_part() {
    let f = random_field(1, &FieldSpec::unit(1, 0, 3, 5).with_scaling(1));
    assert!(matches!(finite_atomic_decompose(&f, 0.9), Err(Error::Precondition(_))));
    assert!(finite_atomic_decompose(&CoeffField::new(1, 0, 2), 1.5).is_err());
}

#[test]
fn decomposition_atoms_verify_and_ratio_is_stable() {
    let sys = haar_system();
    let mut ratios = Vec::new();
    for seed in 0..30 {
        let n = 1 + (seed % 2) as usize;
        let f = random_field(seed, &FieldSpec::unit(n, 0, 4, 40));
        let d = finite_atomic_decompose(&f, 0.95).unwrap();
        assert!(d.reconstruct(&f).unwrap().max_abs_diff(&f) <= 1e-12 * f.max_abs());
        for (_, atom) in &d.terms {
            let rep = atom_verify(atom, &sys, &VerifyOptions::default().with_tol(1e-9)).unwrap();
            assert!(rep.passed(), "seed {seed}: {rep:?}");
        }
        ratios.push(d.ratio);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo >= 1.0 - 1e-12 && hi / lo < 4.0, "{lo} {hi}");
}

#[test]
fn atoms_jsonl_lines() {
    let f = random_field(4, &FieldSpec::unit(1, 0, 4, 10));
    let d = finite_atomic_decompose(&f, 0.9).unwrap();
    let text = atoms_to_jsonl(&d);
    assert_eq!(text.lines().count(), d.terms.len());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["mu"].as_f64().unwrap() > 0.0);
        assert!(!v["entries"].as_array().unwrap().is_empty());
    }
}

#[test]
fn norm_report_shape() {
    let r = NormReport::new("carleson", 1.5, serde_json::json!({"alpha": 0.1}))
        .with_tolerances(serde_json::json!({"abs": 1e-10}));
    let v = serde_json::to_value(&r).unwrap();
    for key in ["norm", "value", "params", "tolerances"] {
        assert!(v.get(key).is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hardy_norm_is_homogeneous(seed in 0u64..1000, c in -5.0f64..5.0, p in 0.6f64..1.0) {
        let f = random_field(seed, &FieldSpec::unit(1, 0, 5, 30));
        let a = sequence_hardy_norm(&f.scaled(c), p, None).unwrap();
        let b = c.abs() * sequence_hardy_norm(&f, p, None).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn lp_norm_is_homogeneous(seed in 0u64..1000, c in -5.0f64..5.0) {
        let mut r = Lcg64::new(seed);
        let vals: Vec<f64> = (0..64).map(|_| r.uniform_in(-1.0, 1.0)).collect();
        let f = GridFunction::from_values(GridBox::unit(1, 6), ndarray::ArrayD::from_shape_vec(vec![64], vals).unwrap()).unwrap();
        let w = Weight::new(1, 0.9);
        let a = lp_norm(&f.scaled(c), 0.9, Some(&w)).unwrap();
        let b = c.abs() * lp_norm(&f, 0.9, Some(&w)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn decomposition_reconstructs(seed in 0u64..1000, entries in 1usize..120) {
        let f = random_field(seed, &FieldSpec::unit(1, 0, 6, entries));
        let d = finite_atomic_decompose(&f, 0.95).unwrap();
        prop_assert!(d.reconstruct(&f).unwrap().max_abs_diff(&f) <= 1e-12);
    }

    #[test]
    fn maximal_norm_monotone_in_dictionary(seed in 0u64..1000) {
        let f = synthesize(&random_field(seed, &FieldSpec::unit(1, 0, 3, 6)), &haar_system(), 5).unwrap();
        let mut prev = 0.0;
        for size in [1, 4, 9, 18] {
            let v = grand_maximal_norm(&f, 0.9, None, size).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn weight_bounds(x in -50.0f64..50.0, y in -50.0f64..50.0, p in 0.67f64..0.99) {
        let w = Weight::new(2, p);
        let v = w.eval(&[x, y]);
        prop_assert!(v > 0.0 && v <= 1.0);
        if x != 0.0 || y != 0.0 {
            prop_assert!(Weight::with_gamma(2, 2.0 * (1.0 - p) + 0.1).eval(&[x, y]) < v);
        }
    }
}
