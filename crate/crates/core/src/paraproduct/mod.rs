//! The four paraproducts and the renormalized product.
//!
//! For finite expansions `f`, `g` with wavelet content in `[j0, j1)`,
//!
//! ```text
//! Pi_1(f,g) = sum_j (P_j f)(Q_j g)     Pi_2(f,g) = sum_j (Q_j f)(P_j g)
//! Pi_3(f,g) = sum_j sum_{(I,l) != (I',l')} <f,psi_I^l><g,psi_I'^l'> psi_I^l psi_I'^l'
//! Pi_4(f,g) = sum_j sum_{I,l} <f,psi_I^l><g,psi_I^l> (psi_I^l)^2
//! ```
//!
//! and `fg = (P_j0 f)(P_j0 g) + Pi_1 + Pi_2 + Pi_3 + Pi_4`. The first term
//! (the coarse term) vanishes unless a field carries scaling coefficients and
//! is reported separately.

mod kernel;
mod molecule;
mod split;

use std::collections::HashMap;

use crate::coeff::CoeffField;
use crate::cube::{DyadicCube, Lambda, TensorIndex};
use crate::error::{Error, Result};
use crate::grid::{GridBox, GridFunction};
use crate::mra::{dense_details, scaling_pyramid, synthesize, synthesize_dense, tensor_sample};
use crate::wavelet::{WaveletSystem, MAX_RES};

pub use kernel::{
    kernel_probe, kernel_value, self_similar_probes, KernelProbe, Probe, ProbePoint, RegularityFit,
};
pub use molecule::{
    fit_molecule_constants, molecule_check, molecule_samples, multi_indices, MoleculeConstants,
    MoleculeReport, INTEGRAL_RES,
};
pub use split::{pi2_split_check, SplitReport};

/// How the double sums are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Literal term-by-term sum over overlapping equal-scale pairs.
    TermSum,
    /// Per-scale products of the sampled projections; `Pi_3` is obtained as
    /// `(Q_j f)(Q_j g)` minus the diagonal.
    #[default]
    ScaleProjection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParaproductResult {
    /// `Pi_1 + Pi_2 + Pi_3 + Pi_4`.
    pub value: GridFunction,
    pub components: [GridFunction; 4],
    /// `(P_j0 f)(P_j0 g)`.
    pub coarse: GridFunction,
    /// Number of sampled product terms (pairs, or per-scale products).
    pub term_count: usize,
    /// `max |value + coarse - fg|` on the output grid.
    pub residual: f64,
}

impl ParaproductResult {
    /// `S = Pi_4`.
    pub fn s(&self) -> &GridFunction {
        &self.components[3]
    }

    /// `T = Pi_1 + Pi_2 + Pi_3`.
    pub fn t(&self) -> GridFunction {
        let mut t = self.components[0].clone();
        t.add_scaled(&self.components[1], 1.0).expect("same grid");
        t.add_scaled(&self.components[2], 1.0).expect("same grid");
        t
    }

    /// Component CSVs plus a JSON manifest.
    pub fn export(&self) -> (Vec<(String, String)>, serde_json::Value) {
        let mut files = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            files.push((format!("pi{}.csv", i + 1), c.to_csv()));
        }
        files.push(("coarse.csv".into(), self.coarse.to_csv()));
        let manifest = serde_json::json!({
            "components": ["pi1.csv", "pi2.csv", "pi3.csv", "pi4.csv"],
            "coarse": "coarse.csv",
            "K": self.value.k(),
            "term_count": self.term_count,
            "residuals": {"reconstruction_max_abs": self.residual},
        });
        (files, manifest)
    }
}

fn check_pair(f: &CoeffField, g: &CoeffField, k_out: i32) -> Result<(i32, i32)> {
    if f.dim() != g.dim() {
        return Err(Error::Geometry(format!("dimensions {} and {} differ", f.dim(), g.dim())));
    }
    let j0 = f.j_min().min(g.j_min());
    for c in [f, g] {
        if c.has_scaling() && c.j_min() != j0 {
            return Err(Error::Geometry(format!(
                "scaling part at level {} but the shared coarse level is {j0}",
                c.j_min()
            )));
        }
    }
    let j1 = f.j_max().max(g.j_max());
    if k_out < j1 {
        return Err(Error::Precision(format!("K_out = {k_out} below finest scale bound {j1}")));
    }
    if k_out - j0 > MAX_RES as i32 {
        return Err(Error::Precision(format!(
            "K_out - j0 = {} exceeds the cascade limit {MAX_RES}",
            k_out - j0
        )));
    }
    Ok((j0, j1))
}

fn aligned(c: &CoeffField, j0: i32, j1: i32) -> CoeffField {
    CoeffField::new(c.dim(), j0, j1).add(c).expect("compatible ranges")
}

/// Grid box at `K` covering the support of `c` (empty when `c` is).
pub fn support_box(c: &CoeffField, sys: &WaveletSystem, k: i32) -> GridBox {
    let n = c.dim();
    match c.support_bounds(sys.support_len(), sys.offset()) {
        None => GridBox::new(k, vec![0; n], vec![0; n]),
        Some((lo, hi)) => GridBox::from_bounds(k, &lo, &hi).expect("dyadic support bounds"),
    }
}

/// Intersection of the supports of `f` and `g` at `K` (where `fg` lives).
pub fn product_box(f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, k: i32) -> GridBox {
    let a = support_box(f, sys, k);
    let b = support_box(g, sys, k);
    if a.is_empty() || b.is_empty() {
        return GridBox::new(k, vec![0; f.dim()], vec![0; f.dim()]);
    }
    a.intersect(&b).expect("same resolution")
}

/// `Pi_i(f, g)` sampled at step `2^-K_out` on the product support box.
pub fn pi(i: usize, f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, k_out: i32) -> Result<GridFunction> {
    pi_with(i, f, g, sys, k_out, Route::default())
}

pub fn pi_with(
    i: usize,
    f: &CoeffField,
    g: &CoeffField,
    sys: &WaveletSystem,
    k_out: i32,
    route: Route,
) -> Result<GridFunction> {
    if !(1..=4).contains(&i) {
        return Err(crate::error::range_err("i", format!("{i} not in 1..=4")));
    }
    check_pair(f, g, k_out)?;
    let grid = product_box(f, g, sys, k_out);
    pi_on(i, f, g, sys, &grid, route)
}

/// `Pi_i(f, g)` on a prescribed grid box.
pub fn pi_on(i: usize, f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, grid: &GridBox, route: Route) -> Result<GridFunction> {
    if !(1..=4).contains(&i) {
        return Err(crate::error::range_err("i", format!("{i} not in 1..=4")));
    }
    let mut want = [false; 4];
    want[i - 1] = true;
    let (comps, _, _) = evaluate(f, g, sys, grid, route, want)?;
    Ok(comps.into_iter().nth(i - 1).expect("component"))
}

/// All four paraproducts, `S`, `T`, the coarse term and the reconstruction
/// residual against `synthesize(f) * synthesize(g)`.
pub fn renormalize(f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, k_out: i32) -> Result<ParaproductResult> {
    renormalize_with(f, g, sys, k_out, Route::default())
}

pub fn renormalize_with(
    f: &CoeffField,
    g: &CoeffField,
    sys: &WaveletSystem,
    k_out: i32,
    route: Route,
) -> Result<ParaproductResult> {
    check_pair(f, g, k_out)?;
    let grid = product_box(f, g, sys, k_out);
    let (components, coarse, term_count) = evaluate(f, g, sys, &grid, route, [true; 4])?;
    let mut value = components[0].clone();
    for c in &components[1..] {
        value.add_scaled(c, 1.0)?;
    }
    let fg = direct_product(f, g, sys, &grid)?;
    let mut diff = value.clone();
    diff.add_scaled(&coarse, 1.0)?;
    diff.add_scaled(&fg, -1.0)?;
    Ok(ParaproductResult {
        value,
        components,
        coarse,
        term_count,
        residual: diff.max_abs(),
    })
}

/// The oracle `synthesize(f) * synthesize(g)` on `grid`.
pub fn direct_product(f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, grid: &GridBox) -> Result<GridFunction> {
    let a = synthesize(f, sys, grid.k())?.restricted_to(grid)?;
    let b = synthesize(g, sys, grid.k())?.restricted_to(grid)?;
    a.mul(&b)
}

type Components = ([GridFunction; 4], GridFunction, usize);

fn evaluate(
    f: &CoeffField,
    g: &CoeffField,
    sys: &WaveletSystem,
    grid: &GridBox,
    route: Route,
    want: [bool; 4],
) -> Result<Components> {
    let (j0, j1) = check_pair(f, g, grid.k())?;
    let zero = GridFunction::zeros(grid.clone());
    let mut out = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
    let mut coarse = zero.clone();
    if grid.is_empty() {
        return Ok((out, coarse, 0));
    }
    let fa = aligned(f, j0, j1);
    let ga = aligned(g, j0, j1);
    let pf = scaling_pyramid(&fa, sys, j1)?;
    let pg = scaling_pyramid(&ga, sys, j1)?;
    let k = grid.k();
    let on = |x: GridFunction| x.restricted_to(grid);

    if fa.has_scaling() && ga.has_scaling() {
        let a = on(synthesize_dense(sys, &pf[0], &[], k)?)?;
        let b = on(synthesize_dense(sys, &pg[0], &[], k)?)?;
        coarse = a.mul(&b)?;
    }

    let mut terms = 0usize;
    // Pi_4 is literal in both routes.
    for j in j0..j1 {
        let lvl = (j - j0) as usize;
        let df = dense_details(&fa, j);
        let dg = dense_details(&ga, j);
        let has_f = fa.wavelets_at(j).next().is_some();
        let has_g = ga.wavelets_at(j).next().is_some();
        if !has_f && !has_g {
            continue;
        }

        let mut diag = zero.clone();
        if want[2] || want[3] {
            for (idx, cf) in fa.wavelets_at(j) {
                let cg = ga.wavelet(idx);
                if cg == 0.0 {
                    continue;
                }
                let psi = tensor_sample(sys, &idx.cube, idx.lambda, k)?;
                diag.add_scaled(&psi.map(|v| v * v), cf * cg)?;
                terms += 1;
            }
        }

        match route {
            Route::ScaleProjection => {
                let qf = if has_f { Some(on(synthesize_dense(sys, &empty_like(&pf[lvl]), &df, k)?)?) } else { None };
                let qg = if has_g { Some(on(synthesize_dense(sys, &empty_like(&pg[lvl]), &dg, k)?)?) } else { None };
                if want[0] {
                    if let Some(qg) = &qg {
                        let p = on(synthesize_dense(sys, &pf[lvl], &[], k)?)?;
                        out[0].add_scaled(&p.mul(qg)?, 1.0)?;
                        terms += 1;
                    }
                }
                if want[1] {
                    if let Some(qf) = &qf {
                        let p = on(synthesize_dense(sys, &pg[lvl], &[], k)?)?;
                        out[1].add_scaled(&qf.mul(&p)?, 1.0)?;
                        terms += 1;
                    }
                }
                if want[2] {
                    if let (Some(qf), Some(qg)) = (&qf, &qg) {
                        out[2].add_scaled(&qf.mul(qg)?, 1.0)?;
                        out[2].add_scaled(&diag, -1.0)?;
                        terms += 1;
                    }
                }
            }
            Route::TermSum => {
                let m = sys.support_len();
                let sf = scaling_entries(&pf[lvl]);
                let sg = scaling_entries(&pg[lvl]);
                let wf: Vec<(TensorIndex, f64)> = fa.wavelets_at(j).map(|(i, v)| (i.clone(), *v)).collect();
                let wg: Vec<(TensorIndex, f64)> = ga.wavelets_at(j).map(|(i, v)| (i.clone(), *v)).collect();
                let mut cache: HashMap<TensorIndex, GridFunction> = HashMap::new();
                let mut sample = |cube: &DyadicCube, l: Lambda| -> Result<GridFunction> {
                    let key = TensorIndex::new(cube.clone(), l);
                    if let Some(s) = cache.get(&key) {
                        return Ok(s.clone());
                    }
                    let s = tensor_sample(sys, cube, l, k)?;
                    cache.insert(key, s.clone());
                    Ok(s)
                };
                if want[0] {
                    terms += pair_sum(&sf, &wg, m, &mut out[0], &mut sample, |_, _| true)?;
                }
                if want[1] {
                    terms += pair_sum(&wf, &sg, m, &mut out[1], &mut sample, |_, _| true)?;
                }
                if want[2] {
                    terms += pair_sum(&wf, &wg, m, &mut out[2], &mut sample, |a, b| a != b)?;
                }
            }
        }
        if want[3] {
            out[3].add_scaled(&diag, 1.0)?;
        }
    }
    Ok((out, coarse, terms))
}

fn empty_like(a: &GridFunction) -> GridFunction {
    let n = a.dim();
    GridFunction::zeros(GridBox::new(a.k(), vec![0; n], vec![0; n]))
}

/// Nonzero entries of a dense scaling array as `(I, lambda = 0)` keys.
fn scaling_entries(a: &GridFunction) -> Vec<(TensorIndex, f64)> {
    a.grid()
        .indices()
        .zip(a.values().iter())
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| (TensorIndex::new(DyadicCube::new(a.k(), &k), Lambda(0)), *v))
        .collect()
}

/// `out += sum c_a c_b s_a s_b` over equal-scale pairs with `|k - k'| < m`.
fn pair_sum(
    left: &[(TensorIndex, f64)],
    right: &[(TensorIndex, f64)],
    m: i64,
    out: &mut GridFunction,
    sample: &mut impl FnMut(&DyadicCube, Lambda) -> Result<GridFunction>,
    keep: impl Fn(&TensorIndex, &TensorIndex) -> bool,
) -> Result<usize> {
    let mut buckets: HashMap<&[i64], Vec<usize>> = HashMap::new();
    for (pos, (idx, _)) in right.iter().enumerate() {
        buckets.entry(idx.cube.k.as_slice()).or_default().push(pos);
    }
    let mut count = 0;
    for (a, ca) in left {
        let n = a.cube.dim();
        let sa = sample(&a.cube, a.lambda)?;
        let width = (2 * m - 1) as usize;
        for flat in 0..width.pow(n as u32) {
            let mut rem = flat;
            let shift: Vec<i64> = (0..n)
                .map(|_| {
                    let s = (rem % width) as i64 - (m - 1);
                    rem /= width;
                    s
                })
                .collect();
            let neighbor = a.cube.shifted(&shift);
            let Some(list) = buckets.get(neighbor.k.as_slice()) else {
                continue;
            };
            for &pos in list {
                let (b, cb) = &right[pos];
                if !keep(a, b) {
                    continue;
                }
                let sb = sample(&b.cube, b.lambda)?;
                let overlap = sa.grid().intersect(sb.grid())?;
                if overlap.is_empty() {
                    continue;
                }
                let prod = sa.restricted_to(&overlap)?.mul(&sb.restricted_to(&overlap)?)?;
                out.add_scaled(&prod, ca * cb)?;
                count += 1;
            }
        }
    }
    Ok(count)
}
