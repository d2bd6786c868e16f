//! The split `Pi_2(a, g) = h1 + c h2 g_R` for an atom `a` on the cube `R`.
//!
//! With `j_R` the scale of `R`, `phi_I` the scaling functions at `j_R` and
//! `b` the part of `g`'s wavelet expansion on cubes inside `2mR`,
//!
//! ```text
//! Pi_2(a, g) = a P_{j_R} g + Pi_2(a, b)
//! h1 = Pi_2(a, b) + sum_I a phi_I (<g, phi_I> - |R|^{1/2} g_R)
//! h2 = (1/c) sum_I a phi_I |R|^{1/2},   c = (2m)^{n(1/2 + 1/p)} |phi|_inf^n
//! ```
//!
//! `c` is the smallest constant of that form that forces
//! `|h2|_2 <= |2mR|^{1/2 - 1/p}` for every atom.

use serde::Serialize;

use super::{pi_on, support_box, Route};
use crate::coeff::CoeffField;
use crate::cube::{DyadicCube, Lambda};
use crate::error::{Error, Result};
use crate::grid::{GridBox, GridFunction};
use crate::mra::{analyze, synthesize_on, tensor_sample};
use crate::wavelet::{WaveletSystem, MAX_RES};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    pub cube: DyadicCube,
    pub p: f64,
    /// Mean of `g` over `R`.
    pub g_mean: f64,
    pub c: f64,
    /// `max |Pi_2(a,g) - h1 - c h2 g_R| / max |Pi_2(a,g)|`.
    pub identity_residual: f64,
    /// Same for `Pi_2(a,g) = a P_{j_R} g + Pi_2(a,b)`.
    pub reduction_residual: f64,
    pub h2_l2: f64,
    /// `|2mR|^{1/2 - 1/p}`.
    pub h2_bound: f64,
    /// Largest `|h2|` outside `2mR`.
    pub h2_outside: f64,
    pub h2_integral: f64,
    /// Wavelet entries of `g` kept in `b`.
    pub b_entries: usize,
    /// Cubes `I` at scale `j_R` with `a phi_I != 0`.
    pub phi_terms: usize,
    /// Of those, cubes not inside `2mR` (expected none).
    pub phi_terms_outside: usize,
    #[serde(skip_serializing)]
    pub pi2: GridFunction,
    #[serde(skip_serializing)]
    pub h1: GridFunction,
    #[serde(skip_serializing)]
    pub h2: GridFunction,
}

impl SplitReport {
    /// `h2` meets the atom size, support and moment conditions on `2mR`.
    pub fn h2_is_atom(&self, tol: f64) -> bool {
        self.h2_l2 <= self.h2_bound * (1.0 + tol)
            && self.h2_outside <= tol * self.h2_bound
            && self.h2_integral.abs() <= tol * self.h2_bound
    }
}

fn inside(cube: &DyadicCube, lo: &[f64], hi: &[f64]) -> bool {
    let c = cube.corner();
    let s = cube.side();
    c.iter().zip(lo).zip(hi).all(|((x, l), h)| *x >= *l && x + s <= *h)
}

fn check_atom(a: &CoeffField, cube: &DyadicCube, p: f64) -> Result<()> {
    if a.dim() != cube.dim() {
        return Err(Error::Precondition("atom and cube differ in dimension".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(crate::error::range_err("p", format!("{p} not in (0, 1]")));
    }
    if a.has_scaling() {
        return Err(Error::Precondition("atom carries scaling coefficients".into()));
    }
    if a.is_empty() {
        return Err(Error::Precondition("atom has no wavelet coefficients".into()));
    }
    if let Some((idx, _)) = a.wavelets().find(|(idx, _)| !cube.contains(&idx.cube)) {
        return Err(Error::Precondition(format!(
            "wavelet cube {:?} at scale {} is not inside R",
            idx.cube.k.as_slice(),
            idx.cube.j
        )));
    }
    let bound = cube.volume().powf(0.5 - 1.0 / p);
    if a.l2_norm() > bound * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "|a|_2 = {} exceeds |R|^(1/2-1/p) = {bound}",
            a.l2_norm()
        )));
    }
    Ok(())
}

/// Build the split for the atom `a` on `R` and the sampled `g`, and check
/// the identity and the atom bounds for `h2`.
pub fn pi2_split_check(a: &CoeffField, cube: &DyadicCube, g: &GridFunction, p: f64, sys: &WaveletSystem) -> Result<SplitReport> {
    check_atom(a, cube, p)?;
    let n = cube.dim();
    let jr = cube.j;
    let k = g.k();
    if g.dim() != n {
        return Err(Error::Precondition("g and the atom differ in dimension".into()));
    }
    if k < a.j_max() || k - jr > MAX_RES as i32 {
        return Err(Error::Precision(format!(
            "g sampled at K = {k} cannot carry scales [{jr}, {})",
            a.j_max()
        )));
    }
    let m = sys.support_len();
    let two_m = 2.0 * m as f64;
    let (lo2, hi2) = cube.dilated_bounds(two_m);
    let (glo, ghi) = (g.grid().lower_corner(), g.grid().upper_corner());
    if (0..n).any(|i| glo[i] > lo2[i] || ghi[i] < hi2[i]) {
        return Err(Error::Precondition("g does not cover 2mR".into()));
    }

    let big = analyze(g, sys, jr, k)?;
    let mut atom = CoeffField::new(n, jr, k);
    for (idx, v) in a.wavelets() {
        atom.add_wavelet(idx.clone(), *v)?;
    }
    let mut b = CoeffField::new(n, jr, k);
    for (idx, v) in big.wavelets() {
        if inside(&idx.cube, &lo2, &hi2) {
            b.add_wavelet(idx.clone(), *v)?;
        }
    }

    let grid = support_box(&atom, sys, k);
    let pi2 = pi_on(2, &atom, &big, sys, &grid, Route::default())?;
    let pi2_b = pi_on(2, &atom, &b, sys, &grid, Route::default())?;
    let a_s = synthesize_on(&atom, sys, &grid)?;

    let r_box = GridBox::from_bounds(
        k,
        &cube.corner(),
        &cube.corner().iter().map(|x| x + cube.side()).collect::<Vec<_>>(),
    )?;
    let g_mean = g.restricted_to(&r_box)?.integral() / cube.volume();
    let root_r = cube.volume().sqrt();

    let mut a_pg = GridFunction::zeros(grid.clone());
    let mut h1 = pi2_b.clone();
    let mut h2 = GridFunction::zeros(grid.clone());
    let (mut phi_terms, mut outside_terms) = (0, 0);
    for (i_cube, gi) in big.scalings() {
        let phi = tensor_sample(sys, i_cube, Lambda(0), k)?.restricted_to(&grid)?;
        let prod = a_s.mul(&phi)?;
        if prod.max_abs() == 0.0 {
            continue;
        }
        phi_terms += 1;
        if !inside(i_cube, &lo2, &hi2) {
            outside_terms += 1;
        }
        a_pg.add_scaled(&prod, *gi)?;
        h1.add_scaled(&prod, gi - root_r * g_mean)?;
        h2.add_scaled(&prod, root_r)?;
    }
    let phi_inf = sys
        .phi_samples()?
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let c = two_m.powf(n as f64 * (0.5 + 1.0 / p)) * phi_inf.powi(n as i32);
    let h2 = h2.scaled(1.0 / c);

    let scale = pi2.max_abs().max(f64::MIN_POSITIVE);
    let mut recon = h1.clone();
    recon.add_scaled(&h2, c * g_mean)?;
    let identity_residual = pi2.max_abs_diff(&recon)? / scale;
    let mut reduced = a_pg;
    reduced.add_scaled(&pi2_b, 1.0)?;
    let reduction_residual = pi2.max_abs_diff(&reduced)? / scale;

    let h2_outside = h2
        .points()
        .filter(|(x, _)| {
            let step = grid.step();
            (0..n).any(|i| x[i] < lo2[i] || x[i] + step > hi2[i])
        })
        .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
    let h2_bound = (two_m.powi(n as i32) * cube.volume()).powf(0.5 - 1.0 / p);

    Ok(SplitReport {
        cube: cube.clone(),
        p,
        g_mean,
        c,
        identity_residual,
        reduction_residual,
        h2_l2: h2.l2_norm(),
        h2_bound,
        h2_outside,
        h2_integral: h2.integral(),
        b_entries: b.len(),
        phi_terms,
        phi_terms_outside: outside_terms,
        pi2,
        h1,
        h2,
    })
}
