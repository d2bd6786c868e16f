//! A reproducible lower-bound estimator of the grand maximal function.
//!
//! The supremum over the unit ball of `S_m` is replaced by a finite
//! dictionary of profiles `phi(x) = prod_a x_a^{d_a} exp(-c |x|^2) / N`,
//! each normalized so that
//! `sup_{x, |beta| <= m+1} (1 + |x|)^{(m+2)(n+1)} |d^beta phi(x)| = 1`
//! (measured on a fine sample lattice). Dilations run over dyadic
//! `t >= 2 * 2^-K` up to the size of the padded box; the cone
//! `|y - x| < t` is replaced by the inscribed cube.

use std::collections::VecDeque;

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;

use super::{lp_norm, moment_order, Weight};
use crate::coeff::CoeffField;
use crate::error::{range_err, Result};
use crate::fft::{fft_nd, frequency};
use crate::grid::GridFunction;
use crate::mra::synthesize;
use crate::numeric::pow2;
use crate::wavelet::WaveletSystem;

const WIDTHS: [f64; 6] = [1.0, 0.5, 2.0, 0.25, 4.0, 0.125];
const MAX_DEGREE: u32 = 2;
const LATTICE_STEP: f64 = 1.0 / 16.0;
const LATTICE_EXTENT: f64 = 14.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    /// `c` in `exp(-c |x|^2)`.
    pub width: f64,
    pub degrees: Vec<u32>,
    /// Normalizing constant `N`.
    pub norm: f64,
}

/// `x^d exp(-c x^2)` and its derivatives as `P(x) exp(-c x^2)`.
fn factor_polys(width: f64, degree: u32, orders: u32) -> Vec<Vec<f64>> {
    let mut p = vec![0.0; degree as usize + 1];
    p[degree as usize] = 1.0;
    let mut out = vec![p.clone()];
    for _ in 0..orders {
        // (P e)' = (P' - 2 c x P) e
        let mut q = vec![0.0; p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            if i > 0 {
                q[i - 1] += i as f64 * c;
            }
            q[i + 1] -= 2.0 * width * c;
        }
        out.push(q.clone());
        p = q;
    }
    out
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl Profile {
    fn raw_factor(&self, axis: usize, x: f64) -> f64 {
        x.powi(self.degrees[axis] as i32) * (-self.width * x * x).exp()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|a| self.raw_factor(a, x[a])).product::<f64>() / self.norm
    }

    /// One-dimensional factor along `axis`, including the share of `1/N`.
    fn factor(&self, axis: usize, x: f64) -> f64 {
        self.raw_factor(axis, x) / self.norm.powf(1.0 / self.degrees.len() as f64)
    }

    fn build(n: usize, width: f64, degrees: Vec<u32>, m: u32) -> Profile {
        let orders = m + 1;
        let decay = ((m + 2) * (n as u32 + 1)) as i32;
        let count = (2.0 * LATTICE_EXTENT / LATTICE_STEP) as usize + 1;
        let xs: Vec<f64> = (0..count).map(|i| -LATTICE_EXTENT + i as f64 * LATTICE_STEP).collect();
        // tables[a][order][i]
        let tables: Vec<Vec<Vec<f64>>> = degrees
            .iter()
            .map(|&d| {
                factor_polys(width, d, orders)
                    .iter()
                    .map(|p| xs.iter().map(|&x| poly_eval(p, x) * (-width * x * x).exp()).collect())
                    .collect()
            })
            .collect();
        let mut best = 0.0f64;
        let total = count.pow(n as u32);
        for beta in multi_indices_upto(n, orders) {
            for code in 0..total {
                let mut rem = code;
                let mut r2 = 0.0;
                let mut v = 1.0;
                for a in 0..n {
                    let i = rem % count;
                    rem /= count;
                    r2 += xs[i] * xs[i];
                    v *= tables[a][beta[a] as usize][i];
                }
                best = best.max((1.0 + r2.sqrt()).powi(decay) * v.abs());
            }
        }
        Profile {
            width,
            degrees,
            norm: best,
        }
    }
}

fn multi_indices_upto(n: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &out {
            let used: u32 = v.iter().sum();
            for d in 0..=(order - used) {
                let mut w = v.clone();
                w.push(d);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// The first `size` profiles in the fixed order (total degree, width,
/// degree tuple), normalized for `S_m`. Larger sizes extend smaller ones.
pub fn dictionary(n: usize, m: u32, size: usize) -> Vec<Profile> {
    let mut specs = Vec::new();
    for total in 0..=MAX_DEGREE {
        let mut tuples: Vec<Vec<u32>> = multi_indices_upto(n, total)
            .into_iter()
            .filter(|t| t.iter().sum::<u32>() == total)
            .collect();
        tuples.sort_by(|a, b| b.cmp(a));
        for &w in &WIDTHS {
            for t in &tuples {
                specs.push((w, t.clone()));
            }
        }
    }
    specs
        .into_iter()
        .take(size)
        .map(|(w, t)| Profile::build(n, w, t, m))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalOptions {
    pub dictionary_size: usize,
    /// Zero cells added on each side of the input box (default: the
    /// largest extent of the box).
    pub pad: Option<usize>,
    /// Seminorm order; default `floor(n(1/p - 1)) + 1`.
    pub m: Option<u32>,
}

impl MaximalOptions {
    pub fn new(dictionary_size: usize) -> Self {
        MaximalOptions {
            dictionary_size,
            pad: None,
            m: None,
        }
    }

    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = Some(pad);
        self
    }
}

/// Running max over windows `[i - w, i + w]` along `axis`.
fn sliding_max(a: &ArrayD<f64>, axis: usize, w: usize) -> ArrayD<f64> {
    let mut out = a.clone();
    if w == 0 {
        return out;
    }
    for (mut o, lane) in out.lanes_mut(Axis(axis)).into_iter().zip(a.lanes(Axis(axis))) {
        let len = lane.len();
        let mut dq: VecDeque<usize> = VecDeque::new();
        let mut next = 0;
        for i in 0..len {
            let hi = (i + w).min(len - 1);
            while next <= hi {
                while dq.back().is_some_and(|&b| lane[b] <= lane[next]) {
                    dq.pop_back();
                }
                dq.push_back(next);
                next += 1;
            }
            while dq.front().is_some_and(|&f| f + w < i) {
                dq.pop_front();
            }
            o[i] = lane[*dq.front().expect("window nonempty")];
        }
    }
    out
}

/// The estimator of `f^*` on the padded box.
pub fn grand_maximal_function(f: &GridFunction, p: f64, opts: &MaximalOptions) -> Result<GridFunction> {
    if p <= 0.0 {
        return Err(range_err("p", format!("{p} <= 0")));
    }
    if opts.dictionary_size == 0 {
        return Err(range_err("dictionary_size", "must be positive"));
    }
    let g = f.grid();
    let n = g.dim();
    let h = g.step();
    let pad = opts
        .pad
        .unwrap_or_else(|| g.shape().iter().copied().max().unwrap_or(0));
    let padded = g.padded(pad as i64);
    let out_grid = padded.clone();
    if g.is_empty() || f.max_abs() == 0.0 {
        return Ok(GridFunction::zeros(out_grid));
    }
    let m = opts.m.unwrap_or(moment_order(n, p) + 1);
    let profiles = dictionary(n, m, opts.dictionary_size);

    // zero-padded FFT workspace of twice the padded box
    let shape: Vec<usize> = padded.shape().iter().map(|s| 2 * s).collect();
    let mut spec = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    {
        let mut view = spec.view_mut();
        for a in 0..n {
            view.slice_axis_inplace(Axis(a), ndarray::Slice::from(pad..pad + g.shape()[a]));
        }
        view.zip_mut_with(f.values(), |s, v| *s = Complex64::new(*v, 0.0));
    }
    fft_nd(&mut spec, false);

    let extent = padded.shape().iter().copied().max().unwrap_or(1) as f64 * h;
    let e_lo = -g.k() + 1;
    let e_hi = extent.log2().ceil() as i32;
    let mut best = ArrayD::<f64>::zeros(IxDyn(padded.shape()));
    for prof in &profiles {
        for e in e_lo..=e_hi {
            let t = pow2(e);
            // separable kernel spectrum: product of 1D transforms
            let spectra: Vec<Vec<Complex64>> = (0..n)
                .map(|a| {
                    let len = shape[a];
                    let mut k1: Vec<Complex64> = (0..len)
                        .map(|i| {
                            let z = frequency(i, len) as f64 * h;
                            Complex64::new(h / t * prof.factor(a, z / t), 0.0)
                        })
                        .collect();
                    let mut arr = ArrayD::from_shape_vec(IxDyn(&[len]), std::mem::take(&mut k1)).expect("1d");
                    fft_nd(&mut arr, false);
                    arr.into_raw_vec_and_offset().0
                })
                .collect();
            let mut conv = spec.clone();
            for (idx, v) in conv.indexed_iter_mut() {
                let mut s = Complex64::new(1.0, 0.0);
                for a in 0..n {
                    s *= spectra[a][idx[a]];
                }
                *v *= s;
            }
            fft_nd(&mut conv, true);
            let mut mag = ArrayD::<f64>::zeros(IxDyn(padded.shape()));
            {
                let mut view = conv.view();
                for a in 0..n {
                    view.slice_axis_inplace(Axis(a), ndarray::Slice::from(0..padded.shape()[a]));
                }
                mag.zip_mut_with(&view, |m, c| *m = c.re.abs());
            }
            let w = ((t / (h * (n as f64).sqrt())).ceil() as usize).saturating_sub(1);
            for a in 0..n {
                mag = sliding_max(&mag, a, w);
            }
            best.zip_mut_with(&mag, |b, v| *b = b.max(*v));
        }
    }
    GridFunction::from_values(out_grid, best)
}

/// `||f^*||_{L^p(w)}` from the estimator with default padding.
pub fn grand_maximal_norm(f: &GridFunction, p: f64, weight: Option<&Weight>, dictionary_size: usize) -> Result<f64> {
    let fs = grand_maximal_function(f, p, &MaximalOptions::new(dictionary_size))?;
    lp_norm(&fs, p, weight)
}

/// [`grand_maximal_norm`] of `synthesize(c)` at resolution `k`.
pub fn grand_maximal_norm_coeff(
    c: &CoeffField,
    sys: &WaveletSystem,
    k: i32,
    p: f64,
    weight: Option<&Weight>,
    dictionary_size: usize,
) -> Result<f64> {
    if c.is_empty() {
        return Ok(0.0);
    }
    let f = synthesize(c, sys, k)?;
    grand_maximal_norm(&f, p, weight, dictionary_size)
}
