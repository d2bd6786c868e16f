//! Tensor-product multiresolution analysis on dyadic grids.
//!
//! A [`GridFunction`] at resolution `K` is read as the element of `V_K`
//! whose point values at the grid nodes are the samples (zero outside the
//! box). [`analyze`] recovers its `V_K` coefficients by a separable
//! least-squares deconvolution against the integer values of `phi`, then
//! runs the filter-bank pyramid down to `j_min`. [`synthesize`] runs the
//! pyramid up to `K` and evaluates exactly at the nodes. Both directions use
//! zero extension, never periodization.

use ndarray::{ArrayD, Axis, IxDyn, Zip};

use crate::coeff::CoeffField;
use crate::cube::{DyadicCube, Lambda, TensorIndex};
use crate::error::{range_err, Error, Result};
use crate::grid::{GridBox, GridFunction};
use crate::numeric::pow2;
use crate::wavelet::{integer_values, WaveletSystem, MAX_RES};

/// Which projection [`project`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    /// `P_j`: content at scales `< j`, as scaling coefficients at level `j`.
    V,
    /// `Q_j`: the wavelet coefficients at scale `j`.
    W,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// `out[k] = sum_i f[i] x[stride k + off + i]` along `axis`.
pub(crate) fn gather_axis(x: &GridFunction, axis: usize, f: &[f64], stride: i64, off: i64) -> GridFunction {
    let g = x.grid();
    let s = g.lo()[axis];
    let e = g.hi(axis);
    let l = f.len() as i64;
    let ks = ceil_div(s - off - (l - 1), stride);
    let ke = floor_div(e - 1 - off, stride);
    let len = (ke - ks + 1).max(0) as usize;
    let mut lo = g.lo().to_vec();
    lo[axis] = ks;
    let mut shape = g.shape().to_vec();
    shape[axis] = len;
    let mut out = ArrayD::<f64>::zeros(IxDyn(&shape));
    if len > 0 && g.shape()[axis] > 0 {
        Zip::from(out.lanes_mut(Axis(axis)))
            .and(x.values().lanes(Axis(axis)))
            .for_each(|mut o, inp| {
                for (q, ov) in o.iter_mut().enumerate() {
                    let base = stride * (ks + q as i64) + off - s;
                    let mut acc = 0.0;
                    for (i, fi) in f.iter().enumerate() {
                        let p = base + i as i64;
                        if p >= 0 && (p as usize) < inp.len() {
                            acc += fi * inp[p as usize];
                        }
                    }
                    *ov = acc;
                }
            });
    }
    GridFunction::from_values(GridBox::new(g.k(), lo, shape), out).expect("shape")
}

/// `out[stride k + off + i] += f[i] x[k]` along `axis`.
pub(crate) fn scatter_axis(x: &GridFunction, axis: usize, f: &[f64], stride: i64, off: i64) -> GridFunction {
    let g = x.grid();
    let s = g.lo()[axis];
    let n_in = g.shape()[axis] as i64;
    let l = f.len() as i64;
    let ms = stride * s + off;
    let len = if n_in == 0 { 0 } else { (stride * (n_in - 1) + l) as usize };
    let mut lo = g.lo().to_vec();
    lo[axis] = ms;
    let mut shape = g.shape().to_vec();
    shape[axis] = len;
    let mut out = ArrayD::<f64>::zeros(IxDyn(&shape));
    if len > 0 {
        Zip::from(out.lanes_mut(Axis(axis)))
            .and(x.values().lanes(Axis(axis)))
            .for_each(|mut o, inp| {
                for (k, &v) in inp.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let base = stride as usize * k;
                    for (i, fi) in f.iter().enumerate() {
                        o[base + i] += fi * v;
                    }
                }
            });
    }
    GridFunction::from_values(GridBox::new(g.k(), lo, shape), out).expect("shape")
}

fn with_level(x: GridFunction, level: i32) -> GridFunction {
    let g = x.grid().clone();
    GridFunction::from_values(GridBox::new(level, g.lo().to_vec(), g.shape().to_vec()), x.into_values())
        .expect("shape")
}

/// One analysis step `a_{j+1} -> (a_j, d_j^lambda)`; entry `mask` of the
/// result holds the band with highpass along the axes set in `mask`.
pub(crate) fn analysis_step(sys: &WaveletSystem, a: &GridFunction) -> Vec<GridFunction> {
    let n = a.dim();
    let (h, g, o) = (sys.bank().lowpass(), sys.bank().highpass(), sys.offset());
    let mut bands: Vec<(u32, GridFunction)> = vec![(0, a.clone())];
    for axis in 0..n {
        let mut next = Vec::with_capacity(bands.len() * 2);
        for (mask, b) in &bands {
            next.push((*mask, gather_axis(b, axis, h, 2, o)));
            next.push((*mask | (1 << axis), gather_axis(b, axis, g, 2, o)));
        }
        bands = next;
    }
    bands.sort_by_key(|(m, _)| *m);
    bands
        .into_iter()
        .map(|(_, b)| with_level(b, a.k() - 1))
        .collect()
}

/// Synthesis of one band: upsample `x` (level `j`) to level `j+1` using
/// lowpass or highpass along each axis per `mask`.
pub(crate) fn synthesis_band(sys: &WaveletSystem, x: &GridFunction, mask: u32) -> GridFunction {
    let (h, g, o) = (sys.bank().lowpass(), sys.bank().highpass(), sys.offset());
    let mut cur = x.clone();
    for axis in 0..x.dim() {
        let f = if (mask >> axis) & 1 == 1 { g } else { h };
        cur = scatter_axis(&cur, axis, f, 2, o);
    }
    with_level(cur, x.k() + 1)
}

fn accumulate(acc: Option<GridFunction>, part: GridFunction) -> GridFunction {
    match acc {
        None => part,
        Some(a) => {
            if part.grid().is_empty() {
                return a;
            }
            if a.grid().is_empty() {
                return part;
            }
            let hull = a.grid().hull(part.grid()).expect("same level");
            let mut out = a.restricted_to(&hull).expect("hull");
            out.add_scaled(&part, 1.0).expect("hull");
            out
        }
    }
}

pub(crate) fn empty_level(n: usize, level: i32) -> GridFunction {
    GridFunction::zeros(GridBox::new(level, vec![0; n], vec![0; n]))
}

/// Dense scaling coefficients of `c` at `j_min`.
pub(crate) fn dense_scaling(c: &CoeffField) -> GridFunction {
    dense_from_entries(c.dim(), c.j_min(), c.scalings().map(|(cube, v)| (cube, *v)))
}

fn dense_from_entries<'a>(n: usize, level: i32, entries: impl Iterator<Item = (&'a DyadicCube, f64)>) -> GridFunction {
    let entries: Vec<(&DyadicCube, f64)> = entries.collect();
    if entries.is_empty() {
        return empty_level(n, level);
    }
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for (c, _) in &entries {
        for a in 0..n {
            lo[a] = lo[a].min(c.k[a]);
            hi[a] = hi[a].max(c.k[a]);
        }
    }
    let shape: Vec<usize> = (0..n).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
    let mut arr = ArrayD::<f64>::zeros(IxDyn(&shape));
    for (c, v) in entries {
        let idx: Vec<usize> = (0..n).map(|a| (c.k[a] - lo[a]) as usize).collect();
        arr[IxDyn(&idx)] += v;
    }
    GridFunction::from_values(GridBox::new(level, lo, shape), arr).expect("shape")
}

/// Dense detail bands of `c` at scale `j`, indexed by `lambda - 1`.
pub(crate) fn dense_details(c: &CoeffField, j: i32) -> Vec<GridFunction> {
    let n = c.dim();
    Lambda::all(n)
        .map(|l| {
            dense_from_entries(
                n,
                j,
                c.wavelets_at(j)
                    .filter(|(i, _)| i.lambda == l)
                    .map(|(i, v)| (&i.cube, *v)),
            )
        })
        .collect()
}

/// Scaling coefficients of `P_j c` for every `j` in `[j_min, j_to]`.
pub fn scaling_pyramid(c: &CoeffField, sys: &WaveletSystem, j_to: i32) -> Result<Vec<GridFunction>> {
    if j_to < c.j_min() {
        return Err(range_err("j", format!("{j_to} below j_min {}", c.j_min())));
    }
    let mut levels = vec![dense_scaling(c)];
    for j in c.j_min()..j_to {
        let a = levels.last().expect("nonempty");
        levels.push(up_one(sys, a, &dense_details(c, j), j));
    }
    Ok(levels)
}

pub(crate) fn up_one(sys: &WaveletSystem, a: &GridFunction, details: &[GridFunction], j: i32) -> GridFunction {
    let dim = a.dim();
    let mut acc = None;
    if !a.grid().is_empty() {
        acc = Some(synthesis_band(sys, a, 0));
    }
    for (i, d) in details.iter().enumerate() {
        if d.grid().is_empty() {
            continue;
        }
        acc = Some(accumulate(acc, synthesis_band(sys, d, i as u32 + 1)));
    }
    acc.unwrap_or_else(|| empty_level(dim, j + 1))
}

/// Point values at level `K` of `sum_k a[k] phi_{K,k}`.
pub(crate) fn sample_level(sys: &WaveletSystem, a: &GridFunction) -> Result<GridFunction> {
    let k = a.k();
    let n = a.dim();
    if a.grid().is_empty() {
        return Ok(GridFunction::zeros(GridBox::new(k, vec![0; n], vec![0; n])));
    }
    let (taps, s0) = integer_taps(sys)?;
    let scale = pow2(k).sqrt();
    let mut cur = a.clone();
    for axis in 0..n {
        cur = scatter_axis(&cur, axis, &taps, 1, sys.offset() + s0);
    }
    Ok(with_level(cur.scaled(scale.powi(n as i32)), k))
}

/// Nonzero integer values of `phi0` and the index of the first one.
fn integer_taps(sys: &WaveletSystem) -> Result<(Vec<f64>, i64)> {
    let v = integer_values(sys.bank())?;
    let first = v.iter().position(|x| *x != 0.0).unwrap_or(0);
    let last = v.iter().rposition(|x| *x != 0.0).unwrap_or(0);
    Ok((v[first..=last].to_vec(), first as i64))
}

/// Sample the expansion `c` at step `2^-K` on the box covering its support.
pub fn synthesize(c: &CoeffField, sys: &WaveletSystem, k: i32) -> Result<GridFunction> {
    if k < c.j_max() {
        return Err(Error::Geometry(format!("K = {k} below j_max = {}", c.j_max())));
    }
    let n = c.dim();
    if c.is_empty() {
        return Ok(GridFunction::zeros(GridBox::new(k, vec![0; n], vec![0; n])));
    }
    let levels = scaling_pyramid(c, sys, k)?;
    sample_level(sys, levels.last().expect("level K"))
}

/// Like [`synthesize`] but on a prescribed box (zero where nothing lives).
pub fn synthesize_on(c: &CoeffField, sys: &WaveletSystem, grid: &GridBox) -> Result<GridFunction> {
    let f = synthesize(c, sys, grid.k())?;
    f.restricted_to(grid)
}

/// Sample `sum a_I phi_I + sum d psi` for dense level-`j` arrays at `K`.
/// `details` is indexed by `lambda - 1` and may be empty.
pub(crate) fn synthesize_dense(
    sys: &WaveletSystem,
    a: &GridFunction,
    details: &[GridFunction],
    k: i32,
) -> Result<GridFunction> {
    let j = a.k();
    let mut cur = if details.iter().all(|d| d.grid().is_empty()) {
        a.clone()
    } else {
        up_one(sys, a, details, j)
    };
    if k < cur.k() {
        return Err(Error::Precision(format!("K = {k} cannot resolve scale {j}")));
    }
    while cur.k() < k {
        let level = cur.k();
        cur = up_one(sys, &cur, &[], level);
    }
    sample_level(sys, &cur)
}

/// Banded Cholesky factor of a symmetric positive definite Toeplitz matrix
/// of order `m` with first row `r[0..=bw]`.
struct BandedCholesky {
    m: usize,
    bw: usize,
    // l[i][d] = L[i][i - d]
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    fn toeplitz(r: &[f64], m: usize) -> Result<Self> {
        let bw = r.len() - 1;
        let mut l = vec![vec![0.0; bw + 1]; m];
        for i in 0..m {
            for d in (0..=bw.min(i)).rev() {
                let jcol = i - d;
                let mut s = r[d];
                for q in 1..=bw {
                    if d + q > bw || q > jcol {
                        break;
                    }
                    // L[i][jcol - q] * L[jcol][jcol - q]
                    s -= l[i][d + q] * l[jcol][q];
                }
                if d == 0 {
                    if s <= 0.0 {
                        return Err(Error::Precision("prefilter normal matrix is not positive definite".into()));
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][d] = s / l[jcol][0];
                }
            }
        }
        Ok(BandedCholesky { m, bw, l })
    }

    fn solve(&self, b: &mut [f64]) {
        let (m, bw) = (self.m, self.bw);
        for i in 0..m {
            let mut s = b[i];
            for d in 1..=bw.min(i) {
                s -= self.l[i][d] * b[i - d];
            }
            b[i] = s / self.l[i][0];
        }
        for i in (0..m).rev() {
            let mut s = b[i];
            for d in 1..=bw.min(m - 1 - i) {
                s -= self.l[i + d][d] * b[i + d];
            }
            b[i] = s / self.l[i][0];
        }
    }
}

/// Least-squares `V_K` coefficients of the zero-extended samples.
fn prefilter(sys: &WaveletSystem, f: &GridFunction) -> Result<GridFunction> {
    let (taps, s0) = integer_taps(sys)?;
    let n = f.dim();
    let off = sys.offset() + s0;
    let bw = taps.len() - 1;
    let r: Vec<f64> = (0..=bw)
        .map(|d| (0..taps.len() - d).map(|s| taps[s] * taps[s + d]).sum())
        .collect();
    let mut cur = f.clone();
    for axis in 0..n {
        let mut rhs = gather_axis(&cur, axis, &taps, 1, off);
        if bw > 0 {
            let m = rhs.grid().shape()[axis];
            let chol = BandedCholesky::toeplitz(&r, m)?;
            let mut buf = vec![0.0; m];
            for mut lane in rhs.values_mut().lanes_mut(Axis(axis)) {
                for (b, v) in buf.iter_mut().zip(lane.iter()) {
                    *b = *v;
                }
                chol.solve(&mut buf);
                for (v, b) in lane.iter_mut().zip(&buf) {
                    *v = *b;
                }
            }
        } else {
            let c = taps[0];
            rhs = rhs.scaled(1.0 / (c * c));
        }
        cur = rhs;
    }
    let scale = pow2(-f.k()).sqrt().powi(n as i32);
    Ok(with_level(cur.scaled(scale), f.k()))
}

/// Wavelet coefficients at scales `[j_min, j_max)` and scaling coefficients
/// at `j_min` of the function represented by `f`.
///
/// Content of `f` at scales `>= j_max` is discarded (this is `P_{j_max} f`).
pub fn analyze(f: &GridFunction, sys: &WaveletSystem, j_min: i32, j_max: i32) -> Result<CoeffField> {
    if j_min > j_max {
        return Err(Error::Geometry(format!("j_min {j_min} > j_max {j_max}")));
    }
    if j_max > f.k() {
        return Err(Error::Geometry(format!("j_max {j_max} exceeds grid resolution {}", f.k())));
    }
    let n = f.dim();
    let mut out = CoeffField::new(n, j_min, j_max);
    if f.grid().is_empty() {
        return Ok(out);
    }
    let mut a = prefilter(sys, f)?;
    for j in (j_min..f.k()).rev() {
        let bands = analysis_step(sys, &a);
        if j < j_max {
            for (mask, band) in bands.iter().enumerate().skip(1) {
                for (idx, v) in band.grid().indices().zip(band.values().iter()) {
                    if *v != 0.0 {
                        out.add_wavelet(TensorIndex::new(DyadicCube::new(j, &idx), Lambda(mask as u32)), *v)?;
                    }
                }
            }
        }
        a = bands.into_iter().next().expect("lowpass band");
    }
    for (idx, v) in a.grid().indices().zip(a.values().iter()) {
        if *v != 0.0 {
            out.add_scaling(DyadicCube::new(j_min, &idx), *v)?;
        }
    }
    Ok(out)
}

/// `P_j f` (as scaling coefficients at `j`) or `Q_j f`.
pub fn project(f: &CoeffField, sys: &WaveletSystem, j: i32, which: Space) -> Result<CoeffField> {
    let (lo, hi) = f.j_range();
    match which {
        Space::W => {
            if j < lo || j >= hi {
                return Err(range_err("j", format!("{j} outside [{lo}, {hi})")));
            }
            Ok(f.restrict_scales(j, j + 1))
        }
        Space::V => {
            if j < lo || j > hi {
                return Err(range_err("j", format!("{j} outside [{lo}, {hi}]")));
            }
            let levels = scaling_pyramid(f, sys, j)?;
            let a = levels.last().expect("level j");
            let mut out = CoeffField::new(f.dim(), j, j);
            for (idx, v) in a.grid().indices().zip(a.values().iter()) {
                if *v != 0.0 {
                    out.add_scaling(DyadicCube::new(j, &idx), *v)?;
                }
            }
            Ok(out)
        }
    }
}

/// Samples of `psi^lambda_I` (`phi_I` when `lambda = 0`) at step `2^-K`,
/// on the box covering its support `2^-j (k + o + [0, m])`.
pub fn tensor_sample(sys: &WaveletSystem, cube: &DyadicCube, lambda: Lambda, k: i32) -> Result<GridFunction> {
    let r = k - cube.j;
    if r < 0 || r as u32 > MAX_RES {
        return Err(Error::Precision(format!(
            "K = {k} cannot resolve scale {} (need 0 <= K - j <= {MAX_RES})",
            cube.j
        )));
    }
    let r = r as u32;
    let n = cube.dim();
    let c = sys.cascade(r)?;
    let cells = (sys.support_len() as usize) << r;
    let norm = pow2(cube.j).sqrt();
    let factors: Vec<&[f64]> = (0..n)
        .map(|a| if lambda.is_mother(a) { &c.psi[..cells] } else { &c.phi[..cells] })
        .collect();
    let lo: Vec<i64> = cube.k.iter().map(|kk| (kk + sys.offset()) << r).collect();
    let grid = GridBox::new(k, lo, vec![cells; n]);
    let mut values = ArrayD::<f64>::from_elem(IxDyn(&vec![cells; n]), norm.powi(n as i32));
    for (axis, fac) in factors.iter().enumerate() {
        for (i, mut lane) in values.axis_iter_mut(Axis(axis)).enumerate() {
            lane.mapv_inplace(|v| v * fac[i]);
        }
    }
    GridFunction::from_values(grid, values)
}
