//! Riesz transforms and Helmholtz projection on the periodic unit torus,
//! divergence-free and curl-free fields, the almost-diagonal weight, and the
//! div-curl product experiment.
//!
//! Spectral operators use the integer frequency vector with Nyquist
//! coordinates set to zero (the same convention as spectral
//! differentiation), so every multiplier maps real fields to real fields.

use ndarray::{ArrayD, Dimension};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::CoeffField;
use crate::cube::DyadicCube;
use crate::error::{range_err, Error, Result};
use crate::fft::{fft_nd, frequency, to_complex};
use crate::grid::{GridBox, GridFunction};
use crate::mra::analyze;
use crate::paraproduct::renormalize;
use crate::rng::Lcg64;
use crate::spaces::{lipschitz_norm, sequence_hardy_norm, Exponents, Weight};
use crate::wavelet::WaveletSystem;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    CurlFree,
    DivFree,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub components: Vec<GridFunction>,
    pub kind: FieldKind,
}

impl VectorField {
    pub fn new(components: Vec<GridFunction>, kind: FieldKind) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Geometry("vector field without components".into()));
        }
        for c in &components {
            if c.dim() != n || c.grid() != components[0].grid() {
                return Err(Error::Geometry(
                    "components must share one n-dimensional box with n = component count".into(),
                ));
            }
        }
        Ok(VectorField { components, kind })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> &GridBox {
        self.components[0].grid()
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `sum_i F_i G_i`.
    pub fn dot(&self, other: &VectorField) -> Result<GridFunction> {
        if self.dim() != other.dim() {
            return Err(Error::Geometry("dot of fields of different dimension".into()));
        }
        let mut out = self.components[0].mul(&other.components[0])?;
        for (a, b) in self.components.iter().zip(&other.components).skip(1) {
            out.add_scaled(&a.mul(b)?, 1.0)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField {
            components: self.components.iter().map(|f| f.scaled(c)).collect(),
            kind: self.kind,
        }
    }
}

fn check_torus(f: &GridFunction) -> Result<()> {
    let g = f.grid();
    if g.k() < 1 || *g != GridBox::unit(g.dim(), g.k()) {
        return Err(Error::Domain(format!(
            "expected samples of the unit torus [0,1)^{} at step 2^-K, got lo {:?} shape {:?} K {}",
            g.dim(),
            g.lo(),
            g.shape(),
            g.k()
        )));
    }
    Ok(())
}

fn spectrum(f: &GridFunction) -> ArrayD<Complex64> {
    let mut s = to_complex(f.values());
    fft_nd(&mut s, false);
    s
}

fn from_spectrum(grid: &GridBox, mut s: ArrayD<Complex64>) -> GridFunction {
    fft_nd(&mut s, true);
    GridFunction::from_values(grid.clone(), s.mapv(|c| c.re)).expect("same shape")
}

/// Effective frequency vector of a bin (Nyquist coordinates zeroed).
fn xi(index: &[usize], len: usize) -> Vec<f64> {
    index
        .iter()
        .map(|&i| {
            if 2 * i == len {
                0.0
            } else {
                frequency(i, len) as f64
            }
        })
        .collect()
}

fn apply_multiplier(f: &GridFunction, m: impl Fn(&[f64]) -> Complex64) -> GridFunction {
    let len = f.grid().shape()[0];
    let mut s = spectrum(f);
    for (idx, v) in s.indexed_iter_mut() {
        *v *= m(&xi(idx.slice(), len));
    }
    from_spectrum(f.grid(), s)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `R_i f`: Fourier multiplier `-i xi_i / |xi|`, zero at `xi = 0`.
pub fn riesz_apply(i: usize, f: &GridFunction) -> Result<GridFunction> {
    check_torus(f)?;
    if i >= f.dim() {
        return Err(range_err("i", format!("component {i} in dimension {}", f.dim())));
    }
    Ok(apply_multiplier(f, |x| {
        let r = norm(x);
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -x[i] / r)
        }
    }))
}

/// Spectral `d f / d x_axis`.
pub fn spectral_derivative(axis: usize, f: &GridFunction) -> Result<GridFunction> {
    check_torus(f)?;
    if axis >= f.dim() {
        return Err(range_err("axis", format!("{axis} in dimension {}", f.dim())));
    }
    Ok(apply_multiplier(f, |x| Complex64::new(0.0, TWO_PI * x[axis])))
}

fn mean(f: &GridFunction) -> f64 {
    f.integral()
}

/// `F = grad (-Delta)^{-1/2} f`, i.e. `F_i = R_i f`.
pub fn curl_free_field(f: &GridFunction) -> Result<VectorField> {
    check_torus(f)?;
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    if mean(f).abs() > 1e-10 * scale {
        return Err(Error::Domain(format!("mean {} is not zero", mean(f))));
    }
    let comps = (0..f.dim())
        .map(|i| riesz_apply(i, f))
        .collect::<Result<Vec<_>>>()?;
    let field = VectorField::new(comps, FieldKind::CurlFree)?;
    let back = riesz_divergence(&field)?.scaled(-1.0);
    let err = back.max_abs_diff(f)?;
    if err > 1e-8 * scale {
        return Err(Error::Precondition(format!(
            "-sum R_i F_i misses f by {err:.3e}; f carries modes the Riesz vector cannot represent"
        )));
    }
    Ok(field)
}

/// `G = (d_2 u, -d_1 u)` in two dimensions.
pub fn div_free_field(u: &GridFunction) -> Result<VectorField> {
    if u.dim() != 2 {
        return Err(Error::Capability(format!(
            "stream-function construction needs n = 2, got {}; use helmholtz_project",
            u.dim()
        )));
    }
    check_torus(u)?;
    let g = VectorField::new(
        vec![spectral_derivative(1, u)?, spectral_derivative(0, u)?.scaled(-1.0)],
        FieldKind::DivFree,
    )?;
    let r = riesz_divergence_residual(&g)?;
    if r > 1e-8 {
        return Err(Error::Precondition(format!("sum R_i G_i residual {r:.3e}")));
    }
    Ok(g)
}

/// `sum_i R_i V_i`.
pub fn riesz_divergence(v: &VectorField) -> Result<GridFunction> {
    let mut out = riesz_apply(0, &v.components[0])?;
    for (i, c) in v.components.iter().enumerate().skip(1) {
        out.add_scaled(&riesz_apply(i, c)?, 1.0)?;
    }
    Ok(out)
}

/// `(curl-free part, div-free part)`: Fourier coefficients `P V^` and
/// `V^ - P V^` with `P = xi xi^T / |xi|^2`. The mean stays in the second part.
pub fn helmholtz_project(v: &VectorField) -> Result<(VectorField, VectorField)> {
    for c in &v.components {
        check_torus(c)?;
    }
    let n = v.dim();
    let grid = v.grid().clone();
    let len = grid.shape()[0];
    let spectra: Vec<ArrayD<Complex64>> = v.components.iter().map(spectrum).collect();
    let mut curl: Vec<ArrayD<Complex64>> = vec![ArrayD::zeros(spectra[0].raw_dim()); n];
    for (idx, _) in spectra[0].indexed_iter() {
        let x = xi(idx.slice(), len);
        let r2: f64 = x.iter().map(|t| t * t).sum();
        if r2 == 0.0 {
            continue;
        }
        let dot: Complex64 = (0..n).map(|b| spectra[b][&idx] * x[b]).sum();
        for a in 0..n {
            curl[a][&idx] = dot * (x[a] / r2);
        }
    }
    let curl_part: Vec<GridFunction> = curl.into_iter().map(|s| from_spectrum(&grid, s)).collect();
    let div_part = v
        .components
        .iter()
        .zip(&curl_part)
        .map(|(a, b)| a.sub(b))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        VectorField::new(curl_part, FieldKind::CurlFree)?,
        VectorField::new(div_part, FieldKind::DivFree)?,
    ))
}

fn total_energy(spectra: &[ArrayD<Complex64>], len: usize) -> f64 {
    let mut e = 0.0;
    for s in spectra {
        for (idx, v) in s.indexed_iter() {
            let x = xi(idx.slice(), len);
            e += x.iter().map(|t| t * t).sum::<f64>() * v.norm_sqr();
        }
    }
    e
}

/// `(sum_{i<j} |xi_i F^_j - xi_j F^_i|^2 / sum |xi|^2 |F^|^2)^{1/2}`.
pub fn curl_residual(f: &VectorField) -> Result<f64> {
    for c in &f.components {
        check_torus(c)?;
    }
    let len = f.grid().shape()[0];
    let s: Vec<_> = f.components.iter().map(spectrum).collect();
    let mut num = 0.0;
    for (idx, _) in s[0].indexed_iter() {
        let x = xi(idx.slice(), len);
        for i in 0..f.dim() {
            for j in i + 1..f.dim() {
                num += (s[j][&idx] * x[i] - s[i][&idx] * x[j]).norm_sqr();
            }
        }
    }
    let den = total_energy(&s, len);
    Ok(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
}

/// `(sum |xi . G^|^2 / sum |xi|^2 |G^|^2)^{1/2}`.
pub fn div_residual(g: &VectorField) -> Result<f64> {
    for c in &g.components {
        check_torus(c)?;
    }
    let len = g.grid().shape()[0];
    let s: Vec<_> = g.components.iter().map(spectrum).collect();
    let mut num = 0.0;
    for (idx, _) in s[0].indexed_iter() {
        let x = xi(idx.slice(), len);
        let d: Complex64 = (0..g.dim()).map(|i| s[i][&idx] * x[i]).sum();
        num += d.norm_sqr();
    }
    let den = total_energy(&s, len);
    Ok(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
}

/// `||sum R_i G_i||_2 / ||G||_2`.
pub fn riesz_divergence_residual(g: &VectorField) -> Result<f64> {
    let norm = g.l2_norm();
    Ok(if norm > 0.0 {
        riesz_divergence(g)?.l2_norm() / norm
    } else {
        0.0
    })
}

/// `||(R_i f) - F||_2 / ||F||_2` with `f = -sum R_i F_i`.
pub fn riesz_roundtrip_residual(f: &VectorField) -> Result<f64> {
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let scalar = riesz_divergence(f)?.scaled(-1.0);
    let mut e = 0.0;
    for (i, c) in f.components.iter().enumerate() {
        e += riesz_apply(i, &scalar)?.sub(c)?.l2_norm().powi(2);
    }
    Ok(e.sqrt() / norm)
}

/// `p_delta(I, I') = 2^{-|j-j'|(delta+n/2)} ((l + l') / (l + l' + |x_I - x_I'|))^{n+delta}`
/// with side lengths `l`, `l'` and cube centers `x`.
pub fn almost_diag_weight(a: &DyadicCube, b: &DyadicCube, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(range_err("delta", format!("{delta} not in (0, 1/2]")));
    }
    if a.dim() != b.dim() {
        return Err(Error::Geometry("cubes of different dimension".into()));
    }
    let n = a.dim() as f64;
    let gap = (a.j - b.j).abs() as f64;
    let s = a.side() + b.side();
    let d = norm(
        &a.center()
            .iter()
            .zip(b.center())
            .map(|(x, y)| x - y)
            .collect::<Vec<_>>(),
    );
    Ok((-gap * (delta + 0.5 * n)).exp2() * (s / (s + d)).powf(n + delta))
}

/// Smooth cutoff on `[0,1)^n`: 1 on `[1/4, 3/4]^n`, 0 outside `(1/16, 15/16)^n`.
pub fn window(n: usize, k: i32) -> GridFunction {
    fn ramp(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    fn step(t: f64) -> f64 {
        ramp(t) / (ramp(t) + ramp(1.0 - t))
    }
    let axis = |x: f64| {
        let r = 0.5 - (x - 0.5).abs();
        step((r - 1.0 / 16.0) / (3.0 / 16.0))
    };
    GridFunction::from_fn(GridBox::unit(n, k), move |x| x.iter().map(|&t| axis(t)).product())
}

/// Random zero-mean trigonometric polynomial with frequencies `|m_a| <= max_freq`.
pub fn band_limited(seed: u64, n: usize, k: i32, max_freq: u32) -> GridFunction {
    let mut rng = Lcg64::new(seed);
    let side = 2 * max_freq as usize + 1;
    let mut modes = Vec::new();
    for code in 0..side.pow(n as u32) {
        let mut rem = code;
        let m: Vec<f64> = (0..n)
            .map(|_| {
                let d = rem % side;
                rem /= side;
                d as f64 - max_freq as f64
            })
            .collect();
        if m.iter().all(|v| *v == 0.0) {
            continue;
        }
        modes.push((m, rng.uniform_in(-1.0, 1.0), rng.uniform_in(0.0, TWO_PI)));
    }
    GridFunction::from_fn(GridBox::unit(n, k), |x| {
        modes
            .iter()
            .map(|(m, a, ph)| {
                let t: f64 = m.iter().zip(x).map(|(u, v)| u * v).sum();
                a * (TWO_PI * t + ph).cos()
            })
            .sum()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivCurlNorms {
    #[serde(rename = "FG_weighted_Hp")]
    pub fg_weighted_hp: f64,
    #[serde(rename = "A_H1")]
    pub a_h1: f64,
    #[serde(rename = "B_Hp_w")]
    pub b_hp_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivCurlResiduals {
    pub curl: f64,
    pub div: f64,
    pub riesz_roundtrip: f64,
    pub riesz_divergence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivCurlReport {
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: i32,
    pub norms: DivCurlNorms,
    /// `FG_weighted_Hp / (||F||_{H^p} ||G||)`.
    pub ratio: f64,
    pub residuals: DivCurlResiduals,
    pub f_norm: f64,
    /// Homogeneous Lipschitz norm, or the augmented norm when it vanishes.
    pub g_norm: f64,
    pub g_norm_augmented: bool,
    /// `int A` against `sum ||F_i||_2 ||G_i||_2`.
    pub a_integral: f64,
    pub coarse_l1: f64,
    pub domain: String,
}

/// Wavelet coefficients of the windowed components on scales `[0, K)`.
fn windowed_coeffs(v: &VectorField, eta: &GridFunction, sys: &WaveletSystem) -> Result<Vec<CoeffField>> {
    let k = v.grid().k();
    v.components
        .iter()
        .map(|c| analyze(&c.mul(eta)?, sys, 0, k))
        .collect()
}

/// `||F||_{H^p}` as `(sum_i ||F_i||^2)^{1/2}` of sequence norms of the
/// windowed components.
pub fn hardy_vector_norm(f: &VectorField, p: f64, sys: &WaveletSystem) -> Result<f64> {
    let eta = window(f.dim(), f.grid().k());
    let cs = windowed_coeffs(f, &eta, sys)?;
    let mut s = 0.0;
    for c in &cs {
        s += sequence_hardy_norm(c, p, None)?.powi(2);
    }
    Ok(s.sqrt())
}

/// `(sum_i ||G_i||_{Lip alpha}^2)^{1/2}`; with `augmented`, `|G_i(0)|` is added
/// to each component norm.
pub fn lipschitz_vector_norm(g: &VectorField, alpha: f64, augmented: bool) -> Result<f64> {
    let mut s = 0.0;
    for c in &g.components {
        let mut v = lipschitz_norm(c, alpha, true)?;
        if augmented {
            v += c.at(&vec![0; c.dim()]).abs();
        }
        s += v * v;
    }
    Ok(s.sqrt())
}

/// Split `F . G` into `A = sum S(F_i, G_i)` and `B = sum T(F_i, G_i)` on the
/// windowed fields and measure both against `||F|| ||G||`.
pub fn divcurl_experiment(f: &VectorField, g: &VectorField, p: f64, sys: &WaveletSystem) -> Result<DivCurlReport> {
    let n = f.dim();
    let ex = Exponents::new(n, p)?;
    if g.dim() != n || f.grid() != g.grid() {
        return Err(Error::Geometry("F and G must share one box".into()));
    }
    for c in f.components.iter().chain(&g.components) {
        check_torus(c)?;
    }
    if f.kind != FieldKind::CurlFree || g.kind != FieldKind::DivFree {
        return Err(Error::Precondition(format!(
            "need a curl-free F and a div-free G, got {:?} and {:?}",
            f.kind, g.kind
        )));
    }
    let residuals = DivCurlResiduals {
        curl: curl_residual(f)?,
        div: div_residual(g)?,
        riesz_roundtrip: riesz_roundtrip_residual(f)?,
        riesz_divergence: riesz_divergence_residual(g)?,
    };
    if residuals.curl > 1e-8 || residuals.div > 1e-8 {
        return Err(Error::Precondition(format!(
            "curl residual {:.3e}, div residual {:.3e}",
            residuals.curl, residuals.div
        )));
    }
    let k = f.grid().k();
    let eta = window(n, k);
    let cf = windowed_coeffs(f, &eta, sys)?;
    let cg = windowed_coeffs(g, &eta, sys)?;

    let mut results = Vec::with_capacity(n);
    for (a, b) in cf.iter().zip(&cg) {
        results.push(renormalize(a, b, sys, k)?);
    }
    let mut hull = GridBox::unit(n, k);
    for r in &results {
        if !r.value.grid().is_empty() {
            hull = hull.hull(r.value.grid())?;
        }
    }
    let mut a_part = GridFunction::zeros(hull.clone());
    let mut b_part = GridFunction::zeros(hull.clone());
    let mut coarse = GridFunction::zeros(hull.clone());
    for r in &results {
        a_part.add_scaled(r.s(), 1.0)?;
        b_part.add_scaled(&r.t(), 1.0)?;
        coarse.add_scaled(&r.coarse, 1.0)?;
    }
    let mut fg = a_part.clone();
    fg.add_scaled(&b_part, 1.0)?;
    fg.add_scaled(&coarse, 1.0)?;

    let w = Weight::new(n, p);
    let norms = DivCurlNorms {
        fg_weighted_hp: sequence_hardy_norm(&analyze(&fg, sys, 0, k)?, p, Some(&w))?,
        a_h1: sequence_hardy_norm(&analyze(&a_part, sys, 0, k)?, 1.0, None)?,
        b_hp_w: sequence_hardy_norm(&analyze(&b_part, sys, 0, k)?, p, Some(&w))?,
    };

    let f_norm = cf
        .iter()
        .map(|c| sequence_hardy_norm(c, p, None).map(|v| v * v))
        .sum::<Result<f64>>()?
        .sqrt();
    let mut g_norm = lipschitz_vector_norm(g, ex.alpha, false)?;
    let mut g_norm_augmented = false;
    if g_norm == 0.0 {
        g_norm = lipschitz_vector_norm(g, ex.alpha, true)?;
        g_norm_augmented = true;
    }
    let denom = f_norm * g_norm;
    let ratio = if denom > 0.0 { norms.fg_weighted_hp / denom } else { 0.0 };
    let scale: f64 = f
        .components
        .iter()
        .zip(&g.components)
        .map(|(a, b)| a.mul(&eta).map(|x| x.l2_norm() * b.mul(&eta).map(|y| y.l2_norm()).unwrap_or(0.0)))
        .sum::<Result<f64>>()?;
    Ok(DivCurlReport {
        p,
        alpha: ex.alpha,
        k,
        norms,
        ratio,
        residuals,
        f_norm,
        g_norm,
        g_norm_augmented,
        a_integral: if scale > 0.0 { a_part.integral() / scale } else { 0.0 },
        coarse_l1: coarse.l1_norm(),
        domain: "periodic torus [0,1)^n; wavelet side on the smoothly windowed, zero-extended restriction".into(),
    })
}

/// Seeded pair for the experiment in two dimensions: `F = R f` with `f`
/// band-limited, and `G` from a compactly supported stream function inside
/// the window plateau. `F` is normalized to `||F||_{H^p} = 1` and `G` to
/// `||G||_{Lip alpha} = 1`.
pub fn random_divcurl_pair(seed: u64, k: i32, p: f64, sys: &WaveletSystem) -> Result<(VectorField, VectorField)> {
    let ex = Exponents::new(2, p)?;
    let f = band_limited(seed, 2, k, 4);
    let big_f = curl_free_field(&f)?;
    let bump = |t: f64| {
        let s = (t - 0.5) / 0.2;
        if s.abs() < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    };
    let osc = band_limited(seed ^ 0x9e37_79b9_7f4a_7c15, 2, k, 3);
    let envelope = GridFunction::from_fn(GridBox::unit(2, k), |x| bump(x[0]) * bump(x[1]));
    let u = envelope.zip_with(&osc, |e, o| e * (1.0 + o))?;
    let g = div_free_field(&u)?;
    let fn_ = hardy_vector_norm(&big_f, p, sys)?;
    let gn = lipschitz_vector_norm(&g, ex.alpha, false)?;
    Ok((big_f.scaled(1.0 / fn_), g.scaled(1.0 / gn)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nyquist_is_zeroed() {
        assert_eq!(xi(&[2, 1], 4), vec![0.0, 1.0]);
        assert_eq!(xi(&[3], 4), vec![-1.0]);
    }

    #[test]
    fn window_plateau() {
        let w = window(1, 6);
        assert_eq!(w.at(&[32]), 1.0);
        assert_eq!(w.at(&[2]), 0.0);
        assert!(w.at(&[8]) > 0.0 && w.at(&[8]) < 1.0);
    }
}
