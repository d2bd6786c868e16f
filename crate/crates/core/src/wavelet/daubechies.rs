//! Extremal-phase Daubechies lowpass filters.
//!
//! Orders 1 and 2 come from closed forms. Higher orders use the spectral
//! factorization: the roots `y_r` of `P(y) = sum_{k<p} C(p-1+k, k) y^k` are
//! mapped to `z` through `z^2 - (2 - 4y) z + 1 = 0`, the root inside the
//! unit circle is kept, and `h` is proportional to the coefficients (highest
//! power first) of `(1+z)^p prod_r (z - z_r)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{range_err, Error, Result};
use crate::numeric::binomial;

pub const MAX_ORDER: u32 = 10;

pub fn daubechies_lowpass(p: u32) -> Result<Vec<f64>> {
    match p {
        1 => Ok(vec![std::f64::consts::FRAC_1_SQRT_2; 2]),
        2 => {
            let s3 = 3f64.sqrt();
            let d = 4.0 * std::f64::consts::SQRT_2;
            Ok(vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d])
        }
        3..=MAX_ORDER => spectral_factor(p),
        _ => Err(range_err("p", format!("{p} not in [1, {MAX_ORDER}]"))),
    }
}

fn spectral_factor(p: u32) -> Result<Vec<f64>> {
    let deg = (p - 1) as usize;
    // ascending coefficients of P(y)
    let coeffs: Vec<f64> = (0..p as u64)
        .map(|k| binomial(p as u64 - 1 + k, k))
        .collect();
    let roots = poly_roots(&coeffs)?;
    debug_assert_eq!(roots.len(), deg);

    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..p {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for y in roots {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b / 4.0 - 1.0).sqrt();
        let z1 = b / 2.0 + disc;
        let z2 = b / 2.0 - disc;
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), -z]);
    }
    let h: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let s: f64 = h.iter().sum();
    if !s.is_finite() || s == 0.0 {
        return Err(Error::Filter(format!("degenerate spectral factor for p={p}")));
    }
    Ok(h.iter().map(|v| v * std::f64::consts::SQRT_2 / s).collect())
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of a real polynomial given by ascending coefficients: companion
/// matrix eigenvalues, then a few Newton steps on the original polynomial.
fn poly_roots(asc: &[f64]) -> Result<Vec<Complex64>> {
    let deg = asc.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = asc[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -asc[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let mut roots: Vec<Complex64> = eig.iter().map(|c| Complex64::new(c.re, c.im)).collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (mut v, mut dv) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for &c in asc.iter().rev() {
                dv = dv * *r + v;
                v = v * *r + c;
            }
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::Filter("root polishing diverged".into()));
        }
    }
    Ok(roots)
}

/// Hölder smoothness class used for derivative checks: the largest integer
/// `N` with `phi` in `C^N` (for `p >= 3`, derivatives of order `<= N` are
/// continuous). Values follow the known regularity exponents of the family.
pub fn smoothness(p: u32) -> u32 {
    match p {
        1 | 2 => 0,
        3..=5 => 1,
        6..=8 => 2,
        _ => 3,
    }
}
