//! Dyadic samples of the father and mother wavelets.

use nalgebra::{DMatrix, DVector};

use super::filter::FilterBank;
use crate::error::{Error, Result};

/// Finest resolution the cascade will compute.
pub const MAX_RES: u32 = 20;

/// Samples of the unshifted `phi0`, `psi0` (support `[0, L-1]`) at
/// `t * 2^-res`, `t = 0..=(L-1) 2^res`.
#[derive(Clone, Debug)]
pub struct Cascade {
    pub res: u32,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Refinement weights `sqrt2 * h`, formed as `2 h / sum(h)` so that the
/// Haar weights are exactly one.
fn weights(taps: &[f64], lowpass: &[f64]) -> Vec<f64> {
    let s: f64 = lowpass.iter().sum();
    taps.iter().map(|t| 2.0 * t / s).collect()
}

/// `phi0` at the integers `0..L`, normalized to unit sum.
pub fn integer_values(bank: &FilterBank) -> Result<Vec<f64>> {
    let h = bank.lowpass();
    let l = h.len();
    if l == 2 {
        // half-open indicator: phi(0) = 1, phi(1) = 0
        return Ok(vec![1.0, 0.0]);
    }
    let s2 = std::f64::consts::SQRT_2;
    let tap = |i: i64| -> f64 {
        if i >= 0 && (i as usize) < l {
            h[i as usize]
        } else {
            0.0
        }
    };
    // interior points 1..=L-2; endpoints vanish for continuous phi
    let m = l - 2;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            let (k, q) = (r as i64 + 1, c as i64 + 1);
            a[(r, c)] = s2 * tap(2 * k - q) - if r == c { 1.0 } else { 0.0 };
        }
    }
    let full = a.clone();
    // replace the last equation by the normalization sum = 1
    for c in 0..m {
        a[(m - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m);
    rhs[m - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Convergence("integer eigenproblem is singular".into()))?;
    let resid = (&full * &sol).amax();
    if resid > 1e-10 {
        return Err(Error::Convergence(format!(
            "eigenvalue-1 residual {resid:e} at integer points"
        )));
    }
    let mut out = vec![0.0; l];
    out[1..=m].copy_from_slice(sol.as_slice());
    Ok(out)
}

impl Cascade {
    pub fn base(bank: &FilterBank) -> Result<Cascade> {
        let phi = integer_values(bank)?;
        let psi = psi_from_phi(bank, &phi, 0);
        Ok(Cascade { res: 0, phi, psi })
    }

    /// One dyadic refinement step.
    pub fn refine(&self, bank: &FilterBank) -> Cascade {
        let h = weights(bank.lowpass(), bank.lowpass());
        let l = h.len();
        let res = self.res + 1;
        let half = 1usize << self.res;
        let len = (l - 1) * (1usize << res) + 1;
        let mut phi = vec![0.0; len];
        for (t, out) in phi.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, hi) in h.iter().enumerate() {
                let shift = i * half;
                if t >= shift {
                    if let Some(v) = self.phi.get(t - shift) {
                        s += hi * v;
                    }
                }
            }
            *out = s;
        }
        let psi = psi_from_phi(bank, &phi, res);
        Cascade { res, phi, psi }
    }

    pub fn compute(bank: &FilterBank, res: u32) -> Result<Cascade> {
        if res > MAX_RES {
            return Err(Error::Precision(format!("cascade resolution {res} exceeds {MAX_RES}")));
        }
        let mut c = Cascade::base(bank)?;
        while c.res < res {
            c = c.refine(bank);
        }
        Ok(c)
    }

    /// Largest violation of `phi(x) = sqrt2 sum h_i phi(2x - i)` over the grid.
    pub fn two_scale_residual(&self, bank: &FilterBank) -> f64 {
        if self.res == 0 {
            return 0.0;
        }
        let full = 1usize << self.res;
        let s2 = std::f64::consts::SQRT_2;
        let mut worst: f64 = 0.0;
        for (t, &v) in self.phi.iter().enumerate() {
            let mut s = 0.0;
            for (i, hi) in bank.lowpass().iter().enumerate() {
                let idx = 2 * t as i64 - (i * full) as i64;
                if idx >= 0 {
                    if let Some(p) = self.phi.get(idx as usize) {
                        s += hi * p;
                    }
                }
            }
            worst = worst.max((v - s2 * s).abs());
        }
        worst
    }
}

fn psi_from_phi(bank: &FilterBank, phi: &[f64], res: u32) -> Vec<f64> {
    let full = 1i64 << res;
    let g = weights(bank.highpass(), bank.lowpass());
    (0..phi.len())
        .map(|t| {
            let mut s = 0.0;
            for (i, gi) in g.iter().enumerate() {
                let idx = 2 * t as i64 - i as i64 * full;
                if idx >= 0 {
                    if let Some(p) = phi.get(idx as usize) {
                        s += gi * p;
                    }
                }
            }
            s
        })
        .collect()
}
