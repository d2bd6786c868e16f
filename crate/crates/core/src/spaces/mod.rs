//! Norms on grids and coefficient fields, Hardy-space atoms, and the grand
//! maximal function.

mod atoms;
mod maximal;
mod norms;

use serde::{Deserialize, Serialize};

use crate::error::{range_err, Result};

pub use atoms::{
    atom_verify, atoms_to_jsonl, finite_atomic_decompose, Atom, AtomReport, Decomposition,
    VerifyOptions,
};
pub use maximal::{
    dictionary, grand_maximal_function, grand_maximal_norm, grand_maximal_norm_coeff,
    MaximalOptions, Profile,
};
pub use norms::{
    bmo_alpha_norm, carleson_norm, lipschitz_norm, lp_norm, sequence_hardy_norm,
    square_function_on, NEAR_PAIRS,
};

/// `p` in `(n/(n+1), 1)` and the matching `alpha = n(1/p - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
}

impl Exponents {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        let lo = n as f64 / (n as f64 + 1.0);
        if n == 0 || !(p > lo && p < 1.0) {
            return Err(range_err("p", format!("{p} not in ({lo}, 1) for n = {n}")));
        }
        Ok(Exponents {
            n,
            p,
            alpha: n as f64 * (1.0 / p - 1.0),
        })
    }

    /// `floor(n(1/p - 1))`.
    pub fn moment_order(&self) -> u32 {
        moment_order(self.n, self.p)
    }
}

pub fn moment_order(n: usize, p: f64) -> u32 {
    (n as f64 * (1.0 / p - 1.0)).floor().max(0.0) as u32
}

/// `w(x) = (1 + |x|)^(-gamma)`, by default with `gamma = n(1-p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub n: usize,
    pub gamma: f64,
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

impl Weight {
    pub fn new(n: usize, p: f64) -> Self {
        Weight {
            n,
            gamma: n as f64 * (1.0 - p),
        }
    }

    pub fn with_gamma(n: usize, gamma: f64) -> Self {
        Weight { n, gamma }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        (1.0 + r).powf(-self.gamma)
    }

    /// `int_Q w` over the dyadic cube `[corner, corner + side)^n`, by tensor
    /// Gauss-Legendre on subcubes no larger than a quarter of `1 + |x|`.
    pub fn integral_over(&self, corner: &[f64], side: f64) -> f64 {
        let r = corner
            .iter()
            .map(|c| {
                let m = c + 0.5 * side;
                m * m
            })
            .sum::<f64>()
            .sqrt();
        if side > 0.25 * (1.0 + (r - side).max(0.0)) && side > 1e-3 {
            let half = 0.5 * side;
            let n = corner.len();
            let mut total = 0.0;
            for code in 0..(1usize << n) {
                let c: Vec<f64> = (0..n)
                    .map(|a| corner[a] + if code >> a & 1 == 1 { half } else { 0.0 })
                    .collect();
                total += self.integral_over(&c, half);
            }
            return total;
        }
        let n = corner.len();
        let mut total = 0.0;
        let mut x = vec![0.0; n];
        for code in 0..5usize.pow(n as u32) {
            let mut rem = code;
            let mut w = 1.0;
            for a in 0..n {
                let q = rem % 5;
                rem /= 5;
                x[a] = corner[a] + 0.5 * side * (1.0 + GL_NODES[q]);
                w *= 0.5 * GL_WEIGHTS[q];
            }
            total += w * self.eval(&x);
        }
        total * side.powi(n as i32)
    }
}

/// JSON norm report `{"norm", "value", "params", "tolerances"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: String,
    pub value: f64,
    pub params: serde_json::Value,
    pub tolerances: serde_json::Value,
}

impl NormReport {
    pub fn new(norm: &str, value: f64, params: serde_json::Value) -> Self {
        NormReport {
            norm: norm.to_string(),
            value,
            params,
            tolerances: serde_json::json!({}),
        }
    }

    pub fn with_tolerances(mut self, tolerances: serde_json::Value) -> Self {
        self.tolerances = tolerances;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_range() {
        let e = Exponents::new(1, 0.95).unwrap();
        assert!((e.alpha - (1.0 / 0.95 - 1.0)).abs() < 1e-15);
        assert_eq!(e.moment_order(), 0);
        assert!(Exponents::new(1, 0.4).is_err());
        assert!(Exponents::new(2, 1.0).is_err());
    }

    #[test]
    fn weight_integral_matches_closed_form() {
        let w = Weight::new(1, 0.95);
        let exact = (2f64.powf(0.95) - 1.0) / 0.95;
        assert!((w.integral_over(&[0.0], 1.0) - exact).abs() < 1e-12);
        let far = (33f64.powf(0.95) - 17f64.powf(0.95)) / 0.95;
        assert!((w.integral_over(&[16.0], 16.0) - far).abs() < 1e-10);
    }

    #[test]
    fn gamma_variant_is_smaller() {
        let w = Weight::new(2, 0.9);
        let wg = Weight::with_gamma(2, 0.5);
        for x in [[0.3, 0.1], [5.0, -2.0]] {
            assert!(wg.eval(&x) < w.eval(&x) && w.eval(&x) <= 1.0);
        }
    }
}
