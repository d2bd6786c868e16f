//! Molecule checks for the products `|I|^{1/2} phi_I psi^lambda_{I + l_I k'}`.
//!
//! Derivatives are finite differences on the sampling grid `K = j + K_cascade`
//! (central inside, one-sided at the array edges). The decay ratio at a grid
//! point is `|d^gamma F(x)| (1 + 2^j |x - 2^-j k|)^M / (2^{jn/2} 2^{j|gamma|})`.

use serde::Serialize;

use crate::cube::{DyadicCube, Lambda};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::mra::tensor_sample;
use crate::numeric::{pairwise_sum, pow2};
use crate::wavelet::WaveletSystem;

/// Resolution of the separable quadrature used for the zero-integral check.
pub const INTEGRAL_RES: u32 = 18;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoleculeConstants {
    pub decay: u32,
    pub orders: Vec<Vec<u32>>,
    /// One fitted constant per multi-index in `orders`.
    pub constants: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoleculeReport {
    pub cube: DyadicCube,
    pub shift: Vec<i64>,
    pub lambda: Lambda,
    pub decay: u32,
    pub orders: Vec<Vec<u32>>,
    /// Largest decay ratio per order.
    pub max_ratio: Vec<f64>,
    /// Grid points whose ratio exceeds the supplied constant, per order.
    pub violations: Vec<usize>,
    pub points: usize,
    /// Separable high-resolution integral of the product.
    pub integral: f64,
    /// Cell-sum integral on the check grid.
    pub grid_integral: f64,
    pub identically_zero: bool,
}

impl MoleculeReport {
    pub fn bound_holds(&self) -> bool {
        self.violations.iter().all(|&v| v == 0)
    }
}

/// All multi-indices in `n` variables with `|gamma| = order`.
pub fn multi_indices(n: usize, order: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(n - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn diff_axis(f: &GridFunction, axis: usize) -> GridFunction {
    let h = f.grid().step();
    let len = f.grid().shape()[axis];
    let mut out = f.clone();
    if len < 2 {
        out.values_mut().fill(0.0);
        return out;
    }
    let src = f.values();
    for (mut dst, lane) in out
        .values_mut()
        .lanes_mut(ndarray::Axis(axis))
        .into_iter()
        .zip(src.lanes(ndarray::Axis(axis)))
    {
        for i in 0..len {
            dst[i] = if i == 0 {
                (lane[1] - lane[0]) / h
            } else if i == len - 1 {
                (lane[len - 1] - lane[len - 2]) / h
            } else {
                (lane[i + 1] - lane[i - 1]) / (2.0 * h)
            };
        }
    }
    out
}

fn derivative(f: &GridFunction, gamma: &[u32]) -> GridFunction {
    let mut d = f.clone();
    for (axis, &g) in gamma.iter().enumerate() {
        for _ in 0..g {
            d = diff_axis(&d, axis);
        }
    }
    d
}

/// `int phi(x) g(x - s) dx` with `g = psi` or `phi`, at resolution `res`.
fn inner_1d(sys: &WaveletSystem, mother: bool, s: i64, res: u32) -> Result<f64> {
    let c = sys.cascade(res)?;
    let g = if mother { &c.psi } else { &c.phi };
    let shift = s << res;
    let len = c.phi.len() as i64;
    let terms: Vec<f64> = (0..len)
        .filter_map(|t| {
            let u = t - shift;
            (0..len).contains(&u).then(|| c.phi[t as usize] * g[u as usize])
        })
        .collect();
    Ok(pairwise_sum(&terms) * pow2(-(res as i32)))
}

/// The sampled product `|I|^{1/2} phi_I psi^lambda_{I + l_I k'}`.
pub fn molecule_samples(sys: &WaveletSystem, cube: &DyadicCube, shift: &[i64], lambda: Lambda, k: i32) -> Result<GridFunction> {
    let phi = tensor_sample(sys, cube, Lambda(0), k)?;
    let psi = tensor_sample(sys, &cube.shifted(shift), lambda, k)?;
    let grid = phi.grid().intersect(psi.grid())?;
    let prod = phi.restricted_to(&grid)?.mul(&psi.restricted_to(&grid)?)?;
    Ok(prod.scaled(cube.volume().sqrt()))
}

/// Decay ratios and zero-integral check for one product. With `constants`,
/// points exceeding `C (1 + 1e-6)` are counted as violations.
pub fn molecule_check(
    sys: &WaveletSystem,
    cube: &DyadicCube,
    shift: &[i64],
    lambda: Lambda,
    decay: u32,
    orders: &[Vec<u32>],
    constants: Option<&MoleculeConstants>,
) -> Result<MoleculeReport> {
    let n = cube.dim();
    if shift.len() != n {
        return Err(crate::error::range_err("shift", "dimension mismatch"));
    }
    if lambda.0 == 0 || lambda.0 >= 1 << n {
        return Err(crate::error::range_err("lambda", format!("{} not in E", lambda.0)));
    }
    for g in orders {
        let total: u32 = g.iter().sum();
        if g.len() != n {
            return Err(crate::error::range_err("orders", "multi-index dimension mismatch"));
        }
        if total > sys.smoothness() {
            return Err(Error::Capability(format!(
                "{} has smoothness {} < |gamma| = {total}",
                sys.name(),
                sys.smoothness()
            )));
        }
    }
    let k = cube.j + sys.k_cascade();
    let f = molecule_samples(sys, cube, shift, lambda, k)?;
    let identically_zero = f.max_abs() == 0.0;
    let j = cube.j;
    let corner = cube.corner();
    let scale = pow2(j);
    let weights: Vec<f64> = f
        .points()
        .map(|(x, _)| {
            let d = x.iter().zip(&corner).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (1.0 + scale * d).powi(decay as i32)
        })
        .collect();
    let mut max_ratio = Vec::with_capacity(orders.len());
    let mut violations = Vec::with_capacity(orders.len());
    for g in orders {
        let total: u32 = g.iter().sum();
        let norm = pow2(j).powf(n as f64 / 2.0) * pow2(j * total as i32);
        let d = derivative(&f, g);
        let ratios: Vec<f64> = d
            .values()
            .iter()
            .zip(&weights)
            .map(|(v, w)| v.abs() * w / norm)
            .collect();
        max_ratio.push(ratios.iter().fold(0.0f64, |m, r| m.max(*r)));
        let limit = constants.and_then(|c| {
            c.orders
                .iter()
                .position(|x| x == g)
                .filter(|_| c.decay == decay)
                .map(|i| c.constants[i] * (1.0 + 1e-6))
        });
        violations.push(match (constants, limit) {
            (None, _) => 0,
            (Some(_), None) => {
                return Err(crate::error::range_err("constants", format!("no constant for order {g:?}")))
            }
            (Some(_), Some(l)) => ratios.iter().filter(|r| **r > l).count(),
        });
    }
    let mut integral = cube.volume().sqrt();
    for a in 0..n {
        integral *= inner_1d(sys, lambda.is_mother(a), shift[a], INTEGRAL_RES)?;
    }
    Ok(MoleculeReport {
        cube: cube.clone(),
        shift: shift.to_vec(),
        lambda,
        decay,
        orders: orders.to_vec(),
        max_ratio,
        violations,
        points: f.grid().len(),
        integral,
        grid_integral: f.integral(),
        identically_zero,
    })
}

/// Fit `C_gamma` at the unit cube over every shift in `(-m, m]^n` and every
/// `lambda`.
pub fn fit_molecule_constants(sys: &WaveletSystem, n: usize, decay: u32, orders: &[Vec<u32>]) -> Result<MoleculeConstants> {
    let m = sys.support_len();
    let unit = DyadicCube::new(0, &vec![0; n]);
    let mut constants = vec![0.0f64; orders.len()];
    let span = (2 * m) as usize;
    let total = span.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let shift: Vec<i64> = (0..n)
            .map(|_| {
                let s = (c % span) as i64 - m + 1;
                c /= span;
                s
            })
            .collect();
        for lambda in Lambda::all(n) {
            let r = molecule_check(sys, &unit, &shift, lambda, decay, orders, None)?;
            for (c, v) in constants.iter_mut().zip(&r.max_ratio) {
                *c = c.max(*v);
            }
        }
    }
    Ok(MoleculeConstants {
        decay,
        orders: orders.to_vec(),
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 1), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(2, 0), vec![vec![0, 0]]);
    }
}
