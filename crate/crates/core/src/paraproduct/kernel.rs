//! Brute-force evaluation of the truncated paraproduct kernels.
//!
//! With `P_j(x,y) = sum_I phi_I(x) phi_I(y)`, `Q_j(x,y) = sum_{I,l} psi_I^l(x)
//! psi_I^l(y)` and `D_j(x,y,z) = sum_{I,l} psi_I^l(x)^2 psi_I^l(y) psi_I^l(z)`,
//! the kernels are `K_1 = sum_j P_j(x,y) Q_j(x,z)`, `K_2 = sum_j Q_j(x,y)
//! P_j(x,z)`, `K_3 = sum_j (Q_j(x,y) Q_j(x,z) - D_j)` and `K_4 = sum_j D_j`.
//! Points must be dyadic rationals so that every wavelet value is exact.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{loglog_fit, pow2};
use crate::wavelet::WaveletSystem;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// Second evaluation point for the regularity quotient in `x`.
    pub x_prime: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub probe: Probe,
    /// `|x-y| + |x-z| + |y-z|`.
    pub distance_sum: f64,
    pub value: f64,
    /// `|K(x,y,z) - K(x',y,z)| / |x - x'|` when `x'` was given.
    pub quotient: Option<f64>,
    /// `(|K_{j_lo}| + |K_{j_hi}|) / |K|`: size of the outermost scale terms.
    pub edge_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityFit {
    pub slope: f64,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelProbe {
    pub operator: usize,
    pub scale_range: (i32, i32),
    pub points: Vec<ProbePoint>,
    pub fitted_slope: f64,
    pub fitted_constant: f64,
    pub regularity: Option<RegularityFit>,
    /// Largest `edge_ratio` over the probes.
    pub tail_estimate: f64,
}

impl KernelProbe {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// `(t, R)` with `x = t 2^-R`, smallest such `R <= 40`.
fn to_dyadic(x: f64) -> Result<(i64, u32)> {
    for r in 0..=40u32 {
        let s = x * pow2(r as i32);
        if s.fract() == 0.0 && s.abs() < 9.0e15 {
            return Ok((s as i64, r));
        }
    }
    Err(Error::Probe(format!("{x} is not a dyadic rational")))
}

struct Point1 {
    t: i64,
    r: u32,
    x: f64,
}

impl Point1 {
    fn new(x: f64) -> Result<Self> {
        let (t, r) = to_dyadic(x)?;
        Ok(Point1 { t, r, x })
    }

    /// `2^{j/2} phi(2^j x - k)` (or `psi`).
    fn eval(&self, sys: &WaveletSystem, mother: bool, j: i32, k: i64) -> Result<f64> {
        let amp = pow2(j).sqrt();
        let v = if j >= self.r as i32 {
            let u = self.t << (j - self.r as i32);
            sys.value_at(mother, 0, u - k)?
        } else {
            let res = (self.r as i32 - j) as u32;
            sys.value_at(mother, res, self.t - (k << res))?
        };
        Ok(amp * v)
    }

    /// Translations `k` with `phi_{j,k}(x)` possibly nonzero.
    fn k_range(&self, sys: &WaveletSystem, j: i32) -> (i64, i64) {
        let u = self.x * pow2(j);
        let lo = (u - (sys.offset() + sys.support_len()) as f64).floor() as i64;
        let hi = (u - sys.offset() as f64).ceil() as i64;
        (lo, hi)
    }
}

/// One-axis sums at level `j` for the triple `(x, y, z)`.
struct AxisSums {
    pxy: f64,
    sxy: f64,
    pxz: f64,
    sxz: f64,
    t0: f64,
    t1: f64,
}

fn axis_sums(sys: &WaveletSystem, j: i32, x: &Point1, y: &Point1, z: &Point1) -> Result<AxisSums> {
    let (lo, hi) = x.k_range(sys, j);
    let mut s = AxisSums {
        pxy: 0.0,
        sxy: 0.0,
        pxz: 0.0,
        sxz: 0.0,
        t0: 0.0,
        t1: 0.0,
    };
    for k in lo..=hi {
        let (fx, gx) = (x.eval(sys, false, j, k)?, x.eval(sys, true, j, k)?);
        if fx == 0.0 && gx == 0.0 {
            continue;
        }
        let (fy, gy) = (y.eval(sys, false, j, k)?, y.eval(sys, true, j, k)?);
        let (fz, gz) = (z.eval(sys, false, j, k)?, z.eval(sys, true, j, k)?);
        s.pxy += fx * fy;
        s.sxy += gx * gy;
        s.pxz += fx * fz;
        s.sxz += gx * gz;
        s.t0 += fx * fx * fy * fz;
        s.t1 += gx * gx * gy * gz;
    }
    Ok(s)
}

fn level_term(i: usize, sys: &WaveletSystem, j: i32, x: &[Point1], y: &[Point1], z: &[Point1]) -> Result<f64> {
    let (mut pxy, mut qxy_all, mut pxz, mut qxz_all, mut d0, mut d_all) = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    for a in 0..x.len() {
        let s = axis_sums(sys, j, &x[a], &y[a], &z[a])?;
        pxy *= s.pxy;
        qxy_all *= s.pxy + s.sxy;
        pxz *= s.pxz;
        qxz_all *= s.pxz + s.sxz;
        d0 *= s.t0;
        d_all *= s.t0 + s.t1;
    }
    let qxy = qxy_all - pxy;
    let qxz = qxz_all - pxz;
    let d = d_all - d0;
    Ok(match i {
        1 => pxy * qxz,
        2 => qxy * pxz,
        3 => qxy * qxz - d,
        _ => d,
    })
}

fn points(v: &[f64]) -> Result<Vec<Point1>> {
    v.iter().map(|&x| Point1::new(x)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-level terms of the truncated kernel `K_i(x, y, z)` for `j` in
/// `[j_lo, j_hi]`.
fn level_terms(i: usize, sys: &WaveletSystem, (j_lo, j_hi): (i32, i32), x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if !(1..=4).contains(&i) {
        return Err(crate::error::range_err("i", format!("{i} not in 1..=4")));
    }
    if x.len() != y.len() || x.len() != z.len() || x.is_empty() {
        return Err(Error::Probe("probe coordinates differ in dimension".into()));
    }
    let (px, py, pz) = (points(x)?, points(y)?, points(z)?);
    let n = x.len() as f64;
    let m = sys.support_radius();
    // all supports at scale >= j_lo have diameter <= m 2^-j_lo sqrt(n)
    if dist(x, y).max(dist(x, z)) > m * pow2(-j_lo) * n.sqrt() {
        return Ok(vec![0.0; (j_hi - j_lo + 1).max(0) as usize]);
    }
    (j_lo..=j_hi)
        .map(|j| level_term(i, sys, j, &px, &py, &pz))
        .collect()
}

/// The truncated kernel `K_i(x, y, z)` summed over `j` in `[j_lo, j_hi]`.
pub fn kernel_value(i: usize, sys: &WaveletSystem, scale_range: (i32, i32), x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    Ok(level_terms(i, sys, scale_range, x, y, z)?.iter().sum())
}

/// Evaluate `K_i` at each probe, fit `log|K|` against the log of the
/// distance sum, and fit the regularity quotients when `x'` is supplied.
pub fn kernel_probe(i: usize, sys: &WaveletSystem, scale_range: (i32, i32), probes: &[Probe]) -> Result<KernelProbe> {
    if scale_range.0 > scale_range.1 {
        return Err(crate::error::range_err("scale_range", "empty"));
    }
    let mut out = Vec::with_capacity(probes.len());
    for p in probes {
        let ds = dist(&p.x, &p.y) + dist(&p.x, &p.z) + dist(&p.y, &p.z);
        if ds == 0.0 {
            return Err(Error::Probe(format!("probe {:?} lies on the diagonal", p.x)));
        }
        let terms = level_terms(i, sys, scale_range, &p.x, &p.y, &p.z)?;
        let value: f64 = terms.iter().sum();
        let edge = terms.first().map_or(0.0, |v| v.abs()) + terms.last().map_or(0.0, |v| v.abs());
        let quotient = match &p.x_prime {
            None => None,
            Some(xp) => {
                let h = dist(&p.x, xp);
                if h == 0.0 {
                    return Err(Error::Probe("x' coincides with x".into()));
                }
                let v2 = kernel_value(i, sys, scale_range, xp, &p.y, &p.z)?;
                Some((value - v2).abs() / h)
            }
        };
        out.push(ProbePoint {
            probe: p.clone(),
            distance_sum: ds,
            value,
            quotient,
            edge_ratio: if value != 0.0 { edge / value.abs() } else { 0.0 },
        });
    }
    let ds: Vec<f64> = out.iter().map(|p| p.distance_sum).collect();
    let vals: Vec<f64> = out.iter().map(|p| p.value).collect();
    let (slope, c) = loglog_fit(&ds, &vals).unwrap_or((f64::NAN, f64::NAN));
    let regularity = if out.iter().all(|p| p.quotient.is_some()) && !out.is_empty() {
        let q: Vec<f64> = out.iter().map(|p| p.quotient.unwrap_or(0.0)).collect();
        loglog_fit(&ds, &q).map(|(s, c)| RegularityFit {
            slope: s,
            constant: c.exp(),
        })
    } else {
        None
    };
    let tail = out.iter().fold(0.0f64, |m, p| m.max(p.edge_ratio));
    Ok(KernelProbe {
        operator: i,
        scale_range,
        points: out,
        fitted_slope: slope,
        fitted_constant: c.exp(),
        regularity,
        tail_estimate: tail,
    })
}

/// Probes `x = s a`, `y = z = s b`, `x' = s a'` (all coordinates equal) for
/// each scale factor `s`.
pub fn self_similar_probes(n: usize, a: f64, b: f64, a_prime: Option<f64>, scales: &[f64]) -> Vec<Probe> {
    scales
        .iter()
        .map(|&s| Probe {
            x: vec![s * a; n],
            y: vec![s * b; n],
            z: vec![s * b; n],
            x_prime: a_prime.map(|ap| vec![s * ap; n]),
        })
        .collect()
}
