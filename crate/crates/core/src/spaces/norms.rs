use std::collections::{BTreeMap, HashMap};

use ndarray::{ArrayViewD, Axis, Slice};

use super::Weight;
use crate::coeff::CoeffField;
use crate::cube::DyadicCube;
use crate::error::{range_err, Result};
use crate::grid::{GridBox, GridFunction};
use crate::numeric::{pairwise_sum, pow2};

/// Offsets with `|d|_inf <= NEAR_PAIRS` cells are scanned exhaustively by
/// [`lipschitz_norm`].
pub const NEAR_PAIRS: i64 = 32;

/// `(sum |f|^p w 2^{-Kn})^{1/p}`; the weight is evaluated at cell centers.
pub fn lp_norm(f: &GridFunction, p: f64, weight: Option<&Weight>) -> Result<f64> {
    if p <= 0.0 {
        return Err(range_err("p", format!("{p} <= 0")));
    }
    let h = f.grid().step();
    let terms: Vec<f64> = match weight {
        None => f.values().iter().map(|v| v.abs().powf(p)).collect(),
        Some(w) => f
            .points()
            .map(|(x, v)| {
                let c: Vec<f64> = x.iter().map(|t| t + 0.5 * h).collect();
                v.abs().powf(p) * w.eval(&c)
            })
            .collect(),
    };
    Ok((pairwise_sum(&terms) * f.grid().cell_volume()).powf(1.0 / p))
}

/// `sum_lambda |c_{I,lambda}|^2 / |I|` per cube.
fn cube_energy(c: &CoeffField) -> BTreeMap<DyadicCube, f64> {
    let mut e = BTreeMap::new();
    for (idx, v) in c.wavelets() {
        *e.entry(idx.cube.clone()).or_insert(0.0) += v * v / idx.cube.volume();
    }
    e
}

/// The cubes of `energy` and all their ancestors down to the coarsest
/// active scale, with child lists.
struct CubeTree {
    energy: BTreeMap<DyadicCube, f64>,
    children: HashMap<DyadicCube, Vec<DyadicCube>>,
    roots: Vec<DyadicCube>,
}

impl CubeTree {
    fn new(energy: BTreeMap<DyadicCube, f64>) -> Self {
        let top = energy.keys().map(|q| q.j).min().unwrap_or(0);
        let mut children: HashMap<DyadicCube, Vec<DyadicCube>> = HashMap::new();
        let mut roots = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for q in energy.keys() {
            let mut cur = q.clone();
            while seen.insert(cur.clone()) {
                if cur.j == top {
                    roots.push(cur);
                    break;
                }
                let parent = cur.parent();
                children.entry(parent.clone()).or_default().push(cur);
                cur = parent;
            }
        }
        roots.sort();
        for v in children.values_mut() {
            v.sort();
        }
        CubeTree {
            energy,
            children,
            roots,
        }
    }

    /// `int_Q (acc + S_Q^2)^{p/2} w` where `S_Q` collects the energy of `Q`
    /// and its tree descendants.
    fn integrate(&self, q: &DyadicCube, acc: f64, p: f64, measure: &dyn Fn(&DyadicCube) -> f64) -> f64 {
        let a = acc + self.energy.get(q).copied().unwrap_or(0.0);
        let own = a.powf(0.5 * p);
        match self.children.get(q) {
            None => own * measure(q),
            Some(kids) => {
                let mut rest = measure(q);
                let mut total = 0.0;
                for k in kids {
                    rest -= measure(k);
                    total += self.integrate(k, a, p, measure);
                }
                total + own * rest.max(0.0)
            }
        }
    }
}

/// `|| (sum_{I,lambda} |c|^2 |I|^{-1} chi_I)^{1/2} ||_{L^p(w)}`, computed
/// exactly on the dyadic tree of the active cubes (the square function is
/// constant on each node minus its children). Scaling coefficients are
/// ignored.
pub fn sequence_hardy_norm(c: &CoeffField, p: f64, weight: Option<&Weight>) -> Result<f64> {
    if p <= 0.0 {
        return Err(range_err("p", format!("{p} <= 0")));
    }
    let energy = cube_energy(c);
    if energy.is_empty() {
        return Ok(0.0);
    }
    let tree = CubeTree::new(energy);
    let measure = |q: &DyadicCube| match weight {
        None => q.volume(),
        Some(w) => w.integral_over(&q.corner(), q.side()),
    };
    let parts: Vec<f64> = tree
        .roots
        .iter()
        .map(|r| tree.integrate(r, 0.0, p, &measure))
        .collect();
    Ok(pairwise_sum(&parts).powf(1.0 / p))
}

/// The square function sampled on `grid` (brute force over entries).
pub fn square_function_on(c: &CoeffField, grid: &GridBox) -> Result<GridFunction> {
    let mut s2 = GridFunction::zeros(grid.clone());
    let k = grid.k();
    for (idx, v) in c.wavelets() {
        let q = &idx.cube;
        if q.j > k {
            return Err(crate::error::Error::Precision(format!(
                "cube at scale {} finer than the grid {k}",
                q.j
            )));
        }
        let r = k - q.j;
        let lo: Vec<i64> = q.k.iter().map(|x| x << r).collect();
        let block = GridFunction::from_values(
            GridBox::new(k, lo, vec![1usize << r; q.dim()]),
            ndarray::ArrayD::from_elem(vec![1usize << r; q.dim()], v * v / q.volume()),
        )?;
        s2.add_scaled(&block, 1.0)?;
    }
    Ok(s2.map(f64::sqrt))
}

/// `sup_I (|I|^{-(2 alpha/n + 1)} sum_{J subset I, lambda} |s_{J,lambda}|^2)^{1/2}`
/// over dyadic cubes `I` containing an active entry. Sums are aggregated
/// bottom-up one scale at a time; coarsening stops once every node is a
/// corner cube (`k` in `{-1, 0}^n`), beyond which nodes no longer merge
/// and the prefactor only shrinks.
pub fn carleson_norm(c: &CoeffField, alpha: f64) -> f64 {
    let n = c.dim();
    let mut by_scale: BTreeMap<i32, HashMap<DyadicCube, f64>> = BTreeMap::new();
    for (idx, v) in c.wavelets() {
        *by_scale
            .entry(idx.cube.j)
            .or_default()
            .entry(idx.cube.clone())
            .or_insert(0.0) += v * v;
    }
    let Some((&finest, _)) = by_scale.iter().next_back() else {
        return 0.0;
    };
    let coarsest = *by_scale.keys().next().expect("nonempty");
    let mut level: HashMap<DyadicCube, f64> = HashMap::new();
    let mut best = 0.0f64;
    let mut j = finest;
    loop {
        if let Some(add) = by_scale.get(&j) {
            for (q, v) in add {
                *level.entry(q.clone()).or_insert(0.0) += v;
            }
        }
        let factor = pow2(j).powf(2.0 * alpha + n as f64);
        for s in level.values() {
            best = best.max(factor * s);
        }
        let settled = level.keys().all(|q| q.k.iter().all(|k| *k == 0 || *k == -1));
        if j <= coarsest && settled {
            break;
        }
        let mut up: HashMap<DyadicCube, f64> = HashMap::new();
        for (q, s) in level {
            *up.entry(q.parent()).or_insert(0.0) += s;
        }
        level = up;
        j -= 1;
    }
    best.sqrt()
}

fn shifted_views<'a>(v: &'a ArrayViewD<'a, f64>, d: &[i64]) -> Option<(ArrayViewD<'a, f64>, ArrayViewD<'a, f64>)> {
    let mut a = v.clone();
    let mut b = v.clone();
    for (axis, &off) in d.iter().enumerate() {
        let len = v.shape()[axis] as i64;
        if off.abs() >= len {
            return None;
        }
        if off >= 0 {
            a.slice_axis_inplace(Axis(axis), Slice::from(0..(len - off) as usize));
            b.slice_axis_inplace(Axis(axis), Slice::from(off as usize..len as usize));
        } else {
            a.slice_axis_inplace(Axis(axis), Slice::from((-off) as usize..len as usize));
            b.slice_axis_inplace(Axis(axis), Slice::from(0..(len + off) as usize));
        }
    }
    Some((a, b))
}

/// Offsets in the half space `d > 0` (lexicographic) with
/// `lo < |d|_inf <= hi`, all components multiples of `stride`.
fn ring_offsets(n: usize, lo: i64, hi: i64, stride: i64) -> Vec<Vec<i64>> {
    let m = hi / stride;
    let width = (2 * m + 1) as usize;
    let mut out = Vec::new();
    for code in 0..width.pow(n as u32) {
        let mut rem = code;
        let d: Vec<i64> = (0..n)
            .map(|_| {
                let v = (rem % width) as i64 - m;
                rem /= width;
                v * stride
            })
            .collect();
        let linf = d.iter().map(|x| x.abs()).max().unwrap_or(0);
        let positive = d.iter().rev().find(|x| **x != 0).is_some_and(|x| *x > 0);
        if positive && linf > lo && linf <= hi {
            out.push(d);
        }
    }
    out
}

/// `sup |f(x) - f(y)| / |x - y|^alpha` over sample pairs (plus `sup |f|` when
/// not homogeneous). Pairs with `|x - y|_inf <= 32` cells are scanned
/// exhaustively; beyond that the ring `(32 2^s, 64 2^s]` uses offsets on
/// the lattice of step `2^{s+1}`.
pub fn lipschitz_norm(f: &GridFunction, alpha: f64, homogeneous: bool) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(range_err("alpha", format!("{alpha} not in (0, 1]")));
    }
    let n = f.dim();
    let h = f.grid().step();
    let values = f.values().view();
    let extent = f.grid().shape().iter().copied().max().unwrap_or(0) as i64;
    let mut rings = vec![ring_offsets(n, 0, NEAR_PAIRS, 1)];
    let mut s = 0;
    while NEAR_PAIRS << s < extent {
        rings.push(ring_offsets(n, NEAR_PAIRS << s, NEAR_PAIRS << (s + 1), 2 << s));
        s += 1;
    }
    let mut best = 0.0f64;
    for d in rings.iter().flatten() {
        let Some((a, b)) = shifted_views(&values, d) else {
            continue;
        };
        let mut m = 0.0f64;
        ndarray::Zip::from(&a).and(&b).for_each(|x, y| m = m.max((x - y).abs()));
        let dist = d.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt() * h;
        best = best.max(m / dist.powf(alpha));
    }
    if !homogeneous {
        best += f.max_abs();
    }
    Ok(best)
}

/// `sup_Q (|Q|^{-(1 + alpha/n)} int_Q |f - f_Q|^q)^{1/q}` over the dyadic
/// cubes inside the grid box at every scale from `K` down to the coarsest
/// cube that still fits.
pub fn bmo_alpha_norm(f: &GridFunction, alpha: f64, q: f64) -> Result<f64> {
    if q < 1.0 {
        return Err(range_err("q", format!("{q} < 1")));
    }
    let g = f.grid();
    let n = g.dim();
    let k = g.k();
    let values = f.values().view();
    let mut best = 0.0f64;
    let mut r = 0;
    loop {
        let side = 1i64 << r;
        let counts: Vec<(i64, i64)> = (0..n)
            .map(|a| {
                let c0 = g.lo()[a].div_euclid(side) + i64::from(g.lo()[a].rem_euclid(side) != 0);
                let c1 = g.hi(a).div_euclid(side);
                (c0, c1)
            })
            .collect();
        if counts.iter().any(|(c0, c1)| c1 <= c0) {
            break;
        }
        let vol = pow2(-(k - r) * n as i32);
        let prefactor = vol.powf(-(1.0 + alpha / n as f64));
        let total: i64 = counts.iter().map(|(c0, c1)| c1 - c0).product();
        for code in 0..total {
            let mut rem = code;
            let mut view = values.clone();
            for (a, (c0, c1)) in counts.iter().enumerate() {
                let c = c0 + rem % (c1 - c0);
                rem /= c1 - c0;
                let start = (c * side - g.lo()[a]) as usize;
                view.slice_axis_inplace(Axis(a), Slice::from(start..start + side as usize));
            }
            let cells: Vec<f64> = view.iter().copied().collect();
            let mean = pairwise_sum(&cells) / cells.len() as f64;
            let dev: Vec<f64> = cells.iter().map(|v| (v - mean).abs().powf(q)).collect();
            let integral = pairwise_sum(&dev) * g.cell_volume();
            best = best.max((prefactor * integral).powf(1.0 / q));
        }
        r += 1;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Lambda, TensorIndex};

    #[test]
    fn ring_offsets_cover_half_space() {
        let near = ring_offsets(2, 0, 2, 1);
        assert_eq!(near.len(), (25 - 1) / 2);
        let far = ring_offsets(1, 2, 4, 2);
        assert_eq!(far, vec![vec![4]]);
    }

    #[test]
    fn carleson_two_siblings() {
        let mut c = CoeffField::new(1, 0, 4);
        c.add_wavelet(TensorIndex::new(DyadicCube::new(3, &[4]), Lambda(1)), 1.0).unwrap();
        c.add_wavelet(TensorIndex::new(DyadicCube::new(3, &[5]), Lambda(1)), 1.0).unwrap();
        for alpha in [0.0, 0.3, 0.8] {
            let child = pow2(3).powf(2.0 * alpha + 1.0).sqrt();
            let parent = (2.0 * pow2(2).powf(2.0 * alpha + 1.0)).sqrt();
            assert!((carleson_norm(&c, alpha) - child.max(parent)).abs() < 1e-12);
        }
    }
}
