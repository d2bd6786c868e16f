use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use serde_json::json;

use super::{moment_order, sequence_hardy_norm};
use crate::coeff::CoeffField;
use crate::cube::{Corner, DyadicCube, TensorIndex};
use crate::error::{range_err, Error, Result};
use crate::mra::synthesize;
use crate::numeric::{pairwise_sum, pow2};
use crate::paraproduct::multi_indices;
use crate::wavelet::WaveletSystem;

/// A finite wavelet expansion meant to be an `H^p` atom on `cube`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub coeffs: CoeffField,
    pub cube: DyadicCube,
    pub p: f64,
    pub moment_order: u32,
}

impl Atom {
    pub fn new(coeffs: CoeffField, cube: DyadicCube, p: f64) -> Self {
        let moment_order = moment_order(coeffs.dim(), p);
        Atom {
            coeffs,
            cube,
            p,
            moment_order,
        }
    }

    /// `|R|^{1/2 - 1/p}`.
    pub fn l2_bound(&self) -> f64 {
        self.cube.volume().powf(0.5 - 1.0 / self.p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Sampling resolution; default `j_max + 8` in 1D, `j_max + 5` above.
    pub k: Option<i32>,
    /// Support is tested against the concentric dilate of the cube.
    pub dilation: f64,
    /// Relative slack for the support, L2 and moment checks.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            k: None,
            dilation: 1.0,
            tol: 1e-9,
        }
    }
}

impl VerifyOptions {
    pub fn dilated(mut self, m: f64) -> Self {
        self.dilation = m;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn at(mut self, k: i32) -> Self {
        self.k = Some(k);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomReport {
    pub cube: DyadicCube,
    pub dilation: f64,
    pub k: i32,
    /// `max |a|` outside the (dilated) cube over `max |a|`.
    pub support_excess: f64,
    pub l2: f64,
    pub coeff_l2: f64,
    pub l2_bound: f64,
    /// `(beta, |int (x - c)^beta a| / int |(x - c)^beta a|)` for
    /// `|beta| <= moment_order`.
    pub moments: Vec<(Vec<u32>, f64)>,
    pub support_ok: bool,
    pub l2_ok: bool,
    pub moments_ok: bool,
}

impl AtomReport {
    pub fn passed(&self) -> bool {
        self.support_ok && self.l2_ok && self.moments_ok
    }
}

/// Sample the atom and check support, the L2 bound and vanishing moments.
pub fn atom_verify(atom: &Atom, sys: &WaveletSystem, opts: &VerifyOptions) -> Result<AtomReport> {
    let n = atom.coeffs.dim();
    if atom.cube.dim() != n {
        return Err(Error::Geometry("atom cube dimension differs from its coefficients".into()));
    }
    if !(opts.dilation >= 1.0) {
        return Err(range_err("dilation", format!("{} < 1", opts.dilation)));
    }
    let k = opts
        .k
        .unwrap_or(atom.coeffs.j_max() + if n == 1 { 8 } else { 5 });
    let a = synthesize(&atom.coeffs, sys, k)?;
    let (lo, hi) = atom.cube.dilated_bounds(opts.dilation);
    let slack = 1e-12 * atom.cube.side();
    let peak = a.max_abs();
    let mut outside = 0.0f64;
    for (x, v) in a.points() {
        let inside = x
            .iter()
            .enumerate()
            .all(|(i, t)| *t >= lo[i] - slack && *t <= hi[i] + slack);
        if !inside {
            outside = outside.max(v.abs());
        }
    }
    let support_excess = if peak > 0.0 { outside / peak } else { 0.0 };

    let l2 = a.l2_norm();
    let l2_bound = atom.l2_bound();

    let center = atom.cube.center();
    let mut moments = Vec::new();
    for order in 0..=atom.moment_order.min(1) {
        for beta in multi_indices(n, order) {
            let terms: Vec<(f64, f64)> = a
                .points()
                .map(|(x, v)| {
                    let m: f64 = x
                        .iter()
                        .zip(&center)
                        .zip(&beta)
                        .map(|((t, c), &b)| (t - c).powi(b as i32))
                        .product();
                    (v * m, (v * m).abs())
                })
                .collect();
            let signed = pairwise_sum(&terms.iter().map(|t| t.0).collect::<Vec<_>>());
            let total = pairwise_sum(&terms.iter().map(|t| t.1).collect::<Vec<_>>());
            let r = if total > 0.0 { signed.abs() / total } else { 0.0 };
            moments.push((beta, r));
        }
    }
    Ok(AtomReport {
        cube: atom.cube.clone(),
        dilation: opts.dilation,
        k,
        support_excess,
        l2,
        coeff_l2: atom.coeffs.l2_norm(),
        l2_bound,
        support_ok: support_excess <= opts.tol,
        l2_ok: l2 <= l2_bound * (1.0 + opts.tol),
        moments_ok: moments.iter().all(|(_, r)| *r <= opts.tol),
        moments,
    })
}

/// `f = sum_l mu_l a_l` with the atoms as sub-expansions of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub p: f64,
    pub terms: Vec<(f64, Atom)>,
    /// `(sum |mu|^p)^{1/p}`.
    pub mu_norm: f64,
    pub hardy_norm: f64,
    pub ratio: f64,
}

impl Decomposition {
    /// `sum mu_l a_l` as a coefficient field on the scale range of `like`.
    pub fn reconstruct(&self, like: &CoeffField) -> Result<CoeffField> {
        let mut out = CoeffField::new(like.dim(), like.j_min(), like.j_max());
        for (mu, atom) in &self.terms {
            for (idx, v) in atom.coeffs.wavelets() {
                out.add_wavelet(idx.clone(), mu * v)?;
            }
        }
        Ok(out)
    }
}

/// Square-function values on the finest active level, stored sparsely.
struct Level {
    k: i32,
    cells: HashMap<Corner, f64>,
}

impl Level {
    fn new(f: &CoeffField) -> Self {
        let k = f.wavelets().map(|(i, _)| i.cube.j).max().unwrap_or(0);
        let mut cells: HashMap<Corner, f64> = HashMap::new();
        for (idx, v) in f.wavelets().filter(|(_, v)| **v != 0.0) {
            let q = &idx.cube;
            let e = v * v / q.volume();
            let r = (k - q.j) as u32;
            let n = q.dim();
            let side = 1i64 << r;
            for code in 0..(side as u64).pow(n as u32) {
                let mut rem = code;
                let c: Corner = q
                    .k
                    .iter()
                    .map(|&x| {
                        let d = (rem % side as u64) as i64;
                        rem /= side as u64;
                        (x << r) + d
                    })
                    .collect();
                *cells.entry(c).or_insert(0.0) += e;
            }
        }
        for v in cells.values_mut() {
            *v = v.sqrt();
        }
        Level { k, cells }
    }

    /// Largest `v` with `|{x in J : S(x) > v}| > |J|/2` (0 when none).
    fn median(&self, cube: &DyadicCube) -> f64 {
        let r = (self.k - cube.j) as u32;
        let count = 1u128 << (r as u128 * cube.dim() as u128).min(120);
        let mut vals: Vec<f64> = self
            .cells
            .iter()
            .filter(|(c, _)| c.iter().zip(&cube.k).all(|(x, q)| x >> r == *q))
            .map(|(_, v)| *v)
            .collect();
        let need = (count / 2) as usize;
        if vals.len() <= need {
            return 0.0;
        }
        vals.sort_by(|a, b| b.total_cmp(a));
        vals[need]
    }
}

/// Stopping-time decomposition: cube `I` belongs to level
/// `k(I) = max{k : S > 2^k on more than half of I}`, and is grouped under
/// the coarsest dyadic `R ⊇ I` on which `S > 2^{k(I)}` on more than half.
pub fn finite_atomic_decompose(f: &CoeffField, p: f64) -> Result<Decomposition> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(range_err("p", format!("{p} not in (0, 1]")));
    }
    if f.has_scaling() {
        return Err(Error::Precondition("scaling part present; atoms need vanishing moments".into()));
    }
    let level = Level::new(f);
    let mut cache: HashMap<DyadicCube, f64> = HashMap::new();
    let mut median = |q: &DyadicCube| *cache.entry(q.clone()).or_insert_with(|| level.median(q));

    let mut groups: BTreeMap<(i64, DyadicCube), Vec<(TensorIndex, f64)>> = BTreeMap::new();
    let mut by_cube: BTreeMap<DyadicCube, Vec<(TensorIndex, f64)>> = BTreeMap::new();
    for (idx, v) in f.wavelets() {
        if *v != 0.0 {
            by_cube.entry(idx.cube.clone()).or_default().push((idx.clone(), *v));
        }
    }
    for (cube, entries) in by_cube {
        let vs = median(&cube);
        let k = vs.log2().ceil() as i64 - 1;
        let thr = (k as f64).exp2();
        let mut r = cube.clone();
        let mut cur = cube.parent();
        // past this scale fewer than half of any cube can be covered
        while level.cells.len() as f64 > 0.5 * pow2(((level.k - cur.j) as usize * cur.dim()) as i32) {
            if median(&cur) > thr {
                r = cur.clone();
            }
            cur = cur.parent();
        }
        groups.entry((k, r)).or_default().extend(entries);
    }

    let mut terms = Vec::new();
    for ((_, r), entries) in groups {
        let l2 = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        let mu = r.volume().powf(1.0 / p - 0.5) * l2;
        let mut coeffs = CoeffField::new(f.dim(), f.j_min(), f.j_max());
        for (idx, v) in entries {
            coeffs.set_wavelet(idx, v / mu)?;
        }
        terms.push((mu, Atom::new(coeffs, r, p)));
    }
    let mu_norm = terms.iter().map(|(m, _)| m.powf(p)).sum::<f64>().powf(1.0 / p);
    let hardy_norm = sequence_hardy_norm(f, p, None)?;
    let ratio = if hardy_norm > 0.0 { mu_norm / hardy_norm } else { 0.0 };
    Ok(Decomposition {
        p,
        terms,
        mu_norm,
        hardy_norm,
        ratio,
    })
}

/// One JSON line per atom: `{"mu", "cube": {"j", "k"}, "entries": [...]}`.
pub fn atoms_to_jsonl(d: &Decomposition) -> String {
    let mut out = String::new();
    for (mu, atom) in &d.terms {
        let entries: Vec<_> = atom
            .coeffs
            .wavelets()
            .map(|(i, v)| json!({"j": i.cube.j, "k": i.cube.k.to_vec(), "lambda": i.lambda.0, "value": v}))
            .collect();
        let line = json!({
            "mu": mu,
            "cube": {"j": atom.cube.j, "k": atom.cube.k.to_vec()},
            "entries": entries,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Lambda;

    #[test]
    fn median_of_half_covered_parent() {
        let mut f = CoeffField::new(1, 0, 4);
        f.add_wavelet(TensorIndex::new(DyadicCube::new(2, &[0]), Lambda(1)), 1.0).unwrap();
        f.add_wavelet(TensorIndex::new(DyadicCube::new(2, &[1]), Lambda(1)), 2.0).unwrap();
        let level = Level::new(&f);
        assert_eq!(level.median(&DyadicCube::new(2, &[1])), 4.0);
        // parent [0, 1/2): values 2 and 4 on halves
        assert_eq!(level.median(&DyadicCube::new(1, &[0])), 2.0);
        // grandparent: only half is covered
        assert_eq!(level.median(&DyadicCube::new(0, &[0])), 0.0);
    }
}
