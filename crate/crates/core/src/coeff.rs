//! Sparse wavelet coefficient fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cube::{Corner, DyadicCube, Lambda, TensorIndex};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Finite expansion `sum scaling_I phi_I + sum wavelet_{I,lambda} psi^lambda_I`.
///
/// Scaling entries live at the single level `j_min`; wavelet entries at
/// scales `j_min <= j < j_max`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CoeffField {
    n: usize,
    j_min: i32,
    j_max: i32,
    wavelet: BTreeMap<TensorIndex, f64>,
    scaling: BTreeMap<DyadicCube, f64>,
}

/// One JSON-lines record.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Record {
    j: i32,
    k: Vec<i64>,
    lambda: Value,
    value: f64,
}

impl CoeffField {
    pub fn new(n: usize, j_min: i32, j_max: i32) -> Self {
        assert!(n >= 1, "dimension must be positive");
        assert!(j_min <= j_max, "empty scale range");
        CoeffField {
            n,
            j_min,
            j_max,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn len(&self) -> usize {
        self.wavelet.len() + self.scaling.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_scaling(&self) -> bool {
        !self.scaling.is_empty()
    }

    fn check_cube(&self, cube: &DyadicCube) -> Result<()> {
        if cube.dim() != self.n {
            return Err(Error::Geometry(format!(
                "cube dimension {} in a field of dimension {}",
                cube.dim(),
                self.n
            )));
        }
        Ok(())
    }

    /// Add `value` to the wavelet coefficient at `idx`.
    pub fn add_wavelet(&mut self, idx: TensorIndex, value: f64) -> Result<()> {
        self.check_cube(&idx.cube)?;
        let j = idx.cube.j;
        if j < self.j_min || j >= self.j_max {
            return Err(Error::Geometry(format!(
                "wavelet scale {j} outside [{}, {})",
                self.j_min, self.j_max
            )));
        }
        if idx.lambda.0 == 0 || idx.lambda.0 >= 1 << self.n {
            return Err(Error::Geometry(format!("lambda {} not in E", idx.lambda.0)));
        }
        *self.wavelet.entry(idx).or_insert(0.0) += value;
        Ok(())
    }

    pub fn set_wavelet(&mut self, idx: TensorIndex, value: f64) -> Result<()> {
        self.add_wavelet(idx.clone(), 0.0)?;
        self.wavelet.insert(idx, value);
        Ok(())
    }

    /// Add `value` to the scaling coefficient of `cube` (must be at `j_min`).
    pub fn add_scaling(&mut self, cube: DyadicCube, value: f64) -> Result<()> {
        self.check_cube(&cube)?;
        if cube.j != self.j_min {
            return Err(Error::Geometry(format!(
                "scaling entry at scale {} but j_min = {}",
                cube.j, self.j_min
            )));
        }
        *self.scaling.entry(cube).or_insert(0.0) += value;
        Ok(())
    }

    pub fn wavelet(&self, idx: &TensorIndex) -> f64 {
        self.wavelet.get(idx).copied().unwrap_or(0.0)
    }

    pub fn scaling(&self, cube: &DyadicCube) -> f64 {
        self.scaling.get(cube).copied().unwrap_or(0.0)
    }

    pub fn wavelets(&self) -> impl Iterator<Item = (&TensorIndex, &f64)> {
        self.wavelet.iter()
    }

    pub fn scalings(&self) -> impl Iterator<Item = (&DyadicCube, &f64)> {
        self.scaling.iter()
    }

    /// Wavelet entries at scale `j`, in key order.
    pub fn wavelets_at(&self, j: i32) -> impl Iterator<Item = (&TensorIndex, &f64)> {
        let key = |j: i32| TensorIndex {
            cube: DyadicCube {
                j,
                k: Corner::from_elem(i64::MIN, self.n),
            },
            lambda: Lambda(0),
        };
        self.wavelet.range(key(j)..key(j + 1))
    }

    /// Scales that carry at least one wavelet entry.
    pub fn active_scales(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.wavelet.keys().map(|i| i.cube.j).collect();
        v.dedup();
        v
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        let v: Vec<f64> = self
            .wavelet
            .values()
            .chain(self.scaling.values())
            .map(|c| c * c)
            .collect();
        pairwise_sum(&v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.wavelet
            .values()
            .chain(self.scaling.values())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> CoeffField {
        let mut out = self.clone();
        out.wavelet.values_mut().for_each(|v| *v *= c);
        out.scaling.values_mut().for_each(|v| *v *= c);
        out
    }

    /// `a * self + b * other`; scale ranges must agree where scaling parts
    /// are present.
    pub fn combine(&self, a: f64, other: &CoeffField, b: f64) -> Result<CoeffField> {
        if self.n != other.n {
            return Err(Error::Geometry("dimension mismatch".into()));
        }
        let j_min = self.j_min.min(other.j_min);
        if (self.has_scaling() && self.j_min != j_min) || (other.has_scaling() && other.j_min != j_min) {
            return Err(Error::Geometry("incompatible scaling levels".into()));
        }
        let mut out = CoeffField::new(self.n, j_min, self.j_max.max(other.j_max));
        for (src, w) in [(self, a), (other, b)] {
            for (i, v) in &src.wavelet {
                out.add_wavelet(i.clone(), w * v)?;
            }
            for (c, v) in &src.scaling {
                out.add_scaling(c.clone(), w * v)?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &CoeffField) -> Result<CoeffField> {
        self.combine(1.0, other, 1.0)
    }

    /// Largest entrywise difference over the union of keys.
    pub fn max_abs_diff(&self, other: &CoeffField) -> f64 {
        let mut d: f64 = 0.0;
        for (i, v) in &self.wavelet {
            d = d.max((v - other.wavelet(i)).abs());
        }
        for (i, v) in &other.wavelet {
            d = d.max((v - self.wavelet(i)).abs());
        }
        for (c, v) in &self.scaling {
            d = d.max((v - other.scaling(c)).abs());
        }
        for (c, v) in &other.scaling {
            d = d.max((v - self.scaling(c)).abs());
        }
        d
    }

    /// Wavelet entries with `j0 <= j < j1` (scaling part dropped).
    pub fn restrict_scales(&self, j0: i32, j1: i32) -> CoeffField {
        let mut out = CoeffField::new(self.n, j0, j1.max(j0));
        for (i, v) in &self.wavelet {
            if i.cube.j >= j0 && i.cube.j < j1 {
                out.wavelet.insert(i.clone(), *v);
            }
        }
        out
    }

    /// Copy without scaling entries.
    pub fn without_scaling(&self) -> CoeffField {
        let mut out = self.clone();
        out.scaling.clear();
        out
    }

    /// Drop entries with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> CoeffField {
        let mut out = self.clone();
        out.wavelet.retain(|_, v| v.abs() > tol);
        out.scaling.retain(|_, v| v.abs() > tol);
        out
    }

    /// Real bounding box of the supports, given support length `m` and
    /// offset `o` of the 1D system (supports `2^-j (k + o + [0, m])`).
    pub fn support_bounds(&self, m: i64, o: i64) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        let cubes = self
            .wavelet
            .keys()
            .map(|i| &i.cube)
            .chain(self.scaling.keys());
        let mut any = false;
        for c in cubes {
            any = true;
            let s = c.side();
            for a in 0..self.n {
                lo[a] = lo[a].min((c.k[a] + o) as f64 * s);
                hi[a] = hi[a].max((c.k[a] + o + m) as f64 * s);
            }
        }
        any.then_some((lo, hi))
    }

    /// JSON lines: a header `{"n", "j_min", "j_max"}` then one record per
    /// entry `{"j", "k", "lambda", "value"}` with `lambda` either a 0/1 list
    /// or the string `"scaling"`.
    pub fn to_jsonl(&self) -> String {
        let mut out = json!({"n": self.n, "j_min": self.j_min, "j_max": self.j_max}).to_string();
        out.push('\n');
        for (c, v) in &self.scaling {
            let r = Record {
                j: c.j,
                k: c.k.to_vec(),
                lambda: Value::String("scaling".into()),
                value: *v,
            };
            out.push_str(&serde_json::to_string(&r).expect("record"));
            out.push('\n');
        }
        for (i, v) in &self.wavelet {
            let r = Record {
                j: i.cube.j,
                k: i.cube.k.to_vec(),
                lambda: json!(i.lambda.to_bits(self.n)),
                value: *v,
            };
            out.push_str(&serde_json::to_string(&r).expect("record"));
            out.push('\n');
        }
        out
    }

    /// Parse [`to_jsonl`](Self::to_jsonl) output. Without a header the
    /// dimension and scale range are inferred from the records.
    pub fn from_jsonl(text: &str) -> Result<CoeffField> {
        let mut header: Option<(usize, i32, i32)> = None;
        let mut records = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line)?;
            if v.get("n").is_some() && v.get("value").is_none() {
                let get = |k: &str| {
                    v.get(k)
                        .and_then(Value::as_i64)
                        .ok_or_else(|| Error::Parse(format!("header missing {k}")))
                };
                header = Some((get("n")? as usize, get("j_min")? as i32, get("j_max")? as i32));
            } else {
                records.push(serde_json::from_value::<Record>(v)?);
            }
        }
        let (n, j_min, j_max) = match header {
            Some(h) => h,
            None => {
                let n = records.first().map(|r| r.k.len()).unwrap_or(1);
                let j_min = records.iter().map(|r| r.j).min().unwrap_or(0);
                let j_max = records.iter().map(|r| r.j + 1).max().unwrap_or(0);
                (n, j_min, j_max.max(j_min))
            }
        };
        let mut f = CoeffField::new(n, j_min, j_max);
        for r in records {
            let cube = DyadicCube::new(r.j, &r.k);
            match &r.lambda {
                Value::String(s) if s == "scaling" => f.add_scaling(cube, r.value)?,
                Value::Array(bits) => {
                    let bits: Vec<u8> = bits
                        .iter()
                        .map(|b| b.as_u64().map(|x| x as u8))
                        .collect::<Option<_>>()
                        .ok_or_else(|| Error::Parse("lambda entries must be 0/1".into()))?;
                    if bits.len() != n {
                        return Err(Error::Parse("lambda length differs from n".into()));
                    }
                    f.add_wavelet(TensorIndex::new(cube, Lambda::from_bits(&bits)), r.value)?
                }
                other => return Err(Error::Parse(format!("bad lambda {other}"))),
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(j: i32, k: &[i64], l: u32) -> TensorIndex {
        TensorIndex::new(DyadicCube::new(j, k), Lambda(l))
    }

    #[test]
    fn rejects_out_of_range() {
        let mut f = CoeffField::new(1, 0, 3);
        assert!(f.add_wavelet(idx(3, &[0], 1), 1.0).is_err());
        assert!(f.add_wavelet(idx(1, &[0], 0), 1.0).is_err());
        assert!(f.add_scaling(DyadicCube::new(1, &[0]), 1.0).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut f = CoeffField::new(2, -1, 2);
        f.add_wavelet(idx(0, &[1, -2], 3), 0.5).unwrap();
        f.add_wavelet(idx(1, &[0, 0], 1), -1.25).unwrap();
        f.add_scaling(DyadicCube::new(-1, &[0, 0]), 2.0).unwrap();
        let back = CoeffField::from_jsonl(&f.to_jsonl()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn scale_range_query() {
        let mut f = CoeffField::new(1, 0, 4);
        for j in 0..4 {
            for k in -2..2 {
                f.add_wavelet(idx(j, &[k], 1), 1.0).unwrap();
            }
        }
        assert_eq!(f.wavelets_at(2).count(), 4);
        assert!(f.wavelets_at(2).all(|(i, _)| i.cube.j == 2));
        assert_eq!(f.active_scales(), vec![0, 1, 2, 3]);
    }
}
