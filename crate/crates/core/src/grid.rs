//! Uniform dyadic sampling grids.
//!
//! A [`GridBox`] at resolution `K` is a half-open, axis-aligned box whose
//! corners are integer multiples of `2^-K`. Sample `i` along an axis sits at
//! `(lo + i) * 2^-K` and stands for the cell `[x, x + 2^-K)`, so quadrature
//! is the cell sum `sum(values) * 2^(-K n)`. For functions that vanish on the
//! box boundary this coincides with the trapezoid rule.

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, pow2};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridBox {
    k: i32,
    lo: Vec<i64>,
    shape: Vec<usize>,
}

impl GridBox {
    pub fn new(k: i32, lo: Vec<i64>, shape: Vec<usize>) -> Self {
        assert_eq!(lo.len(), shape.len(), "lo/shape dimension mismatch");
        GridBox { k, lo, shape }
    }

    /// `[0,1)^n` sampled at step `2^-k` (requires `k >= 0`).
    pub fn unit(n: usize, k: i32) -> Self {
        assert!(k >= 0);
        GridBox::new(k, vec![0; n], vec![1usize << k; n])
    }

    /// Box from real bounds; every bound must be a multiple of `2^-k`.
    pub fn from_bounds(k: i32, lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Geometry("bound dimensions differ".into()));
        }
        let scale = pow2(k);
        let mut lo = Vec::with_capacity(lower.len());
        let mut shape = Vec::with_capacity(lower.len());
        for (&a, &b) in lower.iter().zip(upper) {
            let (ia, ib) = (a * scale, b * scale);
            if ia.fract() != 0.0 || ib.fract() != 0.0 || ib < ia {
                return Err(Error::Geometry(format!(
                    "bounds [{a}, {b}) are not multiples of 2^-{k}"
                )));
            }
            lo.push(ia as i64);
            shape.push((ib - ia) as usize);
        }
        Ok(GridBox::new(k, lo, shape))
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Exclusive upper grid index along `axis`.
    pub fn hi(&self, axis: usize) -> i64 {
        self.lo[axis] + self.shape[axis] as i64
    }

    pub fn step(&self) -> f64 {
        pow2(-self.k)
    }

    pub fn cell_volume(&self) -> f64 {
        pow2(-self.k * self.dim() as i32)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.lo.iter().map(|&l| l as f64 * self.step()).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.hi(a) as f64 * self.step())
            .collect()
    }

    /// Coordinates of the sample at the given absolute grid index.
    pub fn point(&self, index: &[i64]) -> Vec<f64> {
        index.iter().map(|&i| i as f64 * self.step()).collect()
    }

    pub fn contains_index(&self, index: &[i64]) -> bool {
        index
            .iter()
            .enumerate()
            .all(|(a, &i)| i >= self.lo[a] && i < self.hi(a))
    }

    /// Intersection of two boxes at the same resolution (possibly empty).
    pub fn intersect(&self, other: &GridBox) -> Result<GridBox> {
        self.check_compatible(other)?;
        let mut lo = Vec::with_capacity(self.dim());
        let mut shape = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let l = self.lo[a].max(other.lo[a]);
            let h = self.hi(a).min(other.hi(a));
            lo.push(l);
            shape.push((h - l).max(0) as usize);
        }
        Ok(GridBox::new(self.k, lo, shape))
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &GridBox) -> Result<GridBox> {
        self.check_compatible(other)?;
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        let mut lo = Vec::with_capacity(self.dim());
        let mut shape = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let l = self.lo[a].min(other.lo[a]);
            let h = self.hi(a).max(other.hi(a));
            lo.push(l);
            shape.push((h - l) as usize);
        }
        Ok(GridBox::new(self.k, lo, shape))
    }

    /// Box enlarged by `cells` samples on every side.
    pub fn padded(&self, cells: i64) -> GridBox {
        GridBox::new(
            self.k,
            self.lo.iter().map(|l| l - cells).collect(),
            self.shape
                .iter()
                .map(|&s| (s as i64 + 2 * cells).max(0) as usize)
                .collect(),
        )
    }

    fn check_compatible(&self, other: &GridBox) -> Result<()> {
        if self.k != other.k || self.dim() != other.dim() {
            return Err(Error::Geometry(format!(
                "grid boxes differ in resolution or dimension ({} vs {}, n {} vs {})",
                self.k,
                other.k,
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Iterate absolute grid indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let total = self.len();
        (0..total).map(move |mut flat| {
            let mut idx = vec![0i64; self.dim()];
            for a in (0..self.dim()).rev() {
                let s = self.shape[a];
                idx[a] = self.lo[a] + (flat % s) as i64;
                flat /= s;
            }
            idx
        })
    }
}

/// Real samples on a [`GridBox`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: GridBox,
    values: ArrayD<f64>,
}

impl GridFunction {
    pub fn zeros(grid: GridBox) -> Self {
        let values = ArrayD::zeros(IxDyn(grid.shape()));
        GridFunction { grid, values }
    }

    pub fn from_values(grid: GridBox, values: ArrayD<f64>) -> Result<Self> {
        if values.shape() != grid.shape() {
            return Err(Error::Geometry(format!(
                "value array shape {:?} does not match box shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(grid: GridBox, f: impl Fn(&[f64]) -> f64) -> Self {
        let data: Vec<f64> = grid.indices().map(|idx| f(&grid.point(&idx))).collect();
        let values = ArrayD::from_shape_vec(IxDyn(grid.shape()), data).expect("shape");
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn k(&self) -> i32 {
        self.grid.k()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    /// Value at an absolute grid index; zero outside the box.
    pub fn at(&self, index: &[i64]) -> f64 {
        if !self.grid.contains_index(index) {
            return 0.0;
        }
        let local: Vec<usize> = index
            .iter()
            .zip(self.grid.lo())
            .map(|(i, l)| (i - l) as usize)
            .collect();
        self.values[IxDyn(&local)]
    }

    pub fn as_slice(&self) -> Vec<f64> {
        self.values.iter().copied().collect()
    }

    /// Cell-sum quadrature of the samples.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.as_slice()) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (pairwise_sum(&sq) * self.grid.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        let a: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        pairwise_sum(&a) * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values * c,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.mapv(f),
        }
    }

    /// Re-express on another box of the same resolution; zero where `self`
    /// has no samples.
    pub fn restricted_to(&self, grid: &GridBox) -> Result<GridFunction> {
        let mut out = GridFunction::zeros(grid.clone());
        out.add_scaled(self, 1.0)?;
        Ok(out)
    }

    /// `self += c * other` on the overlap of the two boxes.
    pub fn add_scaled(&mut self, other: &GridFunction, c: f64) -> Result<()> {
        let overlap = self.grid.intersect(&other.grid)?;
        if overlap.is_empty() {
            return Ok(());
        }
        let n = self.dim();
        let so: Vec<usize> = (0..n)
            .map(|a| (overlap.lo()[a] - self.grid.lo()[a]) as usize)
            .collect();
        let oo: Vec<usize> = (0..n)
            .map(|a| (overlap.lo()[a] - other.grid.lo()[a]) as usize)
            .collect();
        let mut dst = self.values.view_mut();
        let mut src = other.values.view();
        for a in 0..n {
            let len = overlap.shape()[a];
            dst.slice_axis_inplace(
                ndarray::Axis(a),
                ndarray::Slice::from(so[a]..so[a] + len),
            );
            src.slice_axis_inplace(
                ndarray::Axis(a),
                ndarray::Slice::from(oo[a]..oo[a] + len),
            );
        }
        dst.zip_mut_with(&src, |d, s| *d += c * s);
        Ok(())
    }

    /// Pointwise combination on identical boxes.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::Geometry("pointwise op on different boxes".into()));
        }
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, b| *a = f(*a, *b));
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Max |self - other| over the hull of both boxes (zero-extended).
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        let hull = self.grid.hull(&other.grid)?;
        let mut d = self.restricted_to(&hull)?;
        d.add_scaled(other, -1.0)?;
        Ok(d.max_abs())
    }

    /// Iterate `(point, value)` pairs in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.grid
            .indices()
            .zip(self.values.iter())
            .map(move |(idx, v)| (self.grid.point(&idx), *v))
    }

    /// CSV with a header line `# k=<K> lo=<i,..> shape=<s,..>` followed by
    /// one `x1,..,xn,value` row per sample in row-major order.
    pub fn to_csv(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = format!(
            "# k={} lo={} shape={}\n",
            self.k(),
            join(self.grid.lo().iter().map(|v| v.to_string()).collect()),
            join(self.grid.shape().iter().map(|v| v.to_string()).collect())
        );
        let cols: Vec<String> = (1..=self.dim()).map(|a| format!("x{a}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",value\n");
        for (p, v) in self.points() {
            for x in p {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<GridFunction> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid csv".into()))?;
        let mut k = None;
        let mut lo = None;
        let mut shape = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok}")))?;
            let ints = |s: &str| -> Result<Vec<i64>> {
                if s.is_empty() {
                    return Ok(vec![]);
                }
                s.split(',')
                    .map(|x| x.parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                    .collect()
            };
            match key {
                "k" => k = Some(val.parse::<i32>().map_err(|e| Error::Parse(e.to_string()))?),
                "lo" => lo = Some(ints(val)?),
                "shape" => shape = Some(ints(val)?.into_iter().map(|s| s as usize).collect()),
                _ => return Err(Error::Parse(format!("unknown header key {key}"))),
            }
        }
        let (k, lo, shape): (i32, Vec<i64>, Vec<usize>) = match (k, lo, shape) {
            (Some(k), Some(l), Some(s)) => (k, l, s),
            _ => return Err(Error::Parse("incomplete grid header".into())),
        };
        let grid = GridBox::new(k, lo, shape);
        let _columns = lines.next();
        let mut data = Vec::with_capacity(grid.len());
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let last = line
                .rsplit(',')
                .next()
                .ok_or_else(|| Error::Parse("empty row".into()))?;
            data.push(last.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
        if data.len() != grid.len() {
            return Err(Error::Parse(format!(
                "expected {} rows, found {}",
                grid.len(),
                data.len()
            )));
        }
        let values = ArrayD::from_shape_vec(IxDyn(grid.shape()), data)
            .map_err(|e| Error::Parse(e.to_string()))?;
        GridFunction::from_values(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_integrates_indicator() {
        let g = GridFunction::from_fn(GridBox::unit(2, 4), |_| 1.0);
        assert_eq!(g.integral(), 1.0);
    }

    #[test]
    fn bounds_must_be_dyadic() {
        assert!(GridBox::from_bounds(2, &[0.0], &[0.3]).is_err());
        let b = GridBox::from_bounds(2, &[-0.5], &[1.0]).unwrap();
        assert_eq!(b.lo(), &[-2]);
        assert_eq!(b.shape(), &[6]);
    }

    #[test]
    fn add_scaled_on_partial_overlap() {
        let a = GridBox::new(1, vec![0], vec![4]);
        let b = GridBox::new(1, vec![2], vec![4]);
        let mut f = GridFunction::from_fn(a, |_| 1.0);
        let g = GridFunction::from_fn(b, |_| 2.0);
        f.add_scaled(&g, 1.0).unwrap();
        assert_eq!(f.as_slice(), vec![1.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn csv_round_trip() {
        let g = GridFunction::from_fn(GridBox::new(3, vec![-2, 1], vec![3, 2]), |x| x[0] - 2.0 * x[1]);
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn row_major_indices() {
        let b = GridBox::new(0, vec![1, 5], vec![2, 2]);
        let idx: Vec<Vec<i64>> = b.indices().collect();
        assert_eq!(idx, vec![vec![1, 5], vec![1, 6], vec![2, 5], vec![2, 6]]);
    }
}
