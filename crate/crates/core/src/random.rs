//! Seeded random coefficient fields.
//!
//! Each wavelet entry consumes draws from [`Lcg64`] in this order: scale
//! `j = j_min + next % (j_max - j_min)`, then per axis the corner
//! `k_a = k_lo + next % (k_hi - k_lo)` where `[k_lo, k_hi)` are the cubes of
//! scale `j` meeting the box, then `lambda = 1 + next % (2^n - 1)`, then the
//! value (`uniform_in(-1, 1)` or a Box-Muller normal). Scaling entries follow
//! the wavelet entries with the same corner and value draws at `j_min`.
//! Repeated keys accumulate.

use serde::{Deserialize, Serialize};

use crate::coeff::CoeffField;
use crate::cube::{DyadicCube, Lambda, TensorIndex};
use crate::numeric::pow2;
use crate::rng::Lcg64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Amplitude {
    Uniform,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub n: usize,
    pub j_min: i32,
    pub j_max: i32,
    pub entries: usize,
    pub scaling_entries: usize,
    pub amplitude: Amplitude,
    /// Real box `[lo, hi)` the cubes must meet.
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

impl FieldSpec {
    /// `entries` uniform wavelet entries on `[0,1)^n`.
    pub fn unit(n: usize, j_min: i32, j_max: i32, entries: usize) -> Self {
        FieldSpec {
            n,
            j_min,
            j_max,
            entries,
            scaling_entries: 0,
            amplitude: Amplitude::Uniform,
            box_lo: vec![0.0; n],
            box_hi: vec![1.0; n],
        }
    }

    pub fn with_scaling(mut self, count: usize) -> Self {
        self.scaling_entries = count;
        self
    }

    fn corner_range(&self, j: i32, axis: usize) -> (i64, i64) {
        let s = pow2(j);
        let lo = (self.box_lo[axis] * s).floor() as i64;
        let hi = ((self.box_hi[axis] * s).ceil() as i64).max(lo + 1);
        (lo, hi)
    }

    fn draw_value(&self, rng: &mut Lcg64) -> f64 {
        match self.amplitude {
            Amplitude::Uniform => rng.uniform_in(-1.0, 1.0),
            Amplitude::Normal => rng.normal(),
        }
    }
}

/// Deterministic random field; an empty scale range gives an empty field.
pub fn random_field(seed: u64, spec: &FieldSpec) -> CoeffField {
    let mut out = CoeffField::new(spec.n, spec.j_min, spec.j_max.max(spec.j_min));
    if spec.j_max <= spec.j_min {
        return out;
    }
    let mut rng = Lcg64::new(seed);
    let span = (spec.j_max - spec.j_min) as u64;
    let lambdas = (1u64 << spec.n) - 1;
    for _ in 0..spec.entries {
        let j = spec.j_min + rng.below(span) as i32;
        let k: Vec<i64> = (0..spec.n)
            .map(|a| {
                let (lo, hi) = spec.corner_range(j, a);
                rng.range_i64(lo, hi)
            })
            .collect();
        let lambda = Lambda(1 + rng.below(lambdas) as u32);
        let v = spec.draw_value(&mut rng);
        out.add_wavelet(TensorIndex::new(DyadicCube::new(j, &k), lambda), v)
            .expect("in range");
    }
    for _ in 0..spec.scaling_entries {
        let k: Vec<i64> = (0..spec.n)
            .map(|a| {
                let (lo, hi) = spec.corner_range(spec.j_min, a);
                rng.range_i64(lo, hi)
            })
            .collect();
        let v = spec.draw_value(&mut rng);
        out.add_scaling(DyadicCube::new(spec.j_min, &k), v).expect("in range");
    }
    out
}
