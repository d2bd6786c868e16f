//! Dyadic cubes `I_{j,k} = 2^-j (k + [0,1)^n)` and tensor indices.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::numeric::pow2;

pub type Corner = SmallVec<[i64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub j: i32,
    pub k: Corner,
}

impl DyadicCube {
    pub fn new(j: i32, k: &[i64]) -> Self {
        DyadicCube {
            j,
            k: Corner::from_slice(k),
        }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// Side length `2^-j`.
    pub fn side(&self) -> f64 {
        pow2(-self.j)
    }

    /// Volume `2^(-j n)`.
    pub fn volume(&self) -> f64 {
        pow2(-self.j * self.dim() as i32)
    }

    pub fn corner(&self) -> Vec<f64> {
        self.k.iter().map(|&k| k as f64 * self.side()).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.k
            .iter()
            .map(|&k| (k as f64 + 0.5) * self.side())
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            j: self.j - 1,
            k: self.k.iter().map(|k| k.div_euclid(2)).collect(),
        }
    }

    /// Ancestor at the coarser scale `j0 <= j`.
    pub fn ancestor(&self, j0: i32) -> DyadicCube {
        assert!(j0 <= self.j);
        let d = (self.j - j0) as u32;
        DyadicCube {
            j: j0,
            k: self.k.iter().map(|k| k >> d).collect(),
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..1u32 << n)
            .map(|bits| DyadicCube {
                j: self.j + 1,
                k: self
                    .k
                    .iter()
                    .enumerate()
                    .map(|(a, k)| 2 * k + ((bits >> a) & 1) as i64)
                    .collect(),
            })
            .collect()
    }

    /// True when `other` is a (not necessarily strict) dyadic subcube.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.j >= self.j && other.ancestor(self.j) == *self
    }

    /// Real bounds of the concentric dilate `m I`.
    pub fn dilated_bounds(&self, m: f64) -> (Vec<f64>, Vec<f64>) {
        let c = self.center();
        let half = 0.5 * m * self.side();
        (
            c.iter().map(|x| x - half).collect(),
            c.iter().map(|x| x + half).collect(),
        )
    }

    /// `|k - k'|_inf` for two cubes at the same scale.
    pub fn linf_shift(&self, other: &DyadicCube) -> i64 {
        self.k
            .iter()
            .zip(&other.k)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    /// Same scale, corner shifted by `shift`.
    pub fn shifted(&self, shift: &[i64]) -> DyadicCube {
        DyadicCube {
            j: self.j,
            k: self.k.iter().zip(shift).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Element of `E = {0,1}^n \ {0}` stored as a bitmask; bit `a` selects
/// `psi` along axis `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lambda(pub u32);

impl Lambda {
    /// All nonzero masks for dimension `n`, in increasing order.
    pub fn all(n: usize) -> impl Iterator<Item = Lambda> {
        (1..1u32 << n).map(Lambda)
    }

    pub fn from_bits(bits: &[u8]) -> Lambda {
        Lambda(
            bits.iter()
                .enumerate()
                .map(|(a, &b)| (b as u32 & 1) << a)
                .sum(),
        )
    }

    pub fn to_bits(self, n: usize) -> Vec<u8> {
        (0..n).map(|a| ((self.0 >> a) & 1) as u8).collect()
    }

    pub fn is_mother(self, axis: usize) -> bool {
        (self.0 >> axis) & 1 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TensorIndex {
    pub cube: DyadicCube,
    pub lambda: Lambda,
}

impl TensorIndex {
    pub fn new(cube: DyadicCube, lambda: Lambda) -> Self {
        TensorIndex { cube, lambda }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestors_and_children() {
        let c = DyadicCube::new(3, &[-3, 5]);
        assert_eq!(c.parent(), DyadicCube::new(2, &[-2, 2]));
        assert_eq!(c.ancestor(1), DyadicCube::new(1, &[-1, 1]));
        for ch in c.children() {
            assert_eq!(ch.parent(), c);
            assert!(c.contains(&ch));
        }
        assert!(!c.contains(&c.parent()));
    }

    #[test]
    fn geometry() {
        let c = DyadicCube::new(2, &[1]);
        assert_eq!(c.side(), 0.25);
        assert_eq!(c.center(), vec![0.375]);
        let (lo, hi) = c.dilated_bounds(3.0);
        assert_eq!((lo[0], hi[0]), (0.0, 0.75));
    }

    #[test]
    fn lambda_bits() {
        let l = Lambda::from_bits(&[1, 0, 1]);
        assert_eq!(l, Lambda(5));
        assert_eq!(l.to_bits(3), vec![1, 0, 1]);
        assert_eq!(Lambda::all(2).count(), 3);
    }
}
