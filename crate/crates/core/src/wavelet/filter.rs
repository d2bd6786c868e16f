use crate::error::{Error, Result};

/// Residual allowed on the filter bank identities at construction.
pub const FILTER_TOL: f64 = 1e-10;

/// Conjugate-quadrature pair.
///
/// The refinement relation is `phi(x) = sqrt2 * sum_i h[i] phi(2x - offset - i)`
/// and likewise for `psi` with `g`. The highpass is derived from the lowpass
/// by the alternating flip `g[i] = (-1)^i h[L-1-i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    offset: i64,
}

impl FilterBank {
    /// Build and validate. Fails when the lowpass is empty or of odd length,
    /// does not sum to `sqrt 2`, or is not orthonormal to its even shifts.
    pub fn new(lowpass: Vec<f64>, offset: i64) -> Result<Self> {
        let l = lowpass.len();
        if l == 0 || !l.is_multiple_of(2) {
            return Err(Error::Filter(format!("lowpass length {l} must be even and positive")));
        }
        let highpass = (0..l)
            .map(|i| if i % 2 == 0 { lowpass[l - 1 - i] } else { -lowpass[l - 1 - i] })
            .collect();
        let bank = FilterBank {
            lowpass,
            highpass,
            offset,
        };
        let (sum_res, orth_res) = bank.residuals();
        if sum_res > FILTER_TOL {
            return Err(Error::Filter(format!("sum of taps deviates from sqrt2 by {sum_res:e}")));
        }
        if orth_res > FILTER_TOL {
            return Err(Error::Filter(format!("orthonormality residual {orth_res:e}")));
        }
        Ok(bank)
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// `(|sum h - sqrt2|, max_m |sum_k h_k h_{k+2m} - delta_m|)`.
    pub fn residuals(&self) -> (f64, f64) {
        let h = &self.lowpass;
        let sum: f64 = h.iter().sum();
        let mut orth: f64 = 0.0;
        let l = h.len() as i64;
        let mut m = 0i64;
        while 2 * m < l {
            let mut s = 0.0;
            for k in 0..l - 2 * m {
                s += h[k as usize] * h[(k + 2 * m) as usize];
            }
            let target = if m == 0 { 1.0 } else { 0.0 };
            orth = orth.max((s - target).abs());
            m += 1;
        }
        ((sum - std::f64::consts::SQRT_2).abs(), orth)
    }

    /// `sum_i (-1)^i i^l h[L-1-i]`-type moment of the highpass.
    pub fn highpass_moment(&self, l: u32) -> f64 {
        self.highpass
            .iter()
            .enumerate()
            .map(|(i, g)| g * (i as f64).powi(l as i32))
            .sum()
    }

    /// Plain-text taps: the offset on the first line, then one tap per line
    /// at full precision.
    pub fn to_taps_text(&self) -> String {
        let mut s = format!("{}\n", self.offset);
        for h in &self.lowpass {
            s.push_str(&format!("{h:e}\n"));
        }
        s
    }

    pub fn from_taps_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let offset = lines
            .next()
            .ok_or_else(|| Error::Parse("missing offset line".into()))?
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("offset: {e}")))?;
        let taps = lines
            .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("tap {l}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        FilterBank::new(taps, offset)
    }
}
