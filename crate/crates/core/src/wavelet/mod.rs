//! One-dimensional orthonormal wavelet systems.

mod cascade;
mod daubechies;
mod filter;

use std::fmt;
use std::sync::{Arc, OnceLock};

pub use cascade::{integer_values, Cascade, MAX_RES};
pub use daubechies::{daubechies_lowpass, smoothness, MAX_ORDER};
pub use filter::{FilterBank, FILTER_TOL};

use crate::error::{range_err, Result};
use crate::grid::{GridBox, GridFunction};
use crate::numeric::{pairwise_sum, pow2};

/// Default cascade resolution for sampled `phi`/`psi`.
pub const DEFAULT_K_CASCADE: i32 = 10;

/// A filter bank together with lazily computed dyadic samples of `phi`
/// and `psi`. Cloning shares the sample cache.
#[derive(Clone)]
pub struct WaveletSystem {
    name: String,
    bank: FilterBank,
    smoothness: u32,
    moments: u32,
    k_cascade: i32,
    cache: Arc<Vec<OnceLock<Arc<Cascade>>>>,
}

impl fmt::Debug for WaveletSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveletSystem")
            .field("name", &self.name)
            .field("bank", &self.bank)
            .field("smoothness", &self.smoothness)
            .field("moments", &self.moments)
            .field("k_cascade", &self.k_cascade)
            .finish()
    }
}

impl PartialEq for WaveletSystem {
    fn eq(&self, other: &Self) -> bool {
        self.bank == other.bank && self.smoothness == other.smoothness && self.moments == other.moments
    }
}

/// The Haar system: `phi = 1_[0,1)`, `psi = 1_[0,1/2) - 1_[1/2,1)`.
pub fn haar_system() -> WaveletSystem {
    let bank = FilterBank::new(vec![std::f64::consts::FRAC_1_SQRT_2; 2], 0).expect("haar taps");
    WaveletSystem::from_bank("haar", bank, 0, 1)
}

/// Daubechies system with `p` vanishing moments (filter length `2p`).
///
/// The filter offset is `1 - p`, so `phi` and `psi` are supported in
/// `[1-p, p] = 1/2 + (2p-1)[-1/2, 1/2]`.
pub fn daubechies_system(p: u32) -> Result<WaveletSystem> {
    let h = daubechies_lowpass(p)?;
    let bank = FilterBank::new(h, 1 - p as i64)?;
    let name = if p == 1 { "haar".to_string() } else { format!("db{p}") };
    Ok(WaveletSystem::from_bank(&name, bank, smoothness(p), p))
}

/// Parse `haar` or `dbP`.
pub fn system_by_name(name: &str) -> Result<WaveletSystem> {
    let lower = name.to_ascii_lowercase();
    if lower == "haar" {
        return Ok(haar_system());
    }
    if let Some(rest) = lower.strip_prefix("db") {
        let p: u32 = rest
            .parse()
            .map_err(|_| range_err("wavelet", format!("unknown wavelet {name}")))?;
        return daubechies_system(p);
    }
    Err(range_err("wavelet", format!("unknown wavelet {name}")))
}

impl WaveletSystem {
    /// Wrap an arbitrary validated bank. `smoothness` and `moments` are
    /// taken on trust.
    pub fn from_bank(name: &str, bank: FilterBank, smoothness: u32, moments: u32) -> Self {
        WaveletSystem {
            name: name.to_string(),
            bank,
            smoothness,
            moments,
            k_cascade: DEFAULT_K_CASCADE,
            cache: Arc::new((0..=MAX_RES).map(|_| OnceLock::new()).collect()),
        }
    }

    pub fn with_cascade_resolution(mut self, k: i32) -> Self {
        self.k_cascade = k;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn moments(&self) -> u32 {
        self.moments
    }

    pub fn k_cascade(&self) -> i32 {
        self.k_cascade
    }

    pub fn is_haar(&self) -> bool {
        self.bank.len() == 2
    }

    /// `m`: both `phi` and `psi` vanish outside `1/2 + m(-1/2, 1/2)`.
    pub fn support_radius(&self) -> f64 {
        (self.bank.len() - 1) as f64
    }

    /// Support length `L - 1` as an integer.
    pub fn support_len(&self) -> i64 {
        self.bank.len() as i64 - 1
    }

    pub fn offset(&self) -> i64 {
        self.bank.offset()
    }

    /// Cached cascade at resolution `res`.
    pub fn cascade(&self, res: u32) -> Result<Arc<Cascade>> {
        if res > MAX_RES {
            return Err(crate::error::Error::Precision(format!(
                "cascade resolution {res} exceeds {MAX_RES}"
            )));
        }
        if let Some(c) = self.cache[res as usize].get() {
            return Ok(c.clone());
        }
        let c = if res == 0 {
            Cascade::base(&self.bank)?
        } else {
            self.cascade(res - 1)?.refine(&self.bank)
        };
        Ok(self.cache[res as usize].get_or_init(|| Arc::new(c)).clone())
    }

    /// `phi` (or `psi` when `mother`) at `x = t 2^-res`; exact dyadic value.
    pub fn value_at(&self, mother: bool, res: u32, t: i64) -> Result<f64> {
        let c = self.cascade(res)?;
        let idx = t - (self.offset() << res);
        if idx < 0 || idx as usize >= c.phi.len() {
            return Ok(0.0);
        }
        Ok(if mother { c.psi[idx as usize] } else { c.phi[idx as usize] })
    }

    /// Samples of `phi` and `psi` at the cascade resolution.
    pub fn phi_samples(&self) -> Result<GridFunction> {
        self.samples(false, self.k_cascade)
    }

    pub fn psi_samples(&self) -> Result<GridFunction> {
        self.samples(true, self.k_cascade)
    }

    pub fn samples(&self, mother: bool, k: i32) -> Result<GridFunction> {
        if k < 0 {
            return Err(range_err("K", format!("{k} is negative")));
        }
        let c = self.cascade(k as u32)?;
        let cells = (self.support_len() as usize) << k;
        let grid = GridBox::new(k, vec![self.offset() << k], vec![cells]);
        let src = if mother { &c.psi } else { &c.phi };
        let values = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&[cells]), src[..cells].to_vec())
            .expect("shape");
        GridFunction::from_values(grid, values)
    }
}

/// Sample `phi` and `psi` of a bank on the grid of step `2^-K` covering
/// their support.
pub fn cascade_sample(bank: &FilterBank, k: i32) -> Result<(GridFunction, GridFunction)> {
    if !(1..=16).contains(&k) {
        return Err(range_err("K", format!("{k} not in [1, 16]")));
    }
    let sys = WaveletSystem::from_bank("custom", bank.clone(), 0, 0);
    Ok((sys.samples(false, k)?, sys.samples(true, k)?))
}

/// Cell-sum quadrature of `x^l f(x)` in one dimension (`x` = first
/// coordinate for higher-dimensional input).
pub fn moment_integral(samples: &GridFunction, l: u32) -> f64 {
    let terms: Vec<f64> = samples
        .points()
        .map(|(x, v)| v * x[0].powi(l as i32))
        .collect();
    pairwise_sum(&terms) * samples.grid().cell_volume()
}

/// Multi-index moment `int x^beta f(x) dx` by cell sums.
pub fn moment(samples: &GridFunction, beta: &[u32]) -> f64 {
    let terms: Vec<f64> = samples
        .points()
        .map(|(x, v)| {
            v * x
                .iter()
                .zip(beta)
                .map(|(xi, &b)| xi.powi(b as i32))
                .product::<f64>()
        })
        .collect();
    pairwise_sum(&terms) * samples.grid().cell_volume()
}

/// Cell-sum inner product of `phi` and `psi` at resolution `k`.
pub fn phi_psi_inner(sys: &WaveletSystem, k: i32) -> Result<f64> {
    let phi = sys.samples(false, k)?;
    let psi = sys.samples(true, k)?;
    let prod = phi.mul(&psi)?;
    Ok(pairwise_sum(&prod.as_slice()) * pow2(-k))
}
